/*
 * Copyright (C) 2026 The vbootlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "vbootlab/image_file.h"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "vbootlab/error.h"

namespace vbootlab::disk {

namespace {

int OpenLocked(const std::filesystem::path& path, int flags, int lock_op) {
    int fd = ::open(path.c_str(), flags | O_CLOEXEC, 0644);
    if (fd < 0) {
        throw Error(Errc::IoError, "cannot open " + path.string() + ": " + std::strerror(errno));
    }
    if (::flock(fd, lock_op | LOCK_NB) != 0) {
        int err = errno;
        ::close(fd);
        if (err == EWOULDBLOCK) {
            throw Error(Errc::ImageLocked, path.string() + " is in use by another process");
        }
        throw Error(Errc::IoError, "flock " + path.string() + ": " + std::strerror(err));
    }
    return fd;
}

void WriteAll(int fd, ByteSpan data, const std::filesystem::path& path) {
    std::size_t done = 0;
    while (done < data.size()) {
        ssize_t n = ::pwrite(fd, data.data() + done, data.size() - done, static_cast<off_t>(done));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(Errc::IoError, "write " + path.string() + ": " + std::strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
    if (::ftruncate(fd, static_cast<off_t>(data.size())) != 0) {
        throw Error(Errc::IoError, "truncate " + path.string() + ": " + std::strerror(errno));
    }
}

}  // namespace

Bytes LockedImageFile::ReadAll(int fd, const std::filesystem::path& path) {
    struct stat st {};
    if (::fstat(fd, &st) != 0) {
        throw Error(Errc::IoError, "stat " + path.string() + ": " + std::strerror(errno));
    }
    Bytes data(static_cast<std::size_t>(st.st_size));
    std::size_t done = 0;
    while (done < data.size()) {
        ssize_t n = ::pread(fd, data.data() + done, data.size() - done, static_cast<off_t>(done));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(Errc::IoError, "read " + path.string() + ": " + std::strerror(errno));
        }
        if (n == 0) break;
        done += static_cast<std::size_t>(n);
    }
    data.resize(done);
    return data;
}

LockedImageFile::LockedImageFile(const std::filesystem::path& path, Mode mode,
                                 uint64_t cap_bytes)
    : path_(path),
      mode_(mode),
      fd_(OpenLocked(path, mode == Mode::ReadWrite ? O_RDWR : O_RDONLY,
                     mode == Mode::ReadWrite ? LOCK_EX : LOCK_SH)),
      image_([&] {
          try {
              return DiskImage::Parse(ReadAll(fd_, path), cap_bytes);
          } catch (...) {
              ::close(fd_);
              throw;
          }
      }()) {}

LockedImageFile::~LockedImageFile() {
    if (fd_ >= 0) ::close(fd_);
}

void LockedImageFile::Commit() {
    if (mode_ != Mode::ReadWrite) throw Error(Errc::IoError, "image opened read-only");
    WriteAll(fd_, image_.Serialize(), path_);
    ::fsync(fd_);
}

void CreateImageFile(const std::filesystem::path& path, const DiskImage& img) {
    int fd = OpenLocked(path, O_RDWR | O_CREAT, LOCK_EX);
    try {
        WriteAll(fd, img.Serialize(), path);
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
}

}  // namespace vbootlab::disk
