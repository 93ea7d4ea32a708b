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

#pragma once

#include <filesystem>

#include "vbootlab/disk_image.h"

namespace vbootlab::disk {

// An image file held open under an advisory flock(2) for the lifetime of the
// object. Writers take LOCK_EX, readers LOCK_SH; a conflicting open fails
// immediately with ImageLocked instead of blocking.
class LockedImageFile {
  public:
    enum class Mode { ReadOnly, ReadWrite };

    LockedImageFile(const std::filesystem::path& path, Mode mode,
                    uint64_t cap_bytes = kDefaultImageCap);
    ~LockedImageFile();
    LockedImageFile(const LockedImageFile&) = delete;
    LockedImageFile& operator=(const LockedImageFile&) = delete;

    DiskImage& image() { return image_; }
    const DiskImage& image() const { return image_; }

    // Rewrites the file in place through the locked descriptor.
    void Commit();

  private:
    static Bytes ReadAll(int fd, const std::filesystem::path& path);

    std::filesystem::path path_;
    Mode mode_;
    int fd_ = -1;
    DiskImage image_;
};

// Writes `img` to a new (or truncated) file under an exclusive lock.
void CreateImageFile(const std::filesystem::path& path, const DiskImage& img);

}  // namespace vbootlab::disk
