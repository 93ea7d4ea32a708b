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

// Partition-3 root filesystem model.
//
// Superblock [0x000, 0x600):
//   0x000  magic "RFS1"
//   0x004  version u32 (1)
//   0x008  record_area_length u64
//   0x467  mount-control byte: 0xFF = verified (not mountable, read-only),
//          0x00 = mountable read-write
//   everything else zero
// Record area from 0x600: kind u8, payload_length u32, payload.
//   User (1):        uid u32, privilege u8, name str16, password_hash[32]
//   StartupJob (2):  every_minutes u32, action str16
//   File (3):        path str16, data_length u32, data
// str16 is a u16 length followed by UTF-8. Bytes after the record area are zero.

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vbootlab/bytes.h"
#include "vbootlab/crypto.h"
#include "vbootlab/disk_image.h"

namespace vbootlab::rootfs {

constexpr std::size_t kControlByteOffset = 0x467;
constexpr std::size_t kRecordAreaOffset = 0x600;
constexpr uint8_t kControlEnforced = 0xFF;
constexpr uint8_t kControlOpen = 0x00;
constexpr uint32_t kVersion = 1;
constexpr char kRootfsMagic[] = "RFS1";

enum class Privilege : uint8_t { Normal = 0, Superuser = 1 };

enum class RecordKind : uint8_t { User = 1, StartupJob = 2, File = 3 };

struct User {
    uint32_t uid = 0;
    Privilege privilege = Privilege::Normal;
    std::string name;
    crypto::Digest password_hash{};

    bool operator==(const User&) const = default;
};

struct StartupJob {
    uint32_t every_minutes = 1;
    std::string action;

    bool operator==(const StartupJob&) const = default;
};

struct File {
    std::string path;
    Bytes data;

    bool operator==(const File&) const = default;
};

using Record = std::variant<User, StartupJob, File>;

// Unsalted SHA-256 of the UTF-8 password; models local console logins only.
crypto::Digest HashPassword(std::string_view password);
User MakeUser(uint32_t uid, std::string name, std::string_view password,
              Privilege privilege = Privilege::Normal);

struct RootfsImage {
    uint8_t mount_control = kControlEnforced;
    std::vector<Record> records;  // insertion order is serialization order

    std::vector<User> users() const;
    std::vector<StartupJob> jobs() const;
    std::vector<File> files() const;

    bool operator==(const RootfsImage&) const = default;
};

// Throws DuplicateUser, DuplicatePath or InvalidRecord.
void ValidateRecords(const std::vector<Record>& records);

// Canonical partition-sized encoding. Throws BadControlByte, TooLarge and the
// ValidateRecords errors.
Bytes BuildRootfs(const RootfsImage& image, std::size_t partition_size);
// Records are emitted users first, then jobs, then files.
Bytes BuildRootfs(const std::vector<User>& users, const std::vector<StartupJob>& jobs,
                  const std::vector<File>& files, uint8_t mount_control,
                  std::size_t partition_size);

// Strict inverse of BuildRootfs. Errors carry the offset of the first
// offending byte: BadMagic, BadVersion, BadControlByte, BadSuperblock,
// CorruptRecord.
RootfsImage ParseRootfs(ByteSpan data);

enum class MountMode { ReadOnly, ReadWrite };

// An external mount of partition 3. Only one may exist per DiskImage, and the
// image must outlive (and not move under) the handle.
class MountHandle {
  public:
    MountHandle(MountHandle&& other) noexcept;
    MountHandle& operator=(MountHandle&&) = delete;
    MountHandle(const MountHandle&) = delete;
    MountHandle& operator=(const MountHandle&) = delete;
    ~MountHandle();

    MountMode mode() const { return mode_; }
    const RootfsImage& rootfs() const { return rootfs_; }

    // chroot + useradd. Writes the re-serialized rootfs back to partition 3.
    void AddUser(const User& user);
    void InstallStartupJob(const StartupJob& job);

  private:
    friend MountHandle MountRootfs(disk::DiskImage& img, MountMode mode);
    MountHandle(disk::DiskImage* img, MountMode mode, RootfsImage rootfs)
        : img_(img), mode_(mode), rootfs_(std::move(rootfs)) {}

    void Append(Record record);

    disk::DiskImage* img_;
    MountMode mode_;
    RootfsImage rootfs_;
};

// Granted only when the mount-control byte is 0x00; otherwise MountBlocked.
// Parse errors from partition 3 propagate unchanged.
MountHandle MountRootfs(disk::DiskImage& img, MountMode mode);

}  // namespace vbootlab::rootfs
