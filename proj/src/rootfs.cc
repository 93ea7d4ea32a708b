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

#include "vbootlab/rootfs.h"

#include <algorithm>
#include <cstring>
#include <set>

#include "vbootlab/error.h"

namespace vbootlab::rootfs {

namespace {

constexpr std::size_t kRecordHeaderSize = 5;
constexpr std::size_t kMaxString = 0xffff;

template <typename T>
std::vector<T> Collect(const std::vector<Record>& records) {
    std::vector<T> out;
    for (const Record& r : records) {
        if (const T* item = std::get_if<T>(&r)) out.push_back(*item);
    }
    return out;
}

void CheckString(const std::string& s, const char* field) {
    if (s.size() > kMaxString) {
        throw Error(Errc::InvalidRecord, std::string(field) + " longer than 65535 bytes");
    }
    if (!IsValidUtf8(s)) throw Error(Errc::InvalidRecord, std::string(field) + " is not UTF-8");
}

Bytes EncodePayload(const Record& record) {
    ByteWriter w;
    if (const auto* user = std::get_if<User>(&record)) {
        w.U32(user->uid);
        w.U8(static_cast<uint8_t>(user->privilege));
        w.String16(user->name);
        w.Raw(user->password_hash);
    } else if (const auto* job = std::get_if<StartupJob>(&record)) {
        w.U32(job->every_minutes);
        w.String16(job->action);
    } else {
        const auto& file = std::get<File>(record);
        w.String16(file.path);
        w.U32(static_cast<uint32_t>(file.data.size()));
        w.Raw(file.data);
    }
    return w.Take();
}

Record DecodePayload(RecordKind kind, ByteReader& in) {
    switch (kind) {
        case RecordKind::User: {
            User user;
            user.uid = in.U32();
            uint8_t privilege = in.U8();
            if (privilege > 1) {
                throw Error(Errc::CorruptRecord, "unknown privilege", in.offset() - 1);
            }
            user.privilege = static_cast<Privilege>(privilege);
            user.name = in.String16();
            ByteSpan hash = in.Raw(crypto::kDigestSize);
            std::copy(hash.begin(), hash.end(), user.password_hash.begin());
            return user;
        }
        case RecordKind::StartupJob: {
            StartupJob job;
            job.every_minutes = in.U32();
            job.action = in.String16();
            return job;
        }
        case RecordKind::File: {
            File file;
            file.path = in.String16();
            uint32_t len = in.U32();
            ByteSpan data = in.Raw(len);
            file.data.assign(data.begin(), data.end());
            return file;
        }
    }
    throw Error(Errc::CorruptRecord, "unknown record kind", in.offset());
}

RecordKind KindOf(const Record& record) {
    if (std::holds_alternative<User>(record)) return RecordKind::User;
    if (std::holds_alternative<StartupJob>(record)) return RecordKind::StartupJob;
    return RecordKind::File;
}

}  // namespace

crypto::Digest HashPassword(std::string_view password) {
    return crypto::Sha256(AsBytes(password));
}

User MakeUser(uint32_t uid, std::string name, std::string_view password, Privilege privilege) {
    return User{uid, privilege, std::move(name), HashPassword(password)};
}

std::vector<User> RootfsImage::users() const { return Collect<User>(records); }
std::vector<StartupJob> RootfsImage::jobs() const { return Collect<StartupJob>(records); }
std::vector<File> RootfsImage::files() const { return Collect<File>(records); }

void ValidateRecords(const std::vector<Record>& records) {
    std::set<uint32_t> uids;
    std::set<std::string> names;
    std::set<std::string> paths;
    for (const Record& record : records) {
        if (const auto* user = std::get_if<User>(&record)) {
            CheckString(user->name, "user name");
            if (user->name.empty()) throw Error(Errc::InvalidRecord, "empty user name");
            if (user->privilege != Privilege::Normal && user->privilege != Privilege::Superuser) {
                throw Error(Errc::InvalidRecord, "unknown privilege");
            }
            if (!uids.insert(user->uid).second) {
                throw Error(Errc::DuplicateUser, "uid " + std::to_string(user->uid) + " in use");
            }
            if (!names.insert(user->name).second) {
                throw Error(Errc::DuplicateUser, "user " + user->name + " exists");
            }
        } else if (const auto* job = std::get_if<StartupJob>(&record)) {
            CheckString(job->action, "job action");
            if (job->every_minutes == 0) {
                throw Error(Errc::InvalidRecord, "every_minutes must be >= 1");
            }
            if (job->action.empty()) throw Error(Errc::InvalidRecord, "empty job action");
        } else {
            const auto& file = std::get<File>(record);
            CheckString(file.path, "file path");
            if (file.data.size() > UINT32_MAX) throw Error(Errc::TooLarge, "file too large");
            if (!paths.insert(file.path).second) {
                throw Error(Errc::DuplicatePath, "path " + file.path + " exists");
            }
        }
    }
}

Bytes BuildRootfs(const RootfsImage& image, std::size_t partition_size) {
    if (image.mount_control != kControlEnforced && image.mount_control != kControlOpen) {
        throw Error(Errc::BadControlByte, "mount control must be 0x00 or 0xff");
    }
    ValidateRecords(image.records);

    ByteWriter area;
    for (const Record& record : image.records) {
        Bytes payload = EncodePayload(record);
        area.U8(static_cast<uint8_t>(KindOf(record)));
        area.U32(static_cast<uint32_t>(payload.size()));
        area.Raw(payload);
    }
    if (partition_size < kRecordAreaOffset ||
        area.size() > partition_size - kRecordAreaOffset) {
        throw Error(Errc::TooLarge, "rootfs needs " +
                                        std::to_string(kRecordAreaOffset + area.size()) +
                                        " bytes, partition has " + std::to_string(partition_size));
    }

    Bytes out(partition_size, 0);
    std::memcpy(out.data(), kRootfsMagic, 4);
    ByteWriter head;
    head.U32(kVersion);
    head.U64(area.size());
    std::copy(head.bytes().begin(), head.bytes().end(), out.begin() + 4);
    out[kControlByteOffset] = image.mount_control;
    std::copy(area.bytes().begin(), area.bytes().end(), out.begin() + kRecordAreaOffset);
    return out;
}

Bytes BuildRootfs(const std::vector<User>& users, const std::vector<StartupJob>& jobs,
                  const std::vector<File>& files, uint8_t mount_control,
                  std::size_t partition_size) {
    RootfsImage image;
    image.mount_control = mount_control;
    for (const User& u : users) image.records.emplace_back(u);
    for (const StartupJob& j : jobs) image.records.emplace_back(j);
    for (const File& f : files) image.records.emplace_back(f);
    return BuildRootfs(image, partition_size);
}

RootfsImage ParseRootfs(ByteSpan data) {
    if (data.size() < 4 || std::memcmp(data.data(), kRootfsMagic, 4) != 0) {
        throw Error(Errc::BadMagic, "expected rootfs magic RFS1", 0);
    }
    if (data.size() < kRecordAreaOffset) {
        throw Error(Errc::BadSuperblock, "partition shorter than the superblock", data.size());
    }
    if (LoadU32(data, 4) != kVersion) throw Error(Errc::BadVersion, "unsupported version", 4);

    RootfsImage image;
    image.mount_control = data[kControlByteOffset];
    if (image.mount_control != kControlEnforced && image.mount_control != kControlOpen) {
        throw Error(Errc::BadControlByte, "mount control must be 0x00 or 0xff",
                    kControlByteOffset);
    }
    uint64_t area_length = LoadU64(data, 8);
    if (area_length > data.size() - kRecordAreaOffset) {
        throw Error(Errc::BadSuperblock, "record area runs past the partition", 8);
    }
    for (std::size_t at = 16; at < kRecordAreaOffset; ++at) {
        if (at != kControlByteOffset && data[at] != 0) {
            throw Error(Errc::BadSuperblock, "reserved superblock byte is not zero", at);
        }
    }

    ByteReader area(data.subspan(kRecordAreaOffset, area_length), kRecordAreaOffset);
    while (!area.done()) {
        std::size_t record_at = area.offset();
        try {
            uint8_t kind = area.U8();
            if (kind < 1 || kind > 3) {
                throw Error(Errc::CorruptRecord, "unknown record kind", record_at);
            }
            uint32_t len = area.U32();
            std::size_t payload_at = area.offset();
            ByteReader payload(area.Raw(len), payload_at);
            Record record = DecodePayload(static_cast<RecordKind>(kind), payload);
            if (!payload.done()) {
                throw Error(Errc::CorruptRecord, "payload has trailing bytes", payload.offset());
            }
            image.records.push_back(std::move(record));
            ValidateRecords(image.records);
        } catch (const ShortRead& e) {
            throw Error(Errc::CorruptRecord, "record truncated", e.offset);
        } catch (const Error& e) {
            if (e.code() == Errc::CorruptRecord) throw;
            throw Error(Errc::CorruptRecord, e.what(), record_at);
        }
    }
    for (std::size_t at = kRecordAreaOffset + area_length; at < data.size(); ++at) {
        if (data[at] != 0) throw Error(Errc::CorruptRecord, "data after the record area", at);
    }
    return image;
}

MountHandle::MountHandle(MountHandle&& other) noexcept
    : img_(other.img_), mode_(other.mode_), rootfs_(std::move(other.rootfs_)) {
    other.img_ = nullptr;
}

MountHandle::~MountHandle() {
    if (img_ != nullptr) img_->Release(disk::Lease::RootfsMount);
}

void MountHandle::AddUser(const User& user) {
    Append(user);
}

void MountHandle::InstallStartupJob(const StartupJob& job) {
    Append(job);
}

void MountHandle::Append(Record record) {
    if (mode_ != MountMode::ReadWrite) throw Error(Errc::NotWritable, "rootfs mounted read-only");
    RootfsImage next = rootfs_;
    next.records.push_back(std::move(record));
    Bytes encoded = BuildRootfs(next, img_->partition_size(disk::kRootfsPartition));
    img_->WritePartition(disk::kRootfsPartition, encoded);
    rootfs_ = std::move(next);
}

MountHandle MountRootfs(disk::DiskImage& img, MountMode mode) {
    RootfsImage parsed = ParseRootfs(img.PartitionView(disk::kRootfsPartition));
    if (parsed.mount_control != kControlOpen) {
        throw Error(Errc::MountBlocked, "rootfs verification enabled; partition 3 is not mountable");
    }
    if (!img.TryAcquire(disk::Lease::RootfsMount)) {
        throw Error(Errc::AlreadyMounted, "partition 3 is already mounted");
    }
    return MountHandle(&img, mode, std::move(parsed));
}

}  // namespace vbootlab::rootfs
