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

#include "vbootlab/disk_image.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

#include "vbootlab/error.h"

namespace vbootlab::disk {

namespace {

void CheckIndex(int index) {
    if (index < 1 || index > static_cast<int>(kPartitionCount)) {
        throw Error(Errc::BadIndex, "partition index " + std::to_string(index) + " not in 1..12");
    }
}

bool IsPrintableAscii(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= 0x20 && c < 0x7f; });
}

void PutU32(Bytes& out, std::size_t at, uint32_t v) {
    for (int i = 0; i < 4; ++i) out[at + i] = static_cast<uint8_t>(v >> (8 * i));
}

void PutU64(Bytes& out, std::size_t at, uint64_t v) {
    for (int i = 0; i < 8; ++i) out[at + i] = static_cast<uint8_t>(v >> (8 * i));
}

}  // namespace

PartitionRole RoleForIndex(int index) {
    CheckIndex(index);
    if (index >= 9 && index <= 11) return PartitionRole::Reserved;
    return static_cast<PartitionRole>(index);
}

const char* RoleName(PartitionRole role) {
    switch (role) {
        case PartitionRole::CachedUserData: return "CachedUserData";
        case PartitionRole::KernelA: return "KernelA";
        case PartitionRole::RootfsA: return "RootfsA";
        case PartitionRole::KernelB: return "KernelB";
        case PartitionRole::RootfsB: return "RootfsB";
        case PartitionRole::KernelC: return "KernelC";
        case PartitionRole::RootfsC: return "RootfsC";
        case PartitionRole::Oem: return "OEM";
        case PartitionRole::Reserved: return "Reserved";
        case PartitionRole::Esp: return "ESP";
    }
    return "Unknown";
}

const char* DefaultLabel(int index) {
    static constexpr const char* kLabels[] = {
        "STATE",    "KERN-A",   "ROOT-A",   "KERN-B", "ROOT-B",   "KERN-C",
        "ROOT-C",   "OEM",      "reserved", "reserved", "reserved", "EFI-SYSTEM",
    };
    CheckIndex(index);
    return kLabels[index - 1];
}

std::vector<LayoutEntry> DefaultLayout(uint64_t user_data_sectors, uint64_t rootfs_sectors,
                                       uint64_t bootloader_sectors) {
    std::vector<LayoutEntry> layout;
    for (int i = 1; i <= static_cast<int>(kPartitionCount); ++i) {
        uint64_t sectors = 1;
        if (i == kUserDataPartition) sectors = user_data_sectors;
        if (i == kRootfsPartition) sectors = rootfs_sectors;
        if (i == kBootloaderPartition) sectors = bootloader_sectors;
        layout.push_back({i, sectors, DefaultLabel(i)});
    }
    return layout;
}

DiskImage DiskImage::Create(std::span<const LayoutEntry> layout, uint64_t cap_bytes) {
    std::array<const LayoutEntry*, kPartitionCount> by_index{};
    for (const LayoutEntry& entry : layout) {
        CheckIndex(entry.index);
        if (by_index[entry.index - 1] != nullptr) {
            throw Error(Errc::DuplicateIndex,
                        "partition " + std::to_string(entry.index) + " listed twice");
        }
        by_index[entry.index - 1] = &entry;
    }
    for (std::size_t i = 0; i < kPartitionCount; ++i) {
        if (by_index[i] == nullptr) {
            throw Error(Errc::MissingIndex, "partition " + std::to_string(i + 1) + " missing");
        }
    }

    DiskImage img;
    uint64_t next_sector = 1;
    for (std::size_t i = 0; i < kPartitionCount; ++i) {
        const LayoutEntry& entry = *by_index[i];
        if (entry.sector_count == 0) {
            throw Error(Errc::BadPartitionEntry, "partition " + std::to_string(entry.index) +
                                                     " must have at least one sector");
        }
        if (entry.label.size() > kLabelSize || !IsPrintableAscii(entry.label)) {
            throw Error(Errc::BadLabel, "label must be <= 20 printable ASCII bytes");
        }
        uint64_t max_sectors = cap_bytes / kSectorSize;
        if (entry.sector_count > max_sectors || next_sector > max_sectors - entry.sector_count) {
            throw Error(Errc::Overflow, "layout exceeds the image size cap of " +
                                            std::to_string(cap_bytes) + " bytes");
        }
        PartitionEntry& p = img.partitions_[i];
        p.index = static_cast<uint8_t>(entry.index);
        p.role = RoleForIndex(entry.index);
        p.start_sector = next_sector;
        p.sector_count = entry.sector_count;
        p.label = entry.label;
        next_sector += entry.sector_count;
    }

    img.bytes_.assign(next_sector * kSectorSize, 0);
    std::memcpy(img.bytes_.data(), kImageMagic, 8);
    PutU32(img.bytes_, 8, kSectorSize);
    PutU32(img.bytes_, 12, kPartitionCount);
    for (std::size_t i = 0; i < kPartitionCount; ++i) {
        const PartitionEntry& p = img.partitions_[i];
        std::size_t at = kEntriesOffset + i * kEntrySize;
        img.bytes_[at] = p.index;
        img.bytes_[at + 1] = static_cast<uint8_t>(p.role);
        PutU64(img.bytes_, at + 4, p.start_sector);
        PutU64(img.bytes_, at + 12, p.sector_count);
        std::memcpy(img.bytes_.data() + at + 20, p.label.data(), p.label.size());
    }
    return img;
}

DiskImage DiskImage::Parse(Bytes file, uint64_t cap_bytes) {
    if (file.size() < kHeaderSize) {
        throw Error(Errc::Truncated, "file shorter than the 512-byte header", file.size());
    }
    if (file.size() > cap_bytes) {
        throw Error(Errc::Overflow, "image exceeds the size cap");
    }
    if (std::memcmp(file.data(), kImageMagic, 8) != 0) {
        throw Error(Errc::BadMagic, "expected magic CVDLAB01", 0);
    }
    if (LoadU32(file, 8) != kSectorSize) {
        throw Error(Errc::BadSectorSize, "sector size must be 512", 8);
    }
    if (LoadU32(file, 12) != kPartitionCount) {
        throw Error(Errc::BadPartitionCount, "partition count must be 12", 12);
    }
    for (std::size_t at = kEntriesOffset + kPartitionCount * kEntrySize; at < kHeaderSize; ++at) {
        if (file[at] != 0) throw Error(Errc::BadPadding, "header padding is not zero", at);
    }

    DiskImage img;
    uint64_t total_sectors = file.size() / kSectorSize;
    uint64_t end_sector = 1;
    for (std::size_t i = 0; i < kPartitionCount; ++i) {
        std::size_t at = kEntriesOffset + i * kEntrySize;
        PartitionEntry& p = img.partitions_[i];
        p.index = file[at];
        if (p.index != i + 1) {
            throw Error(Errc::BadPartitionEntry, "entries must be in index order 1..12", at);
        }
        if (file[at + 1] != static_cast<uint8_t>(RoleForIndex(p.index))) {
            throw Error(Errc::BadPartitionEntry, "role does not match index", at + 1);
        }
        p.role = RoleForIndex(p.index);
        if (file[at + 2] != 0 || file[at + 3] != 0) {
            throw Error(Errc::BadPartitionEntry, "reserved entry bytes not zero", at + 2);
        }
        p.start_sector = LoadU64(file, at + 4);
        p.sector_count = LoadU64(file, at + 12);
        if (p.sector_count == 0) {
            throw Error(Errc::BadPartitionEntry, "empty partition", at + 12);
        }
        if (p.start_sector < end_sector) {
            throw Error(Errc::BadPartitionEntry, "partition overlaps header or predecessor", at + 4);
        }
        if (p.start_sector > total_sectors || p.sector_count > total_sectors - p.start_sector) {
            throw Error(Errc::Truncated, "partition extends past end of file", at + 4);
        }
        end_sector = p.start_sector + p.sector_count;

        const uint8_t* label = file.data() + at + 20;
        std::size_t label_len = 0;
        while (label_len < kLabelSize && label[label_len] != 0) ++label_len;
        for (std::size_t k = label_len; k < kLabelSize; ++k) {
            if (label[k] != 0) {
                throw Error(Errc::BadLabel, "label has bytes after its terminator", at + 20 + k);
            }
        }
        p.label.assign(reinterpret_cast<const char*>(label), label_len);
        if (!IsPrintableAscii(p.label)) {
            throw Error(Errc::BadLabel, "label is not printable ASCII", at + 20);
        }
    }
    if (file.size() != end_sector * kSectorSize) {
        throw Error(Errc::TrailingData, "bytes after the last partition", end_sector * kSectorSize);
    }
    img.bytes_ = std::move(file);
    return img;
}

DiskImage DiskImage::Load(const std::filesystem::path& path, uint64_t cap_bytes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(Errc::IoError, "cannot read " + path.string());
    return Parse(std::move(data), cap_bytes);
}

DiskImage::DiskImage(const DiskImage& other)
    : bytes_(other.bytes_), partitions_(other.partitions_) {}

DiskImage& DiskImage::operator=(const DiskImage& other) {
    if (this != &other) {
        bytes_ = other.bytes_;
        partitions_ = other.partitions_;
    }
    return *this;
}

void DiskImage::Save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes_.data()),
              static_cast<std::streamsize>(bytes_.size()));
    if (!out) throw Error(Errc::IoError, "short write to " + path.string());
}

const PartitionEntry& DiskImage::partition(int index) const {
    CheckIndex(index);
    return partitions_[index - 1];
}

Bytes DiskImage::ReadPartition(int index) const {
    ByteSpan view = PartitionView(index);
    return Bytes(view.begin(), view.end());
}

ByteSpan DiskImage::PartitionView(int index) const {
    const PartitionEntry& p = partition(index);
    return ByteSpan(bytes_).subspan(p.byte_offset(), p.byte_length());
}

void DiskImage::WritePartition(int index, ByteSpan data) {
    const PartitionEntry& p = partition(index);
    if (data.size() != p.byte_length()) {
        throw Error(Errc::LengthMismatch, "partition " + std::to_string(index) + " is " +
                                              std::to_string(p.byte_length()) + " bytes, got " +
                                              std::to_string(data.size()));
    }
    std::memmove(bytes_.data() + p.byte_offset(), data.data(), data.size());
}

uint8_t DiskImage::PatchByte(int index, uint64_t offset, uint8_t value) {
    const PartitionEntry& p = partition(index);
    if (offset >= p.byte_length()) {
        throw Error(Errc::BadIndex, "offset past end of partition " + std::to_string(index));
    }
    uint8_t& slot = bytes_[p.byte_offset() + offset];
    uint8_t old = slot;
    slot = value;
    return old;
}

bool DiskImage::TryAcquire(Lease lease) {
    auto bit = static_cast<uint8_t>(lease);
    if (leases_ & bit) return false;
    leases_ |= bit;
    return true;
}

void DiskImage::Release(Lease lease) {
    leases_ &= static_cast<uint8_t>(~static_cast<uint8_t>(lease));
}

bool DiskImage::Holds(Lease lease) const {
    return (leases_ & static_cast<uint8_t>(lease)) != 0;
}

bool operator==(const DiskImage& a, const DiskImage& b) {
    return a.Serialize() == b.Serialize();
}

void BitwiseCopyPartition(const DiskImage& src, DiskImage& dst, int index) {
    if (src.partition_size(index) != dst.partition_size(index)) {
        throw Error(Errc::SizeMismatch,
                    "partition " + std::to_string(index) + " is " +
                        std::to_string(src.partition_size(index)) + " bytes in the source and " +
                        std::to_string(dst.partition_size(index)) + " in the destination");
    }
    dst.WritePartition(index, src.PartitionView(index));
}

}  // namespace vbootlab::disk
