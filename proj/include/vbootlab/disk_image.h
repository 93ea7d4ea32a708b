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

// Single-file disk image with the twelve-partition Chromium OS layout.
//
// File format (".cvd"), little-endian:
//   [0, 8)      magic "CVDLAB01"
//   [8, 12)     sector_size u32, always 512
//   [12, 16)    partition_count u32, always 12
//   [16, 496)   12 entries x 40 bytes:
//                 index u8, role u8, reserved u16 (0), start_sector u64,
//                 sector_count u64, label[20] ASCII zero-padded
//   [496, 512)  zero
//   512..       partition data at the declared sector offsets
//
// The in-memory image is the file: Serialize() returns the backing bytes.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vbootlab/bytes.h"

namespace vbootlab::disk {

constexpr uint32_t kSectorSize = 512;
constexpr uint32_t kPartitionCount = 12;
constexpr std::size_t kHeaderSize = kSectorSize;
constexpr std::size_t kEntrySize = 40;
constexpr std::size_t kEntriesOffset = 16;
constexpr std::size_t kLabelSize = 20;
constexpr uint64_t kDefaultImageCap = 1ull << 30;
constexpr char kImageMagic[] = "CVDLAB01";

// Partitions that carry modeled semantics.
constexpr int kUserDataPartition = 1;
constexpr int kRootfsPartition = 3;
constexpr int kBootloaderPartition = 12;

enum class PartitionRole : uint8_t {
    CachedUserData = 1,
    KernelA = 2,
    RootfsA = 3,
    KernelB = 4,
    RootfsB = 5,
    KernelC = 6,
    RootfsC = 7,
    Oem = 8,
    Reserved = 9,  // partitions 9, 10 and 11
    Esp = 12,
};

PartitionRole RoleForIndex(int index);
const char* RoleName(PartitionRole role);
const char* DefaultLabel(int index);

struct LayoutEntry {
    int index = 0;
    uint64_t sector_count = 1;
    std::string label;
};

struct PartitionEntry {
    uint8_t index = 0;
    PartitionRole role = PartitionRole::Reserved;
    uint64_t start_sector = 0;
    uint64_t sector_count = 0;
    std::string label;

    uint64_t byte_offset() const { return start_sector * kSectorSize; }
    uint64_t byte_length() const { return sector_count * kSectorSize; }

    bool operator==(const PartitionEntry&) const = default;
};

// Partitions 1, 3 and 12 sized from the arguments; every other partition
// is the minimal single sector. Default labels throughout.
std::vector<LayoutEntry> DefaultLayout(uint64_t user_data_sectors, uint64_t rootfs_sectors,
                                       uint64_t bootloader_sectors);

// Exclusive-use markers. A DiskImage hands out at most one of each at a time.
enum class Lease : uint8_t {
    RootfsMount = 1 << 0,
    Session = 1 << 1,
};

class DiskImage {
  public:
    // Partitions are laid out contiguously in index order starting at sector 1.
    static DiskImage Create(std::span<const LayoutEntry> layout,
                            uint64_t cap_bytes = kDefaultImageCap);
    // Validates every header field; the bytes are kept verbatim.
    static DiskImage Parse(Bytes file, uint64_t cap_bytes = kDefaultImageCap);
    static DiskImage Load(const std::filesystem::path& path, uint64_t cap_bytes = kDefaultImageCap);

    DiskImage(const DiskImage& other);
    DiskImage& operator=(const DiskImage& other);
    DiskImage(DiskImage&&) noexcept = default;
    DiskImage& operator=(DiskImage&&) noexcept = default;

    const Bytes& Serialize() const { return bytes_; }
    void Save(const std::filesystem::path& path) const;

    const std::array<PartitionEntry, kPartitionCount>& partitions() const { return partitions_; }
    const PartitionEntry& partition(int index) const;
    uint64_t partition_size(int index) const { return partition(index).byte_length(); }

    Bytes ReadPartition(int index) const;
    // Zero-copy view; invalidated by any write to the image.
    ByteSpan PartitionView(int index) const;
    void WritePartition(int index, ByteSpan data);
    // Returns the previous value.
    uint8_t PatchByte(int index, uint64_t offset, uint8_t value);

    bool TryAcquire(Lease lease);
    void Release(Lease lease);
    bool Holds(Lease lease) const;

  private:
    DiskImage() = default;

    Bytes bytes_;
    std::array<PartitionEntry, kPartitionCount> partitions_{};
    uint8_t leases_ = 0;
};

bool operator==(const DiskImage& a, const DiskImage& b);

// Byte-for-byte copy of partition `index` from src into dst.
void BitwiseCopyPartition(const DiskImage& src, DiskImage& dst, int index);

}  // namespace vbootlab::disk
