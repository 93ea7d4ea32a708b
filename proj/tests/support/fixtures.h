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

// Image builders and random generators shared by the unit and acceptance tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vbootlab/boot_chain.h"
#include "vbootlab/bytes.h"
#include "vbootlab/disk_image.h"
#include "vbootlab/rootfs.h"
#include "vbootlab/vault.h"

namespace vbootlab::testing {

// Tests lower the KDF cost; the on-disk records carry the iteration count.
constexpr uint32_t kFastKdf = 16;
constexpr char kSpywareAction[] = "exfil /home/chronos/user/History adversary-sink";

struct ImageSpec {
    uint64_t p1_sectors = 64;
    uint64_t p3_sectors = 16;
    uint64_t p12_sectors = 2;
    bool verify = true;
    std::vector<rootfs::User> users;
    std::vector<rootfs::StartupJob> jobs;
    std::string cmdline = "quiet";
};

// Self-consistent image: rootfs control byte 0xFF iff verify, roothash
// matches partition 3 when verify is set, partition 1 formatted.
disk::DiskImage BuildImage(const ImageSpec& spec);

// Verified image with users alice(1000) and bob(1001) and a vault for alice
// holding `history` at the History path.
disk::DiskImage BuildVictim(const Bytes& history, const std::string& vault_password = "alice-pw",
                            uint64_t p3_sectors = 16);

// Unverified image with superuser eve and a one-minute exfil job.
disk::DiskImage BuildAttacker(uint64_t p3_sectors = 16);

std::vector<std::string> UserNames(const std::vector<rootfs::User>& users);

// Indices where a and b differ. Sizes must match.
std::vector<std::size_t> DiffOffsets(ByteSpan a, ByteSpan b);

Bytes RandomBytes(std::mt19937_64& rng, std::size_t n);
// Printable ASCII mixed with multi-byte UTF-8, no NUL or LF.
std::string RandomText(std::mt19937_64& rng, std::size_t max_len, bool allow_empty = true);
std::string RandomWord(std::mt19937_64& rng, std::size_t max_len);

inline uint64_t Uniform(std::mt19937_64& rng, uint64_t lo, uint64_t hi) {
    return std::uniform_int_distribution<uint64_t>(lo, hi)(rng);
}

inline boot::BootOutcome FakeBootSuccess(std::vector<rootfs::StartupJob> jobs = {}) {
    return boot::BootSuccess{{}, std::move(jobs)};
}

}  // namespace vbootlab::testing
