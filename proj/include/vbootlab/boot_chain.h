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

// Partition 12 bootloader configuration and the verified-boot state machine.
//
// Partition 12 holds UTF-8 text, LF-terminated lines, NUL padded:
//   CVDBOOT v1
//   cmdline=<text without NUL or LF>
//   verify=0 | verify=1
//   roothash=<64 lowercase hex>        (only when verify=1)

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vbootlab/crypto.h"
#include "vbootlab/disk_image.h"
#include "vbootlab/rootfs.h"

namespace vbootlab::boot {

struct BootConfig {
    std::string cmdline;
    bool verify = false;
    std::optional<crypto::Digest> roothash;  // present iff verify

    bool operator==(const BootConfig&) const = default;
};

// Canonical text (no padding). Throws InvalidCmdline or BadHash.
std::string FormatBootConfig(const BootConfig& cfg);
// Parses up to the first NUL. Throws BadHeader, UnknownKey, MissingKey, BadHash.
BootConfig ParseBootConfig(ByteSpan data);
// Text followed by NUL padding to the partition length. Throws TooLarge too.
Bytes EncodeBootConfig(const BootConfig& cfg, std::size_t partition_size);

void WriteBootConfig(disk::DiskImage& img, const BootConfig& cfg);
BootConfig ReadBootConfig(const disk::DiskImage& img);

// SHA-256 over every byte of partition 3.
crypto::Digest RootfsDigest(const disk::DiskImage& img);

enum class RecoveryReason {
    KernelPanicHashMismatch,
    CorruptBootloader,
    CorruptRootfs,
};

const char* RecoveryReasonName(RecoveryReason reason);

struct BootSuccess {
    std::vector<rootfs::User> users;
    std::vector<rootfs::StartupJob> startup_jobs;
};

struct RecoveryTriggered {
    RecoveryReason reason;
    std::string detail;
};

using BootOutcome = std::variant<BootSuccess, RecoveryTriggered>;

inline bool Succeeded(const BootOutcome& outcome) {
    return std::holds_alternative<BootSuccess>(outcome);
}

// 1. parse partition 12        -> CorruptBootloader
// 2. verify: digest(p3) == hash -> KernelPanicHashMismatch
// 3. parse partition 3         -> CorruptRootfs
// Never mutates the image and never throws for image content.
BootOutcome Boot(const disk::DiskImage& img);

}  // namespace vbootlab::boot
