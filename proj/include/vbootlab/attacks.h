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

// The two verified-boot bypasses, run against a victim image without any of
// the victim's credentials.

#include <cstdint>
#include <string>
#include <string_view>

#include "vbootlab/bytes.h"
#include "vbootlab/disk_image.h"

namespace vbootlab::attack {

enum class Exploit { Overwrite, HexPatch };

const char* ExploitName(Exploit exploit);

struct AttackReport {
    Exploit exploit = Exploit::Overwrite;
    uint64_t bytes_written = 0;
    bool victim_users_preserved = false;
    bool bootloader_replaced = true;
    double duration_seconds = 0.0;  // informational only
};

struct AttackOptions {
    // Skip the partition-12 half of the attack. Leaves the victim's
    // verification info in place, which the boot chain then catches.
    bool rootfs_only = false;
};

// Exploit 1: bit-by-bit copy of the attacker's partitions 3 and 12 over the
// victim's. The attacker image must boot on its own (verify=0, or verify=1
// with a matching roothash) or the attack is refused with
// InconsistentAttackerImage. Throws SizeMismatch when geometries differ.
AttackReport AttackOverwrite(disk::DiskImage& victim, const disk::DiskImage& attacker,
                             AttackOptions options = {});

// Exploit 2: flip the rootfs mount-control byte 0xFF -> 0x00 in place and
// swap in a bootloader with verification disabled. Victim users survive.
// Throws BadReplacement, AlreadyPatched.
AttackReport AttackHexpatch(disk::DiskImage& victim, ByteSpan replacement_bootloader,
                            AttackOptions options = {});

// Appends the startup job "exfil <path> <dest>" through a read-write mount.
// Does not touch partition 12; a verify=1 roothash goes stale.
// Throws MountBlocked, TooLarge, InvalidRecord.
void InstallSpyware(disk::DiskImage& img, std::string_view path, std::string_view dest,
                    uint32_t every_minutes);

}  // namespace vbootlab::attack
