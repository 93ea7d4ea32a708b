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

#include "vbootlab/boot_chain.h"

#include <algorithm>
#include <cstring>
#include <string_view>

#include "vbootlab/error.h"

namespace vbootlab::boot {

namespace {

constexpr std::string_view kHeaderLine = "CVDBOOT v1";

// Splits LF-terminated lines. An unterminated final line is malformed.
std::vector<std::string_view> SplitLines(std::string_view text) {
    std::vector<std::string_view> lines;
    while (!text.empty()) {
        std::size_t lf = text.find('\n');
        if (lf == std::string_view::npos) {
            throw Error(Errc::UnknownKey, "unterminated line \"" + std::string(text) + "\"");
        }
        lines.push_back(text.substr(0, lf));
        text.remove_prefix(lf + 1);
    }
    return lines;
}

std::string_view ExpectKey(const std::vector<std::string_view>& lines, std::size_t i,
                           std::string_view key) {
    if (i >= lines.size()) {
        throw Error(Errc::MissingKey, "missing " + std::string(key) + "= line");
    }
    std::string_view line = lines[i];
    if (line.size() <= key.size() || line.substr(0, key.size()) != key ||
        line[key.size()] != '=') {
        throw Error(Errc::UnknownKey,
                    "expected " + std::string(key) + "=, got \"" + std::string(line) + "\"");
    }
    return line.substr(key.size() + 1);
}

crypto::Digest ParseRoothash(std::string_view hex) {
    if (hex.size() != 2 * crypto::kDigestSize) {
        throw Error(Errc::BadHash, "roothash must be 64 lowercase hex characters");
    }
    std::optional<Bytes> raw = FromLowerHex(hex);
    if (!raw) throw Error(Errc::BadHash, "roothash must be 64 lowercase hex characters");
    crypto::Digest out{};
    std::copy(raw->begin(), raw->end(), out.begin());
    return out;
}

}  // namespace

std::string FormatBootConfig(const BootConfig& cfg) {
    if (cfg.cmdline.find('\n') != std::string::npos ||
        cfg.cmdline.find('\0') != std::string::npos || !IsValidUtf8(cfg.cmdline)) {
        throw Error(Errc::InvalidCmdline, "cmdline must be UTF-8 without NUL or LF");
    }
    if (cfg.verify != cfg.roothash.has_value()) {
        throw Error(Errc::BadHash, cfg.verify ? "verify=1 requires a roothash"
                                              : "roothash given with verify=0");
    }
    std::string text(kHeaderLine);
    text += "\ncmdline=" + cfg.cmdline + "\n";
    text += cfg.verify ? "verify=1\n" : "verify=0\n";
    if (cfg.verify) text += "roothash=" + ToHex(*cfg.roothash) + "\n";
    return text;
}

BootConfig ParseBootConfig(ByteSpan data) {
    auto nul = std::find(data.begin(), data.end(), uint8_t{0});
    std::string_view text(reinterpret_cast<const char*>(data.data()),
                          static_cast<std::size_t>(nul - data.begin()));
    if (!IsValidUtf8(text)) throw Error(Errc::BadHeader, "bootloader config is not UTF-8");
    if (text.substr(0, kHeaderLine.size() + 1) != std::string(kHeaderLine) + "\n") {
        throw Error(Errc::BadHeader, "missing CVDBOOT v1 header", 0);
    }

    std::vector<std::string_view> lines = SplitLines(text);
    BootConfig cfg;
    cfg.cmdline = std::string(ExpectKey(lines, 1, "cmdline"));
    std::string_view verify = ExpectKey(lines, 2, "verify");
    if (verify == "1") {
        cfg.verify = true;
    } else if (verify != "0") {
        throw Error(Errc::UnknownKey, "verify must be 0 or 1");
    }
    std::size_t next = 3;
    if (cfg.verify) cfg.roothash = ParseRoothash(ExpectKey(lines, next++, "roothash"));
    if (lines.size() > next) {
        throw Error(Errc::UnknownKey, "unexpected line \"" + std::string(lines[next]) + "\"");
    }
    return cfg;
}

Bytes EncodeBootConfig(const BootConfig& cfg, std::size_t partition_size) {
    std::string text = FormatBootConfig(cfg);
    if (text.size() > partition_size) {
        throw Error(Errc::TooLarge, "boot config needs " + std::to_string(text.size()) +
                                        " bytes, partition has " + std::to_string(partition_size));
    }
    Bytes out(partition_size, 0);
    std::memcpy(out.data(), text.data(), text.size());
    return out;
}

void WriteBootConfig(disk::DiskImage& img, const BootConfig& cfg) {
    img.WritePartition(disk::kBootloaderPartition,
                       EncodeBootConfig(cfg, img.partition_size(disk::kBootloaderPartition)));
}

BootConfig ReadBootConfig(const disk::DiskImage& img) {
    return ParseBootConfig(img.PartitionView(disk::kBootloaderPartition));
}

crypto::Digest RootfsDigest(const disk::DiskImage& img) {
    return crypto::Sha256(img.PartitionView(disk::kRootfsPartition));
}

const char* RecoveryReasonName(RecoveryReason reason) {
    switch (reason) {
        case RecoveryReason::KernelPanicHashMismatch: return "KernelPanicHashMismatch";
        case RecoveryReason::CorruptBootloader: return "CorruptBootloader";
        case RecoveryReason::CorruptRootfs: return "CorruptRootfs";
    }
    return "Unknown";
}

BootOutcome Boot(const disk::DiskImage& img) {
    BootConfig cfg;
    try {
        cfg = ReadBootConfig(img);
    } catch (const Error& e) {
        return RecoveryTriggered{RecoveryReason::CorruptBootloader, e.what()};
    }

    if (cfg.verify) {
        crypto::Digest actual = RootfsDigest(img);
        if (actual != *cfg.roothash) {
            return RecoveryTriggered{RecoveryReason::KernelPanicHashMismatch,
                                     "rootfs hash " + ToHex(actual) + " != expected " +
                                         ToHex(*cfg.roothash)};
        }
    }

    rootfs::RootfsImage parsed;
    try {
        parsed = rootfs::ParseRootfs(img.PartitionView(disk::kRootfsPartition));
    } catch (const Error& e) {
        return RecoveryTriggered{RecoveryReason::CorruptRootfs, e.what()};
    }
    return BootSuccess{parsed.users(), parsed.jobs()};
}

}  // namespace vbootlab::boot
