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

#include "support/fixtures.h"

namespace vbootlab::testing {

disk::DiskImage BuildImage(const ImageSpec& spec) {
    disk::DiskImage img = disk::DiskImage::Create(
        disk::DefaultLayout(spec.p1_sectors, spec.p3_sectors, spec.p12_sectors));
    vault::FormatUserData(img);
    uint8_t control = spec.verify ? rootfs::kControlEnforced : rootfs::kControlOpen;
    img.WritePartition(disk::kRootfsPartition,
                       rootfs::BuildRootfs(spec.users, spec.jobs, {}, control,
                                           img.partition_size(disk::kRootfsPartition)));
    boot::BootConfig cfg;
    cfg.cmdline = spec.cmdline;
    cfg.verify = spec.verify;
    if (spec.verify) cfg.roothash = boot::RootfsDigest(img);
    boot::WriteBootConfig(img, cfg);
    return img;
}

disk::DiskImage BuildVictim(const Bytes& history, const std::string& vault_password,
                            uint64_t p3_sectors) {
    ImageSpec spec;
    spec.p3_sectors = p3_sectors;
    spec.users = {rootfs::MakeUser(1000, "alice", "alice-console"),
                  rootfs::MakeUser(1001, "bob", "bob-console")};
    spec.cmdline = "cros_secure quiet";
    disk::DiskImage img = BuildImage(spec);
    vault::VaultContent content;
    content.files.push_back({vault::kHistoryPath, history});
    vault::CreateVault(img, "alice", vault_password, content, kFastKdf);
    return img;
}

disk::DiskImage BuildAttacker(uint64_t p3_sectors) {
    ImageSpec spec;
    spec.p3_sectors = p3_sectors;
    spec.verify = false;
    spec.users = {rootfs::MakeUser(1000, "eve", "eve-pw", rootfs::Privilege::Superuser)};
    spec.jobs = {{1, kSpywareAction}};
    spec.cmdline = "cros_debug quiet";
    return BuildImage(spec);
}

std::vector<std::string> UserNames(const std::vector<rootfs::User>& users) {
    std::vector<std::string> names;
    for (const auto& u : users) names.push_back(u.name);
    return names;
}

std::vector<std::size_t> DiffOffsets(ByteSpan a, ByteSpan b) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        if (a[i] != b[i]) out.push_back(i);
    }
    return out;
}

Bytes RandomBytes(std::mt19937_64& rng, std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<uint8_t>(rng());
    return out;
}

std::string RandomText(std::mt19937_64& rng, std::size_t max_len, bool allow_empty) {
    static const char* kPieces[] = {"\xc3\xa9", "\xe2\x82\xac", "\xf0\x9f\x94\x92", " ", "/"};
    std::size_t len = Uniform(rng, allow_empty ? 0 : 1, max_len);
    std::string out;
    while (out.size() < len) {
        if (Uniform(rng, 0, 9) == 0) {
            out += kPieces[Uniform(rng, 0, 4)];
        } else {
            out.push_back(static_cast<char>(Uniform(rng, 0x21, 0x7e)));
        }
    }
    return out;
}

std::string RandomWord(std::mt19937_64& rng, std::size_t max_len) {
    std::size_t len = Uniform(rng, 1, max_len);
    std::string out;
    for (std::size_t i = 0; i < len; ++i) out.push_back(static_cast<char>(Uniform(rng, 'a', 'z')));
    return out;
}

}  // namespace vbootlab::testing
