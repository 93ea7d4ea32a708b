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

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "support/fixtures.h"
#include "support/sha256_ref.h"
#include "vbootlab/attacks.h"
#include "vbootlab/boot_chain.h"
#include "vbootlab/error.h"
#include "vbootlab/rootfs.h"
#include "vbootlab/vault.h"

namespace vbootlab::attack {
namespace {

using testing::kSpywareAction;

template <typename Fn>
Errc CodeOf(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no vbootlab::Error thrown";
    return Errc::IoError;
}

Bytes Sentinel() {
    std::mt19937_64 rng(71);
    return testing::RandomBytes(rng, 64);
}

Bytes UnverifiedBootloader(const disk::DiskImage& victim) {
    return boot::EncodeBootConfig({"cros_debug", false, std::nullopt}, victim.partition_size(12));
}

std::set<std::string> Names(const std::vector<rootfs::User>& users) {
    auto v = testing::UserNames(users);
    return {v.begin(), v.end()};
}

std::vector<vault::SinkEvent> RunSession(disk::DiskImage& img, uint32_t ticks) {
    boot::BootOutcome outcome = boot::Boot(img);
    EXPECT_TRUE(boot::Succeeded(outcome));
    vault::Session s = vault::Login(img, outcome, "alice", "alice-pw");
    vault::MemorySink sink;
    s.Tick(ticks, sink);
    s.Logout();
    return sink.events();
}

TEST(OverwriteTest, EndToEnd) {
    Bytes sentinel = Sentinel();
    disk::DiskImage victim = testing::BuildVictim(sentinel);
    disk::DiskImage attacker = testing::BuildAttacker();
    Bytes p1_before = victim.ReadPartition(1);

    AttackReport r = AttackOverwrite(victim, attacker);
    EXPECT_EQ(r.exploit, Exploit::Overwrite);
    EXPECT_FALSE(r.victim_users_preserved);
    EXPECT_TRUE(r.bootloader_replaced);
    EXPECT_EQ(r.bytes_written, victim.partition_size(3) + victim.partition_size(12));

    EXPECT_EQ(victim.ReadPartition(3), attacker.ReadPartition(3));
    EXPECT_EQ(victim.ReadPartition(12), attacker.ReadPartition(12));
    EXPECT_EQ(victim.ReadPartition(1), p1_before);

    boot::BootOutcome outcome = boot::Boot(victim);
    ASSERT_TRUE(boot::Succeeded(outcome));
    EXPECT_EQ(Names(std::get<boot::BootSuccess>(outcome).users), std::set<std::string>{"eve"});

    auto events = RunSession(victim, 3);
    ASSERT_EQ(events.size(), 3u);
    for (const auto& e : events) EXPECT_EQ(e.sha256, testing::ReferenceSha256Hex(sentinel));
}

TEST(OverwriteTest, Preconditions) {
    disk::DiskImage victim = testing::BuildVictim(Sentinel());
    disk::DiskImage small = testing::BuildAttacker(8);
    EXPECT_EQ(CodeOf([&] { AttackOverwrite(victim, small); }), Errc::SizeMismatch);

    disk::DiskImage stale = testing::BuildVictim(Sentinel());
    stale.PatchByte(3, 0x700, 0x42);
    EXPECT_EQ(CodeOf([&] { AttackOverwrite(victim, stale); }), Errc::InconsistentAttackerImage);

    // A verified attacker image with a matching hash is acceptable.
    testing::ImageSpec spec;
    spec.users = {rootfs::MakeUser(1, "mallory", "m")};
    EXPECT_NO_THROW(AttackOverwrite(victim, testing::BuildImage(spec)));
}

TEST(OverwriteTest, RootfsOnlyIsCaughtByBoot) {
    disk::DiskImage victim = testing::BuildVictim(Sentinel());
    Bytes p12 = victim.ReadPartition(12);
    AttackReport r = AttackOverwrite(victim, testing::BuildAttacker(), {.rootfs_only = true});
    EXPECT_FALSE(r.bootloader_replaced);
    EXPECT_EQ(victim.ReadPartition(12), p12);
    boot::BootOutcome outcome = boot::Boot(victim);
    ASSERT_FALSE(boot::Succeeded(outcome));
    EXPECT_EQ(std::get<boot::RecoveryTriggered>(outcome).reason,
              boot::RecoveryReason::KernelPanicHashMismatch);
}

TEST(HexpatchTest, ChangesExactlyOneRootfsByte) {
    disk::DiskImage victim = testing::BuildVictim(Sentinel());
    Bytes p3_before = victim.ReadPartition(3);
    auto users_before = std::get<boot::BootSuccess>(boot::Boot(victim)).users;

    AttackReport r = AttackHexpatch(victim, UnverifiedBootloader(victim));
    EXPECT_EQ(r.exploit, Exploit::HexPatch);
    EXPECT_TRUE(r.victim_users_preserved);

    auto diff = testing::DiffOffsets(p3_before, victim.ReadPartition(3));
    ASSERT_EQ(diff.size(), 1u);
    EXPECT_EQ(diff[0], rootfs::kControlByteOffset);
    EXPECT_EQ(p3_before[0x467], 0xFF);
    EXPECT_EQ(victim.PartitionView(3)[0x467], 0x00);
    EXPECT_EQ(victim.ReadPartition(12), UnverifiedBootloader(victim));

    boot::BootOutcome outcome = boot::Boot(victim);
    ASSERT_TRUE(boot::Succeeded(outcome));
    EXPECT_EQ(std::get<boot::BootSuccess>(outcome).users, users_before);
    EXPECT_NO_THROW(rootfs::MountRootfs(victim, rootfs::MountMode::ReadWrite));
}

TEST(HexpatchTest, ThenSpywareExfiltrates) {
    Bytes sentinel = Sentinel();
    disk::DiskImage victim = testing::BuildVictim(sentinel);
    AttackHexpatch(victim, UnverifiedBootloader(victim));
    InstallSpyware(victim, vault::kHistoryPath, "adversary-sink", 1);

    boot::BootOutcome outcome = boot::Boot(victim);
    ASSERT_TRUE(boot::Succeeded(outcome));
    const auto& ok = std::get<boot::BootSuccess>(outcome);
    EXPECT_EQ(Names(ok.users), (std::set<std::string>{"alice", "bob"}));
    ASSERT_EQ(ok.startup_jobs.size(), 1u);
    EXPECT_EQ(ok.startup_jobs[0].action, kSpywareAction);

    auto events = RunSession(victim, 3);
    ASSERT_EQ(events.size(), 3u);
    for (const auto& e : events) EXPECT_EQ(e.sha256, testing::ReferenceSha256Hex(sentinel));
}

TEST(HexpatchTest, Preconditions) {
    disk::DiskImage victim = testing::BuildVictim(Sentinel());
    Bytes before = victim.Serialize();

    Bytes verified = boot::EncodeBootConfig({"x", true, boot::RootfsDigest(victim)},
                                            victim.partition_size(12));
    EXPECT_EQ(CodeOf([&] { AttackHexpatch(victim, verified); }), Errc::BadReplacement);
    EXPECT_EQ(CodeOf([&] { AttackHexpatch(victim, Bytes(victim.partition_size(12), 0)); }),
              Errc::BadReplacement);
    Bytes short_cfg = UnverifiedBootloader(victim);
    short_cfg.pop_back();
    EXPECT_EQ(CodeOf([&] { AttackHexpatch(victim, short_cfg); }), Errc::BadReplacement);
    EXPECT_EQ(victim.Serialize(), before);

    AttackHexpatch(victim, UnverifiedBootloader(victim));
    EXPECT_EQ(CodeOf([&] { AttackHexpatch(victim, UnverifiedBootloader(victim)); }),
              Errc::AlreadyPatched);
}

TEST(HexpatchTest, RootfsOnlyIsCaughtByBoot) {
    disk::DiskImage victim = testing::BuildVictim(Sentinel());
    AttackHexpatch(victim, {}, {.rootfs_only = true});
    EXPECT_EQ(victim.PartitionView(3)[0x467], 0x00);
    boot::BootOutcome outcome = boot::Boot(victim);
    ASSERT_FALSE(boot::Succeeded(outcome));
    EXPECT_EQ(std::get<boot::RecoveryTriggered>(outcome).reason,
              boot::RecoveryReason::KernelPanicHashMismatch);
}

TEST(SpywareTest, BlockedOnPristineVictim) {
    disk::DiskImage victim = testing::BuildVictim(Sentinel());
    EXPECT_EQ(CodeOf([&] { InstallSpyware(victim, vault::kHistoryPath, "sink", 1); }),
              Errc::MountBlocked);
}

TEST(SpywareTest, OnAttackerImage) {
    disk::DiskImage attacker = testing::BuildAttacker();
    InstallSpyware(attacker, "/etc/shadow", "sink", 5);
    auto ok = std::get<boot::BootSuccess>(boot::Boot(attacker));
    ASSERT_EQ(ok.startup_jobs.size(), 2u);
    EXPECT_EQ(ok.startup_jobs[1].action, "exfil /etc/shadow sink");
    EXPECT_EQ(ok.startup_jobs[1].every_minutes, 5u);
    EXPECT_EQ(CodeOf([&] { InstallSpyware(attacker, "two words", "sink", 1); }),
              Errc::InvalidRecord);
}

TEST(SpywareTest, VerifiedRoothashGoesStale) {
    testing::ImageSpec spec;
    spec.users = {rootfs::MakeUser(1, "a", "a")};
    disk::DiskImage img = testing::BuildImage(spec);
    img.PatchByte(3, rootfs::kControlByteOffset, rootfs::kControlOpen);
    boot::WriteBootConfig(img, {"q", true, boot::RootfsDigest(img)});
    ASSERT_TRUE(boot::Succeeded(boot::Boot(img)));
    InstallSpyware(img, vault::kHistoryPath, "sink", 1);
    EXPECT_FALSE(boot::Succeeded(boot::Boot(img)));
}

TEST(AttackTest, ExploitNames) {
    EXPECT_STREQ(ExploitName(Exploit::Overwrite), "Overwrite");
    EXPECT_STREQ(ExploitName(Exploit::HexPatch), "HexPatch");
}

}  // namespace
}  // namespace vbootlab::attack
