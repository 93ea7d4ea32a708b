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

#include <filesystem>
#include <fstream>
#include <random>

#include "json.hpp"
#include "support/fixtures.h"
#include "support/process.h"
#include "support/sha256_ref.h"
#include "vbootlab/disk_image.h"
#include "vbootlab/image_file.h"

namespace vbootlab {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using testing::CliResult;

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("vbootlab-cli-" + std::to_string(::getpid()) + "-" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string Path(const std::string& name) const { return (dir_ / name).string(); }

    CliResult Run(const std::vector<std::string>& args,
                  const std::map<std::string, std::string>& env = {{"VBOOTLAB_PASSWORD", ""}}) {
        return testing::RunProcess(VBOOTLAB_CLI_PATH, args, env);
    }

    json RunJson(const std::vector<std::string>& args, int expect_exit) {
        std::vector<std::string> full = {"--json"};
        full.insert(full.end(), args.begin(), args.end());
        CliResult r = Run(full);
        EXPECT_EQ(r.exit_code, expect_exit) << r.err;
        json j = json::parse(r.out, nullptr, false);
        EXPECT_FALSE(j.is_discarded()) << r.out;
        if (!j.is_discarded()) EXPECT_EQ(j["schema"], "vbootlab/1");
        return j;
    }

    void WriteFile(const std::string& name, const Bytes& data) {
        std::ofstream out(Path(name), std::ios::binary);
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    }

    void BuildVictim() {
        std::mt19937_64 rng(101);
        sentinel_ = testing::RandomBytes(rng, 64);
        WriteFile("history", sentinel_);
        CliResult r = Run({"build", "--out", Path("victim.cvd"), "--verify", "on", "--p1-sectors",
                           "64", "--p3-sectors", "16", "--p12-sectors", "2", "--user", "alice:a",
                           "--user", "bob:b", "--vault", "alice:alice-pw:" + Path("history"),
                           "--kdf-iters", "16"});
        ASSERT_EQ(r.exit_code, 0) << r.err;
        ASSERT_NE(r.out.find("roothash: "), std::string::npos);
    }

    void BuildAttacker() {
        CliResult r = Run({"build", "--out", Path("attacker.cvd"), "--verify", "off",
                           "--p1-sectors", "64", "--p3-sectors", "16", "--p12-sectors", "2",
                           "--user", "eve:e:super", "--job", "1:" + std::string(testing::kSpywareAction)});
        ASSERT_EQ(r.exit_code, 0) << r.err;
    }

    fs::path dir_;
    Bytes sentinel_;
};

TEST_F(CliTest, BadArgumentsExit64) {
    EXPECT_EQ(Run({}).exit_code, 64);
    EXPECT_EQ(Run({"frobnicate"}).exit_code, 64);
    EXPECT_EQ(Run({"boot"}).exit_code, 64);
    EXPECT_EQ(Run({"build", "--out", Path("x.cvd"), "--verify", "maybe"}).exit_code, 64);
    EXPECT_EQ(Run({"--help"}).exit_code, 0);
}

TEST_F(CliTest, UnreadableOrMalformedImageExit64) {
    EXPECT_EQ(Run({"boot", Path("missing.cvd")}).exit_code, 64);
    WriteFile("junk.cvd", Bytes(4096, 0x5a));
    EXPECT_EQ(Run({"boot", Path("junk.cvd")}).exit_code, 64);
    EXPECT_EQ(Run({"inspect", Path("junk.cvd")}).exit_code, 64);
    EXPECT_EQ(Run({"audit", "--image", Path("junk.cvd"), "--password", "x"}).exit_code, 64);
}

TEST_F(CliTest, BuildBootAndInspect) {
    BuildVictim();
    json boot = RunJson({"boot", Path("victim.cvd")}, 0);
    EXPECT_EQ(boot["outcome"], "BootSuccess");
    EXPECT_EQ(boot["users"].size(), 2u);

    json info = RunJson({"inspect", Path("victim.cvd")}, 0);
    EXPECT_EQ(info["sector_size"], 512);
    EXPECT_EQ(info["partitions"].size(), 12u);
    EXPECT_EQ(info["control_byte"], "0xff");
    EXPECT_EQ(info["boot_config"]["verify"], true);
    EXPECT_EQ(info["boot_config"]["roothash"], info["rootfs_sha256"]);
    EXPECT_EQ(info["vault_count"], 1);
    EXPECT_EQ(info["mitigation_blob"]["present"], false);

    CliResult human = Run({"inspect", Path("victim.cvd")});
    EXPECT_NE(human.out.find("control_byte: 0xff"), std::string::npos);
}

TEST_F(CliTest, InspectDumpMatchesReferenceDigest) {
    BuildVictim();
    CliResult r = Run({"inspect", Path("victim.cvd"), "--dump-partition", "3", "--out", Path("p3.bin")});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    std::ifstream in(Path("p3.bin"), std::ios::binary);
    Bytes p3((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(p3.size(), 16u * 512);
    json info = RunJson({"inspect", Path("victim.cvd")}, 0);
    EXPECT_EQ(info["rootfs_sha256"], testing::ReferenceSha256Hex(p3));
}

TEST_F(CliTest, PatchedRootfsBootExit2) {
    BuildVictim();
    EXPECT_EQ(Run({"patch", Path("victim.cvd"), "--partition", "3", "--offset", "0x700", "--byte", "1"})
                  .exit_code,
              0);
    json boot = RunJson({"boot", Path("victim.cvd")}, 2);
    EXPECT_EQ(boot["outcome"], "RecoveryTriggered");
    EXPECT_EQ(boot["reason"], "KernelPanicHashMismatch");
}

TEST_F(CliTest, PatchRangeChecks) {
    BuildVictim();
    EXPECT_EQ(Run({"patch", Path("victim.cvd"), "--partition", "3", "--offset", "8192", "--byte", "1"})
                  .exit_code,
              64);
    EXPECT_EQ(Run({"patch", Path("victim.cvd"), "--partition", "13", "--offset", "0", "--byte", "1"})
                  .exit_code,
              64);
    EXPECT_EQ(Run({"patch", Path("victim.cvd"), "--partition", "3", "--offset", "0", "--byte", "256"})
                  .exit_code,
              64);
    EXPECT_EQ(Run({"patch", Path("victim.cvd"), "--partition", "3", "--offset", "zz", "--byte", "1"})
                  .exit_code,
              64);
}

TEST_F(CliTest, Exploit1ThenSession) {
    BuildVictim();
    BuildAttacker();
    json report = RunJson({"exploit1", "--victim", Path("victim.cvd"), "--attacker", Path("attacker.cvd")}, 0);
    EXPECT_EQ(report["victim_users_preserved"], false);
    EXPECT_EQ(RunJson({"boot", Path("victim.cvd")}, 0)["users"][0]["name"], "eve");

    json s = RunJson({"session", "--image", Path("victim.cvd"), "--user", "alice", "--password",
                      "alice-pw", "--ticks", "3", "--sink", Path("sink.jsonl")},
                     0);
    EXPECT_EQ(s["sink_entries"], 3);
    std::ifstream in(Path("sink.jsonl"));
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        json e = json::parse(line);
        EXPECT_EQ(e["sha256"], testing::ReferenceSha256Hex(sentinel_));
        EXPECT_EQ(e["bytes"], 64);
        ++lines;
    }
    EXPECT_EQ(lines, 3);
}

TEST_F(CliTest, Exploit2WithDonorImageAndRawBootloader) {
    BuildVictim();
    BuildAttacker();
    json report = RunJson({"exploit2", "--victim", Path("victim.cvd"), "--bootloader", Path("attacker.cvd")}, 0);
    EXPECT_EQ(report["victim_users_preserved"], true);
    EXPECT_EQ(RunJson({"boot", Path("victim.cvd")}, 0)["users"].size(), 2u);
    json again = RunJson({"exploit2", "--victim", Path("victim.cvd"), "--bootloader", Path("attacker.cvd")}, 1);
    EXPECT_EQ(again["error"], "AlreadyPatched");

    BuildVictim();
    ASSERT_EQ(Run({"inspect", Path("attacker.cvd"), "--dump-partition", "12", "--out", Path("p12.bin")})
                  .exit_code,
              0);
    EXPECT_EQ(Run({"exploit2", "--victim", Path("victim.cvd"), "--bootloader", Path("p12.bin")}).exit_code, 0);
    EXPECT_EQ(Run({"install-spyware", "--image", Path("victim.cvd")}).exit_code, 0);
    json boot = RunJson({"boot", Path("victim.cvd")}, 0);
    ASSERT_EQ(boot["jobs"].size(), 1u);
}

TEST_F(CliTest, ModuleErrorsExit1WithName) {
    BuildVictim();
    json j = RunJson({"install-spyware", "--image", Path("victim.cvd")}, 1);
    EXPECT_EQ(j["error"], "MountBlocked");
    CliResult r = Run({"install-spyware", "--image", Path("victim.cvd")});
    EXPECT_NE(r.err.find("MountBlocked"), std::string::npos);
}

TEST_F(CliTest, SessionWrongPasswordExit3) {
    BuildVictim();
    EXPECT_EQ(Run({"session", "--image", Path("victim.cvd"), "--user", "alice", "--password", "no",
                   "--ticks", "1", "--sink", Path("sink.jsonl")})
                  .exit_code,
              3);
}

TEST_F(CliTest, SessionOnTamperedImageExit2) {
    BuildVictim();
    BuildAttacker();
    Run({"exploit1", "--victim", Path("victim.cvd"), "--attacker", Path("attacker.cvd"), "--rootfs-only"});
    EXPECT_EQ(Run({"boot", Path("victim.cvd")}).exit_code, 2);
    EXPECT_EQ(Run({"session", "--image", Path("victim.cvd"), "--user", "alice", "--password",
                   "alice-pw", "--ticks", "1", "--sink", Path("sink.jsonl")})
                  .exit_code,
              2);
    EXPECT_FALSE(fs::exists(Path("sink.jsonl")) && fs::file_size(Path("sink.jsonl")) > 0);
}

TEST_F(CliTest, ProtectAuditExitCodes) {
    BuildVictim();
    EXPECT_EQ(Run({"audit", "--image", Path("victim.cvd"), "--password", "p"}).exit_code, 4);
    EXPECT_EQ(Run({"protect", "--image", Path("victim.cvd"), "--password", "p", "--kdf-iters", "16"}).exit_code, 0);
    json j = RunJson({"audit", "--image", Path("victim.cvd"), "--password", "p"}, 0);
    EXPECT_EQ(j["verdict"], "Clean");
    EXPECT_TRUE(j["elapsed_seconds"].is_number());
    EXPECT_EQ(Run({"audit", "--image", Path("victim.cvd"), "--password", "q"}).exit_code, 3);
    EXPECT_EQ(Run({"protect", "--image", Path("victim.cvd"), "--password", "p"}).exit_code, 1);
}

TEST_F(CliTest, PasswordFromEnvironmentAndFlagWins) {
    BuildVictim();
    std::map<std::string, std::string> env = {{"VBOOTLAB_PASSWORD", "from-env"}};
    EXPECT_EQ(Run({"protect", "--image", Path("victim.cvd"), "--kdf-iters", "16"}, env).exit_code, 0);
    EXPECT_EQ(Run({"audit", "--image", Path("victim.cvd")}, env).exit_code, 0);
    EXPECT_EQ(Run({"audit", "--image", Path("victim.cvd"), "--password", "other"}, env).exit_code, 3);
    EXPECT_EQ(Run({"audit", "--image", Path("victim.cvd"), "--password", "from-env"}).exit_code, 0);
}

TEST_F(CliTest, LockedImageExit1) {
    BuildVictim();
    disk::LockedImageFile holder(Path("victim.cvd"), disk::LockedImageFile::Mode::ReadWrite);
    json j = RunJson({"boot", Path("victim.cvd")}, 1);
    EXPECT_EQ(j["error"], "ImageLocked");
    EXPECT_EQ(Run({"protect", "--image", Path("victim.cvd"), "--password", "p"}).exit_code, 1);
}

TEST_F(CliTest, AuditLeavesFileUnchanged) {
    BuildVictim();
    Run({"protect", "--image", Path("victim.cvd"), "--password", "p", "--kdf-iters", "16"});
    Bytes before = disk::DiskImage::Load(Path("victim.cvd")).Serialize();
    Run({"audit", "--image", Path("victim.cvd"), "--password", "p"});
    Run({"audit", "--image", Path("victim.cvd"), "--password", "wrong"});
    Run({"boot", Path("victim.cvd")});
    Run({"inspect", Path("victim.cvd")});
    EXPECT_EQ(disk::DiskImage::Load(Path("victim.cvd")).Serialize(), before);
}

}  // namespace
}  // namespace vbootlab
