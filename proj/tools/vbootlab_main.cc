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

// vbootlab: build verified-boot disk images, boot them, attack them, and
// audit them.
//
// Exit codes:
//   0   success / BootSuccess / Clean
//   1   operation refused (the module error name is printed)
//   2   RecoveryTriggered / Tampered
//   3   AuthFailure
//   4   MitigationAbsent
//   64  bad arguments, unreadable or malformed image file

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vbootlab/attacks.h"
#include "vbootlab/boot_chain.h"
#include "vbootlab/disk_image.h"
#include "vbootlab/error.h"
#include "vbootlab/image_file.h"
#include "vbootlab/mitigation.h"
#include "vbootlab/rootfs.h"
#include "vbootlab/vault.h"

namespace {

using namespace vbootlab;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitRefused = 1;
constexpr int kExitRecovery = 2;
constexpr int kExitAuth = 3;
constexpr int kExitAbsent = 4;
constexpr int kExitUsage = 64;

constexpr char kSchema[] = "vbootlab/1";
constexpr char kPasswordEnv[] = "VBOOTLAB_PASSWORD";
constexpr char kDefaultCmdline[] =
    "cros_secure console= loglevel=7 init=/sbin/init rootwait ro";

struct Globals {
    bool json = false;
    bool quiet = false;
};

Globals g;

// Thrown for anything the operator got wrong on the command line.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json Doc() {
    json j;
    j["schema"] = kSchema;
    return j;
}

void Emit(const json& j) {
    std::cout << j.dump(2) << "\n";
}

void Say(const std::string& line) {
    if (!g.json && !g.quiet) std::cout << line << "\n";
}

double SecondsSince(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Hex8(unsigned v) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "0x%02x", v & 0xff);
    return buf;
}

std::string ResolvePassword(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kPasswordEnv); env != nullptr && *env != '\0') return env;
    throw UsageError(std::string("a password is required (--password or ") + kPasswordEnv + ")");
}

Bytes ReadFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot read " + path);
    return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Opening the image is where a bad path or a corrupt header shows up; both
// map to the usage exit code.
disk::LockedImageFile OpenImage(const std::string& path, disk::LockedImageFile::Mode mode) {
    try {
        return disk::LockedImageFile(path, mode);
    } catch (const Error& e) {
        if (e.code() == Errc::ImageLocked) throw;
        throw UsageError(std::string("cannot load image: ") + e.what());
    }
}

std::vector<std::string> SplitColon(const std::string& s) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t colon = s.find(':', start);
        parts.push_back(s.substr(start, colon - start));
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    return parts;
}

json UsersJson(const std::vector<rootfs::User>& users) {
    json out = json::array();
    for (const auto& u : users) {
        out.push_back({{"uid", u.uid},
                       {"name", u.name},
                       {"privilege", u.privilege == rootfs::Privilege::Superuser ? "superuser"
                                                                                 : "normal"}});
    }
    return out;
}

json JobsJson(const std::vector<rootfs::StartupJob>& jobs) {
    json out = json::array();
    for (const auto& j : jobs) out.push_back({{"every_minutes", j.every_minutes}, {"action", j.action}});
    return out;
}

json ReportJson(const attack::AttackReport& r) {
    json j = Doc();
    j["exploit"] = attack::ExploitName(r.exploit);
    j["bytes_written"] = r.bytes_written;
    j["victim_users_preserved"] = r.victim_users_preserved;
    j["bootloader_replaced"] = r.bootloader_replaced;
    j["duration_seconds"] = r.duration_seconds;
    return j;
}

// ---------------------------------------------------------------------------
// build

struct BuildArgs {
    std::string out;
    std::string verify = "on";
    uint64_t p1_sectors = 4096;
    uint64_t p3_sectors = 8192;
    uint64_t p12_sectors = 64;
    std::vector<std::string> users;
    std::vector<std::string> jobs;
    std::vector<std::string> vaults;
    std::string cmdline = kDefaultCmdline;
    uint32_t kdf_iters = crypto::kDefaultKdfIters;
};

int CmdBuild(const BuildArgs& a) {
    bool verify = a.verify == "on";

    std::vector<rootfs::User> users;
    for (std::size_t i = 0; i < a.users.size(); ++i) {
        std::vector<std::string> f = SplitColon(a.users[i]);
        if (f.size() < 2 || f.size() > 3 || (f.size() == 3 && f[2] != "super")) {
            throw Error(Errc::InvalidRecord, "--user expects name:pass[:super], got " + a.users[i]);
        }
        users.push_back(rootfs::MakeUser(
            static_cast<uint32_t>(1000 + i), f[0], f[1],
            f.size() == 3 ? rootfs::Privilege::Superuser : rootfs::Privilege::Normal));
    }

    std::vector<rootfs::StartupJob> jobs;
    for (const std::string& spec : a.jobs) {
        std::size_t colon = spec.find(':');
        if (colon == std::string::npos) {
            throw Error(Errc::InvalidRecord, "--job expects M:action, got " + spec);
        }
        uint32_t every = 0;
        try {
            every = static_cast<uint32_t>(std::stoul(spec.substr(0, colon)));
        } catch (const std::exception&) {
            throw Error(Errc::InvalidRecord, "--job interval is not a number: " + spec);
        }
        jobs.push_back({every, spec.substr(colon + 1)});
    }

    std::vector<disk::LayoutEntry> layout =
        disk::DefaultLayout(a.p1_sectors, a.p3_sectors, a.p12_sectors);
    disk::DiskImage img = disk::DiskImage::Create(layout);
    vault::FormatUserData(img);

    uint8_t control = verify ? rootfs::kControlEnforced : rootfs::kControlOpen;
    img.WritePartition(disk::kRootfsPartition,
                       rootfs::BuildRootfs(users, jobs, {}, control,
                                           img.partition_size(disk::kRootfsPartition)));

    boot::BootConfig cfg;
    cfg.cmdline = a.cmdline;
    cfg.verify = verify;
    if (verify) cfg.roothash = boot::RootfsDigest(img);
    boot::WriteBootConfig(img, cfg);

    for (const std::string& spec : a.vaults) {
        std::vector<std::string> f = SplitColon(spec);
        if (f.size() < 2 || f.size() > 3) {
            throw Error(Errc::InvalidRecord, "--vault expects name:pass[:history-file], got " + spec);
        }
        vault::VaultContent content;
        if (f.size() == 3) content.files.push_back({vault::kHistoryPath, ReadFile(f[2])});
        vault::CreateVault(img, f[0], f[1], content, a.kdf_iters);
    }

    disk::CreateImageFile(a.out, img);

    std::string roothash = verify ? ToHex(*cfg.roothash) : "";
    if (g.json) {
        json j = Doc();
        j["out"] = a.out;
        j["verify"] = verify;
        j["roothash"] = verify ? json(roothash) : json(nullptr);
        j["image_bytes"] = img.Serialize().size();
        Emit(j);
    } else if (!g.quiet) {
        std::cout << "roothash: " << (verify ? roothash : "(verification disabled)") << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// boot

int CmdBoot(const std::string& path) {
    disk::LockedImageFile file = OpenImage(path, disk::LockedImageFile::Mode::ReadOnly);
    boot::BootOutcome outcome = boot::Boot(file.image());
    const auto* ok = std::get_if<boot::BootSuccess>(&outcome);
    const auto* failed = std::get_if<boot::RecoveryTriggered>(&outcome);
    if (g.json) {
        json j = Doc();
        j["outcome"] = ok ? "BootSuccess" : "RecoveryTriggered";
        j["reason"] = ok ? json(nullptr) : json(boot::RecoveryReasonName(failed->reason));
        j["users"] = ok ? UsersJson(ok->users) : json::array();
        j["jobs"] = ok ? JobsJson(ok->startup_jobs) : json::array();
        if (failed) j["detail"] = failed->detail;
        Emit(j);
    } else if (ok) {
        Say("BootSuccess: " + std::to_string(ok->users.size()) + " user(s), " +
            std::to_string(ok->startup_jobs.size()) + " startup job(s)");
    } else {
        Say(std::string("RecoveryTriggered: ") + boot::RecoveryReasonName(failed->reason) + " (" +
            failed->detail + ")");
    }
    return ok ? kExitOk : kExitRecovery;
}

// ---------------------------------------------------------------------------
// exploits

int CmdExploit1(const std::string& victim_path, const std::string& attacker_path,
                bool rootfs_only) {
    disk::LockedImageFile victim = OpenImage(victim_path, disk::LockedImageFile::Mode::ReadWrite);
    disk::LockedImageFile attacker =
        OpenImage(attacker_path, disk::LockedImageFile::Mode::ReadOnly);
    attack::AttackReport report =
        attack::AttackOverwrite(victim.image(), attacker.image(), {rootfs_only});
    victim.Commit();
    Emit(ReportJson(report));
    return kExitOk;
}

int CmdExploit2(const std::string& victim_path, const std::string& bootloader_path,
                bool rootfs_only) {
    Bytes replacement;
    if (!rootfs_only) {
        if (bootloader_path.empty()) throw UsageError("--bootloader is required");
        replacement = ReadFile(bootloader_path);
        // An image file donates its partition 12.
        if (replacement.size() >= 8 && std::equal(replacement.begin(), replacement.begin() + 8,
                                                  disk::kImageMagic)) {
            replacement = disk::DiskImage::Parse(std::move(replacement))
                              .ReadPartition(disk::kBootloaderPartition);
        }
    }
    disk::LockedImageFile victim = OpenImage(victim_path, disk::LockedImageFile::Mode::ReadWrite);
    attack::AttackReport report =
        attack::AttackHexpatch(victim.image(), replacement, {rootfs_only});
    victim.Commit();
    Emit(ReportJson(report));
    return kExitOk;
}

int CmdInstallSpyware(const std::string& path, const std::string& file_path,
                      const std::string& dest, uint32_t every) {
    disk::LockedImageFile file = OpenImage(path, disk::LockedImageFile::Mode::ReadWrite);
    attack::InstallSpyware(file.image(), file_path, dest, every);
    file.Commit();
    if (g.json) {
        json j = Doc();
        j["installed"] = "exfil " + file_path + " " + dest;
        j["every_minutes"] = every;
        Emit(j);
    } else {
        Say("installed startup job: every " + std::to_string(every) + " min: exfil " + file_path +
            " " + dest);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// session

int CmdSession(const std::string& path, const std::string& user, const std::string& password,
               uint32_t ticks, const std::string& sink_path) {
    disk::LockedImageFile file = OpenImage(path, disk::LockedImageFile::Mode::ReadWrite);
    boot::BootOutcome outcome = boot::Boot(file.image());
    if (const auto* failed = std::get_if<boot::RecoveryTriggered>(&outcome)) {
        if (g.json) {
            json j = Doc();
            j["outcome"] = "RecoveryTriggered";
            j["reason"] = boot::RecoveryReasonName(failed->reason);
            j["sink_entries"] = 0;
            Emit(j);
        } else {
            Say(std::string("boot failed: ") + boot::RecoveryReasonName(failed->reason));
        }
        return kExitRecovery;
    }

    std::optional<vault::Session> session;
    try {
        session.emplace(vault::Login(file.image(), outcome, user, password));
    } catch (const Error& e) {
        if (e.code() != Errc::AuthFailure) throw;
        if (g.json) {
            json j = Doc();
            j["error"] = e.name();
            j["sink_entries"] = 0;
            Emit(j);
        } else {
            std::cerr << "login failed: " << e.what() << "\n";
        }
        return kExitAuth;
    }

    vault::FileSink sink(sink_path);
    session->Tick(ticks, sink);
    uint32_t elapsed = session->elapsed_minutes();
    session->Logout();
    file.Commit();

    if (g.json) {
        json j = Doc();
        j["outcome"] = "BootSuccess";
        j["user"] = user;
        j["elapsed_minutes"] = elapsed;
        j["sink_entries"] = sink.appended();
        Emit(j);
    } else {
        Say("sink entries: " + std::to_string(sink.appended()));
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// mitigation

int CmdProtect(const std::string& path, const std::string& password, bool overwrite,
               uint32_t kdf_iters) {
    auto start = Clock::now();
    disk::LockedImageFile file = OpenImage(path, disk::LockedImageFile::Mode::ReadWrite);
    mitigation::EncryptBootloader(file.image(), password, overwrite, kdf_iters);
    file.Commit();
    double elapsed = SecondsSince(start);
    if (g.json) {
        json j = Doc();
        j["protected"] = true;
        j["elapsed_seconds"] = elapsed;
        Emit(j);
    } else {
        Say("bootloader copy encrypted into partition 1");
        Say("elapsed_seconds: " + std::to_string(elapsed));
    }
    return kExitOk;
}

int CmdAudit(const std::string& path, const std::string& password) {
    auto start = Clock::now();
    disk::LockedImageFile file = OpenImage(path, disk::LockedImageFile::Mode::ReadOnly);
    mitigation::AuditVerdict v = mitigation::VerifyIntegrity(file.image(), password);
    double elapsed = SecondsSince(start);

    if (g.json) {
        json j = Doc();
        j["verdict"] = mitigation::VerdictName(v.verdict);
        j["current_sha256"] = v.current_sha256.empty() ? json(nullptr) : json(v.current_sha256);
        j["stored_sha256"] = v.stored_sha256.empty() ? json(nullptr) : json(v.stored_sha256);
        j["elapsed_seconds"] = elapsed;
        Emit(j);
    } else {
        Say(std::string("verdict: ") + mitigation::VerdictName(v.verdict));
        if (v.verdict == mitigation::Verdict::Tampered) {
            Say("current_sha256: " + v.current_sha256);
            Say("stored_sha256:  " + v.stored_sha256);
        }
        Say("elapsed_seconds: " + std::to_string(elapsed));
    }
    switch (v.verdict) {
        case mitigation::Verdict::Clean: return kExitOk;
        case mitigation::Verdict::Tampered: return kExitRecovery;
        case mitigation::Verdict::AuthFailure: return kExitAuth;
        case mitigation::Verdict::MitigationAbsent: return kExitAbsent;
    }
    return kExitRefused;
}

// ---------------------------------------------------------------------------
// inspect / patch

int CmdInspect(const std::string& path, int dump_partition, const std::string& dump_out) {
    disk::LockedImageFile file = OpenImage(path, disk::LockedImageFile::Mode::ReadOnly);
    const disk::DiskImage& img = file.image();

    if (dump_partition != 0) {
        if (dump_partition < 1 || dump_partition > 12) throw UsageError("--dump-partition must be 1..12");
        if (dump_out.empty()) throw UsageError("--dump-partition needs --out");
        std::ofstream out(dump_out, std::ios::binary | std::ios::trunc);
        ByteSpan view = img.PartitionView(dump_partition);
        out.write(reinterpret_cast<const char*>(view.data()),
                  static_cast<std::streamsize>(view.size()));
        if (!out) throw Error(Errc::IoError, "cannot write " + dump_out);
    }

    json j = Doc();
    j["sector_size"] = disk::kSectorSize;
    j["image_bytes"] = img.Serialize().size();
    json parts = json::array();
    for (const auto& p : img.partitions()) {
        parts.push_back({{"index", p.index},
                         {"role", disk::RoleName(p.role)},
                         {"start_sector", p.start_sector},
                         {"sector_count", p.sector_count},
                         {"label", p.label}});
    }
    j["partitions"] = parts;

    try {
        boot::BootConfig cfg = boot::ReadBootConfig(img);
        j["boot_config"] = {{"cmdline", cfg.cmdline},
                            {"verify", cfg.verify},
                            {"roothash", cfg.roothash ? json(ToHex(*cfg.roothash)) : json(nullptr)}};
    } catch (const Error& e) {
        j["boot_config"] = {{"error", e.name()}, {"message", e.what()}};
    }
    j["rootfs_sha256"] = ToHex(boot::RootfsDigest(img));

    ByteSpan p3 = img.PartitionView(disk::kRootfsPartition);
    j["control_byte"] = p3.size() > rootfs::kControlByteOffset
                            ? json(Hex8(p3[rootfs::kControlByteOffset]))
                            : json(nullptr);
    try {
        rootfs::RootfsImage rfs = rootfs::ParseRootfs(p3);
        j["rootfs"] = {{"users", UsersJson(rfs.users())},
                       {"jobs", JobsJson(rfs.jobs())},
                       {"files", rfs.files().size()}};
    } catch (const Error& e) {
        j["rootfs"] = {{"error", e.name()}, {"message", e.what()}};
    }

    // Partition 1 summary from record headers only; no vault payload is decoded.
    json vaults = json::object();
    std::size_t vault_count = 0;
    std::optional<std::size_t> blob = mitigation::FindBlob(img);
    ByteSpan p1 = img.PartitionView(disk::kUserDataPartition);
    if (vault::HasUserDataMagic(p1)) {
        try {
            vault::RecordScanner scan(p1);
            while (scan.Next()) {
                if (scan.kind() == vault::kUserVaultKind) ++vault_count;
            }
        } catch (const Error&) {
        }
    }
    j["vault_count"] = vault_count;
    j["mitigation_blob"] = {{"present", blob.has_value()},
                            {"offset", blob ? json(*blob) : json(nullptr)}};

    if (g.json) {
        Emit(j);
        return kExitOk;
    }
    if (g.quiet) return kExitOk;
    std::cout << "sector_size: " << disk::kSectorSize << "\n";
    for (const auto& p : img.partitions()) {
        std::printf("  %2u %-15s start=%-8llu sectors=%-8llu %s\n", p.index, disk::RoleName(p.role),
                    static_cast<unsigned long long>(p.start_sector),
                    static_cast<unsigned long long>(p.sector_count), p.label.c_str());
    }
    std::cout << "boot_config: " << j["boot_config"].dump() << "\n";
    std::cout << "rootfs_sha256: " << j["rootfs_sha256"].get<std::string>() << "\n";
    std::cout << "control_byte: "
              << (j["control_byte"].is_null() ? "n/a" : j["control_byte"].get<std::string>())
              << "\n";
    std::cout << "rootfs: " << j["rootfs"].dump() << "\n";
    std::cout << "vaults: " << vault_count << "\n";
    std::cout << "mitigation_blob: " << (blob ? "present" : "absent") << "\n";
    return kExitOk;
}

uint64_t ParseNumber(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(s, &used, 0);
        if (used != s.size() || s.empty() || s[0] == '-') throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string(what) + " is not a number: " + s);
    }
}

int CmdPatch(const std::string& path, int partition, const std::string& offset_text,
             const std::string& byte_text) {
    if (partition < 1 || partition > 12) throw UsageError("--partition must be 1..12");
    uint64_t offset = ParseNumber(offset_text, "--offset");
    uint64_t value = ParseNumber(byte_text, "--byte");
    if (value > 0xff) throw UsageError("--byte must be 0x00..0xff");

    disk::LockedImageFile file = OpenImage(path, disk::LockedImageFile::Mode::ReadWrite);
    if (offset >= file.image().partition_size(partition)) {
        throw UsageError("--offset is past the end of partition " + std::to_string(partition));
    }
    uint8_t old = file.image().PatchByte(partition, offset, static_cast<uint8_t>(value));
    file.Commit();
    if (g.json) {
        json j = Doc();
        j["partition"] = partition;
        j["offset"] = offset;
        j["old"] = Hex8(old);
        j["new"] = Hex8(static_cast<unsigned>(value));
        Emit(j);
    } else {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "partition %d offset 0x%llx: %s -> %s", partition,
                      static_cast<unsigned long long>(offset), Hex8(old).c_str(),
                      Hex8(static_cast<unsigned>(value)).c_str());
        Say(buf);
    }
    return kExitOk;
}

int ReportError(const Error& e) {
    if (g.json) {
        json j = Doc();
        j["error"] = e.name();
        j["message"] = e.what();
        Emit(j);
    }
    std::cerr << "error: " << e.what() << "\n";
    return kExitRefused;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vbootlab: verified-boot bypass and mitigation lab"};
    app.fallthrough();
    app.require_subcommand(1);
    app.add_flag("--json", g.json, "Machine-readable output (one JSON document)");
    app.add_flag("--quiet", g.quiet, "Suppress human-readable output");

    BuildArgs build;
    auto* c_build = app.add_subcommand("build", "Build a self-consistent disk image");
    c_build->add_option("--out", build.out, "Output image path")->required();
    c_build->add_option("--verify", build.verify, "Rootfs verification")
        ->check(CLI::IsMember({"on", "off"}));
    c_build->add_option("--p1-sectors", build.p1_sectors, "Partition 1 size in sectors");
    c_build->add_option("--p3-sectors", build.p3_sectors, "Partition 3 size in sectors");
    c_build->add_option("--p12-sectors", build.p12_sectors, "Partition 12 size in sectors");
    c_build->add_option("--user", build.users, "Rootfs user name:pass[:super]");
    c_build->add_option("--job", build.jobs, "Startup job M:action");
    c_build->add_option("--vault", build.vaults, "Vault name:pass[:history-file]");
    c_build->add_option("--cmdline", build.cmdline, "Kernel command line");
    c_build->add_option("--kdf-iters", build.kdf_iters, "PBKDF2 iterations for vaults")
        ->check(CLI::PositiveNumber);

    std::string image;
    auto* c_boot = app.add_subcommand("boot", "Run the verified boot chain");
    c_boot->add_option("image", image)->required();

    std::string victim, attacker, bootloader;
    bool rootfs_only = false;
    auto* c_x1 = app.add_subcommand("exploit1", "Overwrite partitions 3 and 12 bit-by-bit");
    c_x1->add_option("--victim", victim)->required();
    c_x1->add_option("--attacker", attacker)->required();
    c_x1->add_flag("--rootfs-only", rootfs_only, "Leave the victim's partition 12 in place");

    auto* c_x2 = app.add_subcommand("exploit2", "Hex-patch 0x467 and swap the bootloader");
    c_x2->add_option("--victim", victim)->required();
    c_x2->add_option("--bootloader", bootloader, "Raw partition-12 bytes or a donor image");
    c_x2->add_flag("--rootfs-only", rootfs_only, "Only patch the control byte");

    std::string spy_path = vault::kHistoryPath;
    std::string spy_dest = "adversary-sink";
    uint32_t spy_every = 1;
    auto* c_spy = app.add_subcommand("install-spyware", "Add an exfil startup job");
    c_spy->add_option("--image", image)->required();
    c_spy->add_option("--path", spy_path);
    c_spy->add_option("--dest", spy_dest);
    c_spy->add_option("--every", spy_every)->check(CLI::PositiveNumber);

    std::string user, password, sink;
    uint32_t ticks = 0;
    auto* c_session = app.add_subcommand("session", "Boot, log in, run N minutes, log out");
    c_session->add_option("--image", image)->required();
    c_session->add_option("--user", user)->required();
    c_session->add_option("--password", password);
    c_session->add_option("--ticks", ticks);
    c_session->add_option("--sink", sink)->required();

    bool overwrite = false;
    uint32_t kdf_iters = crypto::kDefaultKdfIters;
    auto* c_protect = app.add_subcommand("protect", "Store an encrypted copy of partition 12");
    c_protect->add_option("--image", image)->required();
    c_protect->add_option("--password", password);
    c_protect->add_flag("--overwrite", overwrite);
    c_protect->add_option("--kdf-iters", kdf_iters)->check(CLI::PositiveNumber);

    auto* c_audit = app.add_subcommand("audit", "Check partition 12 against the stored copy");
    c_audit->add_option("--image", image)->required();
    c_audit->add_option("--password", password);

    int dump_partition = 0;
    std::string dump_out;
    auto* c_inspect = app.add_subcommand("inspect", "Show layout and partition summaries");
    c_inspect->add_option("image", image)->required();
    c_inspect->add_option("--dump-partition", dump_partition, "Write this partition's bytes");
    c_inspect->add_option("--out", dump_out, "Destination for --dump-partition");

    int partition = 0;
    std::string offset_text, byte_text;
    auto* c_patch = app.add_subcommand("patch", "Overwrite one byte inside a partition");
    c_patch->add_option("image", image)->required();
    c_patch->add_option("--partition", partition)->required();
    c_patch->add_option("--offset", offset_text)->required();
    c_patch->add_option("--byte", byte_text)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*c_build) return CmdBuild(build);
        if (*c_boot) return CmdBoot(image);
        if (*c_x1) return CmdExploit1(victim, attacker, rootfs_only);
        if (*c_x2) return CmdExploit2(victim, bootloader, rootfs_only);
        if (*c_spy) return CmdInstallSpyware(image, spy_path, spy_dest, spy_every);
        if (*c_session) return CmdSession(image, user, ResolvePassword(password), ticks, sink);
        if (*c_protect) return CmdProtect(image, ResolvePassword(password), overwrite, kdf_iters);
        if (*c_audit) return CmdAudit(image, ResolvePassword(password));
        if (*c_inspect) return CmdInspect(image, dump_partition, dump_out);
        if (*c_patch) return CmdPatch(image, partition, offset_text, byte_text);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        return ReportError(e);
    }
    return kExitUsage;
}
