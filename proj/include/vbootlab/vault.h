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

// Partition-1 cached user data: per-user encrypted vaults, login sessions,
// the minute scheduler that runs rootfs startup jobs, and the exfiltration
// sink that records what those jobs send out.
//
// Partition layout:
//   [0x000, 0x200)  "UDP1" then zeros
//   0x200..         records: kind u8, payload_length u32, payload
//                   kind 1 = UserVault, kind 4 = MitigationBlob, kind 0 ends the list
//   UserVault payload:      name str16, sealed box
//   MitigationBlob payload: sealed box
//   sealed box: salt 16, kdf_iters u32, cipher_id u8, nonce 12,
//               ciphertext_len u32, ciphertext+tag

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vbootlab/boot_chain.h"
#include "vbootlab/bytes.h"
#include "vbootlab/crypto.h"
#include "vbootlab/disk_image.h"
#include "vbootlab/rootfs.h"

namespace vbootlab::vault {

constexpr std::size_t kRecordsOffset = 0x200;
constexpr char kUserDataMagic[] = "UDP1";
constexpr uint8_t kUserVaultKind = 1;
constexpr uint8_t kMitigationBlobKind = 4;
constexpr char kHistoryPath[] = "/home/chronos/user/History";

// ---------------------------------------------------------------------------
// Record scanning

struct RecordAccess {
    uint8_t kind;
    std::size_t offset;  // of the record header within partition 1
};
using AccessLog = std::vector<RecordAccess>;

// Walks record headers without decoding payloads. Every payload() call is
// appended to the optional access log, so callers can prove which records
// they actually read.
class RecordScanner {
  public:
    explicit RecordScanner(ByteSpan partition, AccessLog* log = nullptr);

    // Advances to the next record. False at the terminator or end of partition.
    // Throws CorruptVaultStore if a header runs past the partition.
    bool Next();
    uint8_t kind() const { return kind_; }
    std::size_t offset() const { return offset_; }
    ByteSpan payload();

  private:
    ByteSpan data_;
    AccessLog* log_;
    std::size_t cursor_ = kRecordsOffset;
    std::size_t offset_ = 0;
    uint8_t kind_ = 0;
    ByteSpan payload_;
};

bool HasUserDataMagic(ByteSpan partition);

// ---------------------------------------------------------------------------
// Records

struct UserVault {
    std::string username;
    crypto::SealedBox box;

    bool operator==(const UserVault&) const = default;
};

// Lives in partition 1 next to the vaults; written by the mitigation module.
struct MitigationBlob {
    crypto::SealedBox box;

    bool operator==(const MitigationBlob&) const = default;
};

using VaultRecord = std::variant<UserVault, MitigationBlob>;

class VaultStore {
  public:
    static VaultStore Parse(ByteSpan partition, AccessLog* log = nullptr);
    static VaultStore Load(const disk::DiskImage& img, AccessLog* log = nullptr);
    // Canonical encoding. Throws TooLarge.
    Bytes Serialize(std::size_t partition_size) const;
    void Store(disk::DiskImage& img) const;

    std::vector<VaultRecord>& records() { return records_; }
    const std::vector<VaultRecord>& records() const { return records_; }

    UserVault* FindVault(std::string_view username);
    const UserVault* FindVault(std::string_view username) const;
    std::vector<std::string> usernames() const;

    const MitigationBlob* blob() const;
    void SetBlob(MitigationBlob blob);
    bool RemoveBlob();

    bool operator==(const VaultStore&) const = default;

  private:
    std::vector<VaultRecord> records_;
};

// Writes an empty, formatted partition 1.
void FormatUserData(disk::DiskImage& img);

// ---------------------------------------------------------------------------
// Vault contents

struct VaultFile {
    std::string path;
    Bytes data;

    bool operator==(const VaultFile&) const = default;
};

struct VaultContent {
    std::vector<VaultFile> files;

    const VaultFile* Find(std::string_view path) const;
    // u32 count, then per file: path str16, data_length u32, data.
    Bytes Serialize() const;
    static VaultContent Parse(ByteSpan data);
    void Wipe();

    bool operator==(const VaultContent&) const = default;
};

Bytes VaultAad(std::string_view username);

// Throws EmptyPassword, DuplicateUser, DuplicatePath, InvalidRecord, TooLarge.
void CreateVault(disk::DiskImage& img, std::string_view username, std::string_view password,
                 const VaultContent& content, uint32_t kdf_iters = crypto::kDefaultKdfIters,
                 crypto::Cipher cipher = crypto::Cipher::Aes256Gcm);

// ---------------------------------------------------------------------------
// Exfiltration sink

struct SinkEvent {
    enum class Kind { Exfil, MissingPath, UnsupportedAction };

    Kind kind = Kind::Exfil;
    uint32_t minute = 0;
    std::string user;
    std::string path;
    std::string dest;
    uint64_t bytes = 0;
    std::string sha256;
    std::string action;

    // One JSON object. Exfil lines carry exactly minute, user, path, bytes,
    // sha256; the other kinds carry an "event" key instead of bytes/sha256.
    std::string ToJson() const;
    bool operator==(const SinkEvent&) const = default;
};

class EventSink {
  public:
    virtual ~EventSink() = default;
    virtual void Append(const SinkEvent& event) = 0;
};

class MemorySink : public EventSink {
  public:
    void Append(const SinkEvent& event) override { events_.push_back(event); }
    const std::vector<SinkEvent>& events() const { return events_; }

  private:
    std::vector<SinkEvent> events_;
};

// Appends one JSON line per event; the file is only ever appended to.
class FileSink : public EventSink {
  public:
    explicit FileSink(std::filesystem::path path);
    void Append(const SinkEvent& event) override;
    std::size_t appended() const { return appended_; }

  private:
    std::filesystem::path path_;
    std::size_t appended_ = 0;
};

// ---------------------------------------------------------------------------
// Sessions

class Session {
  public:
    Session(Session&& other) noexcept;
    Session& operator=(Session&&) = delete;
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;
    // Drops the plaintext without writing back; the stored ciphertext stays valid.
    ~Session();

    bool active() const { return active_; }
    const std::string& username() const { return username_; }
    uint32_t elapsed_minutes() const { return elapsed_; }
    const std::vector<rootfs::StartupJob>& jobs() const { return jobs_; }
    // Throws UseAfterLogout.
    const VaultContent& content() const;

    // Advances the clock minute by minute. A job fires on every minute where
    // elapsed % every_minutes == 0. Throws UseAfterLogout.
    void Tick(uint32_t minutes, EventSink& sink);

    // Re-encrypts under the same key with a fresh nonce, writes partition 1,
    // and erases the plaintext and key. Throws UseAfterLogout.
    void Logout();

  private:
    friend Session Login(disk::DiskImage&, const boot::BootOutcome&, std::string_view,
                         std::string_view);
    Session() = default;

    void RunJob(const rootfs::StartupJob& job, EventSink& sink);
    void Erase();

    disk::DiskImage* img_ = nullptr;
    bool active_ = false;
    std::string username_;
    VaultContent content_;
    crypto::SecretBytes key_;
    crypto::SealedBox box_;
    uint32_t elapsed_ = 0;
    std::vector<rootfs::StartupJob> jobs_;
};

// Throws BootRequired, SessionActive, NoSuchVault, AuthFailure, CorruptVaultStore.
Session Login(disk::DiskImage& img, const boot::BootOutcome& boot, std::string_view username,
              std::string_view password);

}  // namespace vbootlab::vault
