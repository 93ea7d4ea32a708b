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

#include "vbootlab/vault.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vbootlab/error.h"

namespace vbootlab::vault {

namespace {

constexpr std::size_t kRecordHeaderSize = 5;
constexpr std::string_view kVaultAadPrefix = "vbootlab/vault/";

Bytes EncodeRecord(const VaultRecord& record) {
    ByteWriter payload;
    uint8_t kind;
    if (const auto* v = std::get_if<UserVault>(&record)) {
        kind = kUserVaultKind;
        payload.String16(v->username);
        v->box.Serialize(payload);
    } else {
        kind = kMitigationBlobKind;
        std::get<MitigationBlob>(record).box.Serialize(payload);
    }
    ByteWriter out;
    out.U8(kind);
    out.U32(static_cast<uint32_t>(payload.size()));
    out.Raw(payload.bytes());
    return out.Take();
}

std::vector<std::string> Tokens(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string token;
    while (in >> token) out.push_back(token);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

RecordScanner::RecordScanner(ByteSpan partition, AccessLog* log) : data_(partition), log_(log) {}

bool RecordScanner::Next() {
    if (cursor_ >= data_.size() || data_[cursor_] == 0) return false;
    if (data_.size() - cursor_ < kRecordHeaderSize) {
        throw Error(Errc::CorruptVaultStore, "record header truncated", cursor_);
    }
    offset_ = cursor_;
    kind_ = data_[cursor_];
    uint32_t len = LoadU32(data_, cursor_ + 1);
    if (len > data_.size() - cursor_ - kRecordHeaderSize) {
        throw Error(Errc::CorruptVaultStore, "record runs past the partition", cursor_ + 1);
    }
    payload_ = data_.subspan(cursor_ + kRecordHeaderSize, len);
    cursor_ += kRecordHeaderSize + len;
    return true;
}

ByteSpan RecordScanner::payload() {
    if (log_ != nullptr) log_->push_back({kind_, offset_});
    return payload_;
}

bool HasUserDataMagic(ByteSpan partition) {
    return partition.size() >= kRecordsOffset && std::memcmp(partition.data(), kUserDataMagic, 4) == 0;
}

// ---------------------------------------------------------------------------

VaultStore VaultStore::Parse(ByteSpan partition, AccessLog* log) {
    if (!HasUserDataMagic(partition)) {
        throw Error(Errc::CorruptVaultStore, "partition 1 is not formatted (no UDP1 magic)", 0);
    }
    for (std::size_t at = 4; at < kRecordsOffset; ++at) {
        if (partition[at] != 0) {
            throw Error(Errc::CorruptVaultStore, "nonzero byte in the partition header", at);
        }
    }
    VaultStore store;
    std::set<std::string> names;
    bool have_blob = false;
    RecordScanner scan(partition, log);
    while (scan.Next()) {
        std::size_t payload_at = scan.offset() + kRecordHeaderSize;
        ByteReader in(scan.payload(), payload_at);
        try {
            if (scan.kind() == kUserVaultKind) {
                UserVault v;
                v.username = in.String16();
                v.box = crypto::SealedBox::Parse(in);
                if (!names.insert(v.username).second) {
                    throw Error(Errc::CorruptVaultStore, "two vaults for " + v.username,
                                scan.offset());
                }
                store.records_.emplace_back(std::move(v));
            } else if (scan.kind() == kMitigationBlobKind) {
                if (have_blob) {
                    throw Error(Errc::CorruptVaultStore, "second mitigation blob", scan.offset());
                }
                have_blob = true;
                store.records_.emplace_back(MitigationBlob{crypto::SealedBox::Parse(in)});
            } else {
                throw Error(Errc::CorruptVaultStore, "unknown record kind", scan.offset());
            }
        } catch (const ShortRead& e) {
            throw Error(Errc::CorruptVaultStore, "record payload truncated", e.offset);
        }
        if (!in.done()) {
            throw Error(Errc::CorruptVaultStore, "record payload has trailing bytes", in.offset());
        }
    }
    return store;
}

VaultStore VaultStore::Load(const disk::DiskImage& img, AccessLog* log) {
    return Parse(img.PartitionView(disk::kUserDataPartition), log);
}

Bytes VaultStore::Serialize(std::size_t partition_size) const {
    ByteWriter out;
    out.Raw(std::string_view(kUserDataMagic, 4));
    out.Zeros(kRecordsOffset - 4);
    for (const VaultRecord& record : records_) out.Raw(EncodeRecord(record));
    if (out.size() > partition_size) {
        throw Error(Errc::TooLarge, "partition 1 needs " + std::to_string(out.size()) +
                                        " bytes, has " + std::to_string(partition_size));
    }
    Bytes bytes = out.Take();
    bytes.resize(partition_size, 0);
    return bytes;
}

void VaultStore::Store(disk::DiskImage& img) const {
    img.WritePartition(disk::kUserDataPartition,
                       Serialize(img.partition_size(disk::kUserDataPartition)));
}

UserVault* VaultStore::FindVault(std::string_view username) {
    for (VaultRecord& r : records_) {
        if (auto* v = std::get_if<UserVault>(&r); v && v->username == username) return v;
    }
    return nullptr;
}

const UserVault* VaultStore::FindVault(std::string_view username) const {
    return const_cast<VaultStore*>(this)->FindVault(username);
}

std::vector<std::string> VaultStore::usernames() const {
    std::vector<std::string> out;
    for (const VaultRecord& r : records_) {
        if (const auto* v = std::get_if<UserVault>(&r)) out.push_back(v->username);
    }
    return out;
}

const MitigationBlob* VaultStore::blob() const {
    for (const VaultRecord& r : records_) {
        if (const auto* b = std::get_if<MitigationBlob>(&r)) return b;
    }
    return nullptr;
}

void VaultStore::SetBlob(MitigationBlob blob) {
    for (VaultRecord& r : records_) {
        if (auto* b = std::get_if<MitigationBlob>(&r)) {
            *b = std::move(blob);
            return;
        }
    }
    records_.emplace_back(std::move(blob));
}

bool VaultStore::RemoveBlob() {
    auto it = std::find_if(records_.begin(), records_.end(), [](const VaultRecord& r) {
        return std::holds_alternative<MitigationBlob>(r);
    });
    if (it == records_.end()) return false;
    records_.erase(it);
    return true;
}

void FormatUserData(disk::DiskImage& img) {
    VaultStore().Store(img);
}

// ---------------------------------------------------------------------------

const VaultFile* VaultContent::Find(std::string_view path) const {
    for (const VaultFile& f : files) {
        if (f.path == path) return &f;
    }
    return nullptr;
}

Bytes VaultContent::Serialize() const {
    std::set<std::string_view> seen;
    ByteWriter out;
    out.U32(static_cast<uint32_t>(files.size()));
    for (const VaultFile& f : files) {
        if (f.path.empty() || f.path.size() > 0xffff || !IsValidUtf8(f.path)) {
            throw Error(Errc::InvalidRecord, "vault path must be non-empty UTF-8");
        }
        if (!seen.insert(f.path).second) {
            throw Error(Errc::DuplicatePath, "vault path " + f.path + " repeated");
        }
        out.String16(f.path);
        out.U32(static_cast<uint32_t>(f.data.size()));
        out.Raw(f.data);
    }
    return out.Take();
}

VaultContent VaultContent::Parse(ByteSpan data) {
    VaultContent content;
    ByteReader in(data);
    std::set<std::string> seen;
    try {
        uint32_t count = in.U32();
        for (uint32_t i = 0; i < count; ++i) {
            VaultFile f;
            f.path = in.String16();
            uint32_t len = in.U32();
            ByteSpan raw = in.Raw(len);
            f.data.assign(raw.begin(), raw.end());
            if (!seen.insert(f.path).second) {
                throw Error(Errc::CorruptVaultStore, "vault path repeated", in.offset());
            }
            content.files.push_back(std::move(f));
        }
    } catch (const ShortRead& e) {
        throw Error(Errc::CorruptVaultStore, "vault content truncated", e.offset);
    }
    if (!in.done()) throw Error(Errc::CorruptVaultStore, "vault content trailing bytes", in.offset());
    return content;
}

void VaultContent::Wipe() {
    for (VaultFile& f : files) crypto::Cleanse(f.data);
    files.clear();
}

Bytes VaultAad(std::string_view username) {
    Bytes aad(kVaultAadPrefix.begin(), kVaultAadPrefix.end());
    aad.insert(aad.end(), username.begin(), username.end());
    return aad;
}

void CreateVault(disk::DiskImage& img, std::string_view username, std::string_view password,
                 const VaultContent& content, uint32_t kdf_iters, crypto::Cipher cipher) {
    if (password.empty()) throw Error(Errc::EmptyPassword, "vault password must not be empty");
    if (username.empty() || username.size() > 0xffff || !IsValidUtf8(username)) {
        throw Error(Errc::InvalidRecord, "username must be non-empty UTF-8");
    }
    ByteSpan p1 = img.PartitionView(disk::kUserDataPartition);
    VaultStore store = std::all_of(p1.begin(), p1.end(), [](uint8_t b) { return b == 0; })
                           ? VaultStore()
                           : VaultStore::Load(img);
    if (store.FindVault(username) != nullptr) {
        throw Error(Errc::DuplicateUser, "vault for " + std::string(username) + " exists");
    }
    crypto::SecretBytes plaintext(content.Serialize());
    UserVault v{std::string(username),
                crypto::SealWithPassword(password, VaultAad(username), plaintext.span(),
                                         kdf_iters, cipher)};
    store.records().emplace_back(std::move(v));
    store.Store(img);
}

// ---------------------------------------------------------------------------

std::string SinkEvent::ToJson() const {
    nlohmann::ordered_json j;
    j["minute"] = minute;
    j["user"] = user;
    switch (kind) {
        case Kind::Exfil:
            j["path"] = path;
            j["bytes"] = bytes;
            j["sha256"] = sha256;
            break;
        case Kind::MissingPath:
            j["path"] = path;
            j["event"] = "missing-path";
            break;
        case Kind::UnsupportedAction:
            j["event"] = "unsupported-action";
            j["action"] = action;
            break;
    }
    return j.dump();
}

FileSink::FileSink(std::filesystem::path path) : path_(std::move(path)) {}

void FileSink::Append(const SinkEvent& event) {
    std::string line = event.ToJson() + "\n";
    int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) {
        throw Error(Errc::IoError, "cannot open sink " + path_.string() + ": " + std::strerror(errno));
    }
    ssize_t n = ::write(fd, line.data(), line.size());
    ::close(fd);
    if (n != static_cast<ssize_t>(line.size())) {
        throw Error(Errc::IoError, "short write to sink " + path_.string());
    }
    ++appended_;
}

// ---------------------------------------------------------------------------

Session::Session(Session&& other) noexcept
    : img_(other.img_),
      active_(other.active_),
      username_(std::move(other.username_)),
      content_(std::move(other.content_)),
      key_(std::move(other.key_)),
      box_(std::move(other.box_)),
      elapsed_(other.elapsed_),
      jobs_(std::move(other.jobs_)) {
    other.img_ = nullptr;
    other.active_ = false;
}

Session::~Session() {
    Erase();
}

void Session::Erase() {
    content_.Wipe();
    key_.Wipe();
    if (img_ != nullptr) img_->Release(disk::Lease::Session);
    img_ = nullptr;
    active_ = false;
}

const VaultContent& Session::content() const {
    if (!active_) throw Error(Errc::UseAfterLogout, "session has ended");
    return content_;
}

void Session::Tick(uint32_t minutes, EventSink& sink) {
    if (!active_) throw Error(Errc::UseAfterLogout, "session has ended");
    for (uint32_t m = 0; m < minutes; ++m) {
        ++elapsed_;
        for (const rootfs::StartupJob& job : jobs_) {
            if (elapsed_ % job.every_minutes == 0) RunJob(job, sink);
        }
    }
}

void Session::RunJob(const rootfs::StartupJob& job, EventSink& sink) {
    SinkEvent event;
    event.minute = elapsed_;
    event.user = username_;
    std::vector<std::string> argv = Tokens(job.action);
    if (argv.size() != 3 || argv[0] != "exfil") {
        event.kind = SinkEvent::Kind::UnsupportedAction;
        event.action = job.action;
        sink.Append(event);
        return;
    }
    event.path = argv[1];
    event.dest = argv[2];
    if (const VaultFile* file = content_.Find(event.path)) {
        event.kind = SinkEvent::Kind::Exfil;
        event.bytes = file->data.size();
        event.sha256 = crypto::Sha256Hex(file->data);
    } else {
        event.kind = SinkEvent::Kind::MissingPath;
    }
    sink.Append(event);
}

void Session::Logout() {
    if (!active_) throw Error(Errc::UseAfterLogout, "session has ended");
    crypto::SecretBytes plaintext(content_.Serialize());
    VaultStore store = VaultStore::Load(*img_);
    UserVault* v = store.FindVault(username_);
    if (v == nullptr) throw Error(Errc::NoSuchVault, "vault for " + username_ + " disappeared");
    v->box = crypto::Reseal(box_, key_.span(), VaultAad(username_), plaintext.span());
    store.Store(*img_);
    Erase();
}

Session Login(disk::DiskImage& img, const boot::BootOutcome& boot, std::string_view username,
              std::string_view password) {
    const auto* booted = std::get_if<boot::BootSuccess>(&boot);
    if (booted == nullptr) throw Error(Errc::BootRequired, "system did not boot");

    VaultStore store = VaultStore::Load(img);
    const UserVault* v = store.FindVault(username);
    if (v == nullptr) throw Error(Errc::NoSuchVault, "no vault for " + std::string(username));

    crypto::SecretBytes key = crypto::DeriveKey(password, v->box.salt, v->box.kdf_iters);
    std::optional<crypto::SecretBytes> plaintext =
        crypto::OpenWithKey(v->box, key.span(), VaultAad(username));
    if (!plaintext) throw Error(Errc::AuthFailure, "wrong password for " + std::string(username));

    if (!img.TryAcquire(disk::Lease::Session)) {
        throw Error(Errc::SessionActive, "another session is active on this image");
    }
    Session s;
    s.img_ = &img;
    try {
        s.content_ = VaultContent::Parse(plaintext->span());
    } catch (...) {
        img.Release(disk::Lease::Session);
        s.img_ = nullptr;
        throw;
    }
    s.active_ = true;
    s.username_ = std::string(username);
    s.key_ = std::move(key);
    s.box_ = v->box;
    s.jobs_ = booted->startup_jobs;
    return s;
}

}  // namespace vbootlab::vault
