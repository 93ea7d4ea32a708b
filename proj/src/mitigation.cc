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

#include "vbootlab/mitigation.h"

#include <algorithm>

#include "vbootlab/error.h"

namespace vbootlab::mitigation {

namespace {

constexpr std::string_view kBlobAad = "vbootlab/bootloader-copy";

vault::VaultStore LoadOrEmpty(const disk::DiskImage& img) {
    ByteSpan p1 = img.PartitionView(disk::kUserDataPartition);
    if (std::all_of(p1.begin(), p1.end(), [](uint8_t b) { return b == 0; })) {
        return vault::VaultStore();
    }
    return vault::VaultStore::Load(img);
}

}  // namespace

const char* VerdictName(Verdict verdict) {
    switch (verdict) {
        case Verdict::Clean: return "Clean";
        case Verdict::Tampered: return "Tampered";
        case Verdict::AuthFailure: return "AuthFailure";
        case Verdict::MitigationAbsent: return "MitigationAbsent";
    }
    return "Unknown";
}

Bytes BlobAad() {
    return Bytes(kBlobAad.begin(), kBlobAad.end());
}

void EncryptBootloader(disk::DiskImage& img, std::string_view password, bool overwrite,
                       uint32_t kdf_iters, crypto::Cipher cipher) {
    if (password.empty()) throw Error(Errc::EmptyPassword, "protection password must not be empty");
    vault::VaultStore store = LoadOrEmpty(img);
    if (store.blob() != nullptr && !overwrite) {
        throw Error(Errc::BlobExists, "bootloader copy already stored; pass overwrite to replace it");
    }
    vault::MitigationBlob blob{crypto::SealWithPassword(
        password, BlobAad(), img.PartitionView(disk::kBootloaderPartition), kdf_iters, cipher)};
    store.SetBlob(std::move(blob));
    store.Store(img);
}

AuditVerdict VerifyIntegrity(const disk::DiskImage& img, std::string_view password,
                             vault::AccessLog* log) {
    AuditVerdict result;
    ByteSpan p1 = img.PartitionView(disk::kUserDataPartition);
    if (!vault::HasUserDataMagic(p1)) return result;

    std::optional<crypto::SealedBox> box;
    try {
        vault::RecordScanner scan(p1, log);
        while (scan.Next()) {
            if (scan.kind() != vault::kMitigationBlobKind) continue;
            ByteReader in(scan.payload());
            try {
                box = crypto::SealedBox::Parse(in);
            } catch (const ShortRead&) {
            } catch (const Error&) {
            }
            if (!box) {
                // A blob that cannot even be parsed cannot authenticate.
                result.verdict = Verdict::AuthFailure;
                return result;
            }
            break;
        }
    } catch (const Error&) {
        // Unreadable record chain before any blob was found.
    }
    if (!box) return result;

    std::optional<crypto::SecretBytes> stored = crypto::OpenWithPassword(*box, password, BlobAad());
    if (!stored) {
        result.verdict = Verdict::AuthFailure;
        return result;
    }
    result.stored_sha256 = crypto::Sha256Hex(stored->span());
    stored->Wipe();
    result.current_sha256 = crypto::Sha256Hex(img.PartitionView(disk::kBootloaderPartition));
    result.verdict =
        result.current_sha256 == result.stored_sha256 ? Verdict::Clean : Verdict::Tampered;
    return result;
}

std::optional<std::size_t> FindBlob(const disk::DiskImage& img) {
    ByteSpan p1 = img.PartitionView(disk::kUserDataPartition);
    if (!vault::HasUserDataMagic(p1)) return std::nullopt;
    try {
        vault::RecordScanner scan(p1);
        while (scan.Next()) {
            if (scan.kind() == vault::kMitigationBlobKind) return scan.offset();
        }
    } catch (const Error&) {
    }
    return std::nullopt;
}

bool RemoveBlob(disk::DiskImage& img) {
    vault::VaultStore store = vault::VaultStore::Load(img);
    if (!store.RemoveBlob()) return false;
    store.Store(img);
    return true;
}

}  // namespace vbootlab::mitigation
