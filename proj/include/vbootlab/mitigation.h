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

// Bootloader integrity protection. `EncryptBootloader` seals a copy of the
// whole partition 12 into partition 1 under an operator password;
// `VerifyIntegrity` opens it and compares SHA-256 digests with the live
// partition 12. Neither touches the user vaults, so the audit runs before
// anyone logs in.

#include <optional>
#include <string>
#include <string_view>

#include "vbootlab/crypto.h"
#include "vbootlab/disk_image.h"
#include "vbootlab/vault.h"

namespace vbootlab::mitigation {

enum class Verdict { Clean, Tampered, AuthFailure, MitigationAbsent };

const char* VerdictName(Verdict verdict);

struct AuditVerdict {
    Verdict verdict = Verdict::MitigationAbsent;
    // Hex digests, filled for Clean and Tampered.
    std::string current_sha256;
    std::string stored_sha256;
};

Bytes BlobAad();

// Throws EmptyPassword, BlobExists (unless overwrite), TooLarge.
void EncryptBootloader(disk::DiskImage& img, std::string_view password, bool overwrite = false,
                       uint32_t kdf_iters = crypto::kDefaultKdfIters,
                       crypto::Cipher cipher = crypto::Cipher::Aes256Gcm);

// Read-only. Only the kind-4 record payload is read; `log` records every
// partition-1 payload access.
AuditVerdict VerifyIntegrity(const disk::DiskImage& img, std::string_view password,
                             vault::AccessLog* log = nullptr);

// Offset of the blob record header inside partition 1, if present.
std::optional<std::size_t> FindBlob(const disk::DiskImage& img);

// Drops the blob record, as an adversary deleting the protection would.
bool RemoveBlob(disk::DiskImage& img);

}  // namespace vbootlab::mitigation
