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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace vbootlab {

enum class Errc {
    // disk image
    DuplicateIndex,
    MissingIndex,
    Overflow,
    BadIndex,
    BadLabel,
    LengthMismatch,
    SizeMismatch,
    BadMagic,
    BadSectorSize,
    BadPartitionCount,
    BadPartitionEntry,
    BadPadding,
    Truncated,
    TrailingData,
    IoError,
    ImageLocked,
    // rootfs
    BadVersion,
    BadSuperblock,
    CorruptRecord,
    BadControlByte,
    TooLarge,
    DuplicateUser,
    DuplicatePath,
    InvalidRecord,
    MountBlocked,
    AlreadyMounted,
    NotWritable,
    // boot config
    BadHeader,
    UnknownKey,
    MissingKey,
    BadHash,
    InvalidCmdline,
    // vaults
    EmptyPassword,
    NoSuchVault,
    AuthFailure,
    BootRequired,
    UseAfterLogout,
    SessionActive,
    CorruptVaultStore,
    // attacks
    InconsistentAttackerImage,
    AlreadyPatched,
    BadReplacement,
    // mitigation
    BlobExists,
    CryptoFailure,
};

// Stable identifier, e.g. "MountBlocked". The CLI prints these verbatim.
const char* ErrcName(Errc code);

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what);
    Error(Errc code, const std::string& what, std::size_t offset);

    Errc code() const { return code_; }
    const char* name() const { return ErrcName(code_); }
    // Byte offset of the first offending byte, for parse diagnostics.
    std::optional<std::size_t> offset() const { return offset_; }

  private:
    Errc code_;
    std::optional<std::size_t> offset_;
};

}  // namespace vbootlab
