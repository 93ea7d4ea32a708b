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

#include "vbootlab/error.h"

#include <sstream>

namespace vbootlab {

const char* ErrcName(Errc code) {
    switch (code) {
        case Errc::DuplicateIndex: return "DuplicateIndex";
        case Errc::MissingIndex: return "MissingIndex";
        case Errc::Overflow: return "Overflow";
        case Errc::BadIndex: return "BadIndex";
        case Errc::BadLabel: return "BadLabel";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::SizeMismatch: return "SizeMismatch";
        case Errc::BadMagic: return "BadMagic";
        case Errc::BadSectorSize: return "BadSectorSize";
        case Errc::BadPartitionCount: return "BadPartitionCount";
        case Errc::BadPartitionEntry: return "BadPartitionEntry";
        case Errc::BadPadding: return "BadPadding";
        case Errc::Truncated: return "Truncated";
        case Errc::TrailingData: return "TrailingData";
        case Errc::IoError: return "IoError";
        case Errc::ImageLocked: return "ImageLocked";
        case Errc::BadVersion: return "BadVersion";
        case Errc::BadSuperblock: return "BadSuperblock";
        case Errc::CorruptRecord: return "CorruptRecord";
        case Errc::BadControlByte: return "BadControlByte";
        case Errc::TooLarge: return "TooLarge";
        case Errc::DuplicateUser: return "DuplicateUser";
        case Errc::DuplicatePath: return "DuplicatePath";
        case Errc::InvalidRecord: return "InvalidRecord";
        case Errc::MountBlocked: return "MountBlocked";
        case Errc::AlreadyMounted: return "AlreadyMounted";
        case Errc::NotWritable: return "NotWritable";
        case Errc::BadHeader: return "BadHeader";
        case Errc::UnknownKey: return "UnknownKey";
        case Errc::MissingKey: return "MissingKey";
        case Errc::BadHash: return "BadHash";
        case Errc::InvalidCmdline: return "InvalidCmdline";
        case Errc::EmptyPassword: return "EmptyPassword";
        case Errc::NoSuchVault: return "NoSuchVault";
        case Errc::AuthFailure: return "AuthFailure";
        case Errc::BootRequired: return "BootRequired";
        case Errc::UseAfterLogout: return "UseAfterLogout";
        case Errc::SessionActive: return "SessionActive";
        case Errc::CorruptVaultStore: return "CorruptVaultStore";
        case Errc::InconsistentAttackerImage: return "InconsistentAttackerImage";
        case Errc::AlreadyPatched: return "AlreadyPatched";
        case Errc::BadReplacement: return "BadReplacement";
        case Errc::BlobExists: return "BlobExists";
        case Errc::CryptoFailure: return "CryptoFailure";
    }
    return "Unknown";
}

namespace {

std::string WithOffset(const std::string& what, std::size_t offset) {
    std::ostringstream out;
    out << what << " (offset 0x" << std::hex << offset << ")";
    return out.str();
}

}  // namespace

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(ErrcName(code)) + ": " + what), code_(code) {}

Error::Error(Errc code, const std::string& what, std::size_t offset)
    : std::runtime_error(std::string(ErrcName(code)) + ": " + WithOffset(what, offset)),
      code_(code),
      offset_(offset) {}

}  // namespace vbootlab
