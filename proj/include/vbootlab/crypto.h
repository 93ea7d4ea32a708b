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

// Hashing, key derivation and authenticated encryption, backed by OpenSSL
// libcrypto. Everything the vaults and the bootloader blob need.

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "vbootlab/bytes.h"

namespace vbootlab::crypto {

constexpr std::size_t kDigestSize = 32;
constexpr std::size_t kKeySize = 32;
constexpr std::size_t kSaltSize = 16;
constexpr std::size_t kNonceSize = 12;
constexpr std::size_t kTagSize = 16;
constexpr uint32_t kDefaultKdfIters = 100000;

using Digest = std::array<uint8_t, kDigestSize>;

Digest Sha256(ByteSpan data);
std::string Sha256Hex(ByteSpan data);

enum class Cipher : uint8_t {
    Aes256Gcm = 1,
    ChaCha20Poly1305 = 2,
};

// Heap buffer that is cleansed on destruction and on Wipe().
class SecretBytes {
  public:
    SecretBytes() = default;
    explicit SecretBytes(std::size_t n) : data_(n, 0) {}
    explicit SecretBytes(Bytes data) : data_(std::move(data)) {}
    SecretBytes(SecretBytes&& other) noexcept;
    SecretBytes& operator=(SecretBytes&& other) noexcept;
    SecretBytes(const SecretBytes&) = delete;
    SecretBytes& operator=(const SecretBytes&) = delete;
    ~SecretBytes() { Wipe(); }

    void Wipe();

    uint8_t* data() { return data_.data(); }
    const uint8_t* data() const { return data_.data(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    ByteSpan span() const { return data_; }

  private:
    Bytes data_;
};

void Cleanse(std::span<uint8_t> buf);

Bytes RandomBytes(std::size_t n);

// PBKDF2-HMAC-SHA256 producing a kKeySize-byte key.
SecretBytes DeriveKey(std::string_view password, ByteSpan salt, uint32_t iterations);

// Returns ciphertext || tag.
Bytes Seal(Cipher cipher, ByteSpan key, ByteSpan nonce, ByteSpan aad, ByteSpan plaintext);
// nullopt when the tag does not verify.
std::optional<SecretBytes> Open(Cipher cipher, ByteSpan key, ByteSpan nonce, ByteSpan aad,
                                ByteSpan sealed);

// Password-sealed payload as stored on disk:
//   salt 16, kdf_iters u32, cipher_id u8, nonce 12, ciphertext_len u32, ciphertext+tag
struct SealedBox {
    std::array<uint8_t, kSaltSize> salt{};
    uint32_t kdf_iters = kDefaultKdfIters;
    Cipher cipher = Cipher::Aes256Gcm;
    std::array<uint8_t, kNonceSize> nonce{};
    Bytes ciphertext;

    void Serialize(ByteWriter& out) const;
    // Throws ShortRead on truncation and Error(CorruptVaultStore) on bad fields.
    static SealedBox Parse(ByteReader& in);

    bool operator==(const SealedBox&) const = default;
};

SealedBox SealWithPassword(std::string_view password, ByteSpan aad, ByteSpan plaintext,
                           uint32_t kdf_iters = kDefaultKdfIters,
                           Cipher cipher = Cipher::Aes256Gcm);

// Same salt, iterations and key; fresh nonce.
SealedBox Reseal(const SealedBox& previous, ByteSpan key, ByteSpan aad, ByteSpan plaintext);

std::optional<SecretBytes> OpenWithPassword(const SealedBox& box, std::string_view password,
                                            ByteSpan aad);
std::optional<SecretBytes> OpenWithKey(const SealedBox& box, ByteSpan key, ByteSpan aad);

}  // namespace vbootlab::crypto
