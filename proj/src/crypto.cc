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

#include "vbootlab/crypto.h"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <algorithm>
#include <memory>

#include "vbootlab/error.h"

namespace vbootlab::crypto {

namespace {

struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

const EVP_CIPHER* CipherFor(Cipher cipher) {
    switch (cipher) {
        case Cipher::Aes256Gcm: return EVP_aes_256_gcm();
        case Cipher::ChaCha20Poly1305: return EVP_chacha20_poly1305();
    }
    throw Error(Errc::CryptoFailure, "unknown cipher id");
}

void Check(int ok, const char* what) {
    if (ok != 1) throw Error(Errc::CryptoFailure, what);
}

CipherCtx InitCtx(Cipher cipher, ByteSpan key, ByteSpan nonce, bool encrypt) {
    if (key.size() != kKeySize || nonce.size() != kNonceSize) {
        throw Error(Errc::CryptoFailure, "bad key or nonce length");
    }
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) throw Error(Errc::CryptoFailure, "EVP_CIPHER_CTX_new");
    Check(EVP_CipherInit_ex(ctx.get(), CipherFor(cipher), nullptr, nullptr, nullptr, encrypt),
          "cipher init");
    Check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_IVLEN, kNonceSize, nullptr),
          "set iv length");
    Check(EVP_CipherInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data(), encrypt),
          "cipher key");
    return ctx;
}

}  // namespace

Digest Sha256(ByteSpan data) {
    Digest out{};
    unsigned int len = 0;
    Check(EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr),
          "sha256");
    return out;
}

std::string Sha256Hex(ByteSpan data) {
    return ToHex(Sha256(data));
}

SecretBytes::SecretBytes(SecretBytes&& other) noexcept : data_(std::move(other.data_)) {
    other.data_.clear();
}

SecretBytes& SecretBytes::operator=(SecretBytes&& other) noexcept {
    if (this != &other) {
        Wipe();
        data_ = std::move(other.data_);
        other.data_.clear();
    }
    return *this;
}

void SecretBytes::Wipe() {
    Cleanse(data_);
    data_.clear();
}

void Cleanse(std::span<uint8_t> buf) {
    if (!buf.empty()) OPENSSL_cleanse(buf.data(), buf.size());
}

Bytes RandomBytes(std::size_t n) {
    Bytes out(n);
    if (n > 0) Check(RAND_bytes(out.data(), static_cast<int>(n)), "RAND_bytes");
    return out;
}

SecretBytes DeriveKey(std::string_view password, ByteSpan salt, uint32_t iterations) {
    if (iterations == 0) throw Error(Errc::CryptoFailure, "kdf iterations must be >= 1");
    SecretBytes key(kKeySize);
    Check(PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()), salt.data(),
                            static_cast<int>(salt.size()), static_cast<int>(iterations),
                            EVP_sha256(), static_cast<int>(kKeySize), key.data()),
          "pbkdf2");
    return key;
}

Bytes Seal(Cipher cipher, ByteSpan key, ByteSpan nonce, ByteSpan aad, ByteSpan plaintext) {
    CipherCtx ctx = InitCtx(cipher, key, nonce, true);
    int len = 0;
    if (!aad.empty()) {
        Check(EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())),
              "aad");
    }
    Bytes out(plaintext.size() + kTagSize);
    int written = 0;
    if (!plaintext.empty()) {
        Check(EVP_EncryptUpdate(ctx.get(), out.data(), &written, plaintext.data(),
                                static_cast<int>(plaintext.size())),
              "encrypt");
    }
    Check(EVP_EncryptFinal_ex(ctx.get(), out.data() + written, &len), "encrypt final");
    Check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_GET_TAG, kTagSize,
                              out.data() + plaintext.size()),
          "get tag");
    return out;
}

std::optional<SecretBytes> Open(Cipher cipher, ByteSpan key, ByteSpan nonce, ByteSpan aad,
                                ByteSpan sealed) {
    if (sealed.size() < kTagSize) return std::nullopt;
    std::size_t body = sealed.size() - kTagSize;
    CipherCtx ctx = InitCtx(cipher, key, nonce, false);
    int len = 0;
    if (!aad.empty()) {
        Check(EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())),
              "aad");
    }
    SecretBytes out(body);
    int written = 0;
    if (body > 0) {
        Check(EVP_DecryptUpdate(ctx.get(), out.data(), &written, sealed.data(),
                                static_cast<int>(body)),
              "decrypt");
    }
    Bytes tag(sealed.begin() + body, sealed.end());
    Check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_TAG, kTagSize, tag.data()), "set tag");
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + written, &len) != 1) {
        return std::nullopt;  // out is cleansed by its destructor
    }
    return out;
}

void SealedBox::Serialize(ByteWriter& out) const {
    out.Raw(salt);
    out.U32(kdf_iters);
    out.U8(static_cast<uint8_t>(cipher));
    out.Raw(nonce);
    out.U32(static_cast<uint32_t>(ciphertext.size()));
    out.Raw(ciphertext);
}

SealedBox SealedBox::Parse(ByteReader& in) {
    SealedBox box;
    ByteSpan salt = in.Raw(kSaltSize);
    std::copy(salt.begin(), salt.end(), box.salt.begin());
    std::size_t iters_at = in.offset();
    box.kdf_iters = in.U32();
    if (box.kdf_iters == 0) {
        throw Error(Errc::CorruptVaultStore, "kdf_iters is zero", iters_at);
    }
    std::size_t cipher_at = in.offset();
    uint8_t cipher_id = in.U8();
    if (cipher_id != static_cast<uint8_t>(Cipher::Aes256Gcm) &&
        cipher_id != static_cast<uint8_t>(Cipher::ChaCha20Poly1305)) {
        throw Error(Errc::CorruptVaultStore, "unknown cipher id", cipher_at);
    }
    box.cipher = static_cast<Cipher>(cipher_id);
    ByteSpan nonce = in.Raw(kNonceSize);
    std::copy(nonce.begin(), nonce.end(), box.nonce.begin());
    std::size_t len_at = in.offset();
    uint32_t len = in.U32();
    if (len < kTagSize) throw Error(Errc::CorruptVaultStore, "ciphertext shorter than tag", len_at);
    ByteSpan ct = in.Raw(len);
    box.ciphertext.assign(ct.begin(), ct.end());
    return box;
}

SealedBox SealWithPassword(std::string_view password, ByteSpan aad, ByteSpan plaintext,
                           uint32_t kdf_iters, Cipher cipher) {
    SealedBox box;
    Bytes salt = RandomBytes(kSaltSize);
    std::copy(salt.begin(), salt.end(), box.salt.begin());
    box.kdf_iters = kdf_iters;
    box.cipher = cipher;
    SecretBytes key = DeriveKey(password, box.salt, kdf_iters);
    return Reseal(box, key.span(), aad, plaintext);
}

SealedBox Reseal(const SealedBox& previous, ByteSpan key, ByteSpan aad, ByteSpan plaintext) {
    SealedBox box = previous;
    Bytes nonce = RandomBytes(kNonceSize);
    std::copy(nonce.begin(), nonce.end(), box.nonce.begin());
    box.ciphertext = Seal(box.cipher, key, box.nonce, aad, plaintext);
    return box;
}

std::optional<SecretBytes> OpenWithPassword(const SealedBox& box, std::string_view password,
                                            ByteSpan aad) {
    SecretBytes key = DeriveKey(password, box.salt, box.kdf_iters);
    return OpenWithKey(box, key.span(), aad);
}

std::optional<SecretBytes> OpenWithKey(const SealedBox& box, ByteSpan key, ByteSpan aad) {
    return Open(box.cipher, key, box.nonce, aad, box.ciphertext);
}

}  // namespace vbootlab::crypto
