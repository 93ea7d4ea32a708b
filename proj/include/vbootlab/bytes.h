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

// Little-endian byte packing shared by the on-disk formats.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vbootlab {

using Bytes = std::vector<uint8_t>;
using ByteSpan = std::span<const uint8_t>;

class ByteWriter {
  public:
    void U8(uint8_t v) { out_.push_back(v); }
    void U16(uint16_t v);
    void U32(uint32_t v);
    void U64(uint64_t v);
    void Raw(ByteSpan data) { out_.insert(out_.end(), data.begin(), data.end()); }
    void Raw(std::string_view data) { out_.insert(out_.end(), data.begin(), data.end()); }
    // u16 length prefix followed by the bytes. Caller guarantees size <= 0xffff.
    void String16(std::string_view s);
    void Zeros(std::size_t n) { out_.insert(out_.end(), n, 0); }

    std::size_t size() const { return out_.size(); }
    Bytes& bytes() { return out_; }
    Bytes Take() { return std::move(out_); }

  private:
    Bytes out_;
};

// Thrown by ByteReader when a read runs past the end of its input.
struct ShortRead {
    std::size_t offset;
};

class ByteReader {
  public:
    explicit ByteReader(ByteSpan data, std::size_t base_offset = 0)
        : data_(data), base_(base_offset) {}

    uint8_t U8();
    uint16_t U16();
    uint32_t U32();
    uint64_t U64();
    ByteSpan Raw(std::size_t n);
    std::string String16();

    std::size_t pos() const { return pos_; }
    // Position translated into the caller's coordinate system.
    std::size_t offset() const { return base_ + pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }

  private:
    void Need(std::size_t n) const;

    ByteSpan data_;
    std::size_t base_;
    std::size_t pos_ = 0;
};

uint32_t LoadU32(ByteSpan data, std::size_t at);
uint64_t LoadU64(ByteSpan data, std::size_t at);

std::string ToHex(ByteSpan data);
// Accepts lowercase hex only; returns nullopt on any other character or odd length.
std::optional<Bytes> FromLowerHex(std::string_view hex);

bool IsValidUtf8(std::string_view s);

inline ByteSpan AsBytes(std::string_view s) {
    return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

}  // namespace vbootlab
