// base/binary-io.cc

// Copyright 2026  adaptlab authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "base/binary-io.h"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "base/adaptlab-error.h"

namespace adaptlab {

namespace {

constexpr size_t kHeaderSize = 16;
constexpr size_t kTrailerSize = 4;

uint64_t LoadLe(std::span<const uint8_t> b) {
  uint64_t v = 0;
  for (size_t i = 0; i < b.size(); ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

void StoreLe(std::vector<uint8_t> *out, uint64_t v, int n) {
  for (int i = 0; i < n; ++i) out->push_back(static_cast<uint8_t>(v >> (8 * i)));
}

}  // namespace

uint32_t Crc32(std::span<const uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  const uint8_t *p = bytes.data();
  size_t left = bytes.size();
  while (left > 0) {
    const uInt chunk = static_cast<uInt>(std::min<size_t>(left, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    left -= chunk;
  }
  return static_cast<uint32_t>(crc);
}

void ByteWriter::PutU16(uint16_t v) { StoreLe(&bytes_, v, 2); }
void ByteWriter::PutU32(uint32_t v) { StoreLe(&bytes_, v, 4); }
void ByteWriter::PutU64(uint64_t v) { StoreLe(&bytes_, v, 8); }
void ByteWriter::PutF64(double v) { PutU64(std::bit_cast<uint64_t>(v)); }

void ByteWriter::PutF64s(std::span<const double> v) {
  bytes_.reserve(bytes_.size() + 8 * v.size());
  for (double x : v) PutF64(x);
}

void ByteWriter::PutString(std::string_view s) {
  PutU32(static_cast<uint32_t>(s.size()));
  bytes_.insert(bytes_.end(), s.begin(), s.end());
}

std::span<const uint8_t> ByteReader::Take(size_t n) {
  if (n > remaining())
    throw TruncatedError("unexpected end of payload: wanted " +
                         std::to_string(n) + " bytes, " +
                         std::to_string(remaining()) + " left");
  auto s = bytes_.subspan(pos_, n);
  pos_ += n;
  return s;
}

uint8_t ByteReader::GetU8() { return Take(1)[0]; }
uint16_t ByteReader::GetU16() { return static_cast<uint16_t>(LoadLe(Take(2))); }
uint32_t ByteReader::GetU32() { return static_cast<uint32_t>(LoadLe(Take(4))); }
uint64_t ByteReader::GetU64() { return LoadLe(Take(8)); }
double ByteReader::GetF64() { return std::bit_cast<double>(GetU64()); }

void ByteReader::GetF64s(std::span<double> out) {
  if (8 * out.size() > remaining())
    throw TruncatedError("unexpected end of payload in real array");
  for (double &x : out) x = GetF64();
}

std::string ByteReader::GetString() {
  const uint32_t n = GetU32();
  auto s = Take(n);
  return std::string(s.begin(), s.end());
}

std::vector<uint8_t> WrapContainer(RecordType type,
                                   std::span<const uint8_t> payload) {
  std::vector<uint8_t> out;
  out.reserve(kHeaderSize + payload.size() + kTrailerSize);
  out.insert(out.end(), std::begin(kContainerMagic), std::end(kContainerMagic));
  StoreLe(&out, kContainerVersion, 2);
  StoreLe(&out, static_cast<uint16_t>(type), 2);
  StoreLe(&out, payload.size(), 8);
  out.insert(out.end(), payload.begin(), payload.end());
  StoreLe(&out, Crc32(payload), 4);
  return out;
}

std::vector<uint8_t> UnwrapContainer(std::span<const uint8_t> file,
                                     RecordType type) {
  if (file.size() < kHeaderSize)
    throw TruncatedError("file shorter than container header");
  if (std::memcmp(file.data(), kContainerMagic, 4) != 0)
    throw FormatError("bad magic (not an ADLB container)");
  const auto version = static_cast<uint16_t>(LoadLe(file.subspan(4, 2)));
  if (version != kContainerVersion)
    throw VersionError("unsupported container version " +
                       std::to_string(version) + " (expected " +
                       std::to_string(kContainerVersion) + ")");
  const auto got_type = static_cast<uint16_t>(LoadLe(file.subspan(6, 2)));
  if (got_type != static_cast<uint16_t>(type))
    throw FormatError("record type " + std::to_string(got_type) +
                      ", expected " +
                      std::to_string(static_cast<uint16_t>(type)));
  const uint64_t n = LoadLe(file.subspan(8, 8));
  if (n > file.size() - kHeaderSize ||
      file.size() - kHeaderSize - n < kTrailerSize)
    throw TruncatedError("payload truncated: header announces " +
                         std::to_string(n) + " bytes");
  if (file.size() != kHeaderSize + n + kTrailerSize)
    throw FormatError("trailing bytes after container");
  auto payload = file.subspan(kHeaderSize, n);
  const auto stored = static_cast<uint32_t>(LoadLe(file.subspan(kHeaderSize + n, 4)));
  if (Crc32(payload) != stored) throw ChecksumError("payload CRC-32 mismatch");
  return {payload.begin(), payload.end()};
}

void WriteContainer(const std::string &path, RecordType type,
                    std::span<const uint8_t> payload) {
  const auto image = WrapContainer(type, payload);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(reinterpret_cast<const char *>(image.data()),
           static_cast<std::streamsize>(image.size()));
  if (!os) throw IoError("write failed: " + path);
}

std::vector<uint8_t> ReadContainer(const std::string &path, RecordType type) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);
  std::vector<uint8_t> image((std::istreambuf_iterator<char>(is)),
                             std::istreambuf_iterator<char>());
  try {
    return UnwrapContainer(image, type);
  } catch (const FormatError &e) {
    // Re-throw the same dynamic type with path context.
    const std::string msg = path + ": " + e.what();
    if (dynamic_cast<const ChecksumError *>(&e)) throw ChecksumError(msg);
    if (dynamic_cast<const VersionError *>(&e)) throw VersionError(msg);
    if (dynamic_cast<const TruncatedError *>(&e)) throw TruncatedError(msg);
    throw FormatError(msg);
  }
}

}  // namespace adaptlab
