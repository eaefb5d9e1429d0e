// base/binary-io.h

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

#ifndef ADAPTLAB_BASE_BINARY_IO_H_
#define ADAPTLAB_BASE_BINARY_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adaptlab {

// Every binary file written by adaptlab shares one frame:
//
//   offset  size  field
//   0       4     magic "ADLB"
//   4       2     format version, u16 LE (kContainerVersion)
//   6       2     record type, u16 LE (RecordType)
//   8       8     payload length n, u64 LE
//   16      n     payload
//   16+n    4     CRC-32 (IEEE 802.3, zlib polynomial) of the payload, u32 LE
//
// All multi-byte integers are little-endian; reals are IEEE-754 binary64
// written little-endian.

inline constexpr char kContainerMagic[4] = {'A', 'D', 'L', 'B'};
inline constexpr uint16_t kContainerVersion = 1;

enum class RecordType : uint16_t {
  kNetwork = 1,
  kSpeakerArtifact = 2,
  kDataset = 3,
};

uint32_t Crc32(std::span<const uint8_t> bytes);

class ByteWriter {
 public:
  void PutU8(uint8_t v) { bytes_.push_back(v); }
  void PutU16(uint16_t v);
  void PutU32(uint32_t v);
  void PutU64(uint64_t v);
  void PutF64(double v);
  void PutF64s(std::span<const double> v);
  void PutString(std::string_view s);  // u32 length, then bytes

  const std::vector<uint8_t> &bytes() const { return bytes_; }

 private:
  std::vector<uint8_t> bytes_;
};

/// Bounds-checked cursor; reading past the end throws TruncatedError.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  uint8_t GetU8();
  uint16_t GetU16();
  uint32_t GetU32();
  uint64_t GetU64();
  double GetF64();
  void GetF64s(std::span<double> out);
  std::string GetString();

  bool AtEnd() const { return pos_ == bytes_.size(); }
  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const uint8_t> Take(size_t n);

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

/// Wraps a payload in the container frame and writes it to `path`.
void WriteContainer(const std::string &path, RecordType type,
                    std::span<const uint8_t> payload);

/// Reads and validates a container. Throws FormatError (bad magic or record
/// type), VersionError, TruncatedError or ChecksumError.
std::vector<uint8_t> ReadContainer(const std::string &path, RecordType type);

/// Same validation over an in-memory image of a container file.
std::vector<uint8_t> UnwrapContainer(std::span<const uint8_t> file_bytes,
                                     RecordType type);
std::vector<uint8_t> WrapContainer(RecordType type,
                                   std::span<const uint8_t> payload);

}  // namespace adaptlab

#endif  // ADAPTLAB_BASE_BINARY_IO_H_
