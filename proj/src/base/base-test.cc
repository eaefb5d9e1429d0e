// base/base-test.cc

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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "base/adaptlab-error.h"
#include "base/binary-io.h"
#include "base/rng.h"

using namespace adaptlab;

namespace {

std::vector<uint8_t> Bytes(std::string_view s) {
  return std::vector<uint8_t>(s.begin(), s.end());
}

std::string TempPath(const std::string &name) {
  return (std::filesystem::temp_directory_path() / ("adaptlab-base-" + name))
      .string();
}

}  // namespace

TEST_CASE("rng matches the standard mt19937_64 stream") {
  Rng rng(5489);
  uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.NextU64();
  CHECK(v == 9981545732273789042ULL);
}

TEST_CASE("rng is reproducible and seeds differ") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.Normal() == b.Normal());
  CHECK(Rng(42).NextU64() != Rng(43).NextU64());
}

TEST_CASE("uniform and normal moments") {
  Rng rng(7);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    const double z = rng.Normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  const double x = rng.Uniform(-2.0, 3.0);
  CHECK(x >= -2.0);
  CHECK(x < 3.0);
}

TEST_CASE("uniform int covers the range without leaving it") {
  Rng rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const uint64_t k = rng.UniformInt(7);
    REQUIRE(k < 7);
    ++hits[k];
  }
  for (int h : hits) CHECK(h > 800);
  CHECK(rng.UniformInt(1) == 0);
}

TEST_CASE("shuffle is a seeded permutation") {
  std::vector<int> a(50);
  std::iota(a.begin(), a.end(), 0);
  std::vector<int> b(a);
  Rng r1(11), r2(11);
  r1.Shuffle(std::span<int>(a));
  r2.Shuffle(std::span<int>(b));
  CHECK(a == b);
  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
  std::vector<int> ident(50);
  std::iota(ident.begin(), ident.end(), 0);
  CHECK(a != ident);
}

TEST_CASE("derived seeds and string hashes") {
  std::set<uint64_t> seen;
  for (uint64_t salt = 0; salt < 1000; ++salt) seen.insert(DeriveSeed(1, salt));
  CHECK(seen.size() == 1000);
  CHECK(DeriveSeed(1, 2) == DeriveSeed(1, 2));
  CHECK(DeriveSeed(1, 2) != DeriveSeed(2, 1));
  // FNV-1a 64-bit reference values.
  CHECK(HashString("") == 0xcbf29ce484222325ULL);
  CHECK(HashString("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("crc32 check value") {
  const auto b = Bytes("123456789");
  CHECK(Crc32(b) == 0xCBF43926u);
  CHECK(Crc32({}) == 0u);
}

TEST_CASE("byte writer and reader round trip little-endian fields") {
  ByteWriter w;
  w.PutU8(0xAB);
  w.PutU16(0x1234);
  w.PutU32(0xDEADBEEF);
  w.PutU64(0x0102030405060708ULL);
  w.PutF64(-1.5);
  const double xs[3] = {0.1, -0.0, 1e300};
  w.PutF64s(xs);
  w.PutString("speaker");
  const auto &bytes = w.bytes();
  CHECK(bytes[1] == 0x34);
  CHECK(bytes[2] == 0x12);
  CHECK(bytes[3] == 0xEF);

  ByteReader r(bytes);
  CHECK(r.GetU8() == 0xAB);
  CHECK(r.GetU16() == 0x1234);
  CHECK(r.GetU32() == 0xDEADBEEF);
  CHECK(r.GetU64() == 0x0102030405060708ULL);
  CHECK(r.GetF64() == -1.5);
  double ys[3];
  r.GetF64s(ys);
  CHECK(std::memcmp(xs, ys, sizeof(xs)) == 0);
  CHECK(r.GetString() == "speaker");
  CHECK(r.AtEnd());
  CHECK_THROWS_AS(r.GetU8(), TruncatedError);
}

TEST_CASE("container frame layout") {
  const auto payload = Bytes("hello");
  const auto file = WrapContainer(RecordType::kDataset, payload);
  REQUIRE(file.size() == 16 + 5 + 4);
  CHECK(std::string(file.begin(), file.begin() + 4) == "ADLB");
  CHECK(file[4] == 1);
  CHECK(file[5] == 0);
  CHECK(file[6] == 3);
  CHECK(file[8] == 5);
  const uint32_t crc = Crc32(payload);
  CHECK(file[21] == (crc & 0xFF));
  CHECK(UnwrapContainer(file, RecordType::kDataset) == payload);
}

TEST_CASE("container errors") {
  const auto payload = Bytes("some payload bytes");
  const auto good = WrapContainer(RecordType::kNetwork, payload);

  SUBCASE("corrupt payload byte") {
    auto bad = good;
    bad[20] ^= 0x01;
    CHECK_THROWS_AS(UnwrapContainer(bad, RecordType::kNetwork), ChecksumError);
  }
  SUBCASE("unknown version") {
    auto bad = good;
    bad[4] = 2;
    CHECK_THROWS_AS(UnwrapContainer(bad, RecordType::kNetwork), VersionError);
  }
  SUBCASE("bad magic") {
    auto bad = good;
    bad[0] = 'X';
    CHECK_THROWS_AS(UnwrapContainer(bad, RecordType::kNetwork), FormatError);
  }
  SUBCASE("wrong record type") {
    CHECK_THROWS_AS(UnwrapContainer(good, RecordType::kDataset), FormatError);
  }
  SUBCASE("truncated") {
    for (size_t n : {size_t{0}, size_t{10}, good.size() - 1}) {
      std::vector<uint8_t> bad(good.begin(), good.begin() + n);
      CHECK_THROWS_AS(UnwrapContainer(bad, RecordType::kNetwork), TruncatedError);
    }
  }
  SUBCASE("trailing bytes") {
    auto bad = good;
    bad.push_back(0);
    CHECK_THROWS_AS(UnwrapContainer(bad, RecordType::kNetwork), FormatError);
  }
}

TEST_CASE("container file round trip and error context") {
  const std::string path = TempPath("container.adlb");
  const auto payload = Bytes("payload");
  WriteContainer(path, RecordType::kSpeakerArtifact, payload);
  CHECK(ReadContainer(path, RecordType::kSpeakerArtifact) == payload);

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(17);
    f.put('!');
  }
  try {
    ReadContainer(path, RecordType::kSpeakerArtifact);
    FAIL("expected a checksum error");
  } catch (const ChecksumError &e) {
    CHECK(std::string(e.what()).find(path) != std::string::npos);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(ReadContainer(path, RecordType::kSpeakerArtifact), IoError);
}
