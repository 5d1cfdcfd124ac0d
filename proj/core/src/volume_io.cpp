// Copyright 2026 The hagan3d Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "hagan/errors.hpp"
#include "hagan/volume.hpp"

namespace hagan {
namespace {

constexpr char kMagic[4] = {'H', 'A', 'G', 'V'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 1;
constexpr std::size_t kHeader = 4 + 2 + 12 + 1;

static_assert(std::endian::native == std::endian::little, "volume I/O assumes a little-endian host");

template <typename U>
void put(std::vector<std::uint8_t>& out, U v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(U));
}

template <typename U>
U get(const std::vector<std::uint8_t>& in, std::size_t off) {
  U v;
  std::memcpy(&v, in.data() + off, sizeof(U));
  return v;
}

}  // namespace

Volume Volume::filled(std::int64_t d, std::int64_t h, std::int64_t w, float value) {
  if (d <= 0 || h <= 0 || w <= 0) throw ShapeError("volume extents must be positive");
  Volume v;
  v.d = d;
  v.h = h;
  v.w = w;
  v.data.assign(static_cast<std::size_t>(d * h * w), value);
  return v;
}

template <typename T>
Tensor<T> to_batch(const std::vector<const Volume*>& volumes, MemTag tag) {
  if (volumes.empty()) throw ShapeError("empty volume batch");
  const auto& f = *volumes.front();
  auto t = Tensor<T>::zeros({static_cast<std::int64_t>(volumes.size()), 1, f.d, f.h, f.w}, tag);
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    if (!volumes[i]->same_extents(f)) throw ShapeError("volume batch with mixed extents");
    std::transform(volumes[i]->data.begin(), volumes[i]->data.end(), t.data() + i * f.size(),
                   [](float v) { return static_cast<T>(v); });
  }
  return t;
}

template <typename T>
Volume from_batch(const Tensor<T>& batch, std::int64_t n) {
  if (batch.ndim() != 5 || batch.dim(1) != 1) throw ShapeError("expected [N,1,D,H,W], got " + shape_str(batch.shape()));
  if (n < 0 || n >= batch.dim(0)) throw ShapeError("batch index out of range");
  auto v = Volume::filled(batch.dim(2), batch.dim(3), batch.dim(4));
  const T* src = batch.data() + n * v.size();
  std::transform(src, src + v.size(), v.data.begin(), [](T x) { return static_cast<float>(x); });
  return v;
}

std::vector<std::uint8_t> encode_volume(const Volume& v) {
  if (static_cast<std::int64_t>(v.data.size()) != v.size() || v.size() <= 0) {
    throw FormatError("volume extents do not match payload length");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeader + v.data.size() * 4 + 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  put<std::uint16_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(v.d));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(v.h));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(v.w));
  put<std::uint8_t>(out, kDtypeF32);
  const auto* p = reinterpret_cast<const std::uint8_t*>(v.data.data());
  out.insert(out.end(), p, p + v.data.size() * sizeof(float));
  const auto crc = static_cast<std::uint32_t>(crc32(0L, out.data(), static_cast<uInt>(out.size())));
  put<std::uint32_t>(out, crc);
  return out;
}

Volume decode_volume(const std::vector<std::uint8_t>& in) {
  if (in.size() < kHeader + 4) throw FormatError("volume file truncated");
  if (std::memcmp(in.data(), kMagic, 4) != 0) throw FormatError("bad volume magic");
  const auto crc_stored = get<std::uint32_t>(in, in.size() - 4);
  const auto crc = static_cast<std::uint32_t>(crc32(0L, in.data(), static_cast<uInt>(in.size() - 4)));
  if (crc != crc_stored) throw FormatError("volume checksum mismatch");
  const auto version = get<std::uint16_t>(in, 4);
  if (version != kVersion) throw FormatError("unknown volume format version " + std::to_string(version));
  if (in[18] != kDtypeF32) throw FormatError("unsupported volume dtype tag");
  Volume v;
  v.d = get<std::uint32_t>(in, 6);
  v.h = get<std::uint32_t>(in, 10);
  v.w = get<std::uint32_t>(in, 14);
  const auto payload = in.size() - kHeader - 4;
  if (v.d <= 0 || v.h <= 0 || v.w <= 0 || payload != static_cast<std::size_t>(v.size()) * sizeof(float)) {
    throw FormatError("volume extents do not match payload length");
  }
  v.data.resize(static_cast<std::size_t>(v.size()));
  std::memcpy(v.data.data(), in.data() + kHeader, payload);
  return v;
}

void write_volume(const std::string& path, const Volume& v) {
  const auto bytes = encode_volume(v);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("write failed: " + path);
}

Volume read_volume(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_volume(bytes);
}

std::vector<std::string> list_volumes(const std::string& dir) {
  std::vector<std::string> out;
  if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir);
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".hagv") out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

template Tensor<float> to_batch<float>(const std::vector<const Volume*>&, MemTag);
template Tensor<double> to_batch<double>(const std::vector<const Volume*>&, MemTag);
template Volume from_batch<float>(const Tensor<float>&, std::int64_t);
template Volume from_batch<double>(const Tensor<double>&, std::int64_t);

}  // namespace hagan
