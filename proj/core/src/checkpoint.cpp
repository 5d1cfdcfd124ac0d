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

#include "hagan/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "hagan/errors.hpp"

namespace hagan {
namespace {

constexpr char kMagic[4] = {'H', 'A', 'G', 'C'};
constexpr std::uint16_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  template <typename U>
  void put(U v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes.insert(bytes.end(), p, p + sizeof(U));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes.insert(bytes.end(), s.begin(), s.end());
  }
  template <typename T>
  void put_payload(const Tensor<T>& t) {
    for (auto v : t.values()) put<float>(static_cast<float>(v));
  }

  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {
    if (in.size() < 10) throw FormatError("checkpoint truncated");
    if (std::memcmp(in.data(), kMagic, 4) != 0) throw FormatError("bad checkpoint magic");
    std::uint32_t stored;
    std::memcpy(&stored, in.data() + in.size() - 4, 4);
    const auto crc = static_cast<std::uint32_t>(crc32(0L, in.data(), static_cast<uInt>(in.size() - 4)));
    if (crc != stored) throw FormatError("checkpoint checksum mismatch");
    end_ = in.size() - 4;
    pos_ = 4;
    const auto version = get<std::uint16_t>();
    if (version != kVersion) throw FormatError("unknown checkpoint version " + std::to_string(version));
  }

  template <typename U>
  U get() {
    need(sizeof(U));
    U v;
    std::memcpy(&v, in_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  // Reads `n` floats into `out` (or skips them when out is null).
  template <typename T>
  void get_payload(std::int64_t n, T* out) {
    need(static_cast<std::size_t>(n) * 4);
    for (std::int64_t i = 0; i < n; ++i) {
      float v;
      std::memcpy(&v, in_.data() + pos_ + 4 * static_cast<std::size_t>(i), 4);
      if (out) out[i] = static_cast<T>(v);
    }
    pos_ += static_cast<std::size_t>(n) * 4;
  }
  bool done() const { return pos_ == end_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw FormatError("checkpoint truncated");
  }

  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0, end_ = 0;
};

std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

CheckpointMeta read_meta(Reader& r) {
  CheckpointMeta m;
  m.config = r.get_string();
  m.step = r.get<std::int64_t>();
  m.rng_state = r.get_string();
  const auto k = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < k; ++i) m.class_prior.push_back(r.get<double>());
  return m;
}

}  // namespace

template <typename T>
void save_checkpoint(const std::string& path, const ParamStore<T>& store, const CheckpointMeta& meta) {
  Writer w;
  w.bytes.insert(w.bytes.end(), kMagic, kMagic + 4);
  w.put<std::uint16_t>(kVersion);
  w.put_string(meta.config);
  w.put<std::int64_t>(meta.step);
  w.put_string(meta.rng_state);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(meta.class_prior.size()));
  for (double p : meta.class_prior) w.put<double>(p);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(store.entries().size()));
  for (const auto& [name, e] : store.entries()) {
    w.put_string(name);
    w.put<std::uint8_t>(e.trainable ? 1 : 0);
    const auto& shape = e.value.shape();
    w.put<std::uint8_t>(static_cast<std::uint8_t>(shape.size()));
    for (auto s : shape) w.put<std::int64_t>(s);
    w.put_payload(e.value);
    if (e.trainable) {
      w.put<std::int64_t>(e.step);
      w.put_payload(e.m);
      w.put_payload(e.v);
    }
  }
  const auto crc = static_cast<std::uint32_t>(crc32(0L, w.bytes.data(), static_cast<uInt>(w.bytes.size())));
  w.put<std::uint32_t>(crc);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(w.bytes.data()), static_cast<std::streamsize>(w.bytes.size()));
  if (!f) throw Error("write failed: " + path);
}

template <typename T>
CheckpointMeta load_checkpoint(const std::string& path, ParamStore<T>& store) {
  const auto bytes = slurp(path);
  Reader r(bytes);
  auto meta = read_meta(r);
  const auto count = r.get<std::uint32_t>();
  std::set<std::string> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name = r.get_string();
    const bool trainable = r.get<std::uint8_t>() != 0;
    Shape shape(r.get<std::uint8_t>());
    for (auto& s : shape) s = r.get<std::int64_t>();
    if (!store.contains(name)) throw ShapeError("checkpoint tensor '" + name + "' has no counterpart in the model");
    auto& e = store.entry(name);
    if (e.value.shape() != shape) {
      throw ShapeError("checkpoint tensor '" + name + "' is " + shape_str(shape) + ", model expects " +
                       shape_str(e.value.shape()));
    }
    if (e.trainable != trainable) throw ShapeError("checkpoint tensor '" + name + "' differs in trainability");
    const auto n = shape_numel(shape);
    r.get_payload(n, e.value.data());
    if (trainable) {
      e.step = r.get<std::int64_t>();
      r.get_payload(n, e.m.data());
      r.get_payload(n, e.v.data());
    }
    seen.insert(name);
  }
  if (!r.done()) throw FormatError("trailing bytes in checkpoint");
  for (const auto& [name, e] : store.entries()) {
    if (!seen.count(name)) throw ShapeError("checkpoint lacks model tensor '" + name + "'");
  }
  return meta;
}

CheckpointMeta read_checkpoint_meta(const std::string& path) {
  const auto bytes = slurp(path);
  Reader r(bytes);
  return read_meta(r);
}

template void save_checkpoint<float>(const std::string&, const ParamStore<float>&, const CheckpointMeta&);
template void save_checkpoint<double>(const std::string&, const ParamStore<double>&, const CheckpointMeta&);
template CheckpointMeta load_checkpoint<float>(const std::string&, ParamStore<float>&);
template CheckpointMeta load_checkpoint<double>(const std::string&, ParamStore<double>&);

}  // namespace hagan
