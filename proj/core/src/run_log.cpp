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

#include "hagan/run_log.hpp"

#include <filesystem>

#include "hagan/errors.hpp"
#include "json.hpp"

#ifndef HAGAN_BUILD_FINGERPRINT
#define HAGAN_BUILD_FINGERPRINT "unknown"
#endif
#ifndef HAGAN_VERSION
#define HAGAN_VERSION "0.0.0"
#endif

namespace hagan {

using nlohmann::json;

std::string build_fingerprint() { return HAGAN_BUILD_FINGERPRINT; }
std::string library_version() { return HAGAN_VERSION; }

std::string step_record(const StepReport& r) {
  json j = json::object();
  j["step"] = r.step;
  j["d_low"] = r.d_low;
  j["d_high"] = r.d_high;
  j["g_low"] = r.g_low;
  j["g_high"] = r.g_high;
  j["rec_h"] = r.rec_h;
  j["rec_g"] = r.rec_g;
  if (r.cls) j["class"] = *r.cls;
  j["r"] = r.window.start;
  return j.dump();
}

RunLog::RunLog(const std::string& path, const std::string& kind, const std::string& config_echo)
    : path_(path), out_(path) {
  if (!out_) throw Error("cannot open run log " + path);
  json h;
  h["kind"] = kind;
  h["config"] = config_echo;
  h["build"] = build_fingerprint();
  h["version"] = library_version();
  out_ << h.dump() << '\n';
  out_.flush();
}

void RunLog::append(const StepReport& r) {
  out_ << step_record(r) << '\n';
  out_.flush();
}

void RunLog::append(const std::string& kind, const std::map<std::string, double>& values) {
  json j(values);
  j["kind"] = kind;
  out_ << j.dump() << '\n';
  out_.flush();
}

void write_manifest(const std::string& dir, const std::string& kind, const std::string& config_echo,
                    const std::vector<std::string>& files) {
  json m;
  m["kind"] = kind;
  m["config"] = config_echo;
  m["build"] = build_fingerprint();
  m["version"] = library_version();
  m["files"] = files;
  const auto path = (std::filesystem::path(dir) / "manifest.json").string();
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << m.dump(2) << '\n';
}

}  // namespace hagan
