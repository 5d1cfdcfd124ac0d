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

#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hagan/trainer.hpp"

namespace hagan {

// Short git revision the library was built from ("unknown" outside a checkout).
std::string build_fingerprint();
std::string library_version();

// Line-delimited JSON run log. The first record is a header carrying the
// config echo and build fingerprint; each following record is one step:
// {"step", "d_low", "d_high", "g_low", "g_high", "rec_h", "rec_g", "class"?}.
class RunLog {
 public:
  RunLog(const std::string& path, const std::string& kind, const std::string& config_echo);

  void append(const StepReport& r);
  // Free-form numeric record, e.g. SR steps or evaluation summaries.
  void append(const std::string& kind, const std::map<std::string, double>& values);

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

// One step record as a JSON line (no trailing newline).
std::string step_record(const StepReport& r);

// manifest.json in `dir`: command kind, config echo, build fingerprint and
// the files written.
void write_manifest(const std::string& dir, const std::string& kind, const std::string& config_echo,
                    const std::vector<std::string>& files);

}  // namespace hagan
