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

#include "hagan/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "hagan/errors.hpp"

namespace hagan {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename I>
I parse_int(const std::string& key, const std::string& s) {
  I v{};
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError(key + ": expected an integer, got '" + s + "'");
  return v;
}

double parse_double(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

struct Field {
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

template <typename I>
Field int_field(const std::string& key, I& ref) {
  return {[&ref] { return std::to_string(ref); }, [&ref, key](const std::string& s) { ref = parse_int<I>(key, s); }};
}
Field double_field(const std::string& key, double& ref) {
  return {[&ref] { return fmt_double(ref); }, [&ref, key](const std::string& s) { ref = parse_double(key, s); }};
}
Field bool_field(const std::string& key, bool& ref) {
  return {[&ref] { return std::string(ref ? "true" : "false"); },
          [&ref, key](const std::string& s) { ref = parse_bool(key, s); }};
}
Field ratio_field(Ratio& ref) {
  return {[&ref] { return std::to_string(ref.num) + "/" + std::to_string(ref.den); },
          [&ref](const std::string& s) { ref = parse_ratio(s); }};
}

std::map<std::string, Field> fields(RunConfig& c) {
  auto& t = c.train;
  auto& n = t.net;
  auto& s = c.sr;
  std::map<std::string, Field> f;
  f["full_resolution"] = int_field("full_resolution", n.full_resolution);
  f["low_resolution"] = int_field("low_resolution", n.low_resolution);
  f["latent_dim"] = int_field("latent_dim", n.latent_dim);
  f["base_channels"] = int_field("base_channels", n.base_channels);
  f["feature_channels"] = int_field("feature_channels", n.feature_channels);
  f["subvol_multiplier"] = ratio_field(n.subvol_multiplier);
  f["num_classes"] = int_field("num_classes", n.num_classes);
  f["lambda1"] = double_field("lambda1", t.weights.lambda1);
  f["lambda2"] = double_field("lambda2", t.weights.lambda2);
  f["lr_g"] = double_field("lr_g", t.lr_g);
  f["lr_d"] = double_field("lr_d", t.lr_d);
  f["lr_e"] = double_field("lr_e", t.lr_e);
  f["beta1"] = double_field("beta1", t.beta1);
  f["beta2"] = double_field("beta2", t.beta2);
  f["adam_eps"] = double_field("adam_eps", t.adam_eps);
  f["batch"] = int_field("batch", t.batch);
  f["steps"] = int_field("steps", t.steps);
  f["seed"] = int_field("seed", t.seed);
  f["saturating"] = bool_field("saturating", t.saturating);
  f["class_weight"] = double_field("class_weight", t.class_weight);
  f["max_grad_norm"] = double_field("max_grad_norm", t.max_grad_norm);
  f["deterministic_r"] = int_field("deterministic_r", t.deterministic_r);
  f["low_branch"] = bool_field("low_branch", t.low_branch);
  f["encoder"] = bool_field("encoder", t.encoder);
  f["sr.hr_resolution"] = int_field("sr.hr_resolution", s.hr_resolution);
  f["sr.factor"] = int_field("sr.factor", s.sr_factor);
  f["sr.noise_sigma"] = double_field("sr.noise_sigma", s.noise_sigma);
  f["sr.subvol_multiplier"] = ratio_field(s.subvol_multiplier);
  f["sr.lambda"] = double_field("sr.lambda", s.lambda);
  f["sr.lr_g"] = double_field("sr.lr_g", s.lr_g);
  f["sr.lr_d"] = double_field("sr.lr_d", s.lr_d);
  f["sr.base_channels"] = int_field("sr.base_channels", s.base_channels);
  f["sr.steps"] = int_field("sr.steps", c.sr_steps);
  f["sr.batch"] = int_field("sr.batch", c.sr_batch);
  f["phantoms"] = int_field("phantoms", c.phantoms);
  f["phantom_seed"] = int_field("phantom_seed", c.phantom_seed);
  f["sr.phantoms"] = int_field("sr.phantoms", c.sr_phantoms);
  f["sr.phantom_seed"] = int_field("sr.phantom_seed", c.sr_phantom_seed);
  f["log_every"] = int_field("log_every", c.log_every);
  f["out_dir"] = {[&c] { return c.out_dir; }, [&c](const std::string& v) { c.out_dir = v; }};
  return f;
}

}  // namespace

Ratio parse_ratio(const std::string& text) {
  const auto s = trim(text);
  const auto slash = s.find('/');
  std::int64_t num = 0, den = 1;
  if (slash != std::string::npos) {
    num = parse_int<std::int64_t>("ratio", trim(s.substr(0, slash)));
    den = parse_int<std::int64_t>("ratio", trim(s.substr(slash + 1)));
  } else {
    const double v = parse_double("ratio", s);
    bool found = false;
    for (den = 1; den <= 4096; ++den) {
      const double k = std::round(v * static_cast<double>(den));
      if (std::abs(k - v * static_cast<double>(den)) < 1e-9) {
        num = static_cast<std::int64_t>(k);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("ratio '" + s + "' has no small exact denominator");
  }
  if (num <= 0 || den <= 0) throw ConfigError("ratio '" + s + "' must be positive");
  const auto g = std::gcd(num, den);
  return {num / g, den / g};
}

std::string output_dir(const std::string& fallback) {
  if (const char* env = std::getenv("HAGAN_OUT_DIR"); env && *env) return env;
  return fallback;
}

RunConfig RunConfig::desk() {
  RunConfig r;
  // At 64³ with 2000 steps the l1 term (~0.05) is swamped by the adversarial
  // term at lambda 1 and SR falls below trilinear; lambda 100 recovers it.
  r.sr.lambda = 100.0;
  return r;
}

std::vector<std::string> RunConfig::keys() {
  RunConfig c;
  std::vector<std::string> out;
  for (const auto& [k, f] : fields(c)) out.push_back(k);
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto f = fields(*this);
  const auto it = f.find(key);
  if (it == f.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(trim(value));
}

std::string RunConfig::get(const std::string& key) const {
  auto f = fields(const_cast<RunConfig&>(*this));
  const auto it = f.find(key);
  if (it == f.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second.get();
}

void RunConfig::validate() const {
  train.validate();
  sr.validate();
  if (sr_steps < 0) throw ConfigError("sr.steps must be nonnegative");
  if (sr_batch < 1) throw ConfigError("sr.batch must be positive");
  if (phantoms < 2) throw ConfigError("phantoms must be at least 2");
  if (sr_phantoms < 2) throw ConfigError("sr.phantoms must be at least 2");
  if (log_every < 1) throw ConfigError("log_every must be positive");
}

std::string RunConfig::echo() const {
  std::string out;
  for (const auto& [k, f] : fields(const_cast<RunConfig&>(*this))) out += k + " = " + f.get() + "\n";
  return out;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c = desk();
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

}  // namespace hagan
