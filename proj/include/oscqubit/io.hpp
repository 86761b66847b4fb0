// Copyright 2026 The oscqubit Authors
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

// Plain-text I/O: CSV dumps, flat key=value configs, run.meta sidecars.
// Numbers are written with %.17g so a rerun reproduces files byte for byte.

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "oscqubit/core.hpp"
#include "oscqubit/mechanics.hpp"
#include "oscqubit/tls.hpp"

namespace oscq::io {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
      : out_(path), columns_(header.size()) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    bool first = true;
    for (auto h : header) {
      if (!first) out_ << ',';
      out_ << h;
      first = false;
    }
    out_ << '\n';
  }

  void row(std::initializer_list<double> values) {
    detail::require(values.size() == columns_, "CSV row width does not match the header");
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ',';
      out_ << format_double(v);
      first = false;
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

/// t,rx,ry,rz,norm -- or t,rx,ry,rz,sx,sy,sz,norm when standard errors exist.
inline void write_bloch_csv(const std::filesystem::path& path, const BlochTrajectory& tr) {
  const bool with_err = !tr.std_error.empty();
  const bool with_norm = !tr.norm.empty();
  if (with_err) {
    CsvWriter w(path, {"t", "rx", "ry", "rz", "sx", "sy", "sz", "norm"});
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const auto& r = tr.r[k];
      const auto& e = tr.std_error[k];
      w.row({tr.times[k], r.x(), r.y(), r.z(), e.x(), e.y(), e.z(), with_norm ? tr.norm[k] : 1.0});
    }
    return;
  }
  CsvWriter w(path, {"t", "rx", "ry", "rz", "norm"});
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const auto& r = tr.r[k];
    w.row({tr.times[k], r.x(), r.y(), r.z(), with_norm ? tr.norm[k] : r.norm()});
  }
}

inline void write_mechanics_csv(const std::filesystem::path& path, const std::vector<MechState>& s) {
  CsvWriter w(path, {"t", "x1", "v1", "x2", "v2"});
  for (const auto& m : s) w.row({m.t, m.x1, m.v1, m.x2, m.v2});
}

inline void write_envelope_csv(const std::filesystem::path& path, const std::vector<EnvelopeState>& s) {
  CsvWriter w(path, {"t", "re_psi1", "im_psi1", "re_psi2", "im_psi2"});
  for (const auto& e : s) w.row({e.t, e.psi[0].real(), e.psi[0].imag(), e.psi[1].real(), e.psi[1].imag()});
}

/// Flat key=value configuration.  '#' starts a comment; blank lines are
/// ignored; later assignments override earlier ones.  Every lookup marks its
/// key as known, and check_consumed() rejects anything that was never asked for.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<config>") {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string body = trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos)
        throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key=value");
      const std::string key = trim(body.substr(0, eq));
      if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
      c.values_[key] = trim(body.substr(eq + 1));
    }
    return c;
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    return parse(in, path.string());
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double get_double(const std::string& key, double fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    double v = fallback;
    if (it != values_.end()) {
      const auto& s = it->second;
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError(key + ": not a number: '" + s + "'");
    }
    resolved_[key] = format_double(v);
    return v;
  }

  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    std::uint64_t v = fallback;
    if (it != values_.end()) {
      const auto& s = it->second;
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError(key + ": not a non-negative integer: '" + s + "'");
    }
    resolved_[key] = std::to_string(v);
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) {
    const std::string s = get_string(key, fallback ? "true" : "false");
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(key + ": not a boolean: '" + s + "'");
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    std::string v = it == values_.end() ? fallback : it->second;
    resolved_[key] = v;
    return v;
  }

  /// Throws ConfigError naming every key no lookup asked for.
  void check_consumed() const {
    std::string unknown;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
  }

  /// key=value lines for every key that was looked up, defaults filled in.
  std::string resolved() const {
    std::ostringstream os;
    for (const auto& [k, v] : resolved_) os << k << '=' << v << '\n';
    return os.str();
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
  std::map<std::string, std::string> resolved_;
};

/// run.meta: key=value, one per line.  The timestamp is the only field that
/// differs between identical reruns.
inline void write_meta(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, std::string>>& fields) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  out << "timestamp=" << stamp << '\n';
  for (const auto& [k, v] : fields) out << k << '=' << v << '\n';
}

}  // namespace oscq::io
