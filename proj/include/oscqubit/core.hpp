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

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace oscq {

using cplx = std::complex<double>;
using Spinor = Eigen::Vector2cd;
using BlochVector = Eigen::Vector3d;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I{0.0, 1.0};

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state became non-finite during integration.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(double t, std::string what = "integration diverged")
      : Error(what + " at t=" + std::to_string(t)), time_(t) {}
  DivergenceError(double t, std::uint64_t seed)
      : Error("realization with seed " + std::to_string(seed) + " diverged at t=" +
              std::to_string(t)),
        time_(t),
        seed_(seed),
        has_seed_(true) {}

  double time() const noexcept { return time_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool has_seed() const noexcept { return has_seed_; }

 private:
  double time_ = 0.0;
  std::uint64_t seed_ = 0;
  bool has_seed_ = false;
};

/// An operation received a state tagged with the wrong frame or picture.
class FrameError : public Error {
 public:
  using Error::Error;
};

/// A configuration file or key=value set is malformed or incomplete.
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

inline bool finite(const BlochVector& r) { return r.allFinite(); }
inline bool finite(const Spinor& s) {
  return std::isfinite(s[0].real()) && std::isfinite(s[0].imag()) &&
         std::isfinite(s[1].real()) && std::isfinite(s[1].imag());
}

// Number of steps of size dt that cover [0, T].
inline std::size_t step_count(double dt, double T) {
  require(dt > 0.0, "dt must be positive");
  require(T >= 0.0, "T must be non-negative");
  return static_cast<std::size_t>(std::llround(T / dt));
}

}  // namespace detail

namespace pauli {

inline Eigen::Matrix2cd identity() { return Eigen::Matrix2cd::Identity(); }
inline Eigen::Matrix2cd x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}
inline Eigen::Matrix2cd y() {
  Eigen::Matrix2cd m;
  m << 0, -I, I, 0;
  return m;
}
inline Eigen::Matrix2cd z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}
/// sigma_+ = |1><2| raises the sigma_z eigenvalue.
inline Eigen::Matrix2cd plus() {
  Eigen::Matrix2cd m;
  m << 0, 1, 0, 0;
  return m;
}
inline Eigen::Matrix2cd minus() {
  Eigen::Matrix2cd m;
  m << 0, 0, 1, 0;
  return m;
}

inline Eigen::Matrix2cd commutator(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  return a * b - b * a;
}

}  // namespace pauli

}  // namespace oscq
