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

// Monte-Carlo ensemble over noise realizations.
//
// Trajectory i is driven by the OU stream seeded with derive_seed(master, i),
// so it is exactly the single run integrate_envelope would produce from
// sample_path with that seed.  Trajectories are grouped into fixed blocks of
// kBlock; each block is reduced serially and the block summaries are merged
// in a pairwise tree keyed by block index.  The result therefore does not
// depend on the number of workers or the order in which blocks finish.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "oscqubit/core.hpp"
#include "oscqubit/noise.hpp"
#include "oscqubit/tls.hpp"

namespace oscq {

struct EnsembleSpec {
  std::size_t n_traj = 1000;
  std::uint64_t master_seed = 1;
  TLSParams tls;
  OUParams noise;       ///< noise.seed is ignored; per-path seeds come from master_seed
  BlochVector initial = BlochVector(0.0, 0.0, -1.0);
  double dt = 0.01;
  double T = 10.0;
  std::size_t record_stride = 1;
  unsigned workers = 1;  ///< 0 picks std::thread::hardware_concurrency()
  /// Frame and picture of both `initial` and the output trajectory.
  Frame frame = Frame::diabatic;
  Picture picture = Picture::schrodinger;

  void validate() const {
    detail::require(n_traj >= 2, "n_traj must be >= 2");
    detail::require(record_stride >= 1, "record_stride must be >= 1");
    detail::require(dt > 0.0 && T > 0.0, "dt and T must be positive");
    detail::require(initial.allFinite() && initial.norm() <= 1.0 + 1e-12,
                    "initial Bloch vector must satisfy |r| <= 1");
    if (picture == Picture::interaction && frame != Frame::diabatic)
      throw FrameError("the interaction picture is only defined in the diabatic frame");
    tls.validate();
    noise.validate();
  }
};

struct EnsembleResult {
  BlochTrajectory mean;  ///< mean r, per-component std_error, mean norm
  std::size_t n_traj = 0;
  std::uint64_t master_seed = 0;
  unsigned workers = 0;
  double wall_seconds = 0.0;
};

namespace detail {

inline constexpr std::size_t kBlock = 64;

// Per-time-point running moments of (rx, ry, rz, norm).
struct Moments {
  std::size_t count = 0;
  std::vector<Eigen::Vector4d> mean;
  std::vector<Eigen::Vector4d> m2;

  explicit Moments(std::size_t n_rec = 0)
      : mean(n_rec, Eigen::Vector4d::Zero()), m2(n_rec, Eigen::Vector4d::Zero()) {}

  void merge(const Moments& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(o.count);
    const double n = na + nb;
    for (std::size_t k = 0; k < mean.size(); ++k) {
      const Eigen::Vector4d d = o.mean[k] - mean[k];
      mean[k] += d * (nb / n);
      m2[k] += o.m2[k] + d.cwiseProduct(d) * (na * nb / n);
    }
    count += o.count;
  }
};

// The pure components of a (possibly mixed) initial Bloch vector, as diabatic
// spinors with weights.
struct InitialMixture {
  Spinor up;
  Spinor down;
  double w_up = 1.0;
  double w_down = 0.0;
};

inline InitialMixture decompose_initial(const BlochVector& r_diabatic) {
  const double len = r_diabatic.norm();
  const BlochVector n = len > 0.0 ? BlochVector(r_diabatic / len) : BlochVector(0.0, 0.0, -1.0);
  InitialMixture mix;
  mix.up = spinor_from_direction(n);
  mix.down = spinor_from_direction(-n);
  mix.w_up = 0.5 * (1.0 + std::min(len, 1.0));
  mix.w_down = 1.0 - mix.w_up;
  return mix;
}

}  // namespace detail

/// Runs the ensemble.  Throws DivergenceError carrying the seed of the
/// lowest-index diverging realization.
inline EnsembleResult run_ensemble(const EnsembleSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n_steps = detail::step_count(spec.dt, spec.T);
  const std::size_t n_rec = n_steps / spec.record_stride + 1;
  const TLSParams& p = spec.tls;

  // Initial state: both pictures coincide at t = 0.
  BlochVector r0 = spec.initial;
  if (spec.frame == Frame::bare) r0 = bloch_to_diabatic(p) * r0;
  const detail::InitialMixture mix = detail::decompose_initial(r0);
  const bool mixed = mix.w_down > 0.0;

  // Map from diabatic Schrodinger Bloch vectors to the output frame.
  std::vector<double> times(n_rec);
  std::vector<Eigen::Matrix3d> out_map(n_rec);
  for (std::size_t k = 0; k < n_rec; ++k) {
    times[k] = static_cast<double>(k * spec.record_stride) * spec.dt;
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    if (spec.picture == Picture::interaction) m = bloch_to_interaction(p, times[k]);
    if (spec.frame == Frame::bare) m = bloch_to_diabatic(p).transpose() * m;
    out_map[k] = m;
  }

  const EnvelopeStepper stepper(p, Picture::schrodinger);
  const std::size_t n_blocks = (spec.n_traj + detail::kBlock - 1) / detail::kBlock;
  std::vector<detail::Moments> blocks(n_blocks);

  struct Failure {
    std::size_t index;
    double t;
    std::uint64_t seed;
  };
  std::mutex fail_mutex;
  std::optional<Failure> failure;
  std::atomic<std::size_t> next_block{0};

  auto run_block = [&](std::size_t b) {
    detail::Moments acc(n_rec);
    const std::size_t lo = b * detail::kBlock;
    const std::size_t hi = std::min(spec.n_traj, lo + detail::kBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint64_t seed = derive_seed(spec.master_seed, i);
      OUStream stream(spec.noise, spec.dt, seed);
      const bool white = stream.white();
      double g0 = white ? 0.0 : stream.initial();
      Spinor a = mix.up;
      Spinor c = mix.down;
      const double n_count = static_cast<double>(i - lo + 1);
      auto record = [&](std::size_t k) {
        const BlochSample sa = bloch_from_spinor(a);
        Eigen::Vector4d x;
        BlochVector r = mix.w_up * sa.r;
        double norm = mix.w_up * sa.norm;
        if (mixed) {
          const BlochSample sc = bloch_from_spinor(c);
          r += mix.w_down * sc.r;
          norm += mix.w_down * sc.norm;
        }
        x.head<3>() = out_map[k] * r;
        x[3] = norm;
        const Eigen::Vector4d d = x - acc.mean[k];
        acc.mean[k] += d / n_count;
        acc.m2[k] += d.cwiseProduct(x - acc.mean[k]);
      };
      record(0);
      for (std::size_t n = 0; n < n_steps; ++n) {
        const double t = static_cast<double>(n) * spec.dt;
        if (white) {
          const double inc = stream.next();
          a = stepper.step_white(a, t, spec.dt, inc);
          if (mixed) c = stepper.step_white(c, t, spec.dt, inc);
        } else {
          const double g1 = stream.next();
          a = stepper.step_colored(a, t, spec.dt, g0, g1);
          if (mixed) c = stepper.step_colored(c, t, spec.dt, g0, g1);
          g0 = g1;
        }
        if (!detail::finite(a) || (mixed && !detail::finite(c))) {
          std::lock_guard lock(fail_mutex);
          if (!failure || failure->index > i) failure = Failure{i, t + spec.dt, seed};
          return;
        }
        if ((n + 1) % spec.record_stride == 0) record((n + 1) / spec.record_stride);
      }
      acc.count = i - lo + 1;
    }
    blocks[b] = std::move(acc);
  };

  unsigned workers = spec.workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                       : spec.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_blocks));
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    try {
      for (std::size_t b = next_block++; b < n_blocks; b = next_block++) run_block(b);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  if (failure) throw DivergenceError(failure->t, failure->seed);

  // Pairwise tree over block index.
  for (std::size_t width = 1; width < n_blocks; width *= 2)
    for (std::size_t b = 0; b + width < n_blocks; b += 2 * width) blocks[b].merge(blocks[b + width]);
  const detail::Moments& total = blocks.front();

  EnsembleResult res;
  res.n_traj = spec.n_traj;
  res.master_seed = spec.master_seed;
  res.workers = workers;
  res.mean.frame = spec.frame;
  res.mean.picture = spec.picture;
  res.mean.times = times;
  const double n = static_cast<double>(total.count);
  for (std::size_t k = 0; k < n_rec; ++k) {
    res.mean.r.push_back(total.mean[k].head<3>());
    res.mean.norm.push_back(total.mean[k][3]);
    res.mean.std_error.push_back((total.m2[k].head<3>() / ((n - 1.0) * n)).cwiseSqrt());
  }
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

struct ConvergenceRow {
  std::size_t n_traj = 0;
  double max_deviation = 0.0;  ///< max |r - r_largest| over time and components
  double max_std_error = 0.0;
  double mean_variance = 0.0;  ///< stderr^2 averaged over time and components
};

/// Runs the spec at each n in `n_list` (increasing) and compares against the
/// largest run.  Smaller runs are prefixes of the largest (same seeds).
inline std::vector<ConvergenceRow> convergence_study(EnsembleSpec spec,
                                                     const std::vector<std::size_t>& n_list) {
  detail::require(!n_list.empty(), "n_list must not be empty");
  detail::require(std::is_sorted(n_list.begin(), n_list.end()), "n_list must be increasing");
  std::vector<EnsembleResult> runs;
  for (std::size_t n : n_list) {
    spec.n_traj = n;
    runs.push_back(run_ensemble(spec));
  }
  const BlochTrajectory& ref = runs.back().mean;
  std::vector<ConvergenceRow> rows;
  for (const auto& run : runs) {
    ConvergenceRow row;
    row.n_traj = run.n_traj;
    double var_sum = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      row.max_deviation = std::max(row.max_deviation, (run.mean.r[k] - ref.r[k]).cwiseAbs().maxCoeff());
      row.max_std_error = std::max(row.max_std_error, run.mean.std_error[k].maxCoeff());
      var_sum += run.mean.std_error[k].squaredNorm();
    }
    row.mean_variance = var_sum / (3.0 * static_cast<double>(ref.size()));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace oscq
