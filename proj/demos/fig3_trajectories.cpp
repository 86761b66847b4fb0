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

// A resonantly driven, unbiased qubit under noise: Bloch trajectory of the
// averaged equations and of an ensemble mean, as CSV on stdout.
//
//   demo_fig3_trajectories [n_traj] > traj.csv

#include <cstdio>
#include <cstdlib>

#include "oscqubit/oscqubit.hpp"

int main(int argc, char** argv) {
  using namespace oscq;
  const std::size_t n_traj = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1000;
  TLSParams p;
  p.D = 0.5;
  p.omega = p.Delta;  // on resonance at eps0 = 0
  const OUParams noise{0.3, 0.5, 0};
  const BlochVector r0 = BlochVector(1.0, 1.0, 1.0) / std::sqrt(3.0);

  const RedfieldGenerator g = build_generator(p, noise);
  const double T = 5.0 / relaxation_times(g).T2_inv;
  RedfieldOptions opt;
  opt.frame = Frame::bare;
  opt.picture = Picture::schrodinger;
  opt.record_stride = 10;
  const auto rf = integrate_redfield(g, r0, 0.01, T, opt);

  EnsembleSpec spec;
  spec.tls = p;
  spec.noise = noise;
  spec.initial = r0;
  spec.frame = Frame::bare;
  spec.T = T;
  spec.record_stride = 10;
  spec.n_traj = n_traj;
  spec.master_seed = 7;
  const auto mc = run_ensemble(spec).mean;

  std::printf("t,rx_avg,ry_avg,rz_avg,rx_mc,ry_mc,rz_mc,rz_mc_err\n");
  for (std::size_t k = 0; k < rf.size(); ++k) {
    const auto& a = rf.r[k];
    const auto& b = mc.r[k];
    std::printf("%.4f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", rf.times[k], a.x(), a.y(), a.z(), b.x(), b.y(),
                b.z(), mc.std_error[k].z());
  }
}
