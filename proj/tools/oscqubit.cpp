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

// oscqubit --config run.cfg [--out DIR] [--seed N] [--workers N]

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "oscqubit/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Noisy two-level system and its coupled-oscillator analogue"};
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  app.add_option("--config", config_path, "key=value config file")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out, "output directory (overrides output.dir)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides seed)");
  auto* workers_opt = app.add_option("--workers", workers, "worker threads (overrides ensemble.workers)")
                          ->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : oscq::kConfigError;
  }

  oscq::Overrides ov;
  if (*out_opt) ov.out = out;
  if (*seed_opt) ov.seed = seed;
  if (*workers_opt) ov.workers = workers;
  try {
    return oscq::run(oscq::io::Config::load(config_path), ov, std::cout);
  } catch (const oscq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return oscq::kConfigError;
  }
}
