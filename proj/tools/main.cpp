// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "lrsdc/experiment.hpp"

namespace {

lrsdc::RealMatrix read_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw lrsdc::InvalidInputError("cannot open matrix file " + path);
  }
  lrsdc::Index rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows < 1 || cols < 1) {
    throw lrsdc::InvalidInputError("matrix file must start with 'rows cols'");
  }
  lrsdc::RealMatrix m(rows, cols);
  for (lrsdc::Index i = 0; i < rows; ++i) {
    for (lrsdc::Index j = 0; j < cols; ++j) {
      if (!(is >> m(i, j))) {
        throw lrsdc::InvalidInputError("matrix file ended early");
      }
    }
  }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank SDC-mBUG integrator for stiff linear matrix ODEs"};
  app.require_subcommand(1);

  // run
  std::string config_path;
  std::string out_override;
  int jobs = 1;
  bool no_svg = false;
  auto* run = app.add_subcommand("run", "Run the experiment matrix of a config file");
  run->add_option("config", config_path, "Path to a key = value config file")
      ->required();
  run->add_option("--jobs", jobs, "Worker threads for independent cells");
  run->add_option("--out", out_override, "Override the configured output directory");
  run->add_flag("--no-svg", no_svg, "Skip rank-evolution SVG plots");

  auto* list = app.add_subcommand("list-problems", "List the benchmark ids");

  int weights_p = 0;
  auto* weights = app.add_subcommand("weights", "Print the SDC quadrature weight table");
  weights->add_option("P", weights_p, "Subinterval count")->required();

  std::string demo_mode;
  double demo_eps = 0.0;
  std::string demo_path;
  auto* demo = app.add_subcommand(
      "truncate-demo", "Truncate a dense matrix read from a file and print "
                       "the retained singular values");
  demo->add_option("mode", demo_mode, "hard or soft")->required();
  demo->add_option("eps", demo_eps, "Truncation tolerance")->required();
  demo->add_option("matrix", demo_path,
                   "Text file: 'rows cols' then row-major entries")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      lrsdc::ExperimentConfig cfg = lrsdc::parse_config_file(config_path);
      if (!out_override.empty()) cfg.out_dir = out_override;
      cfg.validate();
      lrsdc::ExperimentResult result = lrsdc::run_experiment(cfg, jobs);
      lrsdc::write_experiment_outputs(cfg, result, no_svg);
      for (const auto& row : result.rows) {
        std::printf("%-14s Nt=%-6ld l2_error=%-12.4e", row.scheme.c_str(),
                    row.nt, row.l2_error);
        if (!std::isnan(row.rate)) {
          std::printf(" rate=%.2f", row.rate);
        }
        std::printf("  (%.1fs)\n", row.wall_seconds);
      }
      std::printf("solves: %ld, worst residual/tolerance: %.3g\n",
                  result.audit.solves, result.audit.worst_ratio);
      std::printf("outputs written to %s\n", cfg.out_dir.c_str());
    } else if (*list) {
      for (const auto& id : lrsdc::problem_ids()) {
        std::printf("%s\n", id.c_str());
      }
    } else if (*weights) {
      const lrsdc::SdcGrid grid = lrsdc::lobatto_grid(weights_p, 0.0, 1.0);
      std::printf("Gauss-Lobatto nodes on [0, 1]:");
      for (int i = 0; i <= grid.subintervals; ++i) {
        std::printf(" %.15g", grid.nodes[i]);
      }
      std::printf("\nweights w(m, s):\n");
      for (int m = 0; m < grid.subintervals; ++m) {
        for (int s = 0; s <= grid.subintervals; ++s) {
          std::printf(" %18.15f", grid.weights(m, s));
        }
        std::printf("\n");
      }
    } else if (*demo) {
      const lrsdc::TruncationMode mode =
          demo_mode == "soft" ? lrsdc::TruncationMode::Soft
                              : lrsdc::TruncationMode::Hard;
      if (demo_mode != "soft" && demo_mode != "hard") {
        throw lrsdc::InvalidParameterError("mode must be hard or soft");
      }
      const lrsdc::RealMatrix m = read_matrix(demo_path);
      const auto f = lrsdc::Factorization<lrsdc::Real>::from_dense(m);
      const auto trimmed = lrsdc::truncate(f, demo_eps, mode);
      std::printf("input rank %ld, retained rank %ld\n",
                  static_cast<long>(f.rank()), static_cast<long>(trimmed.rank()));
      for (lrsdc::Index i = 0; i < trimmed.rank(); ++i) {
        std::printf("  sigma[%ld] = %.15g\n", static_cast<long>(i),
                    trimmed.singular_values()[i]);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
