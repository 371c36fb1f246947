// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lrsdc/problems.hpp"
#include "lrsdc/reference.hpp"

namespace lrsdc {

/// One experiment: a benchmark crossed with orders, truncation modes and
/// step counts. Parsed from flat `key = value` config files.
struct ExperimentConfig {
  std::string problem;
  Index nx = 200;
  Index ny = 200;
  Real t_final = -1.0;  // < 0: per-problem default
  std::vector<long> nt_list;
  std::vector<int> orders;
  std::vector<TruncationMode> modes;
  std::string reference = "exact";  // "exact" or "rk4"
  long ref_refine = 16;             // reference steps per finest macro step
  std::string out_dir = "out";
  long rank_stride = 1;
  Real c_override = -1.0;  // < 0: the (nx, ny) formula below

  void validate() const;
  Real final_time() const;
  Real truncation_constant() const;
};

/// C = 2 / (4 pi / nx + 4 pi / ny).
Real default_truncation_constant(Index nx, Index ny);

/// Parses `key = value` lines; '#' starts a comment, lists are
/// comma-separated. Unknown keys are rejected.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig parse_config_file(const std::string& path);

/// Scheme label in the tables, e.g. "SDC-mBUG-3-H".
std::string scheme_label(int order, TruncationMode mode);

struct ConvergenceRow {
  std::string scheme;
  long nt = 0;
  double l2_error = 0.0;
  double rate = std::numeric_limits<double>::quiet_NaN();  // NaN: no coarser run
  double wall_seconds = 0.0;
};

struct RankSeries {
  int order = 0;
  TruncationMode mode = TruncationMode::Hard;
  long nt = 0;
  std::vector<std::pair<Real, Index>> series;
};

/// Rank curve of the reference solution truncated at the scheme's
/// final-level tolerance (Ref-X-H/S).
struct ReferenceRankCurve {
  int order = 0;
  TruncationMode mode = TruncationMode::Hard;
  std::vector<std::pair<Real, Index>> series;
};

struct ExperimentResult {
  std::vector<ConvergenceRow> rows;
  std::vector<RankSeries> rank_series;
  std::vector<ReferenceRankCurve> reference_curves;
  SolveAudit audit;
};

/// Runs the full (order, mode, nt) matrix. Cells are independent and run on
/// `jobs` threads; outputs are assembled in config order, so results do not
/// depend on the thread count. References are cached under
/// `out_dir/refcache` in the binary reference format.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 1);

/// Writes `{problem}-convergence.csv`, one `{problem}-{order}-{mode}-Nt{N}.csv`
/// rank series per run, and (unless no_svg) one rank-evolution SVG per
/// (order, mode).
void write_experiment_outputs(const ExperimentConfig& cfg,
                              const ExperimentResult& result, bool no_svg);

/// Emits "scheme,Nt,l2_error,rate,wall_seconds" rows, blank rate where
/// undefined, 6 significant digits, LF line endings.
void emit_csv(const std::vector<ConvergenceRow>& rows, const std::string& path);

struct SvgCurve {
  std::string label;
  std::vector<std::pair<Real, Index>> points;
  bool dashed = false;
};

/// Standalone SVG with one polyline per curve (dashed for reference
/// curves), axes labeled t and rank.
void emit_rank_svg(const std::vector<SvgCurve>& curves, const std::string& path);

}  // namespace lrsdc
