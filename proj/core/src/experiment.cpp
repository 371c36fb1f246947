// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#include "lrsdc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

namespace lrsdc {

namespace {

constexpr Real kPi = std::numbers::pi;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

TruncationMode parse_mode(const std::string& s) {
  if (s == "hard" || s == "Hard" || s == "H") return TruncationMode::Hard;
  if (s == "soft" || s == "Soft" || s == "S") return TruncationMode::Soft;
  throw InvalidParameterError("config: unknown truncation mode '" + s + "'");
}

std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

Real default_truncation_constant(Index nx, Index ny) {
  return 2.0 / (4.0 * kPi / static_cast<Real>(nx) +
                4.0 * kPi / static_cast<Real>(ny));
}

void ExperimentConfig::validate() const {
  const auto& ids = problem_ids();
  if (std::find(ids.begin(), ids.end(), problem) == ids.end()) {
    throw InvalidParameterError("config: unknown problem '" + problem + "'");
  }
  if (nt_list.empty()) {
    throw InvalidParameterError("config: nt_list must be nonempty");
  }
  for (size_t i = 1; i < nt_list.size(); ++i) {
    if (nt_list[i] <= nt_list[i - 1]) {
      throw InvalidParameterError("config: nt_list must be strictly increasing");
    }
  }
  if (orders.empty()) {
    throw InvalidParameterError("config: orders must be nonempty");
  }
  for (int o : orders) {
    if (o < 2 || o > 4) {
      throw InvalidParameterError("config: orders must lie in {2, 3, 4}");
    }
  }
  if (modes.empty()) {
    throw InvalidParameterError("config: modes must be nonempty");
  }
  if (reference != "exact" && reference != "rk4") {
    throw InvalidParameterError("config: reference must be 'exact' or 'rk4'");
  }
  if (ref_refine < 1 || rank_stride < 1) {
    throw InvalidParameterError("config: ref_refine and rank_stride must be >= 1");
  }
}

Real ExperimentConfig::final_time() const {
  return t_final > 0.0 ? t_final : default_final_time(problem);
}

Real ExperimentConfig::truncation_constant() const {
  return c_override > 0.0 ? c_override : default_truncation_constant(nx, ny);
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidParameterError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "problem") {
        cfg.problem = value;
      } else if (key == "nx") {
        cfg.nx = std::stol(value);
      } else if (key == "ny") {
        cfg.ny = std::stol(value);
      } else if (key == "t_final") {
        cfg.t_final = std::stod(value);
      } else if (key == "nt_list") {
        cfg.nt_list.clear();
        for (const auto& s : split_list(value)) cfg.nt_list.push_back(std::stol(s));
      } else if (key == "orders") {
        cfg.orders.clear();
        for (const auto& s : split_list(value)) cfg.orders.push_back(std::stoi(s));
      } else if (key == "modes") {
        cfg.modes.clear();
        for (const auto& s : split_list(value)) cfg.modes.push_back(parse_mode(s));
      } else if (key == "reference") {
        cfg.reference = value;
      } else if (key == "ref_refine") {
        cfg.ref_refine = std::stol(value);
      } else if (key == "out_dir") {
        cfg.out_dir = value;
      } else if (key == "rank_stride") {
        cfg.rank_stride = std::stol(value);
      } else if (key == "c_override") {
        cfg.c_override = std::stod(value);
      } else {
        throw InvalidParameterError("config line " + std::to_string(lineno) +
                                    ": unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw InvalidParameterError("config line " + std::to_string(lineno) +
                                  ": bad value for '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw InvalidParameterError("config: cannot open " + path);
  }
  return parse_config(is);
}

std::string scheme_label(int order, TruncationMode mode) {
  return "SDC-mBUG-" + std::to_string(order) +
         (mode == TruncationMode::Hard ? "-H" : "-S");
}

namespace {

struct Cell {
  int order;
  TruncationMode mode;
  long nt;
};

template <class S>
struct CellOutcome {
  double l2_error = 0.0;
  double wall_seconds = 0.0;
  std::vector<std::pair<Real, Index>> ranks;
  SolveAudit audit;
};

/// Reference data shared by all cells of one problem.
template <class S>
struct ReferenceData {
  bool use_exact = false;
  DenseMatrix<S> state_at_t1;                    // dense reference at T
  RealVector curve_times;                        // rank-curve sample times
  std::vector<DenseMatrix<S>> curve_states;
};

template <class S>
DenseMatrix<S> exact_dense_at(const BenchmarkProblem<S>& p, Real t) {
  if (p.exact_lowrank) return p.exact_lowrank(t).dense();
  if (p.exact_dense) return p.exact_dense(t);
  throw InvalidParameterError("reference = exact but problem '" + p.name +
                              "' has no exact solution");
}

template <class S>
ReferenceData<S> prepare_reference(const BenchmarkProblem<S>& p,
                                   const ExperimentConfig& cfg, Real t1) {
  ReferenceData<S> ref;
  const long nt_finest = cfg.nt_list.back();
  const long curve_samples = std::min<long>(nt_finest, 100);
  const long curve_stride = std::max<long>(1, nt_finest / curve_samples);
  std::vector<Real> times;
  for (long n = 0; n <= nt_finest; n += curve_stride) {
    times.push_back(t1 * static_cast<Real>(n) / static_cast<Real>(nt_finest));
  }
  if (times.back() != t1) times.push_back(t1);

  if (cfg.reference == "exact") {
    ref.use_exact = true;
    ref.curve_times = Eigen::Map<const RealVector>(times.data(),
                                                   static_cast<Index>(times.size()));
    for (Real t : times) {
      ref.curve_states.push_back(exact_dense_at(p, t));
    }
    ref.state_at_t1 = exact_dense_at(p, t1);
    return ref;
  }

  const long steps = cfg.ref_refine * nt_finest;
  std::filesystem::create_directories(std::filesystem::path(cfg.out_dir) /
                                      "refcache");
  char key[256];
  std::snprintf(key, sizeof(key), "%s-N%ldx%ld-T%.12g-s%ld.ref",
                p.name.c_str(), static_cast<long>(cfg.nx),
                static_cast<long>(cfg.ny), t1, steps);
  const std::string path =
      (std::filesystem::path(cfg.out_dir) / "refcache" / key).string();

  ReferenceSolution<S> sol;
  if (!load_reference(path, &sol)) {
    RealVector sample(static_cast<Index>(times.size()));
    for (size_t i = 0; i < times.size(); ++i) sample[static_cast<Index>(i)] = times[i];
    sol = rk4_dense(p.ode, p.x0.dense(), 0.0, t1, steps, sample);
    save_reference(path, sol);
  }
  ref.curve_times = sol.times;
  ref.curve_states = sol.states;
  ref.state_at_t1 = sol.states.back();
  return ref;
}

template <class S>
ExperimentResult run_typed(const BenchmarkProblem<S>& p,
                           const ExperimentConfig& cfg, int jobs) {
  const Real t1 = cfg.final_time();
  const Real c = cfg.truncation_constant();
  const Real dx = 4.0 * kPi / static_cast<Real>(cfg.nx);
  const Real dy = 4.0 * kPi / static_cast<Real>(cfg.ny);
  const Real l2_scale = std::sqrt(dx * dy);

  const ReferenceData<S> ref = prepare_reference(p, cfg, t1);

  std::vector<Cell> cells;
  for (int order : cfg.orders) {
    for (TruncationMode mode : cfg.modes) {
      for (long nt : cfg.nt_list) {
        cells.push_back(Cell{order, mode, nt});
      }
    }
  }

  std::vector<CellOutcome<S>> outcomes(cells.size());
  std::atomic<size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      const auto start = std::chrono::steady_clock::now();
      Trajectory<S> traj = integrate(p.ode, p.x0, 0.0, t1, cell.nt, cell.order,
                                     cell.mode, c);
      const auto stop = std::chrono::steady_clock::now();
      CellOutcome<S>& out = outcomes[i];
      out.wall_seconds = std::chrono::duration<double>(stop - start).count();
      out.l2_error =
          l2_scale * (traj.final_state.dense() - ref.state_at_t1).norm();
      out.audit = traj.audit;
      for (Index k = 0; k < traj.times.size(); ++k) {
        out.ranks.emplace_back(traj.times[k], traj.ranks[static_cast<size_t>(k)]);
      }
    }
  };

  const int nthreads = std::max(1, jobs);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  for (size_t i = 0; i < cells.size(); ++i) {
    const Cell& cell = cells[i];
    const CellOutcome<S>& out = outcomes[i];
    ConvergenceRow row;
    row.scheme = scheme_label(cell.order, cell.mode);
    row.nt = cell.nt;
    row.l2_error = out.l2_error;
    row.wall_seconds = out.wall_seconds;
    // Rate against the previous nt of the same scheme.
    if (i > 0 && cells[i - 1].order == cell.order &&
        cells[i - 1].mode == cell.mode) {
      const double prev = outcomes[i - 1].l2_error;
      row.rate = std::log(prev / out.l2_error) /
                 std::log(static_cast<double>(cell.nt) /
                          static_cast<double>(cells[i - 1].nt));
    }
    result.rows.push_back(std::move(row));

    RankSeries rs;
    rs.order = cell.order;
    rs.mode = cell.mode;
    rs.nt = cell.nt;
    for (size_t k = 0; k < out.ranks.size(); ++k) {
      if (k % static_cast<size_t>(cfg.rank_stride) == 0 ||
          k + 1 == out.ranks.size()) {
        rs.series.push_back(out.ranks[k]);
      }
    }
    result.rank_series.push_back(std::move(rs));
    result.audit.absorb(out.audit);
  }

  // Ref-X-H/S: the reference truncated at the scheme's final tolerance,
  // using the finest step size of the list.
  const Real h_finest = t1 / static_cast<Real>(cfg.nt_list.back());
  for (int order : cfg.orders) {
    for (TruncationMode mode : cfg.modes) {
      const ToleranceSchedule sched(c, h_finest, order - 1);
      ReferenceRankCurve curve;
      curve.order = order;
      curve.mode = mode;
      for (size_t i = 0; i < ref.curve_states.size(); ++i) {
        const ThinSvd<S> svd = thin_svd(ref.curve_states[i]);
        const Real alpha = select_threshold(svd.sigma, sched.final_eps_s(), mode);
        Index r = 0;
        while (r < svd.sigma.size() && svd.sigma[r] > alpha) ++r;
        curve.series.emplace_back(ref.curve_times[static_cast<Index>(i)], r);
      }
      result.reference_curves.push_back(std::move(curve));
    }
  }
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  const PeriodicGrid gx(cfg.nx);
  const PeriodicGrid gy(cfg.ny);
  const AnyProblem problem = build_problem(cfg.problem, gx, gy);
  return std::visit(
      [&](const auto& p) { return run_typed(p, cfg, jobs); }, problem);
}

void emit_csv(const std::vector<ConvergenceRow>& rows, const std::string& path) {
  std::ofstream os(path, std::ios::trunc | std::ios::binary);
  if (!os) {
    throw InvalidInputError("emit_csv: cannot open " + path);
  }
  os << "scheme,Nt,l2_error,rate,wall_seconds\n";
  for (const auto& row : rows) {
    os << row.scheme << ',' << row.nt << ',' << format_g6(row.l2_error) << ',';
    if (!std::isnan(row.rate)) os << format_g6(row.rate);
    os << ',' << format_g6(row.wall_seconds) << '\n';
  }
  if (!os) {
    throw InvalidInputError("emit_csv: write failed for " + path);
  }
}

void emit_rank_svg(const std::vector<SvgCurve>& curves, const std::string& path) {
  if (curves.empty()) {
    throw InvalidInputError("emit_rank_svg: no curves");
  }
  Real t_min = curves[0].points.front().first;
  Real t_max = t_min;
  Index r_max = 1;
  for (const auto& c : curves) {
    for (const auto& [t, r] : c.points) {
      t_min = std::min(t_min, t);
      t_max = std::max(t_max, t);
      r_max = std::max(r_max, r);
    }
  }
  if (t_max <= t_min) t_max = t_min + 1.0;

  const double w = 640.0, h = 440.0;
  const double ml = 56.0, mr = 16.0, mt = 40.0, mb = 48.0;
  const auto sx = [&](Real t) {
    return ml + (w - ml - mr) * (t - t_min) / (t_max - t_min);
  };
  const auto sy = [&](Real r) {
    return h - mb - (h - mt - mb) * r / static_cast<Real>(r_max + 1);
  };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};

  std::ofstream os(path, std::ios::trunc | std::ios::binary);
  if (!os) {
    throw InvalidInputError("emit_rank_svg: cannot open " + path);
  }
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
     << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
     << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n"
     << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr
     << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
     << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12
     << "\" text-anchor=\"middle\" font-size=\"14\">t</text>\n"
     << "<text x=\"16\" y=\"" << (mt + h - mb) / 2
     << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 "
     << (mt + h - mb) / 2 << ")\">rank</text>\n";
  // Axis extremes.
  os << "<text x=\"" << ml << "\" y=\"" << h - mb + 18
     << "\" text-anchor=\"middle\" font-size=\"11\">" << format_g6(t_min)
     << "</text>\n"
     << "<text x=\"" << w - mr << "\" y=\"" << h - mb + 18
     << "\" text-anchor=\"middle\" font-size=\"11\">" << format_g6(t_max)
     << "</text>\n"
     << "<text x=\"" << ml - 8 << "\" y=\"" << sy(static_cast<Real>(r_max)) + 4
     << "\" text-anchor=\"end\" font-size=\"11\">" << r_max << "</text>\n"
     << "<text x=\"" << ml - 8 << "\" y=\"" << sy(0) + 4
     << "\" text-anchor=\"end\" font-size=\"11\">0</text>\n";

  for (size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    os << "<polyline fill=\"none\" stroke=\""
       << kColors[i % (sizeof(kColors) / sizeof(kColors[0]))]
       << "\" stroke-width=\"1.5\"";
    if (c.dashed) os << " stroke-dasharray=\"6 4\"";
    os << " points=\"";
    for (const auto& [t, r] : c.points) {
      os << format_g6(sx(t)) << ',' << format_g6(sy(static_cast<Real>(r))) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << ml + 8 + 140.0 * static_cast<double>(i % 4)
       << "\" y=\"" << 16 + 14 * static_cast<double>(i / 4)
       << "\" font-size=\"11\" fill=\""
       << kColors[i % (sizeof(kColors) / sizeof(kColors[0]))] << "\">"
       << c.label << "</text>\n";
  }
  os << "</svg>\n";
  if (!os) {
    throw InvalidInputError("emit_rank_svg: write failed for " + path);
  }
}

void write_experiment_outputs(const ExperimentConfig& cfg,
                              const ExperimentResult& result, bool no_svg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  emit_csv(result.rows,
           (fs::path(cfg.out_dir) / (cfg.problem + "-convergence.csv")).string());

  for (const auto& rs : result.rank_series) {
    char name[160];
    std::snprintf(name, sizeof(name), "%s-%d-%s-Nt%ld.csv",
                  cfg.problem.c_str(), rs.order, to_string(rs.mode), rs.nt);
    std::ofstream os((fs::path(cfg.out_dir) / name).string(),
                     std::ios::trunc | std::ios::binary);
    if (!os) {
      throw InvalidInputError(std::string("cannot open rank series file ") + name);
    }
    os << "t,rank\n";
    for (const auto& [t, r] : rs.series) {
      os << format_g6(t) << ',' << r << '\n';
    }
  }

  if (no_svg) return;
  for (int order : cfg.orders) {
    for (TruncationMode mode : cfg.modes) {
      std::vector<SvgCurve> curves;
      for (const auto& rs : result.rank_series) {
        if (rs.order != order || rs.mode != mode) continue;
        char label[96];
        std::snprintf(label, sizeof(label), "%s Nt=%ld",
                      scheme_label(order, mode).c_str(), rs.nt);
        curves.push_back(SvgCurve{label, rs.series, false});
      }
      for (const auto& rc : result.reference_curves) {
        if (rc.order != order || rc.mode != mode) continue;
        char label[96];
        std::snprintf(label, sizeof(label), "Ref-%d-%s", order,
                      mode == TruncationMode::Hard ? "H" : "S");
        curves.push_back(SvgCurve{label, rc.series, true});
      }
      char name[160];
      std::snprintf(name, sizeof(name), "%s-rank-%d-%s.svg",
                    cfg.problem.c_str(), order, to_string(mode));
      emit_rank_svg(curves, (fs::path(cfg.out_dir) / name).string());
    }
  }
}

}  // namespace lrsdc
