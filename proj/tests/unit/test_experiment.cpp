// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lrsdc/experiment.hpp"

using namespace lrsdc;

namespace {

constexpr Real kPi = std::numbers::pi;

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// Removes the wall_seconds column (the only nondeterministic one).
std::string strip_wall_column(const std::string& csv) {
  std::stringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    const auto last = line.rfind(',');
    out += line.substr(0, last);
    out += '\n';
  }
  return out;
}

/// Minimal XML well-formedness check: tag balance and quoted attributes.
bool xml_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  size_t i = 0;
  if (text.rfind("<?xml", 0) == 0) {
    i = text.find("?>");
    if (i == std::string::npos) return false;
    i += 2;
  }
  while (i < text.size()) {
    const size_t open = text.find('<', i);
    if (open == std::string::npos) break;
    const size_t close = text.find('>', open);
    if (close == std::string::npos) return false;
    std::string tag = text.substr(open + 1, close - open - 1);
    // Quotes must be balanced inside the tag.
    if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
    if (tag.starts_with('/')) {
      if (stack.empty()) return false;
      if (stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else if (!tag.ends_with('/')) {
      const size_t sp = tag.find_first_of(" \t\n");
      stack.push_back(sp == std::string::npos ? tag : tag.substr(0, sp));
    }
    i = close + 1;
  }
  return stack.empty();
}

std::filesystem::path temp_dir(const char* tag) {
  auto dir = std::filesystem::temp_directory_path() / tag;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE_BEGIN("fast");

TEST_CASE("config parsing round-trips the documented keys") {
  std::stringstream ss;
  ss << "problem = manufactured\n"
     << "nx = 64\nny = 32\n"
     << "t_final = 1.5\n"
     << "nt_list = 10, 20, 40\n"
     << "orders = 2, 3\n"
     << "modes = hard, soft\n"
     << "reference = exact\n"
     << "ref_refine = 8\n"
     << "out_dir = /tmp/somewhere\n"
     << "rank_stride = 2  # trailing comment\n"
     << "c_override = 3.5\n";
  ExperimentConfig cfg = parse_config(ss);
  cfg.validate();
  CHECK(cfg.problem == "manufactured");
  CHECK(cfg.nx == 64);
  CHECK(cfg.ny == 32);
  CHECK(cfg.t_final == 1.5);
  CHECK(cfg.nt_list == std::vector<long>{10, 20, 40});
  CHECK(cfg.orders == std::vector<int>{2, 3});
  CHECK(cfg.modes.size() == 2);
  CHECK(cfg.ref_refine == 8);
  CHECK(cfg.rank_stride == 2);
  CHECK(cfg.truncation_constant() == 3.5);
}

TEST_CASE("config validation rejects bad inputs") {
  ExperimentConfig cfg;
  cfg.problem = "manufactured";
  cfg.nt_list = {10, 20};
  cfg.orders = {};
  cfg.modes = {TruncationMode::Hard};
  CHECK_THROWS_AS(cfg.validate(), InvalidParameterError);  // empty orders
  cfg.orders = {2};
  cfg.problem = "bogus";
  CHECK_THROWS_AS(cfg.validate(), InvalidParameterError);
  cfg.problem = "manufactured";
  cfg.nt_list = {20, 10};
  CHECK_THROWS_AS(cfg.validate(), InvalidParameterError);
  std::stringstream ss("mystery_key = 1\n");
  CHECK_THROWS_AS(parse_config(ss), InvalidParameterError);
}

TEST_CASE("truncation constant formula") {
  // 2 / (4pi/200 + 4pi/200) = 50 / pi
  CHECK(default_truncation_constant(200, 200) ==
        doctest::Approx(50.0 / kPi).epsilon(1e-15));
  CHECK(default_truncation_constant(200, 200) ==
        doctest::Approx(15.91549).epsilon(1e-6));
}

TEST_CASE("emit_csv formats rows as specified") {
  const auto dir = temp_dir("lrsdc-csv-test");
  const std::string path = (dir / "table.csv").string();

  SUBCASE("zero rows give a header-only file") {
    emit_csv({}, path);
    CHECK(slurp(path) == "scheme,Nt,l2_error,rate,wall_seconds\n");
  }

  SUBCASE("one scheme with three step counts gives four lines") {
    std::vector<ConvergenceRow> rows(3);
    for (int i = 0; i < 3; ++i) {
      rows[i].scheme = "SDC-mBUG-2-H";
      rows[i].nt = 40L << i;
      rows[i].l2_error = 1e-4 / (1 << (2 * i));
      rows[i].wall_seconds = 0.25;
      if (i > 0) rows[i].rate = 2.0;
    }
    emit_csv(rows, path);
    const std::string text = slurp(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
    CHECK(text.find("SDC-mBUG-2-H,40,0.0001,,0.25\n") != std::string::npos);
    CHECK(text.find("SDC-mBUG-2-H,80,2.5e-05,2,0.25\n") != std::string::npos);

    // Parse-back reproduces the rows.
    std::stringstream in(text);
    std::string line;
    std::getline(in, line);
    int i = 0;
    while (std::getline(in, line)) {
      std::stringstream ls(line);
      std::string scheme, nt, err, rate, wall;
      std::getline(ls, scheme, ',');
      std::getline(ls, nt, ',');
      std::getline(ls, err, ',');
      std::getline(ls, rate, ',');
      std::getline(ls, wall, ',');
      CHECK(scheme == rows[i].scheme);
      CHECK(std::stol(nt) == rows[i].nt);
      CHECK(std::stod(err) == doctest::Approx(rows[i].l2_error).epsilon(1e-5));
      CHECK(rate.empty() == std::isnan(rows[i].rate));
      ++i;
    }
    CHECK(i == 3);
  }
}

TEST_CASE("emit_rank_svg produces well-formed XML") {
  const auto dir = temp_dir("lrsdc-svg-test");
  const std::string path = (dir / "rank.svg").string();
  std::vector<SvgCurve> curves;
  curves.push_back(SvgCurve{"flat", {{0.0, 3}, {0.5, 3}, {1.0, 3}}, false});
  curves.push_back(SvgCurve{"ref", {{0.0, 2}, {1.0, 4}}, true});
  emit_rank_svg(curves, path);
  const std::string text = slurp(path);
  CHECK(xml_well_formed(text));
  CHECK(text.find("<polyline") != std::string::npos);
  CHECK(text.find("stroke-dasharray") != std::string::npos);
}

TEST_CASE("run_experiment on a tiny manufactured config") {
  const auto dir = temp_dir("lrsdc-run-test");
  ExperimentConfig cfg;
  cfg.problem = "manufactured";
  cfg.nx = 32;
  cfg.ny = 32;
  cfg.nt_list = {10, 20};
  cfg.orders = {2};
  cfg.modes = {TruncationMode::Hard};
  cfg.reference = "exact";
  cfg.out_dir = (dir / "out").string();

  ExperimentResult result = run_experiment(cfg, 1);
  REQUIRE(result.rows.size() == 2);
  CHECK(std::isnan(result.rows[0].rate));
  CHECK(result.rows[1].rate >= 1.5);
  CHECK(result.rows[1].rate <= 2.6);
  CHECK(result.audit.ok());

  write_experiment_outputs(cfg, result, false);
  CHECK(std::filesystem::exists(dir / "out" / "manufactured-convergence.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "manufactured-2-hard-Nt10.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "manufactured-rank-2-hard.svg"));
  CHECK(xml_well_formed(slurp((dir / "out" / "manufactured-rank-2-hard.svg").string())));
}

TEST_CASE("rerunning a config is deterministic, including with jobs > 1") {
  const auto dir = temp_dir("lrsdc-determinism-test");
  ExperimentConfig cfg;
  cfg.problem = "manufactured";
  cfg.nx = 32;
  cfg.ny = 32;
  cfg.nt_list = {8, 16};
  cfg.orders = {2};
  cfg.modes = {TruncationMode::Hard, TruncationMode::Soft};
  cfg.reference = "exact";

  std::vector<std::string> tables;
  std::vector<std::string> series;
  for (int jobs : {1, 2, 1}) {
    cfg.out_dir = (dir / ("out-" + std::to_string(tables.size()))).string();
    ExperimentResult result = run_experiment(cfg, jobs);
    write_experiment_outputs(cfg, result, true);
    tables.push_back(strip_wall_column(
        slurp(cfg.out_dir + "/manufactured-convergence.csv")));
    series.push_back(slurp(cfg.out_dir + "/manufactured-2-soft-Nt16.csv"));
  }
  CHECK(tables[0] == tables[1]);
  CHECK(tables[0] == tables[2]);
  CHECK(series[0] == series[1]);
  CHECK(series[0] == series[2]);
}

TEST_SUITE_END();
