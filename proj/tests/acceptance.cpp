// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "contre/contrastive_set.hpp"
#include "contre/experiment_config.hpp"
#include "contre/image_ops.hpp"
#include "contre/pipeline.hpp"
#include "contre/png_io.hpp"
#include "contre/stats.hpp"
#include "oracles.hpp"

using namespace contre;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, const char* fmt = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("contre_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Image random_image(Engine& eng, int w, int h, int c) {
  Image img(w, h, c);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(uniform_index(eng, 256));
  return img;
}

std::vector<double> untied(Engine& eng, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i) + uniform_real(eng, 0.0, 0.5);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(x[i], x[uniform_index(eng, i + 1)]);
  return x;
}

Outcome spearman_oracle() {
  const auto t0 = Clock::now();
  Engine eng(101);
  double worst = 0;
  bool ranks_exact = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(3 + uniform_index(eng, 198));
    const auto x = untied(eng, n);
    const auto y = untied(eng, n);
    worst = std::max(worst, std::abs(stats::spearman(x, y) - oracles::closed_form_spearman(x, y)));

    std::vector<double> tied(n);
    for (auto& v : tied) v = static_cast<double>(uniform_index(eng, 1 + n / 4));
    for (const std::vector<double>* v : {&x, static_cast<const std::vector<double>*>(&tied)}) {
      const auto r = stats::rank_transform(*v);
      const auto oracle = oracles::brute_force_ranks(*v);
      ranks_exact = ranks_exact && std::equal(oracle.begin(), oracle.end(), r.values.data());
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && ranks_exact && t < 5.0,
          "max |err| " + num(worst) + ", ranks exact: " + (ranks_exact ? "yes" : "no") + ", " + num(t, "%.2f") + " s"};
}

Outcome partial_oracle() {
  Engine eng(202);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(4 + uniform_index(eng, 197));
    const auto x = untied(eng, n), y = untied(eng, n), z = untied(eng, n);
    const double rxy = oracles::closed_form_spearman(x, y);
    const double rxz = oracles::closed_form_spearman(x, z);
    const double ryz = oracles::closed_form_spearman(y, z);
    const double oracle = (rxy - rxz * ryz) / std::sqrt((1 - rxz * rxz) * (1 - ryz * ryz));
    worst = std::max(worst, std::abs(stats::partial_spearman(x, y, z) - oracle));
  }
  bool control_degenerate = false;
  const auto x = untied(eng, 30), y = untied(eng, 30);
  try {
    stats::partial_spearman(x, y, x);
  } catch (const Error& e) {
    control_degenerate = e.kind() == ErrorKind::ControlDegenerate;
  }
  return {worst <= 1e-12 && control_degenerate,
          "max |err| " + num(worst) + ", z = x -> " + (control_degenerate ? "ControlDegenerate" : "no error")};
}

Outcome fisher_oracle() {
  Engine eng(303);
  double worst_inverse = 0, worst_invariance = 0, worst_total = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = oracles::random_instance(eng);
    const auto pair = stats::scatter_matrices(inst.features, inst.labels);
    const auto [s_w, s_b] = oracles::loop_scatter(inst.features, inst.labels);
    const double ratio = stats::fisher_ratio(pair, 0.0);
    worst_inverse = std::max(worst_inverse, rel_err(ratio, oracles::explicit_inverse_fisher(s_w, s_b)));

    const Eigen::MatrixXd a = oracles::well_conditioned_map(eng, inst.features.cols());
    const Eigen::MatrixXd mapped = inst.features * a.transpose();
    const double mapped_ratio = stats::fisher_ratio(stats::scatter_matrices(mapped, inst.labels), 0.0);
    worst_invariance = std::max(worst_invariance, rel_err(mapped_ratio, ratio));

    const Eigen::MatrixXd total = oracles::total_scatter(inst.features);
    worst_total = std::max(worst_total, (pair.s_b + pair.s_w - total).norm() / total.norm());
  }
  return {worst_inverse <= 1e-8 && worst_invariance <= 1e-6 && worst_total <= 1e-10,
          "explicit inverse " + num(worst_inverse) + ", linear map " + num(worst_invariance) + ", S_b+S_w " +
              num(worst_total) + " (relative)"};
}

Outcome transform_engine() {
  Engine eng(404);
  bool neutral = true;
  for (int trial = 0; trial < 16; ++trial) {
    const Image img = random_image(eng, 6 + trial, 9 + trial, trial % 2 ? 3 : 1);
    neutral = neutral && apply_op(find_operator("Identity"), 30, -1, img) == img;
    for (const auto& op : operator_table()) {
      if (op.name == "AutoContrast" || op.name == "Equalize" || op.name == "Invert") continue;
      neutral = neutral && apply_op(op, 0, +1, img) == img && apply_op(op, 0, -1, img) == img;
    }
    neutral = neutral && ops::posterize(img, 8) == img && ops::solarize(img, 256) == img &&
              ops::rotate(img, 0.0) == img && ops::affine(img, 1, 0, 0, 0, 1, 0) == img &&
              ops::color(img, 1.0) == img && ops::contrast(img, 1.0) == img && ops::brightness(img, 1.0) == img &&
              ops::sharpness(img, 1.0) == img;
  }

  Image all(256, 1, 1);
  for (int v = 0; v < 256; ++v) all.at(v, 0, 0) = static_cast<std::uint8_t>(v);
  bool tables = true;
  for (int bits = 0; bits <= 8; ++bits) {
    const Image out = ops::posterize(all, bits);
    for (int v = 0; v < 256; ++v) tables = tables && out.at(v, 0, 0) == (bits == 0 ? 0 : (v >> (8 - bits)) << (8 - bits));
  }
  for (int t = 0; t <= 256; ++t) {
    const Image out = ops::solarize(all, t);
    for (int v = 0; v < 256; ++v) tables = tables && out.at(v, 0, 0) == (v < t ? v : 255 - v);
  }

  const auto dir = fresh_dir("generation");
  std::vector<DatasetEntry> dataset;
  for (int i = 0; i < 12; ++i) {
    const std::string id = "img" + std::to_string(i);
    write_png(random_image(eng, 16, 12, 3), dir / (id + ".png"));
    dataset.push_back({id, dir / (id + ".png"), i % 3});
  }
  const auto policy = default_policy(7);
  const auto m1 = generate_contrastive_set(policy, dataset, 2, dir / "run1");
  generate_contrastive_set(policy, dataset, 2, dir / "run2");
  std::reverse(dataset.begin(), dataset.end());
  std::rotate(dataset.begin(), dataset.begin() + 5, dataset.end());
  generate_contrastive_set(policy, dataset, 2, dir / "run3", 3);
  bool identical = true;
  for (const auto& name : {fs::path(kGenerationManifestName)}) {
    identical = identical && slurp(dir / "run1" / name) == slurp(dir / "run2" / name) &&
                slurp(dir / "run1" / name) == slurp(dir / "run3" / name);
  }
  for (const auto& row : m1.rows) {
    const auto a = slurp(dir / "run1" / row.path);
    identical = identical && a == slurp(dir / "run2" / row.path) && a == slurp(dir / "run3" / row.path);
  }

  // 14 operators, 7000 views of 2 draws; upper 0.1% point of chi-square(13)
  constexpr double kCritical = 34.52817897487089;
  AugmentPolicy sampling;
  sampling.op_pool = operator_names();
  std::erase(sampling.op_pool, "Identity");
  std::erase(sampling.op_pool, "SolarizeAdd");
  sampling.master_seed = 7;
  std::map<std::string, int> counts;
  for (int i = 0; i < 7000; ++i) {
    for (const auto& op : sample_view(sampling, "sample_" + std::to_string(i), 1).chosen_ops) ++counts[op.name];
  }
  double chi2 = 0;
  for (const auto& name : sampling.op_pool) chi2 += std::pow(counts[name] - 1000.0, 2) / 1000.0;

  return {neutral && tables && identical && sampling.op_pool.size() == 14 && chi2 < kCritical,
          std::string("neutral ") + (neutral ? "exact" : "DIFFER") + ", tables " + (tables ? "exact" : "DIFFER") +
              ", generation " + (identical ? "identical" : "DIFFER") + ", chi2 " + num(chi2, "%.2f") + " < " +
              num(kCritical, "%.2f")};
}

Outcome svd_reduction() {
  Eigen::MatrixXd f(4, 2);
  f << 3, 1, -3, 1, 3, -1, -3, -1;
  const double fraction = stats::svd_reduce(f, 1).retained_variance;
  Eigen::MatrixXd low(10, 5);
  Engine eng(505);
  Eigen::MatrixXd basis(2, 5), coef(10, 2);
  for (Eigen::Index i = 0; i < basis.size(); ++i) basis(i) = uniform_real(eng, -1, 1);
  for (Eigen::Index i = 0; i < coef.size(); ++i) coef(i) = uniform_real(eng, -3, 3);
  low = coef * basis;
  const double full = stats::svd_reduce(low, 2).retained_variance;
  return {std::abs(fraction - 0.9) <= 1e-10 && std::abs(full - 1.0) <= 1e-10,
          "(9,1) fixture " + num(fraction, "%.12f") + ", rank-2 at target 2 " + num(full, "%.12f")};
}

struct EndToEnd {
  CorrelationReport report;
  fs::path dir;
  double seconds = 0;
};

EndToEnd run_e2e(const std::string& name, unsigned threads) {
  auto config = default_config(7);
  config.out_dir = fresh_dir(name);
  config.threads = threads;
  const auto t0 = Clock::now();
  auto report = run_pipeline(config);
  return {std::move(report), config.out_dir, seconds_since(t0)};
}

std::optional<double> value_of(const CorrelationReport& r, const std::string& name) {
  const auto* c = r.find_correlation(name);
  return c ? c->value : std::nullopt;
}

Outcome end_to_end(const EndToEnd& run) {
  const auto contre = value_of(run.report, "test_vs_contre");
  const auto fisher = value_of(run.report, "test_vs_fisher_train_contre");
  return {contre && *contre >= 0.6 && fisher && *fisher > 0 && run.seconds < 180,
          "spearman(test, contre) " + (contre ? num(*contre, "%.4f") : "n/a") + " >= 0.6, spearman(test, fisher) " +
              (fisher ? num(*fisher, "%.4f") : "n/a") + " > 0, " + num(run.seconds, "%.1f") + " s"};
}

Outcome ablation_direction() {
  auto config = default_config(7);
  config.out_dir = fresh_dir("ablation");
  const Session session(config);
  const std::vector<std::pair<int, double>> cells{{2, 4.0}, {2, 20.0}};
  const auto grid = sweep_nm(session, cells);
  const auto& m4 = grid[0];
  const auto& m20 = grid[1];
  return {m4.spearman && m20.spearman && *m20.spearman >= *m4.spearman,
          "N=2: M=20 " + (m20.spearman ? num(*m20.spearman, "%.4f") : m20.status) + " >= M=4 " +
              (m4.spearman ? num(*m4.spearman, "%.4f") : m4.status)};
}

Outcome report_determinism(const EndToEnd& a, const EndToEnd& b) {
  bool same = slurp(a.dir / "report.json") == slurp(b.dir / "report.json") && !slurp(a.dir / "report.json").empty();
  int svgs = 0;
  for (const auto& entry : fs::directory_iterator(a.dir / "plots")) {
    if (entry.path().extension() != ".svg") continue;
    ++svgs;
    same = same && slurp(entry.path()) == slurp(b.dir / "plots" / entry.path().filename());
  }
  return {same && svgs > 0, "report.json and " + std::to_string(svgs) + " SVG files " +
                                (same ? "byte-identical" : "DIFFER") + " across runs (threads 0 vs 1)"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&failures](const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  %-22s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };

  report("spearman_oracle", spearman_oracle);
  report("partial_correlation", partial_oracle);
  report("fisher_ratio", fisher_oracle);
  report("transform_engine", transform_engine);
  report("svd_reduction", svd_reduction);

  std::optional<EndToEnd> first, second;
  report("end_to_end", [&] {
    first = run_e2e("e2e_a", 0);
    return end_to_end(*first);
  });
  report("ablation_direction", ablation_direction);
  report("report_determinism", [&] {
    if (!first) first = run_e2e("e2e_a", 0);
    second = run_e2e("e2e_b", 1);
    return report_determinism(*first, *second);
  });

  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
