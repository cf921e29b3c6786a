#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "contre/analysis.hpp"
#include "contre/contrastive_set.hpp"
#include "contre/error.hpp"
#include "contre/experiment_config.hpp"
#include "contre/format.hpp"
#include "contre/manifest.hpp"
#include "contre/pipeline.hpp"
#include "contre/plots.hpp"
#include "contre/predictions.hpp"
#include "contre/report.hpp"

namespace fs = std::filesystem;
using contre::ErrorKind;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kDegenerateExit = 4;

struct Flags {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
  std::optional<unsigned> threads;
  std::vector<int> n;
  std::vector<double> m;
  std::optional<int> views;
  std::optional<fs::path> data;
  std::optional<fs::path> test;
  std::vector<fs::path> pred;
  std::optional<int> reduce_dim;
  std::optional<std::string> within_weighting;
  std::optional<std::string> kind;
  bool contre_test = false;
  fs::path report;
};

[[noreturn]] void config_error(const std::string& msg) { throw contre::Error(ErrorKind::Config, msg); }

/// Config file (or an empty document) with every given flag written over it.
ojson config_document(const Flags& f, bool sweep) {
  ojson doc = f.config ? contre::load_config_document(*f.config) : ojson::object();
  if (!doc.is_object()) config_error("configuration document must be a JSON object");
  auto section = [&doc](const char* key) -> ojson& {
    auto& s = doc[key];
    if (s.is_null()) s = ojson::object();
    if (!s.is_object()) config_error(std::string("config.") + key + " must be an object");
    return s;
  };
  if (f.seed) doc["seed"] = *f.seed;
  if (f.out) doc["out_dir"] = f.out->string();
  if (f.threads) doc["threads"] = *f.threads;
  if (f.views) doc["views_per_sample"] = *f.views;
  if (sweep) {
    if (!f.n.empty()) section("sweep")["n_values"] = f.n;
    if (!f.m.empty()) section("sweep")["m_values"] = f.m;
    if (f.kind) section("sweep")["kind"] = *f.kind;
  } else {
    if (f.n.size() > 1 || f.m.size() > 1) config_error("--n and --m take a single value outside 'sweep'");
    if (!f.n.empty()) section("policy")["n_ops"] = f.n[0];
    if (!f.m.empty()) section("policy")["magnitude"] = f.m[0];
  }
  if (f.data) section("data")["train_manifest"] = f.data->string();
  if (f.test) section("data")["test_manifest"] = f.test->string();
  if (!f.pred.empty()) {
    auto& cohort = section("cohort");
    auto& files = cohort["prediction_files"];
    if (files.is_null()) files = ojson::array();
    if (!files.is_array()) config_error("config.cohort.prediction_files must be an array");
    for (const auto& p : f.pred) files.push_back(p.string());
  }
  if (f.reduce_dim) section("fisher")["reduce_dim"] = *f.reduce_dim;
  if (f.within_weighting) section("fisher")["within_weighting"] = *f.within_weighting;
  if (f.contre_test) doc["contre_test"] = true;
  return doc;
}

contre::ExperimentConfig resolve(const Flags& f, bool sweep = false) {
  return contre::config_from_json(config_document(f, sweep));
}

std::string value_text(const std::optional<double>& v, const std::string& status) {
  return v ? contre::format_fixed(*v, 4) : status;
}

void print_summary(const contre::CorrelationReport& r) {
  for (const auto& s : r.scores) {
    std::cout << s.model_id << "  train_orig " << value_text(s.train_orig, "-") << "  train_contre "
              << value_text(s.train_contre, "-") << "  test_orig " << value_text(s.test_orig, "-") << '\n';
  }
  for (const auto& c : r.correlations) std::cout << c.name << "  " << value_text(c.value, c.status) << '\n';
  for (const auto& f : r.fisher) {
    std::cout << "fisher " << f.model_id << ' ' << f.view << "  " << value_text(f.ratio, f.status) << '\n';
  }
}

std::vector<contre::PredictionRecord> read_all(const std::vector<fs::path>& files) {
  std::vector<contre::PredictionRecord> records;
  for (const auto& p : files) {
    auto r = contre::read_predictions(p);
    records.insert(records.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  }
  return records;
}

int finish(const contre::CorrelationReport& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw contre::Error(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
  contre::write_report(report, dir / "report.json");
  contre::emit_plots(report, dir / "plots");
  print_summary(report);
  std::cout << "report: " << (dir / "report.json").string() << '\n';
  return report.has_degenerate() ? kDegenerateExit : 0;
}

int cmd_gen(Flags f) {
  // --data names the one manifest to transform, not the train/test pair
  const auto flag_data = std::exchange(f.data, std::nullopt);
  const auto config = resolve(f);
  const auto data = flag_data ? flag_data : config.train_manifest;
  if (!data) config_error("gen needs a dataset manifest (--data)");
  const auto dataset = contre::read_dataset_manifest(*data);
  const auto manifest =
      contre::generate_contrastive_set(config.policy, dataset, config.views_per_sample, config.out_dir, config.threads);
  std::cout << manifest.rows.size() << " views written to " << config.out_dir.string() << '\n';
  return 0;
}

int cmd_score(const Flags& f) {
  const auto tables = contre::score(read_all(f.pred));
  std::ostringstream out;
  out << "view,model_id,accuracy,correct,sample_count\n";
  for (const auto& t : tables) {
    for (const auto& row : t.rows) {
      out << contre::to_string(t.view) << ',' << row.model_id << ',' << contre::format_double(row.accuracy) << ','
          << row.correct << ',' << row.sample_count << '\n';
    }
  }
  if (f.out) {
    std::ofstream file(*f.out, std::ios::binary);
    if (!(file << out.str())) throw contre::Error(ErrorKind::Io, "cannot write '" + f.out->string() + "'");
  } else {
    std::cout << out.str();
  }
  return 0;
}

int cmd_analyse(const Flags& f, bool fisher) {
  const auto config = resolve(f);
  contre::AnalysisOptions options;
  options.fisher = fisher;
  options.reduce_dim = config.reduce_dim;
  options.within_weighting = config.within_weighting;
  auto report = contre::analyse(read_all(f.pred), options);
  ojson files = ojson::array();
  for (const auto& p : f.pred) files.push_back(p.string());
  report.config = ojson{{"prediction_files", files}};
  if (fisher) {
    report.config["fisher"] = {{"reduce_dim", config.reduce_dim ? ojson(*config.reduce_dim) : ojson(nullptr)},
                               {"within_weighting", to_string(config.within_weighting)}};
  }
  report.config["software"] = {{"name", "contre"}, {"version", contre::kSoftwareVersion}};
  return finish(report, config.out_dir);
}

int cmd_sweep(const Flags& f) {
  const auto config = resolve(f, true);
  const contre::Session session(config);
  bool degenerate = false;
  fs::path path;
  switch (config.sweep.kind) {
    case contre::SweepKind::Nm: {
      std::vector<std::pair<int, double>> cells;
      for (int n : config.sweep.n_values) {
        for (double m : config.sweep.m_values) cells.emplace_back(n, m);
      }
      const auto grid = contre::sweep_nm(session, cells);
      path = config.out_dir / "sweep_nm.csv";
      contre::write_nm_csv(grid, path);
      for (const auto& c : grid) {
        std::cout << "N=" << c.n << " M=" << contre::format_double(c.m) << "  " << value_text(c.spearman, c.status)
                  << '\n';
        degenerate = degenerate || c.status != "ok";
      }
      break;
    }
    case contre::SweepKind::SingleOps: {
      const auto rows = contre::sweep_single_ops(session);
      path = config.out_dir / "sweep_single.csv";
      contre::write_single_ops_csv(rows, path);
      for (const auto& r : rows) {
        std::cout << r.ops[0] << "  " << value_text(r.spearman, r.status) << '\n';
        degenerate = degenerate || r.status != "ok";
      }
      break;
    }
    case contre::SweepKind::Pairs: {
      const auto matrix = contre::sweep_pairs(session);
      path = config.out_dir / "sweep_pairs.csv";
      contre::write_pairs_csv(matrix, path);
      for (const auto& row : matrix.cells) {
        for (const auto& c : row) degenerate = degenerate || c.status != "ok";
      }
      std::cout << matrix.ops.size() << 'x' << matrix.ops.size() << " pair matrix\n";
      break;
    }
  }
  std::cout << "sweep: " << path.string() << '\n';
  return degenerate ? kDegenerateExit : 0;
}

int cmd_e2e(const Flags& f) {
  const auto config = resolve(f);
  const auto report = contre::run_pipeline(config);
  print_summary(report);
  std::cout << "report: " << (config.out_dir / "report.json").string() << '\n';
  return report.has_degenerate() ? kDegenerateExit : 0;
}

int cmd_report(const Flags& f) {
  const auto report = contre::read_report(f.report);
  const auto dir = f.out ? *f.out : f.report.parent_path() / "plots";
  const auto written = contre::emit_plots(report, dir);
  print_summary(report);
  std::cout << written.size() << " plot files written to " << dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive-example generalization analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "JSON configuration document; flags override it")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "master seed");
  app.add_option("--out", f.out, "output directory (file for 'score')");
  app.add_option("--threads", f.threads, "worker threads, 0 = hardware concurrency");

  auto policy_flags = [&f](CLI::App* cmd, bool lists) {
    if (lists) {
      cmd->add_option("--n", f.n, "operators per view (comma list)")->delimiter(',');
      cmd->add_option("--m", f.m, "magnitude in [0, 30] (comma list)")->delimiter(',');
    } else {
      cmd->add_option("--n", f.n, "operators per view")->expected(1);
      cmd->add_option("--m", f.m, "magnitude in [0, 30]")->expected(1);
    }
  };
  auto fisher_flags = [&f](CLI::App* cmd) {
    cmd->add_option("--reduce-dim", f.reduce_dim, "SVD target dimension when features are reduced");
    cmd->add_option("--within-weighting", f.within_weighting, "standard | count_weighted");
  };

  auto* gen = app.add_subcommand("gen", "write contrastive views of a dataset manifest");
  policy_flags(gen, false);
  gen->add_option("--views", f.views, "views per sample");
  gen->add_option("--data", f.data, "dataset manifest (path,label,sample_id)");

  auto* score = app.add_subcommand("score", "accuracy per model and view");
  score->add_option("--pred", f.pred, "prediction files (JSON lines)")->required();

  auto* correlate = app.add_subcommand("correlate", "rank correlations over a cohort of prediction files");
  correlate->add_option("--pred", f.pred, "prediction files (JSON lines)")->required();

  auto* fisher = app.add_subcommand("fisher", "correlations plus Fisher ratios of the recorded features");
  fisher->add_option("--pred", f.pred, "prediction files with features")->required();
  fisher_flags(fisher);

  auto* sweep = app.add_subcommand("sweep", "ablation over N x M, single operators or operator pairs");
  sweep->add_option("--kind", f.kind, "nm | single | pairs");
  policy_flags(sweep, true);
  sweep->add_option("--views", f.views, "views per sample");
  sweep->add_option("--data", f.data, "training manifest");
  sweep->add_option("--test", f.test, "test manifest");

  auto* e2e = app.add_subcommand("e2e", "train the cohort, generate, predict, analyse and report");
  policy_flags(e2e, false);
  e2e->add_option("--views", f.views, "views per sample");
  e2e->add_option("--data", f.data, "training manifest");
  e2e->add_option("--test", f.test, "test manifest");
  e2e->add_option("--pred", f.pred, "external prediction files joining the cohort");
  e2e->add_flag("--contre-test", f.contre_test, "also score contrastive views of the test set");
  fisher_flags(e2e);

  auto* report = app.add_subcommand("report", "re-render the plots of a report");
  report->add_option("report", f.report, "report.json")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : contre::exit_code_for(ErrorKind::Config);
  }

  try {
    if (*gen) return cmd_gen(f);
    if (*score) return cmd_score(f);
    if (*correlate) return cmd_analyse(f, false);
    if (*fisher) return cmd_analyse(f, true);
    if (*sweep) return cmd_sweep(f);
    if (*e2e) return cmd_e2e(f);
    if (*report) return cmd_report(f);
  } catch (const contre::Error& e) {
    std::cerr << "contre: " << e.what() << '\n';
    return contre::exit_code_for(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "contre: Config: " << e.what() << '\n';
    return contre::exit_code_for(ErrorKind::Config);
  } catch (const std::exception& e) {
    std::cerr << "contre: " << e.what() << '\n';
    return contre::exit_code_for(ErrorKind::Io);
  }
  return 0;
}
