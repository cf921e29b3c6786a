#include <doctest.h>

#include <algorithm>

#include "contre/analysis.hpp"
#include "contre/experiment_config.hpp"
#include "contre/pipeline.hpp"
#include "contre/plots.hpp"
#include "support.hpp"

using namespace contre;
using contre::testing::kind_of;
using contre::testing::scratch_dir;
using contre::testing::slurp;
namespace fs = std::filesystem;

namespace {

/// `correct` of `total` records right for one model and view.
void add_view(std::vector<PredictionRecord>& out, const std::string& model, ViewKind view, int correct, int total) {
  for (int i = 0; i < total; ++i) {
    PredictionRecord r;
    r.model_id = model;
    r.view = view;
    r.sample_id = "s" + std::to_string(i);
    r.label = i % 2;
    r.pred = i < correct ? r.label : 1 - r.label;
    out.push_back(r);
  }
}

std::vector<PredictionRecord> cohort_records(const std::vector<std::array<int, 3>>& train_contre_test) {
  std::vector<PredictionRecord> out;
  for (std::size_t m = 0; m < train_contre_test.size(); ++m) {
    const auto id = "m" + std::to_string(m);
    add_view(out, id, ViewKind::TrainOrig, train_contre_test[m][0], 20);
    add_view(out, id, ViewKind::TrainContre, train_contre_test[m][1], 20);
    add_view(out, id, ViewKind::TestOrig, train_contre_test[m][2], 20);
  }
  return out;
}

ExperimentConfig small_config(const fs::path& out) {
  ExperimentConfig c = default_config(11);
  c.synthetic = {24, 24};
  c.models.clear();
  for (const auto& [id, widths, epochs] : {std::tuple{"lin", std::vector<int>{}, 1}, std::tuple{"mid", std::vector<int>{4}, 2},
                                           std::tuple{"wide", std::vector<int>{8}, 4}}) {
    ModelConfig m;
    m.model_id = id;
    m.hidden_widths = widths;
    m.epochs = epochs;
    m.batch_size = 8;
    m.init_seed = default_init_seed(c.seed, id);
    c.models.push_back(m);
  }
  c.out_dir = out;
  return c;
}

}  // namespace

TEST_CASE("identically ordered cohort correlates perfectly") {
  const auto records = cohort_records({{18, 10, 12}, {19, 14, 15}, {20, 16, 17}});
  const auto r = analyse(records, {});
  CHECK(r.find_correlation("test_vs_contre")->value == 1.0);
  CHECK(r.find_correlation("test_vs_train")->value == 1.0);
  CHECK(r.find_correlation("test_vs_contre")->model_ids == std::vector<std::string>{"m0", "m1", "m2"});
  CHECK(r.find_correlation("test_vs_contre")->x == "test_orig");
  CHECK(r.find_correlation("test_vs_contre")->y == "train_contre");
  // every rank vector equal, so the control is perfectly correlated
  CHECK(r.find_correlation("test_vs_contre_given_train")->status == "ControlDegenerate");
  CHECK(r.find_scores("m0")->consistency == 18.0 / 20 - 10.0 / 20);
  CHECK(r.find_scores("m0")->test_contre == std::nullopt);
  CHECK(r.fisher.empty());
  CHECK(r.has_degenerate());
}

TEST_CASE("constant test accuracy is a degenerate note, not a failure") {
  const auto records = cohort_records({{18, 10, 15}, {19, 14, 15}, {20, 16, 15}});
  const auto r = analyse(records, {});
  const auto* c = r.find_correlation("test_vs_contre");
  CHECK(c->value == std::nullopt);
  CHECK(c->status == "DegenerateVariance");
  CHECK(std::any_of(r.notes.begin(), r.notes.end(), [](const ReportNote& n) { return n.code == "DegenerateVariance"; }));
  CHECK(r.has_degenerate());
}

TEST_CASE("cohort and view preconditions") {
  CHECK(kind_of([] { analyse(cohort_records({{1, 2, 3}, {2, 3, 4}}), {}); }) == ErrorKind::InsufficientCohort);
  auto records = cohort_records({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}});
  std::erase_if(records, [](const PredictionRecord& r) { return r.model_id == "m1" && r.view == ViewKind::TestOrig; });
  CHECK(kind_of([&] { analyse(records, {}); }) == ErrorKind::EmptyDataset);
}

TEST_CASE("fisher analysis reduces wide features and reports the reduction") {
  Engine eng(31);
  std::vector<PredictionRecord> records = cohort_records({{10, 8, 9}, {12, 9, 11}, {14, 12, 13}});
  for (auto& r : records) {
    if (r.view != ViewKind::TrainOrig && r.view != ViewKind::TrainContre) continue;
    const int d = r.model_id == "m0" ? 40 : 3;
    std::vector<float> f(static_cast<std::size_t>(d));
    for (auto& v : f) v = static_cast<float>(uniform_real(eng, -1, 1) + 2.0 * r.label);
    r.feature = f;
  }
  AnalysisOptions opts;
  opts.reduce_dim = 4;
  const auto rep = analyse(records, opts);
  REQUIRE(rep.fisher.size() == 6);
  for (const auto& f : rep.fisher) {
    CHECK(f.status == "ok");
    CHECK(f.ratio.has_value());
    if (f.model_id == "m0") {
      CHECK(f.feature_dim == 40);
      CHECK(f.reduced_dim == 4);
      CHECK(*f.retained_variance > 0.0);
      CHECK(*f.retained_variance <= 1.0);
    } else {
      CHECK(f.reduced_dim == std::nullopt);
    }
  }
  CHECK(rep.find_correlation("test_vs_fisher_train_contre") != nullptr);
  CHECK(rep.find_correlation("test_vs_fisher_train_orig")->model_ids.size() == 3);

  opts.reduce_dim = 500;
  const auto too_big = fisher_for(records, "m0", ViewKind::TrainOrig, opts);
  CHECK(too_big.status == "DimensionTooLarge");
  CHECK(too_big.ratio == std::nullopt);
}

TEST_CASE("config documents round-trip and reject mistakes") {
  const auto c = default_config(7);
  CHECK(c.models.size() == 10);
  CHECK(c.policy.n_ops == 2);
  CHECK(c.policy.magnitude == 20.0);
  const auto back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.models == c.models);

  // defaults resolve from the seed
  auto doc = nlohmann::ordered_json::parse(R"({"seed": 5, "cohort": {"models": [{"model_id": "a", "epochs": 3}]}})");
  const auto small = config_from_json(doc);
  CHECK(small.policy.master_seed == 5);
  CHECK(small.models.size() == 1);
  CHECK(small.models[0].init_seed == default_init_seed(5, "a"));
  CHECK(config_from_json(nlohmann::ordered_json::object()).models == default_cohort(7));

  auto bad = [](const char* text) { return kind_of([&] { config_from_json(nlohmann::ordered_json::parse(text)); }); };
  CHECK(bad(R"({"sed": 5})") == ErrorKind::Config);
  CHECK(bad(R"({"seed": -1})") == ErrorKind::Config);
  CHECK(bad(R"({"policy": {"n_ops": 2.5}})") == ErrorKind::Config);
  CHECK(bad(R"({"policy": {"magnitude": 31}})") == ErrorKind::InvalidMagnitude);
  CHECK(bad(R"({"policy": {"op_pool": ["Cutout"]}})") == ErrorKind::UnknownOperator);
  CHECK(bad(R"({"fisher": {"within_weighting": "other"}})") == ErrorKind::Config);
  CHECK(bad(R"({"data": {"train_manifest": "a.csv"}})") == ErrorKind::Config);
  CHECK(bad(R"({"cohort": {"models": [{"model_id": "a"}, {"model_id": "a"}]}})") == ErrorKind::Config);
  CHECK(bad(R"({"cohort": {"models": [{"model_id": "a", "batch_size": 0}]}})") == ErrorKind::Config);
  CHECK(bad(R"({"sweep": {"m_values": [40]}})") == ErrorKind::Config);

  const auto prov = provenance(c);
  CHECK(!prov.contains("out_dir"));
  CHECK(!prov.contains("threads"));
  CHECK(prov["excluded_operators"][0] == "Cutout");
  CHECK(prov["policy"]["resolved_pool"].size() == 16);
}

TEST_CASE("pipeline writes a complete, reproducible run") {
  const auto a = scratch_dir("pipeline_a");
  const auto b = scratch_dir("pipeline_b");
  auto config = small_config(a);
  config.contre_test = true;
  const auto report = run_pipeline(config);
  config.out_dir = b;
  config.threads = 2;
  const auto again = run_pipeline(config);

  CHECK(report == again);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(read_report(a / "report.json") == report);
  for (const char* f : {"test_vs_contre.svg", "test_vs_contre.csv", "test_vs_fisher_train_contre.svg"}) {
    REQUIRE(fs::exists(a / "plots" / f));
    CHECK(slurp(a / "plots" / f) == slurp(b / "plots" / f));
  }
  CHECK(fs::exists(a / "contre_train" / "manifest.csv"));
  CHECK(fs::exists(a / "contre_test" / "manifest.csv"));

  REQUIRE(report.scores.size() == 3);
  for (const auto& s : report.scores) {
    CHECK(s.test_contre.has_value());
    CHECK(*s.consistency == *s.train_orig - *s.train_contre);
  }
  CHECK(report.find_correlation("test_contre_vs_contre") != nullptr);
  CHECK(report.fisher.size() == 6);
  CHECK(report.config["seed"] == 11);

  // written prediction files are what scoring consumes
  std::vector<PredictionRecord> all;
  for (const char* id : {"lin", "mid", "wide"}) {
    auto r = read_predictions(a / "predictions" / (std::string(id) + ".jsonl"));
    CHECK(r.size() == 24 * 4);
    all.insert(all.end(), r.begin(), r.end());
  }
  for (const auto& t : score(all)) {
    for (const auto& row : t.rows) {
      const auto* s = report.find_scores(row.model_id);
      const auto expected = t.view == ViewKind::TrainOrig     ? s->train_orig
                            : t.view == ViewKind::TrainContre ? s->train_contre
                            : t.view == ViewKind::TestOrig    ? s->test_orig
                                                              : s->test_contre;
      CHECK(row.accuracy == *expected);
    }
  }
}

TEST_CASE("external prediction files join the cohort") {
  const auto dir = scratch_dir("pipeline_external");
  auto config = small_config(dir / "run");
  config.fisher = false;
  std::vector<PredictionRecord> ext;
  add_view(ext, "zz_external", ViewKind::TrainOrig, 20, 20);
  add_view(ext, "zz_external", ViewKind::TrainContre, 20, 20);
  add_view(ext, "zz_external", ViewKind::TestOrig, 20, 20);
  write_predictions(ext, dir / "ext.jsonl");
  config.prediction_files = {dir / "ext.jsonl"};
  const auto report = run_pipeline(config);
  REQUIRE(report.scores.size() == 4);
  CHECK(report.scores.back().model_id == "zz_external");
  CHECK(report.scores.back().test_orig == 1.0);
  CHECK(report.fisher.empty());
  CHECK(!fs::exists(dir / "run" / "plots" / "test_vs_fisher_train_contre.svg"));
}

TEST_CASE("sweeps reuse the session and match independent runs") {
  const auto dir = scratch_dir("sweep");
  auto config = small_config(dir / "session");
  config.policy.op_pool = {"Identity", "Invert", "Rotate"};
  const Session session(config);

  SUBCASE("N x M grid is order independent and matches run_pipeline") {
    const std::vector<std::pair<int, double>> forward{{1, 4}, {1, 20}, {2, 4}, {2, 20}};
    const std::vector<std::pair<int, double>> backward(forward.rbegin(), forward.rend());
    const auto a = sweep_nm(session, forward);
    const auto b = sweep_nm(session, backward);
    write_nm_csv(a, dir / "a.csv");
    write_nm_csv(b, dir / "b.csv");
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    REQUIRE(a.size() == 4);
    for (const auto& cell : a) CHECK((cell.spearman.has_value() || cell.status != "ok"));

    auto single = config;
    single.out_dir = dir / "independent";
    const auto report = run_pipeline(single);
    const auto& cell = a[3];
    REQUIRE(cell.n == 2);
    REQUIRE(cell.m == 20.0);
    CHECK(cell.spearman == report.find_correlation("test_vs_contre")->value);
    CHECK(cell.status == report.find_correlation("test_vs_contre")->status);
  }

  SUBCASE("single operators") {
    const auto rows = sweep_single_ops(session);
    REQUIRE(rows.size() == 3);
    const auto& identity = rows[0];
    REQUIRE(identity.ops == std::vector<std::string>{"Identity"});
    const auto base = session.evaluate_policy(config.policy);
    for (const auto& [id, acc] : identity.contre_accuracy) CHECK(acc == *base.find_scores(id)->train_orig);
    CHECK(identity.spearman == base.find_correlation("test_vs_train")->value);
    write_single_ops_csv(rows, dir / "single.csv");
    CHECK(slurp(dir / "single.csv").rfind("op,spearman_test_contre,status,contre_accuracy:lin", 0) == 0);
  }

  SUBCASE("operator pairs") {
    const auto m = sweep_pairs(session);
    REQUIRE(m.cells.size() == 3);
    const auto singles = sweep_single_ops(session);
    for (std::size_t i = 0; i < 3; ++i) {
      REQUIRE(m.cells[i].size() == 3);
      CHECK(m.cells[i][i].ops.size() == 1);
      CHECK(m.cells[i][i].contre_accuracy == singles[i].contre_accuracy);
    }
    CHECK(m.cells[1][2].ops == std::vector<std::string>{"Invert", "Rotate"});
    CHECK(m.cells[2][1].ops == std::vector<std::string>{"Rotate", "Invert"});
    write_pairs_csv(m, dir / "pairs.csv");
    CHECK(slurp(dir / "pairs.csv").rfind("first\\second,Identity,Invert,Rotate\n", 0) == 0);
  }
}

TEST_CASE("plot files") {
  const auto records = cohort_records({{18, 10, 12}, {19, 14, 15}, {20, 16, 17}, {17, 9, 11}});
  auto report = analyse(records, {});
  const auto figs = figures_for(report);
  // the partial correlation is not plotted
  CHECK(std::none_of(figs.begin(), figs.end(), [](const Figure& f) { return f.name == "test_vs_contre_given_train"; }));
  const auto it = std::find_if(figs.begin(), figs.end(), [](const Figure& f) { return f.name == "test_vs_contre"; });
  REQUIRE(it != figs.end());
  CHECK(it->points.size() == 4);
  CHECK(it->points[0].x == 10.0 / 20);
  CHECK(it->points[0].y == 12.0 / 20);

  const auto csv = figure_csv(*it);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.rfind("model_id,x,y\nm0,0.5,0.6\n", 0) == 0);
  const auto svg = figure_svg(*it);
  CHECK(svg == figure_svg(*it));
  CHECK(svg.find("<svg") == 0);
  CHECK(std::count(svg.begin(), svg.end(), 'c') > 0);

  const auto dir = scratch_dir("plots");
  const auto written = emit_plots(report, dir);
  CHECK(std::none_of(written.begin(), written.end(),
                     [](const fs::path& p) { return p.filename().string().find("fisher") != std::string::npos; }));
  CHECK(written.size() == 2 * figs.size());
}
