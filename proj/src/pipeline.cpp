#include "contre/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "contre/analysis.hpp"
#include "contre/contrastive_set.hpp"
#include "contre/csv.hpp"
#include "contre/error.hpp"
#include "contre/format.hpp"
#include "contre/parallel.hpp"
#include "contre/plots.hpp"
#include "contre/png_io.hpp"
#include "contre/shapes.hpp"

namespace contre {
namespace fs = std::filesystem;

namespace {

std::ofstream open_for_writing(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  return out;
}

OpCorrelation summarise(std::vector<std::string> ops, const CorrelationReport& report) {
  OpCorrelation row;
  row.ops = std::move(ops);
  const auto* c = report.find_correlation("test_vs_contre");
  row.spearman = c->value;
  row.status = c->status;
  for (const auto& s : report.scores) row.contre_accuracy.emplace_back(s.model_id, *s.train_contre);
  return row;
}

std::string cell_text(const OpCorrelation& c) { return c.spearman ? format_double(*c.spearman) : c.status; }

}  // namespace

ViewSet load_view_set(const std::vector<DatasetEntry>& entries) {
  std::vector<const DatasetEntry*> sorted;
  for (const auto& e : entries) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(),
            [](const DatasetEntry* a, const DatasetEntry* b) { return a->sample_id < b->sample_id; });
  ViewSet set;
  for (const auto* e : sorted) {
    set.sample_ids.push_back(e->sample_id);
    set.view_indices.push_back(0);
    set.images.push_back(read_png(e->path));
    set.labels.push_back(e->label);
  }
  return set;
}

ViewSet load_generated(const GenerationManifest& manifest) {
  ViewSet set;
  for (const auto& row : manifest.rows) {
    set.sample_ids.push_back(row.sample_id);
    set.view_indices.push_back(row.view_index);
    set.images.push_back(read_png(manifest.directory / row.path));
    set.labels.push_back(row.label);
  }
  return set;
}

ViewSet render_contrastive(const AugmentPolicy& policy, const ViewSet& originals, int views_per_sample,
                           unsigned threads) {
  policy.validate();
  if (views_per_sample < 1) throw Error(ErrorKind::InvalidArgument, "views_per_sample must be >= 1");
  const auto k = static_cast<std::size_t>(views_per_sample);
  ViewSet set;
  const std::size_t total = originals.size() * k;
  set.sample_ids.resize(total);
  set.view_indices.resize(total);
  set.images.resize(total);
  set.labels.resize(total);
  parallel_for(
      originals.size(),
      [&](std::size_t i) {
        for (std::size_t v = 1; v <= k; ++v) {
          const auto slot = i * k + (v - 1);
          const auto view = sample_view(policy, originals.sample_ids[i], v);
          set.sample_ids[slot] = originals.sample_ids[i];
          set.view_indices[slot] = v;
          set.images[slot] = render_view(policy, view, originals.images[i]);
          set.labels[slot] = originals.labels[i];
        }
      },
      threads);
  return set;
}

Session::Session(ExperimentConfig config) : config_(std::move(config)) {
  if (config_.synthetic_data()) {
    const auto dir = config_.out_dir / "data";
    train_entries_ = write_shapes_dataset(make_shapes(config_.synthetic.train_count, config_.seed, "train_"),
                                          dir / "train");
    test_entries_ =
        write_shapes_dataset(make_shapes(config_.synthetic.test_count, config_.seed, "test_"), dir / "test");
  } else {
    train_entries_ = read_dataset_manifest(*config_.train_manifest);
    test_entries_ = read_dataset_manifest(*config_.test_manifest);
  }
  if (train_entries_.empty()) throw Error(ErrorKind::EmptyDataset, "training manifest has no rows");
  if (test_entries_.empty()) throw Error(ErrorKind::EmptyDataset, "test manifest has no rows");
  train_ = load_view_set(train_entries_);
  test_ = load_view_set(test_entries_);

  int class_count = 0;
  for (int l : train_.labels) class_count = std::max(class_count, l + 1);
  for (int l : test_.labels) class_count = std::max(class_count, l + 1);

  std::vector<std::optional<TrainedModel>> trained(config_.models.size());
  parallel_for(
      config_.models.size(),
      [&](std::size_t i) { trained[i] = train(config_.models[i], train_.images, train_.labels, class_count); },
      config_.threads);
  for (auto& m : trained) models_.push_back(std::move(*m));
  std::sort(models_.begin(), models_.end(), [](const TrainedModel& a, const TrainedModel& b) {
    return a.config().model_id < b.config().model_id;
  });
}

std::vector<PredictionRecord> Session::predict(ViewKind view, const ViewSet& set, bool features) const {
  std::vector<PredictionRecord> out(models_.size() * set.size());
  parallel_for(
      models_.size(),
      [&](std::size_t m) {
        const auto& model = models_[m];
        Eigen::VectorXd f, logits;
        for (std::size_t i = 0; i < set.size(); ++i) {
          model.forward(set.images[i], f, logits);
          auto& r = out[m * set.size() + i];
          r.model_id = model.config().model_id;
          r.view = view;
          r.sample_id = set.sample_ids[i];
          r.view_index = set.view_indices[i];
          r.label = set.labels[i];
          r.logits = std::vector<double>(logits.data(), logits.data() + logits.size());
          r.pred = argmax_lowest(*r.logits);
          if (features) {
            std::vector<float> fv(static_cast<std::size_t>(f.size()));
            for (Eigen::Index j = 0; j < f.size(); ++j) fv[j] = static_cast<float>(f(j));
            r.feature = std::move(fv);
          }
        }
      },
      config_.threads);
  return out;
}

const std::vector<PredictionRecord>& Session::original_records() const {
  if (!original_records_) {
    auto records = predict(ViewKind::TrainOrig, train_, false);
    auto test = predict(ViewKind::TestOrig, test_, false);
    records.insert(records.end(), std::make_move_iterator(test.begin()), std::make_move_iterator(test.end()));
    original_records_ = std::move(records);
  }
  return *original_records_;
}

CorrelationReport Session::evaluate_policy(const AugmentPolicy& policy) const {
  const auto contre = render_contrastive(policy, train_, config_.views_per_sample, config_.threads);
  auto records = original_records();
  auto extra = predict(ViewKind::TrainContre, contre, false);
  records.insert(records.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
  AnalysisOptions options;
  options.fisher = false;
  return analyse(records, options);
}

CorrelationReport run_pipeline(const ExperimentConfig& config) {
  const Session session(config);
  const auto& out = config.out_dir;

  const auto train_manifest = generate_contrastive_set(config.policy, session.train_entries(),
                                                       config.views_per_sample, out / "contre_train", config.threads);
  std::vector<std::pair<ViewKind, ViewSet>> views;
  views.emplace_back(ViewKind::TrainOrig, session.train_set());
  views.emplace_back(ViewKind::TrainContre, load_generated(train_manifest));
  views.emplace_back(ViewKind::TestOrig, session.test_set());
  if (config.contre_test) {
    const auto test_manifest = generate_contrastive_set(config.policy, session.test_entries(),
                                                        config.views_per_sample, out / "contre_test", config.threads);
    views.emplace_back(ViewKind::TestContre, load_generated(test_manifest));
  }

  std::vector<PredictionRecord> records;
  for (const auto& [kind, set] : views) {
    auto r = session.predict(kind, set, config.fisher);
    records.insert(records.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  }
  std::stable_sort(records.begin(), records.end(), [](const PredictionRecord& a, const PredictionRecord& b) {
    return std::tie(a.model_id, a.view) < std::tie(b.model_id, b.view);
  });

  const auto pred_dir = out / "predictions";
  fs::create_directories(pred_dir);
  for (auto begin = records.begin(); begin != records.end();) {
    auto end = std::find_if(begin, records.end(),
                            [&](const PredictionRecord& r) { return r.model_id != begin->model_id; });
    write_predictions(std::span<const PredictionRecord>(&*begin, static_cast<std::size_t>(end - begin)),
                      pred_dir / (file_stem_for(begin->model_id) + ".jsonl"));
    begin = end;
  }
  for (const auto& file : config.prediction_files) {
    auto external = read_predictions(file);
    records.insert(records.end(), std::make_move_iterator(external.begin()), std::make_move_iterator(external.end()));
  }

  AnalysisOptions options;
  options.fisher = config.fisher;
  options.reduce_dim = config.reduce_dim;
  options.within_weighting = config.within_weighting;
  auto report = analyse(records, options);
  report.config = provenance(config);
  write_report(report, out / "report.json");
  emit_plots(report, out / "plots");
  return report;
}

std::vector<NmCell> sweep_nm(const Session& session, std::span<const std::pair<int, double>> cells) {
  std::vector<NmCell> out;
  for (const auto& [n, m] : cells) {
    AugmentPolicy policy = session.config().policy;
    policy.n_ops = n;
    policy.magnitude = m;
    policy.fixed_sequence.clear();
    const auto report = session.evaluate_policy(policy);
    const auto* c = report.find_correlation("test_vs_contre");
    const auto* p = report.find_correlation("test_vs_contre_given_train");
    double mean = 0;
    for (const auto& s : report.scores) mean += *s.train_contre;
    out.push_back({n, m, c->value, c->status, p->value, p->status, mean / static_cast<double>(report.scores.size())});
  }
  std::sort(out.begin(), out.end(),
            [](const NmCell& a, const NmCell& b) { return std::tie(a.n, a.m) < std::tie(b.n, b.m); });
  return out;
}

std::vector<NmCell> sweep_nm(const ExperimentConfig& config, std::span<const int> n_values,
                             std::span<const double> m_values) {
  const Session session(config);
  std::vector<std::pair<int, double>> cells;
  for (int n : n_values) {
    for (double m : m_values) cells.emplace_back(n, m);
  }
  return sweep_nm(session, cells);
}

void write_nm_csv(const std::vector<NmCell>& cells, const fs::path& path) {
  auto out = open_for_writing(path);
  csv::write_row(out, {"n", "m", "spearman_test_contre", "status", "partial_given_train", "partial_status",
                       "mean_contre_accuracy"});
  for (const auto& c : cells) {
    csv::write_row(out, {std::to_string(c.n), format_double(c.m), format_optional(c.spearman), c.status,
                         format_optional(c.partial), c.partial_status, format_double(c.mean_contre_accuracy)});
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

std::vector<OpCorrelation> sweep_single_ops(const Session& session) {
  std::vector<OpCorrelation> rows;
  for (const auto& op : session.config().policy.resolved_pool()) {
    AugmentPolicy policy = session.config().policy;
    policy.fixed_sequence = {op};
    rows.push_back(summarise({op}, session.evaluate_policy(policy)));
  }
  return rows;
}

PairMatrix sweep_pairs(const Session& session) {
  PairMatrix matrix;
  matrix.ops = session.config().policy.resolved_pool();
  for (const auto& first : matrix.ops) {
    auto& row = matrix.cells.emplace_back();
    for (const auto& second : matrix.ops) {
      AugmentPolicy policy = session.config().policy;
      policy.fixed_sequence = first == second ? std::vector<std::string>{first}
                                              : std::vector<std::string>{first, second};
      row.push_back(summarise(policy.fixed_sequence, session.evaluate_policy(policy)));
    }
  }
  return matrix;
}

void write_single_ops_csv(const std::vector<OpCorrelation>& rows, const fs::path& path) {
  auto out = open_for_writing(path);
  std::vector<std::string> header{"op", "spearman_test_contre", "status"};
  if (!rows.empty()) {
    for (const auto& [id, acc] : rows.front().contre_accuracy) header.push_back("contre_accuracy:" + id);
  }
  csv::write_row(out, header);
  for (const auto& r : rows) {
    std::vector<std::string> fields{r.ops.front(), format_optional(r.spearman), r.status};
    for (const auto& [id, acc] : r.contre_accuracy) fields.push_back(format_double(acc));
    csv::write_row(out, fields);
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

void write_pairs_csv(const PairMatrix& matrix, const fs::path& path) {
  auto out = open_for_writing(path);
  std::vector<std::string> header{"first\\second"};
  header.insert(header.end(), matrix.ops.begin(), matrix.ops.end());
  csv::write_row(out, header);
  for (std::size_t i = 0; i < matrix.ops.size(); ++i) {
    std::vector<std::string> fields{matrix.ops[i]};
    for (const auto& cell : matrix.cells[i]) fields.push_back(cell_text(cell));
    csv::write_row(out, fields);
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

}  // namespace contre
