#pragma once

/// @file pipeline.hpp
/// @brief End-to-end runs and ablation sweeps over a model cohort.
///
/// A Session loads (or synthesises) the train and test sets, trains the
/// built-in cohort once and caches its predictions on the original views.
/// Every contrastive policy evaluated afterwards only renders and predicts
/// the contrastive view, so sweep cells equal independent runs.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "contre/experiment_config.hpp"
#include "contre/manifest.hpp"
#include "contre/mlp.hpp"
#include "contre/predictions.hpp"
#include "contre/report.hpp"

namespace contre {

/// One image per (sample_id, view_index), sorted by that key.
struct ViewSet {
  std::vector<std::string> sample_ids;
  std::vector<std::uint64_t> view_indices;
  std::vector<Image> images;
  std::vector<int> labels;
  std::size_t size() const noexcept { return images.size(); }
};

/// Decodes every manifest entry (view_index 0), sorted by sample_id.
ViewSet load_view_set(const std::vector<DatasetEntry>& entries);
/// Decodes the images listed in a generation manifest.
ViewSet load_generated(const GenerationManifest& manifest);
/// Views 1..k of every sample, rendered in memory exactly as
/// generate_contrastive_set writes them.
ViewSet render_contrastive(const AugmentPolicy& policy, const ViewSet& originals, int views_per_sample,
                           unsigned threads = 0);

class Session {
 public:
  /// Writes the synthetic task under `config.out_dir/data` when no manifests are given.
  explicit Session(ExperimentConfig config);

  const ExperimentConfig& config() const noexcept { return config_; }
  const std::vector<TrainedModel>& models() const noexcept { return models_; }
  const std::vector<DatasetEntry>& train_entries() const noexcept { return train_entries_; }
  const std::vector<DatasetEntry>& test_entries() const noexcept { return test_entries_; }
  const ViewSet& train_set() const noexcept { return train_; }
  const ViewSet& test_set() const noexcept { return test_; }

  /// Records of every built-in model on `set`, ordered by model then sample.
  std::vector<PredictionRecord> predict(ViewKind view, const ViewSet& set, bool features) const;

  /// train_orig and test_orig records without features, computed once.
  const std::vector<PredictionRecord>& original_records() const;

  /// Scores and correlations (no Fisher) for the built-in cohort under `policy`.
  CorrelationReport evaluate_policy(const AugmentPolicy& policy) const;

 private:
  ExperimentConfig config_;
  std::vector<DatasetEntry> train_entries_;
  std::vector<DatasetEntry> test_entries_;
  ViewSet train_;
  ViewSet test_;
  std::vector<TrainedModel> models_;
  mutable std::optional<std::vector<PredictionRecord>> original_records_;
};

/// Generates the contrastive set, predicts every view for every model,
/// writes `predictions/<model_id>.jsonl`, `report.json` and `plots/` under
/// `config.out_dir`, and returns the report.
CorrelationReport run_pipeline(const ExperimentConfig& config);

struct NmCell {
  int n = 0;
  double m = 0.0;
  std::optional<double> spearman;
  std::string status;
  std::optional<double> partial;
  std::string partial_status;
  double mean_contre_accuracy = 0.0;
};

/// Cells come back sorted by (n, m) whatever the evaluation order.
std::vector<NmCell> sweep_nm(const Session& session, std::span<const std::pair<int, double>> cells);
std::vector<NmCell> sweep_nm(const ExperimentConfig& config, std::span<const int> n_values,
                             std::span<const double> m_values);
void write_nm_csv(const std::vector<NmCell>& cells, const std::filesystem::path& path);

struct OpCorrelation {
  std::vector<std::string> ops;  ///< the fixed sequence
  std::optional<double> spearman;
  std::string status;
  std::vector<std::pair<std::string, double>> contre_accuracy;  ///< per model_id
};

/// One row per operator of the pool, applied alone at the base magnitude.
std::vector<OpCorrelation> sweep_single_ops(const Session& session);

struct PairMatrix {
  std::vector<std::string> ops;
  /// cells[i][j]: ops[i] then ops[j]; the diagonal holds ops[i] alone.
  std::vector<std::vector<OpCorrelation>> cells;
};

PairMatrix sweep_pairs(const Session& session);

void write_single_ops_csv(const std::vector<OpCorrelation>& rows, const std::filesystem::path& path);
void write_pairs_csv(const PairMatrix& matrix, const std::filesystem::path& path);

}  // namespace contre
