#pragma once

/// @file experiment_config.hpp
/// @brief Experiment configuration and its JSON document form.
///
/// The document mirrors ExperimentConfig field by field. Unknown keys are
/// rejected so that typos surface as ConfigError instead of silently running
/// a default. Command-line flags are applied by editing the document before
/// it is resolved, which gives them precedence over the file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "contre/augment_policy.hpp"
#include "contre/mlp.hpp"
#include "contre/stats.hpp"

namespace contre {

inline constexpr const char* kSoftwareVersion = "0.1.0";

struct SyntheticTask {
  int train_count = 300;
  int test_count = 300;
  friend bool operator==(const SyntheticTask&, const SyntheticTask&) = default;
};

enum class SweepKind { Nm, SingleOps, Pairs };
const char* to_string(SweepKind kind) noexcept;

struct SweepSpec {
  SweepKind kind = SweepKind::Nm;
  std::vector<int> n_values{2};
  std::vector<double> m_values{20.0};
};

struct ExperimentConfig {
  std::uint64_t seed = 7;  ///< master seed: policy, synthetic data, default model seeds
  AugmentPolicy policy;
  int views_per_sample = 1;

  /// Absent manifests select the built-in synthetic shapes task.
  std::optional<std::filesystem::path> train_manifest;
  std::optional<std::filesystem::path> test_manifest;
  SyntheticTask synthetic;

  std::vector<ModelConfig> models;
  std::vector<std::filesystem::path> prediction_files;  ///< external cohort members

  bool contre_test = false;  ///< also score contrastive views of the test set
  bool fisher = true;
  std::optional<int> reduce_dim;
  stats::WithinWeighting within_weighting = stats::WithinWeighting::Standard;

  SweepSpec sweep;
  unsigned threads = 0;
  std::filesystem::path out_dir = "contre_out";

  bool synthetic_data() const noexcept { return !train_manifest; }
};

/// Hidden width x epochs x label noise; ten members, init seeds derived from `seed`.
std::vector<ModelConfig> default_cohort(std::uint64_t seed);

/// Seeded configuration for the built-in end-to-end task.
ExperimentConfig default_config(std::uint64_t seed = 7);

/// Seed for a model that does not set one: FNV-1a of (seed, model_id).
std::uint64_t default_init_seed(std::uint64_t seed, const std::string& model_id);

nlohmann::ordered_json to_json(const ExperimentConfig& config);
nlohmann::ordered_json to_json(const ModelConfig& model);
/// Missing keys take defaults; wrong types, unknown keys and invalid values
/// throw ConfigError.
ExperimentConfig config_from_json(const nlohmann::ordered_json& doc);
/// IoError when unreadable, ConfigError when not valid JSON.
nlohmann::ordered_json load_config_document(const std::filesystem::path& path);

/// The subset of the configuration that determines results (no output
/// directory or thread count), plus software and operator-table provenance.
nlohmann::ordered_json provenance(const ExperimentConfig& config);

}  // namespace contre
