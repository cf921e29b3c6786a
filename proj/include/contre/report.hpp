#pragma once

/// @file report.hpp
/// @brief Correlation report document and its JSON persistence.
///
/// Top-level keys, in order: schema_version, config, scores, correlations,
/// fisher, notes. Absent or undefined values are written as null. Doubles are
/// written in the shortest form that parses back to the same bits.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace contre {

inline constexpr int kReportSchemaVersion = 1;

/// Per-model accuracies for each view, plus train minus contrastive accuracy.
struct ModelScores {
  std::string model_id;
  std::optional<double> train_orig;
  std::optional<double> train_contre;
  std::optional<double> test_orig;
  std::optional<double> test_contre;
  std::optional<double> consistency;
  friend bool operator==(const ModelScores&, const ModelScores&) = default;
};

/// One rank correlation, with the exact score vectors it was computed from.
struct CorrelationEntry {
  std::string name;
  std::string x;                      ///< score vector name, e.g. "test_orig"
  std::string y;                      ///< e.g. "train_contre", "fisher_train_contre"
  std::optional<std::string> control;  ///< partial correlations only
  std::vector<std::string> model_ids;
  std::optional<double> value;
  std::string status = "ok";  ///< "ok" or an error kind name
  friend bool operator==(const CorrelationEntry&, const CorrelationEntry&) = default;
};

struct FisherEntry {
  std::string model_id;
  std::string view;
  int feature_dim = 0;
  std::optional<int> reduced_dim;
  std::optional<double> retained_variance;
  std::optional<double> ratio;
  double ridge = 0.0;
  std::string status = "ok";
  friend bool operator==(const FisherEntry&, const FisherEntry&) = default;
};

struct ReportNote {
  std::string code;
  std::string message;
  friend bool operator==(const ReportNote&, const ReportNote&) = default;
};

struct CorrelationReport {
  int schema_version = kReportSchemaVersion;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<ModelScores> scores;
  std::vector<CorrelationEntry> correlations;
  std::vector<FisherEntry> fisher;
  std::vector<ReportNote> notes;

  const CorrelationEntry* find_correlation(std::string_view name) const;
  const ModelScores* find_scores(std::string_view model_id) const;
  /// True when any correlation failed on degenerate statistics.
  bool has_degenerate() const;
  friend bool operator==(const CorrelationReport&, const CorrelationReport&) = default;
};

nlohmann::ordered_json to_json(const CorrelationReport& report);
CorrelationReport report_from_json(const nlohmann::ordered_json& doc);  ///< ParseError

std::string dump_report(const CorrelationReport& report);
void write_report(const CorrelationReport& report, const std::filesystem::path& path);
CorrelationReport read_report(const std::filesystem::path& path);

}  // namespace contre
