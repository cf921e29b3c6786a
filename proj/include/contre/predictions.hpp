#pragma once

/// @file predictions.hpp
/// @brief The model-decoupling interchange format.
///
/// One JSON object per line:
///
///   {"model_id":"mlp_w32","view":"train_contre","sample_id":"s001","view_index":1,
///    "label":2,"pred":2,"logits":[...],"feature":"<base64>","feature_dim":32}
///
/// `logits`, `feature` and `feature_dim` are optional. `feature` is the
/// base64 encoding of little-endian IEEE-754 binary32 values. `view` is one
/// of train_orig, train_contre, test_orig, test_contre.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "contre/error.hpp"

namespace contre {

enum class ViewKind { TrainOrig, TrainContre, TestOrig, TestContre };

const char* to_string(ViewKind view) noexcept;
ViewKind parse_view(std::string_view text);  ///< ParseError on unknown names
inline constexpr ViewKind kAllViews[] = {ViewKind::TrainOrig, ViewKind::TrainContre, ViewKind::TestOrig,
                                         ViewKind::TestContre};

struct PredictionRecord {
  std::string model_id;
  ViewKind view = ViewKind::TrainOrig;
  std::string sample_id;
  std::uint64_t view_index = 0;
  int label = 0;
  int pred = 0;
  std::optional<std::vector<double>> logits;
  std::optional<std::vector<float>> feature;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);  ///< ParseError on malformed input

std::string encode_feature(std::span<const float> values);
std::vector<float> decode_feature(std::string_view text);

std::string to_json_line(const PredictionRecord& record);
/// Parses and validates one line; `line` is used for error positions.
PredictionRecord parse_json_line(std::string_view text, std::size_t line);

/// Streaming reader; records are yielded in file order.
class PredictionReader {
 public:
  explicit PredictionReader(const std::filesystem::path& path);
  std::optional<PredictionRecord> next();
  std::size_t line() const noexcept { return line_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_ = 0;
};

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
void write_predictions(std::span<const PredictionRecord> records, const std::filesystem::path& path);

struct ScoreRow {
  std::string model_id;
  double accuracy = 0.0;
  std::uint64_t correct = 0;
  std::uint64_t sample_count = 0;
  friend bool operator==(const ScoreRow&, const ScoreRow&) = default;
};

struct ScoreTable {
  ViewKind view = ViewKind::TrainOrig;
  std::vector<ScoreRow> rows;  ///< sorted by model_id

  const ScoreRow* find(std::string_view model_id) const;
  friend bool operator==(const ScoreTable&, const ScoreTable&) = default;
};

/// Top-1 accuracy per (model_id, view). Tables come out in view order with
/// rows sorted by model_id, so the result does not depend on record order.
/// Throws DuplicateRecord when a (model_id, view, sample_id, view_index) key repeats.
std::vector<ScoreTable> score(std::span<const PredictionRecord> records);

/// Incremental form of score() for streamed input.
class ScoreAccumulator {
 public:
  void add(const PredictionRecord& record);
  std::vector<ScoreTable> tables() const;

 private:
  using GroupKey = std::pair<ViewKind, std::string>;
  using RecordKey = std::tuple<std::string, ViewKind, std::string, std::uint64_t>;
  std::map<GroupKey, std::pair<std::uint64_t, std::uint64_t>> counts_;  ///< (correct, total)
  std::set<RecordKey> seen_;
};

}  // namespace contre
