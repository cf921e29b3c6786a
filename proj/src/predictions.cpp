#include "contre/predictions.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

#include <json.hpp>

#include "contre/format.hpp"

namespace contre {
namespace {

using ojson = nlohmann::ordered_json;

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

[[noreturn]] void fail(std::size_t line, const std::string& why) { throw Error(ErrorKind::Parse, why, line); }

template <typename T>
T require(const ojson& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(line, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(line, std::string("field '") + key + "' has the wrong type");
  }
}

std::int64_t require_integer(const ojson& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(line, std::string("missing field '") + key + "'");
  if (!it->is_number_integer()) fail(line, std::string("field '") + key + "' must be an integer");
  return it->get<std::int64_t>();
}

}  // namespace

const char* to_string(ViewKind view) noexcept {
  switch (view) {
    case ViewKind::TrainOrig: return "train_orig";
    case ViewKind::TrainContre: return "train_contre";
    case ViewKind::TestOrig: return "test_orig";
    case ViewKind::TestContre: return "test_contre";
  }
  return "?";
}

ViewKind parse_view(std::string_view text) {
  for (auto v : kAllViews) {
    if (text == to_string(v)) return v;
  }
  throw Error(ErrorKind::Parse, "unknown view '" + std::string(text) + "'");
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error(ErrorKind::Parse, "base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::array<int, 4> q{};
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && last && k >= 2) {
        ++pad;
        q[k] = 0;
        continue;
      }
      if (pad > 0) throw Error(ErrorKind::Parse, "base64 padding in the middle of a quantum");
      q[k] = decode_char(c);
      if (q[k] < 0) throw Error(ErrorKind::Parse, "invalid base64 character");
    }
    const std::uint32_t v = (q[0] << 18) | (q[1] << 12) | (q[2] << 6) | q[3];
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

std::string encode_feature(std::span<const float> values) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(values.size() * 4);
  for (float f : values) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  }
  return base64_encode(bytes);
}

std::vector<float> decode_feature(std::string_view text) {
  const auto bytes = base64_decode(text);
  if (bytes.size() % 4 != 0) throw Error(ErrorKind::Parse, "feature byte length is not a multiple of 4");
  std::vector<float> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

std::string to_json_line(const PredictionRecord& r) {
  // Assembled by hand so logits carry shortest round-trip digits.
  std::string line = "{\"model_id\":" + ojson(r.model_id).dump() + ",\"view\":\"" + to_string(r.view) +
                     "\",\"sample_id\":" + ojson(r.sample_id).dump() +
                     ",\"view_index\":" + std::to_string(r.view_index) + ",\"label\":" + std::to_string(r.label) +
                     ",\"pred\":" + std::to_string(r.pred);
  if (r.logits) {
    line += ",\"logits\":[";
    for (std::size_t i = 0; i < r.logits->size(); ++i) {
      if (i) line += ',';
      line += format_json_number((*r.logits)[i]);
    }
    line += ']';
  }
  if (r.feature) {
    line += ",\"feature\":\"" + encode_feature(*r.feature) + "\",\"feature_dim\":" + std::to_string(r.feature->size());
  }
  line += '}';
  return line;
}

PredictionRecord parse_json_line(std::string_view text, std::size_t line) {
  ojson j = ojson::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) fail(line, "invalid JSON");
  if (!j.is_object()) fail(line, "record must be a JSON object");

  PredictionRecord r;
  r.model_id = require<std::string>(j, "model_id", line);
  try {
    r.view = parse_view(require<std::string>(j, "view", line));
  } catch (const Error& e) {
    if (e.line() != 0) throw;
    fail(line, e.what());
  }
  r.sample_id = require<std::string>(j, "sample_id", line);
  const auto view_index = require_integer(j, "view_index", line);
  if (view_index < 0) fail(line, "view_index must be non-negative");
  r.view_index = static_cast<std::uint64_t>(view_index);
  const auto label = require_integer(j, "label", line);
  const auto pred = require_integer(j, "pred", line);
  if (label < 0 || pred < 0 || label > INT32_MAX || pred > INT32_MAX) fail(line, "label/pred out of range");
  r.label = static_cast<int>(label);
  r.pred = static_cast<int>(pred);

  if (const auto it = j.find("logits"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) fail(line, "logits must be an array");
    std::vector<double> logits;
    for (const auto& v : *it) {
      if (!v.is_number()) fail(line, "logits must be numbers");
      logits.push_back(v.get<double>());
    }
    if (static_cast<std::size_t>(r.label) >= logits.size() || static_cast<std::size_t>(r.pred) >= logits.size()) {
      fail(line, "label/pred outside [0, class_count)");
    }
    r.logits = std::move(logits);
  }

  if (const auto it = j.find("feature"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) fail(line, "feature must be a base64 string");
    std::vector<float> feature;
    try {
      feature = decode_feature(it->get<std::string>());
    } catch (const Error& e) {
      fail(line, e.what());
    }
    if (const auto d = j.find("feature_dim"); d != j.end()) {
      if (!d->is_number_integer() || d->get<std::int64_t>() < 1) fail(line, "feature_dim must be a positive integer");
      const auto dim = d->get<std::uint64_t>();
      if (dim != feature.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "feature_dim=" + std::to_string(dim) + " but " + std::to_string(feature.size()) +
                        " values encoded",
                    line);
      }
    }
    r.feature = std::move(feature);
  }
  return r;
}

PredictionReader::PredictionReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
}

std::optional<PredictionRecord> PredictionReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    return parse_json_line(text, line_);
  }
  return std::nullopt;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  PredictionReader reader(path);
  std::vector<PredictionRecord> records;
  while (auto r = reader.next()) records.push_back(std::move(*r));
  return records;
}

void write_predictions(std::span<const PredictionRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  for (const auto& r : records) out << to_json_line(r) << '\n';
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

const ScoreRow* ScoreTable::find(std::string_view model_id) const {
  for (const auto& row : rows) {
    if (row.model_id == model_id) return &row;
  }
  return nullptr;
}

void ScoreAccumulator::add(const PredictionRecord& r) {
  if (!seen_.emplace(r.model_id, r.view, r.sample_id, r.view_index).second) {
    throw Error(ErrorKind::DuplicateRecord, "(" + r.model_id + ", " + to_string(r.view) + ", " + r.sample_id +
                                                ", " + std::to_string(r.view_index) + ")");
  }
  auto& [correct, total] = counts_[{r.view, r.model_id}];
  correct += r.pred == r.label ? 1 : 0;
  ++total;
}

std::vector<ScoreTable> ScoreAccumulator::tables() const {
  std::vector<ScoreTable> out;
  for (const auto& [key, counts] : counts_) {
    const auto& [view, model_id] = key;
    if (out.empty() || out.back().view != view) out.push_back({view, {}});
    const auto [correct, total] = counts;
    out.back().rows.push_back(
        {model_id, static_cast<double>(correct) / static_cast<double>(total), correct, total});
  }
  return out;
}

std::vector<ScoreTable> score(std::span<const PredictionRecord> records) {
  ScoreAccumulator acc;
  for (const auto& r : records) acc.add(r);
  return acc.tables();
}

}  // namespace contre
