#include "contre/report.hpp"

#include <fstream>
#include <iterator>

#include "contre/error.hpp"

namespace contre {
namespace {

using ojson = nlohmann::ordered_json;

template <typename T>
ojson opt(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

const ojson& field(const ojson& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorKind::Parse, std::string("report is missing '") + key + "'");
  return *it;
}

template <typename T>
T get(const ojson& obj, const char* key) {
  try {
    return field(obj, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("report field '") + key + "': " + e.what());
  }
}

template <typename T>
std::optional<T> get_opt(const ojson& obj, const char* key) {
  const auto& v = field(obj, key);
  if (v.is_null()) return std::nullopt;
  return get<T>(obj, key);
}

const ojson& array_field(const ojson& obj, const char* key) {
  const auto& v = field(obj, key);
  if (!v.is_array()) throw Error(ErrorKind::Parse, std::string("report field '") + key + "' must be an array");
  return v;
}

}  // namespace

const CorrelationEntry* CorrelationReport::find_correlation(std::string_view name) const {
  for (const auto& c : correlations) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const ModelScores* CorrelationReport::find_scores(std::string_view model_id) const {
  for (const auto& s : scores) {
    if (s.model_id == model_id) return &s;
  }
  return nullptr;
}

bool CorrelationReport::has_degenerate() const {
  for (const auto& c : correlations) {
    for (auto kind : {ErrorKind::DegenerateVariance, ErrorKind::ControlDegenerate, ErrorKind::SingularWithin,
                      ErrorKind::SingleClass}) {
      if (c.status == to_string(kind)) return true;
    }
  }
  return false;
}

ojson to_json(const CorrelationReport& report) {
  ojson doc = ojson::object();
  doc["schema_version"] = report.schema_version;
  doc["config"] = report.config;

  ojson scores = ojson::array();
  for (const auto& s : report.scores) {
    scores.push_back({{"model_id", s.model_id},
                      {"train_orig", opt(s.train_orig)},
                      {"train_contre", opt(s.train_contre)},
                      {"test_orig", opt(s.test_orig)},
                      {"test_contre", opt(s.test_contre)},
                      {"consistency", opt(s.consistency)}});
  }
  doc["scores"] = std::move(scores);

  ojson correlations = ojson::array();
  for (const auto& c : report.correlations) {
    correlations.push_back({{"name", c.name},
                            {"x", c.x},
                            {"y", c.y},
                            {"control", opt(c.control)},
                            {"model_ids", c.model_ids},
                            {"value", opt(c.value)},
                            {"status", c.status}});
  }
  doc["correlations"] = std::move(correlations);

  ojson fisher = ojson::array();
  for (const auto& f : report.fisher) {
    fisher.push_back({{"model_id", f.model_id},
                      {"view", f.view},
                      {"feature_dim", f.feature_dim},
                      {"reduced_dim", opt(f.reduced_dim)},
                      {"retained_variance", opt(f.retained_variance)},
                      {"ratio", opt(f.ratio)},
                      {"ridge", f.ridge},
                      {"status", f.status}});
  }
  doc["fisher"] = std::move(fisher);

  ojson notes = ojson::array();
  for (const auto& n : report.notes) notes.push_back({{"code", n.code}, {"message", n.message}});
  doc["notes"] = std::move(notes);
  return doc;
}

CorrelationReport report_from_json(const ojson& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::Parse, "report must be a JSON object");
  CorrelationReport r;
  r.schema_version = get<int>(doc, "schema_version");
  if (r.schema_version != kReportSchemaVersion) {
    throw Error(ErrorKind::Parse, "unsupported report schema_version " + std::to_string(r.schema_version));
  }
  r.config = field(doc, "config");
  for (const auto& s : array_field(doc, "scores")) {
    r.scores.push_back({get<std::string>(s, "model_id"), get_opt<double>(s, "train_orig"),
                        get_opt<double>(s, "train_contre"), get_opt<double>(s, "test_orig"),
                        get_opt<double>(s, "test_contre"), get_opt<double>(s, "consistency")});
  }
  for (const auto& c : array_field(doc, "correlations")) {
    r.correlations.push_back({get<std::string>(c, "name"), get<std::string>(c, "x"), get<std::string>(c, "y"),
                              get_opt<std::string>(c, "control"), get<std::vector<std::string>>(c, "model_ids"),
                              get_opt<double>(c, "value"), get<std::string>(c, "status")});
  }
  for (const auto& f : array_field(doc, "fisher")) {
    r.fisher.push_back({get<std::string>(f, "model_id"), get<std::string>(f, "view"), get<int>(f, "feature_dim"),
                        get_opt<int>(f, "reduced_dim"), get_opt<double>(f, "retained_variance"),
                        get_opt<double>(f, "ratio"), get<double>(f, "ridge"), get<std::string>(f, "status")});
  }
  for (const auto& n : array_field(doc, "notes")) {
    r.notes.push_back({get<std::string>(n, "code"), get<std::string>(n, "message")});
  }
  return r;
}

std::string dump_report(const CorrelationReport& report) { return to_json(report).dump(2) + "\n"; }

void write_report(const CorrelationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << dump_report(report);
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

CorrelationReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return report_from_json(doc);
}

}  // namespace contre
