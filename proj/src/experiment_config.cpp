#include "contre/experiment_config.hpp"

#include <fstream>
#include <iterator>
#include <set>

#include "contre/error.hpp"
#include "contre/image_ops.hpp"
#include "contre/rng.hpp"

namespace contre {
namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::Config, where + ": " + what);
}

/// Typed access to one JSON object; finish() rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const ojson& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) config_error(where_, "expected an object");
  }

  const ojson* find(const char* key) {
    used_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void read(const char* key, int& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number_integer()) config_error(path(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void read(const char* key, std::uint64_t& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number_unsigned()) config_error(path(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void read(const char* key, double& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number()) config_error(path(key), "expected a number");
      out = v->get<double>();
    }
  }
  void read(const char* key, bool& out) {
    if (const auto* v = find(key)) {
      if (!v->is_boolean()) config_error(path(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void read(const char* key, std::string& out) {
    if (const auto* v = find(key)) {
      if (!v->is_string()) config_error(path(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  template <typename T>
  void read(const char* key, std::optional<T>& out) {
    if (const auto* v = find(key); v && !v->is_null()) {
      T value{};
      const ojson wrapped{{key, *v}};
      ObjectReader single(wrapped, where_);
      single.read(key, value);
      out = value;
    }
  }
  template <typename T>
  void read_list(const char* key, std::vector<T>& out) {
    if (const auto* v = find(key)) {
      if (!v->is_array()) config_error(path(key), "expected an array");
      out.clear();
      for (const auto& item : *v) {
        T value{};
        const ojson wrapped{{key, item}};
        ObjectReader single(wrapped, where_);
        single.read(key, value);
        out.push_back(std::move(value));
      }
    }
  }
  void read(const char* key, std::filesystem::path& out) {
    std::string s = out.string();
    read(key, s);
    out = s;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.contains(key)) config_error(path(key.c_str()), "unknown key");
    }
  }

  std::string path(const char* key) const { return where_ + "." + key; }

 private:
  const ojson& obj_;
  std::string where_;
  std::set<std::string> used_;
};

std::string model_id_for(int width, int epochs, double noise) {
  return "w" + std::to_string(width) + "-e" + std::to_string(epochs) + "-n" +
         std::to_string(static_cast<int>(noise * 100 + 0.5));
}

ModelConfig model_from_json(const ojson& doc, const std::string& where, std::uint64_t seed) {
  ObjectReader r(doc, where);
  ModelConfig m;
  r.read("model_id", m.model_id);
  if (m.model_id.empty()) config_error(where, "model_id is required");
  r.read_list("hidden_widths", m.hidden_widths);
  r.read("epochs", m.epochs);
  r.read("learning_rate", m.learning_rate);
  r.read("weight_decay", m.weight_decay);
  r.read("batch_size", m.batch_size);
  std::optional<std::uint64_t> init_seed;
  r.read("init_seed", init_seed);
  m.init_seed = init_seed.value_or(default_init_seed(seed, m.model_id));
  r.read("label_noise", m.label_noise);
  r.finish();
  try {
    m.validate();
  } catch (const Error& e) {
    config_error(where, e.what());
  }
  return m;
}

}  // namespace

const char* to_string(SweepKind kind) noexcept {
  switch (kind) {
    case SweepKind::Nm:
      return "nm";
    case SweepKind::SingleOps:
      return "single";
    case SweepKind::Pairs:
      return "pairs";
  }
  return "nm";
}

std::uint64_t default_init_seed(std::uint64_t seed, const std::string& model_id) {
  return Fnv1a64().u64(seed).text(model_id).digest();
}

std::vector<ModelConfig> default_cohort(std::uint64_t seed) {
  struct Spec {
    int width;
    int epochs;
    double noise;
  };
  const Spec specs[] = {{0, 2, 0.0},   {0, 20, 0.0},   {8, 2, 0.0},    {8, 20, 0.0},   {32, 2, 0.0},
                        {32, 20, 0.0}, {128, 2, 0.0},  {128, 20, 0.0}, {32, 20, 0.2},  {128, 20, 0.2}};
  std::vector<ModelConfig> cohort;
  for (const auto& s : specs) {
    ModelConfig m;
    m.model_id = model_id_for(s.width, s.epochs, s.noise);
    if (s.width > 0) m.hidden_widths = {s.width};
    m.epochs = s.epochs;
    m.label_noise = s.noise;
    m.init_seed = default_init_seed(seed, m.model_id);
    cohort.push_back(std::move(m));
  }
  return cohort;
}

ExperimentConfig default_config(std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  c.policy = default_policy(seed);
  c.models = default_cohort(seed);
  return c;
}

ojson to_json(const ModelConfig& m) {
  return {{"model_id", m.model_id},       {"hidden_widths", m.hidden_widths}, {"epochs", m.epochs},
          {"learning_rate", m.learning_rate}, {"weight_decay", m.weight_decay}, {"batch_size", m.batch_size},
          {"init_seed", m.init_seed},     {"label_noise", m.label_noise}};
}

ojson to_json(const ExperimentConfig& c) {
  ojson doc = ojson::object();
  doc["seed"] = c.seed;
  doc["policy"] = {{"n_ops", c.policy.n_ops},
                   {"magnitude", c.policy.magnitude},
                   {"op_pool", c.policy.op_pool},
                   {"fixed_sequence", c.policy.fixed_sequence}};
  doc["views_per_sample"] = c.views_per_sample;
  auto path_or_null = [](const std::optional<std::filesystem::path>& p) {
    return p ? ojson(p->generic_string()) : ojson(nullptr);
  };
  doc["data"] = {{"train_manifest", path_or_null(c.train_manifest)},
                 {"test_manifest", path_or_null(c.test_manifest)},
                 {"synthetic", {{"train_count", c.synthetic.train_count}, {"test_count", c.synthetic.test_count}}}};
  ojson models = ojson::array();
  for (const auto& m : c.models) models.push_back(to_json(m));
  ojson files = ojson::array();
  for (const auto& p : c.prediction_files) files.push_back(p.generic_string());
  doc["cohort"] = {{"models", std::move(models)}, {"prediction_files", std::move(files)}};
  doc["contre_test"] = c.contre_test;
  doc["fisher"] = {{"enabled", c.fisher},
                   {"reduce_dim", c.reduce_dim ? ojson(*c.reduce_dim) : ojson(nullptr)},
                   {"within_weighting", stats::to_string(c.within_weighting)}};
  doc["sweep"] = {{"kind", to_string(c.sweep.kind)}, {"n_values", c.sweep.n_values}, {"m_values", c.sweep.m_values}};
  doc["threads"] = c.threads;
  doc["out_dir"] = c.out_dir.generic_string();
  return doc;
}

ExperimentConfig config_from_json(const ojson& doc) {
  ObjectReader top(doc, "config");
  ExperimentConfig c;
  top.read("seed", c.seed);
  c.policy = default_policy(c.seed);

  if (const auto* p = top.find("policy")) {
    ObjectReader r(*p, "config.policy");
    r.read("n_ops", c.policy.n_ops);
    r.read("magnitude", c.policy.magnitude);
    r.read_list("op_pool", c.policy.op_pool);
    r.read_list("fixed_sequence", c.policy.fixed_sequence);
    r.finish();
  }
  try {
    c.policy.validate();
  } catch (const Error& e) {
    // Operator errors keep their own kind; both map to the config exit code.
    if (e.kind() == ErrorKind::UnknownOperator || e.kind() == ErrorKind::InvalidMagnitude) throw;
    config_error("config.policy", e.what());
  }

  top.read("views_per_sample", c.views_per_sample);
  if (c.views_per_sample < 1) config_error("config.views_per_sample", "must be >= 1");

  if (const auto* d = top.find("data")) {
    ObjectReader r(*d, "config.data");
    std::optional<std::string> train, test;
    r.read("train_manifest", train);
    r.read("test_manifest", test);
    if (train) c.train_manifest = *train;
    if (test) c.test_manifest = *test;
    if (const auto* s = r.find("synthetic")) {
      ObjectReader sr(*s, "config.data.synthetic");
      sr.read("train_count", c.synthetic.train_count);
      sr.read("test_count", c.synthetic.test_count);
      sr.finish();
    }
    r.finish();
  }
  if (c.train_manifest.has_value() != c.test_manifest.has_value()) {
    config_error("config.data", "train_manifest and test_manifest must be given together");
  }
  if (c.synthetic.train_count < 3 || c.synthetic.test_count < 3) {
    config_error("config.data.synthetic", "counts must be >= 3");
  }

  bool models_given = false;
  if (const auto* co = top.find("cohort")) {
    ObjectReader r(*co, "config.cohort");
    if (const auto* models = r.find("models")) {
      if (!models->is_array()) config_error("config.cohort.models", "expected an array");
      models_given = true;
      std::set<std::string> ids;
      for (std::size_t i = 0; i < models->size(); ++i) {
        auto m = model_from_json((*models)[i], "config.cohort.models[" + std::to_string(i) + "]", c.seed);
        if (!ids.insert(m.model_id).second) config_error("config.cohort.models", "duplicate model_id " + m.model_id);
        c.models.push_back(std::move(m));
      }
    }
    std::vector<std::string> files;
    r.read_list("prediction_files", files);
    for (auto& f : files) c.prediction_files.emplace_back(f);
    r.finish();
  }
  if (!models_given) c.models = default_cohort(c.seed);

  top.read("contre_test", c.contre_test);

  if (const auto* f = top.find("fisher")) {
    ObjectReader r(*f, "config.fisher");
    r.read("enabled", c.fisher);
    r.read("reduce_dim", c.reduce_dim);
    std::string weighting = stats::to_string(c.within_weighting);
    r.read("within_weighting", weighting);
    if (weighting == "standard") {
      c.within_weighting = stats::WithinWeighting::Standard;
    } else if (weighting == "count_weighted") {
      c.within_weighting = stats::WithinWeighting::CountWeighted;
    } else {
      config_error("config.fisher.within_weighting", "expected 'standard' or 'count_weighted'");
    }
    r.finish();
  }
  if (c.reduce_dim && *c.reduce_dim < 1) config_error("config.fisher.reduce_dim", "must be >= 1");

  if (const auto* s = top.find("sweep")) {
    ObjectReader r(*s, "config.sweep");
    std::string kind = to_string(c.sweep.kind);
    r.read("kind", kind);
    if (kind == "nm") {
      c.sweep.kind = SweepKind::Nm;
    } else if (kind == "single") {
      c.sweep.kind = SweepKind::SingleOps;
    } else if (kind == "pairs") {
      c.sweep.kind = SweepKind::Pairs;
    } else {
      config_error("config.sweep.kind", "expected 'nm', 'single' or 'pairs'");
    }
    r.read_list("n_values", c.sweep.n_values);
    r.read_list("m_values", c.sweep.m_values);
    r.finish();
  }
  for (int n : c.sweep.n_values) {
    if (n < 1) config_error("config.sweep.n_values", "entries must be >= 1");
  }
  for (double m : c.sweep.m_values) {
    if (!(m >= 0 && m <= kMaxMagnitude)) config_error("config.sweep.m_values", "entries must be in [0, 30]");
  }

  int threads = static_cast<int>(c.threads);
  top.read("threads", threads);
  if (threads < 0) config_error("config.threads", "must be >= 0");
  c.threads = static_cast<unsigned>(threads);
  top.read("out_dir", c.out_dir);
  top.finish();
  return c;
}

ojson load_config_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path.string() + "'");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Config, path.string() + ": " + e.what());
  }
}

ojson provenance(const ExperimentConfig& config) {
  ojson doc = to_json(config);
  doc.erase("threads");
  doc.erase("out_dir");
  doc.erase("sweep");
  doc["policy"]["master_seed"] = config.policy.master_seed;
  doc["policy"]["resolved_pool"] = config.policy.resolved_pool();
  doc["excluded_operators"] = {"Cutout"};
  doc["software"] = {{"name", "contre"}, {"version", kSoftwareVersion}};
  return doc;
}

}  // namespace contre
