#include "contre/analysis.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "contre/error.hpp"

namespace contre {
namespace {

bool is_degenerate(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateVariance:
    case ErrorKind::ControlDegenerate:
    case ErrorKind::SingularWithin:
    case ErrorKind::SingleClass:
    case ErrorKind::EmptyClass:
    case ErrorKind::DimensionTooLarge:
      return true;
    default:
      return false;
  }
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

void note_failures(CorrelationReport& report) {
  for (const auto& c : report.correlations) {
    if (c.status != "ok") report.notes.push_back({c.status, c.name + " is undefined for this cohort"});
  }
  for (const auto& f : report.fisher) {
    if (f.status != "ok") report.notes.push_back({f.status, "fisher ratio of " + f.model_id + "/" + f.view});
  }
}

}  // namespace

CorrelationEntry correlate_scores(const std::string& name, const std::string& x_name, std::span<const double> x,
                                  const std::string& y_name, std::span<const double> y,
                                  std::vector<std::string> model_ids) {
  CorrelationEntry e{name, x_name, y_name, std::nullopt, std::move(model_ids), std::nullopt, "ok"};
  if (x.size() < 3) {
    e.status = to_string(ErrorKind::InsufficientCohort);
    return e;
  }
  try {
    e.value = stats::spearman(x, y);
  } catch (const Error& err) {
    if (!is_degenerate(err.kind())) throw;
    e.status = to_string(err.kind());
  }
  return e;
}

FisherEntry fisher_for(std::span<const PredictionRecord> records, const std::string& model_id, ViewKind view,
                       const AnalysisOptions& options) {
  std::vector<const PredictionRecord*> rows;
  for (const auto& r : records) {
    if (r.model_id == model_id && r.view == view) rows.push_back(&r);
  }
  std::sort(rows.begin(), rows.end(), [](const PredictionRecord* a, const PredictionRecord* b) {
    return std::tie(a->sample_id, a->view_index) < std::tie(b->sample_id, b->view_index);
  });
  FisherEntry entry{model_id, to_string(view), 0, std::nullopt, std::nullopt, std::nullopt, 0.0, "ok"};
  if (rows.empty() || !rows.front()->feature) {
    throw Error(ErrorKind::EmptyDataset, model_id + "/" + to_string(view) + " has no features");
  }

  const auto d = static_cast<Eigen::Index>(rows.front()->feature->size());
  const auto n = static_cast<Eigen::Index>(rows.size());
  entry.feature_dim = static_cast<int>(d);
  Eigen::MatrixXd features(n, d);
  std::vector<int> labels;
  std::map<int, Eigen::Index> class_sizes;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& f = rows[i]->feature;
    if (!f || static_cast<Eigen::Index>(f->size()) != d) {
      throw Error(ErrorKind::DimensionMismatch, model_id + "/" + to_string(view) + ": sample " + rows[i]->sample_id +
                                                    " has a different feature length");
    }
    for (Eigen::Index j = 0; j < d; ++j) features(i, j) = (*f)[j];
    labels.push_back(rows[i]->label);
    ++class_sizes[rows[i]->label];
  }
  Eigen::Index smallest = n;
  for (const auto& [label, count] : class_sizes) smallest = std::min(smallest, count);

  try {
    stats::ScatterPair<double> pair;
    if (d > smallest) {
      const Eigen::Index target =
          options.reduce_dim ? *options.reduce_dim : std::min<Eigen::Index>({kDefaultReduceDim, n, d});
      const auto reduced = stats::svd_reduce(features, target);
      entry.reduced_dim = static_cast<int>(target);
      entry.retained_variance = reduced.retained_variance;
      pair = stats::scatter_matrices(reduced.projected, labels, options.within_weighting);
    } else {
      pair = stats::scatter_matrices(features, labels, options.within_weighting);
    }
    const auto result = stats::fisher_ratio_auto(pair);
    entry.ratio = result.ratio;
    entry.ridge = result.ridge;
  } catch (const Error& err) {
    if (!is_degenerate(err.kind())) throw;
    entry.status = to_string(err.kind());
  }
  return entry;
}

CorrelationReport analyse(std::span<const PredictionRecord> records, const AnalysisOptions& options) {
  const auto tables = score(records);
  std::set<std::string> id_set;
  for (const auto& t : tables) {
    for (const auto& row : t.rows) id_set.insert(row.model_id);
  }
  const std::vector<std::string> ids(id_set.begin(), id_set.end());
  if (ids.size() < 3) {
    throw Error(ErrorKind::InsufficientCohort,
                "correlations need at least 3 models, got " + std::to_string(ids.size()));
  }

  auto accuracy_of = [&](ViewKind view, const std::string& id) -> std::optional<double> {
    for (const auto& t : tables) {
      if (t.view != view) continue;
      if (const auto* row = t.find(id)) return row->accuracy;
    }
    return std::nullopt;
  };

  CorrelationReport report;
  std::vector<double> train, contre, test, test_contre, gap, cons;
  bool all_test_contre = true;
  for (const auto& id : ids) {
    ModelScores s{id, accuracy_of(ViewKind::TrainOrig, id), accuracy_of(ViewKind::TrainContre, id),
                  accuracy_of(ViewKind::TestOrig, id), accuracy_of(ViewKind::TestContre, id), std::nullopt};
    for (auto [value, view] : {std::pair{s.train_orig, ViewKind::TrainOrig}, std::pair{s.train_contre, ViewKind::TrainContre},
                               std::pair{s.test_orig, ViewKind::TestOrig}}) {
      if (!value) throw Error(ErrorKind::EmptyDataset, "model " + id + " has no " + to_string(view) + " records");
    }
    s.consistency = stats::consistency(*s.train_orig, *s.train_contre);
    train.push_back(*s.train_orig);
    contre.push_back(*s.train_contre);
    test.push_back(*s.test_orig);
    gap.push_back(*s.train_orig - *s.test_orig);
    cons.push_back(*s.consistency);
    if (s.test_contre) {
      test_contre.push_back(*s.test_contre);
    } else {
      all_test_contre = false;
    }
    report.scores.push_back(std::move(s));
  }

  report.correlations.push_back(correlate_scores("test_vs_contre", "test_orig", test, "train_contre", contre, ids));
  report.correlations.push_back(correlate_scores("test_vs_train", "test_orig", test, "train_orig", train, ids));

  CorrelationEntry partial{"test_vs_contre_given_train", "test_orig", "train_contre", "train_orig", ids,
                           std::nullopt, "ok"};
  try {
    partial.value = stats::partial_spearman(test, contre, train);
  } catch (const Error& err) {
    if (!is_degenerate(err.kind())) throw;
    partial.status = to_string(err.kind());
  }
  report.correlations.push_back(std::move(partial));

  report.correlations.push_back(
      correlate_scores("gap_vs_consistency", "generalization_gap", gap, "consistency", cons, ids));
  if (all_test_contre) {
    report.correlations.push_back(
        correlate_scores("test_contre_vs_contre", "test_contre", test_contre, "train_contre", contre, ids));
  }

  if (options.fisher) {
    for (ViewKind view : {ViewKind::TrainOrig, ViewKind::TrainContre}) {
      std::vector<std::string> fisher_ids;
      std::vector<double> fisher_test, ratios;
      bool any_features = false;
      for (std::size_t m = 0; m < ids.size(); ++m) {
        const bool has_features = std::any_of(records.begin(), records.end(), [&](const PredictionRecord& r) {
          return r.model_id == ids[m] && r.view == view && r.feature.has_value();
        });
        if (!has_features) continue;
        any_features = true;
        auto entry = fisher_for(records, ids[m], view, options);
        if (entry.ratio) {
          fisher_ids.push_back(ids[m]);
          fisher_test.push_back(test[m]);
          ratios.push_back(*entry.ratio);
        }
        report.fisher.push_back(std::move(entry));
      }
      if (!any_features) continue;
      const std::string y = std::string("fisher_") + to_string(view);
      report.correlations.push_back(
          correlate_scores("test_vs_" + y, "test_orig", fisher_test, y, ratios, std::move(fisher_ids)));
    }
    if (report.fisher.empty()) report.notes.push_back({"no_features", "no feature vectors; Fisher analysis skipped"});
  }

  note_failures(report);
  report.notes.push_back({"within_weighting", std::string("within-class scatter uses the ") +
                                                  stats::to_string(options.within_weighting) + " weighting"});
  report.notes.push_back({"cohort", join(ids)});
  return report;
}

}  // namespace contre
