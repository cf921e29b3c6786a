#pragma once

/// @file analysis.hpp
/// @brief From prediction records to a correlation report.
///
/// Models are ranked by model_id throughout. Correlations computed:
///
///   test_vs_contre               test_orig vs train_contre
///   test_vs_train                test_orig vs train_orig
///   test_vs_contre_given_train   partial, controlling train_orig
///   gap_vs_consistency           (train_orig - test_orig) vs (train_orig - train_contre)
///   test_contre_vs_contre        test_contre vs train_contre (when test_contre is scored)
///   test_vs_fisher_<view>        test_orig vs Fisher ratio of <view> features
///
/// A statistic that is undefined for the cohort (constant scores, perfect
/// control correlation, singular scatter) is recorded with a null value, the
/// error kind as status, and a note; it does not abort the analysis.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contre/predictions.hpp"
#include "contre/report.hpp"
#include "contre/stats.hpp"

namespace contre {

/// SVD target when features must be reduced and no dimension is requested.
inline constexpr int kDefaultReduceDim = 64;

struct AnalysisOptions {
  bool fisher = true;
  std::optional<int> reduce_dim;
  stats::WithinWeighting within_weighting = stats::WithinWeighting::Standard;
};

/// Fisher ratio of one model's features in one view. Features are reduced
/// with svd_reduce when their dimension exceeds the smallest class count.
FisherEntry fisher_for(std::span<const PredictionRecord> records, const std::string& model_id, ViewKind view,
                       const AnalysisOptions& options);

/// Throws InsufficientCohort for fewer than 3 models and EmptyDataset when a
/// model lacks the train_orig, train_contre or test_orig view. `config` of
/// the result is left empty.
CorrelationReport analyse(std::span<const PredictionRecord> records, const AnalysisOptions& options);

/// spearman(x, y) over the cohort, degenerate cases captured in the entry.
CorrelationEntry correlate_scores(const std::string& name, const std::string& x_name, std::span<const double> x,
                                  const std::string& y_name, std::span<const double> y,
                                  std::vector<std::string> model_ids);

}  // namespace contre
