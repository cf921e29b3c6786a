#pragma once

/// @file augment_policy.hpp
/// @brief Seeded RandAugment-style sampling of contrastive views.
///
/// A view of a sample is fully determined by (master_seed, sample_id,
/// view_index): the per-view seed is a 64-bit FNV-1a hash over the
/// little-endian master seed, the raw sample_id bytes and the little-endian
/// view index. A Mersenne Twister seeded with it draws, for each of the
/// n_ops slots, an operator index uniformly (with replacement) and then,
/// for signed operators only, a sign.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "contre/image.hpp"

namespace contre {

struct AugmentPolicy {
  int n_ops = 2;
  double magnitude = 20.0;
  std::vector<std::string> op_pool;  ///< empty means the full operator table
  std::uint64_t master_seed = 0;
  /// When non-empty, every view applies exactly these operators in order
  /// (signs are still drawn per view). Used by the single-op and pair sweeps.
  std::vector<std::string> fixed_sequence;

  /// Pool with the default expanded.
  std::vector<std::string> resolved_pool() const;
  /// Throws InvalidArgument / InvalidMagnitude / UnknownOperator.
  void validate() const;
};

/// N=2, M=20 over the whole operator table.
AugmentPolicy default_policy(std::uint64_t master_seed = 0);

struct ChosenOp {
  std::string name;
  int sign = +1;
  friend bool operator==(const ChosenOp&, const ChosenOp&) = default;
};

struct ViewDescriptor {
  std::string sample_id;
  std::uint64_t view_index = 0;  ///< 0 is the original view
  std::vector<ChosenOp> chosen_ops;
  std::uint64_t derived_seed = 0;
  friend bool operator==(const ViewDescriptor&, const ViewDescriptor&) = default;
};

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view sample_id, std::uint64_t view_index);

/// view_index must be >= 1.
ViewDescriptor sample_view(const AugmentPolicy& policy, std::string_view sample_id, std::uint64_t view_index);

/// Applies the descriptor's operators in sequence at the policy magnitude.
Image render_view(const AugmentPolicy& policy, const ViewDescriptor& view, const Image& original);

/// "Rotate:-1;Color:+1"
std::string format_ops(const std::vector<ChosenOp>& ops);
std::vector<ChosenOp> parse_ops(std::string_view text);

}  // namespace contre
