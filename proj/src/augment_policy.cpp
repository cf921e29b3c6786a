#include "contre/augment_policy.hpp"

#include <set>

#include "contre/image_ops.hpp"
#include "contre/rng.hpp"

namespace contre {

std::vector<std::string> AugmentPolicy::resolved_pool() const {
  return op_pool.empty() ? operator_names() : op_pool;
}

void AugmentPolicy::validate() const {
  if (n_ops < 1) throw Error(ErrorKind::InvalidArgument, "n_ops must be >= 1");
  if (!(magnitude >= 0.0 && magnitude <= kMaxMagnitude)) {
    throw Error(ErrorKind::InvalidMagnitude, "policy magnitude outside [0, 30]");
  }
  std::set<std::string> seen;
  for (const auto& name : resolved_pool()) {
    (void)find_operator(name);
    if (!seen.insert(name).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate operator '" + name + "' in pool");
    }
  }
  for (const auto& name : fixed_sequence) (void)find_operator(name);
}

AugmentPolicy default_policy(std::uint64_t master_seed) {
  AugmentPolicy p;
  p.master_seed = master_seed;
  return p;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view sample_id, std::uint64_t view_index) {
  return Fnv1a64{}.u64(master_seed).text(sample_id).u64(view_index).digest();
}

ViewDescriptor sample_view(const AugmentPolicy& policy, std::string_view sample_id, std::uint64_t view_index) {
  if (view_index < 1) throw Error(ErrorKind::InvalidArgument, "contrastive view_index must be >= 1");
  policy.validate();

  ViewDescriptor view;
  view.sample_id = std::string(sample_id);
  view.view_index = view_index;
  view.derived_seed = derive_seed(policy.master_seed, sample_id, view_index);

  Engine eng(view.derived_seed);
  auto draw_sign = [&](const std::string& name) {
    return (find_operator(name).is_signed && coin(eng)) ? -1 : +1;
  };
  if (!policy.fixed_sequence.empty()) {
    for (const auto& name : policy.fixed_sequence) view.chosen_ops.push_back({name, draw_sign(name)});
    return view;
  }
  const auto pool = policy.resolved_pool();
  for (int k = 0; k < policy.n_ops; ++k) {
    const auto& name = pool[uniform_index(eng, pool.size())];
    view.chosen_ops.push_back({name, draw_sign(name)});
  }
  return view;
}

Image render_view(const AugmentPolicy& policy, const ViewDescriptor& view, const Image& original) {
  Image img = original;
  for (const auto& op : view.chosen_ops) {
    img = apply_op(find_operator(op.name), policy.magnitude, op.sign, img);
  }
  return img;
}

std::string format_ops(const std::vector<ChosenOp>& ops) {
  std::string out;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (i) out += ';';
    out += ops[i].name;
    out += ops[i].sign < 0 ? ":-1" : ":+1";
  }
  return out;
}

std::vector<ChosenOp> parse_ops(std::string_view text) {
  std::vector<ChosenOp> ops;
  while (!text.empty()) {
    const auto end = text.find(';');
    const auto item = text.substr(0, end);
    const auto colon = item.rfind(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorKind::Parse, "malformed op entry '" + std::string(item) + "'");
    }
    const auto sign = item.substr(colon + 1);
    if (sign != "+1" && sign != "-1" && sign != "1") {
      throw Error(ErrorKind::Parse, "malformed op sign '" + std::string(item) + "'");
    }
    ops.push_back({std::string(item.substr(0, colon)), sign == "-1" ? -1 : +1});
    if (end == std::string_view::npos) break;
    text.remove_prefix(end + 1);
  }
  return ops;
}

}  // namespace contre
