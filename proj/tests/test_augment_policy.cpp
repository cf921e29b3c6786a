#include <doctest.h>

#include <algorithm>
#include <map>

#include "contre/contrastive_set.hpp"
#include "contre/image_ops.hpp"
#include "contre/png_io.hpp"
#include "support.hpp"

using namespace contre;
namespace fs = std::filesystem;

namespace {

// Upper 0.1% point of chi-square with 13 degrees of freedom.
constexpr double kChiSquare13At001 = 34.52817897487089;

std::vector<std::string> fourteen_op_pool() {
  auto pool = operator_names();
  std::erase(pool, "Identity");
  std::erase(pool, "SolarizeAdd");
  return pool;
}

std::vector<DatasetEntry> write_fixture(const fs::path& dir, int count) {
  Engine eng(2024);
  std::vector<DatasetEntry> entries;
  for (int i = 0; i < count; ++i) {
    const std::string id = "s" + std::to_string(i);
    const auto path = dir / (id + ".png");
    write_png(contre::testing::random_image(eng, 12, 10, 3), path);
    entries.push_back({id, path, i % 3});
  }
  return entries;
}

}  // namespace

TEST_CASE("seed derivation is FNV-1a over seed, id and view index") {
  // Independent byte-level oracle.
  auto oracle = [](std::uint64_t seed, const std::string& id, std::uint64_t view) {
    std::vector<unsigned char> bytes;
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<unsigned char>(seed >> (8 * i)));
    bytes.insert(bytes.end(), id.begin(), id.end());
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<unsigned char>(view >> (8 * i)));
    std::uint64_t h = 14695981039346656037ULL;
    for (auto b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
    return h;
  };
  CHECK(derive_seed(7, "img_001", 1) == oracle(7, "img_001", 1));
  CHECK(derive_seed(0, "", 0) == oracle(0, "", 0));
  CHECK(derive_seed(7, "a", 1) != derive_seed(7, "a", 2));
  CHECK(derive_seed(7, "a", 1) != derive_seed(8, "a", 1));
}

TEST_CASE("sample_view honours N and is deterministic") {
  const auto policy = default_policy(7);
  CHECK(policy.n_ops == 2);
  CHECK(policy.magnitude == 20.0);
  const auto v = sample_view(policy, "cat_17", 1);
  CHECK(v.chosen_ops.size() == 2);
  CHECK(v.view_index == 1);
  CHECK(v == sample_view(policy, "cat_17", 1));
  CHECK(v.derived_seed == derive_seed(7, "cat_17", 1));

  AugmentPolicy three = policy;
  three.n_ops = 3;
  CHECK(sample_view(three, "cat_17", 4).chosen_ops.size() == 3);

  CHECK_THROWS_AS(sample_view(policy, "cat_17", 0), Error);

  for (int i = 0; i < 200; ++i) {
    for (const auto& op : sample_view(policy, "x" + std::to_string(i), 1).chosen_ops) {
      if (!find_operator(op.name).is_signed) CHECK(op.sign == +1);
    }
  }
}

TEST_CASE("policy validation") {
  AugmentPolicy p;
  p.n_ops = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p.n_ops = 2;
  p.magnitude = 31;
  CHECK_THROWS_AS(p.validate(), Error);
  p.magnitude = 10;
  p.op_pool = {"Rotate", "Rotate"};
  CHECK_THROWS_AS(p.validate(), Error);
  p.op_pool = {"Rotate", "Cutout"};
  CHECK_THROWS_AS(p.validate(), Error);
  p.op_pool = {"Rotate"};
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("operator sampling is uniform (chi-square, 14 ops, 14000 draws)") {
  AugmentPolicy policy;
  policy.op_pool = fourteen_op_pool();
  REQUIRE(policy.op_pool.size() == 14);
  policy.master_seed = 7;
  std::map<std::string, int> counts;
  for (int i = 0; i < 7000; ++i) {
    for (const auto& op : sample_view(policy, "sample_" + std::to_string(i), 1).chosen_ops) ++counts[op.name];
  }
  double chi2 = 0;
  for (const auto& name : policy.op_pool) {
    const double diff = counts[name] - 1000.0;
    chi2 += diff * diff / 1000.0;
  }
  CAPTURE(chi2);
  CHECK(chi2 < kChiSquare13At001);
}

TEST_CASE("fixed sequences apply the given ops in order") {
  AugmentPolicy p = default_policy(3);
  p.fixed_sequence = {"Invert", "Rotate"};
  const auto v = sample_view(p, "a", 1);
  REQUIRE(v.chosen_ops.size() == 2);
  CHECK(v.chosen_ops[0].name == "Invert");
  CHECK(v.chosen_ops[1].name == "Rotate");
}

TEST_CASE("ops text form round-trips") {
  const std::vector<ChosenOp> ops = {{"Rotate", -1}, {"Color", +1}, {"Invert", +1}};
  CHECK(format_ops(ops) == "Rotate:-1;Color:+1;Invert:+1");
  CHECK(parse_ops(format_ops(ops)) == ops);
  CHECK(parse_ops("").empty());
  CHECK_THROWS_AS(parse_ops("Rotate"), Error);
  CHECK_THROWS_AS(parse_ops("Rotate:x"), Error);
}

TEST_CASE("generate_contrastive_set: cardinality, labels, determinism, order independence") {
  const auto dir = contre::testing::scratch_dir("gen");
  auto dataset = write_fixture(dir, 9);
  write_dataset_manifest(dataset, dir / "train.csv");
  REQUIRE(read_dataset_manifest(dir / "train.csv") == dataset);

  const auto policy = default_policy(7);
  const auto m1 = generate_contrastive_set(policy, dataset, 1, dir / "run1");
  CHECK(m1.rows.size() == 9);
  for (const auto& row : m1.rows) {
    const auto it = std::find_if(dataset.begin(), dataset.end(), [&](auto& e) { return e.sample_id == row.sample_id; });
    REQUIRE(it != dataset.end());
    CHECK(row.label == it->label);
    CHECK(row.ops.size() == 2);
    CHECK(fs::exists(dir / "run1" / row.path));
    // The file holds exactly the in-memory rendering.
    const auto view = sample_view(policy, row.sample_id, row.view_index);
    CHECK(read_png(dir / "run1" / row.path) == render_view(policy, view, read_png(it->path)));
  }

  const auto m2 = generate_contrastive_set(policy, dataset, 1, dir / "run2");
  CHECK(contre::testing::slurp(dir / "run1" / "manifest.csv") == contre::testing::slurp(dir / "run2" / "manifest.csv"));

  std::reverse(dataset.begin(), dataset.end());
  std::rotate(dataset.begin(), dataset.begin() + 4, dataset.end());
  const auto m3 = generate_contrastive_set(policy, dataset, 1, dir / "run3", 3);
  CHECK(contre::testing::slurp(dir / "run1" / "manifest.csv") == contre::testing::slurp(dir / "run3" / "manifest.csv"));
  for (const auto& row : m1.rows) {
    const auto a = contre::testing::slurp(dir / "run1" / row.path);
    CHECK(a == contre::testing::slurp(dir / "run2" / row.path));
    CHECK(a == contre::testing::slurp(dir / "run3" / row.path));
  }

  const auto m4 = generate_contrastive_set(policy, dataset, 2, dir / "run4");
  CHECK(m4.rows.size() == 18);
  const auto reread = read_generation_manifest(dir / "run4" / "manifest.csv");
  CHECK(reread.rows == m4.rows);
}

TEST_CASE("generation reports unreadable inputs with their path") {
  const auto dir = contre::testing::scratch_dir("gen_err");
  std::vector<DatasetEntry> dataset = {{"ghost", dir / "ghost.png", 0}};
  try {
    generate_contrastive_set(default_policy(1), dataset, 1, dir / "out");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
    CHECK(std::string(e.what()).find("ghost.png") != std::string::npos);
  }
}
