#include "doctest.h"

#include "cdnn/data/csv.hpp"
#include "cdnn/data/dgp.hpp"
#include "cdnn/data/split.hpp"
#include "cdnn/error.hpp"
#include "cdnn/theory/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

using namespace cdnn;
using namespace cdnn::data;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cdnn_data_test_" + name);
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

DgpSpec constant_effect_spec(double base_intercept, bool affine_base) {
  DgpSpec s;
  s.d = 3;
  s.propensity.kind = PropensityForm::Kind::constant;
  s.propensity.probability = 0.5;
  s.outcome.base_intercept = base_intercept;
  s.outcome.base_linear = affine_base ? std::vector<double>{0.7, -1.3, 0.2}
                                      : std::vector<double>{0, 0, 0};
  s.outcome.effect_intercept = 2.0;
  s.outcome.effect_linear = {0, 0, 0};
  s.noise_sigma = 0.0;
  s.seed = 5;
  return s;
}

}  // namespace

TEST_CASE("generate: noiseless constant effect") {
  const auto exact = generate(constant_effect_spec(1.0, false), 500);
  for (Eigen::Index i = 0; i < exact.truth->theta.size(); ++i) CHECK(exact.truth->theta(i) == 2.0);

  // With an affine baseline theta = y1 - y0 only carries rounding.
  const auto affine = generate(constant_effect_spec(1.0, true), 500);
  CHECK((affine.truth->theta.array() - 2.0).abs().maxCoeff() <= 1e-14);
}

TEST_CASE("generate: deterministic in the seed and factual-consistent") {
  const auto spec = named_dgp("confound-hetero", 5, 0.5, 99);
  const auto a = generate(spec, 300);
  const auto b = generate(spec, 300);
  CHECK(a.same_values(b));
  CHECK_NOTHROW(a.validate());
  for (Eigen::Index i = 0; i < a.t.size(); ++i) {
    CHECK(a.y(i) == a.t(i) * a.truth->y1(i) + (1 - a.t(i)) * a.truth->y0(i));
    CHECK(a.truth->theta(i) == a.truth->y1(i) - a.truth->y0(i));
  }
  auto other = spec;
  other.seed = 100;
  CHECK_FALSE(generate(other, 300).same_values(a));
}

TEST_CASE("generate: treated fraction tracks the logistic propensity") {
  const auto spec = named_dgp("confound-linear", 5, 0.5, 17);
  const auto data = generate(spec, 100'000);
  std::vector<double> row;
  double treated = 0.0, e_sum = 0.0, count = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double e = spec.e0(data.row(i, row));
    if (e < 0.6 || e > 0.7) continue;
    ++count;
    e_sum += e;
    treated += data.t(static_cast<Eigen::Index>(i));
  }
  REQUIRE(count > 1000);
  const double frac = treated / count;
  const double p = e_sum / count;
  const double sd = std::sqrt(p * (1 - p) / count);
  CHECK(frac >= 0.6 - 3 * sd);
  CHECK(frac <= 0.7 + 3 * sd);
  CHECK(std::abs(frac - p) <= 3 * sd);
}

TEST_CASE("spec validation") {
  auto s = named_dgp("null-effect");
  s.propensity.weights = {1.2, 0.5, 0, 0, 0};  // radius-3 logit reaches 3.9
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = named_dgp("null-effect");
  s.outcome.base_linear.pop_back();
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = named_dgp("null-effect");
  s.noise_sigma = -1;
  CHECK_THROWS_AS(generate(s, 10), ConfigError);
  CHECK_THROWS_AS(named_dgp("no-such-family"), ConfigError);
}

TEST_CASE("oracle_of: mixture substitution and consistency") {
  auto s = constant_effect_spec(0.75, false);
  s.propensity.probability = 0.3;
  s.outcome.effect_intercept = 1.5;
  const auto oracle = oracle_of(s);
  const std::vector<double> x{0.1, 0.2, 0.3};
  CHECK(oracle.g0(x) == doctest::Approx(0.75 + 0.3 * 1.5).epsilon(1e-15));

  auto null = named_dgp("null-effect", 4, 0.5, 1);
  const auto null_oracle = oracle_of(null);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> z(4);
    for (auto& v : z) v = normal(rng);
    CHECK(std::abs(null_oracle.g0(z) - null.f0(z)) <= 1e-14);
    for (const auto& name : named_dgp_families())
      CHECK_NOTHROW(theory::check_consistency(oracle_of(named_dgp(name, 4, 0.5, 1)), z));
  }
}

TEST_CASE("oracle and data agree on binned outcome means") {
  const auto spec = named_dgp("confound-hetero", 3, 0.5, 23);
  const auto oracle = oracle_of(spec);
  const auto data = generate(spec, 100'000);
  std::vector<double> row;
  std::vector<double> residual;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i, row);
    if (x[0] < 0.0 || x[0] > 0.5) continue;
    residual.push_back(data.y(static_cast<Eigen::Index>(i)) - oracle.g0(x));
  }
  const double m = std::accumulate(residual.begin(), residual.end(), 0.0) / residual.size();
  double ss = 0.0;
  for (double r : residual) ss += (r - m) * (r - m);
  const double se = std::sqrt(ss / (residual.size() - 1) / residual.size());
  CHECK(std::abs(m) <= 3 * se);
}

TEST_CASE("confounding biases the naive difference in means") {
  const auto spec = named_dgp("confound-linear", 5, 0.5, 31);
  const auto data = generate(spec, 100'000);
  double s1 = 0, s0 = 0, q1 = 0, q0 = 0, n1 = 0, n0 = 0;
  for (Eigen::Index i = 0; i < data.y.size(); ++i) {
    const double y = data.y(i);
    if (data.t(i) == 1.0) { s1 += y; q1 += y * y; ++n1; }
    else { s0 += y; q0 += y * y; ++n0; }
  }
  const double m1 = s1 / n1, m0 = s0 / n0;
  const double se = std::sqrt((q1 / n1 - m1 * m1) / n1 + (q0 / n0 - m0 * m0) / n0);
  CHECK(std::abs((m1 - m0) - 2.0) > 5 * se);
}

TEST_CASE("split sizes follow the remainder rule") {
  CHECK(split_sizes(1000, SplitSpec::ihdp()) == SplitSizes{630, 270, 100});
  CHECK(split_sizes(747, SplitSpec::ihdp()) == SplitSizes{471, 201, 75});
  CHECK(split_sizes(1000, SplitSpec::twins_news()) == SplitSizes{560, 240, 200});
  CHECK(split_sizes(30, SplitSpec::ihdp()) == SplitSizes{19, 8, 3});
  CHECK_THROWS_AS(split_sizes(3, SplitSpec::ihdp()), SplitError);
  CHECK_THROWS_AS(SplitSpec::custom(0.5, 0.5, 0.1), ConfigError);
  CHECK_THROWS_AS(SplitSpec::custom(0.9, 0.1, 0.0), ConfigError);
}

TEST_CASE("split parts are disjoint, exhaustive and seed-deterministic") {
  for (std::size_t n : {10u, 97u, 747u, 2000u}) {
    const auto idx = split_indices(n, SplitSpec::ihdp(), 3);
    std::set<Eigen::Index> all;
    all.insert(idx.train.begin(), idx.train.end());
    all.insert(idx.validation.begin(), idx.validation.end());
    all.insert(idx.test.begin(), idx.test.end());
    CHECK(all.size() == n);
    CHECK(idx.train.size() + idx.validation.size() + idx.test.size() == n);
    CHECK(*all.rbegin() == static_cast<Eigen::Index>(n - 1));
    const auto again = split_indices(n, SplitSpec::ihdp(), 3);
    CHECK(again.test == idx.test);
  }
}

TEST_CASE("permuting the input keeps split sizes") {
  const auto data = generate(named_dgp("confound-linear", 3, 0.5, 1), 747);
  std::vector<Eigen::Index> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(8);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto a = split(data, SplitSpec::ihdp(), 4);
  const auto b = split(data.subset(perm), SplitSpec::ihdp(), 4);
  CHECK(a.test.size() == b.test.size());
  CHECK(a.validation.size() == b.validation.size());
  CHECK(a.train.size() == b.train.size());
  CHECK_FALSE(a.test.same_values(b.test));
}

TEST_CASE("csv: minimal file with ground truth") {
  const auto p = temp_file("truth.csv");
  write_text(p, "t,y,y1,y0,x0,x1\n1,3.5,3.5,1,0.1,0.2\n0,-1,2,-1,0.3,0.4\n");
  const auto d = load_csv(p);
  REQUIRE(d.truth.has_value());
  CHECK(d.size() == 2);
  CHECK(d.covariate_width() == 2);
  CHECK(d.truth->theta(0) == 2.5);
  CHECK(d.truth->theta(1) == 3.0);
  CHECK(d.x(1, 1) == 0.4);
}

TEST_CASE("csv: file without potential outcomes") {
  const auto p = temp_file("plain.csv");
  write_text(p, "t,y,x0\n1,3.5,0.1\n0,-1,0.3\n");
  const auto d = load_csv(p);
  CHECK_FALSE(d.truth.has_value());
  CHECK_THROWS_AS(load_csv(p, {std::nullopt, true}), SchemaError);
}

TEST_CASE("csv: schema errors carry the line") {
  const auto p = temp_file("bad.csv");
  write_text(p, "t,y,x0\n1,3.5,0.1\n2,1,0.3\n");
  try {
    load_csv(p);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.row() == 3);
  }
  write_text(p, "t,y,x0\n1,nan,0.1\n");
  CHECK_THROWS_AS(load_csv(p), SchemaError);
  write_text(p, "t,x0\n1,0.1\n");
  CHECK_THROWS_AS(load_csv(p), SchemaError);
  write_text(p, "t,y,x1\n1,0.5,0.1\n");
  CHECK_THROWS_AS(load_csv(p), SchemaError);
  write_text(p, "t,y,x0\n1,0.5\n");
  CHECK_THROWS_AS(load_csv(p), SchemaError);
  write_text(p, "t,y,x0,x1\n1,0.5,1,2\n");
  CHECK_THROWS_AS(load_csv(p, {3, false}), SchemaError);
  CHECK_THROWS_AS(load_csv(temp_file("does_not_exist.csv")), IoError);
}

TEST_CASE("csv: round trip is value-exact") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto spec = named_dgp("confound-hetero", 4, 0.7, seed);
    spec.covariate_law = seed == 2 ? CovariateLaw::uniform : CovariateLaw::standard_normal;
    const auto data = generate(spec, 100);
    const auto p = temp_file("roundtrip.csv");
    write_csv(data, p);
    CHECK(load_csv(p).same_values(data));
  }
}

TEST_CASE("replications") {
  const auto base = named_dgp("confound-hetero", 5, 0.5, 1234);
  const auto single = make_replications(base, 1);
  CHECK(single.spec(0).seed == base.seed);
  CHECK(generate(single.spec(0), 50).same_values(generate(base, 50)));

  const auto set = make_replications(base, 10, true);
  const auto r7 = generate(set.spec(7), 60);
  const auto r3 = generate(set.spec(3), 60);
  std::vector<Dataset> in_order;
  for (std::size_t i = 0; i < set.count(); ++i) in_order.push_back(generate(set.spec(i), 60));
  CHECK(in_order[7].same_values(r7));
  CHECK(in_order[3].same_values(r3));
  for (std::size_t i = 0; i < in_order.size(); ++i)
    for (std::size_t j = i + 1; j < in_order.size(); ++j)
      CHECK_FALSE(in_order[i].same_values(in_order[j]));

  CHECK(set.spec(4).outcome.base_linear[1] != base.outcome.base_linear[1]);
  CHECK(set.spec(4).outcome.effect_linear == base.outcome.effect_linear);
  CHECK(set.spec(4).outcome.effect_intercept == base.outcome.effect_intercept);
  CHECK(set.spec(4).propensity.weights == base.propensity.weights);
  CHECK_THROWS_AS(make_replications(base, 0), ConfigError);
}
