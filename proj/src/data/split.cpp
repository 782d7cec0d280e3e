#include "cdnn/data/split.hpp"

#include "cdnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace cdnn::data {

SplitSpec SplitSpec::ihdp() { return {SplitScheme::ihdp_63_27_10, 0.63, 0.27, 0.10}; }

SplitSpec SplitSpec::twins_news() { return {SplitScheme::twins_news_56_24_20, 0.56, 0.24, 0.20}; }

SplitSpec SplitSpec::custom(double train, double validation, double test) {
  SplitSpec s{SplitScheme::custom, train, validation, test};
  s.validate();
  return s;
}

void SplitSpec::validate() const {
  if (!(train > 0.0 && validation > 0.0 && test > 0.0))
    throw ConfigError("split fractions must be positive");
  if (std::abs(train + validation + test - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1");
}

SplitSizes split_sizes(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  const double total = static_cast<double>(n);
  SplitSizes s;
  s.validation = static_cast<std::size_t>(std::floor(spec.validation * total));
  s.test = static_cast<std::size_t>(std::floor(spec.test * total + 0.5));
  if (s.validation + s.test >= n) throw SplitError("split leaves the training part empty");
  s.train = n - s.validation - s.test;
  if (s.validation == 0 || s.test == 0)
    throw SplitError("split of " + std::to_string(n) + " samples leaves an empty part");
  return s;
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec, std::uint64_t seed) {
  const SplitSizes sizes = split_sizes(n, spec);
  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  SplitIndices out;
  const auto a = perm.begin() + static_cast<std::ptrdiff_t>(sizes.train);
  const auto b = a + static_cast<std::ptrdiff_t>(sizes.validation);
  out.train.assign(perm.begin(), a);
  out.validation.assign(a, b);
  out.test.assign(b, perm.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

DataSplit split(const Dataset& data, const SplitSpec& spec, std::uint64_t seed) {
  DataSplit s;
  s.indices = split_indices(data.size(), spec, seed);
  s.train = data.subset(s.indices.train);
  s.validation = data.subset(s.indices.validation);
  s.test = data.subset(s.indices.test);
  return s;
}

std::string to_string(SplitScheme scheme) {
  switch (scheme) {
    case SplitScheme::ihdp_63_27_10: return "ihdp_63_27_10";
    case SplitScheme::twins_news_56_24_20: return "twins_news_56_24_20";
    case SplitScheme::custom: return "custom";
  }
  return "custom";
}

SplitScheme split_scheme_from_string(const std::string& name) {
  if (name == "ihdp_63_27_10") return SplitScheme::ihdp_63_27_10;
  if (name == "twins_news_56_24_20") return SplitScheme::twins_news_56_24_20;
  if (name == "custom") return SplitScheme::custom;
  throw ConfigError("unknown split scheme '" + name + "'");
}

}  // namespace cdnn::data
