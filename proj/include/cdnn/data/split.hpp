#pragma once

#include "cdnn/data/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cdnn::data {

enum class SplitScheme { ihdp_63_27_10, twins_news_56_24_20, custom };

struct SplitSpec {
  SplitScheme scheme = SplitScheme::ihdp_63_27_10;
  double train = 0.63;
  double validation = 0.27;
  double test = 0.10;

  static SplitSpec ihdp();
  static SplitSpec twins_news();
  static SplitSpec custom(double train, double validation, double test);

  void validate() const;  // positive fractions summing to 1 +- 1e-9
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;

  bool operator==(const SplitSizes&) const = default;
};

// Validation gets floor(validation * n), test gets round(test * n) (nearest,
// halves up) and train takes the remainder. Throws SplitError if any part is
// empty.
SplitSizes split_sizes(std::size_t n, const SplitSpec& spec);

struct SplitIndices {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> validation;
  std::vector<Eigen::Index> test;
};

// Uniform random partition without replacement, sorted within each part.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec, std::uint64_t seed);

struct DataSplit {
  Dataset train;
  Dataset validation;
  Dataset test;
  SplitIndices indices;
};

DataSplit split(const Dataset& data, const SplitSpec& spec, std::uint64_t seed);

std::string to_string(SplitScheme scheme);
SplitScheme split_scheme_from_string(const std::string& name);

}  // namespace cdnn::data
