#pragma once

#include "cdnn/data/dataset.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cdnn::data {

// Header: t,y[,y1,y0],x0,x1,...,x{d-1}
struct CsvSchema {
  std::optional<std::size_t> covariates;  // required d, if known
  bool require_ground_truth = false;
};

// Throws SchemaError (with the 1-based line number) on a malformed header,
// missing column, non-numeric or non-finite field, or non-binary t.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

// Doubles are written with 17 significant digits so reloading is value-exact.
void write_csv(const Dataset& data, const std::filesystem::path& path);

std::string format_double(double v);  // %.17g
std::vector<std::string> split_csv_line(const std::string& line);
double parse_double(const std::string& field, std::size_t line);

}  // namespace cdnn::data
