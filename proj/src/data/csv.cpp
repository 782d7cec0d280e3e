#include "cdnn/data/csv.hpp"

#include "cdnn/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace cdnn::data {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& field, std::size_t line) {
  const char* first = field.data();
  const char* last = first + field.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last)
    throw SchemaError(line, "cannot parse '" + field + "' as a number");
  if (!std::isfinite(v)) throw SchemaError(line, "non-finite value '" + field + "'");
  return v;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw SchemaError(1, "missing header");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "t" || header[1] != "y")
    throw SchemaError(1, "header must start with t,y");
  const bool has_truth = header.size() >= 4 && header[2] == "y1" && header[3] == "y0";
  if (!has_truth && header.size() >= 3 && (header[2] == "y1" || header[2] == "y0"))
    throw SchemaError(1, "ground truth needs both y1 and y0 columns, in that order");
  if (schema.require_ground_truth && !has_truth)
    throw SchemaError(1, "missing column y1/y0");
  const std::size_t first_x = has_truth ? 4 : 2;
  const std::size_t d = header.size() - first_x;
  if (d == 0) throw SchemaError(1, "missing covariate column x0");
  for (std::size_t j = 0; j < d; ++j)
    if (header[first_x + j] != "x" + std::to_string(j))
      throw SchemaError(1, "expected column x" + std::to_string(j) + ", found '" +
                               header[first_x + j] + "'");
  if (schema.covariates && *schema.covariates != d)
    throw SchemaError(1, "expected " + std::to_string(*schema.covariates) + " covariates, found " +
                             std::to_string(d));

  std::vector<double> t, y, y1, y0, x;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw SchemaError(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                     std::to_string(fields.size()));
    const double tv = parse_double(fields[0], line_no);
    if (tv != 0.0 && tv != 1.0) throw SchemaError(line_no, "treatment must be 0 or 1");
    t.push_back(tv);
    y.push_back(parse_double(fields[1], line_no));
    if (has_truth) {
      y1.push_back(parse_double(fields[2], line_no));
      y0.push_back(parse_double(fields[3], line_no));
      if (y.back() != (tv == 1.0 ? y1.back() : y0.back()))
        throw SchemaError(line_no, "y differs from the potential outcome of its arm");
    }
    for (std::size_t j = 0; j < d; ++j) x.push_back(parse_double(fields[first_x + j], line_no));
  }
  if (t.empty()) throw SchemaError(line_no, "no data rows");

  const auto n = static_cast<Eigen::Index>(t.size());
  Dataset out;
  out.t = Eigen::Map<Eigen::VectorXd>(t.data(), n);
  out.y = Eigen::Map<Eigen::VectorXd>(y.data(), n);
  out.x = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      x.data(), n, static_cast<Eigen::Index>(d));
  if (has_truth)
    out.truth = make_ground_truth(Eigen::Map<Eigen::VectorXd>(y1.data(), n),
                                  Eigen::Map<Eigen::VectorXd>(y0.data(), n));
  out.provenance = path.string();
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const bool truth = data.truth.has_value();
  out << "t,y";
  if (truth) out << ",y1,y0";
  for (std::size_t j = 0; j < data.covariate_width(); ++j) out << ",x" << j;
  out << '\n';
  for (Eigen::Index i = 0; i < data.t.size(); ++i) {
    out << (data.t(i) == 1.0 ? "1" : "0") << ',' << format_double(data.y(i));
    if (truth) out << ',' << format_double(data.truth->y1(i)) << ',' << format_double(data.truth->y0(i));
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) out << ',' << format_double(data.x(i, j));
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace cdnn::data
