#include "cdnn/bench/report.hpp"

#include "cdnn/data/csv.hpp"
#include "cdnn/error.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace cdnn::bench {

namespace {

constexpr const char* kHeader = "estimator,replication,status,sqrt_pehe,eps_ate,eps_ate_signed";

void put_row(std::ostringstream& out, const std::string& estimator, const std::string& replication,
             const std::string& status, double pehe, double ate, double signed_ate) {
  out << estimator << ',' << replication << ',' << status << ',' << data::format_double(pehe) << ','
      << data::format_double(ate) << ',' << data::format_double(signed_ate) << '\n';
}

double parse_metric(const std::string& field, std::size_t line) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (field.empty() || end != begin + field.size()) throw SchemaError(line, "bad number '" + field + "'");
  return v;
}

std::size_t parse_count(const std::string& field, std::size_t line) {
  if (field.empty() || field.find_first_not_of("0123456789") != std::string::npos)
    throw SchemaError(line, "bad count '" + field + "'");
  return std::stoull(field);
}

AggregateRow& aggregate_for(CsvReport& report, const std::string& name) {
  for (auto& a : report.aggregates)
    if (a.estimator == name) return a;
  report.aggregates.push_back({});
  report.aggregates.back().estimator = name;
  return report.aggregates.back();
}

}  // namespace

std::string csv_report(const MetricsReport& report) {
  std::ostringstream out;
  out << kHeader << '\n';
  for (const auto& r : report.rows) {
    if (r.ok)
      put_row(out, r.estimator, std::to_string(r.replication), "ok", r.sqrt_pehe, r.eps_ate, r.eps_ate_signed);
    else
      put_row(out, r.estimator, std::to_string(r.replication), "failed", std::numeric_limits<double>::quiet_NaN(),
              std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& a : report.aggregates) {
    if (a.all_failed()) {
      put_row(out, a.estimator, "mean", "failed", nan, nan, nan);
      continue;
    }
    const std::string n = "n=" + std::to_string(a.ok_count);
    put_row(out, a.estimator, "mean", n, a.sqrt_pehe.mean, a.eps_ate.mean, a.eps_ate_signed.mean);
    put_row(out, a.estimator, "sd", n, a.sqrt_pehe.sd, a.eps_ate.sd, a.eps_ate_signed.sd);
  }
  return out.str();
}

std::string markdown_report(const MetricsReport& report) {
  std::ostringstream out;
  out << "| Estimator | sqrt(PEHE) mean±sd | eps_ATE mean±sd | ok | failed | mean fit time (s) |\n"
      << "|---|---|---|---|---|---|\n";
  for (const auto& a : report.aggregates) {
    out << "| " << a.estimator << " | ";
    if (a.all_failed()) {
      out << "failed | failed | 0 | " << a.failed_count << " | - |\n";
      continue;
    }
    char runtime[32];
    std::snprintf(runtime, sizeof runtime, "%.2f", a.mean_runtime_seconds);
    out << format_cell(a.sqrt_pehe) << " | " << format_cell(a.eps_ate) << " | " << a.ok_count << " | "
        << a.failed_count << " | " << runtime << " |\n";
  }
  if (const auto failed = report.failure_count(); failed > 0)
    out << "\n" << failed << " failed fit(s) excluded from the aggregates.\n";
  return out.str();
}

void emit(const MetricsReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << (format == ReportFormat::csv ? csv_report(report) : markdown_report(report));
  out.flush();
  if (!out) throw IoError("error writing " + path.string());
}

CsvReport read_csv_report(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw SchemaError(1, "expected header '" + std::string(kHeader) + "'");
  CsvReport report;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto f = data::split_csv_line(line);
    if (f.size() != 6) throw SchemaError(number, "expected 6 fields, got " + std::to_string(f.size()));
    const std::string& name = f[0];
    const double pehe = parse_metric(f[3], number);
    const double ate = parse_metric(f[4], number);
    const double signed_ate = parse_metric(f[5], number);

    if (f[1] == "mean" || f[1] == "sd") {
      AggregateRow& a = aggregate_for(report, name);
      if (f[2] == "failed") continue;
      if (f[2].rfind("n=", 0) != 0) throw SchemaError(number, "bad aggregate status '" + f[2] + "'");
      a.ok_count = parse_count(f[2].substr(2), number);
      Summary* targets[] = {&a.sqrt_pehe, &a.eps_ate, &a.eps_ate_signed};
      const double values[] = {pehe, ate, signed_ate};
      for (int k = 0; k < 3; ++k) {
        targets[k]->count = a.ok_count;
        (f[1] == "mean" ? targets[k]->mean : targets[k]->sd) = values[k];
      }
      continue;
    }
    ReplicationRow r;
    r.estimator = name;
    r.replication = parse_count(f[1], number);
    if (f[2] != "ok" && f[2] != "failed") throw SchemaError(number, "bad status '" + f[2] + "'");
    r.ok = f[2] == "ok";
    r.sqrt_pehe = pehe;
    r.eps_ate = ate;
    r.eps_ate_signed = signed_ate;
    if (std::find(report.estimators.begin(), report.estimators.end(), name) == report.estimators.end())
      report.estimators.push_back(name);
    report.rows.push_back(std::move(r));
  }
  for (auto& a : report.aggregates)
    for (const auto& r : report.rows)
      if (r.estimator == a.estimator && !r.ok) ++a.failed_count;
  return report;
}

CsvReport load_csv_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_csv_report(buf.str());
}

}  // namespace cdnn::bench
