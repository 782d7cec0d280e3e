// cdnn: generate data, run benchmark suites, verify invariants, fit and score.
//
// Exit status: 0 success, 1 failed check or benchmark, 2 bad configuration or input.

#include "cdnn/bench/config.hpp"
#include "cdnn/bench/report.hpp"
#include "cdnn/bench/run.hpp"
#include "cdnn/bench/verify.hpp"
#include "cdnn/data/csv.hpp"
#include "cdnn/data/dgp.hpp"
#include "cdnn/error.hpp"
#include "cdnn/estimator/checkpoint.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace cdnn;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfig = 2;

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
}

struct GenerateArgs {
  std::string family = "confound-hetero";
  std::string dgp_file;
  std::size_t n = 1000;
  std::size_t d = 5;
  double sigma = 0.5;
  std::uint64_t seed = 0;
  std::string out;
  bool no_truth = false;
};

int cmd_generate(const GenerateArgs& a) {
  const data::DgpSpec spec =
      a.dgp_file.empty() ? data::named_dgp(a.family, a.d, a.sigma, a.seed) : bench::dgp_from_json(read_json(a.dgp_file));
  data::Dataset ds = data::generate(spec, a.n);
  if (a.no_truth) ds.truth.reset();
  data::write_csv(ds, a.out);
  std::cout << "wrote " << ds.size() << " rows (" << ds.treated_count() << " treated) to " << a.out << "\n";
  return kOk;
}

struct BenchArgs {
  std::string config;
  std::string output;
  std::size_t workers = 0;
};

int cmd_bench(const BenchArgs& a) {
  bench::ExperimentConfig cfg = bench::load_experiment(a.config);
  if (!a.output.empty()) cfg.output = a.output;
  if (a.workers > 0) cfg.workers = a.workers;
  const auto report = bench::run(cfg);
  if (!cfg.output.empty()) {
    bench::emit(report, bench::ReportFormat::csv, cfg.output + ".csv");
    bench::emit(report, bench::ReportFormat::markdown, cfg.output + ".md");
  }
  std::cout << bench::markdown_report(report);
  for (const auto& r : report.rows)
    if (!r.ok) std::cerr << "warning: " << r.estimator << " replication " << r.replication << ": " << r.error << "\n";
  for (const auto& agg : report.aggregates)
    if (agg.all_failed()) return kFailure;
  return kOk;
}

int cmd_verify(const std::string& which) {
  std::vector<bench::VerifyKind> kinds;
  if (which == "all")
    kinds = {bench::VerifyKind::gradients, bench::VerifyKind::lemma, bench::VerifyKind::orthogonality};
  else
    kinds = {bench::verify_kind_from_string(which)};
  bool ok = true;
  for (auto k : kinds) {
    const auto r = bench::verify(k);
    std::cout << r.summary();
    ok = ok && r.passed();
  }
  return ok ? kOk : kFailure;
}

struct FitArgs {
  std::string data;
  std::string variant = "freezing";
  std::string settings;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_fit(const FitArgs& a) {
  est::CdnnConfig cfg = a.settings.empty() ? est::CdnnConfig{} : est::cdnn_config_from_json(read_json(a.settings));
  cfg.seed = a.seed;
  const auto ds = data::load_csv(a.data);
  const auto model = est::fit(ds, est::variant_from_string(a.variant), cfg);
  est::save_checkpoint(model, a.out);
  std::cout << "fitted " << model.members.size() << " member(s) on " << ds.size() << " rows, saved " << a.out
            << "\n";
  return kOk;
}

struct ScoreArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
};

int cmd_score(const ScoreArgs& a) {
  const auto model = est::load_checkpoint(a.checkpoint);
  const auto ds = data::load_csv(a.data, {.covariates = model.members.at(0).stage1.network.covariate_width()});
  const Eigen::VectorXd ite = est::predict_ite(model, ds.x);
  std::ofstream out(a.out);
  if (!out) throw IoError("cannot write " + a.out);
  out << "row,ite\n";
  for (Eigen::Index i = 0; i < ite.size(); ++i) out << i << ',' << data::format_double(ite[i]) << '\n';
  if (!out) throw IoError("error writing " + a.out);
  std::cout << "scored " << ite.size() << " rows, mean ITE " << ite.mean() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal double neural network estimator and benchmark harness"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Draw a synthetic dataset to CSV");
  generate->add_option("--family", gen.family, "Named family")
      ->check(CLI::IsMember(data::named_dgp_families()));
  generate->add_option("--dgp", gen.dgp_file, "JSON DGP description, overrides --family")->check(CLI::ExistingFile);
  generate->add_option("-n,--samples", gen.n, "Rows")->check(CLI::PositiveNumber);
  generate->add_option("-d,--covariates", gen.d, "Covariate count for named families");
  generate->add_option("--sigma", gen.sigma, "Outcome noise sd for named families");
  generate->add_option("--seed", gen.seed);
  generate->add_option("-o,--out", gen.out, "Output CSV")->required();
  generate->add_flag("--no-truth", gen.no_truth, "Drop the y1/y0 columns");

  BenchArgs ben;
  auto* benchcmd = app.add_subcommand("bench", "Run an experiment and write <output>.csv and <output>.md");
  benchcmd->add_option("config", ben.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  benchcmd->add_option("-o,--output", ben.output, "Report path prefix, overrides the config");
  benchcmd->add_option("-j,--workers", ben.workers, "Worker threads, overrides the config");

  std::string which = "all";
  auto* verifycmd = app.add_subcommand("verify", "Check gradients, the residual identity or orthogonality");
  verifycmd->add_option("kind", which, "gradients, lemma, orthogonality or all")
      ->check(CLI::IsMember({"gradients", "lemma", "orthogonality", "all"}));

  FitArgs fit;
  auto* fitcmd = app.add_subcommand("fit", "Fit a CDNN on a CSV and save a checkpoint");
  fitcmd->add_option("data", fit.data, "Training CSV")->required()->check(CLI::ExistingFile);
  fitcmd->add_option("--variant", fit.variant)->check(CLI::IsMember({"freezing", "explicit_residual"}));
  fitcmd->add_option("--settings", fit.settings, "CDNN settings JSON")->check(CLI::ExistingFile);
  fitcmd->add_option("--seed", fit.seed);
  fitcmd->add_option("-o,--out", fit.out, "Checkpoint path")->required();

  ScoreArgs sc;
  auto* scorecmd = app.add_subcommand("score", "Write per-row ITE predictions of a checkpoint");
  scorecmd->add_option("checkpoint", sc.checkpoint)->required()->check(CLI::ExistingFile);
  scorecmd->add_option("data", sc.data, "CSV with t,y and covariates")->required()->check(CLI::ExistingFile);
  scorecmd->add_option("-o,--out", sc.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*generate) return cmd_generate(gen);
    if (*benchcmd) return cmd_bench(ben);
    if (*verifycmd) return cmd_verify(which);
    if (*fitcmd) return cmd_fit(fit);
    if (*scorecmd) return cmd_score(sc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const SchemaError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
