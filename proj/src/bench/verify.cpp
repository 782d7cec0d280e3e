#include "cdnn/bench/verify.hpp"

#include "cdnn/data/dgp.hpp"
#include "cdnn/error.hpp"
#include "cdnn/nn/network.hpp"
#include "cdnn/nn/training.hpp"
#include "cdnn/theory/oracle.hpp"
#include "cdnn/theory/orthogonality.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <thread>

namespace cdnn::bench {

std::string to_string(VerifyKind kind) {
  switch (kind) {
    case VerifyKind::gradients: return "gradients";
    case VerifyKind::lemma: return "lemma";
    case VerifyKind::orthogonality: return "orthogonality";
  }
  return "unknown";
}

VerifyKind verify_kind_from_string(const std::string& name) {
  for (auto k : {VerifyKind::gradients, VerifyKind::lemma, VerifyKind::orthogonality})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown verify kind '" + name + "' (gradients, lemma, orthogonality)");
}

bool VerifyReport::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::string VerifyReport::summary() const {
  std::string out;
  for (const auto& c : checks) out += (c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s: %s in %.2f s\n", to_string(kind).c_str(), passed() ? "ok" : "FAILED", seconds);
  return out + buf;
}

namespace {

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

VerifyReport verify_gradients(std::uint64_t seed) {
  Stopwatch clock;
  VerifyReport report;
  report.kind = VerifyKind::gradients;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> width(2, 8), depth(1, 3), cov(1, 5);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);

  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    nn::Architecture arch;
    arch.covariate_width = cov(rng);
    arch.hidden_widths.assign(depth(rng), 0);
    for (auto& w : arch.hidden_widths) w = width(rng);
    arch.concat_to_all_layers = coin(rng);
    nn::Network net(arch);
    nn::glorot_initialize(net, rng);
    for (auto& p : net.mutable_parameters())
      for (Eigen::Index i = 0; i < p.bias.size(); ++i) p.bias(i) = 0.1 * normal(rng);

    nn::Batch batch;
    const Eigen::Index n = 8;
    batch.x.resize(static_cast<Eigen::Index>(arch.covariate_width), n);
    batch.t.resize(n);
    batch.y.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < batch.x.rows(); ++i) batch.x(i, j) = normal(rng);
      batch.t(j) = coin(rng) ? 1.0 : 0.0;
      batch.y(j) = normal(rng);
    }
    worst = std::max(worst, nn::gradient_check(net, batch, 1e-5));
  }
  report.checks.push_back({"backprop vs central differences", worst <= 1e-4,
                           fmt("20 networks, max relative error %.3e (limit 1e-4)", worst)});
  report.seconds = clock.seconds();
  return report;
}

VerifyReport verify_lemma(std::uint64_t seed) {
  Stopwatch clock;
  VerifyReport report;
  report.kind = VerifyKind::lemma;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  std::normal_distribution<double> normal;

  constexpr int kOracles = 1000;
  int h_ok = 0, mixture_ok = 0;
  double worst_h = 0.0, worst_mixture = 0.0;
  for (int k = 0; k < kOracles; ++k) {
    const std::size_t d = dim(rng);
    const auto oracle = theory::random_oracle(d, rng);
    std::vector<double> x(d);
    for (auto& v : x) v = normal(rng);

    double h_err = 0.0;
    for (double t : {0.0, 1.0}) {
      const auto h = theory::residualized_h(oracle, t, x, std::numeric_limits<double>::infinity());
      h_err = std::max(h_err, std::abs(h.from_definition - h.from_lemma));
    }
    const double mix_err = std::abs(theory::marginal_outcome(oracle, x) - oracle.g0(x));
    worst_h = std::max(worst_h, h_err);
    worst_mixture = std::max(worst_mixture, mix_err);
    h_ok += h_err <= 1e-12;
    mixture_ok += mix_err <= 1e-12;
  }
  report.checks.push_back({"h(t, x) = theta0(x) (t - e0(x))", h_ok == kOracles,
                           fmt("%d/%d within 1e-12, worst %.3e", h_ok, kOracles, worst_h)});
  report.checks.push_back({"e0 f(1, x) + (1 - e0) f(0, x) = g0(x)", mixture_ok == kOracles,
                           fmt("%d/%d within 1e-12, worst %.3e", mixture_ok, kOracles, worst_mixture)});
  report.seconds = clock.seconds();
  return report;
}

VerifyReport verify_orthogonality(std::size_t samples, std::uint64_t seed) {
  Stopwatch clock;
  VerifyReport report;
  report.kind = VerifyKind::orthogonality;
  const auto spec = data::named_dgp("confound-hetero");
  const auto oracle = data::oracle_of(spec);
  const auto directions = theory::standard_perturbations(spec.d);

  // x-points where every direction keeps the propensity inside the guard band.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> points;
  while (points.size() < 20) {
    std::vector<double> x(spec.d);
    for (auto& v : x) v = normal(rng);
    try {
      for (const auto& p : directions) theory::validate_perturbation(oracle, p, x);
    } catch (const InvalidPerturbation&) {
      continue;
    }
    points.push_back(std::move(x));
  }

  const std::vector<double> shifts{-1.0, -0.5, 0.5, 1.0};
  const std::size_t probes = points.size() * directions.size();
  const std::size_t controls = points.size() * shifts.size();
  std::vector<theory::MonteCarloEstimate> fd(probes), analytic(probes), control(controls);

  // Every task has its own seed, so the split across threads does not matter.
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < probes + controls; k = next++) {
      if (k < probes) {
        const auto& x = points[k / directions.size()];
        const auto& p = directions[k % directions.size()];
        const std::uint64_t s = data::mix_seed(seed, k);
        fd[k] = theory::gateaux_derivative(oracle, p, x, samples, theory::GateauxMethod::finite_difference, s);
        analytic[k] = theory::gateaux_derivative(oracle, p, x, samples, theory::GateauxMethod::analytic, s);
      } else {
        const std::size_t c = k - probes;
        control[c] = theory::non_orthogonal_control(oracle, theory::constant_g_shift(shifts[c % shifts.size()]),
                                                    points[c / shifts.size()], samples,
                                                    data::mix_seed(seed + 1, c));
      }
    }
  };
  {
    const unsigned threads = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }

  std::size_t within = 0, exact_zero = 0, rejected = 0;
  double worst_z = 0.0;
  for (std::size_t k = 0; k < probes; ++k) {
    within += fd[k].within(3.0);
    exact_zero += analytic[k].estimate == 0.0;
    if (fd[k].mc_stderr > 0.0) worst_z = std::max(worst_z, std::abs(fd[k].estimate) / fd[k].mc_stderr);
  }
  double weakest_z = std::numeric_limits<double>::infinity();
  for (const auto& c : control) {
    rejected += !c.within(3.0);
    if (c.mc_stderr > 0.0) weakest_z = std::min(weakest_z, std::abs(c.estimate) / c.mc_stderr);
  }

  const double share = static_cast<double>(within) / static_cast<double>(probes);
  report.checks.push_back({"finite-difference Gateaux derivative within 3 sigma of 0", share >= 0.95,
                           fmt("%zu/%zu probes (%.1f%%, need 95%%), max |z| %.2f, %zu samples each", within,
                               probes, 100.0 * share, worst_z, samples)});
  report.checks.push_back({"analytic Gateaux derivative exactly 0", exact_zero == probes,
                           fmt("%zu/%zu probes", exact_zero, probes)});
  report.checks.push_back({"naive score rejects 0 for |c| >= 0.5", rejected == controls,
                           fmt("%zu/%zu rejected at 3 sigma, smallest |z| %.1f", rejected, controls, weakest_z)});
  report.seconds = clock.seconds();
  return report;
}

VerifyReport verify(VerifyKind kind) {
  switch (kind) {
    case VerifyKind::gradients: return verify_gradients();
    case VerifyKind::lemma: return verify_lemma();
    case VerifyKind::orthogonality: return verify_orthogonality();
  }
  throw ConfigError("unknown verify kind");
}

}  // namespace cdnn::bench
