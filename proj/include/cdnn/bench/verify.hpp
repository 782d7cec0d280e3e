#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cdnn::bench {

enum class VerifyKind { gradients, lemma, orthogonality };

std::string to_string(VerifyKind kind);
VerifyKind verify_kind_from_string(const std::string& name);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;  // statistics behind the verdict
};

struct VerifyReport {
  VerifyKind kind = VerifyKind::gradients;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool passed() const;
  std::string summary() const;  // one line per check
};

// 20 random networks, worst relative backprop vs central-difference error <= 1e-4.
VerifyReport verify_gradients(std::uint64_t seed = 1);

// 1000 random oracles: |h - theta (t - e)| <= 1e-12 and |mixture - g0| <= 1e-12.
VerifyReport verify_lemma(std::uint64_t seed = 2);

// Gateaux derivatives of the orthogonal score on the confound-hetero oracle:
// 20 x-points x 10 directions with `samples` draws each. At least 95% of the
// finite-difference estimates within 3 standard errors of 0, the analytic
// form exactly 0 everywhere, and the naive score rejecting 0 at 3 sigma for
// constant g shifts with |c| in {0.5, 1}.
VerifyReport verify_orthogonality(std::size_t samples = 100'000, std::uint64_t seed = 3);

VerifyReport verify(VerifyKind kind);

}  // namespace cdnn::bench
