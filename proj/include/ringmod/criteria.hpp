#pragma once

#include <string>
#include <vector>

#include "ringmod/quadrature.hpp"

namespace ringmod {

enum class Verdict { diverges, converges, inconclusive };
const char* to_string(Verdict v);

struct ProbePoint {
  double cutoff;
  double partial;
};

/// Outcome of probing int_c^delta g(t) dt as the cutoff c -> 0. Callers should
/// look at the trace shape, not only the verdict.
struct DivergenceVerdict {
  Verdict verdict = Verdict::inconclusive;
  /// Extrapolated integral when converging, +inf when diverging.
  double value = 0.0;
  std::vector<ProbePoint> trace;
  std::string note;
};

struct DivergenceOptions {
  /// Cutoffs c_k = delta * 2^{-k}, k = 1..probes.
  int probes = 64;
  double escape_threshold = 1e6;
  /// Successive increment ratios all <= this over the window: converges.
  double converge_ratio = 0.95;
  /// Successive increment ratios all >= this over the window: diverges.
  double diverge_ratio = 0.999;
  int window = 8;
};

/// Probes int_0^delta dt / (t^{(n-1)/(p-1)} q(t)^{1/(p-1)}) for n-1 < p <= n.
DivergenceVerdict divergence_test(const ScalarFunction& qprof, double p, int n, double delta,
                                  const QuadratureConfig& cfg, const DivergenceOptions& opts = {});

/// Integrand of the divergence integral for given (p, n).
ScalarFunction divergence_integrand(const ScalarFunction& qprof, double p, int n);

struct FmoOptions {
  double escape_threshold = 1e6;
  /// Tail log-log slope of the oscillation trace above this: unbounded.
  double slope_threshold = 0.25;
};

struct FmoResult {
  double score = 0.0;
  bool infinite = false;
  /// (eps, mean oscillation over B(x0, eps)).
  std::vector<ProbePoint> trace;
};

/// Mean oscillation (1/|B|) int_B |Q - Q_B| over shrinking balls, Monte Carlo
/// with the same unit-ball samples rescaled for every radius.
FmoResult fmo_estimate(const WeightField& q, std::span<const double> x0,
                       const std::vector<double>& eps_sequence, const QuadratureConfig& cfg,
                       const FmoOptions& opts = {});

/// Q~(y) = Q(y / |y|^2); FMO at infinity is FMO of Q~ at the origin.
WeightField invert_at_infinity(const WeightField& q);

struct LogGrowthOptions {
  int probes = 48;
  double slack = 0.05;
};

struct LogGrowthResult {
  bool bounded = false;
  /// (r, q(r) / log^{n-1}(1/r)).
  std::vector<ProbePoint> trace;
};

/// q(r) = O(log^{n-1}(1/r)) as r -> 0, judged on r_k = r0' 2^{-k}.
LogGrowthResult log_growth_test(const ScalarFunction& qprof, int n, double r0,
                                const LogGrowthOptions& opts = {});

enum class PsiCase { fmo, log_growth, calculus_c };
const char* to_string(PsiCase c);

/// Proof that the hypothesis test for a psi construction case was run.
/// Only obtainable from the test results.
class HypothesisEvidence {
 public:
  static HypothesisEvidence from(const FmoResult& r);
  static HypothesisEvidence from(const LogGrowthResult& r);
  static HypothesisEvidence from(const DivergenceVerdict& v);

  PsiCase which() const noexcept { return case_; }
  bool holds() const noexcept { return holds_; }
  bool decided() const noexcept { return decided_; }

 private:
  HypothesisEvidence(PsiCase c, bool holds, bool decided) : case_(c), holds_(holds), decided_(decided) {}
  PsiCase case_;
  bool holds_;
  bool decided_;
};

struct PsiConstruction {
  ScalarFunction psi;
  double eps0 = 0.5;
  PsiCase case_tag = PsiCase::calculus_c;
  /// Whether the full divergence hypothesis (I -> inf) was certified.
  bool hypothesis_holds = false;
  /// I(eps, eps0) = int_eps^eps0 psi(t) dt.
  double I(double eps, double eps0) const;
  QuadratureConfig quad;
};

/// calculus_c: psi = 1/(t^{(n-1)/(p-1)} q^{1/(p-1)}); fmo, log_growth:
/// psi = 1/(t log(1/t)). Throws RefusalError without matching evidence.
PsiConstruction construct_psi(PsiCase which, const ScalarFunction& qprof, double p, int n,
                              const HypothesisEvidence& evidence, double eps0 = 0.5,
                              const QuadratureConfig& cfg = {});

/// int_{A(y0, eps, eps0)} Q psi^p dm / I(eps, eps0)^p.
double alpha_ratio(const WeightField& q, std::span<const double> y0, const PsiConstruction& psi,
                   double eps, double eps0, double p, const QuadratureConfig& cfg);

/// alpha_ratio along eps_k = eps0 2^{-k}, k = 1..count; cutoff in `cutoff`.
std::vector<ProbePoint> alpha_trace(const WeightField& q, std::span<const double> y0,
                                    const PsiConstruction& psi, double p, int count,
                                    const QuadratureConfig& cfg);

/// CSV rows "cutoff,value" for plotting.
std::string trace_to_csv(const std::vector<ProbePoint>& trace, const std::string& value_header);

}  // namespace ringmod
