#include "ringmod/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ringmod/errors.hpp"

namespace ringmod {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::diverges: return "diverges";
    case Verdict::converges: return "converges";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

const char* to_string(PsiCase c) {
  switch (c) {
    case PsiCase::fmo: return "fmo";
    case PsiCase::log_growth: return "log_growth";
    case PsiCase::calculus_c: return "calculus_c";
  }
  return "?";
}

namespace {

void check_exponent_range(double p, int n, const char* who) {
  if (n < 2) throw InputError(std::string(who) + ": n must be >= 2");
  if (!(p > n - 1) || !(p <= n)) throw InputError(std::string(who) + ": require n-1 < p <= n");
}

}  // namespace

ScalarFunction divergence_integrand(const ScalarFunction& qprof, double p, int n) {
  const double beta = (n - 1.0) / (p - 1.0);
  const double kappa = 1.0 / (p - 1.0);
  return [qprof, beta, kappa](double t) {
    const double q = qprof(t);
    if (!(q > 0.0)) return std::numeric_limits<double>::infinity();
    return 1.0 / (std::pow(t, beta) * std::pow(q, kappa));
  };
}

DivergenceVerdict divergence_test(const ScalarFunction& qprof, double p, int n, double delta,
                                  const QuadratureConfig& cfg, const DivergenceOptions& opts) {
  check_exponent_range(p, n, "divergence_test");
  if (!(delta > 0.0)) throw InputError("divergence_test: delta must be > 0");
  if (opts.probes < opts.window + 2 || opts.window < 2) {
    throw InputError("divergence_test: need probes >= window + 2 and window >= 2");
  }
  const ScalarFunction g = divergence_integrand(qprof, p, n);

  DivergenceVerdict out;
  std::vector<double> pieces;
  double partial = 0.0;
  double upper = delta;
  for (int k = 1; k <= opts.probes; ++k) {
    const double cutoff = delta * std::ldexp(1.0, -k);
    const Estimate piece = radial_integral(g, cutoff, upper, cfg);
    upper = cutoff;
    if (piece.infinite) {
      out.trace.push_back({cutoff, std::numeric_limits<double>::infinity()});
      out.verdict = Verdict::diverges;
      out.value = std::numeric_limits<double>::infinity();
      out.note = "integrand infinite on a subinterval (q vanishes or is singular)";
      return out;
    }
    pieces.push_back(piece.value);
    partial += piece.value;
    out.trace.push_back({cutoff, partial});
    if (partial > opts.escape_threshold) {
      out.verdict = Verdict::diverges;
      out.value = std::numeric_limits<double>::infinity();
      out.note = "partial integral passed the escape threshold";
      return out;
    }
  }

  const std::size_t w = static_cast<std::size_t>(opts.window);
  std::vector<double> ratios;
  for (std::size_t j = pieces.size() - w - 1; j + 1 < pieces.size(); ++j) {
    ratios.push_back(pieces[j] > 0.0 ? pieces[j + 1] / pieces[j] : 0.0);
  }
  const double rmax = *std::max_element(ratios.begin(), ratios.end());
  const double rmin = *std::min_element(ratios.begin(), ratios.end());
  if (rmax <= opts.converge_ratio) {
    const double r = ratios.back();
    out.verdict = Verdict::converges;
    out.value = partial + pieces.back() * r / (1.0 - r);
    out.note = "increments decay geometrically; geometric tail added";
  } else if (rmin >= opts.diverge_ratio) {
    out.verdict = Verdict::diverges;
    out.value = std::numeric_limits<double>::infinity();
    out.note = "increments do not decay as the cutoff halves";
  } else {
    out.verdict = Verdict::inconclusive;
    out.value = partial;
    out.note = "increment ratios between the convergence and divergence bands";
  }
  return out;
}

FmoResult fmo_estimate(const WeightField& q, std::span<const double> x0,
                       const std::vector<double>& eps_sequence, const QuadratureConfig& cfg,
                       const FmoOptions& opts) {
  cfg.validate();
  const int n = q.dimension();
  if (static_cast<int>(x0.size()) != n) throw InputError("fmo_estimate: dimension mismatch");
  if (eps_sequence.size() < 2) throw InputError("fmo_estimate: need at least two radii");
  for (std::size_t i = 0; i < eps_sequence.size(); ++i) {
    if (!(eps_sequence[i] > 0.0) || (i > 0 && !(eps_sequence[i] < eps_sequence[i - 1]))) {
      throw InputError("fmo_estimate: radii must be positive and strictly decreasing");
    }
  }
  const auto samples = unit_ball_samples(n, cfg.sphere_samples, cfg.rng_seed);

  FmoResult out;
  std::vector<double> values(samples.size());
  Vec y(static_cast<std::size_t>(n));
  for (double eps : eps_sequence) {
    double mean = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      for (int d = 0; d < n; ++d) {
        y[static_cast<std::size_t>(d)] = x0[static_cast<std::size_t>(d)] + eps * samples[i][static_cast<std::size_t>(d)];
      }
      const double v = q(y);
      if (std::isinf(v)) {
        out.infinite = true;
        out.score = std::numeric_limits<double>::infinity();
        out.trace.push_back({eps, std::numeric_limits<double>::infinity()});
        return out;
      }
      values[i] = v;
      mean += v;
    }
    mean /= static_cast<double>(values.size());
    double osc = 0.0;
    for (double v : values) osc += std::abs(v - mean);
    osc /= static_cast<double>(values.size());
    out.trace.push_back({eps, osc});
  }

  const std::size_t tail_start = out.trace.size() / 2;
  double score = 0.0;
  for (std::size_t i = tail_start; i < out.trace.size(); ++i) score = std::max(score, out.trace[i].partial);
  out.score = score;

  // Least-squares slope of log(osc) against log(1/eps) over the tail.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = tail_start; i < out.trace.size(); ++i) {
    const double x = std::log(1.0 / out.trace[i].cutoff);
    const double yv = std::log(out.trace[i].partial + 1e-300);
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
    ++m;
  }
  double slope = 0.0;
  const double den = m * sxx - sx * sx;
  if (m >= 2 && den > 0.0 && score > 0.0) slope = (m * sxy - sx * sy) / den;
  if (score > opts.escape_threshold || slope > opts.slope_threshold) {
    out.infinite = true;
    out.score = std::numeric_limits<double>::infinity();
  }
  return out;
}

WeightField invert_at_infinity(const WeightField& q) {
  const int n = q.dimension();
  return WeightField(n, [q](std::span<const double> y) {
    const double r2 = std::pow(norm(y), 2);
    if (r2 == 0.0) return q(Vec(y.size(), std::numeric_limits<double>::max()));
    Vec z(y.begin(), y.end());
    for (double& c : z) c /= r2;
    return q(z);
  });
}

LogGrowthResult log_growth_test(const ScalarFunction& qprof, int n, double r0,
                                const LogGrowthOptions& opts) {
  if (n < 2) throw InputError("log_growth_test: n must be >= 2");
  if (!(r0 > 0.0)) throw InputError("log_growth_test: r0 must be > 0");
  if (opts.probes < 6) throw InputError("log_growth_test: need at least 6 probes");
  const double start = std::min(r0, 0.5);
  LogGrowthResult out;
  for (int k = 0; k < opts.probes; ++k) {
    const double r = start * std::ldexp(1.0, -k);
    const double ratio = qprof(r) / std::pow(std::log(1.0 / r), n - 1);
    out.trace.push_back({r, ratio});
    if (!std::isfinite(ratio)) return out;
  }
  const std::size_t split = out.trace.size() * 2 / 3;
  double head = 0.0;
  double tail = 0.0;
  for (std::size_t i = 0; i < out.trace.size(); ++i) {
    double& slot = i < split ? head : tail;
    slot = std::max(slot, out.trace[i].partial);
  }
  out.bounded = tail <= (1.0 + opts.slack) * head;
  return out;
}

HypothesisEvidence HypothesisEvidence::from(const FmoResult& r) {
  return HypothesisEvidence(PsiCase::fmo, !r.infinite, true);
}

HypothesisEvidence HypothesisEvidence::from(const LogGrowthResult& r) {
  return HypothesisEvidence(PsiCase::log_growth, r.bounded, true);
}

HypothesisEvidence HypothesisEvidence::from(const DivergenceVerdict& v) {
  return HypothesisEvidence(PsiCase::calculus_c, v.verdict == Verdict::diverges,
                            v.verdict != Verdict::inconclusive);
}

double PsiConstruction::I(double eps, double eps_upper) const {
  if (!(eps > 0.0) || !(eps_upper > eps)) throw InputError("PsiConstruction::I: need 0 < eps < eps0");
  const Estimate e = radial_integral(psi, eps, eps_upper, quad);
  return e.infinite ? std::numeric_limits<double>::infinity() : e.value;
}

PsiConstruction construct_psi(PsiCase which, const ScalarFunction& qprof, double p, int n,
                              const HypothesisEvidence& evidence, double eps0,
                              const QuadratureConfig& cfg) {
  check_exponent_range(p, n, "construct_psi");
  if (!(eps0 > 0.0 && eps0 < 1.0)) throw InputError("construct_psi: eps0 must lie in (0, 1)");
  if (evidence.which() != which) {
    throw RefusalError(std::string("construct_psi: evidence is for case ") + to_string(evidence.which()) +
                       ", requested " + to_string(which));
  }
  if (which == PsiCase::calculus_c) {
    if (!evidence.decided()) throw RefusalError("construct_psi: divergence test was inconclusive");
  } else if (!evidence.holds()) {
    throw RefusalError(std::string("construct_psi: hypothesis for case ") + to_string(which) +
                       " does not hold");
  }

  PsiConstruction out;
  out.eps0 = eps0;
  out.case_tag = which;
  out.hypothesis_holds = evidence.holds();
  out.quad = cfg;
  if (which == PsiCase::calculus_c) {
    out.psi = divergence_integrand(qprof, p, n);
  } else {
    out.psi = [](double t) { return 1.0 / (t * std::log(1.0 / t)); };
  }
  for (int k = 1; k <= 20; ++k) {
    const double i = out.I(eps0 * std::ldexp(1.0, -k), eps0);
    if (!(i > 0.0) || !std::isfinite(i)) {
      throw ContractError("construct_psi: I(eps, eps0) not in (0, inf) on the probe grid");
    }
  }
  return out;
}

double alpha_ratio(const WeightField& q, std::span<const double> y0, const PsiConstruction& psi,
                   double eps, double eps0, double p, const QuadratureConfig& cfg) {
  if (!(eps > 0.0) || !(eps0 > eps)) throw InputError("alpha_ratio: need 0 < eps < eps0");
  const double i = psi.I(eps, eps0);
  if (!(i > 0.0) || !std::isfinite(i)) throw ContractError("alpha_ratio: I(eps, eps0) is 0 or infinite");
  const Estimate num = annulus_weighted_integral(q, y0, eps, eps0, psi.psi, p, cfg);
  if (num.infinite) return std::numeric_limits<double>::infinity();
  return num.value / std::pow(i, p);
}

std::vector<ProbePoint> alpha_trace(const WeightField& q, std::span<const double> y0,
                                    const PsiConstruction& psi, double p, int count,
                                    const QuadratureConfig& cfg) {
  std::vector<ProbePoint> out;
  for (int k = 1; k <= count; ++k) {
    const double eps = psi.eps0 * std::ldexp(1.0, -k);
    out.push_back({eps, alpha_ratio(q, y0, psi, eps, psi.eps0, p, cfg)});
  }
  return out;
}

std::string trace_to_csv(const std::vector<ProbePoint>& trace, const std::string& value_header) {
  std::string out = "cutoff," + value_header + "\n";
  char buf[96];
  for (const auto& pt : trace) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", pt.cutoff, pt.partial);
    out += buf;
  }
  return out;
}

}  // namespace ringmod
