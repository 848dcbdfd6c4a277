#include "robustcalib/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "robustcalib/numeric.hpp"
#include "robustcalib/risk.hpp"

namespace robustcalib {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void require_gamma(double gamma) { RobustTarget{gamma}; }

void require_alpha_grid(int alpha_grid) {
  if (alpha_grid < 2001) throw PreconditionError("alpha grid needs at least 2001 points");
}

// Excess CCR infima over the band |alpha| <= gamma and over {(2 eta - 1) alpha <= 0} u band.
struct Branches {
  double band;
  double merged;
};

Branches branches_at(const StructuralReport& r, double gamma, double eta, int alpha_grid) {
  const double band = min_ccr(r, CcrQuery(eta, -gamma, gamma), alpha_grid).value;
  double merged;
  if (eta > 0.5)
    merged = min_ccr(r, CcrQuery(eta, -1.0, gamma), alpha_grid).value;
  else if (eta < 0.5)
    merged = min_ccr(r, CcrQuery(eta, -gamma, 1.0), alpha_grid).value;
  else
    merged = min_ccr(r, CcrQuery(eta, -1.0, 1.0), alpha_grid).value;
  const double whole = std::min(
      {min_ccr(r, CcrQuery(eta, -1.0, 1.0), alpha_grid).value, band, merged});
  return {band - whole, merged - whole};
}

struct EtaInterval {
  double lo;
  double hi;
  bool merged;  // which branch applies on this interval
};

std::vector<EtaInterval> case_intervals(double eps, bool full_range) {
  std::vector<EtaInterval> out;
  // eta >= 1/2: band while 2 eta - 1 < eps <= eta, merged once eps <= 2 eta - 1.
  const double split_hi = 0.5 * (1.0 + eps);
  if (split_hi <= 1.0) {
    out.push_back({std::max(eps, 0.5), split_hi, false});
    out.push_back({split_hi, 1.0, true});
  } else if (eps <= 1.0) {
    out.push_back({std::max(eps, 0.5), 1.0, false});
  }
  if (full_range) {
    const double split_lo = 0.5 * (1.0 - eps);
    if (split_lo >= 0.0) {
      out.push_back({split_lo, std::min(1.0 - eps, 0.5), false});
      out.push_back({0.0, split_lo, true});
    }
  }
  std::erase_if(out, [](const EtaInterval& iv) { return iv.lo > iv.hi; });
  return out;
}

}  // namespace

void validate_curve(const CalibrationCurve& c) {
  if (c.epsilons.size() != c.deltas.size()) throw DomainError("curve columns differ in length");
  for (Eigen::Index i = 0; i < c.epsilons.size(); ++i) {
    const double e = c.epsilons[i];
    if (!(e > 0.0 && e <= 1.0)) throw DomainError("curve epsilons must lie in (0, 1]");
    if (i > 0 && !(e > c.epsilons[i - 1])) throw DomainError("curve epsilons must increase");
    if (!(c.deltas[i] >= 0.0)) throw DomainError("curve deltas must be nonnegative");
  }
}

double interpolate(const CalibrationCurve& c, double eps) {
  if (!(eps >= 0.0)) throw DomainError("epsilon must be nonnegative");
  double x0 = 0.0, y0 = 0.0;
  for (Eigen::Index i = 0; i < c.epsilons.size(); ++i) {
    const double x1 = c.epsilons[i], y1 = c.deltas[i];
    if (!std::isfinite(y1)) return inf;
    if (eps <= x1) return eps == x1 ? y1 : y0 + (y1 - y0) * (eps - x0) / (x1 - x0);
    x0 = x1;
    y0 = y1;
  }
  return inf;
}

Eigen::VectorXd epsilon_grid(double lo, double hi, int points) {
  if (points < 2 || !(lo > 0.0 && lo < hi && hi <= 1.0))
    throw PreconditionError("epsilon grid needs 0 < lo < hi <= 1 and at least 2 points");
  Eigen::VectorXd g(points);
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
  g[points - 1] = hi;
  return g;
}

Eigen::VectorXd default_epsilon_grid() { return epsilon_grid(0.02, 0.98, 97); }

double delta_bar(const LossSpec& loss, double gamma, double eps, double eta, int alpha_grid) {
  return delta_bar(structural_report(loss), gamma, eps, eta, alpha_grid);
}

double delta_bar(const StructuralReport& r, double gamma, double eps, double eta,
                 int alpha_grid) {
  require_gamma(gamma);
  require_alpha_grid(alpha_grid);
  if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0, 1]");
  if (eps > std::max(eta, 1.0 - eta)) return inf;
  const Branches b = branches_at(r, gamma, eta, alpha_grid);
  return std::abs(2.0 * eta - 1.0) < eps ? b.band : b.merged;
}

CalibrationCurve calibration_fn_numeric(const LossSpec& loss, double gamma,
                                        const Eigen::VectorXd& epsilons,
                                        const NumericOptions& opt) {
  require_gamma(gamma);
  require_alpha_grid(opt.alpha_points);
  if (opt.eta_points < 2001) throw PreconditionError("eta grid needs at least 2001 points");
  for (Eigen::Index i = 0; i < epsilons.size(); ++i)
    if (!(epsilons[i] > 0.0 && epsilons[i] <= 1.0))
      throw DomainError("epsilons must lie in (0, 1]");

  const StructuralReport report = structural_report(loss);
  const unsigned threads = opt.threads == 0 ? numeric::default_threads() : opt.threads;

  const double start = opt.full_eta_range ? 0.0 : 0.5;
  const long nodes = opt.full_eta_range ? 2L * opt.eta_points - 1 : opt.eta_points;
  const double h = (1.0 - start) / (nodes - 1);
  const auto node = [&](long j) { return j == nodes - 1 ? 1.0 : start + h * j; };

  std::vector<Branches> cache(nodes);
  numeric::parallel_for(nodes, threads, [&](long j) {
    cache[j] = branches_at(report, gamma, node(j), opt.alpha_points);
  });

  const auto branch = [&](double eta, bool merged) {
    const Branches b = branches_at(report, gamma, eta, opt.alpha_points);
    return merged ? b.merged : b.band;
  };

  CalibrationCurve curve;
  curve.kind = CurveKind::raw_delta;
  curve.epsilons = epsilons;
  curve.deltas.resize(epsilons.size());

  numeric::parallel_for(epsilons.size(), threads, [&](long i) {
    double best = inf;
    for (const EtaInterval& iv : case_intervals(epsilons[i], opt.full_eta_range)) {
      const auto g = [&](double eta) { return branch(eta, iv.merged); };
      numeric::Minimum m{iv.lo, g(iv.lo)};
      const double at_hi = g(iv.hi);
      if (at_hi < m.fx) m = {iv.hi, at_hi};
      const long j0 = static_cast<long>(std::floor((iv.lo - start) / h)) + 1;
      const long j1 = static_cast<long>(std::ceil((iv.hi - start) / h)) - 1;
      for (long j = std::max(0L, j0); j <= std::min(nodes - 1, j1); ++j) {
        const double eta = node(j);
        if (eta <= iv.lo || eta >= iv.hi) continue;
        const double v = iv.merged ? cache[j].merged : cache[j].band;
        if (v < m.fx) m = {eta, v};
      }
      if (iv.hi > iv.lo) {
        const double a = std::max(iv.lo, m.x - h), b = std::min(iv.hi, m.x + h);
        const numeric::Minimum r = numeric::golden_section(g, a, b, opt.eta_tolerance);
        if (r.fx < m.fx) m = r;
      }
      best = std::min(best, m.fx);
    }
    curve.deltas[i] = std::max(0.0, best);
  });
  return curve;
}

CalibrationCurve biconjugate(const CalibrationCurve& c) {
  validate_curve(c);
  std::vector<double> xs{0.0}, ys{0.0};
  for (Eigen::Index i = 0; i < c.epsilons.size(); ++i)
    if (std::isfinite(c.deltas[i])) {
      xs.push_back(c.epsilons[i]);
      ys.push_back(c.deltas[i]);
    }
  if (xs.size() < 2) throw DomainError("biconjugate needs at least two finite points");

  // Monotone chain, lower half only; collinear middle points are dropped.
  std::vector<std::size_t> hull;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull.back();
      const double cross = (xs[b] - xs[a]) * (ys[k] - ys[a]) - (ys[b] - ys[a]) * (xs[k] - xs[a]);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(k);
  }

  CalibrationCurve out;
  out.kind = CurveKind::biconjugate;
  out.epsilons = c.epsilons;
  out.deltas.resize(c.epsilons.size());
  const double last = xs.back();
  std::size_t seg = 0;
  for (Eigen::Index i = 0; i < c.epsilons.size(); ++i) {
    const double e = c.epsilons[i];
    if (e > last) {
      out.deltas[i] = inf;
      continue;
    }
    while (seg + 2 < hull.size() && xs[hull[seg + 1]] < e) ++seg;
    const std::size_t a = hull[seg], b = hull[seg + 1];
    out.deltas[i] = e == xs[b] ? ys[b] : ys[a] + (ys[b] - ys[a]) * (e - xs[a]) / (xs[b] - xs[a]);
  }
  return out;
}

ExcessBound excess_risk_transform(const CalibrationCurve& c, double s) {
  if (c.kind != CurveKind::biconjugate) throw DomainError("expected a biconjugate curve");
  if (!(s >= 0.0)) throw DomainError("surrogate excess must be nonnegative");
  validate_curve(c);
  double x0 = 0.0, y0 = 0.0;
  bool invertible = true;
  for (Eigen::Index i = 0; i < c.epsilons.size(); ++i) {
    const double x1 = c.epsilons[i], y1 = c.deltas[i];
    if (i == 0 && !(y1 > positivity_threshold)) invertible = false;
    if (!std::isfinite(y1)) break;
    if (y1 > s) return {x0 + (s - y0) * (x1 - x0) / (y1 - y0), invertible};
    x0 = x1;
    y0 = y1;
  }
  return {x0, invertible};
}

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::convex_surrogate:
      return "thm6_convex";
    case Rule::quasiconcave_condition:
      return "thm9_condition";
    case Rule::numeric_delta:
      return "numeric_delta";
  }
  return "unknown";
}

std::string_view to_string(Target target) {
  return target == Target::phi_gamma ? "phi_gamma" : "phi_01";
}

Verdict verdict(const LossSpec& loss, double gamma, const StructuralReport& report,
                const NumericOptions& options) {
  require_gamma(gamma);
  if (report.loss.family != loss.family || report.loss.shift != loss.shift)
    throw DomainError("structural report belongs to a different loss");

  Verdict v;
  v.target = Target::phi_gamma;
  if (report.convex) {
    v.rule = Rule::convex_surrogate;
    v.calibrated = false;
    return v;
  }
  if (report.satisfies_quasiconcave_condition()) {
    double w = eval(loss, gamma) + eval(loss, -gamma) - report.B;
    if (std::abs(w) <= 1e-12) w = 0.0;
    v.rule = Rule::quasiconcave_condition;
    v.witness = w;
    v.calibrated = w > 0.0;
    v.phi01_calibrated = true;
    return v;
  }
  const CalibrationCurve curve =
      calibration_fn_numeric(loss, gamma, default_epsilon_grid(), options);
  v.rule = Rule::numeric_delta;
  v.calibrated = (curve.deltas.array() > positivity_threshold).all();
  if (v.calibrated) {
    v.witness = curve.deltas.minCoeff();
  } else {
    for (Eigen::Index i = 0; i < curve.deltas.size(); ++i)
      if (!(curve.deltas[i] > positivity_threshold)) {
        v.witness = curve.epsilons[i];
        break;
      }
  }
  return v;
}

}  // namespace robustcalib
