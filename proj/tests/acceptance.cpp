// Acceptance gate: one PASS/FAIL line per criterion; exit status is nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "robustcalib/calibration.hpp"
#include "robustcalib/closed_forms.hpp"
#include "robustcalib/experiment.hpp"
#include "robustcalib/risk.hpp"

using namespace robustcalib;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s -- %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Point {
  LossFamily f;
  double beta, gamma;
};

const std::vector<Point> kClosedPoints = {
    {LossFamily::ramp, 0.2, 0.1},    {LossFamily::ramp, 0.5, 0.1},
    {LossFamily::ramp, 1.0, 0.1},    {LossFamily::ramp, 1.5, 0.1},
    {LossFamily::ramp, 2.5, 0.1},    {LossFamily::sigmoid, 0.5, 0.2},
    {LossFamily::sigmoid, 2.0, 0.2}, {LossFamily::modified_squared, 0.0, 0.5},
    {LossFamily::modified_squared, 0.1, 0.5}, {LossFamily::modified_squared, 0.5, 0.5},
    {LossFamily::modified_squared, -0.2, 0.2}, {LossFamily::hinge, 0.4, 0.2},
    {LossFamily::squared, 0.0, 0.2}, {LossFamily::squared, 0.5, 0.2}};

double worst_gap(const Point& p, const Eigen::VectorXd& eps, const NumericOptions& opt,
                 CalibrationCurve* keep = nullptr) {
  const auto c = calibration_fn_numeric(LossSpec{p.f, p.beta}, p.gamma, eps, opt);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < eps.size(); ++i)
    worst = std::max(worst, std::abs(c.deltas[i] - delta_closed(p.f, p.beta, p.gamma, eps[i]).value));
  if (keep != nullptr) *keep = c;
  return worst;
}

std::vector<CalibrationCurve> criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<CalibrationCurve> curves;
  double coarse = 0.0, fine = 0.0;
  NumericOptions dense;
  dense.eta_points = 4 * 2000 + 1;
  dense.alpha_points = 4 * 2000 + 1;
  const Eigen::VectorXd eps_dense = epsilon_grid(0.02, 0.98, 4 * 96 + 1);
  for (const Point& p : kClosedPoints) {
    CalibrationCurve c;
    coarse = std::max(coarse, worst_gap(p, default_epsilon_grid(), {}, &c));
    curves.push_back(c);
    fine = std::max(fine, worst_gap(p, eps_dense, dense));
  }
  const double secs = seconds_since(t0);
  report(1, "closed-form agreement", coarse <= 2e-2 && fine <= 2e-3 && secs < 30.0,
         fmt("max |numeric - closed| %.3g (default, tol 2e-2), %.3g (4x density, tol 2e-3), %.1f s (limit 30 s)",
             coarse, fine, secs));
  return curves;
}

void criterion2() {
  struct Case {
    LossFamily f;
    double beta, gamma;
    bool expected;
  };
  std::vector<Case> cases;
  for (double g : {0.1, 0.3})
    for (double b : {0.0, 0.3, 0.95, 1.5, 1.95, 2.0, 2.5})
      cases.push_back({LossFamily::ramp, b, g, b > 0 && b < 2});
  for (double g : {0.1, 0.3})
    for (double b : {0.0, 0.5, 2.0}) cases.push_back({LossFamily::sigmoid, b, g, b > 0});
  for (double g : {0.2, 0.5})
    for (double b : {0.0, 0.3, 0.7, 1.0, 1.5})
      cases.push_back({LossFamily::modified_squared, b, g, b < 1});
  for (double g : {0.1, 0.2})
    for (double b : {-0.1, -0.2}) cases.push_back({LossFamily::modified_squared, b, g, true});
  for (LossFamily f : {LossFamily::hinge, LossFamily::logistic, LossFamily::squared})
    for (double b : {0.0, 0.5}) cases.push_back({f, b, 0.2, false});

  int mismatches = 0;
  for (const Case& c : cases) {
    const LossSpec l{c.f, c.beta};
    const Verdict v = verdict(l, c.gamma, structural_report(l));
    if (v.calibrated != c.expected) {
      ++mismatches;
      std::printf("    mismatch: %s beta=%g gamma=%g\n", std::string(to_string(c.f)).c_str(), c.beta,
                  c.gamma);
    }
  }
  report(2, "verdict matrix", mismatches == 0 && cases.size() == 40,
         fmt("%.0f points, %.0f mismatches", static_cast<double>(cases.size()), mismatches));
}

void criterion3() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int disagreements = 0, losses = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const int d = i % 3 == 0 ? 2 : (i % 3 == 1 ? 3 : 5);
    Eigen::VectorXd w(d), x(d);
    for (int k = 0; k < d; ++k) w[k] = normal(rng), x[k] = normal(rng);
    w *= 0.1 + 5.0 * unit(rng);
    x *= std::pow(unit(rng), 1.0 / d) / x.norm();
    const int y = unit(rng) < 0.5 ? 1 : -1;
    const double g = unit(rng);
    const int rule = robust_loss_linear(w, 0.0, x, y, g);
    const bool attacked = oracle::attack_succeeds(w, 0.0, x, y, g, rng, 2000);
    losses += rule;
    if (rule != (attacked ? 1 : 0)) ++disagreements;
  }
  report(3, "margin rule vs perturbation oracle", disagreements == 0,
         fmt("%.0f instances (%.0f robust losses), %.0f disagreements", n, losses, disagreements));
}

void criterion4() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_hull = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 10 + t / 2;
    std::vector<double> xs, ys;
    double y = 0.0;
    for (int i = 1; i <= n; ++i) {
      xs.push_back(static_cast<double>(i) / n);
      if (t % 4 == 0)
        y = unit(rng);
      else if (t % 4 == 1)
        y += unit(rng) < 0.2 ? unit(rng) : 0.0;
      else
        y += unit(rng) * unit(rng) * unit(rng);
      ys.push_back(y);
    }
    const int tail = t % 5 == 0 ? 3 : 0;
    CalibrationCurve c;
    c.epsilons = Eigen::Map<Eigen::VectorXd>(xs.data(), n);
    c.deltas = Eigen::Map<Eigen::VectorXd>(ys.data(), n);
    for (int k = 0; k < tail; ++k) c.deltas[n - 1 - k] = HUGE_VAL;
    const auto h = biconjugate(c);
    std::vector<double> px{0.0}, py{0.0};
    for (int i = 0; i < n - tail; ++i) px.push_back(xs[i]), py.push_back(ys[i]);
    const auto ref = oracle::chord_envelope(px, py, xs);
    for (int i = 0; i < n; ++i) {
      if (i >= n - tail) {
        if (!std::isinf(h.deltas[i])) worst_hull = HUGE_VAL;
        continue;
      }
      worst_hull = std::max(worst_hull, std::abs(h.deltas[i] - ref[i]));
    }
  }

  double worst_closed = 0.0;
  const Eigen::VectorXd eps = default_epsilon_grid();
  for (const Point& p : kClosedPoints) {
    if (p.f != LossFamily::ramp && p.f != LossFamily::sigmoid && p.f != LossFamily::modified_squared)
      continue;
    if (p.beta < 0) continue;  // no closed biconjugate for negative shifts
    const auto h = biconjugate(calibration_fn_numeric(LossSpec{p.f, p.beta}, p.gamma, eps));
    for (Eigen::Index i = 0; i < eps.size(); ++i)
      worst_closed =
          std::max(worst_closed, std::abs(h.deltas[i] - biconjugate_closed(p.f, p.beta, p.gamma, eps[i])));
  }
  report(4, "biconjugate correctness", worst_hull <= 1e-10 && worst_closed <= 2e-2,
         fmt("hull vs chord oracle %.3g on 100 curves (tol 1e-10); numeric vs closed biconjugate %.3g (tol 2e-2)",
             worst_hull, worst_closed));
}

SweepResult criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  SweepConfig c;
  c.losses = {LossFamily::ramp, LossFamily::sigmoid, LossFamily::hinge, LossFamily::logistic};
  c.beta = 0.2;
  c.gamma = 0.2;
  c.lr = 0.1;
  c.steps = 200;
  c.seeds = 50;
  const SweepResult r = run_sweep(c);
  const double secs = seconds_since(t0);

  const auto finals = [&](std::size_t l) {
    std::vector<double> v;
    for (const auto& t : r.runs[l]) {
      const auto p = excess_proxies(t);
      v.push_back(p.target[p.target.size() - 1]);
    }
    return v;
  };
  std::vector<std::vector<double>> fin;
  std::vector<double> mean;
  for (std::size_t l = 0; l < 4; ++l) {
    fin.push_back(finals(l));
    double s = 0.0;
    for (double x : fin.back()) s += x;
    mean.push_back(s / 50);
  }
  std::printf("    mean final target excess: ramp %.4f, sigmoid %.4f, hinge %.4f, logistic %.4f\n", mean[0],
              mean[1], mean[2], mean[3]);
  bool pass = mean[0] <= 0.05 && secs < 120.0;
  const char* names[] = {"ramp", "sigmoid", "hinge", "logistic"};
  for (std::size_t a : {0u, 1u})
    for (std::size_t b : {2u, 3u}) {
      int wins = 0, lost = 0;
      for (int s = 0; s < 50; ++s) {
        if (fin[a][s] < fin[b][s]) ++wins;
        if (fin[a][s] > fin[b][s]) ++lost;
      }
      const double p = sign_test_p_value(wins, lost);
      const bool ok = mean[a] < mean[b] && p < 0.05;
      std::printf("    %s vs %s: mean %.4f vs %.4f, wins %d, losses %d, ties %d, p=%.3g %s\n", names[a],
                  names[b], mean[a], mean[b], wins, lost, 50 - wins - lost, p, ok ? "ok" : "NOT MET");
      pass = pass && ok;
    }
  report(5, "calibrated surrogates reach lower target excess", pass,
         fmt("ramp mean %.4f (limit 0.05), sweep %.1f s (limit 120 s)", mean[0], secs));
  return r;
}

void criterion6() {
  SweepConfig c;
  c.losses = {LossFamily::ramp, LossFamily::hinge};
  c.beta = 0.5;
  c.gamma = 0.1;
  c.seeds = 50;
  const SweepResult r = run_sweep(c);
  int ramp_better = 0;
  double mr = 0.0, mh = 0.0;
  for (int s = 0; s < 50; ++s) {
    const double vr = vulnerable_fraction(r.runs[0][s].final_model, r.test_sets[s], 0.1);
    const double vh = vulnerable_fraction(r.runs[1][s].final_model, r.test_sets[s], 0.1);
    mr += vr / 50;
    mh += vh / 50;
    if (vr < vh) ++ramp_better;
  }
  report(6, "vulnerable fraction ordering", ramp_better >= 40,
         fmt("ramp < hinge in %.0f of 50 seeds (need 40); mean vulnerable %.4f vs %.4f", ramp_better, mr, mh));
}

void criterion7(const SweepResult& r) {
  int steps = 0, violations = 0;
  double worst = -HUGE_VAL;
  const Eigen::VectorXd eps = epsilon_grid(0.01, 1.0, 100);
  for (std::size_t l : {0u, 1u}) {
    const LossSpec loss{r.config.losses[l], r.config.beta};
    const auto h = biconjugate(calibration_fn_numeric(loss, r.config.gamma, eps));
    int bad_runs = 0, bad_steps = 0;
    double worst_here = -HUGE_VAL;
    for (const auto& t : r.runs[l]) {
      const int before = violations;
      const auto p = excess_proxies(t);
      for (Eigen::Index i = 0; i < p.target.size(); ++i) {
        const double gap = interpolate(h, p.target[i]) - p.surrogate[i];
        worst = std::max(worst, gap);
        worst_here = std::max(worst_here, gap);
        if (gap > 5e-3) ++violations;
        ++steps;
      }
      bad_steps += violations - before;
      bad_runs += violations > before ? 1 : 0;
    }
    std::printf("    %s: %d of %zu runs violate, %d steps, worst gap %.4f\n",
                std::string(to_string(loss.family)).c_str(), bad_runs, r.runs[l].size(), bad_steps, worst_here);
  }
  report(7, "excess-risk transform along trajectories", violations == 0,
         fmt("%.0f steps checked, %.0f violations, max(biconj(target) - surrogate) = %.3g (slack 5e-3)", steps,
             violations, worst));
}

void criterion8(const std::vector<CalibrationCurve>& curves) {
  double mono = 0.0;
  for (const auto& c : curves)
    for (Eigen::Index i = 1; i < c.deltas.size(); ++i) mono = std::max(mono, c.deltas[i - 1] - c.deltas[i]);

  std::mt19937_64 rng(8);
  std::uniform_int_distribution<long> k(0, 1L << 24);
  std::uniform_real_distribution<double> u(-1.0, 1.0), unit(0.0, 1.0);
  const LossFamily all[] = {LossFamily::ramp, LossFamily::sigmoid, LossFamily::modified_squared,
                            LossFamily::hinge, LossFamily::logistic, LossFamily::squared};
  int asym = 0;
  for (int i = 0; i < 10000; ++i) {
    const LossSpec l{all[i % 6], u(rng) + 0.5};
    const double eta = std::ldexp(static_cast<double>(k(rng)), -24), a = u(rng);
    if (ccr(l, a, eta) != ccr(l, -a, 1.0 - eta)) ++asym;
  }

  double endpoint = 0.0;
  for (LossFamily f : {LossFamily::ramp, LossFamily::sigmoid, LossFamily::modified_squared})
    for (double b : {0.0, 0.2, 0.5, 1.0, 1.5, 2.5}) {
      const LossSpec l{f, b};
      for (int i = 0; i < 200; ++i) {
        double lo = u(rng), hi = u(rng);
        if (lo > hi) std::swap(lo, hi);
        const CcrQuery q(unit(rng), lo, hi);
        endpoint = std::max(endpoint, std::abs(min_ccr_grid(l, q).value - min_ccr_endpoints(l, q).value));
      }
    }

  int nonmono = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = gen_twonorm(800, 200, seed);
    for (int m = 0; m < 10; ++m) {
      const LinearModeld model = initial_model(2, 1000 * seed + m);
      double prev = zero_one_risk(model, s.test);
      for (double g = 0.0; g < 1.0; g += 0.005) {
        const double r = robust_risk(model, s.test, g);
        if (r < prev) ++nonmono;
        prev = r;
      }
    }
  }
  const bool pass = mono <= 1e-8 && asym == 0 && endpoint <= 1e-8 && nonmono == 0;
  report(8, "invariant suites", pass,
         fmt("delta monotonicity drop %.3g (tol 1e-8); eta-symmetry mismatches %.0f/10000; endpoint rule gap %.3g "
             "(tol 1e-8); robust-risk gamma monotonicity violations %.0f",
             mono, asym, endpoint, nonmono));
}

}  // namespace

int main() {
  const auto curves = criterion1();
  criterion2();
  criterion3();
  criterion4();
  const SweepResult sweep = criterion5();
  criterion6();
  criterion7(sweep);
  criterion8(curves);
  std::printf("%s: %d of 8 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
