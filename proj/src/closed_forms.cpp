#include "robustcalib/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace robustcalib {

namespace {

[[noreturn]] void unsupported(LossFamily family, double beta, double gamma, std::string_view rule) {
  std::ostringstream os;
  os << "no closed form for " << to_string(family) << " at beta=" << beta << ", gamma=" << gamma
     << ": " << rule;
  throw UnsupportedRegime(os.str());
}

// phi_beta(gamma), phi_beta(-gamma), phi_beta(1), phi_beta(-1) and the derived constants.
void endpoint_constants(LossFamily family, double beta, double gamma, RegimeTag& tag) {
  const LossSpec loss{family, beta};
  const double pg = eval(loss, gamma), pmg = eval(loss, -gamma);
  const double p1 = eval(loss, 1.0), pm1 = eval(loss, -1.0);
  tag.constants["B"] = p1 + pm1;
  tag.constants["K"] = pm1 - p1;
  tag.constants["A1"] = (pg + pmg - p1 - pm1) / 2;
  const double a0 = pg - pmg - p1 + pm1;
  tag.constants["A0"] = a0;
  if (a0 != 0.0) tag.constants["eta0"] = (pm1 - pmg) / a0;
}

double negative_msq_h(const RegimeTag& tag, double eta, double gamma, double beta) {
  const double c = tag.constants.at("c"), m = tag.constants.at("m");
  double q = eta <= tag.constants.at("eta_b") ? (1 - eta) * (4 * c * c * eta - 1)
                                              : eta * (1 - 4 * c * m) + (c + m) * (c + m) - 1;
  if (gamma > -beta) q = std::min(q, eta * (1 + beta - gamma) * (1 + beta - gamma));
  return q;
}

void require_epsilon(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("epsilon must lie in (0, 1]");
}

}  // namespace

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::ramp_a: return "ramp_a";
    case Regime::ramp_b: return "ramp_b";
    case Regime::ramp_c: return "ramp_c";
    case Regime::ramp_d: return "ramp_d";
    case Regime::sigmoid_zero: return "sigmoid_zero";
    case Regime::sigmoid_positive: return "sigmoid_positive";
    case Regime::modified_squared_small: return "modified_squared_small";
    case Regime::modified_squared_mid: return "modified_squared_mid";
    case Regime::modified_squared_flat: return "modified_squared_flat";
    case Regime::modified_squared_negative: return "modified_squared_negative";
    case Regime::hinge: return "hinge";
    case Regime::squared: return "squared";
  }
  return "unknown";
}

RegimeTag classify(LossFamily family, double beta, double gamma) {
  RobustTarget{gamma};
  if (!std::isfinite(beta)) throw DomainError("beta must be finite");
  RegimeTag tag{family, Regime::hinge, 0, {}};
  switch (family) {
    case LossFamily::ramp:
      if (beta < 0) unsupported(family, beta, gamma, "ramp requires beta >= 0");
      tag.regime = beta < 1 - gamma   ? Regime::ramp_a
                   : beta < 1 + gamma ? Regime::ramp_b
                   : beta < 2         ? Regime::ramp_c
                                      : Regime::ramp_d;
      break;
    case LossFamily::sigmoid:
      if (beta < 0) unsupported(family, beta, gamma, "sigmoid requires beta >= 0");
      tag.regime = beta == 0 ? Regime::sigmoid_zero : Regime::sigmoid_positive;
      break;
    case LossFamily::modified_squared:
      if (beta >= 0) {
        tag.regime = beta < gamma ? Regime::modified_squared_small
                     : beta < 1   ? Regime::modified_squared_mid
                                  : Regime::modified_squared_flat;
      } else {
        if (!(beta > -1 + 1 / std::sqrt(2.0)) || !(gamma < 0.25))
          unsupported(family, beta, gamma,
                      "negative beta needs -1 + 1/sqrt(2) < beta < 0 and gamma < 1/4");
        tag.regime = Regime::modified_squared_negative;
        const double c = 1 + beta, m = std::min(gamma, -beta);
        tag.constants["c"] = c;
        tag.constants["m"] = m;
        tag.constants["eta_b"] = 0.5 + m / (2 * c);
        tag.constants["eps0"] = negative_msq_h(tag, 0.5, gamma, beta);
      }
      break;
    case LossFamily::hinge:
      if (beta < 0) unsupported(family, beta, gamma, "hinge closed form holds only for beta >= 0");
      tag.regime = Regime::hinge;
      break;
    case LossFamily::squared:
      if (!(beta > -1)) unsupported(family, beta, gamma, "squared requires beta > -1");
      tag.regime = Regime::squared;
      tag.constants["eta0"] = (1 + gamma + beta) / (2 * (1 + beta));
      tag.constants["eta1"] = (3 + gamma + 2 * beta) / (4 * (1 + beta));
      tag.constants["eta2"] = (2 + beta) / (2 * (1 + beta));
      return tag;
    case LossFamily::logistic:
      unsupported(family, beta, gamma, "logistic has no closed form");
  }
  if (tag.regime != Regime::hinge && tag.regime != Regime::modified_squared_negative)
    endpoint_constants(family, beta, gamma, tag);
  if (tag.regime == Regime::modified_squared_small)
    tag.constants["eps0"] = (1 - gamma) * (1 - gamma + 2 * beta) / (2 * (1 - beta * beta));
  return tag;
}

ClosedValue delta_closed(LossFamily family, double beta, double gamma, double eps) {
  require_epsilon(eps);
  RegimeTag tag = classify(family, beta, gamma);
  const auto piece = [&](int branch, double value) {
    tag.branch = branch;
    return ClosedValue{value, tag};
  };
  const double g = gamma, b = beta;
  switch (tag.regime) {
    case Regime::ramp_a:
      if (eps <= b / (4 - 2 * b)) return piece(0, (1 - b / 2) * eps);
      if (eps <= 0.5) return piece(1, b / 4);
      return piece(2, (1 - g - b / 2) * (eps - 0.5) + b / 4);
    case Regime::ramp_b:
      if (eps <= (1 - g) / (2 * (2 - b))) return piece(0, (1 - b / 2) * eps);
      if (eps <= 0.5) return piece(1, (1 - g) / 4);
      return piece(2, (1 - g) * eps / 2);
    case Regime::ramp_c:
      return piece(0, (1 - b / 2) * eps);
    case Regime::ramp_d:
    case Regime::modified_squared_flat:
      return piece(0, 0.0);
    case Regime::sigmoid_zero:
    case Regime::sigmoid_positive: {
      const double k = tag.constants.at("K"), a1 = tag.constants.at("A1");
      if (eps <= 0.5 && k * eps <= a1) return piece(0, k * eps);
      if (eps <= 0.5) return piece(1, a1);
      return piece(2, tag.constants.at("A0") * (eps - tag.constants.at("eta0")));
    }
    case Regime::modified_squared_small: {
      const double e0 = tag.constants.at("eps0"), a = (1 - g) * (1 - g + 2 * b);
      if (eps <= e0) return piece(0, (1 - b * b) * eps);
      if (eps <= 0.5) return piece(1, a / 2);
      return piece(2, a * eps);
    }
    case Regime::modified_squared_mid:
      return piece(0, (1 - b * b) * eps);
    case Regime::modified_squared_negative: {
      const double h = negative_msq_h(tag, std::max(eps, 0.5), gamma, beta);
      return eps <= h ? piece(0, eps) : piece(1, h);
    }
    case Regime::hinge:
      if (eps <= 0.5) return piece(0, 0.0);
      return piece(1, (1 - g) * (2 * eps - 1));
    case Regime::squared: {
      const double e0 = tag.constants.at("eta0"), e1 = tag.constants.at("eta1"),
                   e2 = tag.constants.at("eta2");
      if (eps < e0) return piece(0, 0.0);
      if (eps < e2) return piece(1, 4 * (1 + b) * (1 + b) * (eps - e0) * (eps - e0));
      return piece(2, 4 * (1 - g) * (1 + b) * (eps - e1));
    }
  }
  throw InternalError("unhandled regime");
}

double biconjugate_closed(LossFamily family, double beta, double gamma, double eps) {
  require_epsilon(eps);
  const RegimeTag tag = classify(family, beta, gamma);
  const double g = gamma, b = beta;
  switch (tag.regime) {
    case Regime::ramp_a:
      return eps <= 0.5 ? b / 2 * eps : delta_closed(family, beta, gamma, eps).value;
    case Regime::ramp_b:
      return (1 - g) * eps / 2;
    case Regime::ramp_c:
      return (1 - b / 2) * eps;
    case Regime::ramp_d:
    case Regime::modified_squared_flat:
      return 0.0;
    case Regime::sigmoid_zero:
    case Regime::sigmoid_positive:
      return eps <= 0.5 ? 2 * tag.constants.at("A1") * eps
                        : tag.constants.at("A0") * (eps - tag.constants.at("eta0"));
    case Regime::modified_squared_small:
      return (1 - g) * (1 - g + 2 * b) * eps;
    case Regime::modified_squared_mid:
      return (1 - b * b) * eps;
    case Regime::modified_squared_negative:
      unsupported(family, beta, gamma, "no closed biconjugate for negative beta");
    case Regime::hinge:
    case Regime::squared:
      // convex already
      return delta_closed(family, beta, gamma, eps).value;
  }
  throw InternalError("unhandled regime");
}

}  // namespace robustcalib
