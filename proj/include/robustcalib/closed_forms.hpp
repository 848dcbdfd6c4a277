#pragma once

#include <map>
#include <string>
#include <string_view>

#include "robustcalib/loss.hpp"

namespace robustcalib {

enum class Regime {
  ramp_a,  // 0 <= beta < 1 - gamma
  ramp_b,  // 1 - gamma <= beta < 1 + gamma
  ramp_c,  // 1 + gamma <= beta < 2
  ramp_d,  // beta >= 2
  sigmoid_zero,
  sigmoid_positive,
  modified_squared_small,  // 0 <= beta < gamma
  modified_squared_mid,    // gamma <= beta < 1
  modified_squared_flat,   // beta >= 1
  modified_squared_negative,  // -1 + 1/sqrt(2) < beta < 0, gamma < 1/4
  hinge,
  squared,
};

std::string_view to_string(Regime regime);

struct RegimeTag {
  LossFamily family;
  Regime regime;
  int branch = 0;  // index of the piece that produced the value, left to right in epsilon
  std::map<std::string, double> constants;
};

struct ClosedValue {
  double value;
  RegimeTag tag;
};

// Throws UnsupportedRegime with the failing rule in the message.
RegimeTag classify(LossFamily family, double beta, double gamma);

ClosedValue delta_closed(LossFamily family, double beta, double gamma, double epsilon);
double biconjugate_closed(LossFamily family, double beta, double gamma, double epsilon);

}  // namespace robustcalib
