#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace robustcalib::numeric {

struct Minimum {
  double x;
  double fx;
};

// Golden-section search on [a, b]; assumes f is unimodal on the bracket.
template <typename F>
Minimum golden_section(F&& f, double a, double b, double tol) {
  constexpr double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? Minimum{c, fc} : Minimum{d, fd};
}

// Minimize over `points` equally spaced nodes of [lo, hi], then refine the best cell by golden section.
template <typename F>
Minimum grid_then_golden(F&& f, double lo, double hi, int points, double tol) {
  if (!(hi > lo)) return {lo, f(lo)};
  const double h = (hi - lo) / (points - 1);
  Minimum best{lo, f(lo)};
  int k = 0;
  for (int i = 1; i < points; ++i) {
    const double x = i == points - 1 ? hi : lo + h * i;
    const double fx = f(x);
    if (fx < best.fx) best = {x, fx}, k = i;
  }
  const double a = std::max(lo, lo + h * (k - 1));
  const double b = std::min(hi, lo + h * (k + 1));
  const Minimum refined = golden_section(f, a, b, tol);
  return refined.fx < best.fx ? refined : best;
}

inline unsigned default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

// Runs body(i) for i in [0, n) on up to `threads` workers with a static partition.
template <typename Body>
void parallel_for(long n, unsigned threads, Body&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max(1L, n))));
  if (threads == 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(threads);
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (long i = t; i < n; i += threads) body(i);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : failures)
    if (e) std::rethrow_exception(e);
}

}  // namespace robustcalib::numeric
