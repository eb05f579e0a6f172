#pragma once

// Adaptive Gauss-Kronrod (7,15) quadrature over a list of breakpoints.
//
// The integrand is evaluated on each initial panel [b_k, b_{k+1}] with the
// 15-point Kronrod rule; the embedded 7-point Gauss rule supplies the error
// estimate |K15 - G7|.  Panels are bisected largest-error-first until the
// summed error meets max(abs_tol, rel_tol * |value|), making refinement
// deterministic and independent of evaluation order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace magnoise {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;       // summed |K15 - G7| over final panels
  std::size_t panels = 0;       // number of final panels
  double worst_lo = 0.0;        // final panel with the largest error
  double worst_hi = 0.0;
};

namespace detail {

// Kronrod-15 abscissae on [0, 1] (symmetric; 0 included once) and weights;
// entries marked (G) are shared with the embedded Gauss-7 rule.
inline constexpr double kGK15Nodes[8] = {
    0.991455371120813, 0.949107912342759 /*G*/, 0.864864423359769,
    0.741531185599394 /*G*/, 0.586087235467691, 0.405845151377397 /*G*/,
    0.207784955007898, 0.0 /*G*/};
inline constexpr double kK15Weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kG7Weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Panel {
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;   // K15 estimate
  double error = 0.0;   // |K15 - G7|
};

template <typename F>
Panel evaluate_panel(F&& f, double lo, double hi) {
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  double k15 = 0.0;
  double g7 = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double offset = h * kGK15Nodes[i];
    double fsum;
    if (i == 7) {
      fsum = f(c);  // centre node counted once
    } else {
      fsum = f(c - offset) + f(c + offset);
    }
    k15 += kK15Weights[i] * fsum;
    if (i % 2 == 1) {
      g7 += kG7Weights[i / 2] * fsum;
    } else if (i == 7) {
      g7 += kG7Weights[3] * fsum;
    }
  }
  Panel p;
  p.lo = lo;
  p.hi = hi;
  p.value = h * k15;
  p.error = std::abs(h * (k15 - g7));
  return p;
}

}  // namespace detail

// Integrates f over [breaks.front(), breaks.back()], seeding one panel per
// consecutive breakpoint pair.  Breakpoints let the caller pre-split at known
// features (resonances, decade boundaries) so the error estimate is honest
// from the first pass.  Throws std::invalid_argument for a malformed break
// list and std::runtime_error (naming the worst subinterval) if max_panels
// bisections cannot reach the tolerance.
template <typename F>
QuadResult integrate_adaptive(F&& f, const std::vector<double>& breaks,
                              double rel_tol = 1e-9, double abs_tol = 0.0,
                              std::size_t max_panels = 4000) {
  if (breaks.size() < 2) {
    throw std::invalid_argument(
        "integrate_adaptive: need at least two breakpoints");
  }
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    if (!(breaks[i] > breaks[i - 1])) {
      throw std::invalid_argument(
          "integrate_adaptive: breakpoints must be strictly increasing");
    }
  }

  std::vector<detail::Panel> panels;
  panels.reserve(breaks.size() + 64);
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    panels.push_back(detail::evaluate_panel(f, breaks[i - 1], breaks[i]));
  }

  auto totals = [&panels]() {
    double v = 0.0, e = 0.0;
    for (const auto& p : panels) {
      v += p.value;
      e += p.error;
    }
    return std::pair<double, double>(v, e);
  };

  auto [value, error] = totals();
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (panels.size() >= max_panels) {
      const auto worst = std::max_element(
          panels.begin(), panels.end(),
          [](const detail::Panel& a, const detail::Panel& b) {
            return a.error < b.error;
          });
      throw std::runtime_error(
          "integrate_adaptive: no convergence after " +
          std::to_string(panels.size()) + " panels; worst subinterval [" +
          std::to_string(worst->lo) + ", " + std::to_string(worst->hi) +
          "] contributes error " + std::to_string(worst->error));
    }
    const auto worst = std::max_element(
        panels.begin(), panels.end(),
        [](const detail::Panel& a, const detail::Panel& b) {
          return a.error < b.error;
        });
    const double lo = worst->lo;
    const double hi = worst->hi;
    const double mid = 0.5 * (lo + hi);
    *worst = detail::evaluate_panel(f, lo, mid);
    panels.push_back(detail::evaluate_panel(f, mid, hi));
    std::tie(value, error) = totals();
  }

  // Deterministic final summation in left-edge order.
  std::sort(panels.begin(), panels.end(),
            [](const detail::Panel& a, const detail::Panel& b) {
              return a.lo < b.lo;
            });
  QuadResult result;
  for (const auto& p : panels) {
    result.value += p.value;
    result.abs_error += p.error;
  }
  result.panels = panels.size();
  const auto worst = std::max_element(
      panels.begin(), panels.end(),
      [](const detail::Panel& a, const detail::Panel& b) {
        return a.error < b.error;
      });
  result.worst_lo = worst->lo;
  result.worst_hi = worst->hi;
  return result;
}

}  // namespace magnoise
