#pragma once

#include <random>

#include "calderon/boundary.hpp"
#include "calderon/conductivity.hpp"

namespace testing {

using calderon::cplx;
using calderon::I;

// Band-limited random boundary function with modes |n| <= band.
inline calderon::BoundaryFunction random_band_limited(const calderon::BoundaryGeometry& g, int band,
                                                      std::mt19937& rng, bool zero_mean = false) {
  std::normal_distribution<double> d;
  calderon::BoundaryFunction f = calderon::BoundaryFunction::Zero(g.n_nodes);
  for (int n = -band; n <= band; ++n) {
    if (zero_mean && n == 0) continue;
    const cplx c(d(rng), d(rng));
    for (int j = 0; j < g.n_nodes; ++j) f(j) += c * std::polar(1.0, n * g.angle(j));
  }
  return f;
}

// Lambda_gamma e^{in theta} = lambda_n e^{in theta} for a centred radial bump on
// the unit disk, from the radial ODE  R' = P / (r gamma),  P' = gamma n^2 R / r,
// integrated with classical RK4 from a small r0 where R ~ r^|n|.
inline double radial_dtn_eigenvalue(int n, double support, double peak, int steps = 20000) {
  const int a = std::abs(n);
  const auto gam = [&](double r) { return calderon::bump_profile(r, support, peak); };
  if (a == 0) return 0.0;
  const double r0 = 1e-3;
  double r = r0, big_r = std::pow(r0, a), p = gam(r0) * a * std::pow(r0, a);
  const double h = (1.0 - r0) / steps;
  const auto f = [&](double rr, double rv, double pv) {
    return std::pair<double, double>{pv / (rr * gam(rr)), gam(rr) * a * a * rv / rr};
  };
  for (int i = 0; i < steps; ++i) {
    auto [k1r, k1p] = f(r, big_r, p);
    auto [k2r, k2p] = f(r + h / 2, big_r + h / 2 * k1r, p + h / 2 * k1p);
    auto [k3r, k3p] = f(r + h / 2, big_r + h / 2 * k2r, p + h / 2 * k2p);
    auto [k4r, k4p] = f(r + h, big_r + h * k3r, p + h * k3p);
    big_r += h / 6 * (k1r + 2 * k2r + 2 * k3r + k4r);
    p += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
    r += h;
  }
  return p / big_r;
}

}  // namespace testing
