#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace calderon {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};
inline constexpr double pi = std::numbers::pi;

/// e(z,k) = exp(i z k + i conj(z k)); unimodular.
inline cplx twist(cplx z, cplx k) {
  const cplx zk = z * k;
  return std::exp(I * (zk + std::conj(zk)));
}

}  // namespace calderon
