#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace calderon {

struct GmresOptions {
  double tol = 1e-8;  // relative residual ||b - A x|| / ||b||
  int max_iter = 500; // total inner iterations across restarts
  int restart = 50;
};

struct GmresReport {
  bool converged = false;
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> history;  // relative residual after each inner iteration
};

// Restarted GMRES with modified Gram-Schmidt and Givens rotations.
// Works for real and complex scalars; x holds the initial guess on entry.
template <typename Scalar>
GmresReport gmres(const std::function<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>&)>& apply,
                  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                  Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x, const GmresOptions& opt) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using std::abs;

  GmresReport rep;
  const double bnorm = b.norm();
  if (x.size() != b.size()) x = Vec::Zero(b.size());
  if (bnorm == 0.0) {
    x.setZero();
    rep.converged = true;
    return rep;
  }

  const int m = std::max(1, opt.restart);
  Vec r = b - apply(x);
  double beta = r.norm();
  rep.relative_residual = beta / bnorm;
  if (rep.relative_residual <= opt.tol) {
    rep.converged = true;
    return rep;
  }

  std::vector<Vec> basis;
  Mat h(m + 1, m);
  std::vector<Scalar> cs(m), sn(m);
  Vec g(m + 1);

  while (rep.iterations < opt.max_iter) {
    basis.clear();
    basis.push_back(r / beta);
    h.setZero();
    g.setZero();
    g(0) = beta;

    int j = 0;
    for (; j < m && rep.iterations < opt.max_iter; ++j) {
      Vec w = apply(basis[j]);
      for (int i = 0; i <= j; ++i) {
        h(i, j) = basis[i].dot(w);  // conjugate-linear in the first argument
        w -= h(i, j) * basis[i];
      }
      const double wn = w.norm();
      h(j + 1, j) = wn;

      for (int i = 0; i < j; ++i) {
        const Scalar t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
        h(i + 1, j) = -Eigen::numext::conj(sn[i]) * h(i, j) + cs[i] * h(i + 1, j);
        h(i, j) = t;
      }
      const double a = abs(h(j, j));
      const double denom = std::hypot(a, wn);
      if (denom == 0.0) {
        cs[j] = 1;
        sn[j] = 0;
      } else if (a == 0.0) {
        cs[j] = 0;
        sn[j] = 1;
      } else {
        cs[j] = a / denom;
        sn[j] = (h(j, j) / a) * wn / denom;
        sn[j] = Eigen::numext::conj(sn[j]);
      }
      h(j, j) = cs[j] * h(j, j) + sn[j] * h(j + 1, j);
      h(j + 1, j) = 0;
      g(j + 1) = -Eigen::numext::conj(sn[j]) * g(j);
      g(j) = cs[j] * g(j);

      ++rep.iterations;
      rep.relative_residual = abs(g(j + 1)) / bnorm;
      rep.history.push_back(rep.relative_residual);
      if (rep.relative_residual <= opt.tol || wn == 0.0) {
        ++j;
        break;
      }
      basis.push_back(w / wn);
    }

    Vec y = h.topLeftCorner(j, j).template triangularView<Eigen::Upper>().solve(g.head(j));
    for (int i = 0; i < j; ++i) x += y(i) * basis[i];

    r = b - apply(x);
    beta = r.norm();
    rep.relative_residual = beta / bnorm;
    if (rep.relative_residual <= opt.tol) {
      rep.converged = true;
      return rep;
    }
  }
  return rep;
}

}  // namespace calderon
