#pragma once

#include <memory>

#include "calderon/types.hpp"

namespace calderon {

// Thin RAII wrappers around FFTW. Plans are created under a global lock;
// execution on distinct objects is thread-safe.
// Unnormalized in both directions: inverse(forward(x)) = n * x.

class Fft1d {
 public:
  explicit Fft1d(int n);
  ~Fft1d();
  Fft1d(Fft1d&&) noexcept;
  Fft1d& operator=(Fft1d&&) noexcept;

  int size() const { return n_; }
  Eigen::VectorXcd forward(const Eigen::VectorXcd& x) const;
  Eigen::VectorXcd inverse(const Eigen::VectorXcd& x) const;

 private:
  struct Impl;
  int n_;
  std::unique_ptr<Impl> impl_;
};

// Column-major n0 x n1 complex arrays (matches Eigen::MatrixXcd storage).
class Fft2d {
 public:
  Fft2d(int rows, int cols);
  ~Fft2d();
  Fft2d(Fft2d&&) noexcept;
  Fft2d& operator=(Fft2d&&) noexcept;

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  void forward_inplace(Eigen::MatrixXcd& a) const;
  void inverse_inplace(Eigen::MatrixXcd& a) const;

 private:
  struct Impl;
  int rows_, cols_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace calderon
