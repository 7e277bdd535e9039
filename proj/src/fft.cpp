#include "calderon/fft.hpp"

#include <mutex>

#include <fftw3.h>

#include "calderon/error.hpp"

namespace calderon {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const cplx* p) { return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p)); }

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  ~PlanPair() {
    std::lock_guard lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

}  // namespace

struct Fft1d::Impl : PlanPair {};
struct Fft2d::Impl : PlanPair {};

Fft1d::Fft1d(int n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n <= 0) throw parameter_error("Fft1d: size must be positive");
  Eigen::VectorXcd in(n), out(n);
  std::lock_guard lock(planner_mutex());
  impl_->fwd = fftw_plan_dft_1d(n, as_fftw(in.data()), as_fftw(out.data()), FFTW_FORWARD, kFlags);
  impl_->bwd = fftw_plan_dft_1d(n, as_fftw(in.data()), as_fftw(out.data()), FFTW_BACKWARD, kFlags);
}

Fft1d::~Fft1d() = default;
Fft1d::Fft1d(Fft1d&&) noexcept = default;
Fft1d& Fft1d::operator=(Fft1d&&) noexcept = default;

Eigen::VectorXcd Fft1d::forward(const Eigen::VectorXcd& x) const {
  if (x.size() != n_) throw parameter_error("Fft1d: length mismatch");
  Eigen::VectorXcd out(n_);
  fftw_execute_dft(impl_->fwd, as_fftw(x.data()), as_fftw(out.data()));
  return out;
}

Eigen::VectorXcd Fft1d::inverse(const Eigen::VectorXcd& x) const {
  if (x.size() != n_) throw parameter_error("Fft1d: length mismatch");
  Eigen::VectorXcd out(n_);
  fftw_execute_dft(impl_->bwd, as_fftw(x.data()), as_fftw(out.data()));
  return out;
}

Fft2d::Fft2d(int rows, int cols) : rows_(rows), cols_(cols), impl_(std::make_unique<Impl>()) {
  if (rows <= 0 || cols <= 0) throw parameter_error("Fft2d: sizes must be positive");
  Eigen::MatrixXcd scratch(rows, cols);
  // FFTW is row-major; a column-major rows x cols array is row-major cols x rows.
  std::lock_guard lock(planner_mutex());
  impl_->fwd = fftw_plan_dft_2d(cols, rows, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD, kFlags);
  impl_->bwd = fftw_plan_dft_2d(cols, rows, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD, kFlags);
}

Fft2d::~Fft2d() = default;
Fft2d::Fft2d(Fft2d&&) noexcept = default;
Fft2d& Fft2d::operator=(Fft2d&&) noexcept = default;

void Fft2d::forward_inplace(Eigen::MatrixXcd& a) const {
  if (a.rows() != rows_ || a.cols() != cols_) throw parameter_error("Fft2d: shape mismatch");
  fftw_execute_dft(impl_->fwd, as_fftw(a.data()), as_fftw(a.data()));
}

void Fft2d::inverse_inplace(Eigen::MatrixXcd& a) const {
  if (a.rows() != rows_ || a.cols() != cols_) throw parameter_error("Fft2d: shape mismatch");
  fftw_execute_dft(impl_->bwd, as_fftw(a.data()), as_fftw(a.data()));
}

}  // namespace calderon
