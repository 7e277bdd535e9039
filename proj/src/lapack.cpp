#include "lapack.hpp"

#include <string>
#include <vector>

#include "calderon/error.hpp"

extern "C" void zgelsd_(const int* m, const int* n, const int* nrhs, std::complex<double>* a, const int* lda,
                        std::complex<double>* b, const int* ldb, double* s, const double* rcond, int* rank,
                        std::complex<double>* work, const int* lwork, double* rwork, int* iwork, int* info);

namespace calderon::detail {

TruncatedLstsq truncated_lstsq(Eigen::MatrixXcd a, const Eigen::VectorXcd& b, double rcond) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (b.size() != m) throw parameter_error("least-squares right-hand side has the wrong length");
  const int nrhs = 1;
  const int ldb = std::max(m, n);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(ldb);
  rhs.head(m) = b;
  TruncatedLstsq out;
  out.singular_values.resize(std::min(m, n));
  int info = 0, lwork = -1;
  std::complex<double> query;
  double rwork_query = 0.0;
  int iwork_query = 0;
  zgelsd_(&m, &n, &nrhs, a.data(), &m, rhs.data(), &ldb, out.singular_values.data(), &rcond, &out.rank, &query,
          &lwork, &rwork_query, &iwork_query, &info);
  lwork = static_cast<int>(query.real());
  std::vector<std::complex<double>> work(static_cast<std::size_t>(std::max(lwork, 1)));
  std::vector<double> rwork(static_cast<std::size_t>(std::max(1.0, rwork_query)));
  std::vector<int> iwork(static_cast<std::size_t>(std::max(1, iwork_query)));
  zgelsd_(&m, &n, &nrhs, a.data(), &m, rhs.data(), &ldb, out.singular_values.data(), &rcond, &out.rank, work.data(),
          &lwork, rwork.data(), iwork.data(), &info);
  if (info != 0) throw numerical_error("SVD least-squares failed (zgelsd info " + std::to_string(info) + ")");
  out.x = rhs.head(n);
  return out;
}

}  // namespace calderon::detail
