#include "stitchlab/common.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace stitchlab {

namespace {
bool nearly_hermitian(const cxmat& m) {
  return (m - m.adjoint()).norm() <= 1e-12 * (1.0 + m.norm());
}
}  // namespace

double operator_norm(const cxmat& m) {
  if (m.rows() == m.cols() && nearly_hermitian(m)) {
    Eigen::SelfAdjointEigenSolver<cxmat> es((m + m.adjoint()) / 2.0,
                                            Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<cxmat> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double trace_norm(const cxmat& m) {
  if (m.rows() == m.cols() && nearly_hermitian(m)) {
    Eigen::SelfAdjointEigenSolver<cxmat> es((m + m.adjoint()) / 2.0,
                                            Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<cxmat> svd(m);
  return svd.singularValues().sum();
}

cxmat random_unit_hermitian(Eigen::Index dim, std::mt19937_64& rng) {
  cxmat h = random_hermitian(dim, rng);
  double n = operator_norm(h);
  if (n > 0) h /= n;
  return h;
}

cxmat random_density(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  cxmat a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = cx(g(rng), g(rng));
  cxmat rho = a * a.adjoint();
  rho /= rho.trace().real();
  return rho;
}

}  // namespace stitchlab
