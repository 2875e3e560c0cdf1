#include "nlsysid/linalg.hpp"

#include <stdexcept>

namespace nlsysid {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double min_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() > m.cols()) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  return s(s.size() - 1);
}

SymmetricExtremes symmetric_extremes(const Matrix& sym) {
  if (sym.rows() != sym.cols() || sym.rows() == 0) {
    throw std::invalid_argument("symmetric_extremes: expected a nonempty square matrix");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const auto& v = eig.eigenvalues();
  return {v(0), v(v.size() - 1)};
}

}  // namespace nlsysid
