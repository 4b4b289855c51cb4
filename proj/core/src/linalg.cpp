#include "orthoprobe/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

#include "orthoprobe/errors.hpp"
#include "orthoprobe/rng.hpp"

namespace ortho {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw ConfigError(std::string(what) + ": expected a square matrix, got " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

}  // namespace

Matrix random_orthogonal(int dim, std::uint64_t seed) {
  if (dim < 1) throw ConfigError("random_orthogonal: dimension must be positive");
  auto gen = rng::engine(seed);
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = rng::gaussian(gen);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fixing the sign of each column against R's diagonal makes the
  // decomposition unique and the distribution Haar.
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

double so_penalty(const Matrix& v) {
  require_square(v, "so_penalty");
  const Matrix gram = v.transpose() * v;
  const int n = static_cast<int>(gram.rows());
  return (gram - Matrix::Identity(n, n)).squaredNorm();
}

double dso_penalty(const Matrix& v) {
  require_square(v, "dso_penalty");
  return so_penalty(v) + so_penalty(v.transpose());
}

Matrix dso_gradient(const Matrix& v) {
  require_square(v, "dso_gradient");
  const int n = static_cast<int>(v.rows());
  const Matrix eye = Matrix::Identity(n, n);
  return 4.0 * v * (v.transpose() * v - eye) + 4.0 * (v * v.transpose() - eye) * v;
}

double orthogonality_deviation(const Matrix& v) {
  require_square(v, "orthogonality_deviation");
  return std::sqrt(so_penalty(v));
}

double l1_penalty(const Vector& v) { return v.cwiseAbs().sum(); }

Vector l1_subgradient(const Vector& v) {
  return v.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

SvdResult svd_decompose(const Matrix& m) {
  require_square(m, "svd_decompose");
  if (!m.allFinite()) throw ConfigError("svd_decompose: non-finite entries");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return SvdResult{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace ortho
