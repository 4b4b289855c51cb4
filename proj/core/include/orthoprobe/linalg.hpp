#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>

#include "orthoprobe/objective.hpp"

namespace ortho {

// All internal math runs in double; files store float32 and conversion happens
// at the I/O boundary. Row-major storage so a sentence matrix row is one token.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Gradients for one loss evaluation, keyed the same way as the parameters.
/// Orthogonal probes fill grad_v + grad_d; the unconstrained baseline fills
/// grad_b. Tensors absent from a bundle are treated as zero.
struct GradientBundle {
  Matrix grad_v;
  std::map<ObjectiveId, Vector> grad_d;
  std::map<ObjectiveId, Matrix> grad_b;
};

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the R
/// diagonal forced positive. Deterministic in (dim, seed) across platforms.
Matrix random_orthogonal(int dim, std::uint64_t seed);

/// ||V^T V - I||_F^2, penalizing column non-orthonormality.
double so_penalty(const Matrix& v);

/// so_penalty of V plus so_penalty of V^T; drives V toward a full rotation.
double dso_penalty(const Matrix& v);

/// Gradient of dso_penalty with respect to V.
Matrix dso_gradient(const Matrix& v);

/// ||V^T V - I||_F, the unsquared one-sided deviation reported in logs and
/// used for the sparsity activation check.
double orthogonality_deviation(const Matrix& v);

/// Sum of |v_i|.
double l1_penalty(const Vector& v);

/// Subgradient of l1_penalty: sign(v_i), with 0 at v_i == 0.
Vector l1_subgradient(const Vector& v);

struct SvdResult {
  Matrix u;
  Vector singular_values;
  Matrix v;  // right factor, not transposed: input == u * diag(s) * v^T
};

/// Full singular value decomposition of a square matrix.
SvdResult svd_decompose(const Matrix& m);

}  // namespace ortho
