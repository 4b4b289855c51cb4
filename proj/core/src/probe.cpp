#include "orthoprobe/probe.hpp"

#include <cmath>
#include <string>

#include "orthoprobe/errors.hpp"
#include "orthoprobe/rng.hpp"

namespace ortho {

namespace {

void check_square(const Matrix& m, const char* name) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw ConfigError(std::string(name) + " must be a nonempty square matrix");
  }
}

void check_embedding(Eigen::Index dim, const Matrix& h) {
  if (h.cols() != dim) {
    throw ConfigError("embedding has " + std::to_string(h.cols()) +
                      " columns, probe expects " + std::to_string(dim));
  }
}

Matrix pairwise_sq_dist(const Matrix& z) {
  const int n = static_cast<int>(z.rows());
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = (z.row(i) - z.row(j)).squaredNorm();
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

const Vector& scaler(const OrthogonalProbeParams& p, ObjectiveId objective) {
  const auto it = p.scalers.find(objective);
  if (it == p.scalers.end()) {
    throw ConfigError("probe has no scaling vector for objective " + objective.name());
  }
  return it->second;
}

const Matrix& probe_map(const LinearProbeParams& p, ObjectiveId objective) {
  const auto it = p.maps.find(objective);
  if (it == p.maps.end()) {
    throw ConfigError("probe has no map for objective " + objective.name());
  }
  return it->second;
}

/// -sign(gold - pred)/s² per valid ordered pair, zero elsewhere.
Matrix pair_coefficients(const Matrix& pred, const GoldLabels& gold) {
  const int s = gold.token_count();
  const double scale = 1.0 / (static_cast<double>(s) * s);
  Matrix c = Matrix::Zero(s, s);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      if (i == j || !gold.pair_valid(i, j)) continue;
      const double r = gold.distances(i, j) - pred(i, j);
      if (r > 0) {
        c(i, j) = -scale;
      } else if (r < 0) {
        c(i, j) = scale;
      }
    }
  }
  return c;
}

/// -sign(gold - pred)/s per valid token, zero elsewhere.
Vector token_coefficients(const Vector& pred, const GoldLabels& gold) {
  const int s = gold.token_count();
  const double scale = 1.0 / s;
  Vector c = Vector::Zero(s);
  for (int i = 0; i < s; ++i) {
    if (!gold.depth_valid(i)) continue;
    const double r = gold.depths(i) - pred(i);
    if (r > 0) {
      c(i) = -scale;
    } else if (r < 0) {
      c(i) = scale;
    }
  }
  return c;
}

/// Gradient with respect to the rows of z for the pairwise squared-distance
/// loss with coefficient matrix c: row i gets Σ_j (c+cᵀ)_ij · 2(z_i - z_j).
Matrix pair_row_gradient(const Matrix& z, const Matrix& c) {
  const Matrix s = c + c.transpose();
  const Vector w = s.rowwise().sum();
  return 2.0 * (w.asDiagonal() * z - s * z);
}

}  // namespace

OrthogonalProbeParams init_orthogonal(int dim, const std::vector<ObjectiveId>& objectives,
                                      std::uint64_t seed) {
  if (dim < 1) throw ConfigError("probe dim must be positive");
  if (objectives.empty()) throw ConfigError("probe needs at least one objective");
  OrthogonalProbeParams p;
  p.v = random_orthogonal(dim, seed);
  const double init = 1.0 / std::sqrt(static_cast<double>(dim));
  for (ObjectiveId objective : objectives) {
    p.scalers[objective] = Vector::Constant(dim, init);
  }
  return p;
}

LinearProbeParams init_linear(int dim, const std::vector<ObjectiveId>& objectives,
                              std::uint64_t seed) {
  if (dim < 1) throw ConfigError("probe dim must be positive");
  if (objectives.empty()) throw ConfigError("probe needs at least one objective");
  LinearProbeParams p;
  for (ObjectiveId objective : objectives) {
    p.maps[objective] = random_orthogonal(dim, rng::combine(seed, objective.tag()));
  }
  return p;
}

Matrix distance_forward_linear(const Matrix& b, const Matrix& h) {
  check_square(b, "B");
  check_embedding(b.cols(), h);
  return pairwise_sq_dist(h * b.transpose());
}

Vector depth_forward_linear(const Matrix& b, const Matrix& h) {
  check_square(b, "B");
  check_embedding(b.cols(), h);
  return (h * b.transpose()).rowwise().squaredNorm();
}

Matrix distance_forward_orthogonal(const Matrix& v, const Vector& d, const Matrix& h) {
  check_square(v, "V");
  check_embedding(v.rows(), h);
  if (d.size() != v.cols()) throw ConfigError("scaling vector length mismatch");
  Matrix u = h * v;
  u.array().rowwise() *= d.transpose().array();
  return pairwise_sq_dist(u);
}

Vector depth_forward_orthogonal(const Matrix& v, const Vector& d, const Matrix& h) {
  check_square(v, "V");
  check_embedding(v.rows(), h);
  if (d.size() != v.cols()) throw ConfigError("scaling vector length mismatch");
  Matrix u = h * v;
  u.array().rowwise() *= d.transpose().array();
  return u.rowwise().squaredNorm();
}

Matrix predict_distances(const ProbeParams& params, ObjectiveId objective, const Matrix& h) {
  if (const auto* op = std::get_if<OrthogonalProbeParams>(&params)) {
    return distance_forward_orthogonal(op->v, scaler(*op, objective), h);
  }
  return distance_forward_linear(probe_map(std::get<LinearProbeParams>(params), objective), h);
}

Vector predict_depths(const ProbeParams& params, ObjectiveId objective, const Matrix& h) {
  if (const auto* op = std::get_if<OrthogonalProbeParams>(&params)) {
    return depth_forward_orthogonal(op->v, scaler(*op, objective), h);
  }
  return depth_forward_linear(probe_map(std::get<LinearProbeParams>(params), objective), h);
}

SentenceLoss data_loss(const Matrix& pred, const GoldLabels& gold) {
  const int s = gold.token_count();
  if (pred.rows() != s || pred.cols() != s) throw ConfigError("prediction shape mismatch");
  SentenceLoss loss;
  double sum = 0.0;
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      if (i == j || !gold.pair_valid(i, j)) continue;
      sum += std::abs(gold.distances(i, j) - pred(i, j));
      ++loss.terms;
    }
  }
  loss.value = sum / (static_cast<double>(s) * s);
  return loss;
}

SentenceLoss data_loss(const Vector& pred, const GoldLabels& gold) {
  const int s = gold.token_count();
  if (pred.size() != s) throw ConfigError("prediction shape mismatch");
  SentenceLoss loss;
  double sum = 0.0;
  for (int i = 0; i < s; ++i) {
    if (!gold.depth_valid(i)) continue;
    sum += std::abs(gold.depths(i) - pred(i));
    ++loss.terms;
  }
  loss.value = sum / s;
  return loss;
}

BatchLoss total_loss(const ProbeParams& params, const Hyperparams& hyper,
                     const std::vector<SentenceRef>& batch, ObjectiveId objective,
                     bool sparsity_active) {
  if (batch.empty()) throw ConfigError("empty batch");
  BatchLoss out;
  double data_sum = 0.0;
  for (const SentenceRef& ref : batch) {
    SentenceLoss sl;
    if (objective.target == Target::Distance) {
      sl = data_loss(predict_distances(params, objective, *ref.embedding), *ref.gold);
    } else {
      sl = data_loss(predict_depths(params, objective, *ref.embedding), *ref.gold);
    }
    data_sum += sl.value;
    if (sl.terms == 0) ++out.skipped_sentences;
  }
  out.data = data_sum / static_cast<double>(batch.size());
  out.total = out.data;
  if (const auto* op = std::get_if<OrthogonalProbeParams>(&params)) {
    out.dso = dso_penalty(op->v);
    out.sparsity = l1_penalty(scaler(*op, objective));
    out.total += hyper.lambda_o * out.dso;
    if (sparsity_active) out.total += hyper.lambda_s * out.sparsity;
  }
  return out;
}

GradientBundle loss_gradients(const ProbeParams& params, const Hyperparams& hyper,
                              const std::vector<SentenceRef>& batch, ObjectiveId objective,
                              bool sparsity_active) {
  if (batch.empty()) throw ConfigError("empty batch");
  GradientBundle bundle;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  if (const auto* op = std::get_if<OrthogonalProbeParams>(&params)) {
    const Vector& d = scaler(*op, objective);
    const int dim = op->dim();
    const Vector d2 = d.array().square();
    Matrix grad_v = Matrix::Zero(dim, dim);
    Vector grad_d = Vector::Zero(dim);
    for (const SentenceRef& ref : batch) {
      const Matrix& h = *ref.embedding;
      const GoldLabels& gold = *ref.gold;
      if (h.rows() != gold.token_count()) {
        throw ConfigError("embedding/label token count mismatch");
      }
      const Matrix u = h * op->v;  // row i = (Vᵀ h_i)ᵀ, before scaling
      if (objective.target == Target::Distance) {
        Matrix scaled = u;
        scaled.array().rowwise() *= d.transpose().array();
        const Matrix c = pair_coefficients(pairwise_sq_dist(scaled), gold);
        const Matrix s = c + c.transpose();
        Matrix grad_u = pair_row_gradient(u, c);
        grad_u.array().rowwise() *= d2.transpose().array();
        grad_v.noalias() += h.transpose() * grad_u;
        const int n = gold.token_count();
        for (int i = 0; i < n; ++i) {
          for (int j = i + 1; j < n; ++j) {
            if (s(i, j) == 0.0) continue;
            const Vector delta = (u.row(i) - u.row(j)).transpose();
            grad_d.array() += 2.0 * s(i, j) * d.array() * delta.array().square();
          }
        }
      } else {
        Matrix scaled = u;
        scaled.array().rowwise() *= d.transpose().array();
        const Vector c = token_coefficients(scaled.rowwise().squaredNorm(), gold);
        Matrix grad_u = 2.0 * (c.asDiagonal() * u);
        grad_u.array().rowwise() *= d2.transpose().array();
        grad_v.noalias() += h.transpose() * grad_u;
        const int n = gold.token_count();
        for (int i = 0; i < n; ++i) {
          if (c(i) == 0.0) continue;
          const Vector row = u.row(i).transpose();
          grad_d.array() += 2.0 * c(i) * d.array() * row.array().square();
        }
      }
    }
    grad_v *= inv_batch;
    grad_d *= inv_batch;
    grad_v += hyper.lambda_o * dso_gradient(op->v);
    if (sparsity_active) grad_d += hyper.lambda_s * l1_subgradient(d);
    bundle.grad_v = std::move(grad_v);
    bundle.grad_d[objective] = std::move(grad_d);
    return bundle;
  }

  const auto& lp = std::get<LinearProbeParams>(params);
  const Matrix& b = probe_map(lp, objective);
  Matrix grad_b = Matrix::Zero(b.rows(), b.cols());
  for (const SentenceRef& ref : batch) {
    const Matrix& h = *ref.embedding;
    const GoldLabels& gold = *ref.gold;
    if (h.rows() != gold.token_count()) {
      throw ConfigError("embedding/label token count mismatch");
    }
    const Matrix z = h * b.transpose();  // row i = (B h_i)ᵀ
    if (objective.target == Target::Distance) {
      const Matrix c = pair_coefficients(pairwise_sq_dist(z), gold);
      const Matrix grad_z = pair_row_gradient(z, c);
      grad_b.noalias() += grad_z.transpose() * h;
    } else {
      const Vector c = token_coefficients(z.rowwise().squaredNorm(), gold);
      const Matrix grad_z = 2.0 * (c.asDiagonal() * z);
      grad_b.noalias() += grad_z.transpose() * h;
    }
  }
  grad_b *= inv_batch;
  bundle.grad_b[objective] = std::move(grad_b);
  return bundle;
}

std::int64_t parameter_count(int dim, int n_objectives) {
  if (dim < 1 || n_objectives < 1) throw ConfigError("dim and objective count must be positive");
  const std::int64_t d = dim;
  return d * d + d * n_objectives;
}

std::int64_t degrees_of_freedom(int dim, int n_objectives) {
  if (dim < 1 || n_objectives < 1) throw ConfigError("dim and objective count must be positive");
  const std::int64_t d = dim;
  return d * (d - 1) / 2 + d * n_objectives;
}

}  // namespace ortho
