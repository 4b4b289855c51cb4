#pragma once

#include <cstdint>
#include <map>
#include <variant>
#include <vector>

#include "orthoprobe/linalg.hpp"
#include "orthoprobe/objective.hpp"
#include "orthoprobe/treebank.hpp"

namespace ortho {

struct Hyperparams {
  double lambda_o = 0.05;        // weight of the orthogonality penalty on V
  double lambda_s = 0.0;         // weight of the L1 penalty on scaling vectors
  double sparsity_trigger = 1.5; // DSO level below which the L1 term turns on
  double clip_norm = 1.5;        // per-tensor gradient clip
};

/// Shared rotation V plus one scaling vector per objective.
struct OrthogonalProbeParams {
  Matrix v;
  std::map<ObjectiveId, Vector> scalers;

  int dim() const { return static_cast<int>(v.rows()); }
};

/// Independent dense map per objective; the unconstrained baseline.
struct LinearProbeParams {
  std::map<ObjectiveId, Matrix> maps;

  int dim() const { return maps.empty() ? 0 : static_cast<int>(maps.begin()->second.rows()); }
};

using ProbeParams = std::variant<OrthogonalProbeParams, LinearProbeParams>;

/// V = seeded random rotation, every scaling vector constant 1/sqrt(dim).
OrthogonalProbeParams init_orthogonal(int dim, const std::vector<ObjectiveId>& objectives,
                                      std::uint64_t seed);

/// One seeded random rotation per objective as the starting B.
LinearProbeParams init_linear(int dim, const std::vector<ObjectiveId>& objectives,
                              std::uint64_t seed);

/// out(i,j) = squared norm of B(h_i - h_j); rows of h are tokens.
Matrix distance_forward_linear(const Matrix& b, const Matrix& h);

/// out(i) = squared norm of B h_i.
Vector depth_forward_linear(const Matrix& b, const Matrix& h);

/// out(i,j) = squared norm of d ⊙ Vᵀ(h_i - h_j).
Matrix distance_forward_orthogonal(const Matrix& v, const Vector& d, const Matrix& h);

/// out(i) = squared norm of d ⊙ Vᵀ h_i.
Vector depth_forward_orthogonal(const Matrix& v, const Vector& d, const Matrix& h);

Matrix predict_distances(const ProbeParams& params, ObjectiveId objective, const Matrix& h);
Vector predict_depths(const ProbeParams& params, ObjectiveId objective, const Matrix& h);

/// One sentence's normalized absolute-error loss. `terms` counts the unmasked
/// summands; a sentence with terms == 0 contributed nothing.
struct SentenceLoss {
  double value = 0.0;
  int terms = 0;
};

/// Distance loss: sum of |gold - pred| over ordered unmasked pairs i ≠ j,
/// divided by s² where s is the full token count.
SentenceLoss data_loss(const Matrix& pred, const GoldLabels& gold);

/// Depth loss: sum of |gold - pred| over unmasked tokens, divided by s.
SentenceLoss data_loss(const Vector& pred, const GoldLabels& gold);

/// A sentence paired with its gold labels; both referents outlive the batch.
struct SentenceRef {
  const Matrix* embedding = nullptr;
  const GoldLabels* gold = nullptr;
};

struct BatchLoss {
  double total = 0.0;     // data + active penalties
  double data = 0.0;      // mean per-sentence data loss
  double dso = 0.0;       // orthogonality penalty value, before weighting
  double sparsity = 0.0;  // L1 penalty value of the batch objective, before weighting
  int skipped_sentences = 0;
};

/// Mean data loss over the batch plus λ_O·DSO(V) and, once sparsity_active,
/// λ_S·‖d̄‖₁ of the batch's objective. Penalties are zero for the linear
/// baseline. Throws ConfigError on an empty batch.
BatchLoss total_loss(const ProbeParams& params, const Hyperparams& hyper,
                     const std::vector<SentenceRef>& batch, ObjectiveId objective,
                     bool sparsity_active);

/// Analytic gradients of total_loss for the parameters the objective touches.
/// Subgradients at absolute-value and L1 kinks are 0.
GradientBundle loss_gradients(const ProbeParams& params, const Hyperparams& hyper,
                              const std::vector<SentenceRef>& batch, ObjectiveId objective,
                              bool sparsity_active);

/// dim² shared-matrix entries plus dim per objective.
std::int64_t parameter_count(int dim, int n_objectives);

/// dim(dim-1)/2 rotation freedoms plus dim per objective.
std::int64_t degrees_of_freedom(int dim, int n_objectives);

}  // namespace ortho
