#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "orthoprobe/dataset.hpp"
#include "orthoprobe/probe.hpp"

namespace ortho {

/// Training configurations. A trains one objective; B one structure's depth
/// and distance together; C all four distances; D all four depths; E all
/// eight objectives. I optimizes scaling vectors only with V frozen at the
/// identity; II is the unconstrained per-objective baseline.
enum class Mode : std::uint8_t { A = 0, B = 1, C = 2, D = 3, E = 4, I = 5, II = 6 };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);

/// True for modes that train a shared rotation with per-objective scalers.
bool mode_is_orthogonal(Mode mode);

/// Throws ConfigError naming `objectives` when the set does not match the
/// mode's requirements.
void validate_mode_objectives(Mode mode, const std::vector<ObjectiveId>& objectives);

struct TrainConfig {
  int batch_size = 12;
  double initial_lr = 0.02;
  double lr_decay_factor = 10.0;
  int patience_updates = 3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  Hyperparams hyper;
  std::vector<ObjectiveId> objectives;
  Mode mode = Mode::A;
  std::uint64_t seed = 0;
  int max_epochs = 100;
  /// Overrides the seeded default initialization; used by tests that need a
  /// specific starting point (for instance a far-from-orthogonal V).
  std::optional<ProbeParams> initial_params;
};

struct EpochRecord {
  int epoch = 0;                  // 1-based
  double train_loss = 0.0;        // mean batch loss, penalties as applied
  double val_loss = 0.0;          // penalty-free validation loss
  double dso = 0.0;               // DSO(V) at epoch end; 0 for the linear baseline
  double sparsity_penalty = 0.0;  // λ_S · Σ_o ‖d̄_o‖₁ at epoch end, 0 until latched
  double lr = 0.0;                // rate in effect during this epoch
  bool sparsity_active = false;
  int skipped_sentences = 0;      // all-masked sentences seen this epoch
};

/// Mutable optimization state. Adam moments and update counts exist per
/// tensor; a tensor absent from a step's gradients keeps its state.
struct TrainState {
  ProbeParams params;
  Matrix m_v, v_v;
  std::int64_t t_v = 0;
  std::map<ObjectiveId, Vector> m_d, v_d;
  std::map<ObjectiveId, std::int64_t> t_d;
  std::map<ObjectiveId, Matrix> m_b, v_b;
  std::map<ObjectiveId, std::int64_t> t_b;
  std::int64_t step = 0;
  double current_lr = 0.0;
  double best_val_loss = 0.0;
  int lr_updates_without_improvement = 0;
  bool sparsity_latched = false;
  bool freeze_v = false;
  std::vector<EpochRecord> history;
};

/// One batch of the epoch schedule: a single objective plus sentence indices
/// into that objective's example list.
struct BatchSpec {
  ObjectiveId objective;
  std::vector<int> indices;
};

/// Shuffles each objective's sentences, chunks them into single-objective
/// batches, and shuffles the combined batch order; everything derives from
/// epoch_seed. Every sentence appears exactly once. Throws ConfigError when
/// an objective has no data.
std::vector<BatchSpec> build_schedule(const std::map<ObjectiveId, int>& sizes, int batch_size,
                                      std::uint64_t epoch_seed);

/// Scales each tensor whose L2 norm exceeds c down to norm c.
GradientBundle clip_gradients(GradientBundle bundle, double c);

/// Bias-corrected Adam update for every tensor present in grads. Skips V when
/// state.freeze_v is set. Throws NumericalError on non-finite gradients.
void adam_step(TrainState& state, const TrainConfig& config, const GradientBundle& grads);

/// Penalty-free loss: per objective the mean sentence data loss over its
/// validation examples, summed across objectives.
double validation_loss(const ProbeParams& params, const ObjectiveData& val_data,
                       const std::vector<ObjectiveId>& objectives);

struct TrainResult {
  ProbeParams final_params;
  ProbeParams best_params;  // parameters at the validation minimum
  std::vector<EpochRecord> history;
  double best_val_loss = 0.0;
  int best_epoch = 0;
};

/// Runs the full regimen: shuffled single-objective batches, per-tensor
/// gradient clipping, Adam, a permanent sparsity latch once DSO drops below
/// the trigger, and validation-driven learning-rate decay. An epoch without a
/// new validation minimum divides the rate by lr_decay_factor; after
/// patience_updates consecutive decays without a new minimum training stops.
/// The best-validation parameters are checkpointed and returned.
TrainResult train(const TrainConfig& config, const ObjectiveData& train_data,
                  const ObjectiveData& val_data);

}  // namespace ortho
