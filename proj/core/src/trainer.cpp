#include "orthoprobe/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "orthoprobe/errors.hpp"
#include "orthoprobe/rng.hpp"

namespace ortho {

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::A: return "A";
    case Mode::B: return "B";
    case Mode::C: return "C";
    case Mode::D: return "D";
    case Mode::E: return "E";
    case Mode::I: return "I";
    case Mode::II: return "II";
  }
  throw ConfigError("invalid mode value");
}

Mode parse_mode(std::string_view name) {
  if (name == "A") return Mode::A;
  if (name == "B") return Mode::B;
  if (name == "C") return Mode::C;
  if (name == "D") return Mode::D;
  if (name == "E") return Mode::E;
  if (name == "I") return Mode::I;
  if (name == "II") return Mode::II;
  throw ConfigError("mode: unknown mode '" + std::string(name) + "'");
}

bool mode_is_orthogonal(Mode mode) { return mode != Mode::II; }

void validate_mode_objectives(Mode mode, const std::vector<ObjectiveId>& objectives) {
  if (objectives.empty()) {
    throw ConfigError("objectives: at least one objective is required");
  }
  const std::set<ObjectiveId> set(objectives.begin(), objectives.end());
  if (set.size() != objectives.size()) {
    throw ConfigError("objectives: duplicate entries");
  }
  switch (mode) {
    case Mode::A:
    case Mode::I:
      if (set.size() != 1) {
        throw ConfigError(std::string("objectives: mode ") + std::string(mode_name(mode)) +
                          " trains exactly one objective");
      }
      break;
    case Mode::B: {
      if (set.size() != 2) {
        throw ConfigError("objectives: mode B trains one structure's depth and distance pair");
      }
      const ObjectiveId a = *set.begin();
      const ObjectiveId b = *std::next(set.begin());
      if (a.structure != b.structure || a.target == b.target) {
        throw ConfigError("objectives: mode B trains one structure's depth and distance pair");
      }
      break;
    }
    case Mode::C:
    case Mode::D: {
      const Target wanted = mode == Mode::C ? Target::Distance : Target::Depth;
      const char* what = mode == Mode::C ? "distance" : "depth";
      if (set.size() != 4 ||
          !std::all_of(set.begin(), set.end(),
                       [wanted](ObjectiveId o) { return o.target == wanted; })) {
        throw ConfigError(std::string("objectives: mode ") + std::string(mode_name(mode)) +
                          " trains the four " + what + " objectives");
      }
      break;
    }
    case Mode::E:
      if (set.size() != 8) {
        throw ConfigError("objectives: mode E trains all eight objectives");
      }
      break;
    case Mode::II:
      break;  // any nonempty duplicate-free set
  }
}

std::vector<BatchSpec> build_schedule(const std::map<ObjectiveId, int>& sizes, int batch_size,
                                      std::uint64_t epoch_seed) {
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (sizes.empty()) throw ConfigError("objectives: nothing to schedule");
  auto gen = rng::engine(epoch_seed);
  std::vector<BatchSpec> batches;
  for (const auto& [objective, n] : sizes) {
    if (n <= 0) {
      throw ConfigError("objectives: no training sentences for " + objective.name());
    }
    std::vector<int> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    rng::shuffle(indices, gen);
    for (int start = 0; start < n; start += batch_size) {
      const int stop = std::min(start + batch_size, n);
      batches.push_back(
          BatchSpec{objective, std::vector<int>(indices.begin() + start, indices.begin() + stop)});
    }
  }
  rng::shuffle(batches, gen);
  return batches;
}

namespace {

template <typename Tensor>
void clip_tensor(Tensor& g, double c) {
  const double norm = g.norm();
  if (norm > c) g *= c / norm;
}

template <typename Tensor>
void adam_update(Tensor& param, Tensor& m, Tensor& v, std::int64_t& t, const Tensor& g,
                 const TrainConfig& config, double lr) {
  if (!g.allFinite()) throw NumericalError("non-finite gradient");
  if (m.size() == 0) {
    m = g;
    m.setZero();
    v = g;
    v.setZero();
  }
  ++t;
  m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * g;
  v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * g.cwiseProduct(g);
  const double m_corr = 1.0 - std::pow(config.adam_beta1, static_cast<double>(t));
  const double v_corr = 1.0 - std::pow(config.adam_beta2, static_cast<double>(t));
  param.array() -=
      lr * (m.array() / m_corr) / ((v.array() / v_corr).sqrt() + config.adam_eps);
}

}  // namespace

GradientBundle clip_gradients(GradientBundle bundle, double c) {
  if (c <= 0) throw ConfigError("clip_norm must be positive");
  if (bundle.grad_v.size() > 0) clip_tensor(bundle.grad_v, c);
  for (auto& [objective, g] : bundle.grad_d) clip_tensor(g, c);
  for (auto& [objective, g] : bundle.grad_b) clip_tensor(g, c);
  return bundle;
}

void adam_step(TrainState& state, const TrainConfig& config, const GradientBundle& grads) {
  const double lr = state.current_lr;
  if (auto* op = std::get_if<OrthogonalProbeParams>(&state.params)) {
    if (grads.grad_v.size() > 0 && !state.freeze_v) {
      adam_update(op->v, state.m_v, state.v_v, state.t_v, grads.grad_v, config, lr);
    }
    for (const auto& [objective, g] : grads.grad_d) {
      const auto it = op->scalers.find(objective);
      if (it == op->scalers.end()) {
        throw ConfigError("gradient for unconfigured objective " + objective.name());
      }
      adam_update(it->second, state.m_d[objective], state.v_d[objective], state.t_d[objective],
                  g, config, lr);
    }
  } else {
    auto& lp = std::get<LinearProbeParams>(state.params);
    for (const auto& [objective, g] : grads.grad_b) {
      const auto it = lp.maps.find(objective);
      if (it == lp.maps.end()) {
        throw ConfigError("gradient for unconfigured objective " + objective.name());
      }
      adam_update(it->second, state.m_b[objective], state.v_b[objective], state.t_b[objective],
                  g, config, lr);
    }
  }
  ++state.step;
}

double validation_loss(const ProbeParams& params, const ObjectiveData& val_data,
                       const std::vector<ObjectiveId>& objectives) {
  double total = 0.0;
  for (ObjectiveId objective : objectives) {
    const auto it = val_data.find(objective);
    if (it == val_data.end() || it->second.empty()) {
      throw ConfigError("no validation data for objective " + objective.name());
    }
    double sum = 0.0;
    for (const Example& ex : it->second) {
      if (objective.target == Target::Distance) {
        sum += data_loss(predict_distances(params, objective, *ex.embedding), ex.gold).value;
      } else {
        sum += data_loss(predict_depths(params, objective, *ex.embedding), ex.gold).value;
      }
    }
    total += sum / static_cast<double>(it->second.size());
  }
  return total;
}

TrainResult train(const TrainConfig& config, const ObjectiveData& train_data,
                  const ObjectiveData& val_data) {
  validate_mode_objectives(config.mode, config.objectives);
  if (config.batch_size < 1) throw ConfigError("batch_size must be positive");
  if (config.initial_lr <= 0) throw ConfigError("initial_lr must be positive");
  if (config.lr_decay_factor <= 1) throw ConfigError("lr_decay_factor must exceed 1");
  if (config.patience_updates < 1) throw ConfigError("patience_updates must be positive");
  if (config.max_epochs < 1) throw ConfigError("max_epochs must be positive");

  std::map<ObjectiveId, int> sizes;
  int dim = 0;
  for (ObjectiveId objective : config.objectives) {
    const auto it = train_data.find(objective);
    if (it == train_data.end() || it->second.empty()) {
      throw ConfigError("objectives: no training data for " + objective.name());
    }
    sizes[objective] = static_cast<int>(it->second.size());
    dim = static_cast<int>(it->second.front().embedding->cols());
    const auto vit = val_data.find(objective);
    if (vit == val_data.end() || vit->second.empty()) {
      throw ConfigError("objectives: no validation data for " + objective.name());
    }
  }

  TrainState state;
  state.freeze_v = config.mode == Mode::I;
  if (config.initial_params) {
    if (std::holds_alternative<OrthogonalProbeParams>(*config.initial_params) !=
        mode_is_orthogonal(config.mode)) {
      throw ConfigError("initial_params: parameter kind does not match mode");
    }
    state.params = *config.initial_params;
  } else if (mode_is_orthogonal(config.mode)) {
    OrthogonalProbeParams p = init_orthogonal(dim, config.objectives, config.seed);
    if (config.mode == Mode::I) p.v = Matrix::Identity(dim, dim);
    state.params = std::move(p);
  } else {
    state.params = init_linear(dim, config.objectives, config.seed);
  }
  state.current_lr = config.initial_lr;
  state.best_val_loss = std::numeric_limits<double>::infinity();

  const auto update_latch = [&state, &config] {
    if (state.sparsity_latched || config.hyper.lambda_s <= 0) return;
    if (const auto* op = std::get_if<OrthogonalProbeParams>(&state.params)) {
      if (dso_penalty(op->v) < config.hyper.sparsity_trigger) state.sparsity_latched = true;
    }
  };
  update_latch();

  ProbeParams best_params = state.params;
  int best_epoch = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const std::uint64_t epoch_seed = config.seed ^ static_cast<std::uint64_t>(epoch);
    const auto schedule = build_schedule(sizes, config.batch_size, epoch_seed);
    const double epoch_lr = state.current_lr;
    double loss_sum = 0.0;
    int skipped = 0;
    int batch_index = 0;
    for (const BatchSpec& batch : schedule) {
      ++batch_index;
      const auto& examples = train_data.at(batch.objective);
      std::vector<SentenceRef> refs;
      refs.reserve(batch.indices.size());
      for (int i : batch.indices) refs.push_back({examples[i].embedding, &examples[i].gold});
      const BatchLoss loss =
          total_loss(state.params, config.hyper, refs, batch.objective, state.sparsity_latched);
      if (!std::isfinite(loss.total)) {
        throw NumericalError("epoch " + std::to_string(epoch) + " batch " +
                             std::to_string(batch_index) + ": non-finite loss");
      }
      loss_sum += loss.total;
      skipped += loss.skipped_sentences;
      GradientBundle grads = loss_gradients(state.params, config.hyper, refs, batch.objective,
                                            state.sparsity_latched);
      grads = clip_gradients(std::move(grads), config.hyper.clip_norm);
      try {
        adam_step(state, config, grads);
      } catch (const NumericalError& e) {
        throw NumericalError("epoch " + std::to_string(epoch) + " batch " +
                             std::to_string(batch_index) + ": " + e.what());
      }
      update_latch();
    }

    const double val = validation_loss(state.params, val_data, config.objectives);
    if (!std::isfinite(val)) {
      throw NumericalError("epoch " + std::to_string(epoch) + ": non-finite validation loss");
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(schedule.size());
    record.val_loss = val;
    record.lr = epoch_lr;
    record.sparsity_active = state.sparsity_latched;
    record.skipped_sentences = skipped;
    if (const auto* op = std::get_if<OrthogonalProbeParams>(&state.params)) {
      record.dso = dso_penalty(op->v);
      if (state.sparsity_latched) {
        double l1 = 0.0;
        for (const auto& [objective, d] : op->scalers) l1 += l1_penalty(d);
        record.sparsity_penalty = config.hyper.lambda_s * l1;
      }
    }
    state.history.push_back(record);

    if (val < state.best_val_loss) {
      state.best_val_loss = val;
      best_params = state.params;
      best_epoch = epoch;
      state.lr_updates_without_improvement = 0;
    } else {
      state.current_lr /= config.lr_decay_factor;
      ++state.lr_updates_without_improvement;
      if (state.lr_updates_without_improvement >= config.patience_updates) break;
    }
  }

  TrainResult result;
  result.final_params = std::move(state.params);
  result.best_params = std::move(best_params);
  result.history = std::move(state.history);
  result.best_val_loss = state.best_val_loss;
  result.best_epoch = best_epoch;
  return result;
}

}  // namespace ortho
