// Per-element neural surrogate for the dual solution: residual feed-forward
// network over the 13 per-element features, four linear output heads,
// relative-error loss, Adam training with k-fold cross-validation, and a
// versioned text serialization with bit-exact round trips.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "goalfv/features.hpp"

namespace goalfv {

struct SurrogateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 256;
  int epochs = 200;
  int k_folds = 5;
  double dropout = 0.1;  // training only
  double loss_epsilon = 1e-6;
  // cosine decay of the learning rate over the epoch budget; without it the
  // sign-gradient loss keeps Adam rattling at a loss floor
  bool cosine_lr_decay = true;
  // k-fold CV is diagnostics; production fits can skip straight to the
  // final all-data fit
  bool cross_validate = true;
  std::uint64_t seed = 1;
};

/// sum_i |pred_i - target_i| / (|target_i| + eps)
double surrogate_loss(const std::array<double, 4>& pred,
                      const std::array<double, 4>& target, double eps);

/// Hidden stack of equal widths with ELU activations; consecutive layer pairs
/// form identity-skip blocks h <- h + W2*ELU(W1*h + b1) + b2. Inputs are
/// normalized per feature; zero-variance features get std 1 and a flag.
class SurrogateModel {
 public:
  /// He-normal initialization (leaky-ReLU gain, a = 0.01), zero biases,
  /// deterministic per seed.
  static SurrogateModel create(const std::vector<int>& hidden_widths,
                               std::uint64_t seed);

  void set_normalization(const std::array<double, kFeatureCount>& mean,
                         const std::array<double, kFeatureCount>& std_dev);
  const std::array<double, kFeatureCount>& feature_mean() const { return mean_; }
  const std::array<double, kFeatureCount>& feature_std() const { return std_; }
  const std::array<std::uint8_t, kFeatureCount>& constant_feature_flags() const {
    return const_flag_;
  }

  /// Deterministic inference pass (no dropout).
  std::array<double, 4> forward(const FeatureRow& features) const;

  int width() const { return width_; }
  int blocks() const { return n_blocks_; }
  int parameter_count() const { return static_cast<int>(params_.size()); }
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  // parameter layout offsets (used by the trainer and by tests)
  int off_w_in() const { return 0; }
  int off_b_in() const { return width_ * kFeatureCount; }
  int off_block(int b) const { return off_b_in() + width_ + b * block_stride(); }
  int block_stride() const { return 2 * width_ * width_ + 2 * width_; }
  int off_heads() const { return off_block(n_blocks_); }
  int off_head_bias() const { return off_heads() + 4 * width_; }

  void save(const std::string& path) const;
  static SurrogateModel load(const std::string& path);

 private:
  friend struct SurrogateWorkspace;
  int width_ = 0;
  int n_blocks_ = 0;
  std::array<double, kFeatureCount> mean_{};
  std::array<double, kFeatureCount> std_{};
  std::array<std::uint8_t, kFeatureCount> const_flag_{};
  std::vector<double> params_;
};

/// Mean loss and its gradient over a sample batch; reverse-mode through the
/// network. Dropout masks are drawn from `rng` when dropout > 0 (training
/// path); pass dropout = 0 for the deterministic gradient used in checks.
double loss_and_gradient(const SurrogateModel& model,
                         const std::vector<FeatureRow>& features,
                         const std::vector<std::array<double, 4>>& targets,
                         const std::vector<int>& batch_indices, double loss_epsilon,
                         double dropout, std::uint64_t& rng_state,
                         std::vector<double>& grad_out);

struct Dataset {
  std::vector<FeatureRow> features;
  std::vector<std::array<double, 4>> targets;
  std::string provenance;
};

/// CSV header: x,y,mach,alpha,area,u0..u3,r0..r3,z0..z3. A '# provenance:'
/// comment line records the source configurations.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);
void append_run_to_dataset(Dataset& ds, const MeshHierarchy& mesh,
                           const std::vector<State4>& u, const std::vector<State4>& r,
                           const std::vector<State4>& z, const FlowConfig& cfg);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct FoldReport {
  int fold = 0;
  bool diverged = false;
  double final_val_loss = 0.0;
  std::vector<EpochStats> epochs;
};

struct TrainResult {
  SurrogateModel model;
  std::vector<FoldReport> folds;
};

/// k-fold cross-validation followed by a final fit on all rows with the same
/// epoch budget. Deterministic per config seed.
TrainResult train_surrogate(const Dataset& ds, const std::vector<int>& hidden_widths,
                            const TrainConfig& cfg);

void write_fold_report_csv(const std::vector<FoldReport>& folds, const std::string& path);

/// Independent per-element forward passes (element-parallel, deterministic).
std::vector<State4> predict_field(const SurrogateModel& model, const MeshHierarchy& mesh,
                                  const std::vector<State4>& u,
                                  const std::vector<State4>& r, const FlowConfig& cfg);

std::vector<State4> predict_rows(const SurrogateModel& model,
                                 const std::vector<FeatureRow>& rows);

namespace serial {
std::vector<State4> predict_rows(const SurrogateModel& model,
                                 const std::vector<FeatureRow>& rows);
}

}  // namespace goalfv
