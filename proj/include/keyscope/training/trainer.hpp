#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "keyscope/eval/relation.hpp"
#include "keyscope/models/network.hpp"
#include "keyscope/nn/sgd.hpp"
#include "keyscope/training/snippet.hpp"

namespace keyscope::training {

struct TrainConfig {
  int batch_size = 32;
  int max_epochs = 500;
  /// Epochs without a validation improvement before training stops.
  int patience = 20;
  double learning_rate = 0.01;
  double momentum = 0.9;
  /// Epochs without improvement before the learning rate is multiplied by lr_decay.
  int lr_patience = 5;
  double lr_decay = 0.5;
  int snippet_frames = kSnippetFrames;
  AugmentConfig augment;
  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;
};

/// Tracks the best validation score; a score only counts as an improvement if
/// it is strictly greater than the best so far.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);

  /// Records the score of `epoch` (1-based); returns true if it is a new best.
  bool observe(int epoch, double score);
  bool should_stop() const { return since_best_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_score() const { return best_score_; }
  int epochs_since_best() const { return since_best_; }

 private:
  int patience_;
  int best_epoch_ = 0;
  double best_score_ = 0.0;
  int since_best_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;  // on the augmented snippet batches of the epoch
  double val_weighted = 0.0;
  double val_accuracy = 0.0;
  double learning_rate = 0.0;
};

struct FitReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_weighted = 0.0;
  /// Full-piece inference accuracies of the selected model.
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double overfit_ratio = 0.0;  // val_accuracy / train_accuracy
  bool early_stopped = false;
};

struct Evaluation {
  eval::ScoreBreakdown score;
  double accuracy = 0.0;
  std::vector<models::Prediction> predictions;
};

/// Visiting order of the training pieces in `epoch`: a seeded permutation of 0..n-1.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch);

/// Whole-piece inference over `pieces`.
Evaluation evaluate(const models::Model& model, std::span<const LabeledPiece> pieces);

struct FitResult {
  FitReport report;
  models::Model best;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Snippet-based training with validation-score model selection.
/// Throws TrainingError with epoch, batch and learning rate if the loss becomes non-finite.
FitResult fit(models::Model model, std::span<const LabeledPiece> train, std::span<const LabeledPiece> valid,
              const TrainConfig& config, const EpochCallback& on_epoch = {});

/// One SGD update on a batch; returns the mean loss and the number of correct argmax predictions.
struct StepResult {
  double loss = 0.0;
  int correct = 0;
};
StepResult train_step(models::Model& model, nn::Sgd<float>& sgd, const Batch& batch);

/// epoch,train_loss,train_acc,val_weighted
void write_report_csv(std::ostream& out, const FitReport& report);
void write_report_json(std::ostream& out, const FitReport& report);

}  // namespace keyscope::training
