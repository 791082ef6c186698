#include "keyscope/training/trainer.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "keyscope/error.hpp"

namespace keyscope::training {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max epochs must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (lr_patience < 1) throw ConfigError("lr patience must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("lr decay must be in (0, 1]");
  if (snippet_frames < 1) throw ConfigError("snippet length must be >= 1 frame");
}

EarlyStopping::EarlyStopping(int patience) : patience_(patience) {
  if (patience < 1) throw ConfigError("patience must be >= 1");
}

bool EarlyStopping::observe(int epoch, double score) {
  if (best_epoch_ == 0 || score > best_score_) {
    best_epoch_ = epoch;
    best_score_ = score;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  nn::RngStream rng(nn::derive_seed(seed, static_cast<std::uint64_t>(epoch), 0x5EED));
  rng.shuffle(order.begin(), order.end());
  return order;
}

Evaluation evaluate(const models::Model& model, std::span<const LabeledPiece> pieces) {
  Evaluation ev;
  std::vector<std::pair<eval::KeyLabel, eval::KeyLabel>> pairs;
  int correct = 0;
  for (const auto& piece : pieces) {
    ev.predictions.push_back(models::predict(model, piece.spec));
    pairs.emplace_back(ev.predictions.back().key, piece.key);
    if (ev.predictions.back().key == piece.key) ++correct;
  }
  ev.score = eval::score(pairs);
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(pieces.size());
  return ev;
}

StepResult train_step(models::Model& model, nn::Sgd<float>& sgd, const Batch& batch) {
  sgd.zero_grad();
  const auto logits = model.forward(batch.input);
  const auto loss = nn::softmax_cross_entropy(logits, std::span<const int>(batch.targets));
  model.backward(loss.grad);
  sgd.step();
  model.clear_cache();
  StepResult r{loss.loss, 0};
  for (int n = 0; n < logits.shape().n; ++n) {
    int best = 0;
    for (int k = 1; k < nn::kNumClasses; ++k) {
      if (logits(n, k, 0, 0) > logits(n, best, 0, 0)) best = k;
    }
    if (best == batch.targets[static_cast<std::size_t>(n)]) ++r.correct;
  }
  return r;
}

FitResult fit(models::Model model, std::span<const LabeledPiece> train, std::span<const LabeledPiece> valid,
              const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train.empty()) throw ConfigError("training set is empty");
  if (valid.empty()) throw ConfigError("validation set is empty");
  std::set<std::string> train_ids;
  for (const auto& p : train) train_ids.insert(p.id);
  for (const auto& p : valid) {
    if (train_ids.contains(p.id)) throw ConfigError("piece '" + p.id + "' is in both training and validation sets");
  }
  const auto min = models::minimum_input(model.config());
  if (config.snippet_frames < min.frames) {
    throw ConfigError("snippet of " + std::to_string(config.snippet_frames) + " frames is below the model minimum of " +
                      std::to_string(min.frames));
  }

  model.reseed(nn::derive_seed(config.seed, 0xD509));
  nn::Sgd<float> sgd(model.parameters(), {config.learning_rate, config.momentum});
  EarlyStopping stopper(config.patience);
  int lr_stall = 0;

  FitResult result{FitReport{}, model};
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const std::vector<std::size_t> order = epoch_order(train.size(), config.seed, epoch);

    double loss_sum = 0.0;
    int correct = 0;
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size), ++batch_index) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Batch batch = make_batch(train, idx, config.snippet_frames, config.seed, static_cast<std::uint64_t>(epoch),
                                     config.augment);
      const StepResult step = train_step(model, sgd, batch);
      if (!std::isfinite(step.loss)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", batch " << batch_index << ", learning rate "
            << sgd.learning_rate();
        throw TrainingError(msg.str());
      }
      loss_sum += step.loss * static_cast<double>(idx.size());
      correct += step.correct;
    }

    const Evaluation val = evaluate(model, valid);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
    rec.val_weighted = val.score.weighted;
    rec.val_accuracy = val.accuracy;
    rec.learning_rate = sgd.learning_rate();
    result.report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (stopper.observe(epoch, val.score.weighted)) {
      result.best = model;
      lr_stall = 0;
    } else if (++lr_stall >= config.lr_patience) {
      sgd.set_learning_rate(sgd.learning_rate() * config.lr_decay);
      lr_stall = 0;
    }
    if (stopper.should_stop()) {
      result.report.early_stopped = true;
      break;
    }
  }

  result.report.best_epoch = stopper.best_epoch();
  result.report.best_val_weighted = stopper.best_score();
  result.report.train_accuracy = evaluate(result.best, train).accuracy;
  result.report.val_accuracy = evaluate(result.best, valid).accuracy;
  result.report.overfit_ratio =
      result.report.train_accuracy > 0.0 ? result.report.val_accuracy / result.report.train_accuracy : 0.0;
  return result;
}

void write_report_csv(std::ostream& out, const FitReport& report) {
  out << "epoch,train_loss,train_acc,val_weighted\n";
  out << std::setprecision(9);
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << e.train_loss << ',' << e.train_accuracy << ',' << e.val_weighted << '\n';
  }
}

void write_report_json(std::ostream& out, const FitReport& report) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : report.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"train_acc", e.train_accuracy},
                      {"val_weighted", e.val_weighted},
                      {"val_acc", e.val_accuracy},
                      {"learning_rate", e.learning_rate}});
  }
  const nlohmann::json j = {{"best_epoch", report.best_epoch},
                            {"best_val_weighted", report.best_val_weighted},
                            {"train_accuracy", report.train_accuracy},
                            {"val_accuracy", report.val_accuracy},
                            {"overfit_ratio", report.overfit_ratio},
                            {"early_stopped", report.early_stopped},
                            {"epochs_run", report.epochs.size()},
                            {"epochs", epochs}};
  out << j.dump(2) << '\n';
}

}  // namespace keyscope::training
