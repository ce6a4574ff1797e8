#ifndef ABSATAG_TRAINING_HPP
#define ABSATAG_TRAINING_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absatag/corpus.hpp"
#include "absatag/evaluation.hpp"
#include "absatag/model.hpp"

namespace absatag {

struct TrainConfig {
  double learning_rate = 0.01;
  double decay_ratio = 0.9;     // per-epoch exponential decay
  std::size_t batch_size = 16;  // 1 = per-sentence (baseline regime)
  std::size_t max_len = 200;    // longer sentences are truncated with a warning
  std::size_t max_epochs = 5;
  std::size_t max_steps = 0;         // 0 = bounded by epochs only
  std::size_t patience_steps = 0;    // 0 = no early stopping
  std::size_t eval_every_steps = 0;  // 0 = validate once per epoch
  double clip_norm = 5.0;            // global-norm gradient clip; 0 disables
  std::uint64_t seed = 1;

  void validate() const;
};

// Padded mini-batch; every matrix shares the [batch][max_len] layout and the
// mask is zero exactly on padding.
struct Batch {
  std::vector<std::vector<std::size_t>> token_rows;
  std::vector<std::vector<int>> gold;
  std::vector<std::vector<std::vector<double>>> features;
  std::vector<std::vector<double>> mask;
  std::vector<double> embed_scale;
  std::vector<std::size_t> length;  // real (capped) token counts

  std::size_t size() const { return token_rows.size(); }
  std::size_t padded_len() const {
    return token_rows.empty() ? 0 : token_rows[0].size();
  }
};

struct BatchPlan {
  std::vector<Batch> batches;
  int truncated = 0;  // sentences cut at max_len
  int snapped = 0;    // span boundaries widened during tag encoding
};

// Sentences are bucketed in corpus order; each batch pads to its own max
// length, capped at config.max_len.
BatchPlan make_batches(std::span<const Sentence> sentences, const Model& model,
                       const TagScheme& scheme, const TrainConfig& config);

struct TrainStepRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  std::optional<double> val_f1;
};

struct TrainResult {
  double best_f1 = 0.0;
  std::size_t best_step = 0;
  std::size_t steps = 0;
  std::size_t epochs = 0;
  bool early_stopped = false;
  std::vector<TrainStepRecord> history;
  int truncated = 0;
};

using ProgressFn = std::function<void(const TrainStepRecord&)>;

// Mini-batch SGD with per-epoch lr decay and F1 early stopping. The model is
// left holding the best-validation-F1 weights (the final weights when no
// validation set is given).
TrainResult train(Model& model, std::span<const Sentence> train_set,
                  std::span<const Sentence> validation_set,
                  const TrainConfig& config, const ProgressFn& progress = {});

// Joint conlleval F1 of model predictions against encoded gold tags.
EvalReport evaluate_model(Model& model, std::span<const Sentence> sentences);

// One gradient accumulation over a batch without updating; returns the
// masked mean loss. Exposed for the padding/weighting equivalence tests.
double accumulate_batch_gradients(Model& model, const Batch& batch, Rng& rng);

struct Fold {
  std::vector<std::size_t> train, validation, test;
};

// Shuffles once with the seed, splits k contiguous test shards, then takes
// val_fraction of each remaining development part as validation.
std::vector<Fold> kfold_split(std::size_t dataset_size, std::size_t k,
                              double val_fraction, std::uint64_t seed);

}  // namespace absatag

#endif
