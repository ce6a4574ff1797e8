#include "absatag/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace absatag {

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw std::invalid_argument("learning rate must be positive");
  if (decay_ratio <= 0.0 || decay_ratio > 1.0)
    throw std::invalid_argument("decay ratio must be in (0, 1]");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (max_len == 0) throw std::invalid_argument("max length must be positive");
  if (max_epochs == 0 && max_steps == 0)
    throw std::invalid_argument("either an epoch or a step budget is required");
  if (clip_norm < 0.0) throw std::invalid_argument("clip norm must be >= 0");
}

BatchPlan make_batches(std::span<const Sentence> sentences, const Model& model,
                       const TagScheme& scheme, const TrainConfig& config) {
  BatchPlan plan;
  for (std::size_t at = 0; at < sentences.size(); at += config.batch_size) {
    const std::size_t count = std::min(config.batch_size, sentences.size() - at);
    Batch batch;
    std::size_t longest = 0;
    std::vector<Model::SentenceInput> inputs(count);
    for (std::size_t b = 0; b < count; ++b) {
      const Sentence& s = sentences[at + b];
      EncodeResult enc = encode_tags(s, scheme);
      plan.snapped += enc.snapped;
      inputs[b] = model.encode_input(s, enc.labels);
      if (inputs[b].rows.size() > config.max_len) {
        ++plan.truncated;
        inputs[b].rows.resize(config.max_len);
        inputs[b].gold.resize(config.max_len);
        if (!inputs[b].features.empty()) inputs[b].features.resize(config.max_len);
      }
      longest = std::max(longest, inputs[b].rows.size());
    }
    const std::size_t feat_dim = model.config().feature_dim;
    for (std::size_t b = 0; b < count; ++b) {
      const std::size_t n = inputs[b].rows.size();
      std::vector<std::size_t> rows(longest, EmbeddingTable::kPadRow);
      std::vector<int> gold(longest, 0);
      std::vector<double> mask(longest, 0.0);
      std::vector<std::vector<double>> feats;
      if (model.config().use_features)
        feats.assign(longest, std::vector<double>(feat_dim, 0.0));
      for (std::size_t i = 0; i < n; ++i) {
        rows[i] = inputs[b].rows[i];
        gold[i] = inputs[b].gold[i];
        mask[i] = 1.0;
        if (!feats.empty()) feats[i] = inputs[b].features[i];
      }
      batch.token_rows.push_back(std::move(rows));
      batch.gold.push_back(std::move(gold));
      batch.mask.push_back(std::move(mask));
      if (model.config().use_features) batch.features.push_back(std::move(feats));
      batch.embed_scale.push_back(inputs[b].embed_scale);
      batch.length.push_back(n);
    }
    plan.batches.push_back(std::move(batch));
  }
  return plan;
}

namespace {

Model::SentenceInput unpack(const Batch& batch, std::size_t b, bool features) {
  Model::SentenceInput in;
  const std::size_t n = batch.length[b];
  in.rows.assign(batch.token_rows[b].begin(), batch.token_rows[b].begin() + n);
  in.gold.assign(batch.gold[b].begin(), batch.gold[b].begin() + n);
  if (features) {
    in.features.assign(batch.features[b].begin(), batch.features[b].begin() + n);
  }
  in.embed_scale = batch.embed_scale[b];
  return in;
}

double global_grad_norm(const std::vector<Parameter*>& params) {
  double sq = 0.0;
  for (const Parameter* p : params)
    for (double g : p->grad.data) sq += g * g;
  return std::sqrt(sq);
}

}  // namespace

double accumulate_batch_gradients(Model& model, const Batch& batch, Rng& rng) {
  const std::size_t total_tokens =
      std::accumulate(batch.length.begin(), batch.length.end(), std::size_t{0});
  if (total_tokens == 0) return 0.0;
  double loss_sum = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    Model::SentenceInput in = unpack(batch, b, model.config().use_features);
    if (in.rows.empty()) continue;
    Tape tape;
    std::vector<Tape::Var> dists =
        model.forward(tape, in, Model::Mode::Training, rng);
    std::vector<Tape::Var> losses(dists.size());
    for (std::size_t i = 0; i < dists.size(); ++i)
      losses[i] = tape.cross_entropy(dists[i],
                                     static_cast<std::size_t>(in.gold[i]));
    Tape::Var total = losses[0];
    for (std::size_t i = 1; i < losses.size(); ++i)
      total = tape.add(total, losses[i]);
    // the batch loss is the mean over real tokens across the whole batch
    Tape::Var scaled = tape.scale(total, 1.0 / static_cast<double>(total_tokens));
    tape.backward(scaled);
    loss_sum += tape.value(scaled).data[0];
  }
  return loss_sum;
}

EvalReport evaluate_model(Model& model, std::span<const Sentence> sentences) {
  const TagScheme scheme(model.config().scheme);
  std::vector<std::vector<int>> gold(sentences.size()), pred(sentences.size());
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    gold[s] = encode_tags(sentences[s], scheme).labels;
    pred[s] = model.predict(sentences[s]);
  }
  return evaluate(gold, pred, scheme);
}

TrainResult train(Model& model, std::span<const Sentence> train_set,
                  std::span<const Sentence> validation_set,
                  const TrainConfig& config, const ProgressFn& progress) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  const TagScheme scheme(model.config().scheme);
  BatchPlan plan = make_batches(train_set, model, scheme, config);

  TrainResult result;
  result.truncated = plan.truncated;
  Rng rng(config.seed);
  std::vector<Parameter*> params = model.trainable_parameters();

  double lr = config.learning_rate;
  double best_f1 = -1.0;
  std::size_t best_step = 0;
  std::optional<Model> best_snapshot;
  bool stop = false;

  const auto validate_now = [&](std::size_t step, std::size_t epoch,
                                double loss) {
    TrainStepRecord rec{step, epoch, lr, loss, std::nullopt};
    if (!validation_set.empty()) {
      const EvalReport report = evaluate_model(model, validation_set);
      rec.val_f1 = report.joint.f1;
      if (report.joint.f1 > best_f1) {
        best_f1 = report.joint.f1;
        best_step = step;
        best_snapshot = model.clone();
      } else if (config.patience_steps > 0 &&
                 step - best_step >= config.patience_steps) {
        result.early_stopped = true;
        stop = true;
      }
    }
    result.history.push_back(rec);
    if (progress) progress(rec);
  };

  std::size_t step = 0;
  std::size_t epoch = 0;
  for (; (config.max_epochs == 0 || epoch < config.max_epochs) && !stop; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t epoch_batches = 0;
    for (const Batch& batch : plan.batches) {
      model.zero_grads();
      const double loss = accumulate_batch_gradients(model, batch, rng);
      if (config.clip_norm > 0.0) {
        const double norm = global_grad_norm(params);
        if (norm > config.clip_norm) {
          const double shrink = config.clip_norm / norm;
          for (Parameter* p : params)
            for (double& g : p->grad.data) g *= shrink;
        }
      }
      for (Parameter* p : params)
        for (std::size_t i = 0; i < p->value.size(); ++i)
          p->value.data[i] -= lr * p->grad.data[i];
      ++step;
      epoch_loss += loss;
      ++epoch_batches;
      if (config.eval_every_steps > 0 && step % config.eval_every_steps == 0)
        validate_now(step, epoch, loss);
      if (config.max_steps > 0 && step >= config.max_steps) stop = true;
      if (stop) break;
    }
    if (!stop && config.eval_every_steps == 0)
      validate_now(step, epoch,
                   epoch_batches ? epoch_loss / static_cast<double>(epoch_batches)
                                 : 0.0);
    lr *= config.decay_ratio;
  }

  if (best_snapshot) {
    model = std::move(*best_snapshot);
    result.best_f1 = best_f1;
    result.best_step = best_step;
  } else {
    result.best_step = step;
  }
  result.steps = step;
  result.epochs = epoch;
  return result;
}

std::vector<Fold> kfold_split(std::size_t dataset_size, std::size_t k,
                              double val_fraction, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold: k must be at least 2");
  if (k > dataset_size)
    throw std::invalid_argument("kfold: k = " + std::to_string(k) +
                                " exceeds dataset size " +
                                std::to_string(dataset_size));
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw std::invalid_argument("kfold: validation fraction must be in [0, 1)");

  std::vector<std::size_t> order(dataset_size);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = dataset_size; i > 1; --i)
    std::swap(order[i - 1], order[rng.index(i)]);

  std::vector<Fold> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t lo = f * dataset_size / k;
    const std::size_t hi = (f + 1) * dataset_size / k;
    Fold& fold = folds[f];
    fold.test.assign(order.begin() + lo, order.begin() + hi);
    std::vector<std::size_t> dev;
    dev.insert(dev.end(), order.begin(), order.begin() + lo);
    dev.insert(dev.end(), order.begin() + hi, order.end());
    std::size_t val_n = static_cast<std::size_t>(
        std::llround(val_fraction * static_cast<double>(dev.size())));
    if (val_fraction > 0.0 && !dev.empty())
      val_n = std::clamp<std::size_t>(val_n, 1, dev.size() - 1);
    fold.validation.assign(dev.begin(), dev.begin() + val_n);
    fold.train.assign(dev.begin() + val_n, dev.end());
  }
  return folds;
}

}  // namespace absatag
