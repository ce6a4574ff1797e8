#ifndef ABSATAG_TESTS_HELPERS_HPP
#define ABSATAG_TESTS_HELPERS_HPP

#include <cmath>
#include <string>
#include <vector>

#include "absatag/corpus.hpp"
#include "absatag/embeddings.hpp"
#include "absatag/model.hpp"
#include "absatag/rng.hpp"

namespace absatag::testing {

// Training-mode loss used by every finite-difference check: mean token
// cross-entropy under teacher forcing, no dropout assumed (keep = 1).
inline double forward_loss(Model& model, const Model::SentenceInput& input) {
  Tape tape;
  Rng rng(0);
  std::vector<Tape::Var> dists =
      model.forward(tape, input, Model::Mode::Training, rng);
  std::vector<Tape::Var> losses(dists.size());
  for (std::size_t i = 0; i < dists.size(); ++i)
    losses[i] = tape.cross_entropy(dists[i], static_cast<std::size_t>(input.gold[i]));
  return tape.value(tape.mean(losses)).data[0];
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
};

// Central finite differences against the analytic gradients accumulated by
// one backward pass. step == 1e-5 matches the acceptance setting.
inline GradCheckResult gradient_check(Model& model,
                                      const Model::SentenceInput& input,
                                      double step = 1e-5) {
  model.zero_grads();
  {
    Tape tape;
    Rng rng(0);
    std::vector<Tape::Var> dists =
        model.forward(tape, input, Model::Mode::Training, rng);
    std::vector<Tape::Var> losses(dists.size());
    for (std::size_t i = 0; i < dists.size(); ++i)
      losses[i] =
          tape.cross_entropy(dists[i], static_cast<std::size_t>(input.gold[i]));
    tape.backward(tape.mean(losses));
  }
  GradCheckResult result;
  for (Parameter* p : model.trainable_parameters()) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value.data[i];
      p->value.data[i] = saved + step;
      const double up = forward_loss(model, input);
      p->value.data[i] = saved - step;
      const double down = forward_loss(model, input);
      p->value.data[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double analytic = p->grad.data[i];
      const double rel = std::fabs(fd - analytic) /
                         std::max({1.0, std::fabs(fd), std::fabs(analytic)});
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

// Tiny corpus with a fixed vocabulary for model tests.
inline Sentence make_sentence(const std::vector<std::string>& words,
                              std::vector<AspectSpan> spans = {}) {
  Sentence s;
  for (const std::string& w : words) {
    if (!s.text.empty()) s.text += ' ';
    s.text += w;
  }
  s.tokens = tokenize(s.text);
  s.spans = std::move(spans);
  return s;
}

inline AspectSpan span_over(const Sentence& s, std::size_t first_token,
                            std::size_t last_token, Polarity polarity) {
  AspectSpan a;
  a.start = s.tokens[first_token].start;
  a.end = s.tokens[last_token].end;
  a.term = s.text.substr(a.start, a.end - a.start);
  a.polarity = polarity;
  return a;
}

inline Model small_model(Architecture arch, SchemeMode scheme,
                         std::span<const Sentence> corpus, std::uint64_t seed,
                         std::size_t hidden = 8, std::size_t window_radius = 1,
                         bool use_features = false) {
  ModelConfig mc;
  mc.architecture = arch;
  mc.bidirectional = arch == Architecture::BiRNN ||
                     arch == Architecture::BiLSTM ||
                     arch == Architecture::ARNN;
  mc.hidden_size = hidden;
  mc.window_radius = window_radius;
  mc.dropout_keep = 1.0;
  mc.use_features = use_features;
  mc.feature_dim = use_features ? 14 : 0;
  mc.scheme = scheme;
  Rng rng(seed);
  EmbeddingTable table = EmbeddingTable::random(corpus, 5, rng);
  return Model(mc, std::move(table), rng);
}

// Uniform random label-id sequence generator used by the property tests.
inline std::vector<int> random_labels(Rng& rng, const TagScheme& scheme,
                                      std::size_t length, double o_bias = 0.5) {
  std::vector<int> out(length);
  for (std::size_t i = 0; i < length; ++i)
    out[i] = rng.bernoulli(o_bias)
                 ? 0
                 : static_cast<int>(1 + rng.index(scheme.size() - 1));
  return out;
}

}  // namespace absatag::testing

#endif
