#include "absatag/adaptation.hpp"

#include <stdexcept>

#include "absatag/rng.hpp"

namespace absatag {

namespace {

bool has_sentiment(std::span<const Sentence> corpus) {
  for (const Sentence& s : corpus)
    for (const AspectSpan& a : s.spans)
      if (a.polarity != Polarity::None) return true;
  return false;
}

bool has_spans(std::span<const Sentence> corpus) {
  for (const Sentence& s : corpus)
    if (!s.spans.empty()) return true;
  return false;
}

}  // namespace

std::vector<Sentence> weighted_union(std::span<const Sentence> src,
                                     std::span<const Sentence> tgt, double w,
                                     std::uint64_t seed) {
  if (w <= 0.0 || w > 1.0)
    throw std::invalid_argument("weighted_union: weight must be in (0, 1], got " +
                                std::to_string(w));
  if (has_spans(src) && has_spans(tgt) &&
      has_sentiment(src) != has_sentiment(tgt))
    throw std::invalid_argument(
        "weighted_union: corpora use different tag schemes (one carries "
        "sentiment annotations, the other does not)");
  std::vector<Sentence> out;
  out.reserve(src.size() + tgt.size());
  for (const Sentence& s : tgt) out.push_back(s);
  for (const Sentence& s : src) {
    Sentence flagged = s;
    flagged.embed_scale = w;
    flagged.from_source_domain = true;
    out.push_back(std::move(flagged));
  }
  Rng rng(seed);
  for (std::size_t i = out.size(); i > 1; --i)
    std::swap(out[i - 1], out[rng.index(i)]);
  return out;
}

std::vector<Sentence> pred_augment(Model& src_model,
                                   std::span<const Sentence> tgt) {
  if (src_model.config().scheme != SchemeMode::AE)
    throw std::invalid_argument(
        "pred_augment: the source model must be trained in AE mode");
  const TagScheme scheme(SchemeMode::AE);
  std::vector<Sentence> out;
  out.reserve(tgt.size());
  for (const Sentence& s : tgt) {
    Sentence augmented = s;
    const std::vector<int> predicted = src_model.predict(s);
    for (std::size_t i = 0; i < augmented.tokens.size(); ++i)
      augmented.tokens[i].pred_iob = scheme.label(predicted[i]);
    out.push_back(std::move(augmented));
  }
  return out;
}

}  // namespace absatag
