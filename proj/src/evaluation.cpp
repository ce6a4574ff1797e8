#include "absatag/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace absatag {

namespace {

void finish(PrfScores& s) {
  if (s.predicted > 0)
    s.precision = 100.0 * static_cast<double>(s.correct) /
                  static_cast<double>(s.predicted);
  if (s.gold > 0)
    s.recall = 100.0 * static_cast<double>(s.correct) /
               static_cast<double>(s.gold);
  if (s.precision + s.recall > 0.0)
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
}

bool same_boundaries(const IobChunk& a, const IobChunk& b) {
  return a.begin == b.begin && a.end == b.end;
}

}  // namespace

PrfScores conlleval_f1(std::span<const std::vector<std::string>> gold,
                       std::span<const std::vector<std::string>> predicted) {
  if (gold.size() != predicted.size())
    throw std::invalid_argument("conlleval_f1: sentence count mismatch");
  PrfScores scores;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != predicted[s].size())
      throw std::invalid_argument("conlleval_f1: sentence " + std::to_string(s) +
                                  ": " + std::to_string(gold[s].size()) +
                                  " gold vs " + std::to_string(predicted[s].size()) +
                                  " predicted labels");
    const std::vector<IobChunk> g = iob_chunks(gold[s]);
    const std::vector<IobChunk> p = iob_chunks(predicted[s]);
    scores.gold += g.size();
    scores.predicted += p.size();
    for (const IobChunk& pc : p)
      for (const IobChunk& gc : g)
        if (same_boundaries(pc, gc) && pc.type == gc.type) {
          ++scores.correct;
          break;
        }
  }
  finish(scores);
  return scores;
}

DecoupleResult decouple(std::span<const std::string> joint_labels) {
  DecoupleResult res;
  res.ae_labels.reserve(joint_labels.size());
  for (const std::string& l : joint_labels)
    res.ae_labels.push_back(strip_sentiment(l));
  for (std::size_t i = 1; i < joint_labels.size(); ++i) {
    const std::string& l = joint_labels[i];
    if (l.empty() || l[0] != 'I') continue;
    const char prev = joint_labels[i - 1][0];
    if ((prev == 'B' || prev == 'I') &&
        label_polarity(l) != label_polarity(joint_labels[i - 1]))
      ++res.disagreements;
  }
  for (const IobChunk& c : iob_chunks(joint_labels)) {
    AspectSpan span;
    span.start = c.begin;  // token-index coordinates
    span.end = c.end;
    span.polarity = label_polarity(joint_labels[c.begin]);
    res.spans.push_back(std::move(span));
  }
  return res;
}

const PrfScores& ClassScores::of(Polarity p) const {
  switch (p) {
    case Polarity::Positive: return positive;
    case Polarity::Negative: return negative;
    default: return neutral;
  }
}

ClassScores sentiment_class_f1(
    std::span<const std::vector<AspectSpan>> gold,
    std::span<const std::vector<AspectSpan>> predicted) {
  if (gold.size() != predicted.size())
    throw std::invalid_argument("sentiment_class_f1: sentence count mismatch");
  ClassScores out;
  const auto slot = [&out](Polarity p) -> PrfScores& {
    switch (p) {
      case Polarity::Positive: return out.positive;
      case Polarity::Negative: return out.negative;
      default: return out.neutral;
    }
  };
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (const AspectSpan& g : gold[s]) ++slot(g.polarity).gold;
    for (const AspectSpan& p : predicted[s]) {
      ++slot(p.polarity).predicted;
      for (const AspectSpan& g : gold[s])
        if (g.start == p.start && g.end == p.end && g.polarity == p.polarity) {
          ++slot(p.polarity).correct;
          break;
        }
    }
  }
  finish(out.positive);
  finish(out.negative);
  finish(out.neutral);
  return out;
}

EvalReport evaluate(std::span<const std::vector<int>> gold,
                    std::span<const std::vector<int>> predicted,
                    const TagScheme& scheme) {
  if (gold.size() != predicted.size())
    throw std::invalid_argument("evaluate: sentence count mismatch");
  EvalReport report;
  std::vector<std::vector<AspectSpan>> gold_spans(gold.size());
  std::vector<std::vector<AspectSpan>> pred_spans(gold.size());
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != predicted[s].size())
      throw std::invalid_argument("evaluate: sentence " + std::to_string(s) +
                                  ": label count mismatch");
    std::vector<std::string> gl, pl;
    for (int id : gold[s]) gl.push_back(scheme.label(id));
    for (int id : predicted[s]) pl.push_back(scheme.label(id));
    const std::vector<IobChunk> gc = iob_chunks(gl);
    const std::vector<IobChunk> pc = iob_chunks(pl);
    report.joint.gold += gc.size();
    report.joint.predicted += pc.size();
    report.single.gold += gc.size();
    report.single.predicted += pc.size();
    for (const IobChunk& p : pc) {
      for (const IobChunk& g : gc)
        if (same_boundaries(p, g)) {
          ++report.single.correct;
          if (p.type == g.type) ++report.joint.correct;
          break;
        }
    }
    if (scheme.mode() == SchemeMode::AESC) {
      DecoupleResult dg = decouple(gl);
      DecoupleResult dp = decouple(pl);
      report.decode_disagreements += dp.disagreements;
      gold_spans[s] = std::move(dg.spans);
      pred_spans[s] = std::move(dp.spans);
    }
  }
  finish(report.joint);
  finish(report.single);
  if (scheme.mode() == SchemeMode::AESC)
    report.sentiment = sentiment_class_f1(gold_spans, pred_spans);
  return report;
}

namespace {

nlohmann::json prf_json(const PrfScores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
          {"gold", s.gold},           {"predicted", s.predicted},
          {"correct", s.correct}};
}

}  // namespace

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["joint"] = prf_json(joint);
  j["single"] = prf_json(single);
  j["sentiment"] = {{"positive", prf_json(sentiment.positive)},
                    {"negative", prf_json(sentiment.negative)},
                    {"neutral", prf_json(sentiment.neutral)}};
  j["decode_disagreements"] = decode_disagreements;
  return j.dump(2);
}

std::string EvalReport::to_table() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "          Tagging F1          Classification F1\n"
                "      single     joint        +        -        0\n"
                "      %6.2f    %6.2f   %6.2f   %6.2f   %6.2f\n",
                single.f1, joint.f1, sentiment.positive.f1,
                sentiment.negative.f1, sentiment.neutral.f1);
  return buf;
}

// --- Welch's t-test -----------------------------------------------------------

namespace {

// Continued-fraction evaluation of the incomplete beta (Lentz).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

SignificanceResult ttest_two_sided(std::span<const double> a,
                                   std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("ttest: each sample needs at least 2 values");
  const auto stats = [](std::span<const double> xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
    return std::pair{mean, var};
  };
  const auto [ma, va] = stats(a);
  const auto [mb, vb] = stats(b);
  const double sa = va / static_cast<double>(a.size());
  const double sb = vb / static_cast<double>(b.size());

  SignificanceResult res;
  if (sa + sb == 0.0) {
    // no spread at all: identical means are indistinguishable, different
    // means are trivially distinct
    res.degenerate = true;
    res.df = static_cast<double>(a.size() + b.size() - 2);
    res.p = (ma == mb) ? 1.0 : 0.0;
    res.t = (ma == mb) ? 0.0 : std::numeric_limits<double>::infinity();
    if (ma < mb) res.t = -res.t;
    return res;
  }
  res.t = (ma - mb) / std::sqrt(sa + sb);
  const double na1 = static_cast<double>(a.size() - 1);
  const double nb1 = static_cast<double>(b.size() - 1);
  res.df = (sa + sb) * (sa + sb) / (sa * sa / na1 + sb * sb / nb1);
  res.p = incomplete_beta(res.df / 2.0, 0.5,
                          res.df / (res.df + res.t * res.t));
  return res;
}

}  // namespace absatag
