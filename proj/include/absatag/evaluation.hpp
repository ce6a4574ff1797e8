#ifndef ABSATAG_EVALUATION_HPP
#define ABSATAG_EVALUATION_HPP

#include <map>
#include <span>
#include <string>
#include <vector>

#include "absatag/corpus.hpp"

namespace absatag {

struct PrfScores {
  double precision = 0.0;  // percentages, conlleval convention
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
};

// Phrase-level scoring with exactly the conlleval chunk rules; phrase types
// are compared as-is, so AESC labels score jointly.
PrfScores conlleval_f1(std::span<const std::vector<std::string>> gold,
                       std::span<const std::vector<std::string>> predicted);

struct DecoupleResult {
  std::vector<std::string> ae_labels;  // sentiment-stripped projection
  std::vector<AspectSpan> spans;       // token-index spans with polarity
  int disagreements = 0;
};

// Splits joint AESC labels into the AE tag sequence and per-span sentiment.
// Spans here use token indices (start = first token, end = one past last).
DecoupleResult decouple(std::span<const std::string> joint_labels);

struct ClassScores {
  PrfScores positive, negative, neutral;
  const PrfScores& of(Polarity p) const;
};

// Exact-boundary span matching per sentiment class; spans must use a common
// coordinate space for gold and predicted (token indices or char offsets).
ClassScores sentiment_class_f1(
    std::span<const std::vector<AspectSpan>> gold,
    std::span<const std::vector<AspectSpan>> predicted);

struct EvalReport {
  PrfScores joint;    // collapsed-tag scoring (equals `single` in AE mode)
  PrfScores single;   // boundaries only, sentiment ignored
  ClassScores sentiment;
  int decode_disagreements = 0;

  std::string to_json() const;
  std::string to_table() const;  // single/joint + - 0 layout
};

// Full report over per-sentence label-id sequences.
EvalReport evaluate(std::span<const std::vector<int>> gold,
                    std::span<const std::vector<int>> predicted,
                    const TagScheme& scheme);

struct SignificanceResult {
  double t = 0.0;
  double df = 0.0;
  double p = 0.0;
  bool degenerate = false;  // zero variance in both samples
};

// Welch's unequal-variance two-sided t-test.
SignificanceResult ttest_two_sided(std::span<const double> a,
                                   std::span<const double> b);

// Regularized incomplete beta I_x(a, b); exposed for the statistics tests.
double incomplete_beta(double a, double b, double x);

}  // namespace absatag

#endif
