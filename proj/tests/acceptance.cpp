// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Run from anywhere; bundled data is located via ABSATAG_SOURCE_DIR.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "absatag/adaptation.hpp"
#include "absatag/corpus.hpp"
#include "absatag/evaluation.hpp"
#include "absatag/model.hpp"
#include "absatag/training.hpp"
#include "helpers.hpp"

using namespace absatag;
using namespace absatag::testing;
using nlohmann::json;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, double seconds,
            const std::string& detail) {
  std::printf("[%s] %2d %-28s (%.2fs) %s\n", ok ? "PASS" : "FAIL", id, name,
              seconds, detail.c_str());
  if (!ok) ++failures;
}

void run(int id, const char* name, double budget_s,
         const std::function<std::pair<bool, std::string>()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string detail;
  try {
    std::tie(ok, detail) = body();
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (ok && budget_s > 0 && secs > budget_s) {
    ok = false;
    detail += " [over the " + std::to_string(budget_s) + "s budget]";
  }
  report(id, name, ok, secs, detail);
}

std::string source_dir() { return ABSATAG_SOURCE_DIR; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// ---- 1: gradient correctness ------------------------------------------------

std::pair<bool, std::string> criterion_gradients() {
  Rng rng(1404);
  std::vector<std::string> words;
  for (int i = 0; i < 5; ++i) words.push_back("tok" + std::to_string(rng.index(9)));
  Sentence sentence = make_sentence(words);
  sentence.spans = {span_over(sentence, 1, 2, Polarity::Negative)};
  const std::vector<Sentence> corpus{sentence};

  double worst = 0.0;
  std::string worst_at;
  for (const Architecture arch :
       {Architecture::RNN, Architecture::JRNN, Architecture::LSTM,
        Architecture::BiRNN, Architecture::BiLSTM, Architecture::ARNN}) {
    for (const SchemeMode scheme : {SchemeMode::AE, SchemeMode::AESC}) {
      Model model = small_model(arch, scheme, corpus, 1405, 8, 1);
      const TagScheme tags(scheme);
      const Model::SentenceInput in =
          model.encode_input(sentence, encode_tags(sentence, tags).labels);
      const GradCheckResult res = gradient_check(model, in, 1e-5);
      if (res.max_rel_error > worst) {
        worst = res.max_rel_error;
        worst_at = to_string(arch) + "/" +
                   (scheme == SchemeMode::AE ? "ae" : "aesc") + " " +
                   res.worst_param;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "max rel err %.2e at %s", worst,
                worst_at.c_str());
  return {worst < 1e-4, buf};
}

// ---- 2: conlleval golden equivalence -----------------------------------------

std::pair<bool, std::string> criterion_conlleval() {
  std::ifstream in(source_dir() + "/tests/golden/conlleval_cases.jsonl");
  if (!in) return {false, "golden file missing"};
  std::string line;
  int cases = 0, mismatches = 0;
  std::string first_bad;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const auto gold = j.at("gold").get<std::vector<std::vector<std::string>>>();
    const auto pred = j.at("pred").get<std::vector<std::vector<std::string>>>();
    const PrfScores s = conlleval_f1(gold, pred);
    const bool ok = fmt2(s.precision) == j.at("precision").get<std::string>() &&
                    fmt2(s.recall) == j.at("recall").get<std::string>() &&
                    fmt2(s.f1) == j.at("f1").get<std::string>();
    if (!ok && first_bad.empty())
      first_bad = j.at("case").get<std::string>() + ": got " +
                  fmt2(s.precision) + "/" + fmt2(s.recall) + "/" + fmt2(s.f1) +
                  " want " + j.at("precision").get<std::string>() + "/" +
                  j.at("recall").get<std::string>() + "/" +
                  j.at("f1").get<std::string>();
    mismatches += ok ? 0 : 1;
    ++cases;
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d cases, %d mismatches %s", cases,
                mismatches, first_bad.c_str());
  return {cases == 100 && mismatches == 0, buf};
}

// ---- 3: overfit sanity --------------------------------------------------------

std::pair<bool, std::string> criterion_overfit() {
  const std::vector<Sentence> corpus =
      read_canonical(source_dir() + "/data/synthetic20.jsonl");
  std::string detail;

  const auto fit = [&](Architecture arch, SchemeMode scheme,
                       std::size_t max_epochs) {
    ModelConfig mc;
    mc.architecture = arch;
    mc.bidirectional =
        arch == Architecture::ARNN || arch == Architecture::BiRNN ||
        arch == Architecture::BiLSTM;
    mc.hidden_size = 32;
    mc.window_radius = arch == Architecture::ARNN || mc.bidirectional ? 0 : 1;
    mc.dropout_keep = 1.0;
    mc.scheme = scheme;
    Rng rng(7);
    Model model(mc, EmbeddingTable::random(corpus, 50, rng), rng);
    TrainConfig tc;
    tc.learning_rate = 0.5;
    tc.decay_ratio = 1.0;
    tc.batch_size = arch == Architecture::ARNN ? 16 : 1;
    tc.max_epochs = max_epochs;
    tc.seed = 7;
    train(model, corpus, {}, tc);
    return evaluate_model(model, corpus);
  };

  const EvalReport arnn = fit(Architecture::ARNN, SchemeMode::AESC, 300);
  bool ok = fmt2(arnn.joint.f1) == "100.00";
  detail += "arnn joint " + fmt2(arnn.joint.f1);
  for (const Architecture arch :
       {Architecture::RNN, Architecture::JRNN, Architecture::LSTM,
        Architecture::BiRNN, Architecture::BiLSTM}) {
    const EvalReport rep = fit(arch, SchemeMode::AE, 100);
    ok = ok && fmt2(rep.single.f1) == "100.00";
    detail += " " + to_string(arch) + " " + fmt2(rep.single.f1);
  }
  return {ok, detail};
}

// ---- 4: tag-scheme round trip --------------------------------------------------

std::pair<bool, std::string> criterion_roundtrip() {
  Rng rng(1407);
  const TagScheme aesc(SchemeMode::AESC);
  const TagScheme ae(SchemeMode::AE);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.index(16);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < n; ++i)
      words.push_back("w" + std::to_string(rng.index(30)));
    Sentence s = make_sentence(words);
    std::size_t at = 0;
    while (at < n) {
      if (rng.bernoulli(0.35)) {
        const std::size_t len = 1 + rng.index(std::min<std::size_t>(3, n - at));
        const Polarity pol = std::array{Polarity::Positive, Polarity::Negative,
                                        Polarity::Neutral}[rng.index(3)];
        s.spans.push_back(span_over(s, at, at + len - 1, pol));
        at += len + 1;
      } else {
        ++at;
      }
    }
    const EncodeResult joint = encode_tags(s, aesc);
    const DecodeResult dec = decode_tags(joint.labels, s.tokens, aesc, s.text);
    if (dec.spans.size() != s.spans.size())
      return {false, "span count changed on trial " + std::to_string(trial)};
    for (std::size_t i = 0; i < s.spans.size(); ++i)
      if (dec.spans[i].start != s.spans[i].start ||
          dec.spans[i].end != s.spans[i].end ||
          dec.spans[i].polarity != s.spans[i].polarity)
        return {false, "span mismatch on trial " + std::to_string(trial)};
    const EncodeResult simple = encode_tags(s, ae);
    for (std::size_t t = 0; t < n; ++t)
      if (strip_sentiment(aesc.label(joint.labels[t])) !=
          ae.label(simple.labels[t]))
        return {false, "projection mismatch on trial " + std::to_string(trial)};
  }
  return {true, "1000 randomized sentences"};
}

// ---- 5: attention normalization ------------------------------------------------

std::pair<bool, std::string> criterion_attention() {
  Rng rng(1408);
  double worst_sum = 0.0, worst_mean = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + rng.index(7);
    const std::size_t n = 1 + rng.index(12);
    AttentionParams params;
    params.w_alpha = Parameter("w_alpha", Tensor({d, 2 * d}));
    params.v = Parameter("v", Tensor({d}));
    for (double& v : params.w_alpha.value.data) v = rng.uniform(-2, 2);
    for (double& v : params.v.value.data) v = rng.uniform(-2, 2);

    Tape tape;
    std::vector<Tape::Var> states;
    for (std::size_t j = 0; j < n; ++j) {
      Tensor h({d});
      for (double& v : h.data) v = rng.uniform(-3, 3);
      states.push_back(tape.input(h));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Tensor& alpha =
          tape.value(attention_scores(tape, params, states[i], states));
      double sum = 0.0;
      for (double a : alpha.data) sum += a;
      worst_sum = std::max(worst_sum, std::fabs(sum - 1.0));
    }

    // v = 0 turns the context vector into the plain mean of hidden states
    params.v.value.fill(0.0);
    const Tape::Var alpha0 = attention_scores(tape, params, states[0], states);
    const Tensor& t0 = tape.value(context_vector(tape, alpha0, states));
    for (std::size_t c = 0; c < d; ++c) {
      double mean = 0.0;
      for (std::size_t j = 0; j < n; ++j) mean += tape.value(states[j]).data[c];
      mean /= static_cast<double>(n);
      worst_mean = std::max(worst_mean, std::fabs(t0.data[c] - mean));
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |sum-1| %.1e, max |t - mean| %.1e",
                worst_sum, worst_mean);
  return {worst_sum < 1e-9 && worst_mean < 1e-12, buf};
}

// ---- 6: WEIGHTED neutrality ------------------------------------------------------

std::pair<bool, std::string> criterion_weighted() {
  std::vector<Sentence> src, tgt;
  {
    Sentence a = make_sentence({"solid", "keyboard", "overall"});
    a.spans = {span_over(a, 1, 1, Polarity::Positive)};
    src.push_back(a);
    Sentence b = make_sentence({"laggy", "touchpad", "though"});
    b.spans = {span_over(b, 1, 1, Polarity::Negative)};
    src.push_back(b);
    Sentence c = make_sentence({"the", "camera", "rocks"});
    c.spans = {span_over(c, 1, 1, Polarity::Positive)};
    tgt.push_back(c);
    Sentence d = make_sentence({"screen", "is", "meh"});
    d.spans = {span_over(d, 0, 0, Polarity::Neutral)};
    tgt.push_back(d);
  }

  // w = 1: bitwise-identical gradients against the unflagged union
  const std::vector<Sentence> flagged = weighted_union(src, tgt, 1.0, 5);
  std::vector<Sentence> plain = flagged;
  for (Sentence& s : plain) {
    s.from_source_domain = false;
    s.embed_scale = 1.0;
  }
  const TagScheme scheme(SchemeMode::AESC);
  TrainConfig tc;
  tc.batch_size = 4;
  std::vector<std::vector<double>> grads[2];
  for (int runix = 0; runix < 2; ++runix) {
    const std::vector<Sentence>& data = runix == 0 ? flagged : plain;
    Model model = small_model(Architecture::ARNN, SchemeMode::AESC, data, 1409);
    const BatchPlan plan = make_batches(data, model, scheme, tc);
    Rng rng(1);
    model.zero_grads();
    accumulate_batch_gradients(model, plan.batches[0], rng);
    for (Parameter* p : model.trainable_parameters())
      grads[runix].push_back(p->grad.data);
  }
  if (grads[0] != grads[1]) return {false, "w=1 gradients differ from the union"};

  // w = 0.2: lookup rows scale by exactly 0.2 through the context window
  Rng rng(1410);
  EmbeddingTable table = EmbeddingTable::random(tgt, 4, rng);
  const Tensor matrix = table.matrix();
  Parameter emb("embedding", matrix);
  Tape tape;
  std::vector<Tensor> xs;
  for (std::size_t row : {2ul, 3ul})
    xs.push_back(tape.value(tape.param_row(emb, row, 0.2)));
  const Tensor window = context_window(xs, 1, 1, Tensor({4}));
  for (std::size_t c = 0; c < 4; ++c) {
    if (window.data[c] != 0.2 * matrix.at(2, c)) return {false, "w=0.2 scale off"};
    if (window.data[4 + c] != 0.2 * matrix.at(3, c)) return {false, "w=0.2 scale off"};
    if (window.data[8 + c] != 0.0) return {false, "pad slot not zero"};
  }
  return {true, "bitwise identity at w=1; exact 0.2 scaling through the window"};
}

// ---- 7: PRED augmentation shape ---------------------------------------------------

std::pair<bool, std::string> criterion_pred() {
  std::vector<Sentence> src, tgt;
  {
    Sentence a = make_sentence({"good", "keyboard"});
    a.spans = {span_over(a, 1, 1, Polarity::None)};
    src.push_back(a);
    Sentence b = make_sentence({"the", "camera", "rocks"});
    b.spans = {span_over(b, 1, 1, Polarity::Positive)};
    for (Token& t : b.tokens) {
      t.pos = "NN";
      t.chunk = "B-NP";
    }
    tgt.push_back(b);
  }
  Model src_model = small_model(Architecture::RNN, SchemeMode::AE, src, 1411, 4, 0);
  const std::vector<Sentence> aug = pred_augment(src_model, tgt);

  const FeatureExtractor fx(FeatureTable::default_table(), true);
  if (fx.dim() != 17) return {false, "feature dim != 17"};
  for (const Sentence& s : aug)
    for (const Token& t : s.tokens)
      if (fx.extract(t).size() != 17) return {false, "vector != 17 bits"};

  // gold labels and spans byte-for-byte untouched
  const TagScheme aesc(SchemeMode::AESC);
  for (std::size_t i = 0; i < tgt.size(); ++i) {
    if (encode_tags(aug[i], aesc).labels != encode_tags(tgt[i], aesc).labels)
      return {false, "gold labels changed"};
    json before = json::array(), after = json::array();
    for (const AspectSpan& sp : tgt[i].spans)
      before.push_back({{"s", sp.start}, {"e", sp.end}, {"t", sp.term},
                        {"p", to_string(sp.polarity)}});
    for (const AspectSpan& sp : aug[i].spans)
      after.push_back({{"s", sp.start}, {"e", sp.end}, {"t", sp.term},
                       {"p", to_string(sp.polarity)}});
    if (before.dump() != after.dump()) return {false, "spans changed"};
  }
  return {true, "17-bit features; labels and spans untouched"};
}

// ---- 8: Youtubean statistics -------------------------------------------------------

std::pair<bool, std::string> criterion_stats() {
  const std::vector<Sentence> corpus =
      parse_semeval_xml(read_file(source_dir() + "/data/youtubean.xml"));
  const CorpusStats st = corpus_stats(corpus);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "sentences %zu, distinct aspects %zu (mentions %zu), "
                "tokens/sentence %.2f, aspects/sentence %.2f all | %.2f with",
                st.sentences, st.distinct_terms, st.aspect_mentions,
                st.mean_tokens_per_sentence, st.aspects_per_sentence_all,
                st.aspects_per_sentence_with);
  const bool ok = st.sentences == 578 && st.distinct_terms == 525 &&
                  std::fabs(st.mean_tokens_per_sentence - 20.71) <= 1.0;
  return {ok, buf};
}

// ---- 9: joint never above single ----------------------------------------------------

std::pair<bool, std::string> criterion_joint_vs_single() {
  Rng rng(1412);
  const TagScheme aesc(SchemeMode::AESC);
  double min_gap = 1e9;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t sentences = 1 + rng.index(5);
    std::vector<std::vector<int>> gold, pred;
    for (std::size_t s = 0; s < sentences; ++s) {
      const std::size_t n = 1 + rng.index(12);
      gold.push_back(random_labels(rng, aesc, n));
      pred.push_back(random_labels(rng, aesc, n));
    }
    const EvalReport rep = evaluate(gold, pred, aesc);
    min_gap = std::min(min_gap, rep.single.f1 - rep.joint.f1);
    if (rep.joint.f1 > rep.single.f1 + 1e-12)
      return {false, "violated on trial " + std::to_string(trial)};
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "500 randomized evaluations, min gap %.2f",
                min_gap);
  return {true, buf};
}

// ---- 10: Welch t-test oracle ---------------------------------------------------------

std::pair<bool, std::string> criterion_ttest() {
  const json cases =
      json::parse(read_file(source_dir() + "/tests/golden/ttest_cases.json"));
  double worst = 0.0;
  for (const json& c : cases) {
    const auto a = c.at("a").get<std::vector<double>>();
    const auto b = c.at("b").get<std::vector<double>>();
    const SignificanceResult r = ttest_two_sided(a, b);
    worst = std::max(worst, std::fabs(r.p - c.at("p").get<double>()));
  }
  const std::vector<double> same{1, 2, 3, 4, 5};
  const bool exact_one = ttest_two_sided(same, same).p == 1.0;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%zu pairs, max |dp| %.1e%s", cases.size(),
                worst, exact_one ? "" : ", identical-sample p != 1");
  return {worst < 5e-5 && exact_one, buf};
}

}  // namespace

int main() {
  run(1, "gradient-correctness", 60, criterion_gradients);
  run(2, "conlleval-equivalence", 10, criterion_conlleval);
  run(3, "overfit-sanity", 120, criterion_overfit);
  run(4, "tag-roundtrip", 5, criterion_roundtrip);
  run(5, "attention-normalization", 0, criterion_attention);
  run(6, "weighted-neutrality", 0, criterion_weighted);
  run(7, "pred-augmentation", 0, criterion_pred);
  run(8, "youtubean-stats", 0, criterion_stats);
  run(9, "joint-vs-single", 0, criterion_joint_vs_single);
  run(10, "ttest-oracle", 0, criterion_ttest);
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
