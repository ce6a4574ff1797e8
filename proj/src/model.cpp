#include "absatag/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "absatag/features.hpp"

namespace absatag {

std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::ARNN: return "arnn";
    case Architecture::RNN: return "rnn";
    case Architecture::JRNN: return "jrnn";
    case Architecture::LSTM: return "lstm";
    case Architecture::BiRNN: return "birnn";
    case Architecture::BiLSTM: return "bilstm";
  }
  return "";
}

Architecture architecture_from_string(const std::string& s) {
  if (s == "arnn") return Architecture::ARNN;
  if (s == "rnn") return Architecture::RNN;
  if (s == "jrnn") return Architecture::JRNN;
  if (s == "lstm") return Architecture::LSTM;
  if (s == "birnn") return Architecture::BiRNN;
  if (s == "bilstm") return Architecture::BiLSTM;
  throw std::invalid_argument("unknown architecture: " + s);
}

CellKind ModelConfig::cell() const {
  switch (architecture) {
    case Architecture::ARNN:  // LSTM cells throughout for the attention model
    case Architecture::LSTM:
    case Architecture::BiLSTM: return CellKind::Lstm;
    case Architecture::RNN:
    case Architecture::BiRNN: return CellKind::Elman;
    case Architecture::JRNN: return CellKind::Jordan;
  }
  return CellKind::Elman;
}

void ModelConfig::validate() const {
  const auto fail = [](const std::string& msg) {
    throw std::invalid_argument("model config: " + msg);
  };
  if (hidden_size == 0) fail("hidden size must be positive");
  if (embedding_dim == 0) fail("embedding dim must be positive");
  if (dropout_keep <= 0.0 || dropout_keep > 1.0)
    fail("dropout keep probability must be in (0, 1]");
  switch (architecture) {
    case Architecture::JRNN:
      if (bidirectional)
        fail("the Jordan baseline is unidirectional; its output feedback has "
             "no right-to-left analogue here");
      break;
    case Architecture::RNN:
    case Architecture::LSTM:
      if (bidirectional)
        fail("use birnn/bilstm for the bidirectional baselines");
      break;
    case Architecture::BiRNN:
    case Architecture::BiLSTM:
      if (!bidirectional) fail(to_string(architecture) + " is bidirectional");
      break;
    case Architecture::ARNN:
      break;
  }
  if (use_features) {
    if (feature_dim != 14 && feature_dim != 17)
      fail("feature dim must be 14, or 17 with a PRED channel");
  } else if (feature_dim != 0) {
    fail("feature dim set but features disabled");
  }
}

std::string ModelConfig::to_json() const {
  nlohmann::json j{{"architecture", to_string(architecture)},
                   {"bidirectional", bidirectional},
                   {"hidden_size", hidden_size},
                   {"window_radius", window_radius},
                   {"dropout_keep", dropout_keep},
                   {"use_features", use_features},
                   {"feature_dim", feature_dim},
                   {"scheme", scheme == SchemeMode::AE ? "ae" : "aesc"},
                   {"embedding_dim", embedding_dim},
                   {"train_embeddings", train_embeddings},
                   {"append_final_hidden", append_final_hidden}};
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& json) {
  const nlohmann::json j = nlohmann::json::parse(json);
  ModelConfig c;
  c.architecture = architecture_from_string(j.at("architecture").get<std::string>());
  c.bidirectional = j.at("bidirectional").get<bool>();
  c.hidden_size = j.at("hidden_size").get<std::size_t>();
  c.window_radius = j.at("window_radius").get<std::size_t>();
  c.dropout_keep = j.at("dropout_keep").get<double>();
  c.use_features = j.at("use_features").get<bool>();
  c.feature_dim = j.at("feature_dim").get<std::size_t>();
  c.scheme = j.at("scheme").get<std::string>() == "ae" ? SchemeMode::AE
                                                       : SchemeMode::AESC;
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.train_embeddings = j.at("train_embeddings").get<bool>();
  c.append_final_hidden = j.value("append_final_hidden", false);
  return c;
}

// --- steps -------------------------------------------------------------------

Tape::Var elman_step(Tape& tape, Tape::Var x, Tape::Var h_prev, SimpleCell& cell) {
  Tape::Var z = tape.add(tape.add(tape.matmul(tape.param(cell.w_in), x),
                                  tape.matmul(tape.param(cell.w_rec), h_prev)),
                         tape.param(cell.bias));
  return tape.sigmoid(z);
}

Tape::Var jordan_step(Tape& tape, Tape::Var x, Tape::Var y_prev, SimpleCell& cell) {
  Tape::Var z = tape.add(tape.add(tape.matmul(tape.param(cell.w_in), x),
                                  tape.matmul(tape.param(cell.w_rec), y_prev)),
                         tape.param(cell.bias));
  return tape.sigmoid(z);
}

LstmState lstm_step(Tape& tape, Tape::Var x, LstmState prev, LstmCell& cell) {
  const auto gate = [&](int g) {
    return tape.add(tape.add(tape.matmul(tape.param(cell.w_in[g]), x),
                             tape.matmul(tape.param(cell.w_rec[g]), prev.h)),
                    tape.param(cell.bias[g]));
  };
  Tape::Var in_gate = tape.sigmoid(gate(0));
  Tape::Var forget_gate = tape.sigmoid(gate(1));
  Tape::Var out_gate = tape.sigmoid(gate(2));
  Tape::Var candidate = tape.tanh(gate(3));
  Tape::Var c = tape.add(tape.mul(forget_gate, prev.c),
                         tape.mul(in_gate, candidate));
  Tape::Var h = tape.mul(out_gate, tape.tanh(c));
  return {h, c};
}

// --- attention decoder ---------------------------------------------------------

Tape::Var attention_scores(Tape& tape, AttentionParams& params, Tape::Var h_i,
                           std::span<const Tape::Var> states) {
  Tape::Var energies = tape.pair_scores(tape.param(params.v),
                                        tape.param(params.w_alpha), h_i, states);
  return tape.softmax(energies);
}

Tape::Var context_vector(Tape& tape, Tape::Var alpha,
                         std::span<const Tape::Var> states) {
  return tape.weighted_sum(alpha, states);
}

Tape::Var decode_step(Tape& tape, AttentionParams& params, Tape::Var h_i,
                      Tape::Var t_i, Tape::Var y_prev,
                      std::optional<Tape::Var> features,
                      std::optional<Tape::Var> final_hidden) {
  std::vector<Tape::Var> parts{h_i, t_i, y_prev};
  if (features) parts.push_back(*features);
  if (final_hidden) parts.push_back(*final_hidden);
  return tape.softmax(tape.matmul(tape.param(params.w_s), tape.concat(parts)));
}

Tape::Var baseline_output(Tape& tape, BaselineOutParams& params, Tape::Var h_fwd,
                          std::optional<Tape::Var> h_bwd,
                          std::optional<Tape::Var> features) {
  Tape::Var scores = tape.matmul(tape.param(params.u_fwd), h_fwd);
  if (h_bwd) {
    if (!params.u_bwd)
      throw std::invalid_argument("baseline_output: no backward output matrix");
    scores = tape.add(scores, tape.matmul(tape.param(*params.u_bwd), *h_bwd));
  }
  if (features) {
    if (!params.u_feat)
      throw std::invalid_argument("baseline_output: no feature matrix");
    scores = tape.add(scores, tape.matmul(tape.param(*params.u_feat), *features));
  }
  return tape.softmax(scores);
}

// --- model -------------------------------------------------------------------

namespace {

void glorot_init(Parameter& p, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : p.value.data) v = rng.uniform(-r, r);
}

SimpleCell make_simple(const std::string& prefix, std::size_t in_dim,
                       std::size_t rec_dim, std::size_t hidden, Rng& rng) {
  SimpleCell cell;
  cell.w_in = Parameter(prefix + ".w_in", Tensor({hidden, in_dim}));
  cell.w_rec = Parameter(prefix + ".w_rec", Tensor({hidden, rec_dim}));
  cell.bias = Parameter(prefix + ".bias", Tensor({hidden}));
  glorot_init(cell.w_in, in_dim, hidden, rng);
  glorot_init(cell.w_rec, rec_dim, hidden, rng);
  return cell;
}

LstmCell make_lstm(const std::string& prefix, std::size_t in_dim,
                   std::size_t hidden, Rng& rng) {
  static const char* gates[] = {"i", "f", "o", "g"};
  LstmCell cell;
  for (int g = 0; g < 4; ++g) {
    cell.w_in[g] = Parameter(prefix + ".w_in." + gates[g], Tensor({hidden, in_dim}));
    cell.w_rec[g] = Parameter(prefix + ".w_rec." + gates[g], Tensor({hidden, hidden}));
    cell.bias[g] = Parameter(prefix + ".bias." + gates[g], Tensor({hidden}));
    glorot_init(cell.w_in[g], in_dim, hidden, rng);
    glorot_init(cell.w_rec[g], hidden, hidden, rng);
  }
  return cell;
}

std::size_t argmax(const Tensor& t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t.data[i] > t.data[best]) best = i;
  return best;
}

}  // namespace

Model::Model(ModelConfig config, EmbeddingTable table, Rng& rng,
             std::optional<FeatureExtractor> features)
    : config_(config), features_(std::move(features)) {
  config_.embedding_dim = table.dim();
  if (config_.use_features && !features_)
    features_ = FeatureExtractor(FeatureTable::default_table(),
                                 config_.feature_dim == 17);
  if (features_) config_.feature_dim = features_->dim();
  config_.validate();
  vocab_ = table.words();
  for (std::size_t i = 0; i < vocab_.size(); ++i) vocab_index_[vocab_[i]] = i;
  embedding_ = Parameter("embedding",
                         Tensor({table.vocab_size(), table.dim()}));
  embedding_.value = table.take_matrix();
  embedding_.grad = Tensor::zeros(embedding_.value.shape);
  init_params(rng);
}

void Model::init_params(Rng& rng) {
  const std::size_t in = config_.input_dim();
  const std::size_t h = config_.hidden_size;
  const std::size_t labels = config_.labels();
  switch (config_.cell()) {
    case CellKind::Elman:
      fwd_simple_ = make_simple("enc.fwd", in, h, h, rng);
      if (config_.bidirectional) bwd_simple_ = make_simple("enc.bwd", in, h, h, rng);
      break;
    case CellKind::Jordan:
      fwd_simple_ = make_simple("enc.fwd", in, config_.prev_label_dim(), h, rng);
      break;
    case CellKind::Lstm:
      fwd_lstm_ = make_lstm("enc.fwd", in, h, rng);
      if (config_.bidirectional) bwd_lstm_ = make_lstm("enc.bwd", in, h, rng);
      break;
  }
  if (config_.is_arnn()) {
    const std::size_t enc = config_.encoder_dim();
    const std::size_t attn = enc;
    AttentionParams attn_params;
    attn_params.w_alpha = Parameter("attn.w_alpha", Tensor({attn, 2 * enc}));
    attn_params.v = Parameter("attn.v", Tensor({attn}));
    std::size_t intake = enc + enc + config_.prev_label_dim() + config_.feature_dim;
    if (config_.append_final_hidden) intake += enc;
    attn_params.w_s = Parameter("attn.w_s", Tensor({labels, intake}));
    glorot_init(attn_params.w_alpha, 2 * enc, attn, rng);
    glorot_init(attn_params.v, attn, 1, rng);
    glorot_init(attn_params.w_s, intake, labels, rng);
    attn_ = std::move(attn_params);
  } else {
    BaselineOutParams out;
    out.u_fwd = Parameter("out.u_fwd", Tensor({labels, h}));
    glorot_init(out.u_fwd, h, labels, rng);
    if (config_.bidirectional) {
      out.u_bwd = Parameter("out.u_bwd", Tensor({labels, h}));
      glorot_init(*out.u_bwd, h, labels, rng);
    }
    if (config_.use_features) {
      out.u_feat = Parameter("out.u_feat", Tensor({labels, config_.feature_dim}));
      glorot_init(*out.u_feat, config_.feature_dim, labels, rng);
    }
    out_ = std::move(out);
  }
}

std::size_t Model::row_of(const std::string& word) const {
  auto it = vocab_index_.find(word);
  if (it != vocab_index_.end()) return it->second;
  std::string lower = word;
  for (char& c : lower)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  it = vocab_index_.find(lower);
  if (it != vocab_index_.end()) return it->second;
  return EmbeddingTable::kUnkRow;
}

std::vector<Parameter*> Model::all_parameters() {
  std::vector<Parameter*> out{&embedding_};
  const auto add_simple = [&](std::optional<SimpleCell>& c) {
    if (!c) return;
    out.push_back(&c->w_in);
    out.push_back(&c->w_rec);
    out.push_back(&c->bias);
  };
  const auto add_lstm = [&](std::optional<LstmCell>& c) {
    if (!c) return;
    for (int g = 0; g < 4; ++g) {
      out.push_back(&c->w_in[g]);
      out.push_back(&c->w_rec[g]);
      out.push_back(&c->bias[g]);
    }
  };
  add_simple(fwd_simple_);
  add_simple(bwd_simple_);
  add_lstm(fwd_lstm_);
  add_lstm(bwd_lstm_);
  if (attn_) {
    out.push_back(&attn_->w_alpha);
    out.push_back(&attn_->v);
    out.push_back(&attn_->w_s);
  }
  if (out_) {
    out.push_back(&out_->u_fwd);
    if (out_->u_bwd) out.push_back(&*out_->u_bwd);
    if (out_->u_feat) out.push_back(&*out_->u_feat);
  }
  return out;
}

std::vector<Parameter*> Model::trainable_parameters() {
  std::vector<Parameter*> out = all_parameters();
  if (!config_.train_embeddings)
    out.erase(out.begin());  // embedding is always first
  return out;
}

void Model::zero_grads() {
  for (Parameter* p : all_parameters()) p->zero_grad();
}

Model::SentenceInput Model::encode_input(const Sentence& sentence,
                                         std::span<const int> gold_labels) const {
  SentenceInput in;
  in.rows.reserve(sentence.tokens.size());
  for (const Token& t : sentence.tokens) in.rows.push_back(row_of(t.surface));
  in.embed_scale = sentence.embed_scale;
  in.gold.assign(gold_labels.begin(), gold_labels.end());
  if (config_.use_features) {
    const FeatureExtractor& fx = *features_;
    in.features.reserve(sentence.tokens.size());
    for (const Token& t : sentence.tokens) in.features.push_back(fx.extract(t));
  }
  return in;
}

Tape::Var Model::windowed_input(Tape& tape, const SentenceInput& input,
                                std::size_t position) {
  const std::size_t d = config_.window_radius;
  const std::size_t n = input.rows.size();
  std::vector<Tape::Var> parts;
  parts.reserve(2 * d + 1);
  for (long k = -static_cast<long>(d); k <= static_cast<long>(d); ++k) {
    const long j = static_cast<long>(position) + k;
    if (j < 0 || j >= static_cast<long>(n)) {
      parts.push_back(tape.input(Tensor({config_.embedding_dim})));  // PAD row
    } else if (config_.train_embeddings) {
      parts.push_back(tape.param_row(embedding_,
                                     input.rows[static_cast<std::size_t>(j)],
                                     input.embed_scale));
    } else {
      Tensor row({config_.embedding_dim});
      for (std::size_t c = 0; c < config_.embedding_dim; ++c)
        row.data[c] = input.embed_scale *
                      embedding_.value.at(input.rows[static_cast<std::size_t>(j)], c);
      parts.push_back(tape.input(std::move(row)));
    }
  }
  return parts.size() == 1 ? parts[0] : tape.concat(parts);
}

std::pair<std::vector<Tape::Var>, std::vector<Tape::Var>> Model::run_directions(
    Tape& tape, const SentenceInput& input) {
  const std::size_t n = input.rows.size();
  std::vector<Tape::Var> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = windowed_input(tape, input, i);

  std::vector<Tape::Var> fwd(n), bwd;
  if (config_.cell() == CellKind::Lstm) {
    LstmState state{tape.input(Tensor({config_.hidden_size})),
                    tape.input(Tensor({config_.hidden_size}))};
    for (std::size_t i = 0; i < n; ++i) {
      state = lstm_step(tape, xs[i], state, *fwd_lstm_);
      fwd[i] = state.h;
    }
    if (config_.bidirectional) {
      bwd.resize(n);
      LstmState back{tape.input(Tensor({config_.hidden_size})),
                     tape.input(Tensor({config_.hidden_size}))};
      for (std::size_t i = n; i-- > 0;) {
        back = lstm_step(tape, xs[i], back, *bwd_lstm_);
        bwd[i] = back.h;
      }
    }
  } else if (config_.cell() == CellKind::Elman) {
    Tape::Var h = tape.input(Tensor({config_.hidden_size}));
    for (std::size_t i = 0; i < n; ++i) {
      h = elman_step(tape, xs[i], h, *fwd_simple_);
      fwd[i] = h;
    }
    if (config_.bidirectional) {
      bwd.resize(n);
      Tape::Var hb = tape.input(Tensor({config_.hidden_size}));
      for (std::size_t i = n; i-- > 0;) {
        hb = elman_step(tape, xs[i], hb, *bwd_simple_);
        bwd[i] = hb;
      }
    }
  } else {
    throw std::logic_error("run_directions: the Jordan baseline interleaves "
                           "output feedback; use forward()");
  }
  return {std::move(fwd), std::move(bwd)};
}

std::vector<Tape::Var> Model::encode(Tape& tape, const SentenceInput& input,
                                     Mode mode, Rng& rng) {
  auto [fwd, bwd] = run_directions(tape, input);
  const std::size_t n = fwd.size();
  std::vector<Tape::Var> states(n);
  const bool training = mode == Mode::Training;
  for (std::size_t i = 0; i < n; ++i) {
    Tape::Var h = config_.bidirectional
                      ? tape.concat(std::vector<Tape::Var>{fwd[i], bwd[i]})
                      : fwd[i];
    states[i] = tape.dropout(h, config_.dropout_keep, training, rng);
  }
  return states;
}

std::vector<Tape::Var> Model::forward(Tape& tape, const SentenceInput& input,
                                      Mode mode, Rng& rng) {
  const std::size_t n = input.rows.size();
  if (n == 0) return {};
  const bool training = mode == Mode::Training;
  const std::size_t labels = config_.labels();
  const bool needs_gold =
      training && (config_.is_arnn() || config_.cell() == CellKind::Jordan);
  if (needs_gold && input.gold.size() != n)
    throw std::invalid_argument("forward: teacher forcing requires one gold "
                                "label per token");
  if (config_.use_features && input.features.size() != n)
    throw std::invalid_argument("forward: feature vectors missing");

  const auto feature_var = [&](std::size_t i) -> std::optional<Tape::Var> {
    if (!config_.use_features) return std::nullopt;
    return tape.input(Tensor({config_.feature_dim}, std::vector<double>(
                                                        input.features[i].begin(),
                                                        input.features[i].end())));
  };

  std::vector<Tape::Var> dists(n);

  if (config_.cell() == CellKind::Jordan) {
    // h_t = sigmoid(W x_t + U y_{t-1} + b), y_t = softmax(U_out h_t [+ ...])
    Tensor y_prev = Tensor::one_hot(config_.prev_label_dim(),
                                    config_.prev_label_dim() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      Tape::Var x = windowed_input(tape, input, i);
      Tape::Var h = jordan_step(tape, x, tape.input(y_prev), *fwd_simple_);
      h = tape.dropout(h, config_.dropout_keep, training, rng);
      dists[i] = baseline_output(tape, *out_, h, std::nullopt, feature_var(i));
      if (i + 1 < n) {
        if (training) {
          y_prev = Tensor::one_hot(config_.prev_label_dim(),
                                   static_cast<std::size_t>(input.gold[i]));
        } else {
          // previous output distribution, start slot zero
          y_prev = Tensor({config_.prev_label_dim()});
          const Tensor& d = tape.value(dists[i]);
          for (std::size_t c = 0; c < labels; ++c) y_prev.data[c] = d.data[c];
        }
      }
    }
    return dists;
  }

  if (!config_.is_arnn()) {
    // Elman / LSTM baselines: cell steps, then a per-token output layer. The
    // backward direction keeps its own output matrix instead of a concat.
    auto [fwd, bwd] = run_directions(tape, input);
    for (std::size_t i = 0; i < n; ++i) {
      Tape::Var hf = tape.dropout(fwd[i], config_.dropout_keep, training, rng);
      std::optional<Tape::Var> hb;
      if (config_.bidirectional)
        hb = tape.dropout(bwd[i], config_.dropout_keep, training, rng);
      dists[i] = baseline_output(tape, *out_, hf, hb, feature_var(i));
    }
    return dists;
  }

  // ARNN: first pass over the whole sentence, then the attentional decoder
  // walks left to right with the previous label fed back in.
  std::vector<Tape::Var> states = encode(tape, input, mode, rng);
  std::optional<Tape::Var> final_hidden;
  if (config_.append_final_hidden) final_hidden = states.back();
  std::size_t prev_label = config_.prev_label_dim() - 1;  // start symbol
  for (std::size_t i = 0; i < n; ++i) {
    Tape::Var alpha = attention_scores(tape, *attn_, states[i], states);
    Tape::Var t_i = context_vector(tape, alpha, states);
    Tape::Var y_prev =
        tape.input(Tensor::one_hot(config_.prev_label_dim(), prev_label));
    dists[i] = decode_step(tape, *attn_, states[i], t_i, y_prev, feature_var(i),
                           final_hidden);
    if (training)
      prev_label = static_cast<std::size_t>(input.gold[i]);
    else
      prev_label = argmax(tape.value(dists[i]));
  }
  return dists;
}

std::vector<int> Model::predict(const SentenceInput& input) {
  Tape tape;
  Rng rng(0);  // inference path draws nothing
  std::vector<Tape::Var> dists = forward(tape, input, Mode::Inference, rng);
  std::vector<int> out;
  out.reserve(dists.size());
  for (Tape::Var d : dists)
    out.push_back(static_cast<int>(argmax(tape.value(d))));
  return out;
}

std::vector<int> Model::predict(const Sentence& sentence) {
  return predict(encode_input(sentence));
}

Model Model::clone() const { return *this; }

}  // namespace absatag
