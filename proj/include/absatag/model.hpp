#ifndef ABSATAG_MODEL_HPP
#define ABSATAG_MODEL_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absatag/corpus.hpp"
#include "absatag/embeddings.hpp"
#include "absatag/features.hpp"
#include "absatag/rng.hpp"
#include "absatag/tape.hpp"
#include "absatag/tensor.hpp"

namespace absatag {

enum class Architecture { ARNN, RNN, JRNN, LSTM, BiRNN, BiLSTM };
enum class CellKind { Elman, Jordan, Lstm };

std::string to_string(Architecture a);
Architecture architecture_from_string(const std::string& s);

struct ModelConfig {
  Architecture architecture = Architecture::ARNN;
  bool bidirectional = true;  // fixed by name for baselines, free for ARNN
  std::size_t hidden_size = 100;
  std::size_t window_radius = 0;  // d; window size 2d+1
  double dropout_keep = 1.0;
  bool use_features = false;
  std::size_t feature_dim = 0;  // 14, or 17 with a PRED channel
  SchemeMode scheme = SchemeMode::AE;
  std::size_t embedding_dim = 50;
  bool train_embeddings = true;
  bool append_final_hidden = false;  // extra h_n intake for the decoder

  CellKind cell() const;
  bool is_arnn() const { return architecture == Architecture::ARNN; }
  std::size_t window_size() const { return 2 * window_radius + 1; }
  std::size_t input_dim() const { return window_size() * embedding_dim; }
  std::size_t encoder_dim() const {  // per-token state after direction merge
    return bidirectional ? 2 * hidden_size : hidden_size;
  }
  std::size_t labels() const { return scheme == SchemeMode::AE ? 3 : 7; }
  // one-hot width of y_{i-1} inputs: labels plus the reserved start symbol
  std::size_t prev_label_dim() const { return labels() + 1; }

  // Throws on inconsistent combinations (e.g. bidirectional Jordan).
  void validate() const;

  std::string to_json() const;
  static ModelConfig from_json(const std::string& json);
};

struct SimpleCell {  // Elman (recurrent on h) or Jordan (recurrent on y)
  Parameter w_in, w_rec, bias;
};

struct LstmCell {
  // gate order: input, forget, output, candidate
  Parameter w_in[4], w_rec[4], bias[4];
};

struct AttentionParams {
  Parameter w_alpha;  // {attn_dim, 2 * encoder_dim}
  Parameter v;        // {attn_dim}
  Parameter w_s;      // {labels, decoder intake width}
};

struct BaselineOutParams {
  Parameter u_fwd;  // {labels, hidden}
  std::optional<Parameter> u_bwd;
  std::optional<Parameter> u_feat;  // {labels, feature_dim}
};

// --- single-step cells -------------------------------------------------------

Tape::Var elman_step(Tape& tape, Tape::Var x, Tape::Var h_prev, SimpleCell& cell);
Tape::Var jordan_step(Tape& tape, Tape::Var x, Tape::Var y_prev, SimpleCell& cell);

struct LstmState {
  Tape::Var h, c;
};
LstmState lstm_step(Tape& tape, Tape::Var x, LstmState prev, LstmCell& cell);

// --- attention decoder pieces ------------------------------------------------

// alpha_i = softmax_j(v . tanh(w_alpha [h_i; h_j]))
Tape::Var attention_scores(Tape& tape, AttentionParams& params, Tape::Var h_i,
                           std::span<const Tape::Var> states);
// t_i = sum_j alpha_{i,j} h_j
Tape::Var context_vector(Tape& tape, Tape::Var alpha, std::span<const Tape::Var> states);
// y_hat_i = softmax(w_s [h_i; t_i; y_prev (; features) (; h_n)])
Tape::Var decode_step(Tape& tape, AttentionParams& params, Tape::Var h_i,
                      Tape::Var t_i, Tape::Var y_prev,
                      std::optional<Tape::Var> features = std::nullopt,
                      std::optional<Tape::Var> final_hidden = std::nullopt);

// softmax(u_fwd h_fwd [+ u_bwd h_bwd] [+ u_feat f])
Tape::Var baseline_output(Tape& tape, BaselineOutParams& params, Tape::Var h_fwd,
                          std::optional<Tape::Var> h_bwd = std::nullopt,
                          std::optional<Tape::Var> features = std::nullopt);

// --- the configured model ----------------------------------------------------

class Model {
 public:
  // Fresh model over the given table's vocabulary. When the config enables
  // features and no extractor is given, the default 14-bit table is used
  // (plus the PRED channel when feature_dim is 17).
  Model(ModelConfig config, EmbeddingTable table, Rng& rng,
        std::optional<FeatureExtractor> features = std::nullopt);

  const ModelConfig& config() const { return config_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  std::size_t row_of(const std::string& word) const;

  std::vector<Parameter*> trainable_parameters();
  std::vector<Parameter*> all_parameters();  // checkpoint order, embedding first
  void zero_grads();

  struct SentenceInput {
    std::vector<std::size_t> rows;  // embedding row per token
    double embed_scale = 1.0;       // WEIGHTED source-domain scaling
    std::vector<std::vector<double>> features;  // per token, or empty
    std::vector<int> gold;  // label ids; required in training mode
  };

  SentenceInput encode_input(const Sentence& sentence,
                             std::span<const int> gold_labels = {}) const;

  enum class Mode { Training, Inference };

  // Per-token label distributions; windowing, direction merge, dropout and
  // the architecture-specific output path all happen here.
  std::vector<Tape::Var> forward(Tape& tape, const SentenceInput& input,
                                 Mode mode, Rng& rng);

  // Greedy per-token label ids on a throwaway tape.
  std::vector<int> predict(const SentenceInput& input);
  std::vector<int> predict(const Sentence& sentence);

  // encoder states only (Eqs.-style first pass); exposed for tests
  std::vector<Tape::Var> encode(Tape& tape, const SentenceInput& input,
                                Mode mode, Rng& rng);

  Parameter& embedding() { return embedding_; }
  AttentionParams* attention() { return attn_ ? &*attn_ : nullptr; }
  BaselineOutParams* baseline_out() { return out_ ? &*out_ : nullptr; }
  const FeatureExtractor* features() const {
    return features_ ? &*features_ : nullptr;
  }

  // deep copy (checkpoint snapshots for early stopping)
  Model clone() const;

 private:
  Model() = default;
  void init_params(Rng& rng);
  Tape::Var windowed_input(Tape& tape, const SentenceInput& input,
                           std::size_t position);
  // forward/backward hidden sequences before the direction merge
  std::pair<std::vector<Tape::Var>, std::vector<Tape::Var>> run_directions(
      Tape& tape, const SentenceInput& input);

  ModelConfig config_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> vocab_index_;
  Parameter embedding_;
  std::optional<FeatureExtractor> features_;

  std::optional<SimpleCell> fwd_simple_, bwd_simple_;
  std::optional<LstmCell> fwd_lstm_, bwd_lstm_;
  std::optional<AttentionParams> attn_;
  std::optional<BaselineOutParams> out_;

  friend struct CheckpointCodec;
};

}  // namespace absatag

#endif
