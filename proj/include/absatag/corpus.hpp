#ifndef ABSATAG_CORPUS_HPP
#define ABSATAG_CORPUS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace absatag {

enum class Polarity { Positive, Negative, Neutral, Conflict, None };

std::string to_string(Polarity p);
Polarity polarity_from_string(const std::string& s);

struct Token {
  std::string surface;
  std::size_t start = 0;  // character offsets into the sentence text
  std::size_t end = 0;
  std::string pos;       // empty when unannotated
  std::string chunk;     // chunk IOB tag, empty when unannotated
  std::string pred_iob;  // source-model prediction attached by PRED adaptation
};

struct AspectSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string term;
  Polarity polarity = Polarity::None;
};

struct Sentence {
  std::string text;
  std::vector<Token> tokens;
  std::vector<AspectSpan> spans;
  std::string source_id;
  double embed_scale = 1.0;  // WEIGHTED adaptation input scaling, 1 = untouched
  bool from_source_domain = false;
};

// Whitespace tokenization with leading/trailing punctuation detached as
// separate tokens; internal punctuation ("battery-life") is kept.
std::vector<Token> tokenize(const std::string& text);

enum class SchemeMode { AE, AESC };

// Label vocabulary for simple or sentiment-bearing IOB tagging.
// AE:   O, B-ASP, I-ASP
// AESC: O, B-ASP+, I-ASP+, B-ASP-, I-ASP-, B-ASP0, I-ASP0
class TagScheme {
 public:
  explicit TagScheme(SchemeMode mode);

  SchemeMode mode() const { return mode_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  int id(const std::string& label) const;
  const std::string& label(int id) const;
  // Reserved previous-label start symbol; one-hot inputs have size()+1 slots.
  std::size_t start_symbol() const { return labels_.size(); }

 private:
  SchemeMode mode_;
  std::vector<std::string> labels_;
};

struct EncodeResult {
  std::vector<int> labels;  // one per token
  int snapped = 0;          // spans widened to token boundaries
  int dropped = 0;          // spans overlapping no token at all
};

EncodeResult encode_tags(const Sentence& sentence, const TagScheme& scheme);

struct DecodeResult {
  std::vector<AspectSpan> spans;
  int disagreements = 0;  // mid-span sentiment suffixes differing from the head
};

DecodeResult decode_tags(std::span<const int> labels,
                         std::span<const Token> tokens,
                         const TagScheme& scheme,
                         const std::string& text = "");

// Maximal chunks under the conlleval IOB reading: B always starts one, I after
// O (or at position 0) starts one, and a type change inside a run starts one.
struct IobChunk {
  std::size_t begin = 0;  // token indices, [begin, end)
  std::size_t end = 0;
  std::string type;  // "ASP", "ASP+", ...
};
std::vector<IobChunk> iob_chunks(std::span<const std::string> labels);

// Head-token sentiment of an AESC label ("B-ASP+" -> Positive); O -> Neutral.
Polarity label_polarity(const std::string& label);
// Strip the sentiment suffix: "B-ASP+" -> "B-ASP", "O" -> "O".
std::string strip_sentiment(const std::string& label);

// --- corpus file formats ---------------------------------------------------

// SemEval ABSA XML (Phase B layout).
std::vector<Sentence> parse_semeval_xml(const std::string& xml);

// brat standoff .txt/.ann pair; .txt holds one sentence per line.
std::vector<Sentence> parse_brat(const std::string& txt, const std::string& ann);

// Canonical JSON-lines interchange format.
std::string sentence_to_json(const Sentence& s);
Sentence sentence_from_json(const std::string& line);
std::vector<Sentence> read_canonical(const std::string& path);
void write_canonical(const std::string& path, std::span<const Sentence> sentences);

// --- descriptive statistics -------------------------------------------------

struct CorpusStats {
  std::size_t sentences = 0;
  std::size_t aspect_mentions = 0;
  std::size_t distinct_terms = 0;
  std::size_t sentences_with_aspects = 0;
  double mean_tokens_per_sentence = 0.0;
  double mean_tokens_per_aspect = 0.0;
  double aspects_per_sentence_all = 0.0;   // mentions / all sentences
  double aspects_per_sentence_with = 0.0;  // mentions / sentences with >= 1
  double pct_sentences_with_aspects = 0.0;

  std::string to_json() const;
  std::string to_table() const;
};

CorpusStats corpus_stats(std::span<const Sentence> sentences);

}  // namespace absatag

#endif
