#ifndef ABSATAG_EMBEDDINGS_HPP
#define ABSATAG_EMBEDDINGS_HPP

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "absatag/corpus.hpp"
#include "absatag/rng.hpp"
#include "absatag/tensor.hpp"

namespace absatag {

enum class EmbeddingFormat { Word2VecText, GloveText };

// Word-vector table. Row 0 is PAD (zeros), row 1 is UNK (uniform in
// [-0.1, 0.1]); lookup tries the exact form, then lowercase, then UNK.
class EmbeddingTable {
 public:
  static constexpr std::size_t kPadRow = 0;
  static constexpr std::size_t kUnkRow = 1;

  EmbeddingTable() = default;

  // Parses word2vec text (leading "count dim" line) or glove text (none).
  static EmbeddingTable load(const std::string& text, EmbeddingFormat format,
                             Rng& rng);

  // Randomly initialized table over the corpus vocabulary.
  static EmbeddingTable random(std::span<const Sentence> corpus,
                               std::size_t dim, Rng& rng);

  std::size_t dim() const { return dim_; }
  std::size_t vocab_size() const { return words_.size(); }
  std::size_t row_of(const std::string& word) const;
  const std::vector<std::string>& words() const { return words_; }
  const Tensor& matrix() const { return matrix_; }
  Tensor take_matrix() { return std::move(matrix_); }
  int duplicate_warnings() const { return duplicates_; }

  // Rebuild from checkpoint contents.
  static EmbeddingTable from_rows(std::vector<std::string> words, Tensor matrix);

 private:
  void add_word(const std::string& word);

  std::size_t dim_ = 0;
  std::vector<std::string> words_;  // includes the specials at rows 0 and 1
  std::unordered_map<std::string, std::size_t> index_;
  Tensor matrix_;  // |V| x dim
  int duplicates_ = 0;
};

// Context window [x_{i-d}; ...; x_i; ...; x_{i+d}] with PAD rows
// substituted outside the sequence.
Tensor context_window(std::span<const Tensor> embeddings, std::size_t position,
                      std::size_t radius, const Tensor& pad);

}  // namespace absatag

#endif
