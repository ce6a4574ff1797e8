#include "absatag/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace absatag {

namespace {

std::string lowercased(std::string s) {
  for (char& c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

void EmbeddingTable::add_word(const std::string& word) {
  index_[word] = words_.size();
  words_.push_back(word);
}

std::size_t EmbeddingTable::row_of(const std::string& word) const {
  auto it = index_.find(word);
  if (it != index_.end()) return it->second;
  it = index_.find(lowercased(word));
  if (it != index_.end()) return it->second;
  return kUnkRow;
}

EmbeddingTable EmbeddingTable::load(const std::string& text,
                                    EmbeddingFormat format, Rng& rng) {
  EmbeddingTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;

  std::size_t declared_count = 0;
  if (format == EmbeddingFormat::Word2VecText) {
    if (!std::getline(in, line))
      throw std::runtime_error("embeddings: empty word2vec file");
    ++lineno;
    std::istringstream hdr(line);
    if (!(hdr >> declared_count >> table.dim_) || table.dim_ == 0)
      throw std::runtime_error("embeddings: bad word2vec header line: " + line);
  }

  std::vector<std::pair<std::string, std::vector<double>>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    std::vector<double> vec;
    double v;
    while (ls >> v) vec.push_back(v);
    if (table.dim_ == 0) table.dim_ = vec.size();  // glove: first row sets dim
    if (vec.size() != table.dim_ || vec.empty())
      throw std::runtime_error("embeddings: line " + std::to_string(lineno) +
                               ": expected " + std::to_string(table.dim_) +
                               " values, got " + std::to_string(vec.size()));
    rows.emplace_back(std::move(word), std::move(vec));
  }
  (void)declared_count;  // advisory only; some files under-report

  // last occurrence of a duplicate word wins
  std::unordered_map<std::string, std::size_t> seen;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto [it, inserted] = seen.emplace(rows[i].first, i);
    if (inserted) {
      order.push_back(i);
    } else {
      ++table.duplicates_;
      it->second = i;
    }
  }

  table.matrix_ = Tensor({order.size() + 2, table.dim_});
  table.add_word("<pad>");
  table.add_word("<unk>");
  for (std::size_t j = 0; j < table.dim_; ++j)
    table.matrix_.at(kUnkRow, j) = rng.uniform(-0.1, 0.1);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const auto& [word, vec] = rows[seen[rows[order[oi]].first]];
    const std::size_t row = oi + 2;
    table.add_word(word);
    for (std::size_t j = 0; j < table.dim_; ++j) table.matrix_.at(row, j) = vec[j];
  }
  return table;
}

EmbeddingTable EmbeddingTable::random(std::span<const Sentence> corpus,
                                      std::size_t dim, Rng& rng) {
  if (dim == 0) throw std::invalid_argument("embeddings: dim must be positive");
  EmbeddingTable table;
  table.dim_ = dim;
  std::vector<std::string> vocab;
  std::unordered_map<std::string, bool> seen;
  for (const Sentence& s : corpus)
    for (const Token& t : s.tokens)
      if (seen.emplace(t.surface, true).second) vocab.push_back(t.surface);
  table.matrix_ = Tensor({vocab.size() + 2, dim});
  table.add_word("<pad>");
  table.add_word("<unk>");
  for (std::size_t j = 0; j < dim; ++j)
    table.matrix_.at(kUnkRow, j) = rng.uniform(-0.1, 0.1);
  for (const std::string& w : vocab) {
    const std::size_t row = table.words_.size();
    table.add_word(w);
    for (std::size_t j = 0; j < dim; ++j)
      table.matrix_.at(row, j) = rng.uniform(-0.1, 0.1);
  }
  return table;
}

EmbeddingTable EmbeddingTable::from_rows(std::vector<std::string> words,
                                         Tensor matrix) {
  if (words.size() != matrix.rows() || words.size() < 2)
    throw std::invalid_argument("embeddings: vocab/matrix row mismatch");
  EmbeddingTable table;
  table.dim_ = matrix.cols();
  table.matrix_ = std::move(matrix);
  for (const std::string& w : words) table.add_word(w);
  return table;
}

Tensor context_window(std::span<const Tensor> embeddings, std::size_t position,
                      std::size_t radius, const Tensor& pad) {
  const std::size_t dim = pad.size();
  const std::size_t width = 2 * radius + 1;
  Tensor out({width * dim});
  for (std::size_t k = 0; k < width; ++k) {
    const long j = static_cast<long>(position) + static_cast<long>(k) -
                   static_cast<long>(radius);
    const Tensor& src =
        (j < 0 || j >= static_cast<long>(embeddings.size()))
            ? pad
            : embeddings[static_cast<std::size_t>(j)];
    if (src.size() != dim)
      throw std::invalid_argument("context_window: embedding dim mismatch");
    std::copy(src.data.begin(), src.data.end(), out.data.begin() + k * dim);
  }
  return out;
}

}  // namespace absatag
