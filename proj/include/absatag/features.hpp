#ifndef ABSATAG_FEATURES_HPP
#define ABSATAG_FEATURES_HPP

#include <string>
#include <vector>

#include "absatag/corpus.hpp"

namespace absatag {

// One binary indicator over a token's POS / chunk annotations.
struct FeaturePredicate {
  enum class Kind {
    PosClass,       // value: noun|verb|adjective|adverb|pronoun|determiner|preposition|other
    PosExact,       // value: a Penn tag
    PosContains,    // value: substring of the tag
    ChunkExact,     // value: full chunk tag, e.g. B-NP
    ChunkPosition,  // value: B|I|O
    ChunkType,      // value: NP|VP|other
  };
  Kind kind;
  std::string value;

  bool matches(const Token& token) const;
};

// The 14 linguistic binary features. The default layout is 8 coarse POS
// classes, 3 chunk positions and 3 chunk types; alternative layouts load
// from a JSON table file.
class FeatureTable {
 public:
  static constexpr std::size_t kLinguisticBits = 14;

  static FeatureTable default_table();
  static FeatureTable from_json(const std::string& json);
  std::string to_json() const;

  std::size_t size() const { return predicates_.size(); }

  // All-zeros (and sets the unannotated flag) when the token carries
  // neither a POS tag nor a chunk tag.
  std::vector<double> features(const Token& token, bool* unannotated = nullptr) const;

 private:
  explicit FeatureTable(std::vector<FeaturePredicate> preds);
  std::vector<FeaturePredicate> predicates_;
};

// Feature channel fed to the models: the 14 linguistic bits, optionally
// followed by the 3-bit one-hot of a source model's predicted IOB tag
// (PRED adaptation), 17 bits total.
class FeatureExtractor {
 public:
  FeatureExtractor(FeatureTable table, bool include_pred)
      : table_(std::move(table)), include_pred_(include_pred) {}

  std::size_t dim() const { return table_.size() + (include_pred_ ? 3 : 0); }
  bool includes_pred() const { return include_pred_; }
  const FeatureTable& table() const { return table_; }

  std::vector<double> extract(const Token& token) const;

 private:
  FeatureTable table_;
  bool include_pred_;
};

}  // namespace absatag

#endif
