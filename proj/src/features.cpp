#include "absatag/features.hpp"

#include <stdexcept>

#include <json.hpp>

namespace absatag {

namespace {

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

std::string pos_class_of(const std::string& pos) {
  if (pos.empty()) return "";
  if (starts_with(pos, "NN")) return "noun";
  if (starts_with(pos, "VB") || pos == "MD") return "verb";
  if (starts_with(pos, "JJ")) return "adjective";
  if (starts_with(pos, "RB") || pos == "WRB") return "adverb";
  if (pos == "PRP" || pos == "PRP$" || pos == "WP" || pos == "WP$")
    return "pronoun";
  if (pos == "DT" || pos == "PDT" || pos == "WDT") return "determiner";
  if (pos == "IN" || pos == "TO") return "preposition";
  return "other";
}

std::string chunk_type_of(const std::string& chunk) {
  const auto dash = chunk.find('-');
  if (dash == std::string::npos) return "";
  const std::string type = chunk.substr(dash + 1);
  if (type == "NP" || type == "VP") return type;
  return "other";
}

FeaturePredicate::Kind kind_from_string(const std::string& s) {
  using Kind = FeaturePredicate::Kind;
  if (s == "pos_class") return Kind::PosClass;
  if (s == "pos_exact") return Kind::PosExact;
  if (s == "pos_contains") return Kind::PosContains;
  if (s == "chunk_exact") return Kind::ChunkExact;
  if (s == "chunk_position") return Kind::ChunkPosition;
  if (s == "chunk_type") return Kind::ChunkType;
  throw std::invalid_argument("feature table: unknown predicate kind: " + s);
}

std::string kind_to_string(FeaturePredicate::Kind k) {
  using Kind = FeaturePredicate::Kind;
  switch (k) {
    case Kind::PosClass: return "pos_class";
    case Kind::PosExact: return "pos_exact";
    case Kind::PosContains: return "pos_contains";
    case Kind::ChunkExact: return "chunk_exact";
    case Kind::ChunkPosition: return "chunk_position";
    case Kind::ChunkType: return "chunk_type";
  }
  return "";
}

}  // namespace

bool FeaturePredicate::matches(const Token& token) const {
  switch (kind) {
    case Kind::PosClass:
      return !token.pos.empty() && pos_class_of(token.pos) == value;
    case Kind::PosExact:
      return token.pos == value;
    case Kind::PosContains:
      return !token.pos.empty() && token.pos.find(value) != std::string::npos;
    case Kind::ChunkExact:
      return token.chunk == value;
    case Kind::ChunkPosition:
      return !token.chunk.empty() && token.chunk.substr(0, 1) == value;
    case Kind::ChunkType:
      return !token.chunk.empty() && chunk_type_of(token.chunk) == value;
  }
  return false;
}

FeatureTable::FeatureTable(std::vector<FeaturePredicate> preds)
    : predicates_(std::move(preds)) {
  if (predicates_.size() != kLinguisticBits)
    throw std::invalid_argument("feature table: exactly " +
                                std::to_string(kLinguisticBits) +
                                " predicates required, got " +
                                std::to_string(predicates_.size()));
}

FeatureTable FeatureTable::default_table() {
  using Kind = FeaturePredicate::Kind;
  std::vector<FeaturePredicate> preds;
  for (const char* cls : {"noun", "verb", "adjective", "adverb", "pronoun",
                          "determiner", "preposition", "other"})
    preds.push_back({Kind::PosClass, cls});
  for (const char* p : {"B", "I", "O"}) preds.push_back({Kind::ChunkPosition, p});
  for (const char* t : {"NP", "VP", "other"}) preds.push_back({Kind::ChunkType, t});
  return FeatureTable(std::move(preds));
}

FeatureTable FeatureTable::from_json(const std::string& json) {
  const nlohmann::json j = nlohmann::json::parse(json);
  std::vector<FeaturePredicate> preds;
  for (const auto& jp : j.at("features")) {
    preds.push_back({kind_from_string(jp.at("kind").get<std::string>()),
                     jp.at("value").get<std::string>()});
  }
  return FeatureTable(std::move(preds));
}

std::string FeatureTable::to_json() const {
  nlohmann::json j;
  j["features"] = nlohmann::json::array();
  for (const FeaturePredicate& p : predicates_)
    j["features"].push_back(
        {{"kind", kind_to_string(p.kind)}, {"value", p.value}});
  return j.dump();
}

std::vector<double> FeatureTable::features(const Token& token,
                                           bool* unannotated) const {
  std::vector<double> bits(predicates_.size(), 0.0);
  if (token.pos.empty() && token.chunk.empty()) {
    if (unannotated) *unannotated = true;
    return bits;
  }
  if (unannotated) *unannotated = false;
  for (std::size_t i = 0; i < predicates_.size(); ++i)
    if (predicates_[i].matches(token)) bits[i] = 1.0;
  return bits;
}

std::vector<double> FeatureExtractor::extract(const Token& token) const {
  std::vector<double> bits = table_.features(token);
  if (include_pred_) {
    // O / B-ASP / I-ASP one-hot in the AE label order
    std::vector<double> pred(3, 0.0);
    if (token.pred_iob == "O" || token.pred_iob.empty()) pred[0] = 1.0;
    else if (token.pred_iob == "B-ASP") pred[1] = 1.0;
    else if (token.pred_iob == "I-ASP") pred[2] = 1.0;
    else throw std::invalid_argument("unknown pred_iob tag: " + token.pred_iob);
    bits.insert(bits.end(), pred.begin(), pred.end());
  }
  return bits;
}

}  // namespace absatag
