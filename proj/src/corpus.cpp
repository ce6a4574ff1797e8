#include "absatag/corpus.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace absatag {

std::string to_string(Polarity p) {
  switch (p) {
    case Polarity::Positive: return "positive";
    case Polarity::Negative: return "negative";
    case Polarity::Neutral: return "neutral";
    case Polarity::Conflict: return "conflict";
    case Polarity::None: return "none";
  }
  return "none";
}

Polarity polarity_from_string(const std::string& s) {
  if (s == "positive") return Polarity::Positive;
  if (s == "negative") return Polarity::Negative;
  if (s == "neutral") return Polarity::Neutral;
  if (s == "conflict") return Polarity::Conflict;
  if (s == "none" || s.empty()) return Polarity::None;
  throw std::invalid_argument("unknown polarity: " + s);
}

namespace {

bool detachable(char c) {
  static const std::string punct = ".,;:!?\"'()[]{}<>@#$%^&*+=|\\~/`-";
  return punct.find(c) != std::string::npos;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    if (i >= n) break;
    std::size_t j = i;
    while (j < n && !is_space(text[j])) ++j;
    // chunk [i, j): peel punctuation off both edges, keep the middle whole
    std::size_t s = i, e = j;
    while (s < e && detachable(text[s])) {
      tokens.push_back({text.substr(s, 1), s, s + 1});
      ++s;
    }
    std::size_t core_end = e;
    while (core_end > s && detachable(text[core_end - 1])) --core_end;
    if (core_end > s)
      tokens.push_back({text.substr(s, core_end - s), s, core_end});
    for (std::size_t k = core_end; k < e; ++k)
      tokens.push_back({text.substr(k, 1), k, k + 1});
    i = j;
  }
  return tokens;
}

TagScheme::TagScheme(SchemeMode mode) : mode_(mode) {
  if (mode == SchemeMode::AE) {
    labels_ = {"O", "B-ASP", "I-ASP"};
  } else {
    labels_ = {"O",      "B-ASP+", "I-ASP+", "B-ASP-",
               "I-ASP-", "B-ASP0", "I-ASP0"};
  }
}

int TagScheme::id(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<int>(i);
  throw std::invalid_argument("unknown label: " + label);
}

const std::string& TagScheme::label(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= labels_.size())
    throw std::invalid_argument("label id out of range: " + std::to_string(id));
  return labels_[static_cast<std::size_t>(id)];
}

namespace {

char polarity_suffix(Polarity p) {
  switch (p) {
    case Polarity::Positive: return '+';
    case Polarity::Negative: return '-';
    default: return '0';  // neutral; conflict and none map to neutral
  }
}

}  // namespace

EncodeResult encode_tags(const Sentence& sentence, const TagScheme& scheme) {
  EncodeResult res;
  res.labels.assign(sentence.tokens.size(), 0);  // O everywhere
  for (const AspectSpan& span : sentence.spans) {
    std::size_t first = sentence.tokens.size(), last = 0;
    for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
      const Token& tok = sentence.tokens[t];
      if (tok.start < span.end && tok.end > span.start) {
        first = std::min(first, t);
        last = t;
      }
    }
    if (first == sentence.tokens.size()) {
      ++res.dropped;
      continue;
    }
    if (sentence.tokens[first].start != span.start ||
        sentence.tokens[last].end != span.end)
      ++res.snapped;
    for (std::size_t t = first; t <= last; ++t) {
      if (res.labels[t] != 0) continue;  // earlier span wins on overlap
      std::string tag = (t == first) ? "B-ASP" : "I-ASP";
      if (scheme.mode() == SchemeMode::AESC)
        tag += polarity_suffix(span.polarity);
      res.labels[t] = scheme.id(tag);
    }
  }
  return res;
}

std::vector<IobChunk> iob_chunks(std::span<const std::string> labels) {
  std::vector<IobChunk> chunks;
  std::string prev_tag = "O", prev_type;
  bool open = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string& l = labels[i];
    std::string tag, type;
    const auto dash = l.find('-');
    if (dash == std::string::npos) {
      tag = l;
    } else {
      tag = l.substr(0, dash);
      type = l.substr(dash + 1);
    }
    const bool starts = (tag == "B") ||
                        (tag == "I" && prev_tag == "O") ||
                        (tag != "O" && prev_type != type);
    const bool ends = (prev_tag == "B" || prev_tag == "I") &&
                      (tag == "B" || tag == "O");
    const bool type_break = prev_tag != "O" && prev_type != type;
    if (open && (ends || type_break)) {
      chunks.back().end = i;
      open = false;
    }
    if (tag != "O" && starts) {
      chunks.push_back({i, i, type});
      open = true;
    }
    prev_tag = tag;
    prev_type = type;
  }
  if (open) chunks.back().end = labels.size();
  return chunks;
}

Polarity label_polarity(const std::string& label) {
  if (label.empty() || label == "O") return Polarity::Neutral;
  switch (label.back()) {
    case '+': return Polarity::Positive;
    case '-': return label.size() > 2 && label[1] == '-' ? Polarity::Negative
                                                         : Polarity::Neutral;
    default: return Polarity::Neutral;
  }
}

std::string strip_sentiment(const std::string& label) {
  if (label == "O" || label.empty()) return "O";
  const char last = label.back();
  if (last == '+' || last == '0' || (last == '-' && label.size() > 2))
    return label.substr(0, label.size() - 1);
  return label;
}

DecodeResult decode_tags(std::span<const int> labels,
                         std::span<const Token> tokens,
                         const TagScheme& scheme,
                         const std::string& text) {
  if (labels.size() != tokens.size())
    throw std::invalid_argument("decode_tags: " + std::to_string(labels.size()) +
                                " labels vs " + std::to_string(tokens.size()) +
                                " tokens");
  DecodeResult res;
  std::vector<std::string> strs;
  strs.reserve(labels.size());
  for (int id : labels) strs.push_back(scheme.label(id));
  if (scheme.mode() == SchemeMode::AESC) {
    // I tokens whose sentiment suffix breaks the running chunk; each one
    // forces a new span below, mirroring the type-sensitive chunk reading.
    for (std::size_t i = 1; i < strs.size(); ++i) {
      if (strs[i].empty() || strs[i][0] != 'I') continue;
      const char prev = strs[i - 1][0];
      if ((prev == 'B' || prev == 'I') &&
          strip_sentiment(strs[i - 1]) != "O" &&
          label_polarity(strs[i]) != label_polarity(strs[i - 1]))
        ++res.disagreements;
    }
  }
  for (const IobChunk& c : iob_chunks(strs)) {
    AspectSpan span;
    span.start = tokens[c.begin].start;
    span.end = tokens[c.end - 1].end;
    span.polarity = scheme.mode() == SchemeMode::AESC
                        ? label_polarity(strs[c.begin])
                        : Polarity::None;
    if (!text.empty() && span.end <= text.size()) {
      span.term = text.substr(span.start, span.end - span.start);
    } else {
      for (std::size_t t = c.begin; t < c.end; ++t) {
        if (t > c.begin) span.term += ' ';
        span.term += tokens[t].surface;
      }
    }
    res.spans.push_back(std::move(span));
  }
  return res;
}

// --- canonical JSON-lines format --------------------------------------------

std::string sentence_to_json(const Sentence& s) {
  nlohmann::json j;
  j["text"] = s.text;
  if (!s.source_id.empty()) j["source_id"] = s.source_id;
  j["tokens"] = nlohmann::json::array();
  for (const Token& t : s.tokens) {
    nlohmann::json jt{{"surface", t.surface}, {"start", t.start}, {"end", t.end}};
    if (!t.pos.empty()) jt["pos"] = t.pos;
    if (!t.chunk.empty()) jt["chunk"] = t.chunk;
    if (!t.pred_iob.empty()) jt["pred_iob"] = t.pred_iob;
    j["tokens"].push_back(std::move(jt));
  }
  j["spans"] = nlohmann::json::array();
  for (const AspectSpan& a : s.spans)
    j["spans"].push_back({{"start", a.start},
                          {"end", a.end},
                          {"term", a.term},
                          {"polarity", to_string(a.polarity)}});
  if (s.embed_scale != 1.0) j["embed_scale"] = s.embed_scale;
  if (s.from_source_domain) j["domain"] = "src";
  return j.dump();
}

Sentence sentence_from_json(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  Sentence s;
  s.text = j.at("text").get<std::string>();
  s.source_id = j.value("source_id", "");
  for (const auto& jt : j.value("tokens", nlohmann::json::array())) {
    Token t;
    t.surface = jt.at("surface").get<std::string>();
    t.start = jt.at("start").get<std::size_t>();
    t.end = jt.at("end").get<std::size_t>();
    t.pos = jt.value("pos", "");
    t.chunk = jt.value("chunk", "");
    t.pred_iob = jt.value("pred_iob", "");
    s.tokens.push_back(std::move(t));
  }
  for (const auto& ja : j.value("spans", nlohmann::json::array())) {
    AspectSpan a;
    a.start = ja.at("start").get<std::size_t>();
    a.end = ja.at("end").get<std::size_t>();
    a.term = ja.value("term", "");
    a.polarity = polarity_from_string(ja.value("polarity", "none"));
    s.spans.push_back(std::move(a));
  }
  s.embed_scale = j.value("embed_scale", 1.0);
  s.from_source_domain = j.value("domain", "") == "src";
  return s;
}

std::vector<Sentence> read_canonical(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::vector<Sentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(sentence_from_json(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  return out;
}

void write_canonical(const std::string& path, std::span<const Sentence> sentences) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const Sentence& s : sentences) out << sentence_to_json(s) << '\n';
}

// --- descriptive statistics -------------------------------------------------

CorpusStats corpus_stats(std::span<const Sentence> sentences) {
  CorpusStats st;
  st.sentences = sentences.size();
  std::set<std::string> terms;
  std::size_t token_total = 0, aspect_token_total = 0;
  for (const Sentence& s : sentences) {
    token_total += s.tokens.empty() ? tokenize(s.text).size() : s.tokens.size();
    if (!s.spans.empty()) ++st.sentences_with_aspects;
    for (const AspectSpan& a : s.spans) {
      ++st.aspect_mentions;
      terms.insert(a.term);
      aspect_token_total += tokenize(a.term).size();
    }
  }
  st.distinct_terms = terms.size();
  if (st.sentences > 0) {
    st.mean_tokens_per_sentence =
        static_cast<double>(token_total) / static_cast<double>(st.sentences);
    st.aspects_per_sentence_all = static_cast<double>(st.aspect_mentions) /
                                  static_cast<double>(st.sentences);
    st.pct_sentences_with_aspects =
        100.0 * static_cast<double>(st.sentences_with_aspects) /
        static_cast<double>(st.sentences);
  }
  if (st.aspect_mentions > 0)
    st.mean_tokens_per_aspect = static_cast<double>(aspect_token_total) /
                                static_cast<double>(st.aspect_mentions);
  if (st.sentences_with_aspects > 0)
    st.aspects_per_sentence_with =
        static_cast<double>(st.aspect_mentions) /
        static_cast<double>(st.sentences_with_aspects);
  return st;
}

std::string CorpusStats::to_json() const {
  nlohmann::json j{{"sentences", sentences},
                   {"aspect_mentions", aspect_mentions},
                   {"distinct_terms", distinct_terms},
                   {"sentences_with_aspects", sentences_with_aspects},
                   {"mean_tokens_per_sentence", mean_tokens_per_sentence},
                   {"mean_tokens_per_aspect", mean_tokens_per_aspect},
                   {"aspects_per_sentence_all", aspects_per_sentence_all},
                   {"aspects_per_sentence_with", aspects_per_sentence_with},
                   {"pct_sentences_with_aspects", pct_sentences_with_aspects}};
  return j.dump(2);
}

std::string CorpusStats::to_table() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "sentences                 %zu\n"
                "aspect mentions           %zu\n"
                "distinct aspect terms     %zu\n"
                "mean tokens/sentence      %.2f\n"
                "mean tokens/aspect        %.2f\n"
                "aspects/sentence (all)    %.2f\n"
                "aspects/sentence (with)   %.2f\n"
                "sentences with aspects    %.2f%%\n",
                sentences, aspect_mentions, distinct_terms,
                mean_tokens_per_sentence, mean_tokens_per_aspect,
                aspects_per_sentence_all, aspects_per_sentence_with,
                pct_sentences_with_aspects);
  return buf;
}

}  // namespace absatag
