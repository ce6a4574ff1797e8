#include <cctype>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "absatag/corpus.hpp"

namespace absatag {
namespace {

// Just enough XML for the ABSA corpus layout: elements, attributes, text
// with the five named entities plus numeric character references.
struct XmlElement {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<XmlElement> children;
  std::string text;

  const std::string* attr(const std::string& key) const {
    for (const auto& [k, v] : attrs)
      if (k == key) return &v;
    return nullptr;
  }
  const XmlElement* child(const std::string& tag) const {
    for (const XmlElement& c : children)
      if (c.name == tag) return &c;
    return nullptr;
  }
};

class XmlReader {
 public:
  explicit XmlReader(const std::string& src) : src_(src) {}

  XmlElement parse_document() {
    skip_misc();
    XmlElement root = parse_element();
    skip_misc();
    if (pos_ != src_.size()) fail("trailing content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos_ && i < src_.size(); ++i)
      if (src_[i] == '\n') ++line;
    throw std::runtime_error("xml parse error at line " + std::to_string(line) +
                             ": " + msg);
  }

  bool starts_with(const char* s) const {
    return src_.compare(pos_, std::strlen(s), s) == 0;
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  void skip_until(const char* end, const char* what) {
    const auto at = src_.find(end, pos_);
    if (at == std::string::npos) fail(std::string("unterminated ") + what);
    pos_ = at + std::strlen(end);
  }

  // whitespace, BOM, prolog, comments, doctype
  void skip_misc() {
    if (pos_ == 0 && starts_with("\xEF\xBB\xBF")) pos_ += 3;
    for (;;) {
      skip_ws();
      if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<!")) {
        skip_until(">", "declaration");
      } else {
        return;
      }
    }
  }

  std::string parse_name() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_' || src_[pos_] == '-' || src_[pos_] == ':' ||
            src_[pos_] == '.'))
      ++pos_;
    if (pos_ == start) fail("expected a name");
    return src_.substr(start, pos_ - start);
  }

  std::string decode_entities(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size();) {
      if (raw[i] != '&') {
        out += raw[i++];
        continue;
      }
      const auto semi = raw.find(';', i);
      if (semi == std::string::npos) fail("unterminated entity reference");
      const std::string ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out += '&';
      else if (ent == "lt") out += '<';
      else if (ent == "gt") out += '>';
      else if (ent == "quot") out += '"';
      else if (ent == "apos") out += '\'';
      else if (!ent.empty() && ent[0] == '#') {
        const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
        const long code = std::strtol(ent.c_str() + (hex ? 2 : 1), nullptr,
                                      hex ? 16 : 10);
        if (code <= 0 || code > 0x10FFFF) fail("bad character reference &" + ent + ";");
        // encode as UTF-8
        const unsigned cp = static_cast<unsigned>(code);
        if (cp < 0x80) out += static_cast<char>(cp);
        else if (cp < 0x800) {
          out += static_cast<char>(0xC0 | (cp >> 6));
          out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
          out += static_cast<char>(0xE0 | (cp >> 12));
          out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
          out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
          out += static_cast<char>(0xF0 | (cp >> 18));
          out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
          out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
          out += static_cast<char>(0x80 | (cp & 0x3F));
        }
      } else {
        fail("unknown entity &" + ent + ";");
      }
      i = semi + 1;
    }
    return out;
  }

  XmlElement parse_element() {
    if (pos_ >= src_.size() || src_[pos_] != '<') fail("expected '<'");
    ++pos_;
    XmlElement el;
    el.name = parse_name();
    for (;;) {
      skip_ws();
      if (pos_ >= src_.size()) fail("unterminated start tag <" + el.name);
      if (starts_with("/>")) {
        pos_ += 2;
        return el;
      }
      if (src_[pos_] == '>') {
        ++pos_;
        break;
      }
      std::string key = parse_name();
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] != '=') fail("expected '=' after attribute " + key);
      ++pos_;
      skip_ws();
      if (pos_ >= src_.size() || (src_[pos_] != '"' && src_[pos_] != '\''))
        fail("expected quoted value for attribute " + key);
      const char quote = src_[pos_++];
      const auto close = src_.find(quote, pos_);
      if (close == std::string::npos) fail("unterminated attribute value for " + key);
      el.attrs.emplace_back(std::move(key),
                            decode_entities(src_.substr(pos_, close - pos_)));
      pos_ = close + 1;
    }
    // content
    for (;;) {
      if (pos_ >= src_.size()) fail("unterminated element <" + el.name + ">");
      if (starts_with("<!--")) {
        skip_until("-->", "comment");
        continue;
      }
      if (starts_with("</")) {
        pos_ += 2;
        const std::string closing = parse_name();
        if (closing != el.name)
          fail("mismatched closing tag </" + closing + "> for <" + el.name + ">");
        skip_ws();
        if (pos_ >= src_.size() || src_[pos_] != '>') fail("expected '>'");
        ++pos_;
        return el;
      }
      if (src_[pos_] == '<') {
        el.children.push_back(parse_element());
        continue;
      }
      const auto next = src_.find('<', pos_);
      if (next == std::string::npos) fail("unterminated element <" + el.name + ">");
      el.text += decode_entities(src_.substr(pos_, next - pos_));
      pos_ = next;
    }
  }

  const std::string& src_;
  std::size_t pos_ = 0;
};

std::size_t required_offset(const XmlElement& el, const char* key,
                            const std::string& sentence_id) {
  const std::string* v = el.attr(key);
  if (!v)
    throw std::runtime_error("sentence " + sentence_id +
                             ": aspectTerm missing attribute '" + key + "'");
  return static_cast<std::size_t>(std::stoull(*v));
}

}  // namespace

std::vector<Sentence> parse_semeval_xml(const std::string& xml) {
  XmlReader reader(xml);
  const XmlElement root = reader.parse_document();
  if (root.name != "sentences")
    throw std::runtime_error("expected <sentences> root element, got <" +
                             root.name + ">");
  std::vector<Sentence> out;
  for (const XmlElement& sent : root.children) {
    if (sent.name != "sentence") continue;
    Sentence s;
    if (const std::string* id = sent.attr("id")) s.source_id = *id;
    const XmlElement* text = sent.child("text");
    if (!text)
      throw std::runtime_error("sentence " + s.source_id + ": missing <text>");
    s.text = text->text;
    if (const XmlElement* terms = sent.child("aspectTerms")) {
      for (const XmlElement& term : terms->children) {
        if (term.name != "aspectTerm") continue;
        AspectSpan span;
        span.start = required_offset(term, "from", s.source_id);
        span.end = required_offset(term, "to", s.source_id);
        const std::string* t = term.attr("term");
        span.term = t ? *t : "";
        if (span.end > s.text.size() || span.start >= span.end ||
            s.text.substr(span.start, span.end - span.start) != span.term)
          throw std::runtime_error(
              "sentence " + s.source_id + ": term '" + span.term +
              "' does not match text slice [" + std::to_string(span.start) +
              ", " + std::to_string(span.end) + ")");
        const std::string* pol = term.attr("polarity");
        span.polarity = pol ? polarity_from_string(*pol) : Polarity::None;
        s.spans.push_back(std::move(span));
      }
    }
    s.tokens = tokenize(s.text);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace absatag
