#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "absatag/corpus.hpp"

namespace absatag {
namespace {

struct LineSpan {
  std::size_t begin = 0;  // document offsets, newline excluded
  std::size_t end = 0;
};

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> parts;
  std::string p;
  while (in >> p) parts.push_back(p);
  return parts;
}

std::string lowercased(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::vector<Sentence> parse_brat(const std::string& txt, const std::string& ann) {
  std::vector<Sentence> sentences;
  std::vector<LineSpan> lines;
  {
    std::size_t from = 0;
    while (from <= txt.size()) {
      auto nl = txt.find('\n', from);
      const std::size_t end = (nl == std::string::npos) ? txt.size() : nl;
      std::string line = txt.substr(from, end - from);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) {
        Sentence s;
        s.text = line;
        s.tokens = tokenize(s.text);
        s.source_id = "line" + std::to_string(sentences.size() + 1);
        sentences.push_back(std::move(s));
        lines.push_back({from, from + line.size()});
      }
      if (nl == std::string::npos) break;
      from = nl + 1;
    }
  }

  // T id -> (sentence index, span index); A lines refer back to these.
  std::map<std::string, std::pair<std::size_t, std::size_t>> span_by_tid;

  std::istringstream annin(ann);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(annin, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty() || raw[0] == '#') continue;
    const auto err = [&](const std::string& msg) -> std::runtime_error {
      return std::runtime_error(".ann line " + std::to_string(lineno) + ": " + msg);
    };
    std::vector<std::string> fields;
    {
      std::size_t from = 0;
      while (true) {
        auto tab = raw.find('\t', from);
        fields.push_back(raw.substr(from, tab == std::string::npos
                                              ? std::string::npos
                                              : tab - from));
        if (tab == std::string::npos) break;
        from = tab + 1;
      }
    }
    const std::string& id = fields[0];
    if (id.empty()) throw err("empty annotation id");
    if (id[0] == 'T') {
      if (fields.size() < 2) throw err("malformed T line");
      if (fields[1].find(';') != std::string::npos)
        throw err("discontinuous span in " + id + " is not supported");
      const auto parts = split_ws(fields[1]);
      if (parts.size() != 3) throw err("malformed T line header in " + id);
      const std::size_t start = std::stoull(parts[1]);
      const std::size_t end = std::stoull(parts[2]);
      if (end <= start) throw err("empty span in " + id);
      // locate the containing sentence line
      std::size_t si = lines.size();
      for (std::size_t i = 0; i < lines.size(); ++i)
        if (start >= lines[i].begin && end <= lines[i].end) {
          si = i;
          break;
        }
      if (si == lines.size())
        throw err("span " + id + " [" + parts[1] + ", " + parts[2] +
                  ") crosses a line boundary or lies outside the text");
      AspectSpan span;
      span.start = start - lines[si].begin;
      span.end = end - lines[si].begin;
      span.term = sentences[si].text.substr(span.start, span.end - span.start);
      if (fields.size() >= 3 && !fields[2].empty() && span.term != fields[2])
        throw err("surface mismatch in " + id + ": text has '" + span.term +
                  "', annotation says '" + fields[2] + "'");
      span.polarity = Polarity::None;
      span_by_tid[id] = {si, sentences[si].spans.size()};
      sentences[si].spans.push_back(std::move(span));
    } else if (id[0] == 'A') {
      if (fields.size() < 2) throw err("malformed A line");
      const auto parts = split_ws(fields[1]);
      if (parts.size() < 3) throw err("malformed A line body");
      const std::string& target = parts[1];
      const auto it = span_by_tid.find(target);
      if (it == span_by_tid.end())
        throw err(id + " references unknown annotation " + target);
      auto [si, pi] = it->second;
      sentences[si].spans[pi].polarity =
          polarity_from_string(lowercased(parts[2]));
    }
    // other line kinds (relations, events, notes) carry nothing we ingest
  }

  // keep spans ordered by start offset within each sentence
  for (Sentence& s : sentences)
    std::stable_sort(s.spans.begin(), s.spans.end(),
                     [](const AspectSpan& a, const AspectSpan& b) {
                       return a.start < b.start;
                     });
  return sentences;
}

}  // namespace absatag
