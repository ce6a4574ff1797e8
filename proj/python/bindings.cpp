#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "absatag/adaptation.hpp"
#include "absatag/checkpoint.hpp"
#include "absatag/corpus.hpp"
#include "absatag/evaluation.hpp"
#include "absatag/training.hpp"

namespace py = pybind11;
using namespace absatag;

namespace {

TagScheme scheme_of(const std::string& mode) {
  if (mode == "ae") return TagScheme(SchemeMode::AE);
  if (mode == "aesc") return TagScheme(SchemeMode::AESC);
  throw std::invalid_argument("mode must be 'ae' or 'aesc'");
}

std::vector<std::string> corpus_json(const std::vector<Sentence>& sentences) {
  std::vector<std::string> out;
  out.reserve(sentences.size());
  for (const Sentence& s : sentences) out.push_back(sentence_to_json(s));
  return out;
}

std::vector<Sentence> corpus_from_json(const std::vector<std::string>& lines) {
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (const std::string& l : lines) out.push_back(sentence_from_json(l));
  return out;
}

py::dict prf_dict(const PrfScores& s) {
  py::dict d;
  d["precision"] = s.precision;
  d["recall"] = s.recall;
  d["f1"] = s.f1;
  d["gold"] = s.gold;
  d["predicted"] = s.predicted;
  d["correct"] = s.correct;
  return d;
}

}  // namespace

PYBIND11_MODULE(_absatag, m) {
  m.doc() = "aspect extraction and joint aspect+sentiment tagging (C++ core)";

  m.def("tokenize",
        [](const std::string& text) {
          std::vector<std::tuple<std::string, std::size_t, std::size_t>> out;
          for (const Token& t : tokenize(text))
            out.emplace_back(t.surface, t.start, t.end);
          return out;
        },
        py::arg("text"),
        "Whitespace tokenization with edge punctuation detached; returns "
        "(surface, start, end) triples.");

  m.def("parse_semeval_xml",
        [](const std::string& xml) { return corpus_json(parse_semeval_xml(xml)); },
        py::arg("xml"), "SemEval ABSA XML -> canonical sentence JSON strings.");

  m.def("parse_brat",
        [](const std::string& txt, const std::string& ann) {
          return corpus_json(parse_brat(txt, ann));
        },
        py::arg("txt"), py::arg("ann"),
        "brat standoff pair -> canonical sentence JSON strings.");

  m.def("encode_tags",
        [](const std::string& sentence_json, const std::string& mode) {
          const TagScheme scheme = scheme_of(mode);
          const Sentence s = sentence_from_json(sentence_json);
          const EncodeResult enc = encode_tags(s, scheme);
          std::vector<std::string> labels;
          for (int id : enc.labels) labels.push_back(scheme.label(id));
          return py::make_tuple(labels, enc.snapped);
        },
        py::arg("sentence_json"), py::arg("mode"),
        "IOB labels (+ snapped-span count) for a canonical sentence.");

  m.def("decode_tags",
        [](const std::vector<std::string>& labels,
           const std::string& sentence_json, const std::string& mode) {
          const TagScheme scheme = scheme_of(mode);
          const Sentence s = sentence_from_json(sentence_json);
          std::vector<int> ids;
          for (const std::string& l : labels) ids.push_back(scheme.id(l));
          const DecodeResult dec = decode_tags(ids, s.tokens, scheme, s.text);
          std::vector<std::tuple<std::size_t, std::size_t, std::string, std::string>>
              spans;
          for (const AspectSpan& a : dec.spans)
            spans.emplace_back(a.start, a.end, a.term, to_string(a.polarity));
          return py::make_tuple(spans, dec.disagreements);
        },
        py::arg("labels"), py::arg("sentence_json"), py::arg("mode"),
        "Spans (start, end, term, polarity) recovered from a label sequence.");

  m.def("conlleval_f1",
        [](const std::vector<std::vector<std::string>>& gold,
           const std::vector<std::vector<std::string>>& pred) {
          return prf_dict(conlleval_f1(gold, pred));
        },
        py::arg("gold"), py::arg("pred"),
        "Phrase-level precision/recall/F1 under the conlleval rules.");

  m.def("evaluate",
        [](const std::vector<std::vector<std::string>>& gold,
           const std::vector<std::vector<std::string>>& pred,
           const std::string& mode) {
          const TagScheme scheme = scheme_of(mode);
          std::vector<std::vector<int>> g(gold.size()), p(pred.size());
          for (std::size_t s = 0; s < gold.size(); ++s)
            for (const std::string& l : gold[s]) g[s].push_back(scheme.id(l));
          for (std::size_t s = 0; s < pred.size(); ++s)
            for (const std::string& l : pred[s]) p[s].push_back(scheme.id(l));
          const EvalReport rep = evaluate(g, p, scheme);
          py::dict d;
          d["joint"] = prf_dict(rep.joint);
          d["single"] = prf_dict(rep.single);
          py::dict cls;
          cls["positive"] = prf_dict(rep.sentiment.positive);
          cls["negative"] = prf_dict(rep.sentiment.negative);
          cls["neutral"] = prf_dict(rep.sentiment.neutral);
          d["sentiment"] = cls;
          d["decode_disagreements"] = rep.decode_disagreements;
          return d;
        },
        py::arg("gold"), py::arg("pred"), py::arg("mode"),
        "Full joint/single/per-class report over label sequences.");

  m.def("decouple",
        [](const std::vector<std::string>& joint_labels) {
          const DecoupleResult r = decouple(joint_labels);
          std::vector<std::tuple<std::size_t, std::size_t, std::string>> spans;
          for (const AspectSpan& a : r.spans)
            spans.emplace_back(a.start, a.end, to_string(a.polarity));
          return py::make_tuple(r.ae_labels, spans, r.disagreements);
        },
        py::arg("labels"),
        "AESC labels -> (AE labels, token-index spans with polarity, "
        "disagreement count).");

  m.def("ttest_two_sided",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          const SignificanceResult r = ttest_two_sided(a, b);
          py::dict d;
          d["t"] = r.t;
          d["df"] = r.df;
          d["p"] = r.p;
          d["degenerate"] = r.degenerate;
          return d;
        },
        py::arg("a"), py::arg("b"), "Welch's unequal-variance two-sided test.");

  m.def("corpus_stats",
        [](const std::vector<std::string>& sentence_jsons) {
          return corpus_stats(corpus_from_json(sentence_jsons)).to_json();
        },
        py::arg("sentences"), "Descriptive statistics as a JSON string.");

  m.def("predict_file",
        [](const std::string& checkpoint_path, const std::string& corpus_path) {
          Model model = load_checkpoint(checkpoint_path);
          const TagScheme scheme(model.config().scheme);
          std::vector<std::vector<std::string>> out;
          for (const Sentence& s : read_canonical(corpus_path)) {
            std::vector<std::string> labels;
            for (int id : model.predict(s)) labels.push_back(scheme.label(id));
            out.push_back(std::move(labels));
          }
          return out;
        },
        py::arg("checkpoint"), py::arg("corpus"),
        "Greedy label sequences for a canonical corpus file.");

  m.attr("__version__") = "0.1.0";
}
