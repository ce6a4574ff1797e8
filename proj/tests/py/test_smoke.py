"""Smoke tests for the python module; run by ctest with PYTHONPATH set to the
built extension directory plus python/."""

import json
import os
import subprocess
import sys
import tempfile

import absatag


def test_tokenize():
    toks = absatag.tokenize("It works.")
    assert [t[0] for t in toks] == ["It", "works", "."]
    assert absatag.tokenize("") == []
    toks = absatag.tokenize("battery-life, wow")
    assert [t[0] for t in toks] == ["battery-life", ",", "wow"]


def test_parse_and_tags():
    xml = """<sentences>
      <sentence id="p:1"><text>The battery life is great.</text>
        <aspectTerms>
          <aspectTerm term="battery life" polarity="positive" from="4" to="16"/>
        </aspectTerms>
      </sentence>
    </sentences>"""
    sentences = absatag.parse_semeval_xml(xml)
    assert len(sentences) == 1
    s = sentences[0]
    assert s["spans"][0]["term"] == "battery life"

    labels, snapped = absatag.encode_tags(s, "aesc")
    assert snapped == 0
    assert labels == ["O", "B-ASP+", "I-ASP+", "O", "O", "O"]

    spans, disagreements = absatag.decode_tags(labels, s, "aesc")
    assert disagreements == 0
    assert spans == [(4, 16, "battery life", "positive")]


def test_parse_brat():
    sentences = absatag.parse_brat(
        "camera is great\n", "T1\tAspect 0 6\tcamera\nA1\tSentiment T1 positive\n"
    )
    assert sentences[0]["spans"][0]["polarity"] == "positive"


def test_conlleval_and_decouple():
    gold = [["B-ASP", "I-ASP", "O"]]
    pred = [["B-ASP", "I-ASP", "O"]]
    scores = absatag.conlleval_f1(gold, pred)
    assert scores["f1"] == 100.0

    ae_labels, spans, disagreements = absatag.decouple(["B-ASP+", "I-ASP+", "O"])
    assert ae_labels == ["B-ASP", "I-ASP", "O"]
    assert spans == [(0, 2, "positive")]
    assert disagreements == 0

    report = absatag.evaluate(gold, pred, "ae")
    assert report["joint"]["f1"] == 100.0


def test_corpus_stats():
    xml = open(os.path.join(SOURCE_DIR, "data", "youtubean.xml")).read()
    sentences = absatag.parse_semeval_xml(xml)
    stats = absatag.corpus_stats(sentences)
    assert stats["sentences"] == 578
    assert stats["distinct_terms"] == 525


def test_ttest():
    r = absatag.ttest_two_sided([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert r["p"] == 1.0
    r = absatag.ttest_two_sided([70.1, 71.3, 69.8, 70.5, 70.9],
                                [72.0, 72.5, 71.8, 72.2, 72.6])
    assert abs(r["p"] - 0.0012914) < 1e-6


def test_predict_file_roundtrip():
    cli = os.environ.get("ABSATAG_CLI")
    if not cli:
        return  # exercised fully by the C++ CLI tests
    corpus = os.path.join(SOURCE_DIR, "data", "synthetic20.jsonl")
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [cli, "train", "--corpus", corpus, "--arch", "rnn", "--mode", "ae",
             "--hidden", "4", "--lr", "0.2", "--max-epochs", "1", "--seed", "1",
             "--out", tmp, "--name", "m"],
            check=True, capture_output=True)
        labels = absatag.predict_file(os.path.join(tmp, "m", "checkpoint.bin"),
                                      corpus)
        assert len(labels) == 20
        assert all(l in ("O", "B-ASP", "I-ASP") for sent in labels for l in sent)


SOURCE_DIR = os.environ.get("ABSATAG_SOURCE_DIR",
                            os.path.join(os.path.dirname(__file__), "..", ".."))

if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                print(f"ok   {name}")
            except Exception as exc:  # noqa: BLE001
                failures += 1
                print(f"FAIL {name}: {exc!r}")
    sys.exit(1 if failures else 0)
