"""Aspect extraction and joint aspect+sentiment sequence tagging.

Thin convenience layer over the C++ extension: corpus-shaped values cross the
boundary as canonical JSON strings and are unwrapped into dicts here.
"""

import json as _json

try:
    from . import _absatag as _core
except ImportError:  # repository build: the module sits on PYTHONPATH directly
    import _absatag as _core

__version__ = _core.__version__

tokenize = _core.tokenize
conlleval_f1 = _core.conlleval_f1
decouple = _core.decouple
ttest_two_sided = _core.ttest_two_sided
predict_file = _core.predict_file
evaluate = _core.evaluate


def parse_semeval_xml(xml):
    """SemEval ABSA XML -> list of sentence dicts."""
    return [_json.loads(line) for line in _core.parse_semeval_xml(xml)]


def parse_brat(txt, ann):
    """brat standoff .txt/.ann pair -> list of sentence dicts."""
    return [_json.loads(line) for line in _core.parse_brat(txt, ann)]


def corpus_stats(sentences):
    """Descriptive statistics for a list of sentence dicts."""
    return _json.loads(_core.corpus_stats([_json.dumps(s) for s in sentences]))


def encode_tags(sentence, mode):
    """IOB labels for a sentence dict; returns (labels, snapped_count)."""
    return _core.encode_tags(_json.dumps(sentence), mode)


def decode_tags(labels, sentence, mode):
    """Spans recovered from labels; returns (spans, disagreements)."""
    return _core.decode_tags(labels, _json.dumps(sentence), mode)


__all__ = [
    "__version__",
    "conlleval_f1",
    "corpus_stats",
    "decode_tags",
    "decouple",
    "encode_tags",
    "evaluate",
    "parse_brat",
    "parse_semeval_xml",
    "predict_file",
    "tokenize",
    "ttest_two_sided",
]
