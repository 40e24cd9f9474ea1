import json

import pytest

from qwqram import documents as docs
from qwqram.errors import ValidationError
from qwqram.golden import CLASSICAL, ENTANGLED
from qwqram.memory import MemoryBank
from qwqram.protocol import CopyMode, Encoding, backup, run_query, standard
from qwqram.walker import QueryTerm

from conftest import random_terms


def test_float_formatting_roundtrips():
    for x in (0.1, 1 / 3, -2.5e-300, 0.7071067811865476):
        assert float(docs.fmt_float(x)) == x


def test_query_roundtrip():
    terms = [QueryTerm("01", complex(0.6, 0.0)), QueryTerm("10", complex(0.0, -0.8))]
    assert docs.parse_query(docs.dumps(docs.query_to_doc(terms))) == terms


def test_query_accepts_numbers_and_defaults_im():
    assert docs.parse_query('{"terms": [{"address": "1", "re": 1}]}') == [QueryTerm("1", 1 + 0j)]


@pytest.mark.parametrize("text", [
    "nope",
    '{"terms": 1}',
    '{"terms": [], "x": 1}',
    '{"terms": [{"address": 1, "re": 1}]}',
    '{"terms": [{"address": "1"}]}',
    '{"terms": [{"address": "1", "re": "x"}]}',
    '{"terms": [{"address": "1", "re": true}]}',
    '{"terms": [{"address": "1", "re": 1, "phase": 0}]}',
])
def test_bad_queries(text):
    with pytest.raises(ValidationError):
        docs.parse_query(text)


def test_load_query_missing_file(tmp_path):
    with pytest.raises(ValidationError):
        docs.load_query(tmp_path / "none.json")


def test_output_doc_shape():
    decoded, _ = run_query(ENTANGLED.config, ENTANGLED.bank, list(ENTANGLED.terms))
    doc = docs.output_doc(ENTANGLED.config, decoded)
    assert [o["address"] for o in doc["output"]] == ["00", "11"]
    assert doc["config"]["copy_mode"] == "global"


@pytest.mark.parametrize("cfg", [standard(2, 2), standard(2, 1, CopyMode.SWITCH), backup(2, 2),
                                 standard(2, 1, encoding=Encoding.QUDIT),
                                 standard(2, 1, encoding=Encoding.DUAL_RAIL)],
                         ids=lambda c: f"{c.variant.value}-{c.copy_mode.value}-{c.encoding.value}")
def test_trace_replays_cleanly(cfg, rng):
    bank = MemoryBank.random(cfg.n, cfg.m, rng)
    _, trace = run_query(cfg, bank, random_terms(cfg.n, rng))
    text = docs.dumps(docs.trace_doc(trace))
    doc = docs.parse_trace_doc(text)
    assert docs.replay(doc) == []
    config, bank2, terms, gates = docs.trace_inputs(doc)
    assert config == cfg and bank2 == bank and gates == trace.gates


def test_replay_flags_edited_snapshot():
    _, trace = run_query(CLASSICAL.config, CLASSICAL.bank, list(CLASSICAL.terms))
    doc = json.loads(docs.dumps(docs.trace_doc(trace)))
    doc["steps"][4]["components"][0]["walkers"][0]["branch"] = 2
    problems = docs.replay(doc)
    assert len(problems) == 1 and "step 4" in problems[0]


def test_trace_doc_is_deterministic():
    a = docs.dumps(docs.trace_doc(run_query(CLASSICAL.config, CLASSICAL.bank, "10")[1]))
    b = docs.dumps(docs.trace_doc(run_query(CLASSICAL.config, CLASSICAL.bank, "10")[1]))
    assert a == b


def test_parse_trace_doc_rejects_foreign_documents():
    with pytest.raises(ValidationError):
        docs.parse_trace_doc('{"format": "other"}')
    with pytest.raises(ValidationError):
        docs.parse_trace_doc('{"format": "%s"}' % docs.TRACE_FORMAT)
    with pytest.raises(ValidationError):
        docs.parse_trace_doc("[")


def test_write_atomic(tmp_path):
    p = tmp_path / "out.json"
    docs.write_atomic(p, "a\n")
    docs.write_atomic(p, "b\n")
    assert p.read_text() == "b\n"
    assert [x.name for x in tmp_path.iterdir()] == ["out.json"]
