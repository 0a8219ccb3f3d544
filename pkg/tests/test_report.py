from __future__ import annotations

import json

from dynlforge.report import ResidualReport, setup_hash


def make():
    rep = ResidualReport("s", "abc", "lcan", 3)
    rep.points = 2
    rep.add("r", 1e-12, 1e-9, p=[0.1])
    rep.add("slope", 5.1, 4.7, kind="min")
    return rep


def test_verdicts():
    rep = make()
    assert rep.verdict == "pass"
    rep.add("bad", float("nan"), 1.0)
    assert rep.verdict == "fail"
    assert ResidualReport("s", "h", "x", 0).verdict == "fail"


def test_skips_fail_above_half():
    rep = make()
    rep.skip([0.1], "outside")
    assert rep.verdict == "pass"
    rep.skip([0.2], "outside")
    rep.points = 3
    assert rep.verdict == "fail"


def test_jsonl_roundtrip():
    rep = make()
    rep.add("inf", float("inf"), 1.0)
    rep.note("hello")
    text = rep.to_jsonl()
    lines = [json.loads(x) for x in text.splitlines()]
    assert lines[-1]["summary"] and lines[-1]["verdict"] == "fail"
    back = ResidualReport.from_jsonl(text)
    assert back.summary() == rep.summary()
    assert back.records[:2] == rep.records[:2]


def test_hash_is_stable(setups):
    for G in setups.values():
        assert setup_hash(G) == setup_hash(G.with_())
    assert len({setup_hash(G) for G in setups.values()}) == len(setups)
