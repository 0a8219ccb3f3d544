"""Residual reports: per-point records followed by a summary, as JSON lines."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from . import __version__


def setup_hash(G):
    doc = G.to_document()
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _clean(x):
    """JSON-safe float (NaN and infinities become strings)."""
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


@dataclass
class ResidualReport:
    setup: str
    setup_hash: str
    suite: str
    seed: int
    records: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    points: int = 0
    version: str = __version__
    aborted: str = ""

    def add(self, name, value, tolerance, p=None, kind="max"):
        """Record one residual; ``kind='min'`` means the value must reach ``tolerance``."""
        value = float(value)
        if kind == "max":
            ok = math.isfinite(value) and value <= tolerance
        elif kind == "min":
            ok = math.isfinite(value) and value >= tolerance
        else:
            raise ValueError(kind)
        rec = {"p": None if p is None else [float(x) for x in p], "residual": name,
               "value": value, "tol": float(tolerance), "kind": kind, "pass": bool(ok)}
        self.records.append(rec)
        return ok

    def note(self, text):
        self.notes.append(text)

    def skip(self, p, reason):
        self.skipped.append({"p": [float(x) for x in p], "reason": reason})

    @property
    def skip_fraction(self):
        return len(self.skipped) / self.points if self.points else 0.0

    @property
    def verdict(self):
        if self.aborted or not self.records:
            return "fail"
        if self.skip_fraction > 0.5:
            return "fail"
        return "pass" if all(r["pass"] for r in self.records) else "fail"

    def summary(self):
        vals = [r["value"] for r in self.records if r["kind"] == "max" and math.isfinite(r["value"])]
        return {
            "summary": True,
            "setup": self.setup,
            "setup_hash": self.setup_hash,
            "suite": self.suite,
            "seed": self.seed,
            "version": self.version,
            "records": len(self.records),
            "failures": sum(not r["pass"] for r in self.records),
            "points": self.points,
            "skipped": self.skipped,
            "max": max(vals, default=0.0),
            "mean": sum(vals) / len(vals) if vals else 0.0,
            "notes": self.notes,
            "aborted": self.aborted,
            "verdict": self.verdict,
        }

    def to_jsonl(self):
        lines = [json.dumps({k: _clean(v) for k, v in r.items()}) for r in self.records]
        lines.append(json.dumps(self.summary()))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text):
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not rows or not rows[-1].get("summary"):
            raise ValueError("report has no summary line")
        s = rows[-1]
        rep = cls(s["setup"], s["setup_hash"], s["suite"], s["seed"], notes=list(s["notes"]),
                  skipped=list(s["skipped"]), points=s["points"], version=s["version"],
                  aborted=s["aborted"])
        for r in rows[:-1]:
            r = dict(r)
            if isinstance(r["value"], str):
                r["value"] = float(r["value"])
            rep.records.append(r)
        return rep
