"""Report rows and their CSV / JSON encodings.

The column order below is part of the format (``REPORT_VERSION``). In CSV a
missing value is written as ``NA``; in JSON it is ``null``. Ratios divide a
row's value by the baseline row's value and are ``NA`` when the baseline
value is zero.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, fields

from .energy import EnergyBreakdown
from .schemes import SchemeResult
from .stats import SimStats

REPORT_VERSION = 1

STAT_FIELDS = [f.name for f in fields(SimStats)]
ENERGY_FIELDS = [f.name for f in fields(EnergyBreakdown)]
RATIO_FIELDS = ["total_nj", "latency_cycles", "edp_nj_s", "misses", "miss_rate"]

COLUMNS = (
    ["name", "scheme", "retention_s", "retention_index", "tuner", "tuning_complete",
     "tuning_windows", "misses", "miss_rate"]
    + STAT_FIELDS
    + ENERGY_FIELDS
    + ["total_nj_excl_switch", "latency_cycles_excl_switch", "edp_nj_s_excl_switch",
       "normalized_to"]
    + [f"{k}_ratio" for k in RATIO_FIELDS]
)

_INT_COLUMNS = {"retention_index", "tuning_windows", "misses", "latency_cycles",
                "latency_cycles_excl_switch"} | {
    f.name for f in fields(SimStats) if f.type in ("int", int)}
_BOOL_COLUMNS = {"tuning_complete"}
_STR_COLUMNS = {"name", "scheme", "tuner", "normalized_to"}


@dataclass
class ReportRow:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)


def row_from_result(res: SchemeResult) -> ReportRow:
    st, e, x = res.stats, res.energy, res.energy_excl_switch
    v = {
        "name": res.name,
        "scheme": res.scheme.value,
        "retention_s": None if res.retention_s is None or math.isinf(res.retention_s)
        else res.retention_s,
        "retention_index": res.retention_index,
        "tuner": res.tuning.algorithm if res.tuning else None,
        "tuning_complete": res.tuning.complete if res.tuning else None,
        "tuning_windows": len(res.tuning.sampled) if res.tuning else None,
        "misses": st.misses,
        "miss_rate": st.miss_rate,
    }
    v.update(st.as_dict())
    v.update(e.as_dict())
    v.update(total_nj_excl_switch=x.total_nj, latency_cycles_excl_switch=x.latency_cycles,
             edp_nj_s_excl_switch=x.edp_nj_s, normalized_to=None)
    for k in RATIO_FIELDS:
        v[f"{k}_ratio"] = None
    return ReportRow(v)


def normalize(rows: list[ReportRow], baseline: str) -> list[ReportRow]:
    """Fill the ratio columns of every row against the row named ``baseline``."""
    base = next((r for r in rows if r["name"] == baseline), None)
    if base is None:
        raise ValueError(f"baseline row {baseline!r} not in report")
    for r in rows:
        r.values["normalized_to"] = baseline
        for k in RATIO_FIELDS:
            b = base[k]
            r.values[f"{k}_ratio"] = r[k] / b if b else None
    return rows


def _fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(col: str, text: str):
    if text == "NA":
        return None
    if col in _STR_COLUMNS:
        return text
    if col in _BOOL_COLUMNS:
        return text == "true"
    if col in _INT_COLUMNS:
        return int(text)
    return float(text)


def to_csv(rows: list[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in COLUMNS])
    return buf.getvalue()


def from_csv(text: str) -> list[ReportRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != COLUMNS:
        raise ValueError("unexpected CSV columns")
    return [ReportRow({c: _parse(c, t) for c, t in zip(header, line)}) for line in reader]


def _nested(r: ReportRow) -> dict:
    v = r.values
    return {
        "name": v["name"],
        "scheme": v["scheme"],
        "retention_s": v["retention_s"],
        "retention_index": v["retention_index"],
        "tuner": v["tuner"],
        "tuning_complete": v["tuning_complete"],
        "tuning_windows": v["tuning_windows"],
        "misses": v["misses"],
        "miss_rate": v["miss_rate"],
        "stats": {k: v[k] for k in STAT_FIELDS},
        "energy": {k: v[k] for k in ENERGY_FIELDS},
        "energy_excl_switch": {"total_nj": v["total_nj_excl_switch"],
                               "latency_cycles": v["latency_cycles_excl_switch"],
                               "edp_nj_s": v["edp_nj_s_excl_switch"]},
        "normalized_to": v["normalized_to"],
        "ratios": {k: v[f"{k}_ratio"] for k in RATIO_FIELDS},
    }


def _flatten(d: dict) -> ReportRow:
    v = {k: d[k] for k in ("name", "scheme", "retention_s", "retention_index", "tuner",
                           "tuning_complete", "tuning_windows", "misses", "miss_rate",
                           "normalized_to")}
    v.update(d["stats"])
    v.update(d["energy"])
    x = d["energy_excl_switch"]
    v.update(total_nj_excl_switch=x["total_nj"], latency_cycles_excl_switch=x["latency_cycles"],
             edp_nj_s_excl_switch=x["edp_nj_s"])
    v.update({f"{k}_ratio": d["ratios"][k] for k in RATIO_FIELDS})
    return ReportRow({c: v[c] for c in COLUMNS})


def to_json(rows: list[ReportRow]) -> str:
    doc = {"version": REPORT_VERSION, "rows": [_nested(r) for r in rows]}
    return json.dumps(doc, indent=2) + "\n"


def from_json(text: str) -> list[ReportRow]:
    doc = json.loads(text)
    if doc.get("version") != REPORT_VERSION:
        raise ValueError(f"unsupported report version {doc.get('version')!r}")
    return [_flatten(d) for d in doc["rows"]]


_NUM = {"type": ["number", "null"]}
_INT = {"type": ["integer", "null"]}

JSON_SCHEMA = {
    "type": "object",
    "required": ["version", "rows"],
    "properties": {
        "version": {"const": REPORT_VERSION},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "scheme", "stats", "energy", "energy_excl_switch",
                             "ratios", "misses", "miss_rate"],
                "properties": {
                    "name": {"type": "string"},
                    "scheme": {"enum": ["sram", "stt_fixed", "drs", "lars", "synergy"]},
                    "retention_s": _NUM,
                    "retention_index": _INT,
                    "tuner": {"type": ["string", "null"]},
                    "tuning_complete": {"type": ["boolean", "null"]},
                    "tuning_windows": _INT,
                    "misses": {"type": "integer"},
                    "miss_rate": {"type": "number"},
                    "stats": {"type": "object", "required": STAT_FIELDS,
                              "additionalProperties": False,
                              "properties": {k: {"type": "number"} for k in STAT_FIELDS}},
                    "energy": {"type": "object", "required": ENERGY_FIELDS,
                               "additionalProperties": False,
                               "properties": {k: {"type": "number"} for k in ENERGY_FIELDS}},
                    "energy_excl_switch": {
                        "type": "object", "additionalProperties": False,
                        "required": ["total_nj", "latency_cycles", "edp_nj_s"],
                        "properties": {"total_nj": {"type": "number"},
                                       "latency_cycles": {"type": "integer"},
                                       "edp_nj_s": {"type": "number"}}},
                    "normalized_to": {"type": ["string", "null"]},
                    "ratios": {"type": "object", "required": RATIO_FIELDS,
                               "additionalProperties": False,
                               "properties": {k: _NUM for k in RATIO_FIELDS}},
                },
            },
        },
    },
}


def render(rows: list[ReportRow], fmt: str) -> str:
    if fmt == "csv":
        return to_csv(rows)
    if fmt == "json":
        return to_json(rows)
    raise ValueError(f"unknown format {fmt!r}")
