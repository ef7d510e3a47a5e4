"""JSON / text serialisation of analysis results.

Reports label nodes 1..d and components c1..cm.  Every number derived from
an exponent carries its provenance (``exact`` or ``mc`` with a stderr).
"""

from __future__ import annotations

import json

from .exponents import ExponentEstimate
from .law import MatrixLaw, row_condition_per_atom
from .structure import SccAnalysis
from .tropical import value_to_json
from .verdict import CycleTimeVerdict, RowConditionResult


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def comp_label(cid: int) -> str:
    return f"c{cid + 1}"


def nodes_json(nodes) -> list[int]:
    return [int(v) + 1 for v in sorted(nodes)]


def law_summary(law: MatrixLaw) -> dict:
    return {
        "type": law.kind,
        "dimension": law.dimension,
        "atoms": law.labels,
        "rowConditionPerAtom": dict(zip(law.labels, row_condition_per_atom(law))),
    }


def estimate_json(e) -> dict:
    if isinstance(e, ExponentEstimate):
        return e.to_json()
    return {"value": value_to_json(float(e)), "mode": "exact"}


def row_condition_json(r: RowConditionResult, labels) -> dict:
    return {
        "holds": r.holds,
        "witnesses": [{"atom": labels[k], "row": i + 1} for k, i in r.witnesses],
    }


def analysis_json(a: SccAnalysis) -> dict:
    cond = a.condensation
    comps = []
    for c in cond.components:
        comps.append({
            "id": comp_label(c.id),
            "nodes": nodes_json(c.nodes),
            "trivial": c.trivial,
            "E": sorted(comp_label(k) for k in a.E[c.id]),
            "F": nodes_json(a.F[c.id]),
            "G": sorted(comp_label(k) for k in a.G[c.id]),
            "H": nodes_json(a.H[c.id]),
            "dominating": a.dominating[c.id],
            "gamma": estimate_json(a.exponents.get(c.id, ExponentEstimate.exact(a.gamma[c.id]))),
            "gammaDownstream": {
                "value": value_to_json(a.gamma_down[c.id]),
                "mode": "exact" if all(a.modes[k] == "exact" for k in a.E[c.id]) else "mc",
            },
        })
    return {
        "components": comps,
        "condensationArcs": sorted([comp_label(x), comp_label(y)] for x, y in cond.arcs),
        "epsilonGamma": a.epsilon,
        "tieSensitive": a.tie_sensitive,
    }


def verdict_json(v: CycleTimeVerdict, law: MatrixLaw | None = None) -> dict:
    out = analysis_json(v.analysis)
    for comp, rows in zip(out["components"], v.rows):
        comp["rowCondition"] = row_condition_json(rows, v.atom_labels)
    out["converges"] = v.converges
    if v.limit is not None:
        out["limit"] = [value_to_json(x) for x in v.limit]
        out["limitProvenance"] = list(v.provenance)
    if law is not None:
        out["model"] = law_summary(law)
    return out


def _fmt(v) -> str:
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def verdict_text(v: CycleTimeVerdict) -> str:
    a = v.analysis
    lines = [f"converges: {v.converges}"]
    for c, rows in zip(a.components, v.rows):
        est = a.exponents.get(c.id)
        gamma = estimate_json(est if est is not None else a.gamma[c.id])
        extra = f" ± {gamma['stderr']:.2g}" if gamma.get("stderr") else ""
        lines.append(
            f"  {comp_label(c.id)} nodes={nodes_json(c.nodes)} trivial={c.trivial} "
            f"gamma={_fmt(gamma['value'])}{extra} ({gamma['mode']}) H={nodes_json(a.H[c.id])} "
            f"dominating={a.dominating[c.id]} row-condition={'ok' if rows.holds else 'FAILS'}"
        )
        for k, i in rows.witnesses:
            lines.append(f"    witness: atom {v.atom_labels[k]}, row {i + 1} has no finite entry in H")
    if v.limit is not None:
        lines.append("limit: " + ", ".join(
            f"{_fmt(value_to_json(x))} ({p})" for x, p in zip(v.limit, v.provenance)))
    if a.tie_sensitive:
        lines.append(f"warning: class sets depend on the tie tolerance {a.epsilon}")
    return "\n".join(lines) + "\n"
