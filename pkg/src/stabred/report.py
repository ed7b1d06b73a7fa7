"""Text renderings: traces, DOT graphs and the reduction report.

All output is sorted so identical inputs give identical bytes.  The JSON
report and the text report carry the same fields in the same order.
"""

from __future__ import annotations

import json
from collections import Counter
from typing import Any

from .component import fibre_multiset, stability_notes
from .engine import (
    FamilyGraph,
    MMPStep,
    MMPTrace,
    Snapshot,
    StabilityReport,
    stability_mode,
)
from .lattice import render_fan
from .weierstrass import fibre_flags

REPORT_VERSION = "1"


def _q(value) -> str:
    return "-" if value is None else str(value)


def _snapshot(s: Snapshot) -> str:
    return f"{s.node} {s.kind} Q2={_q(s.q_squared)} lc={_q(s.lc)}"


def format_step(i: int, step: MMPStep) -> list[str]:
    lines = [f"{i} {step.kind} {' '.join(step.subject)}"]
    lines.append("  before " + "; ".join(_snapshot(s) for s in step.before))
    lines.append("  after " + "; ".join(_snapshot(s) for s in step.after))
    for note in step.notes:
        lines.append(f"  note {note}")
    p = step.payload
    if p is not None:
        if p.params:
            lines.append("  params " + " ".join(f"{k}={_param(v)}" for k, v in p.params))
        for label, sing in p.singularities:
            lines.append(f"  singularity {label} {sing}")
        for label, fan in p.fans:
            lines.append(f"  fan {label}")
            lines.extend("    " + x for x in render_fan(fan).splitlines())
    return lines


def _param(v: Any) -> str:
    if isinstance(v, tuple):
        return "[" + ",".join(str(x) for x in v) + "]"
    return str(v)


def format_trace(trace: MMPTrace) -> str:
    lines = [f"# trace steps={len(trace.steps)}"]
    for i, step in enumerate(trace.steps, 1):
        lines.extend(format_step(i, step))
    return "\n".join(lines) + "\n"


def _dot_id(x: str) -> str:
    return '"' + x.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_dot(g: FamilyGraph) -> str:
    """Undirected DOT text; nodes show kind, genus and Q^2, edges monodromy and kind."""
    lines = ["graph family {"]
    for node, c in sorted(g.nodes.items()):
        label = f"{node}\\n{c.kind}\\ng={c.genus}\\nQ2={_q(c.q_squared)}"
        lines.append(f"  {_dot_id(node)} [label=\"{label}\"];")
    edges = sorted((min(e.a, e.b), max(e.a, e.b), e.monodromy, e.kind) for e in g.edges)
    for a, b, k, kind in edges:
        lines.append(f"  {_dot_id(a)} -- {_dot_id(b)} [label=\"{k} {kind}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _warnings(g: FamilyGraph, trace: MMPTrace | None) -> list[str]:
    out: set[str] = set()
    mode = stability_mode(g.mode)
    for node, c in g.nodes.items():
        for i, f in enumerate(c.fibres):
            for flag in fibre_flags(f.data):
                if flag != "multiplicative":
                    out.add(f"{node}: fibre {i} {flag}")
        if c.kind.is_fibred and c.q_squared is not None:
            for note in stability_notes(c, g.attachments(node), mode):
                out.add(f"{node}: {note}")
        elif len(c.twisted_fibres()) >= 2:
            out.add(f"{node}: multi-twisted extrapolation")
    if trace is not None:
        for step in trace.steps:
            for note in step.notes:
                out.add(f"{' '.join(step.subject)}: {note}")
    return sorted(out)


def _inventory(trace: MMPTrace | None) -> dict[str, list[str]]:
    surface: list[str] = []
    threefold: list[str] = []
    if trace is not None:
        for i, step in enumerate(trace.steps, 1):
            if step.payload is None:
                continue
            for label, sing in step.payload.singularities:
                if sing == "smooth":
                    continue
                entry = f"{sing} [step {i} {step.kind} {label}]"
                (threefold if label == "threefold" else surface).append(entry)
    return {"surface": surface, "threefold": threefold}


def build_report(
    source: str,
    g: FamilyGraph,
    verdicts: StabilityReport | None,
    trace: MMPTrace | None,
    exit_code: int,
    error: BaseException | None = None,
) -> dict:
    if error is not None:
        status = "error"
    elif verdicts is not None and verdicts.all_pass:
        status = "stable"
    else:
        status = "not_stable"
    counts = Counter(s.kind for s in trace.steps) if trace is not None else Counter()
    return {
        "version": REPORT_VERSION,
        "source": source,
        "mode": g.mode,
        "status": status,
        "exit_code": exit_code,
        "verdicts": [
            {"node": v.node, "kind": v.kind, "ok": v.ok, "stability": v.stability,
             "reasons": list(v.reasons), "notes": list(v.notes)}
            for v in (verdicts.verdicts if verdicts is not None else ())
        ],
        "final": [
            {"node": c.id, "kind": str(c.kind), "genus": c.genus,
             "q_squared": None if c.q_squared is None else str(c.q_squared),
             "fibres": fibre_multiset(c)}
            for c in g.nodes.values()
        ],
        "singularities": _inventory(trace),
        "trace": {"steps": len(trace.steps) if trace is not None else 0,
                  "counts": dict(sorted(counts.items()))},
        "warnings": _warnings(g, trace),
        "error": None if error is None else {"type": type(error).__name__, "message": str(error)},
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def report_text(report: dict) -> str:
    lines = [
        f"report version={report['version']}",
        f"source {report['source']}",
        f"mode {report['mode']}",
        f"status {report['status']}",
        f"exit_code {report['exit_code']}",
        "verdicts",
    ]
    for v in report["verdicts"]:
        mark = "ok" if v["ok"] else "FAIL"
        lines.append(f"  {v['node']} {v['kind']} {mark} stability={v['stability'] or '-'}")
        lines.extend(f"    reason {r}" for r in v["reasons"])
        lines.extend(f"    note {n}" for n in v["notes"])
    lines.append("final")
    for c in report["final"]:
        lines.append(
            f"  {c['node']} {c['kind']} g={c['genus']} Q2={c['q_squared'] or '-'} "
            f"fibres={{{','.join(c['fibres'])}}}"
        )
    lines.append("singularities")
    lines.extend(f"  surface {s}" for s in report["singularities"]["surface"])
    lines.extend(f"  threefold {s}" for s in report["singularities"]["threefold"])
    t = report["trace"]
    lines.append(" ".join([f"trace steps={t['steps']}"] + [f"{k}={n}" for k, n in t["counts"].items()]))
    lines.append("warnings")
    lines.extend(f"  {w}" for w in report["warnings"])
    err = report["error"]
    lines.append("error " + ("-" if err is None else f"{err['type']}: {err['message']}"))
    return "\n".join(lines) + "\n"
