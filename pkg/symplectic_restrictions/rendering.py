"""Markdown rendering of reports."""

from typing import Dict, List, Sequence

from symplectic_restrictions.models import Report


def _table(header: Sequence[str], rows: Sequence[Sequence]) -> List[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join("" if cell is None else str(cell) for cell in row) + " |" for row in rows]
    return lines


def _combination(coordinates: Dict[str, str]) -> str:
    if not coordinates:
        return "0"
    return " + ".join(f"{value}·{label}" for label, value in coordinates.items())


def _basis(results: dict) -> List[str]:
    lines = [f"## {results['germ']}: [Λ²] dimension {results['dimension']}, [Z²] dimension {results['closed_dimension']}", ""]
    rows = [(b["label"], b["degree"], "yes" if b["closed"] else "no", b["form"]) for b in results["basis"]]
    return lines + _table(("class", "quasi-degree", "closed", "representative"), rows)


def _action_table(results: dict) -> List[str]:
    labels = list(next(iter(results["table"].values()), {}).keys())
    rows = []
    for row in results["fields"]:
        entries = results["table"][row["label"]]
        rows.append([f"{row['row']} = {row['label']}"] + [_combination(entries[label]) for label in labels])
    return [f"## Infinitesimal actions on {results['germ']}", ""] + _table(["field"] + labels, rows)


def _classify(results: dict) -> List[str]:
    label = results["class"]
    sign = f" ({label['sign']})" if label["sign"] else ""
    lines = [f"## {label['family']}^{label['index']}{sign}", ""]
    lines += _table(
        ("normal form", "moduli", "cod", "μ", "ind"),
        [(_combination(results["normal_form"]), ", ".join(label["moduli"]) or "-", results["cod"], results["mu"], results["ind"])],
    )
    if results["trace"]:
        lines += ["", f"{len(results['trace'])} reduction steps: " + ", ".join(step["kind"] for step in results["trace"])]
    return lines


def _invariants(results: dict) -> List[str]:
    invariants = results.get("invariants", results)
    subsets = invariants["subsets"]
    header = ["target", "cod", "μ", "ind", "ind₂", "Lt"] + list(subsets)
    target = f"{results['germ']}^{results['class']}" if "class" in results else results.get("scene")
    row = [target, invariants["cod"], invariants["mu"], invariants["ind"], invariants["ind2"], invariants["Lt"]]
    lines = ["## Invariants", ""] + _table(header, [row + list(subsets.values())])
    geometry = invariants.get("geometry")
    if geometry:
        lines += ["", "## Frame conditions", ""] + _table(list(geometry), [["yes" if v else "no" for v in geometry.values()]])
    return lines


def _verify(results: dict) -> List[str]:
    lines = [f"## Verification, seed {results['seed']}: {'pass' if results['passed'] else 'FAIL'}", ""]
    lines += _table(("family", "cells", "failed"), [(f, c["cells"], c["failed"]) for f, c in results["families"].items()])
    if results["failures"]:
        lines += ["", "## Failures", ""]
        lines += _table(("family", "cell", "expected", "actual"), [
            (f["family"], f["cell"], f["expected"], f["actual"]) for f in results["failures"]
        ])
    return lines


_RENDERERS = {
    "basis": _basis,
    "action-table": _action_table,
    "classify": _classify,
    "invariants": _invariants,
    "verify": _verify,
}


def render_markdown(report: Report) -> str:
    lines = _RENDERERS[report.command["name"]](report.results)
    if report.notes:
        lines += ["", "Notes:"] + [f"- {note}" for note in report.notes]
    bounds = ", ".join(f"{key} {value}" for key, value in report.bounds.items())
    lines += ["", f"_version {report.version}; {bounds}_"]
    return "\n".join(lines) + "\n"
