"""Merge JSON artifacts into one CSV / Markdown summary and render figures.

Each artifact is flattened to (source, artifact, key, value) rows. Figures are
drawn for the artifacts that carry curves: the growth experiment (mean H^s
increment against the fitted and reference quadratics), the remainder norm of
its representative trajectory on log axes, and gamma scans over s.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["collect", "flatten", "build_report"]

_SKIP = {"times", "mean_increment", "remainder", "scan", "checks", "created"}


def collect(inputs: Iterable[str | Path]) -> list[tuple[Path, dict]]:
    """Artifacts (JSON objects with an ``artifact`` key) under the given paths, sorted."""
    found = []
    for item in inputs:
        p = Path(item)
        files = sorted(p.glob("*.json")) if p.is_dir() else [p]
        for f in files:
            try:
                obj = json.loads(f.read_text())
            except (OSError, json.JSONDecodeError):
                continue
            if isinstance(obj, dict) and "artifact" in obj and obj["artifact"] != "report":
                found.append((f, obj))
    return sorted(found, key=lambda x: str(x[0]))


def flatten(obj: dict, prefix: str = "") -> list[tuple[str, object]]:
    rows = []
    for k in sorted(obj):
        v = obj[k]
        if k in _SKIP and not prefix:
            continue
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            rows.extend(flatten(v, key + "."))
        elif isinstance(v, list):
            if all(isinstance(x, (int, float)) for x in v) and len(v) <= 4:
                rows.extend((f"{key}[{i}]", x) for i, x in enumerate(v))
        else:
            rows.append((key, v))
    return rows


def _mc_rows(obj: dict) -> list[tuple[str, object]]:
    rows = []
    for c in obj.get("checks", []):
        for k in ("mean", "stderr", "expected", "status"):
            rows.append((f"check.{c['name']}.{k}", c[k]))
    return rows


def _plot_growth(obj: dict, path: Path) -> None:
    t = obj["times"]
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.plot(t, obj["mean_increment"], "o", ms=4, label="ensemble mean")
    c2, c3 = obj["fitted_quadratic"], obj.get("fitted_cubic", 0.0)
    ax.plot(t, [c2 * x * x + c3 * x**3 for x in t], "-", label="least-squares fit")
    ax.plot(t, [obj["reference"] * x * x for x in t], "--", label=r"$\kappa\gamma\,t^2$")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$E\|\Omega(t)\|^2_{H^s} - E\|\Omega_0\|^2_{H^s}$")
    ax.set_title(f"{obj['sequence']}, s={obj['s']:g}, N={obj['truncation']}")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _plot_remainder(obj: dict, path: Path) -> None:
    pts = [(t, w) for t, w in obj.get("remainder", []) if t > 0 and w > 0]
    if len(pts) < 2:
        return
    t, w = zip(*pts)
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.loglog(t, w, "o-", ms=3, label=r"$\|w(t)\|_{H^s}$")
    ax.loglog(t, [w[-1] * (x / t[-1]) ** 3 for x in t], ":", label=r"slope 3")
    ax.set_xlabel("t")
    ax.legend(frameon=False)
    slope = obj.get("remainder_slope")
    if slope is not None:
        ax.set_title(f"fitted slope {slope:.3f}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _plot_scan(obj: dict, path: Path) -> None:
    vals = obj["scan"]["values"]
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.plot([v["s"] for v in vals], [v["gamma_bare"] for v in vals], "o-", ms=3)
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.set_xlabel("s")
    ax.set_ylabel(r"$\gamma_s$ (bare)")
    ax.set_title(obj["sequence"])
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _markdown(rows: list[dict], figures: list[str]) -> str:
    lines = ["# euler-gauss report", ""]
    current = None
    for r in rows:
        if r["source"] != current:
            current = r["source"]
            lines += ["", f"## {r['artifact']} ({current})", "", "| key | value |", "|---|---|"]
        lines.append(f"| {r['key']} | {r['value']} |")
    if figures:
        lines += ["", "## Figures", ""]
        lines += [f"![{Path(f).stem}]({f})" for f in figures]
    return "\n".join(lines) + "\n"


def build_report(inputs: Iterable[str | Path], out_dir: Path) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts = collect(inputs)
    rows, figures = [], []
    for path, obj in artifacts:
        flat = flatten(obj) + (_mc_rows(obj) if obj["artifact"] == "mc-verify" else [])
        for key, value in flat:
            rows.append({"source": path.name, "artifact": obj["artifact"], "key": key, "value": value})
        stem = path.stem
        if obj["artifact"] == "evolve":
            f = out_dir / f"{stem}_growth.png"
            _plot_growth(obj, f)
            figures.append(f.name)
            f = out_dir / f"{stem}_remainder.png"
            _plot_remainder(obj, f)
            if f.exists():
                figures.append(f.name)
        if obj["artifact"] == "gamma" and "scan" in obj:
            f = out_dir / f"{stem}_scan.png"
            _plot_scan(obj, f)
            figures.append(f.name)
    with open(out_dir / "report.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["source", "artifact", "key", "value"])
        w.writeheader()
        w.writerows(rows)
    (out_dir / "report.md").write_text(_markdown(rows, figures))
    return {"artifact": "report", "sources": [p.name for p, _ in artifacts], "rows": rows, "figures": figures}
