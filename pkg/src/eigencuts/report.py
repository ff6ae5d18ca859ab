"""Experiment reports: canonical JSON, shipped schema, benchmark CSV tables."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from importlib import resources

from .iogen import RNG_ALGORITHM

# Gap values sit on the sandwich z_sd <= z_ref <= z_sp; both quotients must
# stay above 1 up to solver noise.
GAP_FLOOR_SLACK = 1e-6

# One max-cut row per instance; GW and OPT stay blank unless computed.
MAXCUT_CSV_COLUMNS = ("Graph", "Optimality gap", "LP Gap", "LP cut value",
                      "Greedy", "sweep", "GW", "OPT")
SPCA_CSV_COLUMNS = ("Matrix", "k", "support", "objective", "z_lspca", "z_ref",
                    "quotient", "explained_variance")
THETA_CSV_COLUMNS = ("Graph", "z_ref", "cuts", "final_ratio", "policy", "socp")


def _version() -> str:
    from . import __version__

    return __version__


@dataclass
class ExperimentReport:
    """One experiment run in machine-readable form.

    values holds the computed bounds (z_sp, z_sd, z_ref, eigenvalue_bound,
    ...), gaps the derived quotients, statuses one solver status per
    computation.  Identical flags and seed reproduce an identical report
    except for the timing block.
    """

    command: str
    source: str
    n: int
    seed: int | None = None
    m_total: float | None = None
    values: dict = field(default_factory=dict)
    gaps: dict = field(default_factory=dict)
    best_cut: dict | None = None
    baselines: dict = field(default_factory=dict)
    components: list | None = None
    traces: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    statuses: dict = field(default_factory=dict)
    rng: str = RNG_ALGORITHM
    version: str = field(default_factory=_version)

    def validate(self) -> None:
        if self.command not in ("maxcut", "spca", "theta"):
            raise ValueError(f"unknown command {self.command!r}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        lp_gap = self.gaps.get("lp_gap")
        opt_gap = self.gaps.get("opt_gap")
        if lp_gap is not None and opt_gap is not None:
            if not (lp_gap >= opt_gap - GAP_FLOOR_SLACK
                    and opt_gap >= 1.0 - GAP_FLOOR_SLACK):
                raise ValueError(
                    f"gap sandwich violated: lp_gap={lp_gap}, opt_gap={opt_gap}")

    def all_optimal(self) -> bool:
        return all(s == "optimal" for s in self.statuses.values())

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2,
                          allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))


def write_report(report: ExperimentReport, path: str) -> None:
    report.validate()
    with open(path, "w") as fh:
        fh.write(report.to_json())


def read_report(path: str) -> ExperimentReport:
    with open(path) as fh:
        return ExperimentReport.from_json(fh.read())


def report_schema() -> dict:
    """The shipped JSON schema every report must validate against."""
    text = resources.files("eigencuts").joinpath(
        "schema/experiment_report.schema.json").read_text()
    return json.loads(text)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _maxcut_row(r: ExperimentReport) -> list:
    return [r.source,
            _fmt(r.gaps.get("opt_gap")),
            _fmt(r.gaps.get("lp_gap")),
            _fmt(r.best_cut["value"] if r.best_cut else None),
            _fmt(r.baselines.get("greedy")),
            _fmt(r.baselines.get("sweep")),
            _fmt(r.values.get("z_gw_cut")),
            _fmt(r.values.get("opt"))]


def _spca_rows(r: ExperimentReport) -> list:
    rows = []
    for comp in r.components or []:
        rows.append([r.source, _fmt(comp.get("k")),
                     " ".join(str(i) for i in comp.get("support", [])),
                     _fmt(comp.get("objective")), _fmt(comp.get("z_lspca")),
                     _fmt(comp.get("z_ref")), _fmt(comp.get("quotient")),
                     _fmt(r.values.get("explained_variance"))])
    return rows


def _theta_row(r: ExperimentReport) -> list:
    trace = r.traces.get("ratio") or []
    cuts, final = (trace[-1] if trace else (None, None))
    return [r.source, _fmt(r.values.get("z_ref")), _fmt(cuts), _fmt(final),
            r.values.get("policy", ""), _fmt(r.values.get("socp"))]


def aggregate_csv(reports) -> str:
    """One-row-per-report CSV table for a batch of same-command reports."""
    reports = list(reports)
    if not reports:
        return ""
    command = reports[0].command
    if any(r.command != command for r in reports):
        raise ValueError("cannot aggregate reports from different commands")
    out = io.StringIO()
    writer = csv.writer(out)
    if command == "maxcut":
        writer.writerow(MAXCUT_CSV_COLUMNS)
        for r in reports:
            writer.writerow(_maxcut_row(r))
    elif command == "spca":
        writer.writerow(SPCA_CSV_COLUMNS)
        for r in reports:
            writer.writerows(_spca_rows(r))
    else:
        writer.writerow(THETA_CSV_COLUMNS)
        for r in reports:
            writer.writerow(_theta_row(r))
    return out.getvalue()


def trace_csv(report: ExperimentReport, name: str) -> str:
    """Plot-ready two-column CSV of one named trace (cuts, value)."""
    if name not in report.traces:
        raise KeyError(f"report has no trace {name!r}; "
                       f"available: {sorted(report.traces)}")
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(("cuts", name))
    for cuts, value in report.traces[name]:
        writer.writerow((cuts, _fmt(value)))
    return out.getvalue()
