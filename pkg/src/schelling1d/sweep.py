"""Grid sweeps over the tolerance square, outcome labels and agreement with the
analytic predictions."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Iterable

import numpy as np

from .dynamics import Dynamic, Termination, simulate
from .numerics import bisect, log_h
from .ring import Scenario, format_tolerance, parse_tolerance
from .structure import RunSummary, run_statistics
from .thresholds import Label, ThresholdSet, classify, thresholds

MASK64 = (1 << 64) - 1

# empirical labels, in precedence order
OUTCOMES = ("GreenTotal", "RedTotal", "GreenAE", "RedAE", "Static", "Unfinished", "Mixed")
ERROR = "Error"

# empirical outcomes that count as agreeing with each decided prediction
COMPATIBLE = {
    Label.STATIC_AE: {"Static"},
    Label.GREEN_TAKEOVER_AE: {"GreenAE", "GreenTotal"},
    Label.RED_TAKEOVER_AE: {"RedAE", "RedTotal"},
    Label.GREEN_AE: {"GreenAE", "GreenTotal"},
    Label.RED_AE: {"RedAE", "RedTotal"},
    Label.GREEN_TOTAL: {"GreenTotal"},
    Label.RED_TOTAL: {"RedTotal"},
}


def _mix64(z: int) -> int:
    """splitmix64 finaliser: a bijection on 64-bit integers."""
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def seed_for_cell(base_seed: int, i: int, j: int, rep: int) -> int:
    """Deterministic per-run seed. Injective in (i, j, rep) for a fixed base seed."""
    if not (0 <= i < 1 << 20 and 0 <= j < 1 << 20 and 0 <= rep < 1 << 24):
        raise ValueError(f"cell index out of range: {(i, j, rep)}")
    packed = (i << 44) | (j << 24) | rep
    return _mix64(packed ^ _mix64(base_seed & MASK64))


def label_outcome(summary: RunSummary, delta: float = 0.05) -> str:
    """Empirical outcome of one run; the first matching label in OUTCOMES wins."""
    if summary.all_green:
        return "GreenTotal"
    if summary.all_red:
        return "RedTotal"
    if summary.final_green_fraction >= 1.0 - delta:
        return "GreenAE"
    if summary.final_green_fraction <= delta:
        return "RedAE"
    if summary.changed_fraction <= delta:
        return "Static"
    if summary.termination is not Termination.FINISHED:
        return "Unfinished"
    return "Mixed"


def majority(labels: Iterable[str]) -> str:
    """Most common label; ties go to the label earliest in OUTCOMES."""
    counts = Counter(labels)
    order = {lab: k for k, lab in enumerate(OUTCOMES + (ERROR,))}
    return min(counts, key=lambda lab: (-counts[lab], order.get(lab, 99)))


@dataclass(frozen=True)
class SweepConfig:
    rho: float
    w: int
    n: int
    dynamic: Dynamic = Dynamic("selective")
    grid: int = 32
    reps: int = 3
    base_seed: int = 0
    max_steps: int | None = None
    delta: float = 0.05
    threads: int = 1
    # the swept ranges; cells split each range evenly and sit at cell centres
    tau_r_span: tuple[Fraction, Fraction] = (Fraction(0), Fraction(1))
    tau_g_span: tuple[Fraction, Fraction] = (Fraction(0), Fraction(1))

    def __post_init__(self):
        if isinstance(self.dynamic, str):
            object.__setattr__(self, "dynamic", Dynamic.parse(self.dynamic))
        if self.grid < 1 or self.reps < 1:
            raise ValueError("grid and reps must be positive")
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho={self.rho} outside (0, 1)")
        if not 0.0 < self.delta < 0.5:
            raise ValueError(f"delta={self.delta} outside (0, 1/2)")
        for name in ("tau_r_span", "tau_g_span"):
            lo, hi = (Fraction(v) if not isinstance(v, str) else parse_span_end(v)
                      for v in getattr(self, name))
            if not 0 <= lo < hi <= 1:
                raise ValueError(f"{name} must satisfy 0 <= lo < hi <= 1")
            object.__setattr__(self, name, (lo, hi))

    def center(self, i: int) -> Fraction:
        """Centre of cell i on the unit range."""
        return Fraction(2 * i + 1, 2 * self.grid)

    def tau_r(self, i: int) -> Fraction:
        lo, hi = self.tau_r_span
        return lo + (hi - lo) * self.center(i)

    def tau_g(self, j: int) -> Fraction:
        lo, hi = self.tau_g_span
        return lo + (hi - lo) * self.center(j)


def parse_span_end(text: str) -> Fraction:
    """0 and 1 are allowed as range ends; anything else must be a tolerance."""
    text = text.strip()
    if text in ("0", "1"):
        return Fraction(int(text))
    return parse_tolerance(text)


@dataclass(frozen=True)
class RepResult:
    i: int            # tau_r index
    j: int            # tau_g index
    rep: int
    seed: int
    outcome: str
    final_green_frac: float
    changed_frac: float
    steps: int
    termination: str


@dataclass
class CellResult:
    tau_r: Fraction
    tau_g: Fraction
    reps: list[RepResult]
    predicted: str

    @property
    def majority(self) -> str:
        return majority(r.outcome for r in self.reps)


@dataclass
class SweepGrid:
    config: SweepConfig
    cells: list[CellResult]
    thresholds: ThresholdSet
    boundary: np.ndarray = field(repr=False)   # (m, 2) points (tau_r, tau_g) on the domination boundary

    def cell(self, i: int, j: int) -> CellResult:
        return self.cells[i * self.config.grid + j]


def _predict(rho: float, tg: Fraction, tr: Fraction, dynamic: Dynamic) -> str:
    if dynamic.kind == "perturbed":
        return "-"
    return classify(Scenario(rho, tg, tr), dynamic).label.value


def _run_one(config: SweepConfig, i: int, j: int, rep: int) -> RepResult:
    seed = seed_for_cell(config.base_seed, i, j, rep)
    try:
        scen = Scenario(config.rho, config.tau_g(j), config.tau_r(i))
        rec = simulate(config.n, config.w, scen, config.dynamic, seed, config.max_steps,
                       record_events=False)
        summ = run_statistics(rec)
        return RepResult(i, j, rep, seed, label_outcome(summ, config.delta),
                         summ.final_green_fraction, summ.changed_fraction, summ.steps,
                         summ.termination.value)
    except Exception as exc:  # keep the sweep going; the row records the failure
        return RepResult(i, j, rep, seed, ERROR, math.nan, math.nan, 0,
                         f"error: {type(exc).__name__}: {exc}".replace(",", ";"))


def domination_boundary(rho: float, points: int = 400) -> np.ndarray:
    """Points (tau_r, tau_g) with h(tau_g, tau_r) = (1 - rho)/rho.

    h decreases in its first argument on the whole square, so for each tau_r
    there is at most one crossing, found by bisection in tau_g.
    """
    target = math.log((1.0 - rho) / rho)
    out = []
    eps = 1e-9
    for tr in (np.arange(points) + 0.5) / points:
        fn = lambda tg: log_h(tg, tr)[0] - target  # noqa: E731
        try:
            tg = bisect(fn, eps, 1.0 - eps, tol=1e-10)
        except ValueError:
            continue
        out.append((float(tr), tg))
    return np.array(out, dtype=float).reshape(-1, 2)


def run_sweep(config: SweepConfig, progress=None) -> SweepGrid:
    """Run every (cell, replicate) and collect results in grid order.

    Seeds depend only on (base_seed, i, j, rep), so the output does not depend on
    the thread count.
    """
    g = config.grid
    jobs = [(i, j, rep) for i in range(g) for j in range(g) for rep in range(config.reps)]
    results: list[RepResult] = []
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            for k, res in enumerate(pool.map(lambda a: _run_one(config, *a), jobs)):
                results.append(res)
                if progress:
                    progress(k + 1, len(jobs))
    else:
        for k, job in enumerate(jobs):
            results.append(_run_one(config, *job))
            if progress:
                progress(k + 1, len(jobs))
    cells = []
    for c in range(g * g):
        i, j = divmod(c, g)
        tr, tg = config.tau_r(i), config.tau_g(j)
        reps = results[c * config.reps:(c + 1) * config.reps]
        cells.append(CellResult(tr, tg, reps, _predict(config.rho, tg, tr, config.dynamic)))
    return SweepGrid(config, cells, thresholds(config.rho), domination_boundary(config.rho))


# -- agreement ----------------------------------------------------------------------

@dataclass(frozen=True)
class Disagreement:
    tau_r: Fraction
    tau_g: Fraction
    predicted: str
    observed: str
    distance: float   # to the nearest analytic boundary line or curve


@dataclass(frozen=True)
class AgreementReport:
    decided: int
    agreeing: int
    disagreements: list[Disagreement]

    @property
    def fraction(self) -> float:
        return self.agreeing / self.decided if self.decided else math.nan


def boundary_distance(rho: float, tau_g: float, tau_r: float, curve: np.ndarray) -> float:
    t = thresholds(rho)
    lines_g = (t.kappa_g, 0.5, t.mu_g, rho / 2, (1 + rho) / 2)
    lines_r = (t.kappa_r, 0.5, t.mu_r, (1 - rho) / 2, 1 - rho / 2)
    d = min(min(abs(tau_g - v) for v in lines_g), min(abs(tau_r - v) for v in lines_r))
    if len(curve):
        d = min(d, float(np.min(np.hypot(curve[:, 0] - tau_r, curve[:, 1] - tau_g))))
    return d


def agreement(grid: SweepGrid) -> AgreementReport:
    """Compare each decided prediction with the majority empirical outcome."""
    decided = agreeing = 0
    bad = []
    for cell in grid.cells:
        try:
            label = Label(cell.predicted)
        except ValueError:
            continue
        if not label.decided:
            continue
        decided += 1
        obs = cell.majority
        if obs in COMPATIBLE[label]:
            agreeing += 1
        else:
            bad.append(Disagreement(cell.tau_r, cell.tau_g, cell.predicted, obs,
                                    boundary_distance(grid.config.rho, float(cell.tau_g),
                                                      float(cell.tau_r), grid.boundary)))
    bad.sort(key=lambda d: d.distance)
    return AgreementReport(decided, agreeing, bad)


# -- CSV and summary ----------------------------------------------------------------

COLUMNS = ("tau_r", "tau_g", "rep", "seed", "outcome", "final_green_frac", "changed_frac",
           "steps", "termination", "predicted")


def write_csv(grid: SweepGrid, out: IO[str]) -> None:
    """One row per replicate, preceded by '#'-comment lines holding the configuration."""
    c = grid.config
    out.write(f"# rho={c.rho!r} w={c.w} n={c.n} dynamic={c.dynamic} grid={c.grid} "
              f"reps={c.reps} base_seed={c.base_seed} delta={c.delta!r} "
              f"max_steps={'-' if c.max_steps is None else c.max_steps} "
              f"tau_r_span={_span(c.tau_r_span)} tau_g_span={_span(c.tau_g_span)}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COLUMNS)
    for cell in grid.cells:
        for r in cell.reps:
            writer.writerow((format_tolerance(cell.tau_r), format_tolerance(cell.tau_g), r.rep,
                             r.seed, r.outcome, f"{r.final_green_frac:.6f}",
                             f"{r.changed_frac:.6f}", r.steps, r.termination, cell.predicted))


def _span(span) -> str:
    return ":".join(str(v) for v in span)


def _read_span(text: str) -> tuple[Fraction, Fraction]:
    lo, hi = text.split(":")
    return Fraction(lo), Fraction(hi)


def read_csv(src: IO[str]) -> SweepGrid:
    text = src.read()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("sweep CSV lacks its configuration line")
    meta = dict(kv.split("=", 1) for kv in lines[0][1:].split())
    config = SweepConfig(rho=float(meta["rho"]), w=int(meta["w"]), n=int(meta["n"]),
                         dynamic=Dynamic.parse(meta["dynamic"]), grid=int(meta["grid"]),
                         reps=int(meta["reps"]), base_seed=int(meta["base_seed"]),
                         delta=float(meta["delta"]),
                         max_steps=None if meta.get("max_steps", "-") == "-"
                         else int(meta["max_steps"]),
                         tau_r_span=_read_span(meta.get("tau_r_span", "0:1")),
                         tau_g_span=_read_span(meta.get("tau_g_span", "0:1")))
    reader = csv.DictReader(io.StringIO("\n".join(lines[1:])))
    cells: dict[tuple[Fraction, Fraction], CellResult] = {}
    index_r = {config.tau_r(k): k for k in range(config.grid)}
    index_g = {config.tau_g(k): k for k in range(config.grid)}
    for row in reader:
        tr, tg = parse_tolerance(row["tau_r"]), parse_tolerance(row["tau_g"])
        key = (tr, tg)
        if key not in cells:
            cells[key] = CellResult(tr, tg, [], row["predicted"])
        cells[key].reps.append(RepResult(index_r[tr], index_g[tg], int(row["rep"]), int(row["seed"]),
                                         row["outcome"], float(row["final_green_frac"]),
                                         float(row["changed_frac"]), int(row["steps"]),
                                         row["termination"]))
    ordered = sorted(cells.values(), key=lambda c: (c.tau_r, c.tau_g))
    return SweepGrid(config, ordered, thresholds(config.rho), domination_boundary(config.rho))


def summary_text(grid: SweepGrid) -> str:
    """Key-value summary: configuration, thresholds, outcome counts and agreement."""
    c, t = grid.config, grid.thresholds
    rep = agreement(grid)
    counts = Counter(cell.majority for cell in grid.cells)
    lines = [f"rho {c.rho!r}", f"w {c.w}", f"n {c.n}", f"dynamic {c.dynamic}",
             f"grid {c.grid}", f"reps {c.reps}", f"base_seed {c.base_seed}",
             f"kappa_g {t.kappa_g:.9f}", f"kappa_r {t.kappa_r:.9f}",
             f"mu_g {t.mu_g:.9f}", f"mu_r {t.mu_r:.9f}"]
    lines += [f"cells_{lab} {counts.get(lab, 0)}" for lab in OUTCOMES + (ERROR,)]
    lines += [f"decided {rep.decided}", f"agreeing {rep.agreeing}",
              f"agreement {rep.fraction:.4f}"]
    for d in rep.disagreements:
        lines.append(f"disagreement tau_r={format_tolerance(d.tau_r)} "
                     f"tau_g={format_tolerance(d.tau_g)} predicted={d.predicted} "
                     f"observed={d.observed} distance={d.distance:.4f}")
    return "\n".join(lines) + "\n"
