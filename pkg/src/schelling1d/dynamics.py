"""Update rules, the run loop, run records and the harmony monitor."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, NamedTuple

import numpy as np

from . import _kernels as K
from .ring import (Color, Ring, Scenario, format_tolerance, read_header, read_runs,
                   scenario_from_header, write_runs)

EVENT_CHUNK = 1 << 16
_ZOBRIST_SEED = 0x5CE11


@dataclass(frozen=True)
class Dynamic:
    """Which nodes may move at each step.

    selective: a uniformly chosen hopeful node flips.
    incremental: a uniformly chosen unhappy node flips.
    synchronous: every unhappy node flips at once.
    perturbed: with probability epsilon a uniform random node flips, otherwise
    an incremental step is taken.
    """
    kind: str
    epsilon: float | None = None

    KINDS = ("selective", "incremental", "synchronous", "perturbed")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown dynamic {self.kind!r}")
        if self.kind == "perturbed":
            if self.epsilon is None or not 0.0 < float(self.epsilon) < 1.0:
                raise ValueError(f"perturbation epsilon must lie in (0, 1), got {self.epsilon}")
            object.__setattr__(self, "epsilon", float(self.epsilon))
        elif self.epsilon is not None:
            raise ValueError(f"{self.kind} takes no epsilon")

    @classmethod
    def parse(cls, text: str) -> "Dynamic":
        kind, _, eps = text.strip().partition(":")
        if kind == "perturbed":
            if not eps:
                raise ValueError("perturbed needs an epsilon, e.g. perturbed:0.01")
            return cls(kind, float(eps))
        if eps:
            raise ValueError(f"{kind} takes no parameter")
        return cls(kind)

    @property
    def sequential(self) -> bool:
        return self.kind != "synchronous"

    def __str__(self) -> str:
        return f"perturbed:{self.epsilon!r}" if self.kind == "perturbed" else self.kind


SELECTIVE = Dynamic("selective")
INCREMENTAL = Dynamic("incremental")
SYNCHRONOUS = Dynamic("synchronous")

_MODES = {"selective": 0, "incremental": 1, "perturbed": 2}


class Termination(enum.Enum):
    FINISHED = "finished"
    STEP_CAP = "step_cap"
    CYCLE = "cycle"


class ChangeEvent(NamedTuple):
    time: int
    node: int
    new_color: Color


class HarmonyViolation(RuntimeError):
    """A flip failed to raise the harmony index, or the index left its bound."""

    def __init__(self, message: str, **diagnostic):
        super().__init__(message)
        self.diagnostic = diagnostic


def harmony_chi(scenario: Scenario, w: int) -> Fraction | None:
    """Weight for green agreement under which every unhappy flip raises harmony.

    Returns the midpoint of the admissible interval, or None (with a warning)
    when that interval is empty.
    """
    tg, tr = scenario.tau_g, scenario.tau_r
    if tg + tr <= 1:
        lo, hi = tr / (1 - tr), (1 - tg) / tg
        return (lo + hi) / 2
    e = Fraction(1, 2 * w + 1)
    if tg - e <= 0:
        warnings.warn(f"no harmony weight for {scenario} at w={w}")
        return None
    lo = (1 - tg + e) / (tg - e)
    hi = (tr - e) / (1 - tr + e)
    if not lo < hi:
        warnings.warn(f"harmony interval ({lo}, {hi}) is empty for {scenario} at w={w}")
        return None
    return (lo + hi) / 2


def harmony_index(ring: Ring, chi: Fraction) -> Fraction:
    """Sum over nodes of weight * (same-colour neighbours / W), weight chi for green, 1 for red."""
    gc = ring.green_counts
    green = ring.colors == 1
    same_g = int(gc[green].sum(dtype=np.int64))
    same_r = int((ring.W - gc[~green]).sum(dtype=np.int64))
    return (chi * same_g + same_r) / ring.W


@dataclass
class HarmonyMonitor:
    """Checks that every flip strictly raises the harmony index.

    With chi = p/q and c the pre-flip same-colour count of the flipped node
    (self included), the change of the index is D / (W q) where
    D = 2 W (p if the node turns green else q) - (p + q)(2c - 1).
    """
    chi: Fraction
    W: int
    n: int
    index: Fraction
    checked: int = 0

    @classmethod
    def for_ring(cls, ring: Ring, chi: Fraction) -> "HarmonyMonitor":
        return cls(chi, ring.W, ring.n, harmony_index(ring, chi))

    @property
    def bound(self) -> Fraction:
        return self.n * max(Fraction(1), self.chi)

    def check(self, times, nodes, new_colors, pre_counts) -> None:
        p, q, W = self.chi.numerator, self.chi.denominator, self.W
        big = max(p, q) * 4 * W * W >= 2**62
        dtype = object if big else np.int64
        new = np.asarray(new_colors).astype(dtype)
        pre = np.asarray(pre_counts).astype(dtype)
        # the node had the other colour before the flip
        same = np.where(new == 1, W - pre, pre)
        D = 2 * W * np.where(new == 1, p, q) - (p + q) * (2 * same - 1)
        bad = np.flatnonzero(D <= 0)
        if bad.size:
            i = int(bad[0])
            raise HarmonyViolation(
                f"flip of node {int(nodes[i])} at step {int(times[i])} changes harmony by "
                f"{Fraction(int(D[i]), W * q)}",
                time=int(times[i]), node=int(nodes[i]), new_color=int(new[i]),
                pre_green_count=int(pre[i]), delta=Fraction(int(D[i]), W * q))
        self.index += Fraction(int(D.sum()), W * q)
        self.checked += len(D)
        if self.index > self.bound:
            raise HarmonyViolation(f"harmony {self.index} exceeds bound {self.bound}",
                                   index=self.index, bound=self.bound)


@dataclass(eq=False)
class RunRecord:
    scenario: Scenario
    dynamic: Dynamic
    w: int
    seed: int | None
    initial_colors: np.ndarray
    final_colors: np.ndarray
    steps: int
    termination: Termination
    cycle_period: int | None = None
    changed_count: int = 0
    event_time: np.ndarray | None = None
    event_node: np.ndarray | None = None
    event_color: np.ndarray | None = None
    harmony: Fraction | None = field(default=None)

    @property
    def n(self) -> int:
        return self.initial_colors.shape[0]

    @property
    def events_recorded(self) -> bool:
        return self.event_time is not None

    @property
    def events(self) -> list[ChangeEvent]:
        if self.event_time is None:
            return []
        return [ChangeEvent(int(t), int(x), Color(int(c)))
                for t, x, c in zip(self.event_time, self.event_node, self.event_color)]

    @property
    def final_green_fraction(self) -> float:
        return float(self.final_colors.sum(dtype=np.int64)) / self.n

    @property
    def changed_fraction(self) -> float:
        return self.changed_count / self.n


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def zobrist_keys(n: int) -> tuple[np.ndarray, np.ndarray]:
    g = np.random.default_rng(_ZOBRIST_SEED)
    a = g.integers(0, 2**64, size=n, dtype=np.uint64)
    b = g.integers(0, 2**64, size=n, dtype=np.uint64)
    return a, b


def _step_sequential(ring: Ring, scenario: Scenario, dynamic: Dynamic, rng) -> ChangeEvent | None:
    ring.bind(scenario)
    buf = [np.zeros(1, dtype=np.int64) for _ in range(3)] + [np.zeros(1, dtype=np.int64)]
    changed = np.zeros(ring.n, dtype=np.uint8)
    eps = dynamic.epsilon or 0.0
    t, ne, _, _ = K.run_sequential(*ring.kernel_state(), ring.w, ring.need_g, ring.need_r,
                                   _MODES[dynamic.kind], eps, _as_rng(rng), ring.time,
                                   ring.time + 1, *buf, True, changed, 0)
    ring.time = t
    if ne == 0:
        return None
    return ChangeEvent(int(buf[0][0]), int(buf[1][0]), Color(int(buf[2][0])))


def step_selective(ring: Ring, scenario: Scenario, rng) -> ChangeEvent | None:
    """Flip one uniformly chosen hopeful node; None if there is none."""
    return _step_sequential(ring, scenario, SELECTIVE, rng)


def step_incremental(ring: Ring, scenario: Scenario, rng) -> ChangeEvent | None:
    """Flip one uniformly chosen unhappy node; None if there is none."""
    return _step_sequential(ring, scenario, INCREMENTAL, rng)


def step_perturbed(ring: Ring, scenario: Scenario, epsilon: float, rng) -> ChangeEvent | None:
    """One perturbed step. A step that finds nobody to move returns None but still counts."""
    return _step_sequential(ring, scenario, Dynamic("perturbed", epsilon), rng)


def step_synchronous(ring: Ring, scenario: Scenario) -> list[ChangeEvent]:
    """Flip all currently unhappy nodes simultaneously."""
    ring.bind(scenario)
    n = ring.n
    buf = np.empty(n, dtype=np.int64)
    zeros = np.zeros(n, dtype=np.uint64)
    k, _ = K.sync_step(*ring.kernel_state(), ring.w, ring.need_g, ring.need_r, buf,
                       zeros, zeros, np.zeros(2, dtype=np.uint64), np.zeros(n, dtype=np.uint8))
    if k == 0:
        return []
    ring.time += 1
    nodes = buf[:k]
    return [ChangeEvent(ring.time, int(x), Color(int(ring.colors[x]))) for x in nodes]


def run(ring: Ring, scenario: Scenario, dynamic: Dynamic, max_steps: int | None = None,
        rng=None, record_events: bool = True, monitor: bool | HarmonyMonitor = False
        ) -> RunRecord:
    """Run until the dynamic has nothing left to do, a cycle repeats, or max_steps.

    The ring is advanced in place. `rng` is a numpy Generator or a seed. Without
    one, a stream derived from the ring's seed (distinct from the stream that drew
    its colours) is used. `monitor=True` attaches a harmony monitor built from
    harmony_chi; a HarmonyViolation is raised as soon as a recorded flip fails
    the check.
    """
    ring.bind(scenario)
    if max_steps is None:
        max_steps = 50 * ring.n
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    if isinstance(dynamic, str):
        dynamic = Dynamic.parse(dynamic)
    seed = rng if isinstance(rng, (int, np.integer)) else ring.seed
    if dynamic.kind == "synchronous":
        gen = None
    elif rng is None:
        if ring.seed is None:
            raise ValueError("pass rng: the ring has no seed to derive one from")
        gen = np.random.default_rng([ring.seed, 1])
    else:
        gen = _as_rng(rng)

    if monitor is True:
        chi = harmony_chi(scenario, ring.w)
        monitor = HarmonyMonitor.for_ring(ring, chi) if chi is not None else None
    if monitor and dynamic.kind not in ("selective", "incremental"):
        raise ValueError("the harmony monitor applies to selective and incremental runs only")

    initial = ring.colors.copy()
    if dynamic.kind == "synchronous":
        rec = _run_synchronous(ring, max_steps, record_events)
    else:
        rec = _run_sequential(ring, dynamic, gen, max_steps, record_events, monitor or None)
    steps, term, period, changed, events = rec
    return RunRecord(scenario=scenario, dynamic=dynamic, w=ring.w,
                     seed=None if seed is None else int(seed), initial_colors=initial,
                     final_colors=ring.colors.copy(), steps=steps, termination=term,
                     cycle_period=period, changed_count=changed,
                     event_time=events[0] if record_events else None,
                     event_node=events[1] if record_events else None,
                     event_color=events[2] if record_events else None,
                     harmony=monitor.index if monitor else None)


def simulate(n: int, w: int, scenario: Scenario, dynamic: Dynamic | str, seed: int,
             max_steps: int | None = None, record_events: bool = True,
             monitor: bool | HarmonyMonitor = False) -> RunRecord:
    """Draw a ring and run it, both from one generator seeded with `seed`."""
    from .ring import init_ring

    gen = np.random.default_rng(seed)
    ring = init_ring(n, w, scenario.rho, gen, scenario)
    ring.seed = seed
    rec = run(ring, scenario, dynamic, max_steps, gen, record_events, monitor)
    rec.seed = seed
    return rec


def _concat(parts, dtype):
    return np.concatenate(parts).astype(dtype) if parts else np.zeros(0, dtype=dtype)


def _run_sequential(ring, dynamic, gen, max_steps, record_events, monitor):
    n = ring.n
    need_buffer = record_events or monitor is not None
    size = EVENT_CHUNK if need_buffer else 1
    ev = [np.empty(size, dtype=np.int64) for _ in range(4)]
    changed = np.zeros(n, dtype=np.uint8)
    n_changed = 0
    parts = ([], [], [])
    t0 = ring.time
    t = t0
    eps = dynamic.epsilon or 0.0
    mode = _MODES[dynamic.kind]
    while True:
        t, ne, n_changed, code = K.run_sequential(
            *ring.kernel_state(), ring.w, ring.need_g, ring.need_r, mode, eps, gen,
            t, t0 + max_steps, *ev, need_buffer, changed, n_changed)
        if ne:
            if monitor is not None:
                monitor.check(ev[0][:ne], ev[1][:ne], ev[2][:ne], ev[3][:ne])
            if record_events:
                for store, arr in zip(parts, ev[:3]):
                    store.append(arr[:ne].copy())
        if code != K.EXIT_BUFFER:
            break
    ring.time = t
    term = Termination.FINISHED if code == K.EXIT_FINISHED else Termination.STEP_CAP
    events = (_concat(parts[0], np.int64), _concat(parts[1], np.int64),
              _concat(parts[2], np.uint8))
    return t - t0, term, None, n_changed, events


def _run_synchronous(ring, max_steps, record_events):
    n = ring.n
    za, zb = zobrist_keys(n)
    hashes = np.zeros(2, dtype=np.uint64)
    hashes[0] = np.bitwise_xor.reduce(za[ring.colors == 1]) if ring.colors.any() else 0
    hashes[1] = np.bitwise_xor.reduce(zb[ring.colors == 1]) if ring.colors.any() else 0
    seen = {(int(hashes[0]), int(hashes[1])): 0}
    buf = np.empty(n, dtype=np.int64)
    changed = np.zeros(n, dtype=np.uint8)
    n_changed = 0
    parts = ([], [], [])
    term, period = Termination.STEP_CAP, None
    steps = 0
    while steps < max_steps:
        k, fresh = K.sync_step(*ring.kernel_state(), ring.w, ring.need_g, ring.need_r, buf,
                               za, zb, hashes, changed)
        if k == 0:
            term = Termination.FINISHED
            break
        steps += 1
        ring.time += 1
        n_changed += fresh
        if record_events:
            nodes = buf[:k].copy()
            parts[0].append(np.full(k, ring.time, dtype=np.int64))
            parts[1].append(nodes)
            parts[2].append(ring.colors[nodes])
        key = (int(hashes[0]), int(hashes[1]))
        if key in seen:
            term, period = Termination.CYCLE, steps - seen[key]
            break
        seen[key] = steps
    events = (_concat(parts[0], np.int64), _concat(parts[1], np.int64),
              _concat(parts[2], np.uint8))
    return steps, term, period, n_changed, events


def replay(initial_colors: np.ndarray, event_node: np.ndarray, event_color: np.ndarray
           ) -> np.ndarray:
    """Apply recorded colour changes to a copy of the initial colours."""
    colors = np.array(initial_colors, dtype=np.uint8, copy=True)
    nodes = np.asarray(event_node, dtype=np.int64)
    if nodes.size:
        # numpy leaves the winner among repeated indices unspecified, so pick the last explicitly
        uniq, first_rev = np.unique(nodes[::-1], return_index=True)
        colors[uniq] = np.asarray(event_color, dtype=np.uint8)[nodes.size - 1 - first_rev]
    return colors


# -- text serialisation -------------------------------------------------------------
#
#   schelling-run 1
#   n, w, seed, rho, tau_g, tau_r, dynamic, steps, termination, cycle_period,
#   changed, harmony            (one "key value" per line)
#   initial                     run-length block as in ring files, closed by "end"
#   final                       same
#   events <count or ->         then <count> lines "time node G|R"

def dump_run(rec: RunRecord, out: IO[str]) -> None:
    s = rec.scenario
    out.write("schelling-run 1\n")
    for key, value in (("n", rec.n), ("w", rec.w), ("seed", "-" if rec.seed is None else rec.seed),
                       ("rho", repr(s.rho)), ("tau_g", format_tolerance(s.tau_g)),
                       ("tau_r", format_tolerance(s.tau_r)), ("dynamic", rec.dynamic),
                       ("steps", rec.steps), ("termination", rec.termination.value),
                       ("cycle_period", "-" if rec.cycle_period is None else rec.cycle_period),
                       ("changed", rec.changed_count),
                       ("harmony", "-" if rec.harmony is None else rec.harmony)):
        out.write(f"{key} {value}\n")
    out.write("initial\n")
    write_runs(out, rec.initial_colors)
    out.write("final\n")
    write_runs(out, rec.final_colors)
    if not rec.events_recorded:
        out.write("events -\n")
        return
    out.write(f"events {len(rec.event_time)}\n")
    letters = np.where(rec.event_color == 1, "G", "R")
    for t, x, c in zip(rec.event_time.tolist(), rec.event_node.tolist(), letters.tolist()):
        out.write(f"{t} {x} {c}\n")


def load_run(src: IO[str]) -> RunRecord:
    lines = iter(src)
    head = read_header(lines, "schelling-run 1")
    initial = read_runs(lines)
    if next(lines).strip() != "final":
        raise ValueError("missing final block")
    final = read_runs(lines)
    key, _, count = next(lines).strip().partition(" ")
    if key != "events":
        raise ValueError("missing events block")
    times = nodes = colors = None
    if count != "-":
        m = int(count)
        times = np.empty(m, dtype=np.int64)
        nodes = np.empty(m, dtype=np.int64)
        colors = np.empty(m, dtype=np.uint8)
        for i in range(m):
            a, b, c = next(lines).split()
            times[i], nodes[i], colors[i] = int(a), int(b), c == "G"
    scenario = scenario_from_header(head)
    opt = lambda v: None if v == "-" else int(v)  # noqa: E731
    harmony = None if head["harmony"] == "-" else Fraction(head["harmony"])
    return RunRecord(scenario=scenario, dynamic=Dynamic.parse(head["dynamic"]), w=int(head["w"]),
                     seed=opt(head["seed"]), initial_colors=initial, final_colors=final,
                     steps=int(head["steps"]), termination=Termination(head["termination"]),
                     cycle_period=opt(head["cycle_period"]), changed_count=int(head["changed"]),
                     event_time=times, event_node=nodes, event_color=colors, harmony=harmony)
