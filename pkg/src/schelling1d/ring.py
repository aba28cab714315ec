"""The ring of agents: colours, neighbourhood counts and status bookkeeping."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Iterable

import numpy as np

from . import _kernels as K

MAX_DENOMINATOR = 10**9


class Color(enum.IntEnum):
    RED = 0
    GREEN = 1

    @property
    def other(self) -> "Color":
        return Color(1 - self)


class NodeStatus(enum.Enum):
    HAPPY = "happy"
    UNHAPPY_HOPEFUL = "hopeful"
    UNHAPPY_HOPELESS = "hopeless"


_STATUS_CODES = {K.HAPPY: NodeStatus.HAPPY, K.HOPELESS: NodeStatus.UNHAPPY_HOPELESS,
                 K.HOPEFUL: NodeStatus.UNHAPPY_HOPEFUL}

_DECIMAL = re.compile(r"^\s*0?\.(\d{1,9})\s*$")


def parse_tolerance(text: str) -> Fraction:
    """Parse a decimal tolerance such as "0.38" into an exact fraction.

    At most 9 fractional digits, and the value must lie strictly between 0 and 1.
    A plain "a/b" form is accepted as well.
    """
    if "/" in text:
        try:
            value = Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed tolerance {text!r}") from exc
        return as_tolerance(value)
    m = _DECIMAL.match(text)
    if not m:
        raise ValueError(f"malformed tolerance {text!r}: expected a decimal in (0, 1) "
                         "with at most 9 digits")
    digits = m.group(1)
    return as_tolerance(Fraction(int(digits), 10 ** len(digits)))


def as_tolerance(value) -> Fraction:
    """Coerce str, Fraction, int pair or float to a validated tolerance.

    Floats go through their shortest decimal repr, so 0.38 becomes 19/50.
    """
    if isinstance(value, str):
        return parse_tolerance(value)
    if isinstance(value, float):
        return parse_tolerance(repr(value))
    if isinstance(value, tuple):
        value = Fraction(*value)
    value = Fraction(value)
    if not 0 < value < 1:
        raise ValueError(f"tolerance {value} outside (0, 1)")
    if value.denominator > MAX_DENOMINATOR:
        raise ValueError(f"tolerance denominator {value.denominator} exceeds 10^9")
    return value


def format_tolerance(t: Fraction) -> str:
    """Terminating decimals print as decimals, anything else as p/q."""
    d = t.denominator
    e2 = e5 = 0
    while d % 2 == 0:
        d //= 2
        e2 += 1
    while d % 5 == 0:
        d //= 5
        e5 += 1
    if d != 1:
        return f"{t.numerator}/{t.denominator}"
    digits = max(e2, e5, 1)
    scaled = t * 10**digits
    return f"0.{int(scaled):0{digits}d}"


def need_count(tau: Fraction, W: int) -> int:
    """Smallest same-colour count c with c >= tau * W."""
    return -((-tau.numerator * W) // tau.denominator)


@dataclass(frozen=True)
class Scenario:
    """Initial green probability plus the two colour tolerances."""
    rho: float
    tau_g: Fraction
    tau_r: Fraction

    def __post_init__(self):
        rho = float(self.rho)
        if not 0.0 < rho < 1.0:
            raise ValueError(f"rho={rho} outside (0, 1)")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "tau_g", as_tolerance(self.tau_g))
        object.__setattr__(self, "tau_r", as_tolerance(self.tau_r))

    def tau(self, color: Color) -> Fraction:
        return self.tau_g if color == Color.GREEN else self.tau_r

    def swapped(self) -> "Scenario":
        """Same scenario with the colour names exchanged."""
        return Scenario(1.0 - self.rho, self.tau_r, self.tau_g)

    def needs(self, w: int) -> tuple[int, int]:
        W = 2 * w + 1
        return need_count(self.tau_g, W), need_count(self.tau_r, W)

    def __str__(self) -> str:
        return (f"rho={self.rho:g} tau_g={format_tolerance(self.tau_g)} "
                f"tau_r={format_tolerance(self.tau_r)}")


@dataclass(eq=False)
class Ring:
    """Colours on a cycle of n nodes with neighbourhood radius w.

    green_counts[x] counts green nodes in [x - w, x + w] (mod n), self included.
    Status arrays and the unhappy/hopeful index sets exist once a scenario is
    bound, and are kept current by every flip.
    """
    colors: np.ndarray
    w: int
    seed: int | None = None
    time: int = 0
    green_counts: np.ndarray = field(init=False, repr=False)
    scenario: Scenario | None = field(default=None, init=False)

    def __post_init__(self):
        colors = np.ascontiguousarray(self.colors, dtype=np.uint8)
        n = colors.shape[0]
        if self.w < 1:
            raise ValueError(f"w must be >= 1, got {self.w}")
        if n < 2 * self.w + 1:
            raise ValueError(f"ring of {n} nodes is shorter than a neighbourhood (2w+1={2*self.w+1})")
        if colors.size and colors.max() > 1:
            raise ValueError("colours must be 0 (red) or 1 (green)")
        self.colors = colors
        self.green_counts = K.green_counts(colors, self.w)

    @property
    def n(self) -> int:
        return self.colors.shape[0]

    @property
    def W(self) -> int:
        return 2 * self.w + 1

    def bind(self, scenario: Scenario) -> "Ring":
        """Attach a scenario and (re)build status arrays and index sets."""
        if scenario == self.scenario:
            return self
        n = self.n
        self.need_g, self.need_r = scenario.needs(self.w)
        self.status = np.empty(n, dtype=np.int8)
        self.unh_items = np.empty(n, dtype=np.int64)
        self.unh_pos = np.empty(n, dtype=np.int64)
        self.hop_items = np.empty(n, dtype=np.int64)
        self.hop_pos = np.empty(n, dtype=np.int64)
        self.sizes = np.zeros(2, dtype=np.int64)
        K.rebuild_sets(self.colors, self.green_counts, self.status, self.unh_items,
                       self.unh_pos, self.hop_items, self.hop_pos, self.sizes,
                       self.W, self.need_g, self.need_r)
        self.scenario = scenario
        return self

    def kernel_state(self) -> tuple:
        return (self.colors, self.green_counts, self.status, self.unh_items, self.unh_pos,
                self.hop_items, self.hop_pos, self.sizes)

    @property
    def unhappy(self) -> np.ndarray:
        """Indices of unhappy nodes, in set order."""
        return self.unh_items[: self.sizes[0]]

    @property
    def hopeful(self) -> np.ndarray:
        return self.hop_items[: self.sizes[1]]

    @property
    def green_total(self) -> int:
        return int(self.colors.sum(dtype=np.int64))

    def copy(self) -> "Ring":
        other = Ring(self.colors.copy(), self.w, self.seed, self.time)
        if self.scenario is not None:
            other.bind(self.scenario)
        return other

    @classmethod
    def uniform(cls, n: int, w: int, color: Color) -> "Ring":
        return cls(np.full(n, int(color), dtype=np.uint8), w)


def init_ring(n: int, w: int, rho: float, seed: int | np.random.Generator,
              scenario: Scenario | None = None) -> Ring:
    """Independent colours: each node green with probability rho.

    The colours are drawn from a PCG64 generator seeded with `seed`. A Generator
    can be passed instead, in which case it is advanced in place.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho={rho} outside (0, 1)")
    if w < 1 or n < 2 * w + 1:
        raise ValueError(f"need w >= 1 and n >= 2w+1, got n={n} w={w}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    colors = (rng.random(n) < rho).astype(np.uint8)
    ring = Ring(colors, w, None if isinstance(seed, np.random.Generator) else int(seed))
    if scenario is not None:
        ring.bind(scenario)
    return ring


def node_status(ring: Ring, scenario: Scenario, x: int) -> NodeStatus:
    """Status of node x, computed directly from the exact threshold comparisons."""
    W = ring.W
    g = int(ring.green_counts[x])
    if ring.colors[x] == Color.GREEN:
        own, other_tau, tau = g, scenario.tau_r, scenario.tau_g
        opp = W - g
    else:
        own, other_tau, tau = W - g, scenario.tau_g, scenario.tau_r
        opp = g
    if tau.denominator * own >= tau.numerator * W:
        return NodeStatus.HAPPY
    if other_tau.denominator * (opp + 1) >= other_tau.numerator * W:
        return NodeStatus.UNHAPPY_HOPEFUL
    return NodeStatus.UNHAPPY_HOPELESS


def status_of(ring: Ring, x: int) -> NodeStatus:
    """Status of x as tracked by the bound scenario's bookkeeping."""
    return _STATUS_CODES[int(ring.status[x])]


def flip(ring: Ring, scenario: Scenario, x: int) -> None:
    """Change the colour of x and update counts and statuses in its neighbourhood."""
    if not 0 <= x < ring.n:
        raise IndexError(f"node {x} outside ring of {ring.n}")
    ring.bind(scenario)
    K.flip(x, *ring.kernel_state(), ring.w, ring.need_g, ring.need_r)


def local_green_density(ring: Ring, x: int) -> Fraction:
    return Fraction(int(ring.green_counts[x]), ring.W)


# -- text serialisation -------------------------------------------------------------
#
#   schelling-ring 1
#   n <int>
#   w <int>
#   seed <int or ->
#   rho <float or ->  tau_g <tol or ->  tau_r <tol or ->   (one per line)
#   runs
#   G12 R3 G1 ...       (run lengths in ring order, wrapped over lines)
#   end

def encode_runs(colors: np.ndarray) -> list[str]:
    colors = np.asarray(colors)
    if colors.size == 0:
        return []
    edges = np.flatnonzero(np.diff(colors)) + 1
    starts = np.concatenate(([0], edges))
    lengths = np.diff(np.concatenate((starts, [colors.size])))
    return [("G" if colors[s] else "R") + str(int(m)) for s, m in zip(starts, lengths)]


def decode_runs(tokens: Iterable[str]) -> np.ndarray:
    parts = []
    for tok in tokens:
        if not tok or tok[0] not in "GR" or not tok[1:].isdigit():
            raise ValueError(f"bad run token {tok!r}")
        parts.append(np.full(int(tok[1:]), 1 if tok[0] == "G" else 0, dtype=np.uint8))
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint8)


def write_runs(out: IO[str], colors: np.ndarray, per_line: int = 16) -> None:
    tokens = encode_runs(colors)
    for i in range(0, len(tokens), per_line):
        out.write(" ".join(tokens[i:i + per_line]) + "\n")
    out.write("end\n")


def read_runs(lines) -> np.ndarray:
    tokens = []
    for line in lines:
        line = line.strip()
        if line == "end":
            return decode_runs(tokens)
        tokens.extend(line.split())
    raise ValueError("run block not terminated by 'end'")


def _opt(v, fmt=str) -> str:
    return "-" if v is None else fmt(v)


def dump_ring(ring: Ring, out: IO[str], scenario: Scenario | None = None) -> None:
    scenario = scenario or ring.scenario
    out.write("schelling-ring 1\n")
    out.write(f"n {ring.n}\nw {ring.w}\nseed {_opt(ring.seed)}\n")
    out.write(f"rho {_opt(scenario and scenario.rho, repr)}\n")
    out.write(f"tau_g {_opt(scenario and scenario.tau_g, format_tolerance)}\n")
    out.write(f"tau_r {_opt(scenario and scenario.tau_r, format_tolerance)}\n")
    out.write("runs\n")
    write_runs(out, ring.colors)


def read_header(lines, magic: str) -> dict[str, str]:
    first = next(lines, "").strip()
    if first != magic:
        raise ValueError(f"expected header {magic!r}, got {first!r}")
    head = {}
    for line in lines:
        line = line.strip()
        if not line:
            continue
        key, _, value = line.partition(" ")
        if key in ("runs", "initial"):
            head[key] = value
            return head
        head[key] = value.strip()
    raise ValueError("truncated file")


def scenario_from_header(head: dict[str, str]) -> Scenario | None:
    if head.get("rho", "-") == "-":
        return None
    return Scenario(float(head["rho"]), parse_tolerance(head["tau_g"]),
                    parse_tolerance(head["tau_r"]))


def load_ring(src: IO[str]) -> tuple[Ring, Scenario | None]:
    lines = iter(src)
    head = read_header(lines, "schelling-ring 1")
    colors = read_runs(lines)
    if colors.size != int(head["n"]):
        raise ValueError(f"run lengths sum to {colors.size}, header says n={head['n']}")
    seed = None if head.get("seed", "-") == "-" else int(head["seed"])
    ring = Ring(colors, int(head["w"]), seed)
    scenario = scenario_from_header(head)
    if scenario is not None:
        ring.bind(scenario)
    return ring, scenario
