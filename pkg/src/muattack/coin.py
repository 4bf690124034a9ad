"""Bob's cheating bound in plug-and-play quantum coin tossing under mu inflation.

Each round Alice sends one of four states |Phi_{alpha,c}> built from the
coefficient ``y``.  A dishonest Bob who inflates the photon number gets more
copies per round; the bound splits his view of the K rounds into events with
at most one multi-photon pulse, each with its own cheating probability, and
counts everything else as a sure win.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

N_EVENTS = 4


@dataclass(frozen=True)
class QctParams:
    mu: float
    k_rounds: int
    y: float
    honest_abort: float

    def __post_init__(self) -> None:
        if not self.mu > 0.0:
            raise ValueError(f"mu must be > 0, got {self.mu!r}")
        if not (isinstance(self.k_rounds, int) and self.k_rounds > 0):
            raise ValueError(f"k_rounds must be a positive integer, got {self.k_rounds!r}")
        if not 0.0 < self.y < 1.0:
            raise ValueError(f"y must lie in (0, 1), got {self.y!r}")
        if not 0.0 < self.honest_abort < 1.0:
            raise ValueError(f"honest_abort must lie in (0, 1), got {self.honest_abort!r}")


@dataclass(frozen=True)
class QctEventModel:
    """P(A_i) as a function of (effective mu, rounds) and P(cheat | A_i)."""

    p_events: Callable[[float, int], Sequence[float]]
    p_cheat_given: Callable[[QctParams], Sequence[float]]


def coin_states(y: float) -> dict[tuple[int, int], np.ndarray]:
    """The four states keyed by (basis alpha, coin bit c)."""
    a, b = math.sqrt(y), math.sqrt(1.0 - y)
    return {
        (0, 0): np.array([a, b]),
        (1, 0): np.array([a, -b]),
        (0, 1): np.array([b, -a]),
        (1, 1): np.array([b, a]),
    }


@lru_cache(maxsize=256)
def helstrom_cheat(y: float, copies: int) -> float:
    """Best probability of guessing the coin bit from ``copies`` copies of the state."""
    if copies < 0:
        raise ValueError(f"copies must be >= 0, got {copies!r}")
    if copies == 0:
        return 0.5
    states = coin_states(y)

    def rho(c: int) -> np.ndarray:
        out = np.zeros((2 ** copies, 2 ** copies))
        for alpha in (0, 1):
            v = states[(alpha, c)]
            full = v
            for _ in range(copies - 1):
                full = np.kron(full, v)
            out += 0.5 * np.outer(full, full)
        return out

    gap = np.linalg.eigvalsh(0.5 * (rho(0) - rho(1)))
    return float(0.5 + 0.5 * np.abs(gap).sum())


def poisson_events(mu_eff: float, rounds: int) -> tuple[float, float, float, float]:
    """Probabilities of Bob's four low-photon events over ``rounds`` rounds.

    A1: every round empty.  A2: no multi-photon round, at least one single.
    A3: one multi-photon round, all others empty.  A4: one multi-photon
    round and at least one single among the others.
    """
    p0 = math.exp(-mu_eff)
    p1 = mu_eff * p0
    q = -math.expm1(-mu_eff) - p1
    k = rounds
    if k == 0:
        return 1.0, 0.0, 0.0, 0.0
    a1 = p0 ** k
    a2 = (p0 + p1) ** k - a1
    a3 = k * q * p0 ** (k - 1)
    a4 = k * q * ((p0 + p1) ** (k - 1) - p0 ** (k - 1))
    return a1, a2, a3, a4


def helstrom_conditionals(params: QctParams) -> tuple[float, float, float, float]:
    """P(cheat | A_i): a coin guess for A1, one copy for A2, two copies for A3/A4."""
    one, two = helstrom_cheat(params.y, 1), helstrom_cheat(params.y, 2)
    return 0.5, one, two, two


def default_event_model(params: QctParams | None = None) -> QctEventModel:
    return QctEventModel(poisson_events, helstrom_conditionals)


def table_event_model(path: str | Path) -> QctEventModel:
    """Event model whose conditional cheating probabilities come from a file.

    Tab-separated rows ``event<TAB>p_cheat`` for events 1..4; '#' starts a comment.
    Event probabilities keep the Poisson form.
    """
    values: dict[int, float] = {}
    for lineno, row in enumerate(csv.reader(Path(path).read_text().splitlines(),
                                            delimiter="\t"), start=1):
        if not row or row[0].startswith("#"):
            continue
        if len(row) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
        try:
            event, p = int(row[0]), float(row[1])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
        if event not in range(1, N_EVENTS + 1) or not 0.0 <= p <= 1.0:
            raise ValueError(f"{path}:{lineno}: bad entry event={event} p_cheat={p}")
        values[event] = p
    if sorted(values) != list(range(1, N_EVENTS + 1)):
        raise ValueError(f"{path}: need p_cheat for events 1..{N_EVENTS}")
    fixed = tuple(values[i] for i in range(1, N_EVENTS + 1))
    return QctEventModel(poisson_events, lambda _params: fixed)


def _validated(model: QctEventModel, params: QctParams, mu_eff: float,
               rounds: int) -> tuple[Sequence[float], Sequence[float]]:
    events = list(model.p_events(mu_eff, rounds))
    cheats = list(model.p_cheat_given(params))
    if len(events) != N_EVENTS or len(cheats) != N_EVENTS:
        raise ValueError("event model must provide exactly four events")
    tol = 1e-12
    if any(not -tol <= p <= 1.0 + tol for p in events + cheats):
        raise ValueError(f"event model probabilities out of [0, 1]: {events}, {cheats}")
    if sum(events) > 1.0 + 1e-9:
        raise ValueError(f"event probabilities sum to {sum(events)} > 1")
    return events, cheats


def effective_rounds(k_rounds: int, duty: float) -> int:
    return math.floor(duty * k_rounds + 1e-9)


def bob_cheat_bound(params: QctParams, model: QctEventModel | None = None,
                    x: float = 1.0, duty: float = 1.0) -> float:
    """Upper bound on Bob's cheating probability at photon-number factor ``x``.

    ``duty`` is the fraction of rounds surviving the attack's pulse blocking.
    """
    if x < 1.0:
        raise ValueError(f"x must be >= 1, got {x!r}")
    if not 0.0 < duty <= 1.0:
        raise ValueError(f"duty must lie in (0, 1], got {duty!r}")
    model = default_event_model(params) if model is None else model
    events, cheats = _validated(model, params, x * params.mu,
                                effective_rounds(params.k_rounds, duty))
    bound = math.fsum(p * c for p, c in zip(events, cheats)) + (1.0 - math.fsum(events))
    return min(max(bound, 0.0), 1.0)


class NoCrossingError(ValueError):
    pass


def classical_equivalence_factor(params: QctParams, model: QctEventModel | None = None,
                                 classical_bound: float = 0.5, duty: float = 1.0,
                                 x_max: float = 1e3) -> float:
    """Smallest x >= 1 at which Bob's bound reaches ``classical_bound``."""
    if not 0.0 < classical_bound < 1.0:
        raise ValueError(f"classical_bound must lie in (0, 1), got {classical_bound!r}")

    def gap(x: float) -> float:
        return bob_cheat_bound(params, model, x, duty) - classical_bound

    at_one = gap(1.0)
    if abs(at_one) <= 1e-9:
        return 1.0
    if at_one > 0.0:
        raise NoCrossingError(
            f"bound at x=1 ({at_one + classical_bound:.9g}) already exceeds {classical_bound}")
    hi = 2.0
    while gap(hi) < 0.0:
        hi *= 2.0
        if hi > x_max:
            raise NoCrossingError(f"bound stays below {classical_bound} up to x={x_max}")
    root = brentq(gap, hi / 2.0 if gap(hi / 2.0) < 0 else 1.0, hi, xtol=1e-14)
    # brentq returns a point within xtol; step to the side that meets the bound
    while gap(root) < -1e-9:
        root = math.nextafter(root, math.inf)
    return root


def load_classical_bounds(path: str | Path | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Classical cheating bound versus honest abort probability.

    Tab-separated ``honest_abort<TAB>bound`` rows, honest abort increasing.
    """
    if path is None:
        text = resources.files("muattack.data").joinpath("classical_bound.tsv").read_text()
    else:
        text = Path(path).read_text()
    hs, bs = [], []
    for lineno, row in enumerate(csv.reader(text.splitlines(), delimiter="\t"), start=1):
        if not row or row[0].startswith("#"):
            continue
        if len(row) != 2:
            raise ValueError(f"{path or 'classical_bound.tsv'}:{lineno}: expected 2 columns")
        hs.append(float(row[0]))
        bs.append(float(row[1]))
    h, b = np.array(hs), np.array(bs)
    if len(h) < 2 or np.any(np.diff(h) <= 0):
        raise ValueError("honest abort column must be strictly increasing with >= 2 rows")
    return h, b


def classical_bound_at(honest_abort: float, table: tuple[np.ndarray, np.ndarray] | None = None) -> float:
    h, b = load_classical_bounds() if table is None else table
    if not h[0] <= honest_abort <= h[-1]:
        raise ValueError(f"honest abort {honest_abort} outside table range [{h[0]}, {h[-1]}]")
    return float(np.interp(honest_abort, h, b))


def rounds_for_abort(mu: float, detection_efficiency: float, honest_abort: float) -> int:
    """Rounds needed so that an honest run sees no detection with probability ``honest_abort``."""
    p_det = -math.expm1(-mu * detection_efficiency)
    return math.ceil(math.log(honest_abort) / math.log1p(-p_det))


# 15 km link: Bob's detection efficiency times 0.2 dB/km fibre loss
FIFTEEN_KM_DETECTION = 0.5 * 0.6 * 0.1
FIFTEEN_KM_Y = 0.9928


def fifteen_km_params(honest_abort: float = 0.014) -> QctParams:
    mu = 0.0019
    return QctParams(mu=mu, k_rounds=rounds_for_abort(mu, FIFTEEN_KM_DETECTION, honest_abort),
                     y=FIFTEEN_KM_Y, honest_abort=honest_abort)
