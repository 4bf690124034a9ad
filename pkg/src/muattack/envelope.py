"""Measured reach of each hardware exploit: maximum x versus blocked pulses."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import AttackScenario, Method

CALIBRATED_SIGNAL_FJ = 73.0
FIRST_PULSE_FJ = 150.0


@dataclass(frozen=True)
class EnvelopePoint:
    method: Method
    n_blocked: int
    x_max: float
    pulse_energy_fj: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", Method(self.method))
        if self.method is Method.CUSTOM:
            raise ValueError("custom scenarios have no measured envelope")
        if self.n_blocked < 0:
            raise ValueError(f"n_blocked must be >= 0, got {self.n_blocked!r}")
        if not self.x_max >= 1.0:
            raise ValueError(f"x_max must be >= 1, got {self.x_max!r}")


def check_monotone(points: Iterable[EnvelopePoint]) -> None:
    """Raise unless x_max is non-decreasing in n_blocked within every method."""
    by_method: dict[Method, list[EnvelopePoint]] = {}
    for p in points:
        by_method.setdefault(p.method, []).append(p)
    for method, pts in by_method.items():
        pts = sorted(pts, key=lambda p: p.n_blocked)
        ns = [p.n_blocked for p in pts]
        if len(set(ns)) != len(ns):
            raise ValueError(f"{method.value}: duplicate n_blocked in envelope")
        for a, b in zip(pts, pts[1:]):
            if b.x_max < a.x_max:
                raise ValueError(
                    f"{method.value}: x_max drops from {a.x_max} (n={a.n_blocked}) "
                    f"to {b.x_max} (n={b.n_blocked})")


def load_envelope(path: str | Path | None = None) -> list[EnvelopePoint]:
    """Read a tab-separated envelope table (method, n_blocked, x_max[, pulse_energy_fj]).

    Lines starting with '#' are comments.  Without ``path`` the built-in table is read.
    """
    if path is None:
        text = resources.files("muattack.data").joinpath("envelope.tsv").read_text()
        source = "built-in envelope"
    else:
        text = Path(path).read_text()
        source = str(path)
    points = []
    rows = csv.reader(text.splitlines(), delimiter="\t")
    for lineno, row in enumerate(rows, start=1):
        if not row or row[0].startswith("#") or not "".join(row).strip():
            continue
        if len(row) not in (3, 4):
            raise ValueError(f"{source}:{lineno}: expected 3 or 4 columns, got {len(row)}")
        try:
            energy = float(row[3]) if len(row) == 4 and row[3].strip() else None
            points.append(EnvelopePoint(row[0].strip(), int(row[1]), float(row[2]), energy))
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: {exc}") from None
    check_monotone(points)
    return points


_BUILTIN: tuple[EnvelopePoint, ...] | None = None


def builtin_envelope() -> list[EnvelopePoint]:
    global _BUILTIN
    if _BUILTIN is None:
        _BUILTIN = tuple(load_envelope())
    return list(_BUILTIN)


def _series(points: Sequence[EnvelopePoint], method: Method) -> tuple[list[int], list[float]]:
    pts = sorted((p for p in points if p.method is method), key=lambda p: p.n_blocked)
    return [p.n_blocked for p in pts], [p.x_max for p in pts]


def max_x(method: Method | str, n_blocked: int,
          points: Sequence[EnvelopePoint] | None = None) -> float:
    """Largest reachable x for a method and blocking count.

    Linear between measured points and flat past the last one.  Below the
    first saturation point the bandwidth regime applies.  Custom scenarios
    are unconstrained.
    """
    method = Method(method)
    if n_blocked < 0:
        raise ValueError(f"n_blocked must be >= 0, got {n_blocked!r}")
    if method is Method.CUSTOM:
        return math.inf
    points = builtin_envelope() if points is None else points
    ns, xs = _series(points, method)
    if not ns:
        raise ValueError(f"no envelope data for {method.value}")
    if n_blocked < ns[0]:
        if method is Method.SATURATION:
            return max_x(Method.BANDWIDTH, n_blocked, points)
        raise ValueError(f"{method.value}: n_blocked={n_blocked} below measured range "
                         f"starting at {ns[0]}")
    return float(np.interp(n_blocked, ns, xs))


def scenario_feasible(scenario: AttackScenario,
                      points: Sequence[EnvelopePoint] | None = None) -> bool:
    try:
        return bool(scenario.x <= max_x(scenario.method, scenario.n_blocked, points))
    except ValueError:
        return False
