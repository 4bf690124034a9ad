"""Parameter sweeps and threshold search over the attack models."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .coin import QctEventModel, QctParams, bob_cheat_bound
from .config import Axis, Model, Protocol, SweepSpec
from .core import AttackScenario, EveHardware, Method, SystemParams, db_to_transmission
from .envelope import EnvelopePoint, max_x, scenario_feasible
from .sarg04 import sarg04_strong_outcome, sarg04_usd_outcome
from .strong import strong_attack_outcome
from .usd import usd_attack_outcome

FULL_TOL = 1e-9
X_TOL = 1e-6
CUSTOM_X_LIMIT = 100.0


class Target(str, enum.Enum):
    PARTIAL = "partial"
    FULL = "full"


class NoThresholdError(ValueError):
    pass


@dataclass(frozen=True)
class PointResult:
    """One evaluated grid point.

    ``value`` is the leaked key fraction, or Bob's cheating bound for coin
    tossing; it is ``None`` when the attack cannot hold Bob's rate.
    ``p_attack`` is the single-photon attack probability for the strong model.
    """

    axis_value: float
    x: float
    loss_db: float | None
    value: float | None
    feasible: bool
    within_envelope: bool
    p_attack: float | None
    rate_residual: float | None


def evaluate(protocol: Protocol, model: Model, scenario: AttackScenario,
             params: SystemParams, eve: EveHardware | None = None):
    """Run one attack model and return its outcome object."""
    protocol, model = Protocol(protocol), Model(model)
    if protocol is Protocol.COIN_TOSS:
        raise ValueError("coin tossing is evaluated with bob_cheat_bound")
    if model is Model.STRONG:
        fn = strong_attack_outcome if protocol is Protocol.BB84 else sarg04_strong_outcome
        return fn(params, scenario)
    if eve is None:
        raise ValueError("the realistic model needs Eve's hardware ([eve] section)")
    fn = usd_attack_outcome if protocol is Protocol.BB84 else sarg04_usd_outcome
    return fn(params, eve, scenario)


def leaked_fraction(protocol: Protocol, model: Model, scenario: AttackScenario,
                    params: SystemParams, eve: EveHardware | None = None) -> float | None:
    return evaluate(protocol, model, scenario, params, eve).leaked_fraction


def _point_params(spec: SweepSpec, params: SystemParams, value: float) -> tuple[SystemParams, float]:
    if spec.axis is Axis.X_FACTOR:
        return params, value
    t = db_to_transmission(value)
    mu = params.mu * t / params.t if spec.mu_follows_loss else params.mu
    return replace(params, t=t, mu=mu), spec.scenario.x


@dataclass(frozen=True)
class _Job:
    spec: SweepSpec
    params: SystemParams
    eve: EveHardware | None
    coin: QctParams | None
    coin_model: QctEventModel | None
    envelope: tuple[EnvelopePoint, ...] | None


def _run_point(job: _Job, value: float) -> PointResult:
    spec = job.spec
    params, x = _point_params(spec, job.params, value)
    scenario = replace(spec.scenario, x=x)
    loss = value if spec.axis is Axis.CHANNEL_LOSS_DB else None
    ok = scenario_feasible(scenario, job.envelope)
    if spec.protocol is Protocol.COIN_TOSS:
        bound = bob_cheat_bound(job.coin, job.coin_model, x, scenario.duty)
        return PointResult(value, x, loss, bound, True, ok, None, None)
    out = evaluate(spec.protocol, spec.model, scenario, params, job.eve)
    if spec.model is Model.STRONG:
        p_attack = out.probabilities.p1 if out.feasible else None
    else:
        p_attack = out.p_attack
    residual = out.rate_residual if out.feasible else None
    return PointResult(value, x, loss, out.leaked_fraction if out.feasible else None,
                       out.feasible, ok, p_attack, residual)


def _run_chunk(job: _Job, values: Sequence[float]) -> list[PointResult]:
    return [_run_point(job, v) for v in values]


def run_sweep(spec: SweepSpec, params: SystemParams, eve: EveHardware | None = None,
              coin: QctParams | None = None, coin_model: QctEventModel | None = None,
              envelope: Sequence[EnvelopePoint] | None = None,
              workers: int = 1) -> list[PointResult]:
    """Evaluate every grid point of ``spec``; rows come back in axis order."""
    if spec.scenario is None:
        raise ValueError("sweep needs a scenario")
    if spec.protocol is Protocol.COIN_TOSS:
        if coin is None:
            raise ValueError("coin-tossing sweep needs coin parameters ([coin] section)")
        if spec.axis is not Axis.X_FACTOR:
            raise ValueError("coin-tossing sweeps run over the x_factor axis only")
    if spec.axis is Axis.X_FACTOR and spec.start < 1.0:
        raise ValueError(f"x_factor sweep must start at x >= 1, got {spec.start}")
    if spec.axis is Axis.CHANNEL_LOSS_DB and spec.start < 0.0:
        raise ValueError(f"channel loss must be >= 0 dB, got {spec.start}")
    job = _Job(spec, params, eve, coin, coin_model,
               tuple(envelope) if envelope is not None else None)
    grid = spec.grid()
    if workers <= 1 or len(grid) < 2 * workers:
        return _run_chunk(job, grid)
    size = -(-len(grid) // (workers * 4))
    chunks = [grid[i:i + size] for i in range(0, len(grid), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_chunk, [job] * len(chunks), chunks)
        return [row for part in parts for row in part]


def _reached(value: float | None, target: Target) -> bool:
    if value is None:
        return False
    return value > 0.0 if target is Target.PARTIAL else value >= 1.0 - FULL_TOL


def find_threshold(protocol: Protocol, model: Model, scenario: AttackScenario,
                   params: SystemParams, eve: EveHardware | None, target: Target | str,
                   envelope: Sequence[EnvelopePoint] | None = None,
                   coarse: int = 64) -> float:
    """Smallest x at which the leaked fraction reaches ``target``.

    Searches x in [1, envelope limit] with a coarse scan followed by bisection
    to within ``X_TOL``.  Raises :class:`NoThresholdError` if the target is
    not reached inside the envelope.
    """
    target = Target(target)
    hi = max_x(scenario.method, scenario.n_blocked, envelope)
    if math.isinf(hi):
        hi = CUSTOM_X_LIMIT

    def hit(x: float) -> bool:
        return _reached(leaked_fraction(protocol, model, replace(scenario, x=x), params, eve),
                        target)

    if hit(1.0):
        return 1.0
    xs = np.geomspace(1.0, hi, coarse)
    lo = 1.0
    for x in xs[1:]:
        if hit(float(x)):
            hi = float(x)
            break
        lo = float(x)
    else:
        raise NoThresholdError(
            f"{Protocol(protocol).value}/{Model(model).value}/{scenario.method.value} "
            f"n_blocked={scenario.n_blocked}: {target.value} leak not reached for x <= {hi:g}")
    while hi - lo > X_TOL:
        mid = 0.5 * (lo + hi)
        if hit(mid):
            hi = mid
        else:
            lo = mid
    return hi
