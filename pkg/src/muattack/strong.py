"""Technology-unbounded attack: photon-number splitting plus cloning at raised mu.

Eve replaces the lossy channel by a perfect one, splits one photon off every
attacked multi-photon pulse (forwarding the rest), clones attacked single
photons, and blocks whatever she does not attack so that Bob's click rate is
unchanged.  Photons she forwards are detected with Bob's total efficiency
``t_b * eta``; she cannot touch his interferometer or detectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .baseline import BB84, KeyRates, ProtocolModel
from .core import AttackScenario, SystemParams, detection_prob, poisson_weights

RATE_TOL = 1e-12


@dataclass(frozen=True)
class AttackProbabilities:
    """Greedy attack allocation; ``p_multi[k]`` belongs to ``n = k + 2`` photons."""

    p1: float
    p_multi: tuple[float, ...]
    feasible: bool = True

    def p_attack(self, n: int) -> float:
        if n == 1:
            return self.p1
        k = n - 2
        return self.p_multi[k] if k < len(self.p_multi) else 1.0


@dataclass(frozen=True)
class AttackOutcome:
    """Result of one attack evaluation.

    ``leaked_fraction`` is ``None`` when Eve cannot run the attack unnoticed.
    """

    feasible: bool
    leaked_fraction: float | None
    r1: float
    r_multi: float
    i_ae_actual: float
    d1_used: float
    qber_observed: float
    probabilities: AttackProbabilities | None
    key_rates: KeyRates | None
    leak_raw: float | None = None
    rate_residual: float = math.nan
    reason: str = ""


def _multi_terms(params: SystemParams, x: float) -> list[float]:
    """Undutied Bob click contribution of each fully attacked n >= 2 pulse."""
    miss = 1.0 - params.bob_efficiency
    weights = poisson_weights(x * params.mu)
    return [0.5 * (1.0 - miss ** (n - 1)) * weights[n] for n in range(2, len(weights))]


def rate_single(params: SystemParams, x: float, p1: float, duty: float = 1.0) -> float:
    lam = x * params.mu
    return duty * 0.5 * p1 * params.bob_efficiency * lam * math.exp(-lam)


def rate_multi(params: SystemParams, x: float, p_multi: float | Sequence[float],
               duty: float = 1.0) -> float:
    """Bob's click rate from attacked multi-photon pulses.

    ``p_multi`` is either one probability for every n >= 2 or a sequence
    starting at n = 2; photon numbers past its end count as attacked.
    """
    terms = _multi_terms(params, x)
    if isinstance(p_multi, (int, float)):
        return duty * p_multi * math.fsum(terms)
    probs = list(p_multi) + [1.0] * max(0, len(terms) - len(p_multi))
    return duty * math.fsum(p * t for p, t in zip(probs, terms))


def expected_rate(params: SystemParams) -> float:
    """Bob's expected sifted click rate without Eve, dark counts included."""
    return detection_prob(params.signal_detection, params.p_d)


def _signal_target(params: SystemParams, duty: float) -> float:
    # dark clicks occur in every slot, so only the signal part must be matched
    return (expected_rate(params) - params.p_d) / duty


class _Budget:
    """Rate budget at one (x, duty): cached photon-number terms and bounds."""

    def __init__(self, params: SystemParams, x: float, duty: float) -> None:
        self.terms = _multi_terms(params, x)
        self.single = rate_single(params, x, 1.0)
        self.multi = math.fsum(self.terms)
        self.target = _signal_target(params, duty)
        self.feasible = self.single + self.multi >= self.target
        if not self.feasible or self.single == 0.0:
            self.bounds = (0.0, 0.0)
        else:
            self.bounds = (max((self.target - self.multi) / self.single, 0.0),
                           min(self.target / self.single, 1.0))

    def allocate(self, p1: float) -> AttackProbabilities:
        ones = [1.0] * len(self.terms)
        if not self.feasible:
            return AttackProbabilities(1.0, tuple(ones), feasible=False)
        p1 = min(max(p1, self.bounds[0]), self.bounds[1])
        need = self.target - p1 * self.single
        remaining = self.multi
        for k, term in enumerate(self.terms):
            if remaining - term >= need:
                ones[k] = 0.0
                remaining -= term
            else:
                ones[k] = min(max((need - (remaining - term)) / term, 0.0), 1.0)
                break
        return AttackProbabilities(p1, tuple(ones))


def cloning_range(params: SystemParams, x: float, duty: float = 1.0) -> tuple[float, float] | None:
    """Interval of single-photon attack probabilities that can hold Bob's rate.

    ``None`` when even attacking every pulse falls short.
    """
    budget = _Budget(params, x, duty)
    return budget.bounds if budget.feasible else None


def solve_attack_probabilities(params: SystemParams, x: float, duty: float = 1.0,
                               p1: float | None = None) -> AttackProbabilities:
    """Attack allocation that matches Bob's rate.

    Multi-photon pulses are dropped from the lowest photon number upward
    until the rate fits.  With ``p1=None`` cloning is trimmed first (the
    smallest feasible ``p1``); otherwise the given ``p1`` is used, which must
    lie inside :func:`cloning_range`.
    """
    if x < 1.0:
        raise ValueError(f"x must be >= 1, got {x!r}")
    budget = _Budget(params, x, duty)
    lo, hi = budget.bounds
    if p1 is None:
        p1 = lo
    elif budget.feasible and not lo - 1e-12 <= p1 <= hi + 1e-12:
        raise ValueError(f"p1={p1!r} outside feasible range {budget.bounds}")
    return budget.allocate(p1)


def _rate_residual(params: SystemParams, r1: float, r_multi: float) -> float:
    return abs(r1 + r_multi + params.p_d - expected_rate(params))


def _best_on_interval(fn, lo: float, hi: float, grid: int,
                      extra: Sequence[float] = ()) -> tuple[float, float]:
    """Approximate (argmax, max) of ``fn`` on [lo, hi].

    Grid search over the interval plus ``extra`` points; a bounded refine
    runs only when the best grid point is interior.
    """
    if hi <= lo:
        return lo, fn(lo)
    xs = sorted(set(np.linspace(lo, hi, grid)) | {v for v in extra if lo < v < hi})
    vals = [fn(v) for v in xs]
    i = int(np.argmax(vals))
    if 0 < i < len(xs) - 1:
        res = minimize_scalar(lambda v: -fn(v), bounds=(xs[i - 1], xs[i + 1]),
                              method="bounded", options={"xatol": 1e-7 * (hi - lo)})
        if -res.fun > vals[i]:
            return float(res.x), float(-res.fun)
    return float(xs[i]), float(vals[i])


@dataclass(frozen=True)
class _Strategy:
    probs: AttackProbabilities
    r1: float
    r_multi: float
    pns_info: float


def strong_attack_outcome(params: SystemParams, scenario: AttackScenario,
                          protocol: ProtocolModel = BB84, free_cloning: bool = True,
                          grid: int = 9) -> AttackOutcome:
    """Leaked key fraction under the strong attack.

    The legitimate parties run privacy amplification on the QBER they observe.
    Eve chooses how many single photons to clone (the remaining rate comes
    from multi-photon pulses) and the cloning disturbance, maximising the
    leaked fraction while the observed QBER stays within ``scenario.qber_cap``.
    With ``free_cloning=False`` cloning is always trimmed first, as in
    :func:`solve_attack_probabilities`, and only the disturbance is optimised.
    """
    scenario.check_against(params)
    baseline = protocol.key_rates(params)
    if baseline.s <= 0.0:
        return AttackOutcome(False, None, 0.0, 0.0, 0.0, 0.0, params.qber, None,
                             baseline, reason="no key without Eve")
    duty, x = scenario.duty, scenario.x
    budget = _Budget(params, x, duty)
    if not budget.feasible:
        return AttackOutcome(False, None, 0.0, 0.0, 0.0, 0.0, params.qber,
                             budget.allocate(1.0), baseline, reason="rate cannot be matched")

    bob_rate = expected_rate(params)
    clicks = [duty * t for t in budget.terms]
    weighted = [c * protocol.pns_weight(n) for n, c in enumerate(clicks, start=2)]

    def strategy(p1: float) -> _Strategy:
        probs = budget.allocate(p1)
        return _Strategy(
            probs,
            duty * probs.p1 * budget.single,
            math.fsum(p * c for p, c in zip(probs.p_multi, clicks)),
            math.fsum(p * w for p, w in zip(probs.p_multi, weighted)),
        )

    def rates_at(r1: float, d: float) -> KeyRates:
        return protocol.key_rates(params.with_qber(params.qber + r1 * d / bob_rate))

    def leak(st: _Strategy, d: float) -> float:
        key = rates_at(st.r1, d)
        if key.s <= 0.0:
            return -math.inf
        return (st.pns_info + st.r1 * protocol.cloning_info(d) - key.i_ae_assumed) / key.s

    def best_disturbance(st: _Strategy) -> tuple[float, float]:
        at_zero = leak(st, 0.0)
        if st.r1 <= 0.0:
            return 0.0, at_zero
        d_max = min(0.5, (scenario.qber_cap - params.qber) * bob_rate / st.r1)
        if rates_at(st.r1, d_max).s <= 0.0:
            d_max = brentq(lambda d: rates_at(st.r1, d).s, 0.0, d_max, xtol=1e-15) * (1 - 1e-9)
        d, val = _best_on_interval(lambda v: leak(st, v), 0.0, d_max, grid)
        return (0.0, at_zero) if at_zero >= val else (d, val)

    # cloning level at which full disturbance just reaches the QBER cap
    kink = 2.0 * (scenario.qber_cap - params.qber) * bob_rate / (duty * budget.single)
    lo, hi = budget.bounds if free_cloning else (budget.bounds[0], budget.bounds[0])
    p1, _ = _best_on_interval(lambda v: best_disturbance(strategy(v))[1], lo, hi,
                              grid, extra=(kink,))
    best = max((strategy(v) for v in (p1, budget.bounds[0])),
               key=lambda st: best_disturbance(st)[1])
    d_best, _ = best_disturbance(best)

    key = rates_at(best.r1, d_best)
    i_ae = best.pns_info + best.r1 * protocol.cloning_info(d_best)
    raw = (i_ae - key.i_ae_assumed) / key.s
    return AttackOutcome(
        feasible=True,
        leaked_fraction=min(max(raw, 0.0), 1.0),
        r1=best.r1,
        r_multi=best.r_multi,
        i_ae_actual=i_ae,
        d1_used=d_best,
        qber_observed=params.qber + best.r1 * d_best / bob_rate,
        probabilities=best.probs,
        key_rates=key,
        leak_raw=raw,
        rate_residual=_rate_residual(params, best.r1, best.r_multi),
    )
