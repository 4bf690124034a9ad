"""Realistic attack: unambiguous state discrimination with off-the-shelf parts.

Eve sits right at Alice's output.  With probability ``p_attack`` she routes a
pulse through a switch and a 50:50 beamsplitter into two copies of Bob's
receiver; on a three-detector click she knows the state and resends it from
her own source next to Bob.  Otherwise the pulse passes through both
switches untouched.  No extra errors reach Bob.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .baseline import BB84, ProtocolModel
from .core import (AttackScenario, EveHardware, SystemParams, binary_entropy,
                   detection_prob, poisson_weights)
from .strong import expected_rate

DEFAULT_MU_E_MAX = 100.0


@dataclass(frozen=True)
class UsdOutcome:
    """Result of one USD attack evaluation.

    ``r_usd`` is the rate Eve actually delivers per attacked slot; when her
    source could over-fill Bob's rate she withholds resends down to it.
    """

    feasible: bool
    p_usd: float
    r_usd: float
    p_attack: float | None
    q_e: float
    leaked_fraction: float | None
    i_ae: float = 0.0
    mu_e: float = math.nan
    qber_observed: float = math.nan
    leak_raw: float | None = None
    rate_residual: float = math.nan
    reason: str = ""


def eve_qber(params: SystemParams, eve: EveHardware, x: float = 1.0) -> float:
    """QBER of Eve's own measurement.

    ``x`` scales the photon number in the dark-count ratio; the default 1
    evaluates it at Alice's nominal mu.
    """
    signal = x * params.mu * eve.t_s * eve.t_bs * eve.eta_e
    if signal == 0.0:
        return 0.5
    return 0.5 * (1.0 - params.visibility / (1.0 + 4.0 * eve.p_e / signal))


def p_usd_closed_form(x_mu_eff: float) -> float:
    """Three-detector click probability for detected mean photon number ``x_mu_eff``."""
    if x_mu_eff < 0:
        raise ValueError(f"negative photon number: {x_mu_eff!r}")
    return -math.expm1(-x_mu_eff / 2.0) * math.expm1(-x_mu_eff / 4.0) ** 2


def discrimination_prob(n: int) -> float:
    """Probability that n photons spread over Eve's four detectors identify the state."""
    return (4.0 ** n - 2.0 * 3.0 ** n + 2.0) / 4.0 ** n


def p_usd_fock_sum(x_mu_eff: float) -> float:
    if x_mu_eff < 0:
        raise ValueError(f"negative photon number: {x_mu_eff!r}")
    weights = poisson_weights(x_mu_eff)
    # 1 - 2 (3/4)^n + 2 (1/4)^n avoids overflowing 4**n at large n
    return math.fsum(w * (1.0 - 2.0 * 0.75 ** n + 2.0 * 0.25 ** n)
                     for n, w in enumerate(weights) if n >= 1)


def eve_photon_number(params: SystemParams, eve: EveHardware, x: float) -> float:
    return x * params.mu * eve.t_bs * eve.t_s * eve.eta_e


def r_usd(params: SystemParams, eve: EveHardware, p_usd: float,
          mu_e: float | None = None) -> float:
    mu_e = eve.mu_e if mu_e is None else mu_e
    return p_usd * detection_prob(mu_e * eve.t_s * params.t_b * params.eta, params.p_d)


def pass_through_rate(params: SystemParams, eve: EveHardware, x: float) -> float:
    """Bob's rate from unattacked pulses, which cross both of Eve's switches."""
    mu_eff = x * params.mu * eve.t_s ** 2 * params.t * params.t_b * params.eta
    return detection_prob(mu_eff, params.p_d)


def _slot_target(params: SystemParams, duty: float) -> float:
    """Per-probe-slot rate that keeps Bob's average rate unchanged.

    Suppressed slots still give Bob dark clicks.
    """
    return (expected_rate(params) - (1.0 - duty) * params.p_d) / duty


def solve_p_attack(params: SystemParams, eve: EveHardware, scenario: AttackScenario,
                   mu_e: float | None = None, scale_qe_with_x: bool = False) -> UsdOutcome:
    """Attack probability that holds Bob's rate, at a fixed resend intensity.

    If a pure attack meets or exceeds the target Eve attacks every slot and
    withholds surplus resends; otherwise she mixes with pass-through, which is
    possible only if pass-through alone exceeds the target.
    """
    mu_e = eve.mu_e if mu_e is None else mu_e
    x, duty = scenario.x, scenario.duty
    target = _slot_target(params, duty)
    p_usd = p_usd_closed_form(eve_photon_number(params, eve, x))
    attack_rate = r_usd(params, eve, p_usd, mu_e)
    passing = pass_through_rate(params, eve, x)
    q_e = eve_qber(params, eve, x if scale_qe_with_x else 1.0)

    if attack_rate >= target:
        p_attack, delivered = 1.0, target
    elif passing >= target:
        p_attack = (passing - target) / (passing - attack_rate)
        delivered = attack_rate
    else:
        return UsdOutcome(False, p_usd, attack_rate, None, q_e, None, mu_e=mu_e,
                          qber_observed=params.qber, reason="rate cannot be matched")

    bob = duty * (p_attack * delivered + (1.0 - p_attack) * passing) + (1.0 - duty) * params.p_d
    return UsdOutcome(
        feasible=True,
        p_usd=p_usd,
        r_usd=delivered,
        p_attack=p_attack,
        q_e=q_e,
        leaked_fraction=None,
        i_ae=duty * p_attack * delivered * (1.0 - binary_entropy(q_e)),
        mu_e=mu_e,
        qber_observed=params.qber,
        rate_residual=abs(bob - expected_rate(params)),
    )


def optimal_mu_e(params: SystemParams, eve: EveHardware, scenario: AttackScenario,
                 mu_e_max: float = DEFAULT_MU_E_MAX) -> float:
    """Smallest resend intensity in [mu, mu_e_max] giving Eve her best attack.

    Eve's information never decreases with her delivered rate, so the
    optimum is the intensity that just fills Bob's target, or ``mu_e_max``
    if nothing in range does.  Falls back to ``mu`` when that already fills it.
    """
    lo = max(params.mu, 1e-12)
    target = _slot_target(params, scenario.duty)
    p_usd = p_usd_closed_form(eve_photon_number(params, eve, scenario.x))
    if r_usd(params, eve, p_usd, lo) >= target:
        return lo
    if p_usd == 0.0 or r_usd(params, eve, p_usd, mu_e_max) < target:
        return mu_e_max
    # invert p_usd * (2 p_d + 1 - exp(-k mu_e)) / 2 = target
    k = eve.t_s * params.t_b * params.eta
    mu_e = -math.log1p(2.0 * params.p_d - 2.0 * target / p_usd) / k
    while r_usd(params, eve, p_usd, mu_e) < target:
        mu_e = math.nextafter(mu_e, math.inf)
    return min(max(mu_e, lo), mu_e_max)


def usd_attack_outcome(params: SystemParams, eve: EveHardware, scenario: AttackScenario,
                       protocol: ProtocolModel = BB84, optimize_mu_e: bool = True,
                       mu_e_max: float = DEFAULT_MU_E_MAX,
                       scale_qe_with_x: bool = False) -> UsdOutcome:
    """Leaked key fraction under the USD attack.

    The observed QBER stays at baseline, so privacy amplification runs on the
    measured QBER in ``params``.  A fraction of 0 with ``feasible`` set means
    Eve holds the rate but learns no more than privacy amplification removes.
    """
    scenario.check_against(params)
    mu_e = optimal_mu_e(params, eve, scenario, mu_e_max) if optimize_mu_e else eve.mu_e
    out = solve_p_attack(params, eve, scenario, mu_e, scale_qe_with_x)
    key = protocol.key_rates(params)
    if key.s <= 0.0:
        return replace(out, feasible=False, leaked_fraction=None, reason="no key without Eve")
    if not out.feasible:
        return out
    raw = (out.i_ae - key.i_ae_assumed) / key.s
    return replace(out, leaked_fraction=min(max(raw, 0.0), 1.0), leak_raw=raw)
