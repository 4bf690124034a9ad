"""SARG04 variants of both attack models.

Rates and informations stay in the same per-pulse normalisation as BB84
(sifting 1/2).  SARG04's sifting of 1/4 rescales every term by the same
factor, which cancels in the leaked fraction; ``Sarg04Params.absolute``
converts a value to bits per pulse when the absolute size matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .baseline import KeyRates, ProtocolModel, cloning_information, mutual_info_ab
from .core import AttackScenario, EveHardware, SystemParams
from .strong import AttackOutcome, strong_attack_outcome
from .usd import UsdOutcome, usd_attack_outcome

SARG04_SIFTING = 0.25
_REFERENCE_SIFTING = 0.5


@dataclass(frozen=True)
class Sarg04Params:
    base: SystemParams
    sifting: float = SARG04_SIFTING

    def __post_init__(self) -> None:
        if self.sifting != SARG04_SIFTING:
            raise ValueError(f"SARG04 sifting is fixed at 1/4, got {self.sifting!r}")

    def absolute(self, value: float) -> float:
        """Rescale a model value to bits (or clicks) per sent pulse."""
        return value * self.sifting / _REFERENCE_SIFTING


def eve_failure_prob(n: int) -> float:
    """Chance that measuring n photons leaves Eve without the key bit."""
    if n < 0:
        raise ValueError(f"photon number must be >= 0, got {n!r}")
    return 0.75 ** n


def pns_success(n: int) -> float:
    return 1.0 - eve_failure_prob(n)


def sarg04_cloning_information(d: float) -> float:
    return 0.25 * cloning_information(d)


def sarg04_assumed_eve_info(params: SystemParams, d1: float | None = None,
                            n_max: int = 60) -> float:
    """Privacy-amplification estimate of Eve's information for SARG04.

    Same structure as the BB84 estimate: the two-photon term ``mu^2 / 2`` is
    replaced by ``sum_n (1 - E_n) mu^n / n!`` and single photons carry a
    quarter of the cloning information.
    """
    d1 = params.qber if d1 is None else d1
    mu, eta = params.mu, params.eta
    pns = 0.5 * eta * math.fsum(pns_success(n) * mu ** n / math.factorial(n)
                                for n in range(2, n_max + 1))
    single_share = max(params.t * params.t_b - mu / 2.0, 0.0)
    cloning = 0.5 * mu * eta * single_share * sarg04_cloning_information(d1)
    return pns + cloning


def sarg04_key_rates(params: SystemParams) -> KeyRates:
    return KeyRates(i_ab=max(mutual_info_ab(params), 0.0),
                    i_ae_assumed=sarg04_assumed_eve_info(params))


SARG04 = ProtocolModel("SARG04", pns_success, sarg04_cloning_information, sarg04_key_rates)


def _base(params: SystemParams | Sarg04Params) -> SystemParams:
    return params.base if isinstance(params, Sarg04Params) else params


def sarg04_strong_outcome(params: SystemParams | Sarg04Params,
                          scenario: AttackScenario) -> AttackOutcome:
    return strong_attack_outcome(_base(params), scenario, protocol=SARG04)


def sarg04_usd_outcome(params: SystemParams | Sarg04Params, eve: EveHardware,
                       scenario: AttackScenario, **kwargs) -> UsdOutcome:
    """USD attack against SARG04.

    Eve's discrimination does not depend on how the bit is encoded, so her
    information matches the BB84 attack; only privacy amplification differs.
    """
    return usd_attack_outcome(_base(params), eve, scenario, protocol=SARG04, **kwargs)
