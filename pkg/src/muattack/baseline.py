"""Legitimate-party information, assumed-Eve information and nominal secret fraction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .core import SystemParams, binary_entropy

InfoFunction = Callable[[float], float]


@dataclass(frozen=True)
class KeyRates:
    i_ab: float
    i_ae_assumed: float

    @property
    def s(self) -> float:
        """Secret fraction; a value <= 0 means no key can be distilled."""
        return self.i_ab - self.i_ae_assumed


def cloning_information(d: float) -> float:
    """Eve's information per single-photon bit from an optimal individual
    attack that causes disturbance ``d``: ``1 - H(1/2 + sqrt(d (1 - d)))``."""
    if not 0.0 <= d <= 0.5:
        raise ValueError(f"disturbance out of range [0, 0.5]: {d!r}")
    return 1.0 - binary_entropy(min(1.0, 0.5 + math.sqrt(d * (1.0 - d))))


def mutual_info_ab(params: SystemParams) -> float:
    """Alice-Bob information per pulse after error correction.

    Negative when ``f_ec * H(Q) > 1``; callers treat that as zero key.
    """
    raw = 0.5 * (params.signal_detection + 2.0 * params.p_d)
    return raw * (1.0 - params.f_ec * binary_entropy(params.qber))


def assumed_eve_info(params: SystemParams, d1: float | None = None,
                     info: InfoFunction = cloning_information) -> float:
    """Eve's information removed by privacy amplification (PNS + cloning).

    ``d1`` defaults to the QBER carried by ``params``.
    """
    d1 = params.qber if d1 is None else d1
    mu, eta = params.mu, params.eta
    single_share = max(params.t * params.t_b - mu / 2.0, 0.0)
    cloning = 0.5 * mu * eta * single_share * info(d1)
    pns = 0.5 * mu * eta * mu / 2.0
    return cloning + pns


def secret_fraction(params: SystemParams, d1: float | None = None) -> KeyRates:
    """Key rates at the QBER in ``params``; ``d1`` overrides the disturbance
    assumed for the cloning term only."""
    return KeyRates(i_ab=max(mutual_info_ab(params), 0.0),
                    i_ae_assumed=assumed_eve_info(params, d1))


@dataclass(frozen=True)
class ProtocolModel:
    """What changes between protocols inside the attack pipelines.

    pns_weight(n) is the information Eve holds about the key bit after a
    photon-number-splitting attack on an n-photon pulse; cloning_info maps a
    single-photon disturbance to Eve's information; key_rates computes the
    privacy-amplification baseline at the QBER carried by its argument.
    """

    name: str
    pns_weight: Callable[[int], float]
    cloning_info: InfoFunction
    key_rates: Callable[[SystemParams], KeyRates]


def _full_information(n: int) -> float:
    return 1.0


BB84 = ProtocolModel("BB84", _full_information, cloning_information, secret_fraction)
