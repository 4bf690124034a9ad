"""Parameter types and numerical primitives shared by every attack model."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from scipy.special import gammaln


class Method(str, enum.Enum):
    """Hardware exploit used to raise the mean photon number."""

    BANDWIDTH = "bandwidth"
    SATURATION = "saturation"
    EDGE_TRIGGER = "edge_trigger"
    CUSTOM = "custom"


def _check(name: str, value: float, ok: bool, rule: str) -> None:
    if not ok:
        raise ValueError(f"{name}={value!r} violates {rule}")


def _check_transmission(name: str, value: float) -> None:
    _check(name, value, 0.0 < value <= 1.0, "0 < value <= 1")


def _check_probability(name: str, value: float) -> None:
    _check(name, value, 0.0 <= value < 1.0, "0 <= value < 1")


@dataclass(frozen=True)
class SystemParams:
    """Alice/Bob channel and device parameters.

    ``qber`` and ``visibility`` are independent measurements and are not
    required to agree with each other.
    """

    mu: float
    t: float
    t_b: float
    eta: float
    p_d: float
    f_ec: float
    visibility: float
    qber: float

    def __post_init__(self) -> None:
        _check("mu", self.mu, self.mu >= 0.0, "mu >= 0")
        _check_transmission("t", self.t)
        _check_transmission("t_b", self.t_b)
        _check_transmission("eta", self.eta)
        _check_probability("p_d", self.p_d)
        _check("f_ec", self.f_ec, self.f_ec >= 1.0, "f_ec >= 1")
        _check_transmission("visibility", self.visibility)
        _check("qber", self.qber, 0.0 <= self.qber < 0.5, "0 <= qber < 0.5")

    def with_qber(self, qber: float) -> "SystemParams":
        """Copy with a different QBER, skipping revalidation of the other fields."""
        _check("qber", qber, 0.0 <= qber < 0.5, "0 <= qber < 0.5")
        out = object.__new__(SystemParams)
        out.__dict__.update(self.__dict__, qber=qber)
        return out

    @property
    def signal_detection(self) -> float:
        """Mean detected photon number ``mu * t * t_b * eta`` of the honest link."""
        return self.mu * self.t * self.t_b * self.eta

    @property
    def bob_efficiency(self) -> float:
        """Detection probability of a photon delivered to Bob's entrance."""
        return self.t_b * self.eta


@dataclass(frozen=True)
class EveHardware:
    """Eavesdropper equipment for the unambiguous-discrimination attack."""

    t_bs: float
    t_s: float
    eta_e: float
    p_e: float
    mu_e: float

    def __post_init__(self) -> None:
        _check_transmission("t_bs", self.t_bs)
        _check_transmission("t_s", self.t_s)
        _check_transmission("eta_e", self.eta_e)
        _check_probability("p_e", self.p_e)
        _check("mu_e", self.mu_e, self.mu_e > 0.0, "mu_e > 0")


@dataclass(frozen=True)
class AttackScenario:
    """Attack family, multiplication factor and blocking pattern."""

    method: Method
    x: float
    n_blocked: int = 0
    qber_cap: float = 0.08

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", Method(self.method))
        _check("x", self.x, self.x >= 1.0, "x >= 1")
        _check("n_blocked", self.n_blocked,
               isinstance(self.n_blocked, int) and self.n_blocked >= 0,
               "non-negative integer")
        _check("qber_cap", self.qber_cap, 0.0 < self.qber_cap < 0.5,
               "0 < qber_cap < 0.5")
        if self.method is Method.EDGE_TRIGGER and self.n_blocked != 0:
            raise ValueError("edge-trigger attack suppresses no pulses (n_blocked=0)")

    @property
    def duty(self) -> float:
        """Fraction of slots carrying a probe pulse."""
        return 1.0 / (self.n_blocked + 1)

    def check_against(self, params: SystemParams) -> None:
        if not self.qber_cap > params.qber:
            raise ValueError(
                f"qber_cap={self.qber_cap} must exceed baseline qber={params.qber}")


def db_to_transmission(loss_db: float) -> float:
    return 10.0 ** (-loss_db / 10.0)


def transmission_to_db(t: float) -> float:
    return -10.0 * math.log10(t)


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p!r}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def poisson_pmf(n: int, lam: float) -> float:
    """Probability of ``n`` photons in a coherent state of mean ``lam``."""
    if n < 0 or lam < 0:
        raise ValueError(f"negative argument: n={n!r}, lam={lam!r}")
    if lam == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(lam) - lam - gammaln(n + 1))


def photon_cutoff(lam: float) -> int:
    """Largest photon number kept in truncated Fock sums for mean ``lam``.

    Tail mass beyond the cutoff is below 1e-12 for ``lam <= 100``.
    """
    return math.ceil(lam + 12.0 * math.sqrt(lam) + 30.0)


def poisson_weights(lam: float) -> list[float]:
    """``poisson_pmf(n, lam)`` for ``n = 0 .. photon_cutoff(lam)``."""
    if lam == 0.0:
        return [1.0] + [0.0] * photon_cutoff(0.0)
    out = []
    log_lam = math.log(lam)
    for n in range(photon_cutoff(lam) + 1):
        out.append(math.exp(n * log_lam - lam - gammaln(n + 1)))
    return out


def detection_prob(mu_eff: float, p_dark: float) -> float:
    """Sifted click probability ``(2 p_dark + 1 - exp(-mu_eff)) / 2``.

    ``mu_eff`` is the mean number of photons reaching Bob's detectors times
    their efficiency, e.g. ``mu * t * t_b * eta``.
    """
    if mu_eff < 0 or not 0.0 <= p_dark < 1.0:
        raise ValueError(f"invalid arguments: mu_eff={mu_eff!r}, p_dark={p_dark!r}")
    return 0.5 * (2.0 * p_dark - math.expm1(-mu_eff))
