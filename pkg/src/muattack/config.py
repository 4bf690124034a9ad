"""INI configuration: load, validate and write parameter bundles.

Sections ``[system]``, ``[eve]``, ``[scenario]``, ``[sweep]`` and ``[coin]``;
only ``[system]`` is required.  Unknown sections and keys are rejected.
"""

from __future__ import annotations

import configparser
import enum
import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .coin import FIFTEEN_KM_DETECTION, FIFTEEN_KM_Y, QctParams, rounds_for_abort
from .core import (AttackScenario, EveHardware, Method, SystemParams, db_to_transmission,
                   transmission_to_db)

MAX_GRID_POINTS = 10 ** 6


class ConfigError(ValueError):
    """Invalid configuration; the message names file, line and key where known."""


class Axis(str, enum.Enum):
    X_FACTOR = "x_factor"
    CHANNEL_LOSS_DB = "channel_loss_db"


class Protocol(str, enum.Enum):
    BB84 = "bb84"
    SARG04 = "sarg04"
    COIN_TOSS = "coin_toss"


class Model(str, enum.Enum):
    STRONG = "strong"
    REALISTIC = "realistic"


@dataclass(frozen=True)
class SweepSpec:
    axis: Axis
    start: float
    stop: float
    step: float
    protocol: Protocol = Protocol.BB84
    model: Model = Model.REALISTIC
    scenario: AttackScenario | None = None
    mu_follows_loss: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "axis", Axis(self.axis))
        object.__setattr__(self, "protocol", Protocol(self.protocol))
        object.__setattr__(self, "model", Model(self.model))
        if not self.start < self.stop:
            raise ValueError(f"empty sweep range: start={self.start} >= stop={self.stop}")
        if not self.step > 0.0:
            raise ValueError(f"step must be > 0, got {self.step}")
        if self.n_points > MAX_GRID_POINTS:
            raise ValueError(f"{self.n_points} grid points exceed the limit {MAX_GRID_POINTS}")

    @property
    def n_points(self) -> int:
        return int((self.stop - self.start) / self.step + 1e-9) + 1

    def grid(self) -> list[float]:
        return [self.start + i * self.step for i in range(self.n_points)]


@dataclass(frozen=True)
class CoinSettings:
    params: QctParams
    detection_efficiency: float | None = None
    classical_bound: float | None = None
    classical_table: Path | None = None
    event_table: Path | None = None


@dataclass(frozen=True)
class Config:
    system: SystemParams
    eve: EveHardware | None = None
    scenario: AttackScenario | None = None
    sweep: SweepSpec | None = None
    coin: CoinSettings | None = None
    envelope_table: Path | None = None
    loss_db: float | None = field(default=None, compare=False)

    def as_tuple(self) -> tuple:
        return self.system, self.eve, self.scenario, self.sweep


_KEYS = {
    "system": {"mu", "loss_db", "t", "t_b", "eta", "p_d", "f_ec", "visibility", "qber"},
    "eve": {"t_bs", "t_bs_db", "t_s", "t_s_db", "eta_e", "p_e", "mu_e"},
    "scenario": {"method", "x", "n_blocked", "qber_cap", "envelope_table"},
    "sweep": {"axis", "start", "stop", "step", "protocol", "model", "mu_follows_loss"},
    "coin": {"mu", "k_rounds", "y", "honest_abort", "detection_efficiency",
             "classical_bound", "classical_table", "event_table"},
}


class _Reader:
    def __init__(self, text: str, source: str) -> None:
        self.source = source
        self.lines = _key_lines(text)
        self.cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        self.cp.optionxform = str
        try:
            self.cp.read_string(text, source=source)
        except configparser.Error as exc:
            raise ConfigError(f"{source}: {exc}") from None
        for section in self.cp.sections():
            if section not in _KEYS:
                raise ConfigError(f"{self.where(section)}: unknown section [{section}]")
            for key in self.cp[section]:
                if key not in _KEYS[section]:
                    raise ConfigError(f"{self.where(section, key)}: unknown key '{key}'")

    def where(self, section: str, key: str | None = None) -> str:
        line = self.lines.get((section, key))
        loc = f"{self.source}:{line}" if line else self.source
        return f"{loc} [{section}]" + (f" {key}" if key else "")

    def has(self, section: str, key: str | None = None) -> bool:
        if key is None:
            return self.cp.has_section(section)
        return self.cp.has_option(section, key)

    def get(self, section: str, key: str, kind=float, default=None):
        if not self.has(section, key):
            if default is None:
                raise ConfigError(f"{self.where(section)}: missing key '{key}'")
            return default
        raw = self.cp[section][key].strip()
        try:
            if kind is bool:
                return self.cp.getboolean(section, key)
            if kind is int:
                return int(raw)
            return kind(raw)
        except ValueError as exc:
            raise ConfigError(f"{self.where(section, key)}: cannot parse {raw!r}: {exc}") from None

    def build(self, section: str, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValueError as exc:
            raise ConfigError(f"{self.where(section)}: {exc}") from None


def _key_lines(text: str) -> dict[tuple[str, str | None], int]:
    out: dict[tuple[str, str | None], int] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
            out.setdefault((section, None), lineno)
        elif section and s and not s.startswith(("#", ";")):
            key = s.split("=", 1)[0].split(":", 1)[0].strip()
            out.setdefault((section, key), lineno)
    return out


def _exclusive(r: _Reader, section: str, plain: str, db: str) -> float:
    if r.has(section, plain) and r.has(section, db):
        raise ConfigError(f"{r.where(section, db)}: give either '{plain}' or '{db}', not both")
    if r.has(section, db):
        loss = r.get(section, db)
        if loss < 0:
            raise ConfigError(f"{r.where(section, db)}: loss must be >= 0 dB, got {loss}")
        return db_to_transmission(loss)
    return r.get(section, plain)


def parse_config(text: str, source: str = "<config>", base_dir: Path | None = None) -> Config:
    r = _Reader(text, source)
    base_dir = Path(".") if base_dir is None else base_dir
    if not r.has("system"):
        raise ConfigError(f"{source}: missing section [system]")

    loss_db = r.get("system", "loss_db") if r.has("system", "loss_db") else None
    t = _exclusive(r, "system", "t", "loss_db")
    g = lambda key: r.get("system", key)  # noqa: E731
    system = r.build("system", SystemParams, mu=g("mu"), t=t, t_b=g("t_b"), eta=g("eta"),
                     p_d=g("p_d"), f_ec=g("f_ec"), visibility=g("visibility"),
                     qber=g("qber"))

    eve = None
    if r.has("eve"):
        eve = r.build("eve", EveHardware,
                      t_bs=_exclusive(r, "eve", "t_bs", "t_bs_db"),
                      t_s=_exclusive(r, "eve", "t_s", "t_s_db"),
                      eta_e=r.get("eve", "eta_e"), p_e=r.get("eve", "p_e"),
                      mu_e=r.get("eve", "mu_e", default=system.mu))

    scenario, envelope_table = None, None
    if r.has("scenario"):
        scenario = r.build("scenario", AttackScenario,
                           method=r.get("scenario", "method", str),
                           x=r.get("scenario", "x", default=1.0),
                           n_blocked=r.get("scenario", "n_blocked", int, default=0),
                           qber_cap=r.get("scenario", "qber_cap", default=0.08))
        r.build("scenario", scenario.check_against, system)
        if r.has("scenario", "envelope_table"):
            envelope_table = base_dir / r.get("scenario", "envelope_table", str)

    sweep = None
    if r.has("sweep"):
        sweep = r.build("sweep", SweepSpec,
                        axis=r.get("sweep", "axis", str), start=r.get("sweep", "start"),
                        stop=r.get("sweep", "stop"), step=r.get("sweep", "step"),
                        protocol=r.get("sweep", "protocol", str, default="bb84"),
                        model=r.get("sweep", "model", str, default="realistic"),
                        scenario=scenario,
                        mu_follows_loss=r.get("sweep", "mu_follows_loss", bool, default=True))

    coin = None
    if r.has("coin"):
        coin = _parse_coin(r, base_dir)
    return Config(system, eve, scenario, sweep, coin, envelope_table, loss_db)


def _parse_coin(r: _Reader, base_dir: Path) -> CoinSettings:
    mu = r.get("coin", "mu")
    abort = r.get("coin", "honest_abort")
    det = None
    if r.has("coin", "k_rounds"):
        if r.has("coin", "detection_efficiency"):
            raise ConfigError(f"{r.where('coin', 'k_rounds')}: give either 'k_rounds' or "
                              "'detection_efficiency', not both")
        k = r.get("coin", "k_rounds", int)
    else:
        det = r.get("coin", "detection_efficiency", default=FIFTEEN_KM_DETECTION)
        if not 0.0 < det <= 1.0:
            raise ConfigError(f"{r.where('coin', 'detection_efficiency')}: must lie in (0, 1]")
        if not 0.0 < abort < 1.0:
            raise ConfigError(f"{r.where('coin', 'honest_abort')}: must lie in (0, 1)")
        k = rounds_for_abort(mu, det, abort)
    params = r.build("coin", QctParams, mu=mu, k_rounds=k,
                     y=r.get("coin", "y", default=FIFTEEN_KM_Y), honest_abort=abort)
    path = lambda key: (base_dir / r.get("coin", key, str)) if r.has("coin", key) else None  # noqa: E731
    classical = r.get("coin", "classical_bound") if r.has("coin", "classical_bound") else None
    if classical is not None and not 0.0 < classical < 1.0:
        raise ConfigError(f"{r.where('coin', 'classical_bound')}: must lie in (0, 1)")
    return CoinSettings(params, det, classical, path("classical_table"), path("event_table"))


def load_config(path: str | Path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(text, str(path), path.parent)


def fixture_path() -> Path:
    return Path(str(resources.files("muattack.data").joinpath("fixture_3p4db.ini")))


def load_fixture() -> Config:
    """The shipped 3.4 dB link configuration."""
    return load_config(fixture_path())


def dump_config(cfg: Config) -> str:
    """Serialise ``cfg`` so that ``parse_config`` reproduces it."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    s = cfg.system
    system = {"mu": s.mu}
    if cfg.loss_db is not None and db_to_transmission(cfg.loss_db) == s.t:
        system["loss_db"] = cfg.loss_db
    else:
        system["t"] = s.t
    system.update(t_b=s.t_b, eta=s.eta, p_d=s.p_d, f_ec=s.f_ec,
                  visibility=s.visibility, qber=s.qber)
    cp["system"] = {k: repr(float(v)) for k, v in system.items()}
    if cfg.eve is not None:
        e = cfg.eve
        cp["eve"] = {k: repr(float(getattr(e, k))) for k in ("t_bs", "t_s", "eta_e", "p_e", "mu_e")}
    sc = cfg.scenario or (cfg.sweep.scenario if cfg.sweep else None)
    if sc is not None:
        cp["scenario"] = {"method": sc.method.value, "x": repr(float(sc.x)),
                          "n_blocked": str(sc.n_blocked), "qber_cap": repr(float(sc.qber_cap))}
        if cfg.envelope_table is not None:
            cp["scenario"]["envelope_table"] = str(cfg.envelope_table)
    if cfg.sweep is not None:
        w = cfg.sweep
        cp["sweep"] = {"axis": w.axis.value, "start": repr(w.start), "stop": repr(w.stop),
                       "step": repr(w.step), "protocol": w.protocol.value,
                       "model": w.model.value, "mu_follows_loss": str(w.mu_follows_loss).lower()}
    if cfg.coin is not None:
        c = cfg.coin
        cp["coin"] = {"mu": repr(c.params.mu), "y": repr(c.params.y),
                      "honest_abort": repr(c.params.honest_abort)}
        if c.detection_efficiency is not None:
            cp["coin"]["detection_efficiency"] = repr(c.detection_efficiency)
        else:
            cp["coin"]["k_rounds"] = str(c.params.k_rounds)
        if c.classical_bound is not None:
            cp["coin"]["classical_bound"] = repr(c.classical_bound)
        for key in ("classical_table", "event_table"):
            if getattr(c, key) is not None:
                cp["coin"][key] = str(getattr(c, key))
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


__all__ = ["Axis", "Config", "ConfigError", "CoinSettings", "Model", "Protocol", "SweepSpec",
           "dump_config", "fixture_path", "load_config", "load_fixture", "parse_config",
           "transmission_to_db", "Method"]
