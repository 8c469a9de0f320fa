"""Run configuration: an INI file with [model], [experiment], [noise], [optimizer], [output].

Example::

    [model]
    n_sites = 3
    J = 1.0
    g = 1.0

    [experiment]
    temperatures = 0, 0.5, 1, 2, 3.5, 6, inf
    prep = exact            ; exact | reference | optimized
    evolution = trotter     ; trotter | exact
    schedule = 0.2, 0.2, 0.4
    shots = none            ; none (expectation values only) or a positive integer
    seed = 0

    [noise]
    enabled = false
    p1 = 0.005
    p2 = 0.015
    p_readout = 0.01

Everything except ``[model]`` and ``temperatures`` has a default.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field

from .errors import ArgumentError, ConfigError
from .noise import NoiseModel
from .protocol import Evolution, OtocExperiment, PrepMode, TrotterSchedule
from .spinchain import MAX_SITES, Temperature, TfimParams
from .tfd import OptimizerConfig, TfdParameters

PREP_CHOICES = ("exact", "reference", "optimized")
FORMAT_CHOICES = ("csv", "dat")


@dataclass
class RunConfig:
    n_sites: int
    J: float
    g: float
    temperatures: list[Temperature]
    prep: str = "exact"
    topology: str = "centered"
    evolution: str = "trotter"
    schedule: tuple[float, ...] = (0.2, 0.2, 0.4)
    shots: int | None = None
    seed: int = 0
    pad_depth: bool = False
    w_site: int = 1
    v_site: int = 1
    noise: NoiseModel | None = None
    restarts: int = 20
    xatol: float = 1e-6
    max_evals: int = 2000
    output_dir: str = "results"
    formats: list[str] = field(default_factory=lambda: ["csv", "dat"])

    @property
    def tfim(self) -> TfimParams:
        return TfimParams(self.n_sites, self.J, self.g)

    @property
    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(self.restarts, self.seed, self.xatol, self.max_evals)

    def experiment(self, temp: Temperature) -> OtocExperiment:
        return OtocExperiment(
            tfim=self.tfim,
            temp=temp,
            prep=PrepMode.EXACT_TFD if self.prep == "exact" else PrepMode.VARIATIONAL,
            topology=self.topology,
            w_site=self.w_site,
            v_site=self.v_site,
            schedule=TrotterSchedule(self.schedule),
            evolution=Evolution(self.evolution),
            shots=self.shots,
            noise=self.noise,
            seed=self.seed,
            pad_depth=self.pad_depth,
            allow_starved=True,
        )

    def validate(self):
        if not 1 <= self.n_sites <= MAX_SITES:
            raise ConfigError(f"[model] n_sites={self.n_sites} exceeds capacity (1..{MAX_SITES})")
        for name in ("J", "g", "xatol"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if not self.temperatures:
            raise ConfigError("[experiment] temperatures is empty")
        if self.prep not in PREP_CHOICES:
            raise ConfigError(f"[experiment] prep must be one of {PREP_CHOICES}, got {self.prep!r}")
        if self.topology not in ("centered", "uniform"):
            raise ConfigError(f"[experiment] topology must be centered or uniform, got {self.topology!r}")
        if self.evolution not in ("trotter", "exact"):
            raise ConfigError(f"[experiment] evolution must be trotter or exact, got {self.evolution!r}")
        if self.restarts < 1 or self.max_evals < 1:
            raise ConfigError("[optimizer] restarts and max_evals must be >= 1")
        bad = set(self.formats) - set(FORMAT_CHOICES)
        if bad:
            raise ConfigError(f"[output] unknown formats {sorted(bad)}")
        try:
            TrotterSchedule(self.schedule)
            self.tfim
            for temp in self.temperatures:
                exp = self.experiment(temp)
                exp.tfd_params = TfdParameters((0.0,) * 4)  # placeholder; resolved per run
                exp.validate()
        except ArgumentError as exc:
            raise ConfigError(str(exc)) from exc
        return self


def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        m = re.match(r"\[(.+)\]$", stripped)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", stripped):
            return lineno
    return None


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def loads(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keep J / g case
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    def get(section, key, convert, default=...):
        if not parser.has_option(section, key):
            if default is ...:
                raise ConfigError(f"{source}: missing required field [{section}] {key}")
            return default
        raw = parser.get(section, key)
        try:
            return convert(raw)
        except (ValueError, ArgumentError) as exc:
            line = _line_of(text, section, key)
            where = f"line {line}, " if line else ""
            raise ConfigError(f"{source}: {where}[{section}] {key} = {raw!r}: {exc}") from None

    def optional_int(raw):
        return None if raw.strip().lower() in ("none", "") else int(raw)

    def boolean(raw):
        v = raw.strip().lower()
        if v in ("true", "yes", "on", "1"):
            return True
        if v in ("false", "no", "off", "0"):
            return False
        raise ValueError("expected true/false")

    def temps(raw):
        return [Temperature.parse(x) for x in raw.replace(",", " ").split()]

    noise = None
    if get("noise", "enabled", boolean, False):
        noise = NoiseModel(
            get("noise", "p1", float, 0.005),
            get("noise", "p2", float, 0.015),
            get("noise", "p_readout", float, 0.01),
        )
    cfg = RunConfig(
        n_sites=get("model", "n_sites", int),
        J=get("model", "J", float),
        g=get("model", "g", float),
        temperatures=get("experiment", "temperatures", temps),
        prep=get("experiment", "prep", str.strip, "exact"),
        topology=get("experiment", "topology", str.strip, "centered"),
        evolution=get("experiment", "evolution", str.strip, "trotter"),
        schedule=tuple(get("experiment", "schedule", _floats, [0.2, 0.2, 0.4])),
        shots=get("experiment", "shots", optional_int, None),
        seed=get("experiment", "seed", int, 0),
        pad_depth=get("experiment", "pad_depth", boolean, False),
        w_site=get("experiment", "w_site", int, 1),
        v_site=get("experiment", "v_site", int, 1),
        noise=noise,
        restarts=get("optimizer", "restarts", int, 20),
        xatol=get("optimizer", "xatol", float, 1e-6),
        max_evals=get("optimizer", "max_evals", int, 2000),
        output_dir=get("output", "directory", str.strip, "results"),
        formats=get("output", "formats", lambda r: r.replace(",", " ").split(), ["csv", "dat"]),
    )
    return cfg.validate()


def load(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text, source=str(path))


def dumps(cfg: RunConfig) -> str:
    """Render ``cfg`` so that ``loads(dumps(cfg)) == cfg``."""
    lines = [
        "[model]",
        f"n_sites = {cfg.n_sites}",
        f"J = {cfg.J!r}",
        f"g = {cfg.g!r}",
        "",
        "[experiment]",
        "temperatures = " + ", ".join(t.label if t.is_infinite else repr(t.value) for t in cfg.temperatures),
        f"prep = {cfg.prep}",
        f"topology = {cfg.topology}",
        f"evolution = {cfg.evolution}",
        "schedule = " + ", ".join(repr(d) for d in cfg.schedule),
        f"shots = {'none' if cfg.shots is None else cfg.shots}",
        f"seed = {cfg.seed}",
        f"pad_depth = {str(cfg.pad_depth).lower()}",
        f"w_site = {cfg.w_site}",
        f"v_site = {cfg.v_site}",
        "",
        "[noise]",
        f"enabled = {str(cfg.noise is not None).lower()}",
    ]
    if cfg.noise is not None:
        lines += [f"p1 = {cfg.noise.p1!r}", f"p2 = {cfg.noise.p2!r}", f"p_readout = {cfg.noise.p_readout!r}"]
    lines += [
        "",
        "[optimizer]",
        f"restarts = {cfg.restarts}",
        f"xatol = {cfg.xatol!r}",
        f"max_evals = {cfg.max_evals}",
        "",
        "[output]",
        f"directory = {cfg.output_dir}",
        "formats = " + ", ".join(cfg.formats),
    ]
    return "\n".join(lines) + "\n"
