"""
Config Loader
Loads TOML run configurations, applies --set overrides and environment
defaults, and builds validated model and grid objects from them.
"""

import logging
import os
import re

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from dotenv import load_dotenv

from intermittency.bounds import (
    BoundedProfile,
    Clipped,
    Constant,
    DeadZone,
    General,
    Linear,
    ModelSpec,
    Sine,
    SublinearRequest,
)
from intermittency.common.errors import ConfigError
from intermittency.levy_symbol import (
    BrownianScaled,
    Custom,
    LevySymbol,
    StableSym,
    SumStable,
    TabulatedExponent,
)
from intermittency.simulator import GridSpec

logger = logging.getLogger(__name__)

PRESETS_DIR = Path(__file__).resolve().parent.parent.parent / "presets"
OUTPUT_FORMATS = ("csv", "json")

_TABLE_RE = re.compile(r"^\s*\[([A-Za-z0-9_.\-]+)\]\s*(#.*)?$")
_KEY_RE = re.compile(r"^\s*([A-Za-z0-9_\-]+)\s*=")


@dataclass(frozen=True)
class EnvDefaults:
    out_dir: str
    threads: int
    log_level: str


def load_env_defaults() -> EnvDefaults:
    """Read INTERMITTENCY_* variables, loading a .env file when present"""
    load_dotenv()
    threads = os.getenv("INTERMITTENCY_THREADS", "1")
    try:
        n_threads = int(threads)
    except ValueError:
        raise ConfigError(f"expected an integer, got {threads!r}", field="INTERMITTENCY_THREADS")
    return EnvDefaults(
        out_dir=os.getenv("INTERMITTENCY_OUT_DIR", "results"),
        threads=max(1, n_threads),
        log_level=os.getenv("INTERMITTENCY_LOG_LEVEL", "INFO").upper(),
    )


def index_lines(text: str) -> Dict[str, int]:
    """Map dotted keys to the 1-based line that defines them"""
    index = {}
    table = ""
    for number, line in enumerate(text.splitlines(), start=1):
        match = _TABLE_RE.match(line)
        if match:
            table = match.group(1)
            index.setdefault(table, number)
            continue
        match = _KEY_RE.match(line)
        if match:
            key = match.group(1)
            index[f"{table}.{key}" if table else key] = number
    return index


def parse_override(assignment: str) -> Tuple[str, Any]:
    """'a.b=value' with value read as a TOML literal, falling back to a bare string"""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value", field="--set")
    key, raw = assignment.split("=", 1)
    key = key.strip()
    if not key or any(not part for part in key.split(".")):
        raise ConfigError(f"override {assignment!r} has an empty key", field="--set")
    try:
        value = tomllib.loads(f"value = {raw.strip()}")["value"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    return key, value


@dataclass
class RunConfig:
    data: Dict[str, Any]
    source: str = "<defaults>"
    lines: Dict[str, int] = field(default_factory=dict)

    # -- field access ----------------------------------------------------

    def error(self, message: str, key: str) -> ConfigError:
        return ConfigError(message, field=key, source=self.source, line=self._line(key))

    def table(self, name: str) -> Dict[str, Any]:
        value = self.data.get(name, {})
        if not isinstance(value, dict):
            raise self.error("expected a table", name)
        return value

    def get(self, dotted: str, default: Any = None) -> Any:
        node: Any = self.data
        for part in dotted.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def require(self, dotted: str, kind: type, expected: str) -> Any:
        value = self.get(dotted)
        if value is None:
            raise ConfigError(f"missing required field, expected {expected}", field=dotted,
                              source=self.source, line=self._line(dotted))
        return self._typed(dotted, value, kind, expected)

    def optional(self, dotted: str, kind: type, expected: str, default: Any = None) -> Any:
        value = self.get(dotted)
        if value is None:
            return default
        return self._typed(dotted, value, kind, expected)

    def _typed(self, dotted, value, kind, expected):
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if isinstance(value, bool) and kind is not bool or not isinstance(value, kind):
            raise ConfigError(f"expected {expected}, got {value!r}", field=dotted,
                              source=self.source, line=self._line(dotted))
        return value

    def _reals(self, dotted: str) -> Tuple[float, ...]:
        values = self.require(dotted, list, "a list of reals")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            raise self.error("expected a list of reals", dotted)
        return tuple(float(v) for v in values)

    def _line(self, dotted: str) -> Optional[int]:
        key = dotted
        while key:
            if key in self.lines:
                return self.lines[key]
            if "." not in key:
                return None
            key = key.rsplit(".", 1)[0]
        return None

    def set(self, dotted: str, value: Any) -> None:
        node = self.data
        parts = dotted.split(".")
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"cannot override inside non-table value at '{part}'", field=dotted)
            node = child
        node[parts[-1]] = value

    def _attributed(self, exc: ConfigError) -> ConfigError:
        """Attach file and line to a validation error raised by a model constructor"""
        if exc.source is not None or exc.field is None:
            return exc
        bare = str(exc)
        prefix = f"{exc.field}: "
        message = bare[len(prefix):] if bare.startswith(prefix) else bare
        return ConfigError(message, field=exc.field, source=self.source, line=self._line(exc.field))

    # -- typed sections --------------------------------------------------

    @property
    def seed(self) -> Optional[int]:
        seed = self.optional("seed", int, "an unsigned 64-bit integer")
        if seed is not None and not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer", field="seed",
                              source=self.source, line=self._line("seed"))
        return seed

    def p_list(self, key: str = "p_list") -> List[int]:
        values = self.optional(key, list, "a list of even integers", default=[2, 4])
        for value in values:
            if isinstance(value, bool) or not isinstance(value, int) or value < 2 or value % 2:
                raise ConfigError(f"expected even integers >= 2, got {value!r}", field=key,
                                  source=self.source, line=self._line(key))
        return sorted(set(values))

    def beta_list(self) -> List[float]:
        values = self.optional("beta_list", list, "a list of positive reals", default=[0.1, 1.0, 10.0])
        betas = []
        for value in values:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
                raise ConfigError(f"expected positive reals, got {value!r}", field="beta_list",
                                  source=self.source, line=self._line("beta_list"))
            betas.append(float(value))
        return betas

    def generator(self) -> LevySymbol:
        variant = self.require("generator.variant", str, "one of brownian, stable, sum_stable, custom")
        try:
            if variant == "brownian":
                return BrownianScaled(self.require("generator.kappa", float, "a positive real"))
            if variant == "stable":
                return StableSym(self.require("generator.kappa", float, "a positive real"),
                                 self.require("generator.alpha", float, "a real in (0, 2]"))
            if variant == "sum_stable":
                terms = self.require("generator.terms", list, "a list of [kappa, alpha] pairs")
                pairs = []
                for i, term in enumerate(terms):
                    if (not isinstance(term, list) or len(term) != 2
                            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in term)):
                        raise ConfigError(f"term {i} must be a [kappa, alpha] pair of reals",
                                          field="generator.terms")
                    pairs.append((float(term[0]), float(term[1])))
                return SumStable(tuple(pairs))
            if variant == "custom":
                table = TabulatedExponent(
                    self._reals("generator.xi"),
                    self._reals("generator.re_psi"),
                    self.require("generator.small_exponent", float, "a positive real"),
                    self.require("generator.large_exponent", float, "a positive real"),
                )
                return Custom(table, table.small_exponent, table.large_exponent,
                              label=self.optional("generator.label", str, "a string", "custom"))
        except ConfigError as exc:
            raise self._attributed(exc)
        raise self.error(f"unknown generator variant {variant!r}, expected brownian, stable, sum_stable or custom",
                         "generator.variant")

    def sigma(self):
        kind = self.optional("sigma.kind", str, "a nonlinearity kind", default="linear")
        real = "a real number"
        try:
            if kind == "linear":
                return Linear(self.require("sigma.lambda", float, "a nonzero real"))
            if kind == "general":
                return General(
                    self.optional("sigma.sigma0", float, real, 0.0),
                    self.require("sigma.lip", float, "a positive real"),
                    self.require("sigma.q_inf", float, "a nonnegative real"),
                    self.require("sigma.q_asymp", float, "a nonnegative real"),
                    self.optional("sigma.bound_sup", float, "a nonnegative real"),
                )
            if kind == "sine":
                return Sine(self.require("sigma.a", float, real), self.require("sigma.b", float, real))
            if kind == "clipped":
                return Clipped(self.require("sigma.lambda", float, real), self.require("sigma.c", float, real))
            if kind == "dead_zone":
                return DeadZone(self.require("sigma.lambda", float, real), self.require("sigma.w", float, real))
        except ConfigError as exc:
            raise self._attributed(exc)
        raise self.error(f"unknown sigma kind {kind!r}", "sigma.kind")

    def u0(self):
        kind = self.optional("u0.kind", str, "constant or bounded", default="constant")
        try:
            if kind == "constant":
                return Constant(self.require("u0.eta", float, "a nonnegative real"))
            if kind == "bounded":
                return BoundedProfile(self.require("u0.lower", float, "a nonnegative real"),
                                      self.require("u0.upper", float, "a real >= lower"),
                                      self.optional("u0.tag", str, "cosine or step", "cosine"))
        except ConfigError as exc:
            raise self._attributed(exc)
        raise self.error(f"unknown initial-data kind {kind!r}", "u0.kind")

    def model(self) -> ModelSpec:
        return ModelSpec(self.generator(), self.sigma(), self.u0())

    def grid(self, seed: int) -> GridSpec:
        try:
            return GridSpec(
                length=self.require("grid.L", float, "a positive real"),
                n_points=self.require("grid.N", int, "a power of 2"),
                dt=self.require("grid.dt", float, "a positive real"),
                t_max=self.require("grid.T", float, "a positive real"),
                n_paths=self.require("grid.M", int, "a positive integer"),
                seed=seed,
                record_every=self.optional("grid.record_every", int, "a positive integer", 10),
            )
        except ConfigError as exc:
            raise self._attributed(exc)

    def sublinear(self) -> Optional[SublinearRequest]:
        if self.get("bounds.sublinear") is None:
            return None
        return SublinearRequest(
            q0=self.require("bounds.sublinear.q0", float, "a positive real"),
            beta=self.require("bounds.sublinear.beta", float, "a positive real"),
            A=self.optional("bounds.sublinear.A", float, "a nonnegative real"),
        )

    def formats(self) -> Tuple[str, ...]:
        formats = self.optional("output.formats", list, "a subset of [csv, json]", list(OUTPUT_FORMATS))
        unknown = [f for f in formats if f not in OUTPUT_FORMATS]
        if unknown or not formats:
            raise ConfigError(f"formats must be a nonempty subset of {list(OUTPUT_FORMATS)}, got {formats}",
                              field="output.formats", source=self.source, line=self._line("output.formats"))
        return tuple(formats)

    def validate(self) -> None:
        """Build everything the file declares so errors surface before any work starts"""
        self.model()
        self.p_list()
        self.beta_list()
        self.formats()
        seed = self.seed
        if "grid" in self.data:
            self.grid(seed or 0)


class ConfigLoader:
    """Reads run configurations from files or the bundled presets"""

    def __init__(self, presets_dir: Path = PRESETS_DIR):
        self.presets_dir = presets_dir

    def load(self, path: Optional[str], overrides: Tuple[str, ...] = ()) -> RunConfig:
        if path is None:
            config = RunConfig({})
        else:
            config_file = Path(path)
            if not config_file.exists():
                candidate = self.presets_dir / f"{path}.toml"
                if not candidate.exists():
                    raise ConfigError(f"configuration file not found: {path}", field="--config")
                config_file = candidate
            text = config_file.read_text(encoding="utf-8")
            try:
                data = tomllib.loads(text)
            except tomllib.TOMLDecodeError as exc:
                match = re.search(r"line (\d+)", str(exc))
                raise ConfigError(f"invalid TOML: {exc}", source=str(config_file),
                                  line=int(match.group(1)) if match else None)
            config = RunConfig(data, str(config_file), index_lines(text))
        for assignment in overrides:
            key, value = parse_override(assignment)
            config.set(key, value)
            logger.debug("override %s = %r", key, value)
        return config

    def list_presets(self) -> List[str]:
        if not self.presets_dir.exists():
            return []
        return sorted(p.stem for p in self.presets_dir.glob("*.toml"))
