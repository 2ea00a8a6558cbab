import configparser
import os
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from App.errors import ConfigError, DomainError, StructuralError
from App.models.chain import Decomposition, EvidencePattern
from App.models.transition import TransitionMatrix, from_conditionals, homogeneous_step

DEFAULT_CONFIG = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "config.ini")
RUN_SECTION = "run"
# agreement required between an explicit target and the composed steps
TARGET_TOLERANCE = 1e-9


@dataclass
class ConfigHandler:
    """
    Handles application configuration using configparser.

    Attributes:
        config_file (str): Path to the configuration file.
        config (configparser.ConfigParser): Parser instance for reading configuration.

    Every getter falls back to the documented default when the file or the
    key is missing, and raises ConfigError when a value does not parse.
    """

    config_file: str = DEFAULT_CONFIG
    config: configparser.ConfigParser = field(init=False)

    def __post_init__(self):
        self.config = configparser.ConfigParser()
        try:
            self.config.read(self.config_file, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"Malformed configuration file {self.config_file}: {exc}") from exc

    def _get(self, section: str, key: str, fallback, cast=str):
        raw = self.config.get(section, key, fallback=None)
        if raw is None or raw.strip() == "":
            return fallback
        try:
            return cast(raw.strip())
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r} in {self.config_file} is not a valid value") from exc

    def get_name_log(self) -> str:
        return self._get("SETTING", "NAME_LOG", "causabound.log")

    def get_log_size(self) -> int:
        return self._get("SETTING", "LOG_SIZE", 10485760, int)

    def get_log_level(self) -> str:
        return self._get("SETTING", "LOG_LEVEL", "INFO").upper()

    def get_seed(self) -> int:
        return self._get("SETTING", "SEED", 20240601, int)

    def get_significant_digits(self) -> int:
        return self._get("SETTING", "SIGNIFICANT_DIGITS", 9, int)

    def get_output_dir(self) -> str:
        return self._get("SETTING", "OUTPUT_DIR", "output")

    def get_sharpness_tolerance(self) -> float:
        return self._get("TOLERANCE", "SHARPNESS", 1e-10, float)

    def get_figure_tau(self) -> float:
        return self._get("FIGURES", "TAU", 0.2, float)

    def get_figure_rho_values(self) -> List[float]:
        return self._get("FIGURES", "RHO_VALUES", [-0.4, -0.2, 0.0, 0.2, 0.4, 0.6], parse_float_list)

    def get_figure_n_max(self) -> int:
        return self._get("FIGURES", "N_MAX", 30, int)

    def get_figure_width(self) -> int:
        return self._get("FIGURES", "WIDTH", 640, int)

    def get_figure_height(self) -> int:
        return self._get("FIGURES", "HEIGHT", 400, int)

    def get_interior_samples(self) -> int:
        return self._get("ORACLE", "INTERIOR_SAMPLES", 1000, int)

    def get_samples(self) -> int:
        return self._get("ORACLE", "SAMPLES", 100000, int)

    def get_exposure_prob(self) -> float:
        return self._get("ORACLE", "EXPOSURE_PROB", 0.5, float)

    def get_significance(self) -> float:
        return self._get("ORACLE", "SIGNIFICANCE", 0.01, float)

    def get_block_size(self) -> int:
        return self._get("ORACLE", "BLOCK_SIZE", 65536, int)


def parse_float_list(text: str) -> List[float]:
    values = []
    for part in text.split(","):
        if not part.strip():
            continue
        try:
            values.append(float(part))
        except ValueError as exc:
            raise ConfigError(f"{part.strip()!r} in {text!r} is not a number") from exc
    return values


def parse_pair(text: str) -> Tuple[float, float]:
    parts = parse_float_list(text)
    if len(parts) != 2:
        raise ValueError(f"expected 'tau,rho', got {text!r}")
    return parts[0], parts[1]


class _RepeatedKeys(OrderedDict):
    # configparser stores a key's lines as a list while reading; repeated keys extend it
    def __setitem__(self, key, value):
        if isinstance(value, list) and key in self:
            self[key].extend(value)
        else:
            super().__setitem__(key, value)


@dataclass(frozen=True)
class RunConfig:
    """
    One run of the CLI: a target law, an optional chain and evidence, and
    sweep and output settings.
    """

    target: TransitionMatrix
    steps: Optional[Tuple[TransitionMatrix, ...]] = None
    homogeneous_n: Optional[int] = None
    evidence: Optional[str] = None
    xy: Optional[str] = None
    seed: Optional[int] = None
    output_dir: Optional[str] = None
    n_max: Optional[int] = None
    rho_values: Optional[Tuple[float, ...]] = None

    def decomposition(self) -> Optional[Decomposition]:
        if self.steps is not None:
            return Decomposition(self.steps)
        if self.homogeneous_n is not None:
            return Decomposition.homogeneous(homogeneous_step(self.target, self.homogeneous_n), self.homogeneous_n)
        return None

    def pattern(self) -> Optional[EvidencePattern]:
        if self.evidence is not None:
            return EvidencePattern.parse(self.evidence)
        if self.xy is not None:
            D = self.decomposition()
            n = D.n if D is not None else 1
            return EvidencePattern.unobserved(n, int(self.xy[0]), int(self.xy[1]))
        return None


def build_run_config(values: dict, source: str = "arguments") -> RunConfig:
    """
    Validates raw settings into a RunConfig. Used for run config files and,
    with the same rules, for CLI flags.
    """
    try:
        return _build(values)
    except ConfigError:
        raise
    except (DomainError, StructuralError, ValueError) as exc:
        raise ConfigError(f"Invalid run configuration in {source}: {exc}") from exc


def _build(values: dict) -> RunConfig:
    given = {key: value for key, value in values.items() if value is not None}

    has_pair = "tau" in given or "rho" in given
    has_conditionals = "p1_given_do0" in given or "p1_given_do1" in given
    if has_pair and has_conditionals:
        raise ConfigError("Give the target either as tau, rho or as p1_given_do0, p1_given_do1, not both")
    if has_pair and not ("tau" in given and "rho" in given):
        raise ConfigError("tau and rho must be given together")
    if has_conditionals and not ("p1_given_do0" in given and "p1_given_do1" in given):
        raise ConfigError("p1_given_do0 and p1_given_do1 must be given together")

    steps = None
    if given.get("step"):
        pairs = [parse_pair(item) if isinstance(item, str) else tuple(item) for item in given["step"]]
        steps = tuple(TransitionMatrix(tau, rho) for tau, rho in pairs)
    if steps is not None and "homogeneous_n" in given:
        raise ConfigError("Give either explicit steps or homogeneous_n, not both")

    if has_pair:
        target = TransitionMatrix(float(given["tau"]), float(given["rho"]))
    elif has_conditionals:
        target = from_conditionals(float(given["p1_given_do0"]), float(given["p1_given_do1"]))
    elif steps is not None:
        target = Decomposition(steps).composed()
    else:
        raise ConfigError("No target law: give tau and rho, p1_given_do0 and p1_given_do1, or steps")

    if steps is not None and (has_pair or has_conditionals):
        composed = Decomposition(steps).composed()
        if abs(composed.tau - target.tau) > TARGET_TOLERANCE or abs(composed.rho - target.rho) > TARGET_TOLERANCE:
            raise ConfigError(f"The steps compose to {composed}, not to the target {target}")

    if "evidence" in given and "xy" in given:
        raise ConfigError("Give either evidence or xy, not both")
    xy = given.get("xy")
    if xy is not None and (len(xy) != 2 or any(ch not in "01" for ch in xy)):
        raise ConfigError(f"xy must be two bits such as '11', got {xy!r}")

    rho_values = given.get("rho_values")
    if isinstance(rho_values, str):
        rho_values = parse_float_list(rho_values)

    config = RunConfig(
        target=target,
        steps=steps,
        homogeneous_n=int(given["homogeneous_n"]) if "homogeneous_n" in given else None,
        evidence=given.get("evidence"),
        xy=xy,
        seed=int(given["seed"]) if "seed" in given else None,
        output_dir=given.get("output_dir"),
        n_max=int(given["n_max"]) if "n_max" in given else None,
        rho_values=tuple(rho_values) if rho_values is not None else None,
    )

    chain_length = len(steps) if steps is not None else config.homogeneous_n
    pattern = EvidencePattern.parse(config.evidence) if config.evidence is not None else None
    if pattern is not None and chain_length is not None and pattern.n != chain_length:
        raise ConfigError(f"Evidence '{pattern}' has {pattern.n + 1} nodes but the chain has {chain_length + 1}")
    if pattern is not None and chain_length is None and pattern.n != 1:
        raise ConfigError(f"Evidence '{pattern}' names mediators but no chain was given")
    return config


RUN_KEYS = ("tau", "rho", "p1_given_do0", "p1_given_do1", "step", "homogeneous_n", "evidence", "xy",
            "seed", "output_dir", "n_max", "rho_values")


@dataclass
class RunConfigHandler:
    """
    Reads a run config: `key = value` lines, `#` comments, and repeated
    `step = tau,rho` lines for an explicit chain.

    Attributes:
        config_file (str): Path to the run config.
        config (configparser.ConfigParser): Parser over the implicit [run] section.

    Methods:
        get_values() -> dict: raw values, with `step` as a list of strings.
        get_run_config() -> RunConfig: validated settings.
    """

    config_file: str
    config: configparser.ConfigParser = field(init=False)

    def __post_init__(self):
        self.config = configparser.ConfigParser(dict_type=_RepeatedKeys, strict=False,
                                                comment_prefixes=("#",), inline_comment_prefixes=("#",),
                                                interpolation=None)
        try:
            with open(self.config_file, encoding="utf-8") as handle:
                self.config.read_string(f"[{RUN_SECTION}]\n" + handle.read(), source=self.config_file)
        except OSError as exc:
            raise ConfigError(f"Cannot read run config {self.config_file}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"Malformed run config {self.config_file}: {exc}") from exc

    def get_values(self) -> dict:
        section = self.config[RUN_SECTION]
        unknown = sorted(set(section) - set(RUN_KEYS))
        if unknown:
            raise ConfigError(f"Unknown key(s) in {self.config_file}: {', '.join(unknown)}")

        values = {}
        for key in section:
            lines = [line.strip() for line in section[key].split("\n") if line.strip()]
            if key == "step":
                values[key] = lines
            elif len(lines) != 1:
                raise ConfigError(f"Key {key!r} must appear exactly once with a value in {self.config_file}")
            else:
                values[key] = lines[0]
        return values

    def get_run_config(self) -> RunConfig:
        return build_run_config(self.get_values(), source=self.config_file)
