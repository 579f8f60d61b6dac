"""Plain-text experiment configuration (INI sections, key = value).

The schema below is the published contract: unknown sections or keys are
rejected, every value is type-checked, and the run directory is named by
a hash of the canonical serialization.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import math
from dataclasses import dataclass, field

from .errors import InvalidConfigError
from .potential import PotentialSpec

SCHEMA = {
    "potential": {
        "kind": (str, "cubic"),
        "s": (float, 0.0),
        "rho": (float, 0.2),
        "center_x": (float, 0.0),
        "center_y": (float, 0.0),
    },
    "connection": {
        "half_length": (float, 12.0),
        "nodes": (int, 1024),
    },
    "solve": {
        "grid_denominator": (float, 8.0),
        "step_rule": (str, "bb"),
        "tol_energy": (float, 1e-11),
        "tol_grad": (float, 0.0),  # 0 -> default scale 1e-8*(1+sigma)/eps
        "max_iterations": (int, 500_000),
        "starts": (int, 1),
    },
    "diagnostics": {
        "gamma": (float, 0.35),
        "gamma0_proxy": (float, 0.5),
        "width_samples": (int, 50),
        "families_level": (int, 1),
    },
    "sweep": {
        "epsilons": (str, "0.2 0.1 0.05"),
        "c0": (float, 0.4),
        "seed": (int, 0),
        "output_root": (str, "runs"),
        "grid_cap": (int, 513),
    },
}


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)

    @classmethod
    def default(cls) -> "ExperimentConfig":
        vals = {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}
        cfg = cls(vals)
        cfg.validate()
        return cfg

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        parser = configparser.ConfigParser()
        parser.read_string(text)
        vals = {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}
        for section in parser.sections():
            if section not in SCHEMA:
                raise InvalidConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in SCHEMA[section]:
                    raise InvalidConfigError(f"unknown key {key!r} in [{section}]")
                typ = SCHEMA[section][key][0]
                try:
                    vals[section][key] = typ(raw) if typ is not str else raw.strip()
                except ValueError as exc:
                    raise InvalidConfigError(
                        f"bad value for {section}.{key}: {raw!r}"
                    ) from exc
        cfg = cls(vals)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as f:
            return cls.from_text(f.read())

    def __getitem__(self, section: str) -> dict:
        return self.values[section]

    def epsilons(self) -> list:
        try:
            eps = [float(tok) for tok in self["sweep"]["epsilons"].split()]
        except ValueError as exc:
            raise InvalidConfigError("epsilons must be a list of floats") from exc
        return eps

    def grid_size(self, epsilon: float) -> int:
        denom = self["solve"]["grid_denominator"]
        n = int(math.ceil(2.0 * denom / epsilon)) + 1
        if n % 2 == 0:
            n += 1
        return max(n, 9)

    def potential_spec(self) -> PotentialSpec:
        p = self["potential"]
        if p["kind"] == "cubic":
            return PotentialSpec()
        if p["kind"] == "perturbed-cubic":
            return PotentialSpec(
                kind="perturbed-cubic",
                s=p["s"],
                rho=p["rho"],
                center=(p["center_x"], p["center_y"]),
            )
        raise InvalidConfigError(f"unsupported potential kind {p['kind']!r}")

    def validate(self) -> None:
        eps = self.epsilons()
        if not eps:
            raise InvalidConfigError("epsilon ladder is empty")
        if any(e <= 0 or e >= 1 for e in eps):
            raise InvalidConfigError("epsilons must lie in (0, 1)")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise InvalidConfigError("epsilon ladder must be strictly descending")
        if self["solve"]["grid_denominator"] < 4.0:
            raise InvalidConfigError("grid_denominator must be >= 4 (h <= eps/4)")
        cap = self["sweep"]["grid_cap"]
        for e in eps:
            n = self.grid_size(e)
            if n > cap:
                raise InvalidConfigError(
                    f"epsilon {e} needs grid {n} > cap {cap}"
                )
        if self["solve"]["step_rule"] not in ("bb", "fixed"):
            raise InvalidConfigError("step_rule must be bb or fixed")
        if self["diagnostics"]["gamma"] <= 0:
            raise InvalidConfigError("gamma must be positive")
        self.potential_spec()

    def canonical_text(self) -> str:
        buf = io.StringIO()
        for section in sorted(self.values):
            buf.write(f"[{section}]\n")
            for key in sorted(self.values[section]):
                buf.write(f"{key} = {self.values[section][key]}\n")
        return buf.getvalue()

    def digest(self, length: int = 12) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:length]
