"""Flat ``dotted.key = value`` experiment config files.

Example::

    # spirals.cfg
    dataset.path = data/spirals.csv
    dataset.header = true
    dataset.label_column = label
    method = edrvfl
    network.hidden = 100
    network.layers = 5
    network.C = 4
    grid.C_exponents = -6..12:2
    grid.layers = 2..10
    cv.k = 10
    seed = 7

Blank lines and ``#`` comments are ignored. Lists are comma separated or
``a..b`` / ``a..b:step`` integer ranges (inclusive).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .harness import GridSpec
from .methods import METHOD_IDS, MethodSpec
from .shallow import NetworkConfig
from .sparse import FistaConfig

__all__ = ["ConfigError", "ExperimentConfig", "parse_config_text", "read_config", "build_experiment"]


class ConfigError(ValueError):
    """Bad key, bad value or missing required entry in a config file."""


KNOWN_KEYS = {
    "dataset.path", "dataset.label_column", "dataset.header", "dataset.name",
    "method", "seed", "cv.k", "output.path",
    "network.hidden", "network.layers", "network.lambda", "network.C",
    "network.direct_links", "network.bias_in_output", "network.hidden_bias",
    "network.activation", "network.seed", "network.weight_range", "network.bias_range",
    "network.normalization", "network.layer_lambdas",
    "grid.C_exponents", "grid.layers", "grid.hidden",
    "fista.l1_weight", "fista.max_iterations", "fista.tolerance", "fista.step_size",
    "ensemble.combine", "ensemble.members",
    "bench.repeats",
}


def parse_config_text(text, source="<config>"):
    entries = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def read_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), os.fspath(path))


def _bool(key, v):
    low = v.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {v!r}")


def _num(key, v, kind=float):
    try:
        return kind(v)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {v!r}") from None


def _int_list(key, v):
    out = []
    for part in v.split(","):
        part = part.strip()
        if ".." in part:
            span, _, step = part.partition(":")
            lo, hi = span.split("..", 1)
            lo, hi = _num(key, lo, int), _num(key, hi, int)
            step = _num(key, step, int) if step else 1
            if step < 1:
                raise ConfigError(f"{key}: range step must be >= 1")
            out.extend(range(lo, hi + 1, step))
        elif part:
            out.append(_num(key, part, int))
    if not out:
        raise ConfigError(f"{key}: empty list")
    return tuple(out)


def _float_list(key, v):
    return tuple(_num(key, p.strip()) for p in v.split(",") if p.strip())


def _pair(key, v):
    vals = _float_list(key, v)
    if len(vals) != 2:
        raise ConfigError(f"{key}: expected 'lo, hi', got {v!r}")
    return vals


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_paths: tuple = ()
    label_column: object = -1
    has_header: bool = False
    dataset_name: str | None = None
    method: str = "edrvfl"
    network: NetworkConfig = field(default_factory=NetworkConfig)
    grid: GridSpec = field(default_factory=GridSpec)
    fista: FistaConfig = field(default_factory=FistaConfig)
    combine: str | None = None
    members: int | None = None
    k: int = 10
    seed: int = 0
    output: str | None = None
    bench_repeats: int = 5

    def method_spec(self):
        return MethodSpec(self.method, self.network, self.fista, self.combine, self.members)


_COMBINE = {"vote": "majority_vote", "average": "score_average",
            "majority_vote": "majority_vote", "score_average": "score_average"}


def build_experiment(entries, overrides=None):
    """Turn parsed entries plus CLI overrides (``None`` values ignored) into a config."""
    e = dict(entries)
    for key, value in (overrides or {}).items():
        if value is not None:
            e[key] = str(value)

    method = e.get("method", "edrvfl")
    if method not in METHOD_IDS:
        raise ConfigError(f"unknown method {method!r}; choose from {', '.join(METHOD_IDS)}")
    seed = _num("seed", e.get("seed", "0"), int)

    net = {}
    if "network.lambda" in e and "network.C" in e:
        raise ConfigError("give network.lambda or network.C, not both")
    if "network.lambda" in e:
        net["lam"] = _num("network.lambda", e["network.lambda"])
    if "network.C" in e:
        C = _num("network.C", e["network.C"])
        if not C > 0:
            raise ConfigError("network.C must be > 0")
        net["lam"] = 1.0 / C
    simple = {
        "network.hidden": ("n_hidden", int), "network.layers": ("n_layers", int),
        "network.activation": ("activation", str), "network.normalization": ("normalization", str),
    }
    for key, (attr, kind) in simple.items():
        if key in e:
            net[attr] = e[key] if kind is str else _num(key, e[key], kind)
    for key, attr in (("network.direct_links", "direct_links"),
                      ("network.bias_in_output", "bias_in_output"),
                      ("network.hidden_bias", "hidden_bias")):
        if key in e:
            net[attr] = _bool(key, e[key])
    for key, attr in (("network.weight_range", "weight_range"), ("network.bias_range", "bias_range")):
        if key in e:
            net[attr] = _pair(key, e[key])
    if "network.layer_lambdas" in e:
        net["layer_lambdas"] = _float_list("network.layer_lambdas", e["network.layer_lambdas"])
    net["seed"] = _num("network.seed", e["network.seed"], int) if "network.seed" in e else seed

    grid = {}
    for key, attr in (("grid.C_exponents", "C_exponents"), ("grid.layers", "L_values"),
                      ("grid.hidden", "N_values")):
        if key in e:
            grid[attr] = _int_list(key, e[key])

    fista = {}
    for key, attr, kind in (("fista.l1_weight", "l1_weight", float),
                            ("fista.max_iterations", "max_iterations", int),
                            ("fista.tolerance", "tolerance", float),
                            ("fista.step_size", "step_size", float)):
        if key in e:
            fista[attr] = _num(key, e[key], kind)

    combine = None
    if "ensemble.combine" in e:
        combine = _COMBINE.get(e["ensemble.combine"])
        if combine is None:
            raise ConfigError(f"ensemble.combine must be vote or average, got {e['ensemble.combine']!r}")

    label = e.get("dataset.label_column", "-1")
    if label.lstrip("-").isdigit():
        label = int(label)

    paths = tuple(p.strip() for p in e.get("dataset.path", "").split(",") if p.strip())
    try:
        return ExperimentConfig(
            dataset_paths=paths,
            label_column=label,
            has_header=_bool("dataset.header", e.get("dataset.header", "false")),
            dataset_name=e.get("dataset.name"),
            method=method,
            network=NetworkConfig(**net),
            grid=GridSpec(**grid),
            fista=FistaConfig(**fista),
            combine=combine,
            members=_num("ensemble.members", e["ensemble.members"], int) if "ensemble.members" in e else None,
            k=_num("cv.k", e.get("cv.k", "10"), int),
            seed=seed,
            output=e.get("output.path"),
            bench_repeats=_num("bench.repeats", e.get("bench.repeats", "5"), int),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
