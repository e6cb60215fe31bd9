"""Method ids and the spec object the harness and CLI train from."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .deep import train_drvfl, train_dsp_rvfl
from .ensemble import train_edrvfl, train_edsp_rvfl, train_tedrvfl
from .shallow import NetworkConfig, train_elm, train_rvfl
from .sparse import FistaConfig, train_sp_rvfl

__all__ = ["METHOD_IDS", "SHALLOW_METHODS", "MethodSpec", "is_shallow"]

METHOD_IDS = (
    "elm",
    "rvfl",
    "sp-rvfl",
    "drvfl",
    "drvfl-no-dl",
    "edrvfl",
    "edrvfl-no-dl",
    "dsp-rvfl",
    "edsp-rvfl",
    "tedrvfl",
)
SHALLOW_METHODS = frozenset({"elm", "rvfl", "sp-rvfl"})


def is_shallow(method):
    return method in SHALLOW_METHODS


@dataclass(frozen=True)
class MethodSpec:
    """A method id plus everything needed to train it.

    ``fit(ds)`` returns a model exposing ``predict(X)`` (labels) and
    ``scores(X)``. The ``-no-dl`` ids force ``direct_links`` off.
    """

    method: str
    config: NetworkConfig = field(default_factory=NetworkConfig)
    fista: FistaConfig = field(default_factory=FistaConfig)
    combine_rule: str | None = None
    member_count: int | None = None

    def __post_init__(self):
        if self.method not in METHOD_IDS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHOD_IDS}")
        cfg = self.config
        if self.method.endswith("-no-dl") and cfg.direct_links:
            cfg = cfg.replace(direct_links=False)
        if is_shallow(self.method) and cfg.n_layers != 1:
            cfg = cfg.replace(n_layers=1, layer_lambdas=None)
        object.__setattr__(self, "config", cfg)

    @property
    def name(self):
        return self.method

    def with_config(self, **changes):
        return dataclasses.replace(self, config=self.config.replace(**changes))

    def fit(self, ds):
        cfg = self.config
        m = self.method
        if m == "elm":
            return train_elm(ds, cfg)
        if m == "rvfl":
            return train_rvfl(ds, cfg)
        if m == "sp-rvfl":
            return train_sp_rvfl(ds, cfg, self.fista)
        if m in ("drvfl", "drvfl-no-dl"):
            return train_drvfl(ds, cfg)
        if m == "dsp-rvfl":
            return train_dsp_rvfl(ds, cfg, self.fista)
        if m in ("edrvfl", "edrvfl-no-dl"):
            return train_edrvfl(ds, cfg, self.combine_rule or "majority_vote")
        if m == "edsp-rvfl":
            return train_edsp_rvfl(ds, cfg, self.fista, self.combine_rule or "majority_vote")
        return train_tedrvfl(ds, cfg, self.member_count, None, self.combine_rule or "score_average")

    def to_dict(self):
        return {
            "method": self.method,
            "config": self.config.to_dict(),
            "fista": self.fista.to_dict(),
            "combine_rule": self.combine_rule,
            "member_count": self.member_count,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            d["method"],
            NetworkConfig.from_dict(d["config"]),
            FistaConfig(**d.get("fista", {})),
            d.get("combine_rule"),
            d.get("member_count"),
        )
