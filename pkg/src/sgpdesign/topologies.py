"""Base topology generators: windmill, random geometric, random connected, edge lists."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import ConfigError, Disconnected
from .graphs import BaseTopology, Graph


def windmill(m: int, k: int) -> BaseTopology:
    """``m`` cliques of ``k`` nodes sharing hub node 0 (``m(k-1)+1`` nodes)."""
    if m < 1 or k < 2:
        raise ValueError("windmill needs m >= 1 and k >= 2")
    edges = []
    for c in range(m):
        members = [0] + [1 + c * (k - 1) + i for i in range(k - 1)]
        edges += list(combinations(members, 2))
    return BaseTopology(m * (k - 1) + 1, edges)


def random_geometric(n: int, radius: float, seed: int, max_retries: int = 1000) -> BaseTopology:
    """Uniform points in the unit square, linked within ``radius``; resampled until connected."""
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        pts = rng.random((n, 2))
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        iu, ju = np.nonzero(np.triu(d <= radius, k=1))
        g = Graph(n, zip(iu.tolist(), ju.tolist()))
        if g.is_connected():
            return BaseTopology(n, g.edges)
    raise Disconnected(f"no connected random geometric graph after {max_retries} draws")


def random_connected(n: int, density: float, seed: int, max_retries: int = 1000) -> BaseTopology:
    """Erdős–Rényi graph with edge probability ``density``, resampled until connected."""
    rng = np.random.default_rng(seed)
    pairs = list(combinations(range(n), 2))
    for _ in range(max_retries):
        keep = rng.random(len(pairs)) < density
        g = Graph(n, [p for p, kp in zip(pairs, keep) if kp])
        if g.is_connected():
            return BaseTopology(n, g.edges)
    raise Disconnected(f"no connected G(n={n}, p={density}) after {max_retries} draws")


@dataclass
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "GeneratorSpec":
        """Parse ``kind:key=value,...``, e.g. ``windmill:m=3,k=21`` or ``rg:n=33,radius=0.5,seed=1``.

        ``edge_list:path=...`` (or ``edge_list:some/file.txt``) reads a file.
        """
        kind, _, rest = text.partition(":")
        kind = {"rg": "random_geometric", "edges": "edge_list"}.get(kind.strip(), kind.strip())
        params = {}
        if rest:
            if kind == "edge_list" and "=" not in rest:
                return cls(kind, {"path": rest})
            for item in rest.split(","):
                key, sep, val = item.partition("=")
                if not sep:
                    raise ConfigError(f"bad generator parameter {item!r} in {text!r}")
                params[key.strip()] = val.strip()
        return cls(kind, params)

    def build(self) -> BaseTopology:
        p = self.params
        try:
            if self.kind == "windmill":
                return windmill(int(p["m"]), int(p["k"]))
            if self.kind == "random_geometric":
                return random_geometric(int(p["n"]), float(p["radius"]), int(p["seed"]))
            if self.kind == "random":
                return random_connected(int(p["n"]), float(p["density"]), int(p["seed"]))
            if self.kind == "edge_list":
                return BaseTopology.from_file(p["path"])
        except KeyError as exc:
            raise ConfigError(f"generator {self.kind!r} is missing parameter {exc.args[0]!r}") from None
        raise ConfigError(f"unknown generator kind {self.kind!r}")
