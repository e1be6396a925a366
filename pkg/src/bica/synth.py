"""Synthetic sources and linear mixing for experiments."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import InvalidData, InvalidSpec, RankDeficient

# fixed 3x3 mixing of the image experiment, entries listed column by column
FIXED_MIXING_3X3 = np.array(
    [[0.8, 0.3, -0.3],
     [0.2, -0.8, 0.7],
     [0.3, 0.2, 0.3]]
).T

KINDS = ("uniform", "gmm", "laplace", "student_t", "two_point", "gaussian")


@dataclass(frozen=True)
class SourceSpec:
    kind: str
    weights: tuple = (0.5, 0.5)
    means: tuple = (-1.0, 1.0)
    sds: tuple = (0.3, 0.3)
    nu: float = 5.0
    standardized: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown source kind {self.kind!r}; choose from {KINDS}")
        if self.kind == "gmm":
            if not len(self.weights) == len(self.means) == len(self.sds) >= 1:
                raise InvalidSpec("gmm weights, means and sds need equal lengths")
            if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-9:
                raise InvalidSpec(f"gmm weights must be nonnegative and sum to 1: {self.weights}")
            if any(s <= 0 for s in self.sds):
                raise InvalidSpec("gmm sds must be positive")
        if self.kind == "student_t" and not self.nu > 0:
            raise InvalidSpec("student_t needs nu > 0")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        k = self.kind
        if k == "uniform":
            return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), n)
        if k == "gmm":
            comp = rng.choice(len(self.weights), size=n, p=np.asarray(self.weights))
            return rng.normal(np.asarray(self.means)[comp], np.asarray(self.sds)[comp])
        if k == "laplace":
            return rng.laplace(0.0, 1.0 / math.sqrt(2.0), n)
        if k == "student_t":
            x = rng.standard_t(self.nu, n)
            return x * math.sqrt((self.nu - 2.0) / self.nu) if self.nu > 2 else x
        if k == "two_point":
            return rng.choice([-1.0, 1.0], size=n)
        return rng.standard_normal(n)


_SPEC_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def parse_kinds(text: str) -> list[SourceSpec]:
    """Parse e.g. ``"uniform,gmm(w=0.3/0.7,mu=-1/0.5,sd=0.4/0.4),student_t(5)"``."""
    specs = []
    for item in _split_top(text):
        mt = _SPEC_RE.match(item)
        if not mt:
            raise InvalidSpec(f"cannot parse source spec {item!r}")
        kind, args = mt.group(1), mt.group(2)
        kwargs = {}
        try:
            if kind == "student_t" and args:
                kwargs["nu"] = float(args)
            elif kind == "gmm" and args:
                keys = {"w": "weights", "mu": "means", "sd": "sds"}
                for kv in args.split(","):
                    key, _, val = kv.partition("=")
                    if key.strip() not in keys:
                        raise InvalidSpec(f"unknown gmm parameter {key.strip()!r}")
                    kwargs[keys[key.strip()]] = tuple(float(v) for v in val.split("/"))
            elif args:
                raise InvalidSpec(f"{kind} takes no parameters")
        except ValueError as exc:
            if isinstance(exc, InvalidSpec):
                raise
            raise InvalidSpec(f"bad number in {item!r}") from None
        specs.append(SourceSpec(kind, **kwargs))
    if not specs:
        raise InvalidSpec("empty source spec")
    return specs


def gen_sources(specs, N: int, seed: int) -> np.ndarray:
    """One row per spec, drawn from a PCG64 generator seeded with ``seed``.

    Standardized rows have their empirical mean removed and are scaled to
    unit sample variance (``N - 1`` divisor).
    """
    if isinstance(specs, str):
        specs = parse_kinds(specs)
    if N < 100:
        raise InvalidData(f"N must be >= 100, got {N}")
    rng = np.random.default_rng(seed)
    rows = []
    for spec in specs:
        x = spec.draw(rng, N)
        if spec.standardized:
            x = x - x.mean()
            x = x / x.std(ddof=1)
        rows.append(x)
    return np.vstack(rows)


def random_mixing(m: int, seed: int, max_cond: float = 100.0) -> np.ndarray:
    """Standard-normal ``m x m`` matrix, redrawn until its condition number is below ``max_cond``."""
    rng = np.random.default_rng(seed)
    while True:
        A = rng.standard_normal((m, m))
        if np.linalg.cond(A) < max_cond:
            return A


def mix(sources, A) -> np.ndarray:
    s = np.asarray(sources, dtype=float)
    A = np.asarray(A, dtype=float)
    if A.shape != (s.shape[0], s.shape[0]):
        raise InvalidData(f"mixing matrix {A.shape} does not match {s.shape[0]} sources")
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        raise RankDeficient("mixing matrix is singular")
    return A @ s
