"""Antisymmetric tensor fields of arbitrary rank on an n-dimensional chart.

A field stores one component function per strictly increasing index tuple;
full arrays are produced by signed scattering over permutations, so
antisymmetry is exact by construction.  Component functions are expressions
in ``x1 .. xn`` (``n`` the chart dimension, whatever the chart's coordinate
labels are), plain numbers, or callables that accept a list of scalars
(floats or duals) and return one scalar.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from . import expr as exprmod
from .dual import Dual1, Scalar, value_of
from .expr import Expression

Component = Union[Expression, float, Callable[[Sequence[Scalar]], Scalar]]


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=16)
def _permutations_with_signs(rank: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    return tuple(
        (perm, _perm_sign(perm)) for perm in itertools.permutations(range(rank))
    )


@lru_cache(maxsize=8)
def levi_civita(n: int) -> np.ndarray:
    """Totally antisymmetric symbol as an ``(n,)*n`` array, eps[0,1,..,n-1] = 1."""
    if not 1 <= n <= 7:
        raise ValueError("levi_civita supports dimensions 1 through 7")
    eps = np.zeros((n,) * n)
    for perm, sign in _permutations_with_signs(n):
        eps[perm] = sign
    eps.setflags(write=False)
    return eps


def _parse_key(key, dim: int) -> tuple[int, ...]:
    """Index-tuple key: Python tuples are 0-based, strings are 1-based."""
    if isinstance(key, str):
        parts = key.split(",") if "," in key else list(key)
        idx = tuple(int(p) - 1 for p in parts)
    else:
        idx = tuple(int(i) for i in key)
    if any(not 0 <= i < dim for i in idx):
        raise ValueError(f"component key {key!r} has indices outside the chart")
    if any(a >= b for a, b in zip(idx, idx[1:])):
        raise ValueError(f"component key {key!r} must be strictly increasing")
    return idx


def _key_string(idx: tuple[int, ...], dim: int) -> str:
    labels = [str(i + 1) for i in idx]
    return ",".join(labels) if dim > 9 else "".join(labels)


class AntisymTensorField:
    """Rank-r antisymmetric tensor field over an n-dimensional chart."""

    def __init__(self, dim: int, rank: int, components: Mapping[object, Component]):
        if not 1 <= rank <= dim:
            raise ValueError("rank must be between 1 and the chart dimension")
        self.dim = int(dim)
        self.rank = int(rank)
        comps: dict[tuple[int, ...], Component] = {}
        for key, value in components.items():
            idx = _parse_key(key, self.dim)
            if len(idx) != self.rank:
                raise ValueError(f"component key {key!r} does not have rank {rank}")
            if isinstance(value, str):
                value = exprmod.parse_expression(value, self.dim)
            comps[idx] = value
        self._comps = comps

    @classmethod
    def constant(cls, dim: int, rank: int, array: np.ndarray) -> "AntisymTensorField":
        """Constant field from a full antisymmetric array (checked exactly)."""
        arr = np.asarray(array, dtype=float)
        if arr.shape != (dim,) * rank:
            raise ValueError(f"expected shape {(dim,) * rank}, got {arr.shape}")
        for idx in itertools.product(range(dim), repeat=rank):
            s = tuple(sorted(idx))
            if len(set(idx)) < rank:
                if arr[idx] != 0.0:
                    raise ValueError("array is not antisymmetric")
                continue
            expected = _perm_sign(tuple(sorted(range(rank), key=lambda k: idx[k]))) * arr[s]
            if arr[idx] != expected:
                raise ValueError("array is not antisymmetric")
        comps = {
            idx: float(arr[idx])
            for idx in itertools.combinations(range(dim), rank)
            if arr[idx] != 0.0
        }
        return cls(dim, rank, comps)

    def component_items(self):
        """(sorted 0-based index tuple, component) pairs."""
        return self._comps.items()

    def _component_scalar(self, comp: Component, coords: Sequence[Scalar]) -> Scalar:
        if isinstance(comp, Expression):
            return exprmod.evaluate(comp, coords)
        if callable(comp):
            return comp(coords)
        return float(comp)

    def values_at(self, point: Sequence[float]) -> np.ndarray:
        """Full component array at ``point``; exactly antisymmetric."""
        coords = [float(v) for v in np.asarray(point, dtype=float)]
        if len(coords) != self.dim:
            raise ValueError(f"expected a point of dimension {self.dim}")
        arr = np.zeros((self.dim,) * self.rank)
        perms = _permutations_with_signs(self.rank)
        for idx, comp in self._comps.items():
            v = value_of(self._component_scalar(comp, coords))
            for perm, sign in perms:
                arr[tuple(idx[k] for k in perm)] = sign * v
        return arr

    def jacobian_at(self, point: Sequence[float]) -> np.ndarray:
        """``jac[a, i1.. ir] = d_a f_{i1..ir}`` from one dual evaluation."""
        pt = np.asarray(point, dtype=float)
        if pt.shape != (self.dim,):
            raise ValueError(f"expected a point of dimension {self.dim}")
        n = self.dim
        seeds = [Dual1.seed(float(pt[i]), i, n) for i in range(n)]
        jac = np.zeros((n,) + (n,) * self.rank)
        perms = _permutations_with_signs(self.rank)
        for idx, comp in self._comps.items():
            out = self._component_scalar(comp, seeds)
            grad = out.gradient if isinstance(out, Dual1) else np.zeros(n)
            for perm, sign in perms:
                target = tuple(idx[k] for k in perm)
                jac[(slice(None),) + target] = sign * grad
        return jac

    @property
    def is_serializable(self) -> bool:
        return all(
            isinstance(c, (Expression, int, float)) for c in self._comps.values()
        )

    def to_dict(self) -> dict:
        """JSON-ready form; only expression or numeric components qualify."""
        comps = {}
        for idx in sorted(self._comps):
            c = self._comps[idx]
            if isinstance(c, Expression):
                comps[_key_string(idx, self.dim)] = exprmod.unparse(c)
            elif isinstance(c, (int, float)):
                comps[_key_string(idx, self.dim)] = repr(float(c))
            else:
                raise ValueError("field has callable components; not serializable")
        return {"schema": "kyano/1", "dim": self.dim, "rank": self.rank,
                "components": comps}

    @classmethod
    def from_dict(cls, obj: Mapping) -> "AntisymTensorField":
        return cls(int(obj["dim"]), int(obj["rank"]), dict(obj["components"]))

    def __repr__(self) -> str:
        keys = ", ".join(_key_string(i, self.dim) for i in sorted(self._comps))
        return f"AntisymTensorField(dim={self.dim}, rank={self.rank}, components=[{keys}])"
