"""Geometric GPTs in adapted coordinates.

Every vector ``x`` of ``V`` is stored as ``(x0; x1, ..., xD)`` in the basis
``(m, u_1, ..., u_D)``, where ``(u_i)`` is orthonormal in the traceless
subspace ``V0`` and ``x0 = e(x)``.  In these coordinates

    <x, y> = mu * x0 * y0 + sum_i x_i * y_i.

A functional ``f`` is stored by its values ``(f(m); f(u_1), ..., f(u_D))``,
so ``f(x) = x0 * f(m) + sum_i x_i * f(u_i)`` is a plain dot product.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, ZeroTraceEffect

Oracle = Callable[[np.ndarray, float], bool]


class Duality(str, enum.Enum):
    INFRA = "infra_dual"
    SUPRA = "supra_dual"
    SELF = "self_dual"


@dataclass(frozen=True)
class GgptModel:
    """A GGPT ``(V, C, e, m, mu, <.,.>_0)`` in adapted coordinates.

    ``cone_oracle(x, tol)`` decides membership of a coordinate vector in ``C``;
    ``dual_cone_oracle(f, tol)`` decides membership of a functional in ``C*``.
    Both accept a stack of vectors (last axis = coordinates) and then return
    a boolean array.
    ``chi`` is supplied in closed form by the model constructor.
    """

    name: str
    dim_v0: int
    mu: float
    chi: float
    duality: Duality
    cone_oracle: Oracle = field(repr=False, compare=False)
    dual_cone_oracle: Oracle = field(repr=False, compare=False)
    equinorm: bool = True
    descriptor: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.dim_v0 < 1:
            raise ValueError("dim_v0 must be positive")
        if not (self.mu > 0 and self.chi > 0):
            raise ValueError("mu and chi must be positive")

    @property
    def dim_v(self) -> int:
        return self.dim_v0 + 1

    @property
    def m(self) -> np.ndarray:
        out = np.zeros(self.dim_v)
        out[0] = 1.0
        return out

    @property
    def unit_effect(self) -> np.ndarray:
        return self.m  # e(m) = 1, e(u_i) = 0

    def metric(self) -> np.ndarray:
        g = np.ones(self.dim_v)
        g[0] = self.mu
        return np.diag(g)


def _check(model: GgptModel, *arrays) -> list[np.ndarray]:
    out = []
    for a in arrays:
        a = np.asarray(a, dtype=float)
        if a.shape[-1] != model.dim_v:
            raise DimensionMismatch(f"expected {model.dim_v} coordinates, got {a.shape[-1]}")
        out.append(a)
    return out


def inner(model: GgptModel, x, y) -> float:
    x, y = _check(model, x, y)
    return float(model.mu * x[0] * y[0] + x[1:] @ y[1:])


def evaluate(f, x) -> float:
    """Value ``f(x)`` of a functional on a vector (both in coordinates)."""
    return float(np.dot(f, x))


def project_p0(model: GgptModel, x) -> np.ndarray:
    """Coordinates of ``x - e(x) m`` in the orthonormal basis of ``V0``."""
    (x,) = _check(model, x)
    return x[..., 1:].copy()


def embed_v0(model: GgptModel, y) -> np.ndarray:
    """Inverse of :func:`project_p0` on ``V0``: prepend a zero trace."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != model.dim_v0:
        raise DimensionMismatch(f"expected {model.dim_v0} coordinates, got {y.shape[-1]}")
    pad = np.zeros(y.shape[:-1] + (1,))
    return np.concatenate([pad, y], axis=-1)


def effect_to_vector(model: GgptModel, f) -> np.ndarray:
    """Riesz representative ``T^{-1}(f)``: the vector ``v`` with ``<v, x> = f(x)``.

    Works row-wise on a stack of functionals.
    """
    (f,) = _check(model, f)
    v = f.copy()
    v[..., 0] = f[..., 0] / model.mu
    return v


def vector_to_effect(model: GgptModel, v) -> np.ndarray:
    """The functional ``T(v) = <., v>``."""
    (v,) = _check(model, v)
    f = v.copy()
    f[..., 0] = v[..., 0] * model.mu
    return f


def normalize_state(model: GgptModel, v, tol: float = 1e-12) -> np.ndarray:
    (v,) = _check(model, v)
    if v[0] <= tol:
        raise ZeroTraceEffect(f"e(v) = {v[0]:.3g} is not positive; cannot normalise")
    return v / v[0]


@dataclass(frozen=True)
class MeasurementValidity:
    valid: bool
    sum_residual: float
    positive: list[bool]
    nonzero: list[bool]
    message: str = ""


def validate_measurement(model: GgptModel, effects: Sequence, tol: float = 1e-9) -> MeasurementValidity:
    """Check that ``effects`` are nonzero, positive and sum to the unit effect."""
    arr = np.atleast_2d(np.asarray(effects, dtype=float))
    if arr.shape[-1] != model.dim_v:
        raise DimensionMismatch(f"effects need {model.dim_v} coordinates, got {arr.shape[-1]}")
    sum_residual = float(np.linalg.norm(arr.sum(axis=0) - model.unit_effect))
    positive = [bool(ok) for ok in np.atleast_1d(model.dual_cone_oracle(arr, tol))]
    nonzero = [bool(ok) for ok in np.linalg.norm(arr, axis=1) > tol]

    problems = []
    if sum_residual > tol:
        problems.append(f"effects do not sum to unit effect (residual {sum_residual:.3g})")
    bad = [j for j, ok in enumerate(positive) if not ok]
    if bad:
        problems.append(f"effects {bad} are not positive functionals")
    zero = [j for j, ok in enumerate(nonzero) if not ok]
    if zero:
        problems.append(f"effects {zero} are zero")
    return MeasurementValidity(
        valid=not problems,
        sum_residual=sum_residual,
        positive=positive,
        nonzero=nonzero,
        message="; ".join(problems),
    )


def chi_of(model: GgptModel) -> float:
    return model.chi


def squared_distance_from_m(model: GgptModel, x) -> float:
    """``||x - m||_0^2`` for a state ``x``."""
    (x,) = _check(model, x)
    return float(x[1:] @ x[1:])


def estimate_chi(model: GgptModel, states: Sequence) -> float:
    """Debug helper: largest ``||x - m||_0^2`` over sampled states.

    Not used for classification; models carry ``chi`` in closed form.
    """
    arr = np.atleast_2d(np.asarray(states, dtype=float))
    return float(np.max(np.sum(arr[:, 1:] ** 2, axis=1)))
