"""Finite frames in real Euclidean space.

A frame is stored as an ``(n, dim)`` array whose rows are the frame vectors,
so the analysis operator is just ``vectors @ h`` and the frame operator is
``vectors.T @ vectors``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularFrameOperator

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Frame:
    """Ordered finite family of vectors in R^dim.

    Zero vectors are allowed; they contribute nothing to the frame operator.
    """

    vectors: np.ndarray

    def __post_init__(self):
        arr = np.array(self.vectors, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1) if arr.size else arr.reshape(0, 0)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise DimensionMismatch("a frame needs at least one vector of positive length")
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    def __len__(self):
        return self.n

    def scaled(self, scales) -> "Frame":
        """Return the family ``(s_j h_j)``."""
        s = np.asarray(scales, dtype=float)
        if s.shape != (self.n,):
            raise DimensionMismatch(f"expected {self.n} scales, got shape {s.shape}")
        return Frame(self.vectors * s[:, None])


@dataclass(frozen=True)
class FrameBounds:
    lower: float
    upper: float
    tight: bool
    tol: float

    def spanning(self) -> bool:
        """True when the lower bound is nonzero relative to the upper one."""
        return self.upper > 0 and self.lower > self.tol * self.upper


def analysis_coefficients(frame: Frame, vector) -> np.ndarray:
    h = np.asarray(vector, dtype=float)
    if h.shape != (frame.dim,):
        raise DimensionMismatch(f"vector of shape {h.shape} in a frame of dimension {frame.dim}")
    return frame.vectors @ h


def synthesis(frame: Frame, coefficients) -> np.ndarray:
    c = np.asarray(coefficients, dtype=float)
    if c.shape != (frame.n,):
        raise DimensionMismatch(f"expected {frame.n} coefficients, got shape {c.shape}")
    return frame.vectors.T @ c


def frame_operator(frame: Frame) -> np.ndarray:
    h = frame.vectors
    return h.T @ h


def frame_bounds(frame: Frame, tol: float = DEFAULT_TOL) -> FrameBounds:
    """Optimal frame bounds, i.e. the extreme eigenvalues of the frame operator.

    The family is declared tight when ``upper - lower <= tol * max(upper, 1)``.
    """
    eig = np.linalg.eigvalsh(frame_operator(frame))
    lower = max(float(eig[0]), 0.0)
    upper = max(float(eig[-1]), 0.0)
    tight = (upper - lower) <= tol * max(upper, 1.0)
    return FrameBounds(lower=lower, upper=upper, tight=tight, tol=tol)


def canonical_dual(frame: Frame, tol: float = DEFAULT_TOL) -> Frame:
    """Canonical dual frame ``(S^{-1} h_j)``.

    Raises
    ------
    SingularFrameOperator
        If the family does not span (lower bound <= tol relative to the upper).
    """
    bounds = frame_bounds(frame, tol)
    if not bounds.spanning():
        raise SingularFrameOperator(
            f"frame operator is singular (lower bound {bounds.lower:.3g}, upper {bounds.upper:.3g})"
        )
    s = frame_operator(frame)
    # S is symmetric positive definite here, so solve instead of inverting.
    dual = np.linalg.solve(s, frame.vectors.T).T
    return Frame(dual)


def trace_formula_bound(frame: Frame) -> float:
    """``(1/dim) * sum_j ||h_j||^2``; the frame bound whenever the frame is tight."""
    return float(np.sum(frame.vectors**2) / frame.dim)
