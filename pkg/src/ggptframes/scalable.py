"""Scalability of frames.

A frame ``(h_j)`` is scalable when nonnegative ``t_j = s_j**2`` exist with
``sum_j t_j h_j h_j^T = I``.  The condition is linear in ``t``, so deciding it
is a nonnegative least-squares feasibility problem.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotAFrame, SolverStalled
from .frames import Frame, frame_operator

DEFAULT_TOL = 1e-8
NNLS_TOL = 1e-12
SPAN_TOL = 1e-9


def _passive_solve(gram, atb, a, b, passive):
    """Unconstrained least squares restricted to the passive columns."""
    idx = np.flatnonzero(passive)
    if idx.size == 1:
        g = gram[idx[0], idx[0]]
        if g > 0:
            return atb[idx] / g
    else:
        try:
            z = np.linalg.solve(gram[idx][:, idx], atb[idx])
            if np.isfinite(z).all():
                return z
        except np.linalg.LinAlgError:
            pass
    return np.linalg.lstsq(a[:, idx], b, rcond=None)[0]


def nnls_solve(columns, target, tol: float = NNLS_TOL):
    """Minimise ``||A t - b||_2`` subject to ``t >= 0``.

    Lawson-Hanson active set method, with the subproblems solved on the
    precomputed normal equations ``A^T A``, ``A^T b`` (the Bro-de Jong variant).

    Parameters
    ----------
    columns : (m, n) array
    target : (m,) array
    tol : float
        Stationarity threshold, relative to ``||A||_F * ||b||_2``.

    Returns
    -------
    t : (n,) ndarray
    residual : float

    Raises
    ------
    SolverStalled
        After ``10 * n * m`` iterations without meeting the KKT conditions.
    """
    a = np.asarray(columns, dtype=float)
    b = np.asarray(target, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    m, n = a.shape
    if m < 1 or n < 1:
        raise DimensionMismatch("nnls_solve needs at least one row and one column")
    if b.shape != (m,):
        raise DimensionMismatch(f"target has shape {b.shape}, expected ({m},)")

    cap = 10 * n * m
    scale = math.sqrt(float(np.einsum("ij,ij->", a, a)) * float(b @ b))
    thresh = tol * max(scale, np.finfo(float).tiny)
    gram = a.T @ a
    atb = a.T @ b
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    # Indices whose entry into the passive set was numerically rejected.
    blocked = np.zeros(n, dtype=bool)
    w = atb.copy()
    iterations = 0

    while True:
        masked = np.where(passive | blocked, -np.inf, w)
        j = int(np.argmax(masked))
        if masked[j] <= thresh:
            break
        passive[j] = True
        moved = False
        while True:
            iterations += 1
            if iterations > cap:
                raise SolverStalled(f"NNLS did not converge within {cap} iterations")
            zp = _passive_solve(gram, atb, a, b, passive)
            z = np.zeros(n)
            z[passive] = zp
            if zp.min() > 0:
                x = z
                moved = True
                break
            if not moved and z[j] <= 0:
                # Entering variable cannot leave zero: w[j] > 0 was rounding noise.
                passive[j] = False
                blocked[j] = True
                break
            mask = passive & (z <= 0)
            step = np.min(x[mask] / (x[mask] - z[mask]))
            x = x + step * (z - x)
            moved = True
            passive &= x > 0
            x[~passive] = 0.0
        if moved:
            blocked[:] = False
        w = atb - gram @ x

    residual = float(np.linalg.norm(a @ x - b))
    return x, residual


@functools.lru_cache(maxsize=None)
def _sym_vec_index(dim: int):
    iu = np.triu_indices(dim)
    weights = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
    return iu, weights


def gram_system(frame: Frame):
    """Linear system for ``sum_j t_j u_j u_j^T = I`` over unit directions ``u_j``.

    Only the upper triangle is used, with off-diagonal rows weighted by sqrt(2)
    so that the Euclidean residual equals the Frobenius distance to ``I``.
    Zero vectors are dropped; the returned index array says which survived.
    """
    h = frame.vectors
    norms = np.linalg.norm(h, axis=1)
    keep = np.flatnonzero(norms > 0)
    u = h[keep] / norms[keep, None]
    iu, weights = _sym_vec_index(frame.dim)
    cols = (u[:, iu[0]] * u[:, iu[1]] * weights).T
    target = (iu[0] == iu[1]).astype(float)
    return cols, target, keep, norms


@dataclass(frozen=True)
class ScalabilityResult:
    """Outcome of :func:`find_scales`.

    ``scales`` and ``frame_bound`` are ``None`` unless ``scalable``.  Scales are
    normalised so the largest equals one.
    """

    scalable: bool
    residual: float
    scales: np.ndarray | None = None
    frame_bound: float | None = None
    span_collapsed: bool = False
    raw_weights: np.ndarray | None = None


def find_scales(frame: Frame, tol: float = DEFAULT_TOL) -> ScalabilityResult:
    """Decide whether ``frame`` is scalable and return scales if it is.

    A frame that is already tight gets unit scales; otherwise the scales come
    from the NNLS minimiser.

    Raises
    ------
    NotAFrame
        If the input family does not span its space.
    """
    h = frame.vectors
    eig = np.linalg.eigvalsh(frame_operator(frame))
    if not (eig[-1] > 0 and eig[0] > SPAN_TOL * eig[-1]):
        raise NotAFrame("family does not span; scalability is undefined")

    if eig[-1] - eig[0] <= tol * eig[-1]:
        alpha = float(np.mean(eig))
        cols, target, keep, norms = gram_system(frame)
        residual = float(np.linalg.norm(cols @ (norms[keep] ** 2 / alpha) - target))
        return ScalabilityResult(
            True, residual, scales=np.ones(frame.n), frame_bound=alpha, raw_weights=np.full(frame.n, 1 / alpha)
        )

    cols, target, keep, norms = gram_system(frame)
    tprime, residual = nnls_solve(cols, target)

    t = np.zeros(frame.n)
    t[keep] = tprime / norms[keep] ** 2
    eig = np.linalg.eigvalsh((h.T * t) @ h)
    spans = eig[-1] > 0 and eig[0] > tol * eig[-1]

    if residual <= tol and not spans:
        return ScalabilityResult(False, residual, span_collapsed=True, raw_weights=t)
    if residual > tol:
        return ScalabilityResult(False, residual, raw_weights=t)

    # Normalise so the largest scale is one.
    t_norm = t / t.max()
    return ScalabilityResult(
        True,
        residual,
        scales=np.sqrt(t_norm),
        frame_bound=float(np.sum(t_norm * np.sum(h**2, axis=1)) / frame.dim),
        raw_weights=t,
    )
