"""Instruments, conditional probabilities and the generalized primal equation.

Notation: ``pi`` is the reference measurement with outcomes ``j``, ``xi`` the
target measurement with outcomes ``k``, ``delta_pi = pi(x) - pi(m)`` and
``delta_xi = xi(x) - xi(m)``.  For an s-tight IC ``pi`` with bound ``alpha``

    delta_xi = (1 / (alpha mu)) C delta_pi,
    C_kj = s_j^2 (mu xi_k(v_j) - pi_j(m) xi_k(m)).

For tight IC ``pi`` and the canonical instrument this becomes
``delta_xi = A K delta_pi`` with ``K_kj = xi_k(w_j)`` and ``A = 1 / (alpha mu)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InconsistentScales, NotTightIC, UndefinedConditional, ValidationError
from .measurements import DEFAULT_TOL, Measurement, classify, s_tight_bound
from .scalable import SPAN_TOL

BALANCE_TOL = 1e-10


class InstrumentKind(str, enum.Enum):
    CANONICAL = "canonical"
    CUSTOM = "custom"


def _same_model(pi: Measurement, xi: Measurement) -> None:
    if pi.model != xi.model:
        raise DimensionMismatch(f"pi lives on {pi.model.name}, xi on {xi.model.name}")


class Instrument:
    """Per-outcome maps ``Lambda_j`` with ``e(Lambda_j(x)) = pi_j(x)``.

    A custom instrument is given by linear parts ``L_j`` (square matrices on
    coordinates of ``V``) and offsets ``o_j``; it acts as
    ``Lambda_j(x) = L_j x + e(x) o_j``, which is the affine map
    ``x -> L_j x + o_j`` on normalised states extended linearly to ``V``.
    """

    def __init__(self, pi: Measurement, kind: InstrumentKind, linear=None, offsets=None, tol: float = 1e-9):
        self.pi = pi
        self.kind = InstrumentKind(kind)
        dim = pi.model.dim_v
        if self.kind is InstrumentKind.CANONICAL:
            # Lambda_j(x) = pi_j(x) w_j, i.e. L_j = w_j pi_j^T.
            self.linear = np.einsum("ja,jb->jab", pi.w, pi.effects)
            self.offsets = np.zeros((pi.n, dim))
        else:
            lin = np.asarray(linear, dtype=float)
            off = np.zeros((pi.n, dim)) if offsets is None else np.asarray(offsets, dtype=float)
            if lin.shape != (pi.n, dim, dim) or off.shape != (pi.n, dim):
                raise DimensionMismatch(
                    f"custom instrument needs linear parts of shape {(pi.n, dim, dim)} and offsets {(pi.n, dim)}"
                )
            self.linear, self.offsets = lin, off
            # e(Lambda_j(.)) as a functional: row 0 of L_j plus e(o_j) on the trace.
            trace_fn = self.linear[:, 0, :].copy()
            trace_fn[:, 0] += self.offsets[:, 0]
            err = float(np.max(np.abs(trace_fn - pi.effects)))
            if err > tol:
                raise ValidationError(f"e(Lambda_j(x)) differs from pi_j(x) (max error {err:.3g})")
        for a in (self.linear, self.offsets):
            a.setflags(write=False)

    @classmethod
    def canonical(cls, pi: Measurement) -> "Instrument":
        return cls(pi, InstrumentKind.CANONICAL)

    @classmethod
    def custom(cls, pi: Measurement, linear, offsets=None, tol: float = 1e-9) -> "Instrument":
        return cls(pi, InstrumentKind.CUSTOM, linear, offsets, tol)

    def apply(self, x) -> np.ndarray:
        """Stack ``(Lambda_j(x))_j`` of shape ``(n, dim_v)``."""
        x = np.asarray(x, dtype=float)
        return self.linear @ x + x[0] * self.offsets

    @property
    def balanced(self) -> bool:
        """``Lambda_j(m) = mu v_j`` for every outcome."""
        at_m = self.apply(self.pi.model.m)
        return bool(np.max(np.abs(at_m - self.pi.model.mu * self.pi.v)) <= BALANCE_TOL)


def conditional_probabilities(pi: Measurement, xi: Measurement, inst: Instrument, x, tol: float = 1e-12) -> np.ndarray:
    """Matrix ``p_{k|j}(x) = xi_k(Lambda_j(x)) / e(Lambda_j(x))``.

    Raises
    ------
    UndefinedConditional
        When some ``pi_j(x) <= tol``.
    """
    _same_model(pi, xi)
    x = np.asarray(x, dtype=float)
    p = pi.probabilities(x)
    bad = np.flatnonzero(p <= tol)
    if bad.size:
        raise UndefinedConditional(f"outcomes {bad.tolist()} have probability <= {tol:g}")
    post = inst.apply(x)
    return (xi.effects @ post.T) / post[:, 0]


def c_matrix(pi: Measurement, xi: Measurement, scales) -> np.ndarray:
    """``C_kj = s_j^2 (mu xi_k(v_j) - pi_j(m) xi_k(m))`` for an instrument balanced at ``m``."""
    _same_model(pi, xi)
    s2 = np.asarray(scales, dtype=float) ** 2
    mu = pi.model.mu
    xi_m = xi.effects[:, 0]
    return (mu * (xi.effects @ pi.v.T) - np.outer(xi_m, pi.pm)) * s2


def k_matrix(pi: Measurement, xi: Measurement) -> np.ndarray:
    """``K_kj = xi_k(w_j)``."""
    _same_model(pi, xi)
    return xi.effects @ pi.w.T


def _checked_bound(pi: Measurement, scales, tol: float) -> tuple[np.ndarray, float]:
    """Return the scales as an array and the bound of the tight scaled frame."""
    s = np.asarray(scales, dtype=float)
    if s.shape != (pi.n,):
        raise DimensionMismatch(f"expected {pi.n} scales, got shape {s.shape}")
    h = pi.v[:, 1:] * s[:, None]
    eig = np.linalg.eigvalsh(h.T @ h)
    if not (eig[-1] > 0 and eig[0] > SPAN_TOL * eig[-1]) or (eig[-1] - eig[0]) > tol * eig[-1]:
        raise InconsistentScales(
            f"scaled traceless frame is not tight (eigenvalues in [{eig[0]:.6g}, {eig[-1]:.6g}])"
        )
    return s, s_tight_bound(pi, s)


def _check_probs(pi: Measurement, p, tol: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (pi.n,):
        raise DimensionMismatch(f"expected {pi.n} probabilities, got shape {p.shape}")
    if abs(p.sum() - 1.0) > tol:
        raise ValidationError(f"probabilities sum to {p.sum():.12g}, not 1")
    return p


@dataclass(frozen=True)
class Reconstruction:
    state: np.ndarray
    in_cone: bool


def reconstruct_state(pi: Measurement, scales, alpha: float | None = None, p=None, tol: float = DEFAULT_TOL) -> Reconstruction:
    """State ``x = m + (1/alpha) sum_j s_j^2 (p_j - pi_j(m)) P0(v_j)``.

    ``alpha`` defaults to the bound of the scaled frame.  The result is not
    projected onto the state space; ``in_cone`` reports membership.

    Raises
    ------
    InconsistentScales
        When the scaled traceless frame is not tight within ``tol``.
    """
    s, bound = _checked_bound(pi, scales, tol)
    if alpha is None:
        alpha = bound
    elif abs(alpha - bound) > tol * bound:
        raise InconsistentScales(f"alpha = {alpha:.12g} but the scaled frame has bound {bound:.12g}")
    p = _check_probs(pi, p, tol)
    model = pi.model
    x = model.m.copy()
    x[1:] += ((s**2 * (p - pi.pm)) @ pi.v[:, 1:]) / alpha
    in_cone = bool(model.cone_oracle(x, 1e-9))
    return Reconstruction(state=x, in_cone=in_cone)


def predict_statistics(pi: Measurement, xi: Measurement, scales, p, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``p^xi_k = xi_k(m) + (1/(alpha mu)) sum_j C_kj (p_j - pi_j(m))``."""
    _same_model(pi, xi)
    s, alpha = _checked_bound(pi, scales, tol)
    p = _check_probs(pi, p, tol)
    c = c_matrix(pi, xi, s)
    return xi.effects[:, 0] + c @ (p - pi.pm) / (alpha * pi.model.mu)


@dataclass
class LtpDecomposition:
    """Three equivalent forms of the canonical-instrument primal equation at a state.

    ``lhs`` is ``p^xi(x) - p^xi(m)``; ``classical_ltp_term`` is
    ``sum_j p_{k|j}(x) p_j(x)``; ``correction_term`` is
    ``(1 - 1/A)(p^xi(x) - p^xi(m))``.
    """

    lhs: np.ndarray
    classical_ltp_term: np.ndarray
    correction_term: np.ndarray
    a_constant: float
    beta: np.ndarray
    residuals: dict = field(default_factory=dict)


def a_constant(pi: Measurement, tol: float = DEFAULT_TOL) -> float:
    """``A = 1/(alpha_t mu)`` for a tight IC measurement."""
    report = classify(pi, tol)
    if not report.tight_ic:
        raise NotTightIC(f"measurement {pi.label or pi.n} is not tight IC")
    return 1.0 / (report.alpha_t * pi.model.mu)


def beta_j(pi: Measurement, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Per-outcome offsets ``(1 - A) pi_j(m)`` of the third form."""
    return (1.0 - a_constant(pi, tol)) * pi.pm


def ltp_decomposition(pi: Measurement, xi: Measurement, x, tol: float = DEFAULT_TOL) -> LtpDecomposition:
    """Evaluate the three rewritings of the canonical-instrument law at ``x``.

    Raises
    ------
    NotTightIC
        If ``pi`` is not tight IC.
    """
    _same_model(pi, xi)
    a = a_constant(pi, tol)
    x = np.asarray(x, dtype=float)
    p = pi.probabilities(x)
    px = xi.probabilities(x)
    pxm = xi.effects[:, 0]
    cond = conditional_probabilities(pi, xi, Instrument.canonical(pi), x)
    lhs = px - pxm
    classical = cond @ p
    correction = (1.0 - 1.0 / a) * lhs
    beta = (1.0 - a) * pi.pm
    residuals = {
        "form_i": float(np.max(np.abs(lhs - a * cond @ (p - pi.pm)))),
        "form_ii": float(np.max(np.abs(px - classical - correction))),
        "form_iii": float(np.max(np.abs(px - cond @ (a * p + beta)))),
    }
    return LtpDecomposition(lhs, classical, correction, a, beta, residuals)


def verify_primal_equation(pi: Measurement, xi: Measurement, scales, n_samples: int = 100, seed: int = 0) -> float:
    """Largest residual of ``delta_xi = (1/(alpha mu)) C delta_pi`` over random states.

    ``alpha`` is the trace-formula bound of the scaled frame, so scales that
    do not make ``pi`` tight leave a nonzero residual whenever ``xi`` is IC.
    """
    from .models import random_state

    _same_model(pi, xi)
    rng = np.random.default_rng(seed)
    s = np.asarray(scales, dtype=float)
    alpha = s_tight_bound(pi, s)
    c = c_matrix(pi, xi, s) / (alpha * pi.model.mu)
    xs = np.array([random_state(pi.model, rng) for _ in range(n_samples)])
    d_pi = pi.probabilities(xs) - pi.pm
    d_xi = xi.probabilities(xs) - xi.effects[:, 0]
    return float(np.max(np.abs(d_xi - d_pi @ c.T)))


def tight_identity_residual(pi: Measurement, xi: Measurement, scales=None) -> float:
    """``max ||(C - K) delta_pi||`` over a basis of ``V``.

    Here ``delta_pi(x) = pi(x) - e(x) pi(m)``, the linear extension to ``V``.
    With the default ``s_j = 1/sqrt(pi_j(m))`` this is ``C`` against ``K``
    directly.  Other scales are compared after normalising by the bounds,
    i.e. ``(alpha_t / alpha_s) C_s`` against ``K``, where ``alpha_t`` and
    ``alpha_s`` are the trace-formula bounds of the two scaled families; the
    residual then vanishes exactly when the s-tight and tight forms of the
    primal equation agree.
    """
    tight_s = 1.0 / np.sqrt(pi.pm)
    if scales is None:
        c = c_matrix(pi, xi, tight_s)
    else:
        s = np.asarray(scales, dtype=float)
        ratio = s_tight_bound(pi, tight_s) / s_tight_bound(pi, s)
        c = ratio * c_matrix(pi, xi, s)
    k = k_matrix(pi, xi)
    basis = np.eye(pi.model.dim_v)
    d_pi = pi.probabilities(basis) - np.outer(basis[:, 0], pi.pm)
    return float(np.max(np.linalg.norm(d_pi @ (c - k).T, axis=1)))


@dataclass
class UrgleichungData:
    c_matrix: np.ndarray
    k_matrix: np.ndarray
    alpha: float
    a_constant: float
    residuals: dict = field(default_factory=dict)


def urgleichung_data(pi: Measurement, xi: Measurement, scales=None, tol: float = DEFAULT_TOL) -> UrgleichungData:
    """Bundle ``C``, ``K``, the bound and ``A`` for an s-tight IC ``pi``.

    ``scales`` default to those found by :func:`classify`.  For tight IC
    ``pi`` the residual of ``C delta_pi = K delta_pi`` is also recorded.
    """
    report = classify(pi, tol)
    if scales is None:
        if not report.s_tight:
            raise InconsistentScales("measurement is not s-tight; no scales available")
        scales = report.scales
    s, alpha = _checked_bound(pi, scales, tol)
    residuals = {}
    if report.tight_ic:
        residuals["c_equals_k"] = tight_identity_residual(pi, xi)
    return UrgleichungData(
        c_matrix=c_matrix(pi, xi, s),
        k_matrix=k_matrix(pi, xi),
        alpha=alpha,
        a_constant=1.0 / (alpha * pi.model.mu),
        residuals=residuals,
    )
