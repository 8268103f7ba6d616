"""Measurements and their frame-theoretic classification."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidMeasurement, NotAFrame, PreconditionNotMet
from .frames import Frame
from .ggpt import Duality, GgptModel, effect_to_vector, validate_measurement
from .scalable import find_scales

DEFAULT_TOL = 1e-8


class Measurement:
    """Ordered family of effects summing to the unit effect.

    Attributes
    ----------
    effects : (n, dim_v) array
        Effect functionals in coordinates ``(f(m); f(u_1), ...)``.
    v : (n, dim_v) array
        Riesz vectors ``T^{-1}(pi_j)``.
    w : (n, dim_v) array
        Normalised states ``v_j / e(v_j)``.
    pm : (n,) array
        Outcome probabilities on the distinguished state ``m``.
    """

    def __init__(self, model: GgptModel, effects, *, tol: float = 1e-9, validate: bool = True, label: str = ""):
        arr = np.atleast_2d(np.array(effects, dtype=float))
        if validate:
            report = validate_measurement(model, arr, tol)
            if not report.valid:
                raise InvalidMeasurement(report.message)
        pm = arr[:, 0].copy()
        if validate and np.any(pm <= 0):
            raise InvalidMeasurement("some effect has zero probability on m")
        self.model = model
        self.label = label
        self.effects = arr
        self.pm = pm
        self.v = effect_to_vector(model, arr)
        self.w = self.v / self.v[:, :1]
        for a in (self.effects, self.pm, self.v, self.w):
            a.setflags(write=False)

    @property
    def n(self) -> int:
        return self.effects.shape[0]

    def probabilities(self, x) -> np.ndarray:
        """Outcome statistics ``(pi_j(x))_j`` on a state (or stack of states)."""
        return np.asarray(x, dtype=float) @ self.effects.T

    def __len__(self):
        return self.n

    def __repr__(self):
        tag = f" {self.label!r}" if self.label else ""
        return f"<Measurement{tag} n={self.n} on {self.model.name}>"


def union(parts, weights, label: str = "") -> Measurement:
    """Weighted union ``(t_1 pi^1) u ... u (t_k pi^k)`` of measurements on one model."""
    model = parts[0].model
    effects = np.vstack([t * p.effects for p, t in zip(parts, weights)])
    return Measurement(model, effects, label=label)


def traceless_frame(meas: Measurement) -> Frame:
    return Frame(meas.v[:, 1:])


def is_unbiased(meas: Measurement, tol: float = DEFAULT_TOL) -> bool:
    return bool(np.max(np.abs(meas.pm - 1.0 / meas.n)) <= tol / meas.n)


def is_ic(meas: Measurement, tol: float = DEFAULT_TOL) -> bool:
    sv = np.linalg.svd(meas.v[:, 1:], compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return False
    return int(np.sum(sv > tol * sv[0])) == meas.model.dim_v0


def _relative_spreads(*families):
    """For each family ``h``: spread of the spectrum of ``h^T h`` relative to its top.

    ``(lambda_max - lambda_min) / lambda_max``, or ``inf`` for the zero family.
    """
    eig = np.linalg.eigvalsh(np.array([h.T @ h for h in families]))
    lo = np.maximum(eig[:, 0], 0.0)
    hi = np.maximum(eig[:, -1], 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        spread = np.where(hi > 0, (hi - lo) / hi, np.inf)
    return [float(x) for x in spread]


def s_tight_bound(meas: Measurement, scales) -> float:
    """Frame bound of ``(s_j P0(v_j))`` from the trace formula."""
    s = np.asarray(scales, dtype=float)
    mu = meas.model.mu
    norms2 = mu * meas.v[:, 0] ** 2 + np.sum(meas.v[:, 1:] ** 2, axis=1)
    return float(np.sum(s**2 * (norms2 - meas.pm**2 / mu)) / meas.model.dim_v0)


def tight_ic_formula_bound(meas: Measurement) -> float:
    """``(sum_j pi_j(w_j) - 1) / (mu * dim V0)``."""
    hits = np.einsum("ij,ij->i", meas.effects, meas.w)
    return float((hits.sum() - 1.0) / (meas.model.mu * meas.model.dim_v0))


@dataclass
class ClassificationReport:
    ic: bool
    morphophoric: bool
    tight_ic: bool
    s_tight: bool
    chi_ray: bool
    unbiased: bool
    tol: float
    alpha_m: float | None = None
    alpha_t: float | None = None
    alpha_s: float | None = None
    scales: np.ndarray | None = None
    residuals: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            k: getattr(self, k)
            for k in ("ic", "morphophoric", "tight_ic", "s_tight", "chi_ray", "unbiased", "tol", "alpha_m", "alpha_t", "alpha_s")
        }
        out["scales"] = None if self.scales is None else [float(s) for s in self.scales]
        out["residuals"] = {k: float(v) for k, v in self.residuals.items()}
        return out


def classify(meas: Measurement, tol: float = DEFAULT_TOL) -> ClassificationReport:
    """Classify a measurement: IC, morphophoric, tight IC, s-tight IC and chi-ray.

    Tightness is decided on the spectrum of the frame operator relative to its
    largest eigenvalue, so the verdicts are invariant under global rescaling.
    Every test's raw residual is kept in ``residuals``.
    """
    model = meas.model
    h = meas.v[:, 1:]
    residuals = {}

    ic = is_ic(meas, tol)

    ht = h / np.sqrt(meas.pm)[:, None]
    spread_m, spread_t = _relative_spreads(h, ht)

    residuals["morphophoric"] = spread_m
    morphophoric = ic and spread_m <= tol
    alpha_m = float(np.sum(h**2) / model.dim_v0) if morphophoric else None

    residuals["tight_ic"] = spread_t
    tight_ic = ic and spread_t <= tol
    alpha_t = None
    if tight_ic:
        alpha_t = float(np.sum(ht**2) / model.dim_v0)
        formula = tight_ic_formula_bound(meas)
        residuals["tight_ic_bound"] = abs(alpha_t - formula) / alpha_t

    s_tight = False
    scales = None
    alpha_s = None
    if ic:
        try:
            res = find_scales(Frame(h), tol)
        except NotAFrame:
            res = None
        if res is not None:
            residuals["s_tight"] = res.residual
            if res.scalable:
                s_tight, scales = True, res.scales
            elif morphophoric:
                s_tight, scales = True, np.ones(meas.n)
            elif tight_ic:
                s_tight, scales = True, 1.0 / np.sqrt(meas.pm)
        if s_tight:
            alpha_s = s_tight_bound(meas, scales)

    dist2 = np.sum(meas.w[:, 1:] ** 2, axis=1)
    chi_res = float(np.max(np.abs(dist2 - model.chi)))
    residuals["chi_ray"] = chi_res / model.chi
    chi_ray = chi_res <= tol * model.chi

    return ClassificationReport(
        ic=ic,
        morphophoric=morphophoric,
        tight_ic=tight_ic,
        s_tight=s_tight,
        chi_ray=chi_ray,
        unbiased=is_unbiased(meas, tol),
        tol=tol,
        alpha_m=alpha_m,
        alpha_t=alpha_t,
        alpha_s=alpha_s,
        scales=scales,
        residuals=residuals,
    )


def _lift_operators(meas: Measurement):
    # Orthonormal coordinates: rescale coordinate 0 by sqrt(mu).
    mu = meas.model.mu
    vt = meas.v.copy()
    vt[:, 0] *= np.sqrt(mu)
    hs = vt / np.sqrt(meas.pm)[:, None]
    s = hs.T @ hs
    s0 = np.zeros_like(s)
    h0 = hs[:, 1:]
    s0[1:, 1:] = h0.T @ h0
    pm_proj = np.zeros_like(s)
    pm_proj[0, 0] = 1.0
    return s, s0, pm_proj


def lift_identity_residual(meas: Measurement) -> float:
    """Frobenius norm of ``S - S0 - P_m / mu`` for the ``1/sqrt(pi_j(m))``-scaled family."""
    s, s0, pm_proj = _lift_operators(meas)
    return float(np.linalg.norm(s - s0 - pm_proj / meas.model.mu))


def tight_criterion_residual(meas: Measurement):
    """``min_alpha ||S - alpha P0 - P_m / mu||_F`` and the minimising alpha."""
    s, s0, pm_proj = _lift_operators(meas)
    p0 = np.eye(s.shape[0]) - pm_proj
    alpha = float(np.trace(s0) / meas.model.dim_v0)
    return float(np.linalg.norm(s - alpha * p0 - pm_proj / meas.model.mu)), alpha


def chi_ray_constants_residual(meas: Measurement, tol: float = DEFAULT_TOL) -> float:
    """``|alpha * mu - (chi / mu) / dim V0|`` for a chi-ray tight IC measurement.

    Raises
    ------
    PreconditionNotMet
        Unless the model is self-dual and the measurement is tight IC and chi-ray.
    """
    model = meas.model
    if model.duality is not Duality.SELF:
        raise PreconditionNotMet(f"model {model.name} is not self-dual")
    report = classify(meas, tol)
    if not (report.tight_ic and report.chi_ray):
        raise PreconditionNotMet("measurement must be tight IC and chi-ray")
    return abs(report.alpha_t * model.mu - (model.chi / model.mu) / model.dim_v0)
