"""Built-in GGPTs and named measurements.

Quantum theory on C^d uses the generalised Gell-Mann basis normalised to
``Tr(u_i u_j) = delta_ij``, ordered as: symmetric ``(j, k)`` for ``j < k`` in
lexicographic order, then antisymmetric in the same order, then diagonal
``l = 1, ..., d-1``.  For ``d = 2`` this is ``(X, Y, Z) / sqrt(2)``.

Classical theory on n outcomes uses the Helmert basis of the sum-zero subspace
(the real analogue of the diagonal Gell-Mann family).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadWeights, DimensionMismatch, ParamOutOfRange, ValidationError
from .ggpt import Duality, GgptModel
from .measurements import Measurement, classify, union

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


# ---------------------------------------------------------------------------
# Bases


@functools.lru_cache(maxsize=None)
def gell_mann_basis(d: int) -> np.ndarray:
    """Orthonormal traceless Hermitian basis, shape ``(d*d - 1, d, d)``."""
    sym, anti, diag = [], [], []
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1.0
            sym.append(s / math.sqrt(2))
            a = np.zeros((d, d), dtype=complex)
            a[j, k], a[k, j] = -1j, 1j
            anti.append(a / math.sqrt(2))
    for l in range(1, d):
        g = np.zeros((d, d), dtype=complex)
        g[np.arange(l), np.arange(l)] = 1.0
        g[l, l] = -l
        diag.append(g / math.sqrt(l * (l + 1)))
    out = np.array(sym + anti + diag)
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=None)
def helmert_basis(n: int) -> np.ndarray:
    """Orthonormal basis of ``{x in R^n : sum x = 0}``, shape ``(n - 1, n)``."""
    out = np.zeros((n - 1, n))
    for k in range(1, n):
        out[k - 1, :k] = 1.0
        out[k - 1, k] = -k
        out[k - 1] /= math.sqrt(k * (k + 1))
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# Native <-> coordinate conversions


def matrix_to_coords(model: GgptModel, mat) -> np.ndarray:
    """Coordinates of a Hermitian matrix viewed as a vector of V."""
    d = _quantum_d(model)
    mat = np.asarray(mat, dtype=complex)
    basis = gell_mann_basis(d)
    return np.concatenate([[np.trace(mat).real], np.einsum("kij,ji->k", basis, mat).real])


def coords_to_matrix(model: GgptModel, x) -> np.ndarray:
    d = _quantum_d(model)
    x = np.asarray(x, dtype=float)
    return x[0] * np.eye(d) / d + np.einsum("k,kij->ij", x[1:], gell_mann_basis(d))


def effect_from_matrix(model: GgptModel, mat) -> np.ndarray:
    """Functional ``x -> Tr(mat x)`` in coordinates.

    ``mat`` may be a single ``d x d`` Hermitian matrix or a stack of them.
    """
    d = _quantum_d(model)
    mat = np.asarray(mat, dtype=complex)
    if mat.shape[-2:] != (d, d):
        raise DimensionMismatch(f"expected {d}x{d} matrices, got shape {mat.shape}")
    herm = np.swapaxes(mat.conj(), -1, -2)
    if np.abs(mat - herm).max() > 1e-12 * max(1.0, np.abs(mat).max()):
        raise ValidationError("effect matrix is not Hermitian")
    flat = gell_mann_basis(d).reshape(d * d - 1, d * d)
    # Tr(M u) = sum_ij M_ij u_ji, and u is Hermitian so u_ji = conj(u_ij).
    traceless = (mat.reshape(mat.shape[:-2] + (d * d,)) @ flat.conj().T).real
    trace = np.trace(mat, axis1=-2, axis2=-1).real / d
    return np.concatenate([trace[..., None], traceless], axis=-1)


def effect_to_matrix(model: GgptModel, f) -> np.ndarray:
    d = _quantum_d(model)
    f = np.asarray(f, dtype=float)
    return f[0] * np.eye(d) + np.einsum("k,kij->ij", f[1:], gell_mann_basis(d))


def vector_to_coords(model: GgptModel, x) -> np.ndarray:
    """Coordinates of a vector of R^n in the classical model."""
    n = _classical_n(model)
    x = np.asarray(x, dtype=float)
    return np.concatenate([[x.sum()], helmert_basis(n) @ x])


def coords_to_vector(model: GgptModel, x) -> np.ndarray:
    n = _classical_n(model)
    x = np.asarray(x, dtype=float)
    return x[0] / n + helmert_basis(n).T @ x[1:]


def effect_from_vector(model: GgptModel, f) -> np.ndarray:
    """Functional ``x -> f . x`` on R^n in coordinates."""
    n = _classical_n(model)
    f = np.asarray(f, dtype=float)
    if f.shape != (n,):
        raise DimensionMismatch(f"expected a vector of length {n}, got shape {f.shape}")
    return np.concatenate([[f.mean()], helmert_basis(n) @ f])


def effect_to_native_vector(model: GgptModel, f) -> np.ndarray:
    n = _classical_n(model)
    f = np.asarray(f, dtype=float)
    return f[0] + helmert_basis(n).T @ f[1:]


def _quantum_d(model: GgptModel) -> int:
    if model.descriptor.get("type") != "quantum":
        raise ValidationError(f"model {model.name} is not a quantum model")
    return model.descriptor["d"]


def _classical_n(model: GgptModel) -> int:
    if model.descriptor.get("type") != "classical":
        raise ValidationError(f"model {model.name} is not a classical model")
    return model.descriptor["n"]


# ---------------------------------------------------------------------------
# Models


@functools.lru_cache(maxsize=None)
def quantum_model(d: int) -> GgptModel:
    """Quantum theory on C^d: self-dual with ``mu = 1/d`` and ``chi = (d-1)/d``."""
    if d < 2:
        raise ValidationError("quantum_model needs d >= 2")
    flat = gell_mann_basis(d).reshape(d * d - 1, d * d)
    eye = np.eye(d)

    def psd(mats, tol):
        eig = np.linalg.eigvalsh(mats)
        scale = np.maximum(1.0, np.abs(eig).max(axis=-1))
        ok = eig[..., 0] >= -tol * scale
        return bool(ok) if ok.ndim == 0 else ok

    def cone(x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        mats = x[..., :1, None] * eye / d + (x[..., 1:] @ flat).reshape(x.shape[:-1] + (d, d))
        return psd(mats, tol)

    def dual_cone(f, tol=1e-9):
        f = np.asarray(f, dtype=float)
        mats = f[..., :1, None] * eye + (f[..., 1:] @ flat).reshape(f.shape[:-1] + (d, d))
        return psd(mats, tol)

    return GgptModel(
        name=f"quantum:{d}",
        dim_v0=d * d - 1,
        mu=1.0 / d,
        chi=(d - 1) / d,
        duality=Duality.SELF,
        cone_oracle=cone,
        dual_cone_oracle=dual_cone,
        equinorm=True,
        descriptor={"type": "quantum", "d": d},
    )


@functools.lru_cache(maxsize=None)
def classical_model(n: int) -> GgptModel:
    """Probability simplex on n outcomes: self-dual with ``mu = 1/n`` and ``chi = 1 - 1/n``."""
    if n < 2:
        raise ValidationError("classical_model needs n >= 2")
    basis = helmert_basis(n)

    def nonneg(vec, tol):
        scale = np.maximum(1.0, np.abs(vec).max(axis=-1))
        ok = vec.min(axis=-1) >= -tol * scale
        return bool(ok) if ok.ndim == 0 else ok

    def cone(x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        return nonneg(x[..., :1] / n + x[..., 1:] @ basis, tol)

    def dual_cone(f, tol=1e-9):
        f = np.asarray(f, dtype=float)
        return nonneg(f[..., :1] + f[..., 1:] @ basis, tol)

    return GgptModel(
        name=f"classical:{n}",
        dim_v0=n - 1,
        mu=1.0 / n,
        chi=1.0 - 1.0 / n,
        duality=Duality.SELF,
        cone_oracle=cone,
        dual_cone_oracle=dual_cone,
        equinorm=True,
        descriptor={"type": "classical", "n": n},
    )


def model_from_descriptor(desc) -> GgptModel:
    """Build a model from ``{"type": "quantum", "d": 2}`` or the string ``"quantum:2"``."""
    if isinstance(desc, str):
        kind, _, size = desc.partition(":")
        try:
            size = int(size)
        except ValueError:
            raise ValidationError(f"bad model descriptor {desc!r}") from None
        desc = {"type": kind, ("d" if kind == "quantum" else "n"): size}
    kind = desc.get("type")
    try:
        if kind == "quantum":
            return quantum_model(int(desc["d"]))
        if kind == "classical":
            return classical_model(int(desc["n"]))
    except KeyError as exc:
        raise ValidationError(f"model descriptor {desc!r} lacks {exc}") from None
    raise ValidationError(f"unknown model type {kind!r}")


def generating_rays(model: GgptModel, x) -> np.ndarray:
    """Extreme rays of ``C`` that minimise ``<x, .>``: used for duality checks.

    For quantum models the minimiser over pure states is the eigenvector of the
    smallest eigenvalue; for classical models it is the vertex with the
    smallest entry.  Returned as unit-trace coordinate vectors.
    """
    kind = model.descriptor["type"]
    if kind == "quantum":
        w, vecs = np.linalg.eigh(coords_to_matrix(model, x))
        psi = vecs[:, 0]
        return matrix_to_coords(model, np.outer(psi, psi.conj()))
    j = int(np.argmin(coords_to_vector(model, x)))
    vertex = np.zeros(model.descriptor["n"])
    vertex[j] = 1.0
    return vector_to_coords(model, vertex)


# ---------------------------------------------------------------------------
# Random sampling


def random_pure_state(model: GgptModel, rng: np.random.Generator) -> np.ndarray:
    kind = model.descriptor["type"]
    if kind == "quantum":
        d = model.descriptor["d"]
        psi = rng.normal(size=d) + 1j * rng.normal(size=d)
        psi /= np.linalg.norm(psi)
        return matrix_to_coords(model, np.outer(psi, psi.conj()))
    n = model.descriptor["n"]
    vertex = np.zeros(n)
    vertex[rng.integers(n)] = 1.0
    return vector_to_coords(model, vertex)


def random_state(model: GgptModel, rng: np.random.Generator) -> np.ndarray:
    """Random state: a uniform pure state mixed with ``m`` (quantum), uniform on the simplex (classical)."""
    kind = model.descriptor["type"]
    if kind == "quantum":
        t = rng.uniform()
        return t * random_pure_state(model, rng) + (1 - t) * model.m
    n = model.descriptor["n"]
    return vector_to_coords(model, rng.dirichlet(np.ones(n)))


def random_measurement(model: GgptModel, n_outcomes: int, rng: np.random.Generator) -> Measurement:
    """Random measurement with ``n_outcomes`` effects (generally not s-tight)."""
    kind = model.descriptor["type"]
    if kind == "quantum":
        d = model.descriptor["d"]
        gs = []
        for _ in range(n_outcomes):
            a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            gs.append(a @ a.conj().T)
        total = sum(gs)
        w, u = np.linalg.eigh(total)
        inv_sqrt = u @ np.diag(w**-0.5) @ u.conj().T
        mats = [inv_sqrt @ g @ inv_sqrt for g in gs]
        mats = [(p + p.conj().T) / 2 for p in mats]
        return Measurement(model, [effect_from_matrix(model, p) for p in mats], label="random")
    n = model.descriptor["n"]
    raw = rng.uniform(0.05, 1.0, size=(n_outcomes, n))
    raw /= raw.sum(axis=0, keepdims=True)
    return Measurement(model, [effect_from_vector(model, f) for f in raw], label="random")


# ---------------------------------------------------------------------------
# The 3-parameter qubit family

_RANGE_SLACK = 1e-12


@dataclass(frozen=True)
class FamilyParams:
    """Parameters of the five-outcome qubit family.

    Valid ranges: ``a in (0, 1/2)``, ``b in (0, a]``, ``c in (0, (1 - 2a)/3]``.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        a, b, c = self.a, self.b, self.c
        if not 0 < a < 0.5:
            raise ParamOutOfRange(f"a = {a} outside (0, 1/2)")
        if not 0 < b <= a + _RANGE_SLACK:
            raise ParamOutOfRange(f"b = {b} outside (0, a] with a = {a}")
        cmax = (1 - 2 * a) / 3
        if not 0 < c <= cmax + _RANGE_SLACK:
            raise ParamOutOfRange(f"c = {c} outside (0, {cmax:.6g}]")


def example_family_matrices(a: float, b: float, c: float):
    i, x, y, z = (PAULI[k] for k in "IXYZ")
    r = (1 - 2 * a) / 3
    s3 = math.sqrt(3)
    return [
        a * i + b * z,
        a * i - b * z,
        r * i + c * x,
        r * i - c / 2 * x + s3 * c / 2 * y,
        r * i - c / 2 * x - s3 * c / 2 * y,
    ]


def _pauli_coords(alpha, bloch) -> np.ndarray:
    """Coordinates of ``alpha I + bloch . sigma``: ``(alpha; sqrt(2) bloch)``."""
    bloch = np.asarray(bloch, dtype=float)
    return np.concatenate([np.asarray(alpha, dtype=float)[..., None], math.sqrt(2) * bloch], axis=-1)


def example_family(params, b: float | None = None, c: float | None = None) -> Measurement:
    """Five-effect qubit POVM ``aI +- bZ``, ``(1-2a)/3 I + c (rotated X)``.

    Accepts a :class:`FamilyParams` or the three numbers ``a, b, c``.
    """
    p = params if isinstance(params, FamilyParams) else FamilyParams(params, b, c)
    a, b, c = p.a, p.b, p.c
    r = (1 - 2 * a) / 3
    h = math.sqrt(3) * c / 2
    effects = _pauli_coords(
        [a, a, r, r, r],
        [[0, 0, b], [0, 0, -b], [c, 0, 0], [-c / 2, h, 0], [-c / 2, -h, 0]],
    )
    return Measurement(quantum_model(2), effects, label=f"family({a:.6g},{b:.6g},{c:.6g})")


def morphophoric_surface(a: float, b: float) -> float:
    """``c`` on the morphophoric surface ``c = 2 sqrt(3) b / 3``."""
    return 2 * math.sqrt(3) * b / 3


def tight_ic_surface(a: float, b: float) -> float:
    """``c`` on the tight IC surface ``c^2 = (4b^2 - 8ab^2) / (9a)``."""
    return math.sqrt((4 * b * b - 8 * a * b * b) / (9 * a))


# ---------------------------------------------------------------------------
# Named measurements

_SIC_DIRECTIONS = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)


def _bloch_effect(weight: float, direction) -> np.ndarray:
    """``weight * (I + n . sigma)`` as a 2x2 matrix."""
    nx, ny, nz = direction
    return weight * (PAULI["I"] + nx * PAULI["X"] + ny * PAULI["Y"] + nz * PAULI["Z"])


def qubit_sic(rotated: bool = False) -> Measurement:
    """Tetrahedral SIC ``(1/4)(I + sigma . n_j / sqrt(3))``.

    ``rotated=True`` gives the tetrahedron with directions ``-n_j`` (a 90 degree
    rotation about z of the default one).
    """
    model = quantum_model(2)
    dirs = -_SIC_DIRECTIONS if rotated else _SIC_DIRECTIONS
    mats = [_bloch_effect(0.25, n / math.sqrt(3)) for n in dirs]
    return Measurement(model, [effect_from_matrix(model, p) for p in mats], label="qubit_sic" + ("_rotated" if rotated else ""))


def z_basis() -> Measurement:
    model = quantum_model(2)
    mats = [_bloch_effect(0.5, (0, 0, 1)), _bloch_effect(0.5, (0, 0, -1))]
    return Measurement(model, [effect_from_matrix(model, p) for p in mats], label="z_basis")


def _check_weights(weights, k: int) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.shape != (k,) or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise BadWeights(f"need {k} nonnegative weights summing to 1, got {weights}")
    return w


def mub_union(weights=(1 / 3, 1 / 3, 1 / 3)) -> Measurement:
    """Weighted union of the X, Y and Z eigenbasis measurements (6 outcomes).

    Zero-weight bases are dropped, since measurements consist of nonzero effects.
    """
    w = _check_weights(weights, 3)
    model = quantum_model(2)
    mats = []
    for t, axis in zip(w, np.eye(3)):
        if t > 0:
            mats += [_bloch_effect(t / 2, axis), _bloch_effect(t / 2, -axis)]
    label = "mub_union(" + ",".join(f"{t:.6g}" for t in w) + ")"
    return Measurement(model, [effect_from_matrix(model, p) for p in mats], label=label)


def sic_union(t: float) -> Measurement:
    """``(t SIC) u ((1-t) rotated SIC)``: a union of two unbiased morphophoric measurements."""
    if not 0 < t < 1:
        raise BadWeights(f"t = {t} outside (0, 1)")
    return union([qubit_sic(), qubit_sic(rotated=True)], [t, 1 - t], label=f"sic_union({t:.6g})")


def fine_grained(n: int) -> Measurement:
    """The vertex measurement ``pi_j(x) = x_j`` of the classical model on n outcomes."""
    model = classical_model(n)
    return Measurement(model, [effect_from_vector(model, e) for e in np.eye(n)], label=f"fine_grained({n})")


def complete_mub(d: int) -> Measurement:
    """Uniform union of ``d + 1`` mutually unbiased bases for prime ``d``."""
    if d == 2:
        return mub_union()
    if d < 2 or any(d % p == 0 for p in range(2, int(math.isqrt(d)) + 1)):
        raise ValidationError("complete_mub needs a prime dimension")
    model = quantum_model(d)
    omega = np.exp(2j * np.pi / d)
    k = np.arange(d)
    kets = list(np.eye(d, dtype=complex))
    for b in range(d):
        for a in range(d):
            kets.append(omega ** (b * k * k + a * k) / math.sqrt(d))
    mats = [np.outer(psi, psi.conj()) / (d + 1) for psi in kets]
    return Measurement(model, [effect_from_matrix(model, p) for p in mats], label=f"complete_mub({d})")


def named_measurement(name: str, *args) -> Measurement:
    """Look up a built-in measurement by name."""
    table = {
        "qubit_sic": qubit_sic,
        "mub_union": mub_union,
        "z_basis": z_basis,
        "fine_grained": fine_grained,
        "sic_union": sic_union,
        "complete_mub": complete_mub,
    }
    try:
        return table[name](*args)
    except KeyError:
        raise ValidationError(f"unknown measurement {name!r}") from None


# ---------------------------------------------------------------------------
# Parameter sweep

SWEEP_HEADER = ("a", "b", "c", "ic", "morphophoric", "tight_ic", "s_tight", "chi_ray", "alpha_s")


@dataclass(frozen=True)
class SweepRecord:
    a: float
    b: float
    c: float
    ic: bool
    morphophoric: bool
    tight_ic: bool
    s_tight: bool
    chi_ray: bool
    alpha_s: float | None

    def csv_row(self) -> str:
        flags = [str(int(getattr(self, k))) for k in SWEEP_HEADER[3:8]]
        alpha = "" if self.alpha_s is None else f"{self.alpha_s:.12g}"
        return ",".join([f"{self.a:.12g}", f"{self.b:.12g}", f"{self.c:.12g}", *flags, alpha])


def grid_axis(lo: float, hi: float, count: int) -> np.ndarray:
    """Midpoints of ``count`` equal cells of ``(lo, hi)``."""
    return lo + (np.arange(count) + 0.5) * (hi - lo) / count


def _axial_anisotropy(vectors: np.ndarray) -> float:
    """Signed ``S_zz - tr(S)/3`` of the frame operator; zero on the tight surface."""
    sq = vectors**2
    return float(sq[:, 2].sum() - sq.sum() / 3)


def _sweep_column(a: float, b: float, nc: int, tol: float) -> list[SweepRecord]:
    cs = grid_axis(0.0, (1 - 2 * a) / 3, nc)
    reports, aniso_m, aniso_t = [], [], []
    for c in cs:
        meas = example_family(a, b, c)
        reports.append(classify(meas, tol))
        h = meas.v[:, 1:]
        aniso_m.append(_axial_anisotropy(h))
        aniso_t.append(_axial_anisotropy(h / np.sqrt(meas.pm)[:, None]))

    def crosses(values, k):
        lo, hi = max(k - 1, 0), min(k + 1, nc - 1)
        return any(values[i] * values[i + 1] <= 0 for i in range(lo, hi))

    out = []
    for k, (c, rep) in enumerate(zip(cs, reports)):
        out.append(
            SweepRecord(
                a=a,
                b=b,
                c=float(c),
                ic=rep.ic,
                morphophoric=rep.morphophoric or (rep.ic and crosses(aniso_m, k)),
                tight_ic=rep.tight_ic or (rep.ic and crosses(aniso_t, k)),
                s_tight=rep.s_tight,
                chi_ray=rep.chi_ray,
                alpha_s=rep.alpha_s,
            )
        )
    return out


def _sweep_slice(args):
    a, nb, nc, tol = args
    out = []
    for b in grid_axis(0.0, a, nb):
        out.extend(_sweep_column(float(a), float(b), nc, tol))
    return out


def parse_grid(spec) -> tuple[int, int, int]:
    """``"50x50x50"`` or a 3-sequence -> ``(na, nb, nc)``."""
    if isinstance(spec, str):
        parts = spec.lower().split("x")
    else:
        parts = list(spec)
    try:
        counts = tuple(int(p) for p in parts)
    except ValueError:
        raise ValidationError(f"bad grid specification {spec!r}") from None
    if len(counts) != 3 or min(counts) < 2:
        raise ValidationError("grid needs three step counts, each >= 2")
    return counts


def sweep_family(grid, tol: float = 1e-8, workers: int = 1) -> list[SweepRecord]:
    """Classify the 3-parameter family on a grid of cell midpoints.

    ``a`` runs over ``(0, 1/2)``, ``b`` over ``(0, a]`` and ``c`` over
    ``(0, (1-2a)/3]``.  Morphophoric and tight IC flags are resolved to one
    grid cell: a point is flagged when the classifier reports the property, or
    when the signed anisotropy of the relevant frame operator changes sign
    between the point and one of its neighbours in ``c``.  Records are ordered
    by ``(a, b, c)`` grid index regardless of ``workers``.
    """
    na, nb, nc = parse_grid(grid)
    jobs = [(float(a), nb, nc, tol) for a in grid_axis(0.0, 0.5, na)]
    if workers <= 1:
        chunks = [_sweep_slice(j) for j in jobs]
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_slice, jobs))
    return [r for chunk in chunks for r in chunk]


def write_sweep_csv(records, stream) -> None:
    stream.write(",".join(SWEEP_HEADER) + "\n")
    for r in records:
        stream.write(r.csv_row() + "\n")
