import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_valid_measurements
from ggptframes.errors import InvalidMeasurement, PreconditionNotMet
from ggptframes.measurements import (
    Measurement,
    chi_ray_constants_residual,
    classify,
    is_ic,
    is_unbiased,
    lift_identity_residual,
    s_tight_bound,
    tight_criterion_residual,
    tight_ic_formula_bound,
    traceless_frame,
    union,
)
from ggptframes.frames import frame_bounds
from ggptframes.models import (
    classical_model,
    example_family,
    fine_grained,
    quantum_model,
    qubit_sic,
    random_measurement,
    z_basis,
)

Q2 = quantum_model(2)


def trivial(model=Q2):
    return Measurement(model, [model.unit_effect])


def test_measurement_arrays_read_only():
    meas = qubit_sic()
    for arr in (meas.effects, meas.v, meas.w, meas.pm):
        with pytest.raises(ValueError):
            arr[0] = 0


def test_invalid_measurement():
    with pytest.raises(InvalidMeasurement, match="effects do not sum to unit effect"):
        Measurement(Q2, [0.5 * Q2.unit_effect, 0.6 * Q2.unit_effect])


def test_pm_sums_to_one(rng):
    for meas in random_valid_measurements(20, seed=2):
        assert meas.pm.sum() == pytest.approx(1, abs=1e-10)
        assert np.all(meas.pm > 0)


def test_sic_traceless_frame_is_tetrahedron():
    h = traceless_frame(qubit_sic()).vectors
    np.testing.assert_allclose(np.sum(h**2, axis=1), 1 / 8)
    gram = h @ h.T
    off = gram[~np.eye(4, dtype=bool)]
    np.testing.assert_allclose(off, -1 / 24)  # cos = -1/3


def test_trivial_traceless_frame_is_zero():
    np.testing.assert_array_equal(traceless_frame(trivial()).vectors, np.zeros((1, 3)))


def test_is_ic_examples():
    assert is_ic(qubit_sic())
    assert not is_ic(z_basis())
    assert not is_ic(trivial())


def test_classify_family_points():
    r = classify(example_family(1 / 6, 1 / 6, 2 / 9))
    assert r.ic and r.tight_ic and r.chi_ray and not r.morphophoric
    r = classify(example_family(0.2, 0.1, 2 * math.sqrt(3) * 0.1 / 3))
    assert r.ic and r.morphophoric and r.tight_ic
    r = classify(example_family(0.2, 0.15, 0.1))
    assert r.ic and r.s_tight and not r.morphophoric and not r.tight_ic


def test_classify_trivial():
    r = classify(trivial())
    assert not r.ic and not r.s_tight and not r.morphophoric


def test_report_to_dict_is_json_ready():
    import json

    d = classify(qubit_sic()).to_dict()
    json.dumps(d)
    assert d["tight_ic"] is True and len(d["scales"]) == 4


def test_s_tight_bound_examples():
    assert s_tight_bound(qubit_sic(), [2, 2, 2, 2]) == pytest.approx(2 / 3)
    assert s_tight_bound(trivial(), [3.0]) == pytest.approx(0, abs=1e-15)
    # Simplex vertices: ||delta_j - m||^2 = 2/3 each, three of them over dim 2.
    assert s_tight_bound(fine_grained(3), [1, 1, 1]) == pytest.approx(1.0)


def test_s_tight_bound_matches_spectrum(s_tight_meas):
    rep = classify(s_tight_meas)
    h = s_tight_meas.v[:, 1:] * rep.scales[:, None]
    b = frame_bounds(traceless_frame(s_tight_meas).scaled(rep.scales))
    assert b.tight
    assert s_tight_bound(s_tight_meas, rep.scales) == pytest.approx(b.lower, rel=1e-9)
    assert rep.alpha_s == pytest.approx(np.trace(h.T @ h) / h.shape[1], rel=1e-9)


def test_lift_identity_examples():
    assert lift_identity_residual(qubit_sic()) <= 1e-12
    res, alpha = tight_criterion_residual(qubit_sic())
    assert res <= 1e-12 and alpha == pytest.approx(2 / 3)
    fam = example_family(0.2, 0.15, 0.1)
    assert lift_identity_residual(fam) <= 1e-12
    assert tight_criterion_residual(fam)[0] > 1e-3
    assert lift_identity_residual(trivial()) <= 1e-12


def test_chi_ray_constants_examples():
    assert chi_ray_constants_residual(qubit_sic()) <= 1e-12
    assert chi_ray_constants_residual(example_family(1 / 6, 1 / 6, 2 / 9)) <= 1e-12
    for n in (2, 3, 6):
        assert chi_ray_constants_residual(fine_grained(n)) <= 1e-12
    with pytest.raises(PreconditionNotMet):
        chi_ray_constants_residual(example_family(0.2, 0.15, 0.1))


def test_tight_formula_bound(tight_meas):
    rep = classify(tight_meas)
    assert rep.tight_ic
    assert tight_ic_formula_bound(tight_meas) == pytest.approx(rep.alpha_t, rel=1e-9)


def test_class_inclusions_random(rng):
    meas = random_valid_measurements(60, seed=21) + [example_family(0.2, 0.1, 0.05 * k) for k in range(1, 5)]
    for m in meas:
        rep = classify(m)
        if rep.morphophoric or rep.tight_ic:
            assert rep.s_tight
        if rep.morphophoric:
            assert s_tight_bound(m, np.ones(m.n)) == pytest.approx(rep.alpha_m, rel=1e-8)
        if rep.tight_ic:
            assert s_tight_bound(m, 1 / np.sqrt(m.pm)) == pytest.approx(rep.alpha_t, rel=1e-8)


def _random_unbiased(rng, model, n):
    """Rotated copies of a fixed unbiased measurement keep pm_j = 1/n."""
    if model.descriptor["type"] == "classical":
        base = fine_grained(model.descriptor["n"])
        perm = rng.permutation(base.n)
        return Measurement(model, base.effects[perm])
    # Qubit: n equal-weight effects with Bloch vectors summing to zero.
    dirs = rng.normal(size=(n - 1, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    last = -dirs.sum(axis=0)
    r = rng.uniform(0.1, 1) / max(1.0, np.linalg.norm(last))
    vecs = np.vstack([dirs, last]) * r
    effects = np.c_[np.full(n, 1 / n), math.sqrt(2) * vecs / n]
    return Measurement(model, effects)


def test_unbiased_tight_iff_morphophoric(rng):
    for _ in range(60):
        model = Q2 if rng.uniform() < 0.7 else classical_model(int(rng.integers(2, 6)))
        meas = _random_unbiased(rng, model, int(rng.integers(4, 8)))
        assert is_unbiased(meas)
        rep = classify(meas)
        assert rep.tight_ic == rep.morphophoric


@pytest.mark.parametrize("t", [0.1 * k for k in range(1, 10)])
def test_union_of_morphophoric_is_tight(t):
    # SIC and its rotated copy are unbiased morphophoric measurements.
    meas = union([qubit_sic(), qubit_sic(rotated=True)], [t, 1 - t])
    rep = classify(meas)
    assert rep.tight_ic
    assert rep.unbiased == math.isclose(t, 0.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(Q2, 4), (Q2, 6), (classical_model(3), 4)]))
def test_lift_identity_property(seed, spec):
    model, n = spec
    meas = random_measurement(model, n, np.random.default_rng(seed))
    assert lift_identity_residual(meas) <= 1e-10

