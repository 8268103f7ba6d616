import io
import math

import numpy as np
import pytest

from ggptframes.errors import BadWeights, ParamOutOfRange, ValidationError
from ggptframes.measurements import classify, traceless_frame
from ggptframes.models import (
    FamilyParams,
    SWEEP_HEADER,
    classical_model,
    complete_mub,
    coords_to_matrix,
    coords_to_vector,
    effect_from_matrix,
    effect_to_matrix,
    effect_to_native_vector,
    example_family,
    example_family_matrices,
    fine_grained,
    gell_mann_basis,
    grid_axis,
    helmert_basis,
    matrix_to_coords,
    model_from_descriptor,
    mub_union,
    named_measurement,
    parse_grid,
    quantum_model,
    qubit_sic,
    random_measurement,
    sic_union,
    sweep_family,
    vector_to_coords,
    write_sweep_csv,
    z_basis,
)
from ggptframes.ggpt import validate_measurement

SQ3 = math.sqrt(3)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_gell_mann_orthonormal(d):
    basis = gell_mann_basis(d)
    gram = np.einsum("aij,bji->ab", basis, basis)
    np.testing.assert_allclose(gram, np.eye(d * d - 1), atol=1e-14)
    np.testing.assert_allclose(np.trace(basis, axis1=1, axis2=2), 0, atol=1e-14)
    np.testing.assert_allclose(basis, basis.conj().transpose(0, 2, 1))


def test_qubit_basis_is_pauli():
    b = gell_mann_basis(2) * math.sqrt(2)
    np.testing.assert_allclose(b[0], [[0, 1], [1, 0]])
    np.testing.assert_allclose(b[1], [[0, -1j], [1j, 0]])
    np.testing.assert_allclose(b[2], [[1, 0], [0, -1]])


def test_helmert_orthonormal():
    for n in range(2, 7):
        h = helmert_basis(n)
        np.testing.assert_allclose(h @ h.T, np.eye(n - 1), atol=1e-14)
        np.testing.assert_allclose(h.sum(axis=1), 0, atol=1e-14)


@pytest.mark.parametrize("d, dim_v0, mu, chi", [(2, 3, 1 / 2, 1 / 2), (3, 8, 1 / 3, 2 / 3)])
def test_quantum_model(d, dim_v0, mu, chi):
    m = quantum_model(d)
    assert (m.dim_v0, m.mu, m.chi) == (dim_v0, pytest.approx(mu), pytest.approx(chi))
    np.testing.assert_allclose(coords_to_matrix(m, m.unit_effect / m.mu), np.eye(d), atol=1e-15)


def test_classical_model():
    m = classical_model(3)
    assert (m.dim_v0, m.mu, m.chi) == (2, pytest.approx(1 / 3), pytest.approx(2 / 3))
    rep = classify(fine_grained(3))
    assert rep.morphophoric and rep.tight_ic and rep.unbiased


def test_classical_binary_any_ic_is_s_tight(rng):
    m = classical_model(2)
    for _ in range(20):
        meas = random_measurement(m, int(rng.integers(2, 5)), rng)
        rep = classify(meas)
        if rep.ic:
            assert rep.s_tight


def test_conversions_roundtrip(rng):
    for d in (2, 3):
        m = quantum_model(d)
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        a = a + a.conj().T
        np.testing.assert_allclose(coords_to_matrix(m, matrix_to_coords(m, a)), a, atol=1e-13)
        np.testing.assert_allclose(effect_to_matrix(m, effect_from_matrix(m, a)), a, atol=1e-13)
    c = classical_model(4)
    x = rng.normal(size=4)
    np.testing.assert_allclose(coords_to_vector(c, vector_to_coords(c, x)), x, atol=1e-14)
    f = rng.normal(size=4)
    from ggptframes.models import effect_from_vector

    np.testing.assert_allclose(effect_to_native_vector(c, effect_from_vector(c, f)), f, atol=1e-14)


def test_effect_pairing_is_born_rule(rng):
    m = quantum_model(3)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    p = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    p = p + p.conj().T
    born = np.trace(rho @ p).real
    assert effect_from_matrix(m, p) @ matrix_to_coords(m, rho) == pytest.approx(born)


def test_non_hermitian_rejected():
    with pytest.raises(ValidationError):
        effect_from_matrix(quantum_model(2), np.array([[0, 1], [0, 0]], dtype=complex))


def test_model_from_descriptor():
    assert model_from_descriptor("quantum:2") is quantum_model(2)
    assert model_from_descriptor({"type": "classical", "n": 3}) is classical_model(3)
    with pytest.raises(ValidationError):
        model_from_descriptor("quantum:x")
    with pytest.raises(ValidationError):
        model_from_descriptor({"type": "real"})


def test_family_matches_matrices(rng):
    m = quantum_model(2)
    for _ in range(20):
        a = rng.uniform(0.01, 0.49)
        b = rng.uniform(0.001, a)
        c = rng.uniform(0.001, (1 - 2 * a) / 3)
        via_matrices = effect_from_matrix(m, np.array(example_family_matrices(a, b, c)))
        np.testing.assert_allclose(example_family(a, b, c).effects, via_matrices, atol=1e-15)


def test_family_traceless_vectors():
    a, b, c = 0.2, 0.15, 0.1
    h = traceless_frame(example_family(a, b, c)).vectors
    r2 = math.sqrt(2)
    expected = np.array(
        [
            [0, 0, r2 * b],
            [0, 0, -r2 * b],
            [r2 * c, 0, 0],
            [-r2 * c / 2, math.sqrt(6) * c / 2, 0],
            [-r2 * c / 2, -math.sqrt(6) * c / 2, 0],
        ]
    )
    np.testing.assert_allclose(h, expected, atol=1e-15)
    # Gram matrices proportional to the unnormalised display (factor 2).
    disp = expected / r2
    np.testing.assert_allclose(h @ h.T, 2 * disp @ disp.T, atol=1e-12)


@pytest.mark.parametrize("params", [(1 / 6, 1 / 6, 2 / 9), ((SQ3 - 1) / 4, (SQ3 - 1) / 4, (3 - SQ3) / 6)])
def test_family_rank_one_points(params):
    meas = example_family(*params)
    for f in meas.effects:
        eig = np.linalg.eigvalsh(effect_to_matrix(meas.model, f))
        assert eig[0] == pytest.approx(0, abs=1e-12)
    assert classify(meas).chi_ray


def test_family_rank_one_morph_point():
    assert classify(example_family((SQ3 - 1) / 4, (SQ3 - 1) / 4, (3 - SQ3) / 6)).morphophoric


def test_family_out_of_range():
    with pytest.raises(ParamOutOfRange):
        example_family(0.3, 0.2, 0.2)
    with pytest.raises(ParamOutOfRange):
        FamilyParams(0.5, 0.1, 0.0)
    with pytest.raises(ParamOutOfRange):
        FamilyParams(0.2, 0.3, 0.1)


def test_chi_ray_edge():
    for a in np.linspace(0.02, 0.48, 20):
        c_edge = (1 - 2 * a) / 3
        assert classify(example_family(a, a, c_edge)).chi_ray
        assert not classify(example_family(a, a, c_edge * 0.9)).chi_ray
        assert not classify(example_family(a, a * 0.9, c_edge)).chi_ray


def test_qubit_sic_named():
    meas = named_measurement("qubit_sic")
    rep = classify(meas)
    np.testing.assert_allclose(meas.pm, 0.25)
    assert rep.unbiased and rep.morphophoric and rep.tight_ic and rep.chi_ray


def test_mub_union_uniform():
    rep = classify(named_measurement("mub_union", (1 / 3, 1 / 3, 1 / 3)))
    assert rep.unbiased and rep.morphophoric and rep.tight_ic


def test_mub_union_biased_is_s_tight_not_tight():
    # The 1/sqrt(pi_j(m))-scaled traceless frame has operator diag(1, 1/2, 1/2),
    # so this union is s-tight but not tight IC.
    meas = mub_union((1 / 2, 1 / 4, 1 / 4))
    h = meas.v[:, 1:] / np.sqrt(meas.pm)[:, None]
    np.testing.assert_allclose(h.T @ h, np.diag([1, 0.5, 0.5]), atol=1e-14)
    rep = classify(meas)
    assert rep.s_tight and not rep.tight_ic and not rep.unbiased


def test_mub_union_bad_weights():
    with pytest.raises(BadWeights):
        mub_union((0.5, 0.5, 0.5))
    with pytest.raises(BadWeights):
        mub_union((1.2, -0.2, 0.0))
    with pytest.raises(ValidationError):
        named_measurement("nope")


def test_mub_union_drops_zero_weight():
    assert mub_union((0.5, 0.5, 0.0)).n == 4


def test_complete_mub_qutrit():
    rep = classify(complete_mub(3))
    assert rep.unbiased and rep.tight_ic and rep.alpha_t == pytest.approx(0.75)
    with pytest.raises(ValidationError):
        complete_mub(4)


def test_builtins_validate():
    for meas in (qubit_sic(), qubit_sic(True), z_basis(), mub_union(), sic_union(0.3), fine_grained(4), complete_mub(3)):
        rep = validate_measurement(meas.model, meas.effects)
        assert rep.valid and rep.sum_residual <= 1e-12


def test_grid_axis_midpoints():
    np.testing.assert_allclose(grid_axis(0, 1, 4), [0.125, 0.375, 0.625, 0.875])


def test_parse_grid():
    assert parse_grid("5x6x7") == (5, 6, 7)
    assert parse_grid([2, 3, 4]) == (2, 3, 4)
    for bad in ("5x", "4", "5x5x1", "axbxc"):
        with pytest.raises(ValidationError):
            parse_grid(bad)


def test_sweep_coarse():
    records = sweep_family("5x5x5")
    assert len(records) == 125
    assert all(r.s_tight and r.ic for r in records)


def test_sweep_generic_point_s_tight_only():
    rep = classify(example_family(0.2, 0.15, 0.1))
    assert rep.s_tight and not rep.morphophoric and not rep.tight_ic


def test_sweep_surface_intersection():
    b = 0.1
    rep = classify(example_family(0.2, b, 2 * SQ3 * b / 3))
    assert rep.morphophoric and rep.tight_ic


def test_sweep_workers_deterministic():
    one = sweep_family("3x3x4", workers=1)
    two = sweep_family("3x3x4", workers=2)
    assert one == two


def test_sweep_csv():
    buf = io.StringIO()
    write_sweep_csv(sweep_family("2x2x2"), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(SWEEP_HEADER)
    assert len(lines) == 9
