import math

import numpy as np
import pytest

from ggptframes.models import (
    classical_model,
    complete_mub,
    example_family,
    fine_grained,
    mub_union,
    quantum_model,
    qubit_sic,
    random_measurement,
    sic_union,
)

SQ3 = math.sqrt(3)

# name -> factory; every entry is s-tight IC
S_TIGHT_CORPUS = {
    "qubit_sic": qubit_sic,
    "qubit_sic_rotated": lambda: qubit_sic(rotated=True),
    "mub_union_uniform": lambda: mub_union((1 / 3, 1 / 3, 1 / 3)),
    "mub_union_biased": lambda: mub_union((1 / 2, 1 / 4, 1 / 4)),
    "sic_union_0.3": lambda: sic_union(0.3),
    "fine_grained_3": lambda: fine_grained(3),
    "fine_grained_5": lambda: fine_grained(5),
    "complete_mub_3": lambda: complete_mub(3),
    "family_tight": lambda: example_family(1 / 6, 1 / 6, 2 / 9),
    "family_morph": lambda: example_family((SQ3 - 1) / 4, (SQ3 - 1) / 4, (3 - SQ3) / 6),
    "family_both": lambda: example_family(0.2, 0.1, 2 * SQ3 * 0.1 / 3),
    "family_generic": lambda: example_family(0.2, 0.15, 0.1),
}

TIGHT_IC = {
    "qubit_sic",
    "qubit_sic_rotated",
    "mub_union_uniform",
    "sic_union_0.3",
    "fine_grained_3",
    "fine_grained_5",
    "complete_mub_3",
    "family_tight",
    "family_both",
}


@pytest.fixture(params=sorted(S_TIGHT_CORPUS))
def s_tight_meas(request):
    return S_TIGHT_CORPUS[request.param]()


@pytest.fixture(params=sorted(TIGHT_IC))
def tight_meas(request):
    return S_TIGHT_CORPUS[request.param]()


MODELS = {
    "quantum:2": lambda: quantum_model(2),
    "quantum:3": lambda: quantum_model(3),
    "classical:3": lambda: classical_model(3),
    "classical:5": lambda: classical_model(5),
}


@pytest.fixture(params=sorted(MODELS))
def model(request):
    return MODELS[request.param]()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_valid_measurements(count, seed=0):
    """Random measurements cycling through the four test models."""
    gen = np.random.default_rng(seed)
    names = sorted(MODELS)
    out = []
    for i in range(count):
        m = MODELS[names[i % len(names)]]()
        out.append(random_measurement(m, int(gen.integers(m.dim_v, m.dim_v + 4)), gen))
    return out


# Acceptance summary: one line per criterion, printed at the end of the run.
_ACCEPTANCE = {}


@pytest.fixture
def acceptance_record():
    def record(number, ok, detail=""):
        prev = _ACCEPTANCE.get(number)
        ok = bool(ok) and (prev is None or prev[0])
        details = detail if prev is None else f"{prev[1]}; {detail}" if detail else prev[1]
        _ACCEPTANCE[number] = (ok, details)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
