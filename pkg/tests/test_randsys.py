import numpy as np
import pytest

from glqlab.randsys import (
    diagonalizable_suite,
    hamiltonian_gap,
    hamiltonian_riccati,
    random_certified,
    random_diagonalizable,
)
from glqlab.riccati import dre_limit
from glqlab.structure import hautus_detectable, hautus_stabilizable, unobservable_subspace


def test_certified_passes_hautus(rng):
    for _ in range(10):
        pr = random_certified(rng)
        assert hautus_stabilizable(pr.A, pr.B) and hautus_detectable(pr.A, pr.C)


@pytest.mark.parametrize("defect", [None, "unstabilizable", "undetectable", "hidden_stable"])
def test_defects_have_the_intended_structure(defect, rng):
    for _ in range(10):
        pr = random_diagonalizable(rng, 3, 1, 1, defect)
        stab = bool(hautus_stabilizable(pr.A, pr.B))
        det = bool(hautus_detectable(pr.A, pr.C))
        assert stab == (defect != "unstabilizable")
        assert det == (defect != "undetectable")
        obs = unobservable_subspace(pr.A, pr.C)
        if defect == "hidden_stable":
            assert obs.dim >= 1 and obs.stable_on_unobservable


def test_unknown_defect(rng):
    with pytest.raises(ValueError):
        random_diagonalizable(rng, 2, 1, 1, "broken")


def test_hamiltonian_riccati_matches_flow_limit(rng):
    pr = random_diagonalizable(rng, 3, 2, 2, min_gap=1.0, max_gain=20.0)
    P = hamiltonian_riccati(pr)
    assert np.allclose(P, dre_limit(pr, 1e-2, 1e-11, 200.0), atol=1e-8)
    assert hamiltonian_gap(pr) >= 1.0


def test_suite_is_seeded():
    a = diagonalizable_suite(5, 8)
    b = diagonalizable_suite(5, 8)
    assert all(p == q and np.array_equal(x, y) and d == e for (p, x, d), (q, y, e) in zip(a, b))
