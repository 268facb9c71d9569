import numpy as np
import pytest

import pricing_losses as pl


def test_transfer_two_rung_uniform():
    t = pl.transfer_matrix([0.5, 0.5])
    expected = np.array([[0, .5, .5], [0, 0, .5], [.5, 0, 0], [.5, .5, 0]])
    np.testing.assert_array_equal(t, expected)


@pytest.mark.parametrize("kind", ["Robust", "MV", "CMix"])
def test_left_inverse(kind):
    rng = np.random.default_rng(0)
    pi0 = rng.dirichlet(np.ones(4))
    fv = rng.dirichlet(np.ones(5))
    fy = pl.push_forward(pi0.tolist(), fv.tolist())
    r = pl.reweight_matrix(kind, pi0.tolist(), fy_hat=fy, c=0.3)
    np.testing.assert_allclose(r @ pl.transfer_matrix(pi0.tolist()), np.eye(5), atol=1e-9)


def test_worked_example():
    lv = pl.valuation_loss([0.4, 0.6], [1.0, 2.0])
    np.testing.assert_allclose(lv, [0, -0.4, -1.6])
    r = pl.reweight_matrix("IPS", [0.5, 0.5])
    np.testing.assert_allclose(pl.corrupted_loss(r, lv), [-0.8, -2.4, 0, 0])


def test_unbiased_expectation():
    rng = np.random.default_rng(1)
    pi0 = rng.dirichlet(np.ones(3)).tolist()
    fv = rng.dirichlet(np.ones(4)).tolist()
    lv = pl.valuation_loss(rng.dirichlet(np.ones(3)).tolist(), [1.0, 2.0, 3.0])
    fy = np.array(pl.push_forward(pi0, fv))
    for kind in ["Robust", "IPS", "CIPS"]:
        c = np.array(pl.corrupted_loss(pl.reweight_matrix(kind, pi0), lv))
        assert fy @ c == pytest.approx(np.dot(fv, lv), abs=1e-12)


def test_errors_map_to_value_error():
    with pytest.raises(ValueError):
        pl.transfer_matrix([0.0, 1.0])
    with pytest.raises(ValueError):
        pl.reweight_matrix("MV", [0.5, 0.5])


def test_oracle_suite_and_break_hook():
    rows = pl.oracle_suite(instances=20)
    assert all(r["pass"] for r in rows)
    broken = pl.oracle_suite(instances=20, break_robust=True)
    assert not all(r["pass"] for r in broken)
