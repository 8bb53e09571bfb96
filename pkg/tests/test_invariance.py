import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matsusy import core, invariance as inv
from matsusy.config import example_model
from matsusy.core import Model, NuClass, QEntry, QVariant
from matsusy.errors import NotShapeInvariantError, SingularMatrixError
from matsusy.invariance import ResolventBasis

import modelgen

CLASSES = {
    "positive": NuClass.positive(1.0),
    "negative": NuClass.negative(1.0),
    "zero": NuClass.zero(),
}


def central(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


# ---------------------------------------------------------------------------
# resolvent scalars


@pytest.mark.parametrize("nu, gamma, x, expected", [
    (NuClass.positive(1.0), 0.0, 0.0, (0.0, 1.0, 0.0)),
    (NuClass.negative(1.0), 0.0, 0.0, (0.0, 1.0, 0.0)),
    (NuClass.zero(), 2.0, 1.0, (-3.0, 9.0, -1.0 / 3.0)),
])
def test_rho_theta_phi_values(nu, gamma, x, expected):
    assert inv.rho_theta_phi(nu, gamma, x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("name", list(CLASSES))
def test_rho_theta_phi_solve_their_equations(name):
    nu = CLASSES[name]
    x = np.linspace(0.2, 1.0, 9)
    f = lambda y: np.array(inv.rho_theta_phi(nu, 0.3, y))
    rho, theta, phi = f(x)
    d_rho, d_theta, d_phi = central(f, x, 1e-5)
    np.testing.assert_allclose(d_phi, phi**2 + nu.nu(), atol=1e-8)
    np.testing.assert_allclose(d_rho, 1 - 2 * phi * rho, atol=1e-8)
    np.testing.assert_allclose(d_theta, -2 * phi * theta, atol=1e-8)


def test_rational_rho_with_positive_sign_breaks_the_linear_equation():
    # rho = x + gamma gives rho' - (1 - 2 phi rho) = -2 instead of 0
    gamma, x = 2.0, np.linspace(0.1, 1.0, 5)
    _, _, phi = inv.rho_theta_phi(NuClass.zero(), gamma, x)
    flipped = x + gamma
    np.testing.assert_allclose(1.0 - (1 - 2 * phi * flipped), -2.0)


# ---------------------------------------------------------------------------
# resolvent Q


def test_resolvent_scalar_case():
    # C = 0 leaves N = (x + gamma) I, whose inverse cancels phi: the zero entry
    basis = ResolventBasis(NuClass.zero(), 1.0, np.zeros((2, 2)))
    np.testing.assert_allclose(inv.resolvent_Q(basis, 0.0), np.zeros((2, 2)), atol=1e-15)
    assert inv.resolvent_residual(basis, np.linspace(0.0, 1.0, 11), 1e-4).max_abs < 1e-8


def test_resolvent_diagonal_and_unitary_covariance():
    rng = np.random.default_rng(11)
    d = np.diag([0.3, -0.8, 1.4])
    basis = ResolventBasis(NuClass.negative(0.7), 0.2, d)
    Q = inv.resolvent_Q(basis, np.linspace(-0.3, 0.3, 5))
    off = Q - np.einsum("...ii,ij->...ij", Q, np.eye(3))
    assert np.max(np.abs(off)) < 1e-14
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    U, _ = np.linalg.qr(A)
    rotated = ResolventBasis(basis.nu, basis.gamma, U @ d @ U.conj().T)
    np.testing.assert_allclose(inv.resolvent_Q(rotated, 0.1), U @ inv.resolvent_Q(basis, 0.1) @ U.conj().T,
                               atol=1e-12)


def test_resolvent_singular_N_is_reported():
    # rho = -(x + gamma), theta = (x + gamma)^2: N = 0 at x = 0 when C = -1/gamma
    basis = ResolventBasis(NuClass.zero(), 1.0, -np.eye(2))
    with pytest.raises(SingularMatrixError):
        inv.resolvent_Q(basis, 0.0)


def test_resolvent_basis_validation():
    with pytest.raises(ValueError):
        ResolventBasis(NuClass.zero(), 0.0, [[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        ResolventBasis(NuClass.zero(), 0.0, np.zeros((2, 3)))


@pytest.mark.parametrize("nu, x0, q0, variant", [
    (NuClass.positive(1.0), 0.3, 0.5, QVariant.TAN_POLE),
    (NuClass.negative(1.0), 0.3, 0.5, QVariant.TANH),
    (NuClass.negative(1.0), 0.3, -2.5, QVariant.COTH),
    (NuClass.negative(1.0), 0.3, 1.0, QVariant.CONST_PLUS),
    (NuClass.negative(1.0), 0.3, -1.0, QVariant.CONST_MINUS),
    (NuClass.zero(), 0.3, 0.5, QVariant.INV_POLE),
    (NuClass.zero(), 0.3, 0.0, QVariant.ZERO),
])
def test_fit_q_entry_reproduces_value(nu, x0, q0, variant):
    e = inv.fit_q_entry(nu, x0, q0)
    assert e.variant is variant
    assert core.q_value(e, nu, x0) == pytest.approx(q0, abs=1e-13)


# ---------------------------------------------------------------------------
# determining equations


def test_example_model_satisfies_determining_equations():
    m = example_model(1.0, 0.5)
    assert m.mu == -1.0
    x = np.linspace(0.5, 4.0, 21)
    r1 = inv.residual_determining(m, x, 1e-3)
    r2 = inv.residual_determining(m, x, 5e-4)
    for a, b in zip(r1, r2):
        assert a.max_abs < 1e-4
        assert 3.2 < a.max_abs / b.max_abs < 4.8


def test_sign_flipped_positive_class_p_misses_by_2mu():
    mu = 0.7
    good = Model(NuClass.positive(1.0), (QEntry(QVariant.TAN_POLE, 0.0), QEntry(QVariant.TAN_POLE, 0.4)),
                 mu, np.diag([0.2, 0.5]))
    flipped = good.replace(mu=-mu)  # diagonal p = +(mu/lam) tan + c sec
    x = np.linspace(-0.6, 0.6, 13)
    for h in (1e-2, 5e-3, 2.5e-3):
        Q = core.q_matrix(good, x)
        P = core.p_matrix(flipped, x)
        dP = central(lambda y: core.p_matrix(flipped, y), x, h)
        res = dP - (0.5 * (Q @ P + P @ Q) - mu * np.eye(2))
        assert np.max(np.abs(res)) == pytest.approx(2 * mu, rel=1e-3)
    _, rp = inv.residual_determining(good, x, 2.5e-3)
    assert rp.max_abs < 1e-4


def test_residual_grid_stays_inside_window():
    m = example_model(1.0, 0.5)
    x = inv.residual_grid(m, -1.0, 3.0, 11, 1e-3, pole_margin=0.1)
    assert x[0] > 0.1 and x[-1] < 3.0


# ---------------------------------------------------------------------------
# shape invariance


@pytest.mark.parametrize("k", [0.3, 1.7, 2.5])
def test_example_ck_is_twice_mu(k):
    m = example_model(1.3, 0.5)
    ck = inv.extract_Ck(m, k, np.linspace(0.2, 6.0, 50))
    assert ck == pytest.approx(2.6, abs=1e-9)


def test_rational_ck_is_minus_two_mu():
    m = Model(NuClass.zero(), (QEntry(QVariant.INV_POLE, 1.0), QEntry(QVariant.ZERO)), 1.0,
              [[0.2, 0.4j], [-0.4j, 0.1]])
    x = np.linspace(0.0, 2.0, 30)
    assert inv.extract_Ck(m, 0.8, x) == pytest.approx(-2.0, abs=1e-9)
    assert inv.extract_Ck(m.replace(mu=0.0), 0.8, x) == pytest.approx(0.0, abs=1e-9)


def test_predicted_ck_examples():
    z = Model(NuClass.zero(), (QEntry(QVariant.INV_POLE, 1.0), QEntry(QVariant.ZERO)), 1.0, np.zeros((2, 2)))
    assert inv.predicted_Ck(z, 4.2) == -2.0
    p = Model(NuClass.positive(1.0), (QEntry(QVariant.TAN_POLE, 0.0), QEntry(QVariant.TAN_POLE, 0.4)),
              0.0, np.zeros((2, 2)))
    assert inv.predicted_Ck(p, 0.0) == 1.0


def test_plus_two_mu_formula_fails_on_the_suite():
    misses = 0
    for s in modelgen.model_suite(seed=5, repeats=1):
        x = np.linspace(s.a, s.b, 31)
        ck = inv.extract_Ck(s.model, s.k, x)
        printed = (2 * s.k + 1) * s.model.nu.nu() + 2 * s.model.mu
        misses += abs(printed - ck) > 1e-9
        assert abs(printed - ck) == pytest.approx(4 * abs(s.model.mu), abs=1e-9)
    assert misses > 0


def test_extract_ck_rejects_non_constant_difference(monkeypatch):
    m = example_model(1.0, 0.5)
    x = np.linspace(0.5, 2.0, 10)
    real = inv.partner_difference
    monkeypatch.setattr(inv, "partner_difference",
                        lambda model, k, y: real(model, k, y) + 1e-6 * np.asarray(y)[:, None, None] * np.eye(2))
    with pytest.raises(NotShapeInvariantError):
        inv.extract_Ck(m, 0.3, x)
    monkeypatch.setattr(inv, "partner_difference",
                        lambda model, k, y: real(model, k, y) + 1e-6 * np.array([[0, 1], [1, 0]]))
    with pytest.raises(NotShapeInvariantError, match="off-diagonal"):
        inv.extract_Ck(m, 0.3, x)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), variant=st.sampled_from(["positive", "negative", "zero"]),
       pick=st.integers(0, 5))
def test_extracted_ck_matches_prediction(seed, variant, pick):
    rng = np.random.default_rng(seed)
    splits = modelgen.SPLITS[variant]
    s = modelgen.random_model(rng, variant, splits[pick % len(splits)])
    x = np.linspace(s.a, s.b, 41)
    ck = inv.extract_Ck(s.model, s.k, x)
    assert abs(ck - inv.predicted_Ck(s.model, s.k)) < 1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), variant=st.sampled_from(["positive", "negative", "zero"]))
def test_determining_residuals_are_second_order(seed, variant):
    rng = np.random.default_rng(seed)
    s = modelgen.random_model(rng, variant, modelgen.SPLITS[variant][0])
    x = inv.residual_grid(s.model, s.a, s.b, 15, 1e-2)
    coarse = inv.residual_determining(s.model, x, 1e-2)
    fine = inv.residual_determining(s.model, x, 5e-3)
    for a, b in zip(coarse, fine):
        if b.max_abs > 1e-10:
            assert 3.2 < a.max_abs / b.max_abs < 4.8
        else:
            assert a.max_abs < 1e-9
