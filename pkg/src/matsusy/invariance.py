"""Residual checks of the determining equations and of shape invariance.

The finite differences in this module are an *independent* oracle: the
analytic derivatives in :mod:`matsusy.core` never use them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import core
from .core import Model, NuClass, NuVariant, QEntry, QVariant
from .errors import DomainError, NotShapeInvariantError, PoleError, SingularMatrixError

IDENTITY_TOL = 1e-9


@dataclass(frozen=True)
class ResidualReport:
    max_abs: float
    argmax_x: float
    grid_spacing: float

    def as_dict(self):
        return {"max_abs": self.max_abs, "argmax_x": self.argmax_x, "grid_spacing": self.grid_spacing}


def _report(err: np.ndarray, x: np.ndarray, h: float) -> ResidualReport:
    # err has the matrix axes last
    per_point = np.max(np.abs(err), axis=(-2, -1))
    i = int(np.argmax(per_point))
    return ResidualReport(float(per_point[i]), float(x[i]), float(h))


def _central(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


# ---------------------------------------------------------------------------
# resolvent construction of Q


@dataclass(frozen=True, eq=False)
class ResolventBasis:
    """``N(x) = -rho(x) I + theta(x) C`` with ``N = (Q - phi)^{-1}``."""

    nu: NuClass
    gamma: float
    cmat: np.ndarray

    def __post_init__(self):
        c = np.array(self.cmat, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("cmat must be square")
        if np.max(np.abs(c - c.conj().T)) > 1e-12:
            raise ValueError("cmat is not hermitian")
        c = 0.5 * (c + c.conj().T)
        c.setflags(write=False)
        object.__setattr__(self, "cmat", c)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def n(self) -> int:
        return self.cmat.shape[0]


def rho_theta_phi(nu: NuClass, gamma: float, x):
    """Scalar functions of the resolvent construction.

    ``phi`` solves ``phi' = phi**2 + nu``; ``rho`` and ``theta`` solve
    ``rho' = 1 - 2 phi rho`` and ``theta' = -2 phi theta``, which makes
    ``N = -rho I + theta C`` solve ``N' = -I - 2 phi N`` for any constant ``C``.
    For ``nu = 0`` that forces ``rho = -(x + gamma)``.
    """
    x = np.asarray(x, dtype=float)
    if nu.variant is NuVariant.POSITIVE:
        lam = nu.lam
        t = lam * x + gamma
        if np.any(np.abs(np.cos(t)) < core.POLE_TOL):
            raise PoleError(f"tan pole at x={x}")
        rho = np.sin(2 * t) / (2 * lam)
        theta = np.cos(t) ** 2
        phi = lam * np.tan(t)
    elif nu.variant is NuVariant.NEGATIVE:
        lam = nu.lam
        t = lam * x + gamma
        rho = np.sinh(2 * t) / (2 * lam)
        theta = np.cosh(t) ** 2
        phi = -lam * np.tanh(t)
    else:
        s = x + gamma
        if np.any(np.abs(s) < core.POLE_TOL * np.maximum(1.0, np.abs(x))):
            raise PoleError(f"1/(x+gamma) pole at x={x}")
        rho = -s
        theta = s**2
        phi = -1.0 / s
    if x.ndim == 0:
        return float(rho), float(theta), float(phi)
    return rho, theta, phi


def resolvent_N(basis: ResolventBasis, x):
    rho, theta, _ = rho_theta_phi(basis.nu, basis.gamma, x)
    rho, theta = np.asarray(rho)[..., None, None], np.asarray(theta)[..., None, None]
    return -rho * np.eye(basis.n) + theta * basis.cmat


def resolvent_Q(basis: ResolventBasis, x, cond_max: float = 1e12):
    """``Q = phi I + N^{-1}``, a hermitian solution of ``Q' = Q**2 + nu``."""
    rho, theta, phi = rho_theta_phi(basis.nu, basis.gamma, x)
    N = resolvent_N(basis, x)
    cond = np.linalg.cond(N)
    if np.any(~np.isfinite(cond)) or np.any(cond > cond_max):
        raise SingularMatrixError("N(x) = -rho I + theta C is not invertible on the grid")
    Q = np.linalg.inv(N) + np.asarray(phi)[..., None, None] * np.eye(basis.n)
    return 0.5 * (Q + np.conj(np.swapaxes(Q, -1, -2)))


def resolvent_residual(basis: ResolventBasis, x, h: float) -> ResidualReport:
    """Max over ``x`` of ``|FD[Q] - (Q**2 + nu)|`` with central differences of step ``h``."""
    x = np.asarray(x, dtype=float)
    Q = resolvent_Q(basis, x)
    dQ = _central(lambda y: resolvent_Q(basis, y), x, h)
    return _report(dQ - (Q @ Q + basis.nu.nu() * np.eye(basis.n)), x, h)


def fit_q_entry(nu: NuClass, x0: float, q0: float, atol: float = 1e-12) -> QEntry:
    """The family entry whose value at ``x0`` is ``q0``.

    One value determines the integration constant; which branch applies
    (tanh, coth or constant for ``nu < 0``) follows from ``|q0|`` versus lambda.
    """
    if nu.variant is NuVariant.POSITIVE:
        lam = nu.lam
        return QEntry(QVariant.TAN_POLE, math.atan(q0 / lam) - lam * x0)
    if nu.variant is NuVariant.NEGATIVE:
        lam = nu.lam
        r = -q0 / lam
        if abs(abs(r) - 1) <= atol:
            return QEntry(QVariant.CONST_PLUS if q0 > 0 else QVariant.CONST_MINUS)
        if abs(r) < 1:
            return QEntry(QVariant.TANH, math.atanh(r) - lam * x0)
        return QEntry(QVariant.COTH, math.atanh(1 / r) - lam * x0)
    if abs(q0) <= atol:
        return QEntry(QVariant.ZERO)
    return QEntry(QVariant.INV_POLE, -1.0 / q0 - x0)


# ---------------------------------------------------------------------------
# determining equations and shape invariance


def _check_stencil(model: Model, x: np.ndarray, h: float):
    core.check_interval(model, float(x.min() - 2 * h), float(x.max() + 2 * h))


def residual_grid(model: Model, a: float, b: float, npts: int, h: float,
                  pole_margin: float = 1e-6) -> np.ndarray:
    """Evaluation points inside ``[a, b]`` clear of poles by ``pole_margin``
    and of the ends by one stencil width."""
    lo, hi = core.validity_window(model, 0.5 * (a + b))
    a = max(a, lo + pole_margin) + 2 * h
    b = min(b, hi - pole_margin) - 2 * h
    if not a < b:
        raise DomainError("interval too short for the requested stencil")
    return np.linspace(a, b, npts)


def residual_determining(model: Model, x, h: float) -> tuple[ResidualReport, ResidualReport]:
    """Finite-difference residuals of ``Q' = Q**2 + nu`` and ``P' = {Q,P}/2 - mu``."""
    x = np.asarray(x, dtype=float)
    _check_stencil(model, x, h)
    Q = core.q_matrix(model, x)
    P = core.p_matrix(model, x)
    n = model.n
    dQ = _central(lambda y: core.q_matrix(model, y), x, h)
    dP = _central(lambda y: core.p_matrix(model, y), x, h)
    rq = dQ - (Q @ Q + model.nu.nu() * np.eye(n))
    rp = dP - (0.5 * (Q @ P + P @ Q) - model.mu * np.eye(n))
    return _report(rq, x, h), _report(rp, x, h)


def partner_difference(model: Model, k: float, x):
    """``(W_k**2 + W_k') - (W_{k+1}**2 - W_{k+1}')`` pointwise."""
    return core.eval_V(model, k, x, "plus") - core.eval_V(model, k + 1, x, "minus")


def extract_Ck(model: Model, k: float, x, tol: float = IDENTITY_TOL) -> float:
    """Measure the shape-invariance constant on the points ``x``.

    Raises ``NotShapeInvariantError`` when the partner difference varies with
    ``x`` or is not a multiple of the identity beyond ``tol``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    D = partner_difference(model, k, x)
    n = model.n
    diag = np.real(np.einsum("...ii->...i", D))
    off = D - np.einsum("...i,ij->...ij", np.einsum("...ii->...i", D), np.eye(n))
    c = float(np.mean(diag))
    off_max = float(np.max(np.abs(off))) if n > 1 else 0.0
    spread = float(np.max(np.abs(np.einsum("...ii->...i", D) - c)))
    if off_max > tol or spread > tol:
        raise NotShapeInvariantError(
            f"partner difference is not constant*I: off-diagonal {off_max:.3e}, variation {spread:.3e}")
    return c


def predicted_Ck(model: Model, k: float) -> float:
    """``(2k+1) nu - 2 mu``, obtained by expanding ``W_k = kQ + P``."""
    return (2 * k + 1) * model.nu.nu() - 2 * model.mu
