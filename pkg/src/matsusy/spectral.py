"""Finite-difference Hamiltonians, zero modes and the SUSY ladder.

The Hamiltonian ``-d^2/dx^2 + V + shift`` is discretized with the
three-point Laplacian on the interior nodes of a uniform grid; the end
nodes carry the Dirichlet condition.  Unknowns are ordered node-major
(``index = node * n + channel``), which makes the matrix banded with
half-bandwidth ``n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import core, invariance
from .core import Model
from .errors import (ConvergenceError, DomainError, EmptyLadderError, StiffnessError,
                     ZeroNormError)

OVERFLOW_GUARD = 1e250
RK_STEP_TARGET = 0.02      # substep * |W| per RK4 substep
BLOWUP_RATIO = 1e2         # outer/inner L2 mass above which a solution blows up
MATCH_TOL = 1e-6           # principal-angle cosine defect for subspace matching


@dataclass(frozen=True)
class GridDomain:
    a: float
    b: float
    npoints: int

    def __post_init__(self):
        if not self.a < self.b:
            raise DomainError(f"need a < b, got [{self.a}, {self.b}]")
        if self.npoints < 16:
            raise DomainError("npoints must be at least 16")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.npoints - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.npoints)

    @property
    def interior(self) -> np.ndarray:
        return self.x[1:-1]

    def refined(self) -> "GridDomain":
        """Same interval with the spacing halved."""
        return GridDomain(self.a, self.b, 2 * self.npoints - 1)


@dataclass(eq=False)
class GridSpinor:
    domain: GridDomain
    values: np.ndarray  # (npoints, n)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2 or self.values.shape[0] != self.domain.npoints:
            raise ValueError("values must have shape (npoints, n)")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("spinor has non-finite entries")

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def norm(self) -> float:
        return math.sqrt(inner(self, self).real)

    def __add__(self, other):
        return GridSpinor(self.domain, self.values + other.values)

    def __rmul__(self, alpha):
        return GridSpinor(self.domain, alpha * self.values)


def inner(psi: GridSpinor, chi: GridSpinor) -> complex:
    """Trapezoid-rule inner product, antilinear in the first argument."""
    dens = np.sum(np.conj(psi.values) * chi.values, axis=1)
    return complex(np.trapezoid(dens, dx=psi.domain.h))


def l2_normalize(psi: GridSpinor) -> GridSpinor:
    nrm = psi.norm()
    if not nrm > 0 or not math.isfinite(nrm):
        raise ZeroNormError("cannot normalize a spinor of zero norm")
    return GridSpinor(psi.domain, psi.values / nrm)


# ---------------------------------------------------------------------------
# Hamiltonian


@dataclass(eq=False)
class HamiltonianMatrix:
    """Block-tridiagonal hermitian matrix: ``blocks[i]`` is the diagonal block
    at interior node ``x[i]``; every off-diagonal block is ``-I/h**2``."""

    x: np.ndarray
    h: float
    blocks: np.ndarray  # (M, n, n)

    @property
    def n(self) -> int:
        return self.blocks.shape[1]

    @property
    def size(self) -> int:
        return self.blocks.shape[0] * self.n

    def to_dense(self) -> np.ndarray:
        M, n = self.blocks.shape[:2]
        H = scipy.linalg.block_diag(*self.blocks)
        off = -np.ones(self.size - n) / self.h**2
        return H + np.diag(off, n) + np.diag(off, -n)

    def to_banded(self) -> np.ndarray:
        """Upper banded storage for :func:`scipy.linalg.eig_banded`."""
        M, n = self.blocks.shape[:2]
        ab = np.zeros((n + 1, self.size), dtype=self.blocks.dtype)
        for c in range(n):
            for d in range(c, n):
                # entry (p*n + c, p*n + d) lives in row n - (d - c)
                ab[n - (d - c), np.arange(M) * n + d] = self.blocks[:, c, d]
        ab[0, n:] = -1.0 / self.h**2
        return ab

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """``H @ v`` for ``v`` of shape ``(M, n)``."""
        out = np.einsum("pij,pj->pi", self.blocks, v)
        out[1:] -= v[:-1] / self.h**2
        out[:-1] -= v[1:] / self.h**2
        return out


def discretize_potential(V: np.ndarray, domain: GridDomain, shift: float = 0.0) -> HamiltonianMatrix:
    """Hamiltonian for potential samples ``V`` of shape ``(npoints - 2, n, n)``."""
    V = np.asarray(V)
    h = domain.h
    n = V.shape[-1]
    blocks = V + (2.0 / h**2 + shift) * np.eye(n)
    blocks = 0.5 * (blocks + np.conj(np.swapaxes(blocks, -1, -2)))
    return HamiltonianMatrix(domain.interior, h, blocks)


def discretize(model: Model, k: float, shift: float, domain: GridDomain,
               partner: str = "minus") -> HamiltonianMatrix:
    core.check_interval(model, domain.a, domain.b)
    V = core.eval_V(model, k, domain.interior, partner)
    return discretize_potential(V, domain, shift)


def low_spectrum(H: HamiltonianMatrix, count: int) -> np.ndarray:
    """The ``count`` smallest eigenvalues, ascending (banded LAPACK solver)."""
    return low_states(H, count, eigvals_only=True)


def low_states(H: HamiltonianMatrix, count: int, eigvals_only: bool = False):
    if not 1 <= count <= H.size:
        raise ValueError(f"count must be in [1, {H.size}]")
    try:
        res = scipy.linalg.eig_banded(H.to_banded(), lower=False, eigvals_only=eigvals_only,
                                      select="i", select_range=(0, count - 1))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceError(f"banded eigensolver failed: {exc}") from exc
    if eigvals_only:
        return np.sort(res)
    w, v = res
    return w, v.reshape(H.blocks.shape[0], H.n, count)


def rayleigh_quotient(H: HamiltonianMatrix, psi: GridSpinor) -> float:
    """``<psi, H psi> / <psi, psi>`` on the interior nodes of the grid."""
    v = psi.values[1:-1]
    num = np.vdot(v, H.matvec(v)).real
    den = np.vdot(v, v).real
    if den <= 0:
        raise ZeroNormError("spinor vanishes on the interior nodes")
    return float(num / den)


# ---------------------------------------------------------------------------
# first-order system psi' = -W psi


def _substeps(W_nodes: np.ndarray, x: np.ndarray, target: float) -> np.ndarray:
    wn = np.max(np.sum(np.abs(W_nodes), axis=-1), axis=-1)
    wmax = np.maximum(wn[:-1], wn[1:])
    m = np.ceil(np.abs(np.diff(x)) * wmax / target).astype(int)
    return np.clip(m, 1, 100000)


def _stage_points(x: np.ndarray, m: np.ndarray):
    """RK4 stage abscissae (start, mid, end of every substep) for all intervals."""
    pts, offsets = [], [0]
    for i, mi in enumerate(m):
        s = np.linspace(x[i], x[i + 1], 2 * mi + 1)
        pts.append(s)
        offsets.append(offsets[-1] + s.size)
    return np.concatenate(pts), offsets


def fundamental_matrix(wfunc, x: np.ndarray, target: float = RK_STEP_TARGET) -> np.ndarray:
    """Fundamental matrix of ``psi' = -W(x) psi`` along the nodes ``x``.

    ``x`` may be increasing or decreasing; the result has ``Phi[0] = I``.
    Classical RK4 with per-interval substeps so that ``substep*|W|`` stays
    below ``target``.
    """
    x = np.asarray(x, dtype=float)
    W_nodes = wfunc(x)
    n = W_nodes.shape[-1]
    m = _substeps(W_nodes, x, target)
    pts, offsets = _stage_points(x, m)
    Wst = -wfunc(pts)
    Phi = np.empty((x.size, n, n), dtype=complex)
    Y = np.eye(n, dtype=complex)
    Phi[0] = Y
    for i, mi in enumerate(m):
        ds = (x[i + 1] - x[i]) / mi
        base = offsets[i]
        for j in range(mi):
            A0, Am, A1 = Wst[base + 2 * j], Wst[base + 2 * j + 1], Wst[base + 2 * j + 2]
            k1 = A0 @ Y
            k2 = Am @ (Y + 0.5 * ds * k1)
            k3 = Am @ (Y + 0.5 * ds * k2)
            k4 = A1 @ (Y + ds * k3)
            Y = Y + ds / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(Y)) or np.max(np.abs(Y)) > OVERFLOW_GUARD:
            raise StiffnessError(f"fundamental matrix overflows near x={x[i + 1]}")
        Phi[i + 1] = Y
    return Phi


def orthonormal_flow(wfunc, x: np.ndarray, target: float = RK_STEP_TARGET) -> np.ndarray:
    """Solutions of ``psi' = -W psi`` along ``x``, parametrized by their value
    at the last node.

    Returns ``G`` with ``G[-1]`` unitary and ``G[i] @ c`` the solution whose
    value at ``x[-1]`` is ``G[-1] @ c``. The basis is re-orthonormalized by QR
    after every interval and the triangular factors are undone backwards, so
    subdominant solutions keep their accuracy.
    """
    x = np.asarray(x, dtype=float)
    W_nodes = wfunc(x)
    n = W_nodes.shape[-1]
    m = _substeps(W_nodes, x, target)
    pts, offsets = _stage_points(x, m)
    Wst = -wfunc(pts)
    Z = np.empty((x.size, n, n), dtype=complex)
    R = np.empty((x.size, n, n), dtype=complex)
    Y = np.eye(n, dtype=complex)
    Z[0] = Y
    for i, mi in enumerate(m):
        ds = (x[i + 1] - x[i]) / mi
        base = offsets[i]
        for j in range(mi):
            A0, Am, A1 = Wst[base + 2 * j], Wst[base + 2 * j + 1], Wst[base + 2 * j + 2]
            k1 = A0 @ Y
            k2 = Am @ (Y + 0.5 * ds * k1)
            k3 = Am @ (Y + 0.5 * ds * k2)
            k4 = A1 @ (Y + ds * k3)
            Y = Y + ds / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(Y)):
            raise StiffnessError(f"orthonormal flow breaks down near x={x[i + 1]}")
        Y, R[i + 1] = np.linalg.qr(Y)
        Z[i + 1] = Y
    G = np.empty_like(Z)
    E = np.eye(n, dtype=complex)
    G[-1] = Z[-1]
    for i in range(x.size - 1, 0, -1):
        E = scipy.linalg.solve_triangular(R[i], E)
        if not np.all(np.isfinite(E)) or np.max(np.abs(E)) > OVERFLOW_GUARD:
            raise StiffnessError(f"solution basis overflows near x={x[i - 1]}")
        G[i - 1] = Z[i - 1] @ E
    return G


def _magnus_propagators(wfunc, x: np.ndarray, target: float) -> np.ndarray:
    """Interval propagators ``U_i`` (``x_i -> x_{i+1}``) by the fourth-order
    Gauss-Legendre Magnus method; used only as an independent check of RK4."""
    W_nodes = wfunc(x)
    n = W_nodes.shape[-1]
    m = _substeps(W_nodes, x, target)
    U = np.empty((x.size - 1, n, n), dtype=complex)
    c1, c2 = 0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6
    for mi in np.unique(m):
        idx = np.nonzero(m == mi)[0]
        ds = (x[idx + 1] - x[idx]) / mi
        Y = np.broadcast_to(np.eye(n, dtype=complex), (idx.size, n, n)).copy()
        for j in range(mi):
            t0 = x[idx] + j * ds
            A1 = -wfunc(t0 + c1 * ds)
            A2 = -wfunc(t0 + c2 * ds)
            d = ds[:, None, None]
            Om = 0.5 * d * (A1 + A2) + (math.sqrt(3) / 12) * d**2 * (A2 @ A1 - A1 @ A2)
            Y = scipy.linalg.expm(Om) @ Y
        U[idx] = Y
    return U


def _blowup_split(Phi: np.ndarray, h: float, outer_frac: float = 0.1):
    """Directions (columns, in the parameter coordinates of ``Phi``) whose L2 mass near the
    starting end stays below ``BLOWUP_RATIO`` times their mass further in.

    ``Phi[0]`` is at the end being tested.
    """
    N, n = Phi.shape[:2]
    cut = max(2, int(round(outer_frac * N)))
    S_out = Phi[:cut].reshape(-1, n) * math.sqrt(h)
    S_in = Phi[cut:].reshape(-1, n) * math.sqrt(h)
    R = np.linalg.qr(S_in, mode="r")
    A = scipy.linalg.solve_triangular(R, S_out.conj().T, trans="C").conj().T
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    tau = np.zeros(n)
    tau[: s.size] = s**2
    good = tau <= BLOWUP_RATIO
    Y = Vh.conj().T[:, good]
    return scipy.linalg.solve_triangular(R, Y), tau


def _orth(M: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    if M.shape[1] == 0:
        return M
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    return u[:, s > rtol * s[0]] if s.size and s[0] > 0 else u[:, :0]


def zero_modes_of(wfunc, domain: GridDomain) -> list[GridSpinor]:
    """Orthonormal basis of solutions of ``psi' = -W psi`` that do not blow up
    toward either end of ``domain``.

    Integrates an orthonormalized solution basis inward from each end, keeps the directions
    that pass the mass-ratio test at that end and intersects the two
    subspaces at the midpoint node.
    """
    x = domain.x
    N = x.size
    mid = N // 2
    Phi_L = orthonormal_flow(wfunc, x[: mid + 1])
    Phi_R = orthonormal_flow(wfunc, x[mid:][::-1])
    U_L, _ = _blowup_split(Phi_L, domain.h)
    U_R, _ = _blowup_split(Phi_R, domain.h)
    M_L = Phi_L[-1] @ U_L
    M_R = Phi_R[-1] @ U_R
    Q_L, Q_R = _orth(M_L), _orth(M_R)
    if Q_L.shape[1] == 0 or Q_R.shape[1] == 0:
        return []
    u, s, _ = np.linalg.svd(Q_L.conj().T @ Q_R)
    shared = Q_L @ u[:, s >= 1 - MATCH_TOL]
    if shared.shape[1] == 0:
        return []
    cols = []
    for w in shared.T:
        cL = np.linalg.lstsq(M_L, w, rcond=None)[0]
        cR = np.linalg.lstsq(M_R, w, rcond=None)[0]
        left = Phi_L @ (U_L @ cL)
        right = (Phi_R @ (U_R @ cR))[::-1]
        cols.append(np.concatenate([left, right[1:]]))
    return _orthonormalize([GridSpinor(domain, c) for c in cols])


def _orthonormalize(states: list[GridSpinor], rtol: float = 1e-8) -> list[GridSpinor]:
    out: list[GridSpinor] = []
    for s in states:
        v = s.values.copy()
        scale = s.norm()
        for _ in range(2):
            for o in out:
                v -= inner(o, GridSpinor(s.domain, v)) * o.values
        g = GridSpinor(s.domain, v)
        if g.norm() > rtol * scale:
            out.append(l2_normalize(g))
    return out


def zero_mode_basis(model: Model, k: float, domain: GridDomain) -> list[GridSpinor]:
    """Zero modes of ``a_k = d/dx + W_k`` on ``domain``; may be empty.

    The basis is rotated to the Ritz vectors of the discretized ``H_k``
    inside the zero-mode space, ascending in Rayleigh quotient.
    """
    core.check_interval(model, domain.a, domain.b)
    modes = zero_modes_of(lambda y: core.eval_W(model, k, y), domain)
    if len(modes) < 2:
        return modes
    return ritz_rotate(discretize(model, k, 0.0, domain), modes)


def ritz_rotate(H: HamiltonianMatrix, states: list[GridSpinor]) -> list[GridSpinor]:
    V = np.stack([s.values[1:-1].ravel() for s in states], axis=1)
    HV = np.stack([H.matvec(s.values[1:-1]).ravel() for s in states], axis=1)
    A = V.conj().T @ HV
    S = V.conj().T @ V
    _, C = scipy.linalg.eigh(0.5 * (A + A.conj().T), S)
    full = np.stack([s.values for s in states], axis=-1)
    rotated = [GridSpinor(states[0].domain, full @ C[:, j]) for j in range(C.shape[1])]
    return _orthonormalize(rotated)


def zero_mode_residual(model: Model, k: float, psi: GridSpinor) -> float:
    """Relative defect ``|a_k psi| / |psi|`` of a sampled solution.

    On each grid interval the sampled value at the right node is compared
    with the value propagated from the left node by an independent Magnus
    integrator; the defect divided by the spacing estimates ``a_k psi``.
    """
    x = psi.domain.x
    U = _magnus_propagators(lambda y: core.eval_W(model, k, y), x, RK_STEP_TARGET / 2)
    pred = np.einsum("ipq,iq->ip", U, psi.values[:-1])
    d = (psi.values[1:] - pred) / psi.domain.h
    defect = math.sqrt(np.sum(np.abs(d) ** 2) * psi.domain.h)
    return defect / psi.norm()


# ---------------------------------------------------------------------------
# ladder


def _derivative4(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order first derivative along axis 0, one-sided at the two end nodes."""
    f = values
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return d


def apply_raising(model: Model, k: float, psi: GridSpinor) -> GridSpinor:
    """``a_k^dagger psi = -psi' + W_k psi``."""
    W = core.eval_W(model, k, psi.domain.x)
    out = -_derivative4(psi.values, psi.domain.h) + np.einsum("ipq,iq->ip", W, psi.values)
    return GridSpinor(psi.domain, out)


def apply_lowering(model: Model, k: float, psi: GridSpinor) -> GridSpinor:
    """``a_k psi = psi' + W_k psi``."""
    W = core.eval_W(model, k, psi.domain.x)
    out = _derivative4(psi.values, psi.domain.h) + np.einsum("ipq,iq->ip", W, psi.values)
    return GridSpinor(psi.domain, out)


# Words in the letters "Q", "P" stand for noncommutative matrix products;
# a polynomial is a dict word -> coefficient.


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            out[wa + wb] = out.get(wa + wb, 0.0) + ca * cb
    return out


def _poly_add(*terms: dict) -> dict:
    out: dict = {}
    for t in terms:
        for w, c in t.items():
            out[w] = out.get(w, 0.0) + c
    return {w: c for w, c in out.items() if c != 0}


def _poly_scale(a: dict, s: float) -> dict:
    return {w: s * c for w, c in a.items()}


def _poly_derivative(a: dict, nu: float, mu: float) -> dict:
    """Apply d/dx using ``Q' = Q^2 + nu`` and ``P' = (QP + PQ)/2 - mu``."""
    dletter = {
        "Q": {("Q", "Q"): 1.0, (): nu},
        "P": {("Q", "P"): 0.5, ("P", "Q"): 0.5, (): -mu},
    }
    out: dict = {}
    for w, c in a.items():
        for i, letter in enumerate(w):
            for dw, dc in dletter[letter].items():
                nw = w[:i] + dw + w[i + 1:]
                out[nw] = out.get(nw, 0.0) + c * dc
    return {w: c for w, c in out.items() if c != 0}


def raising_polynomial(model: Model, k: float, nlevel: int) -> dict:
    """Polynomial ``M`` in ``Q, P`` with ``a_k^+ ... a_{k+n-1}^+ psi0 = M psi0``
    for every zero mode ``psi0`` of ``a_{k+n}``.

    Uses ``psi0' = -W_{k+n} psi0``, so ``a_j^+ (M psi0) = (-M' + M W_{k+n} + W_j M) psi0``.
    """
    nu, mu = model.nu.nu(), model.mu

    def W(j):
        return {("Q",): j, ("P",): 1.0}

    top = k + nlevel
    M = {(): 1.0}
    for j in range(nlevel - 1, -1, -1):
        M = _poly_add(_poly_scale(_poly_derivative(M, nu, mu), -1.0),
                      _poly_mul(M, W(top)), _poly_mul(W(k + j), M))
    return M


def evaluate_polynomial(model: Model, poly: dict, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    Q = core.q_matrix(model, x).astype(complex)
    P = core.p_matrix(model, x)
    mats = {"Q": Q, "P": P}
    out = np.zeros(x.shape + (model.n, model.n), dtype=complex)
    eye = np.broadcast_to(np.eye(model.n), out.shape)
    for w, c in poly.items():
        prod = eye
        for letter in w:
            prod = prod @ mats[letter]
        out = out + c * prod
    return out


def excited_state(model: Model, k: float, nlevel: int, domain: GridDomain,
                  null_tol: float = 1e-8) -> list[GridSpinor]:
    """``a_k^+ a_{k+1}^+ ... a_{k+n-1}^+`` applied to each zero mode at ``k + n``.

    The chain is evaluated through :func:`raising_polynomial`, which avoids
    differentiating sampled data.
    """
    if nlevel < 1:
        raise ValueError("nlevel must be at least 1")
    seeds = zero_mode_basis(model, k + nlevel, domain)
    if not seeds:
        raise EmptyLadderError(f"no square-integrable zero modes at k={k + nlevel}")
    M = evaluate_polynomial(model, raising_polynomial(model, k, nlevel), domain.x)
    out = []
    for psi in seeds:
        raised = GridSpinor(domain, np.einsum("ipq,iq->ip", M, psi.values))
        if raised.norm() > null_tol:
            out.append(l2_normalize(raised))
    return out


def energy_ladder(model: Model, k: float, e0: float, nlevel: int) -> float:
    """``e0`` plus the shape-invariance constants ``C_k + ... + C_{k+n-1}``."""
    if nlevel < 0:
        raise ValueError("nlevel must be non-negative")
    n = nlevel
    return e0 + (2 * k * n + n * n) * model.nu.nu() - 2 * n * model.mu


def partner_identity(model: Model, k: float, domain: GridDomain, tol: float = invariance.IDENTITY_TOL) -> float:
    """Max-norm of ``V_k^+ - (V_{k+1}^- + C_k I)`` over the grid nodes."""
    core.check_interval(model, domain.a, domain.b)
    x = domain.x
    ck = invariance.extract_Ck(model, k, x, tol)
    D = core.eval_V(model, k, x, "plus") - core.eval_V(model, k + 1, x, "minus") - ck * np.eye(model.n)
    return float(np.max(np.abs(D)))


# ---------------------------------------------------------------------------
# reports


@dataclass
class SpectralReport:
    eigenvalues: list[float]
    ladder_predictions: list[float]
    residual_zero_mode: float
    convergence_ratio: float
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eigenvalues = sorted(float(e) for e in self.eigenvalues)


def convergence_ratio(model: Model, k: float, shift: float, domain: GridDomain,
                      partner: str = "minus") -> float:
    """``(E_h - E_{h/2}) / (E_{h/2} - E_{h/4})`` for the lowest eigenvalue."""
    e = []
    d = domain
    for _ in range(3):
        e.append(low_spectrum(discretize(model, k, shift, d, partner), 1)[0])
        d = d.refined()
    den = e[1] - e[2]
    return float((e[0] - e[1]) / den) if den != 0 else math.inf


def spectral_report(model: Model, k: float, shift: float, domain: GridDomain,
                    count: int, levels: int) -> SpectralReport:
    H = discretize(model, k, shift, domain)
    eig = low_spectrum(H, count)
    ladder = [energy_ladder(model, k, shift, j) for j in range(levels)]
    modes = zero_mode_basis(model, k, domain)
    res = max((zero_mode_residual(model, k, m) for m in modes), default=math.nan)
    return SpectralReport(list(eig), ladder, res, convergence_ratio(model, k, shift, domain))
