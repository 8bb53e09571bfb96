"""Matrix superpotentials ``W_k = k Q + P`` with diagonal ``Q``.

Every channel ``i`` of ``Q`` solves the scalar Riccati equation
``q_i' = q_i**2 + nu`` and ``P`` solves ``P' = {Q, P}/2 - mu``.  Derivatives
are never taken numerically here: they are read off those two equations.

All evaluators accept a scalar ``x`` or an array of points; matrix valued
results carry the two matrix axes last.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, PoleError

POLE_TOL = 1e-12


class NuVariant(str, enum.Enum):
    POSITIVE = "positive"   # nu = lambda**2
    NEGATIVE = "negative"   # nu = -lambda**2
    ZERO = "zero"


class QVariant(str, enum.Enum):
    TAN_POLE = "tan_pole"
    TANH = "tanh"
    COTH = "coth"
    CONST_PLUS = "const_plus"
    CONST_MINUS = "const_minus"
    INV_POLE = "inv_pole"
    ZERO = "zero"


_ALLOWED = {
    NuVariant.POSITIVE: (QVariant.TAN_POLE,),
    NuVariant.NEGATIVE: (QVariant.TANH, QVariant.COTH, QVariant.CONST_PLUS, QVariant.CONST_MINUS),
    NuVariant.ZERO: (QVariant.INV_POLE, QVariant.ZERO),
}

# block order inside Q; const_plus/const_minus share one block
_BLOCK_RANK = {
    QVariant.TAN_POLE: 0,
    QVariant.TANH: 0,
    QVariant.COTH: 1,
    QVariant.CONST_PLUS: 2,
    QVariant.CONST_MINUS: 2,
    QVariant.INV_POLE: 0,
    QVariant.ZERO: 1,
}
_VARIANT_RANK = {v: i for i, v in enumerate(QVariant)}
_HAS_GAMMA = {QVariant.TAN_POLE, QVariant.TANH, QVariant.COTH, QVariant.INV_POLE}


@dataclass(frozen=True)
class NuClass:
    variant: NuVariant
    lam: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", NuVariant(self.variant))
        if self.variant is NuVariant.ZERO:
            if self.lam is not None:
                raise ValueError("lambda must be absent for nu = 0")
        elif self.lam is None or not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam!r}")

    @classmethod
    def positive(cls, lam: float) -> "NuClass":
        return cls(NuVariant.POSITIVE, float(lam))

    @classmethod
    def negative(cls, lam: float) -> "NuClass":
        return cls(NuVariant.NEGATIVE, float(lam))

    @classmethod
    def zero(cls) -> "NuClass":
        return cls(NuVariant.ZERO)

    def nu(self) -> float:
        if self.variant is NuVariant.POSITIVE:
            return self.lam**2
        if self.variant is NuVariant.NEGATIVE:
            return -self.lam**2
        return 0.0


@dataclass(frozen=True)
class QEntry:
    variant: QVariant
    gamma: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", QVariant(self.variant))
        if self.variant in _HAS_GAMMA:
            if self.gamma is None:
                raise ValueError(f"{self.variant.value} entry needs gamma")
            object.__setattr__(self, "gamma", float(self.gamma))
        elif self.gamma is not None:
            raise ValueError(f"{self.variant.value} entry takes no gamma")

    def sort_key(self):
        return (_BLOCK_RANK[self.variant], _VARIANT_RANK[self.variant],
                self.gamma if self.gamma is not None else 0.0)

    def function_key(self):
        """Hashable key equal for entries that are the same function of x."""
        g = self.gamma
        if self.variant is QVariant.TAN_POLE:
            g = round(math.remainder(g, math.pi), 14)
        return (self.variant, g)


@dataclass(frozen=True, eq=False)
class Model:
    """Shape-invariant family: ``nu`` class, diagonal ``Q`` entries, ``mu`` and
    the hermitian matrix ``phi`` of integration constants of ``P``."""

    nu: NuClass
    entries: tuple[QEntry, ...]
    mu: float
    phi: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = tuple(e if isinstance(e, QEntry) else QEntry(**e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "mu", float(self.mu))
        n = len(entries)
        if n < 2:
            raise ValueError("dimension must be at least 2")
        for e in entries:
            if e.variant not in _ALLOWED[self.nu.variant]:
                raise ValueError(f"{e.variant.value} entry is incompatible with nu class {self.nu.variant.value}")
        keys = [e.sort_key() for e in entries]
        if keys != sorted(keys):
            raise ValueError("entries are not in canonical block order; use Model.canonical")
        if len({e.function_key() for e in entries}) < 2:
            raise ValueError("Q is proportional to the unit matrix (reducible superpotential)")
        phi = np.array(self.phi, dtype=complex)
        if phi.shape != (n, n):
            raise ValueError(f"phi must be {n}x{n}, got shape {phi.shape}")
        if np.max(np.abs(phi - phi.conj().T)) > 1e-12:
            raise ValueError("phi is not hermitian")
        phi = 0.5 * (phi + phi.conj().T)
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def canonical(cls, nu: NuClass, entries: Sequence[QEntry], mu: float, phi) -> "Model":
        """Build a model from entries in any order, permuting ``phi`` to match."""
        entries = [e if isinstance(e, QEntry) else QEntry(**e) for e in entries]
        order = sorted(range(len(entries)), key=lambda i: entries[i].sort_key())
        phi = np.asarray(phi, dtype=complex)[np.ix_(order, order)]
        return cls(nu, tuple(entries[i] for i in order), mu, phi)

    @property
    def n(self) -> int:
        return len(self.entries)

    def replace(self, **changes) -> "Model":
        kw = dict(nu=self.nu, entries=self.entries, mu=self.mu, phi=self.phi)
        kw.update(changes)
        return Model(**kw)


class Pole(NamedTuple):
    location: float
    channel: int


# ---------------------------------------------------------------------------
# scalar channel functions


def _check_entry(entry: QEntry, nu: NuClass):
    if entry.variant not in _ALLOWED[nu.variant]:
        raise ValueError(f"{entry.variant.value} entry is incompatible with nu class {nu.variant.value}")


def _phase(entry: QEntry, nu: NuClass, x):
    return nu.lam * x + entry.gamma


def _pole_check(entry: QEntry, nu: NuClass, x):
    v = entry.variant
    if v is QVariant.TAN_POLE:
        bad = np.abs(np.cos(_phase(entry, nu, x))) < POLE_TOL
    elif v is QVariant.COTH:
        bad = np.abs(_phase(entry, nu, x)) < POLE_TOL
    elif v is QVariant.INV_POLE:
        bad = np.abs(x + entry.gamma) < POLE_TOL * np.maximum(1.0, np.abs(x))
    else:
        return
    if np.any(bad):
        where = np.asarray(x)[bad] if np.ndim(x) else x
        raise PoleError(f"{v.value} channel (gamma={entry.gamma}) is singular at x={np.ravel(where)[0]!r}")


def q_value(entry: QEntry, nu: NuClass, x):
    """Value of one diagonal channel of ``Q``."""
    _check_entry(entry, nu)
    x = np.asarray(x, dtype=float)
    _pole_check(entry, nu, x)
    v = entry.variant
    if v is QVariant.TAN_POLE:
        out = nu.lam * np.tan(_phase(entry, nu, x))
    elif v is QVariant.TANH:
        out = -nu.lam * np.tanh(_phase(entry, nu, x))
    elif v is QVariant.COTH:
        out = -nu.lam / np.tanh(_phase(entry, nu, x))
    elif v is QVariant.CONST_PLUS:
        out = np.full_like(x, nu.lam)
    elif v is QVariant.CONST_MINUS:
        out = np.full_like(x, -nu.lam)
    elif v is QVariant.INV_POLE:
        out = -1.0 / (x + entry.gamma)
    else:
        out = np.zeros_like(x)
    return out[()] if out.ndim == 0 else out


def q_derivative(entry: QEntry, nu: NuClass, x):
    return q_value(entry, nu, x) ** 2 + nu.nu()


def _log_weight(entry: QEntry, nu: NuClass, x):
    """``log|w|`` and ``sign(w)`` for the integrating factor ``w = exp(int q)``.

    ``w`` is sec, sech, csch, exp(+-lam x), 1/(x+gamma) or 1.  It only changes
    sign across a pole of the channel.
    """
    v = entry.variant
    one = np.ones_like(x)
    if v is QVariant.TAN_POLE:
        c = np.cos(_phase(entry, nu, x))
        return -np.log(np.abs(c)), np.sign(c)
    if v is QVariant.TANH:
        t = np.abs(_phase(entry, nu, x))
        return -(t + np.log1p(np.exp(-2 * t)) - math.log(2)), one
    if v is QVariant.COTH:
        s = np.sinh(_phase(entry, nu, x))
        return -np.log(np.abs(s)), np.sign(s)
    if v is QVariant.CONST_PLUS:
        return nu.lam * x, one
    if v is QVariant.CONST_MINUS:
        return -nu.lam * x, one
    if v is QVariant.INV_POLE:
        s = x + entry.gamma
        return -np.log(np.abs(s)), np.sign(s)
    return np.zeros_like(x), one


def _p_diagonal(entry: QEntry, nu: NuClass, mu: float, c: float, x):
    v = entry.variant
    if v is QVariant.TAN_POLE:
        t = _phase(entry, nu, x)
        return -(mu / nu.lam) * np.tan(t) + c / np.cos(t)
    if v is QVariant.TANH:
        t = _phase(entry, nu, x)
        return -(mu / nu.lam) * np.tanh(t) + c / np.cosh(t)
    if v is QVariant.COTH:
        t = _phase(entry, nu, x)
        return -(mu / nu.lam) / np.tanh(t) + c / np.sinh(t)
    if v is QVariant.CONST_PLUS:
        return mu / nu.lam + c * np.exp(nu.lam * x)
    if v is QVariant.CONST_MINUS:
        return -mu / nu.lam + c * np.exp(-nu.lam * x)
    if v is QVariant.INV_POLE:
        g = entry.gamma
        return (c - 0.5 * mu * x * (x + 2 * g)) / (x + g)
    return -mu * x + c


def _p_matrix(model: Model, x, q=None):
    x = np.asarray(x, dtype=float)
    if q is None:
        q = np.stack([q_value(e, model.nu, x) * np.ones_like(x) for e in model.entries])
    lw, sg = (np.stack(a) for a in zip(*(_log_weight(e, model.nu, x) for e in model.entries)))
    n = model.n
    P = np.zeros(x.shape + (n, n), dtype=complex)
    for i, e in enumerate(model.entries):
        P[..., i, i] = _p_diagonal(e, model.nu, model.mu, model.phi[i, i].real, x)
    for i in range(n):
        for j in range(i + 1, n):
            c = model.phi[i, j]
            if c == 0:
                continue
            if np.any(sg[i] <= 0) or np.any(sg[j] <= 0):
                raise DomainError(
                    f"coupling ({i},{j}) needs positive weights under the square root; "
                    "x lies outside a positive-argument window")
            val = c * np.exp(0.5 * (lw[i] + lw[j]))
            P[..., i, j] = val
            P[..., j, i] = np.conj(val)
    return P


def p_value(model: Model, i: int, j: int, x):
    P = _p_matrix(model, x)
    out = P[..., i, j]
    return out[()] if out.ndim == 0 else out


def p_derivative(model: Model, i: int, j: int, x):
    qi = q_value(model.entries[i], model.nu, x)
    qj = q_value(model.entries[j], model.nu, x)
    out = 0.5 * (qi + qj) * p_value(model, i, j, x) - model.mu * (i == j)
    return out


def q_matrix(model: Model, x):
    x = np.asarray(x, dtype=float)
    q = np.stack([q_value(e, model.nu, x) * np.ones_like(x) for e in model.entries])
    Q = np.zeros(x.shape + (model.n, model.n))
    idx = np.arange(model.n)
    Q[..., idx, idx] = np.moveaxis(q, 0, -1)
    return Q


def p_matrix(model: Model, x):
    return _p_matrix(model, x)


def _w_and_prime(model: Model, k: float, x):
    x = np.asarray(x, dtype=float)
    q = np.stack([q_value(e, model.nu, x) * np.ones_like(x) for e in model.entries])
    P = _p_matrix(model, x, q)
    qT = np.moveaxis(q, 0, -1)
    idx = np.arange(model.n)
    W = P.copy()
    W[..., idx, idx] += k * qT
    Wp = 0.5 * (qT[..., :, None] + qT[..., None, :]) * P
    Wp[..., idx, idx] += k * (qT**2 + model.nu.nu()) - model.mu
    return W, Wp


def eval_W(model: Model, k: float, x):
    return _w_and_prime(model, k, x)[0]


def eval_W_prime(model: Model, k: float, x):
    return _w_and_prime(model, k, x)[1]


def eval_V(model: Model, k: float, x, partner: str = "minus"):
    """``W**2 - W'`` (``partner='minus'``) or ``W**2 + W'`` (``'plus'``)."""
    if partner not in ("minus", "plus"):
        raise ValueError(f"partner must be 'minus' or 'plus', got {partner!r}")
    W, Wp = _w_and_prime(model, k, x)
    W2 = W @ W
    V = W2 - Wp if partner == "minus" else W2 + Wp
    # exact hermiticity; W @ W carries rounding asymmetry otherwise
    return 0.5 * (V + np.conj(np.swapaxes(V, -1, -2)))


# ---------------------------------------------------------------------------
# poles and windows


def _channel_singularities(entry: QEntry, nu: NuClass, x0: float):
    """Nearest singular points of one channel to the left and right of ``x0``."""
    v = entry.variant
    if v is QVariant.TAN_POLE:
        t0 = nu.lam * x0 + entry.gamma
        m = math.floor((t0 - math.pi / 2) / math.pi)
        tl = math.pi / 2 + m * math.pi
        return (tl - entry.gamma) / nu.lam, (tl + math.pi - entry.gamma) / nu.lam
    if v is QVariant.COTH:
        s = -entry.gamma / nu.lam + 0.0
    elif v is QVariant.INV_POLE:
        s = -entry.gamma + 0.0
    else:
        return -math.inf, math.inf
    return (s, math.inf) if s <= x0 else (-math.inf, s)


def validity_window(model: Model, x0: float) -> tuple[float, float]:
    """Maximal open interval around ``x0`` on which every entry is finite and real."""
    x0 = float(x0)
    try:
        eval_W(model, 0.0, x0)
    except PoleError as exc:
        raise DomainError(f"x0={x0} is not a valid point: {exc}") from exc
    lo, hi = -math.inf, math.inf
    for e in model.entries:
        l, h = _channel_singularities(e, model.nu, x0)
        lo, hi = max(lo, l), min(hi, h)
    return lo, hi


def poles(model: Model, a: float, b: float) -> list[Pole]:
    """Singular points of the model inside ``[a, b]``, sorted by location."""
    out = []
    for i, e in enumerate(model.entries):
        v = e.variant
        if v is QVariant.TAN_POLE:
            lam, g = model.nu.lam, e.gamma
            m0 = math.ceil((lam * a + g - math.pi / 2) / math.pi)
            m1 = math.floor((lam * b + g - math.pi / 2) / math.pi)
            out += [Pole((math.pi / 2 + m * math.pi - g) / lam, i) for m in range(m0, m1 + 1)]
        elif v is QVariant.COTH:
            s = -e.gamma / model.nu.lam
            if a <= s <= b:
                out.append(Pole(s, i))
        elif v is QVariant.INV_POLE:
            if a <= -e.gamma <= b:
                out.append(Pole(-e.gamma, i))
    return sorted(out)


def check_interval(model: Model, a: float, b: float) -> None:
    """Raise ``DomainError`` unless ``[a, b]`` lies inside one validity window."""
    if not a < b:
        raise DomainError(f"empty interval [{a}, {b}]")
    mid = 0.5 * (a + b)
    try:
        lo, hi = validity_window(model, mid)
    except PoleError as exc:
        raise DomainError(str(exc)) from exc
    if not (lo < a and b < hi):
        raise DomainError(f"[{a}, {b}] leaves the validity window ({lo}, {hi})")
    eval_W(model, 0.0, np.array([a, mid, b]))
