"""Reaction systems, the manufactured-solution source and closed-form fractional Laplacians."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .operators import OperatorKind, OperatorSpec

__all__ = [
    "ModelKind",
    "ModelSpec",
    "ManufacturedSolution",
    "double_well",
    "reaction_eval",
    "kummer_1f1",
    "fractional_gaussian",
    "manufactured_source",
    "SeriesError",
]

# Past this argument the large-argument expansion is at machine precision for
# the parameters used here (a <= 3, b in {1/2, 1, 3/2}), while the transformed
# series keeps losing digits to rounding in log|term| as the term count grows.
# Points where the expansion does not converge fall back to the series.
KUMMER_SERIES_MAX = 60.0
KUMMER_TERM_CAP = 20000


class SeriesError(ArithmeticError):
    pass


class ModelKind(str, Enum):
    ALLEN_CAHN = "allen_cahn"
    ALLEN_CAHN_SOURCED = "allen_cahn_sourced"
    FISHER = "fisher"
    GRAY_SCOTT = "gray_scott"
    FITZHUGH_NAGUMO = "fitzhugh_nagumo"


_REQUIRED = {
    ModelKind.ALLEN_CAHN: ("epsilon",),
    ModelKind.ALLEN_CAHN_SOURCED: ("epsilon", "lambda"),
    ModelKind.FISHER: ("r", "K"),
    ModelKind.GRAY_SCOTT: ("F", "kappa"),
    ModelKind.FITZHUGH_NAGUMO: ("mu", "epsilon", "beta", "gamma", "delta"),
}
_SPECIES = {
    ModelKind.GRAY_SCOTT: 2,
    ModelKind.FITZHUGH_NAGUMO: 2,
}


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact solution u = e^{-t} e^{-lambda^2 |x|^2} of the sourced Allen-Cahn problem."""

    lam: float
    s: float
    epsilon: float
    d: int = 1

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not 0 < self.s < 1.5:
            raise ValueError("s must lie in (0,1.5)")

    def exact(self, coords, t):
        r2 = sum(np.asarray(c, dtype=float) ** 2 for c in coords)
        return math.exp(-t) * np.exp(-self.lam ** 2 * r2)


@dataclass(frozen=True)
class ModelSpec:
    """A reaction system plus the linear operator acting on each species.

    Allen-Cahn takes an optional ``reaction_scale`` multiplying the
    double-well term (1 for the diffusive scaling, 1/epsilon^2 for the
    curvature-flow scaling).
    """

    kind: ModelKind
    params: dict
    operators: tuple[OperatorSpec, ...]
    manufactured: ManufacturedSolution | None = field(default=None, compare=False)

    def __post_init__(self):
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "operators", tuple(self.operators))
        missing = [k for k in _REQUIRED[kind] if k not in self.params]
        if missing:
            raise ValueError(f"{kind.value}: missing parameters {missing}")
        for k, v in self.params.items():
            if not math.isfinite(v):
                raise ValueError(f"{kind.value}: parameter {k} is not finite")
        if len(self.operators) != self.species:
            raise ValueError(f"{kind.value} needs {self.species} operator(s), got {len(self.operators)}")
        if kind is ModelKind.FISHER and not self.params["K"] > 0:
            raise ValueError("K must be positive")
        if "epsilon" in _REQUIRED[kind] and not self.params["epsilon"] > 0:
            raise ValueError("epsilon must be positive")
        if kind is ModelKind.ALLEN_CAHN_SOURCED and self.manufactured is None:
            raise ValueError("sourced Allen-Cahn needs a manufactured solution")

    @property
    def species(self) -> int:
        return _SPECIES.get(self.kind, 1)


def double_well(u):
    """f(u) = F'(u) for F(u) = u^2 (u-1)^2 / 4."""
    return 0.5 * u * (u - 1.0) * (2.0 * u - 1.0)


def reaction_eval(model: ModelSpec, values, t: float = 0.0, source=None):
    """Pointwise nonlinear term N(u, t) with u_t = (linear part) + N.

    ``values`` has the species on the leading axis.  ``source`` is the
    manufactured source (a callable of t) for the sourced model.
    """
    p = model.params
    k = model.kind
    u = np.asarray(values)
    if u.shape[0] != model.species:
        raise ValueError(f"expected {model.species} species, got {u.shape[0]}")
    if k is ModelKind.ALLEN_CAHN:
        return (-p.get("reaction_scale", 1.0) * double_well(u[0]))[None]
    if k is ModelKind.ALLEN_CAHN_SOURCED:
        if source is None:
            raise ValueError("sourced Allen-Cahn needs a source")
        return (source(t) - double_well(u[0]))[None]
    if k is ModelKind.FISHER:
        return (p["r"] * u[0] * (1.0 - u[0] / p["K"]))[None]
    if k is ModelKind.GRAY_SCOTT:
        a, b = u[0], u[1]
        uvv = (1.0 - a) * b * b
        return np.stack([uvv - p["F"] * a, uvv - (p["F"] + p["kappa"]) * b])
    a, b = u[0], u[1]
    return np.stack([
        a * (1.0 - a) * (a - p["mu"]) - b,
        p["epsilon"] * (p["beta"] * a - p["gamma"] * b - p["delta"]),
    ])


def _kummer_direct(a, b, x):
    # all-positive (or terminating) series for x >= 0
    total = np.ones_like(x)
    term = np.ones_like(x)
    for n in range(KUMMER_TERM_CAP):
        term = term * ((a + n) / ((b + n) * (n + 1))) * x
        total = total + term
        if a + n == 0 or np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            return total
    raise SeriesError("confluent hypergeometric series did not converge")


def _kummer_transformed(a, b, X):
    """e^{-X} 1F1(b-a; b; X) for X > 0, summed in log form.

    Terms are carried as (sign, log|term|) with the log accumulated by
    compensated summation starting from -X, so that e^{-X} times terms of
    size up to ~e^{X} never over- or underflow prematurely.
    """
    c = b - a
    logt = -X.copy()
    comp = np.zeros_like(X)
    sign = 1.0
    total = np.exp(logt)
    logX = np.log(X)
    active = np.ones(X.shape, dtype=bool)
    for n in range(KUMMER_TERM_CAP):
        f = c + n
        if f == 0:
            return total
        g = (b + n) * (n + 1)
        step = math.log(abs(f)) - math.log(abs(g)) + logX
        # Kahan update of logt += step
        yk = step - comp
        tk = logt + yk
        comp = (tk - logt) - yk
        logt = tk
        if (f < 0) != (g < 0):
            sign = -sign
        term = sign * np.exp(logt)
        total = np.where(active, total + term, total)
        ratio_small = (abs(f) * X) < abs(g)
        active &= ~(ratio_small & (np.abs(term) <= 1e-17 * np.abs(total)))
        if not active.any():
            return total
    raise SeriesError("confluent hypergeometric series did not converge")


def _kummer_asymptotic(a, b, X):
    """1F1(a;b;-X) ~ Gamma(b)/Gamma(b-a) X^{-a} sum_k (a)_k (a-b+1)_k / k! X^{-k}.

    Returns the values and a mask of points where the (divergent) series
    reached 1e-17 relative accuracy before its terms started to grow.
    """
    c = b - a
    if c <= 0 and c == int(c):
        # 1F1 is then e^{-X} times a polynomial: the terminating series is exact
        return np.zeros_like(X), np.zeros(X.shape, dtype=bool)
    pref = math.gamma(b) / math.gamma(c)
    total = np.ones_like(X)
    term = np.ones_like(X)
    done = np.zeros(X.shape, dtype=bool)
    failed = np.zeros(X.shape, dtype=bool)
    for k in range(200):
        nxt = term * (a + k) * (a - b + 1 + k) / ((k + 1) * X)
        small = np.abs(nxt) <= 1e-17 * np.abs(total)
        done |= small & ~failed
        failed |= ~done & (np.abs(nxt) > np.abs(term))
        live = ~done & ~failed
        if not live.any():
            break
        term = np.where(live, nxt, term)
        total = np.where(live, total + nxt, total)
    return pref * X ** (-a) * total, done


def kummer_1f1(a: float, b: float, x):
    """Confluent hypergeometric function 1F1(a; b; x).

    For x < 0 the Kummer transformation 1F1(a;b;x) = e^x 1F1(b-a;b;-x)
    is summed as a power series up to |x| = KUMMER_SERIES_MAX, and the
    large-argument expansion is used beyond that.  x >= 0 uses the direct series and is
    intended for moderate x only.
    """
    if b <= 0 and b == int(b):
        raise ValueError("b must not be a non-positive integer")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    pos = x >= 0
    if pos.any():
        out[pos] = _kummer_direct(a, b, x[pos])
    mid = (x < 0) & (x >= -KUMMER_SERIES_MAX)
    if mid.any():
        out[mid] = _kummer_transformed(a, b, -x[mid])
    far = x < -KUMMER_SERIES_MAX
    if far.any():
        vals, ok = _kummer_asymptotic(a, b, -x[far])
        if not ok.all():
            vals[~ok] = _kummer_transformed(a, b, -x[far][~ok])
        out[far] = vals
    return out[0] if scalar else out


def fractional_gaussian(s: float, lam: float, x, d: int = 1):
    """(-Delta)^s applied to e^{-lam^2 |x|^2} on R^d; ``x`` holds |x| (or x when d = 1).

    Closed form (2 lam)^{2s} Gamma(s + d/2) / Gamma(d/2) 1F1(s + d/2; d/2; -lam^2 |x|^2).
    """
    if not 0 < s < 1.5:
        raise ValueError("s must lie in (0,1.5)")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    x = np.asarray(x, dtype=float)
    pref = (2.0 * lam) ** (2 * s) * math.exp(math.lgamma(s + 0.5 * d) - math.lgamma(0.5 * d))
    return pref * kummer_1f1(s + 0.5 * d, 0.5 * d, -(lam * x) ** 2)


class _SourceProfile:
    """Time-separable manufactured source on fixed points.

    g(x, t) = eps^2 e^{-t} P(x) + e^{-3t} G^3 - 3/2 e^{-2t} G^2 - 1/2 e^{-t} G
    with G = e^{-lam^2 |x|^2} and P the fractional Laplacian of G.
    """

    def __init__(self, ms: ManufacturedSolution, coords):
        r2 = sum(np.asarray(c, dtype=float) ** 2 for c in coords)
        self.G = np.exp(-ms.lam ** 2 * r2)
        self.P = fractional_gaussian(ms.s, ms.lam, np.sqrt(r2), d=ms.d)
        self.eps2 = ms.epsilon ** 2

    def __call__(self, t):
        e1 = math.exp(-t)
        G = self.G
        return (self.eps2 * e1 * self.P + e1 ** 3 * G ** 3
                - 1.5 * e1 ** 2 * G ** 2 - 0.5 * e1 * G)


def manufactured_source(ms: ManufacturedSolution, x, t=None):
    """Source g(x, t) making e^{-t} e^{-lam^2|x|^2} exact.

    ``x`` is a sequence of d coordinate arrays.  With ``t`` given the values
    are returned; without it, a callable of t that reuses the spatial part.
    """
    if ms.d == 1 and np.ndim(x) <= 1 and not isinstance(x, (list, tuple)):
        x = (x,)
    if len(x) != ms.d:
        raise ValueError(f"expected {ms.d} coordinate arrays, got {len(x)}")
    prof = _SourceProfile(ms, x)
    return prof if t is None else prof(t)


def allen_cahn_model(epsilon, operator: OperatorSpec, reaction_scale=1.0):
    return ModelSpec(ModelKind.ALLEN_CAHN, {"epsilon": epsilon, "reaction_scale": reaction_scale},
                     (operator,))


def sourced_allen_cahn_model(ms: ManufacturedSolution):
    op = OperatorSpec(OperatorKind.FRACTIONAL_LAPLACIAN, s=ms.s, D=ms.epsilon ** 2)
    return ModelSpec(ModelKind.ALLEN_CAHN_SOURCED, {"epsilon": ms.epsilon, "lambda": ms.lam},
                     (op,), manufactured=ms)
