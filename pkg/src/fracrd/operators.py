"""Diagonal fractional operators in the biorthogonal coefficient space."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .basis import Eigenbasis

S_MAX = 1.5

__all__ = [
    "OperatorKind",
    "OperatorSpec",
    "build_symbol",
    "apply_operator",
    "scalar_dt_identity",
    "QuadratureError",
]


class OperatorKind(str, Enum):
    FRACTIONAL_LAPLACIAN = "fractional_laplacian"
    RIESZ = "riesz"
    NONE = "none"


class QuadratureError(RuntimeError):
    pass


def _check_order(name, v):
    if not (0.0 < v < S_MAX):
        raise ValueError(f"{name} must lie in (0,{S_MAX:g}), got {v}")


@dataclass(frozen=True)
class OperatorSpec:
    """Linear diffusion operator for one species.

    ``kind = FRACTIONAL_LAPLACIAN`` uses ``s`` and ``D``; ``RIESZ`` uses one
    order and one coefficient per direction; ``NONE`` is the zero operator
    (a species without spatial coupling).
    """

    kind: OperatorKind = OperatorKind.FRACTIONAL_LAPLACIAN
    s: float = 1.0
    D: float = 1.0
    alpha: tuple[float, ...] = ()
    Dvec: tuple[float, ...] = ()

    def __post_init__(self):
        kind = OperatorKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is OperatorKind.FRACTIONAL_LAPLACIAN:
            _check_order("s", self.s)
            if not self.D > 0:
                raise ValueError(f"diffusion coefficient must be positive, got {self.D}")
        elif kind is OperatorKind.RIESZ:
            if len(self.alpha) == 0 or len(self.alpha) != len(self.Dvec):
                raise ValueError("Riesz operator needs one alpha and one D per direction")
            for a in self.alpha:
                _check_order("alpha", a)
            if any(not dj > 0 for dj in self.Dvec):
                raise ValueError("diffusion coefficients must be positive")


def build_symbol(spec: OperatorSpec, basis: Eigenbasis, d: int) -> np.ndarray:
    """Tensor sigma of shape (N+1,)*d with the operator's diagonal entries.

    Fractional Laplacian: -D (lam_n1 + ... + lam_nd)^s.
    Riesz: -sum_j D_j lam_nj^alpha_j.
    """
    lam = np.asarray(basis.lam)
    grids = np.meshgrid(*([lam] * d), indexing="ij", sparse=True)
    if spec.kind is OperatorKind.FRACTIONAL_LAPLACIAN:
        total = sum(grids)
        return -spec.D * np.broadcast_to(total, (lam.size,) * d) ** spec.s
    if spec.kind is OperatorKind.RIESZ:
        if len(spec.alpha) != d:
            raise ValueError(f"Riesz operator has {len(spec.alpha)} directions, grid has {d}")
        sigma = np.zeros((lam.size,) * d)
        for g, a, dj in zip(grids, spec.alpha, spec.Dvec):
            sigma = sigma - dj * g ** a
        return sigma
    return np.zeros((lam.size,) * d)


def apply_operator(coeffs, sigma):
    coeffs = np.asarray(coeffs)
    if coeffs.shape != np.shape(sigma):
        raise ValueError(f"shape mismatch: {coeffs.shape} vs {np.shape(sigma)}")
    return sigma * coeffs


# 16-point Gauss-Legendre on unit panels of the log variable
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _dt_integral(lam, alpha, half_width, panels_per_unit):
    # t = exp(tau): integrand lam e^{(2-2a) tau} / (1 + lam e^{2 tau}), centred at
    # tau0 = -log(lam)/2 where the two exponential tails meet
    tau0 = -0.5 * math.log(lam)
    lo_w, hi_w = half_width
    n = int(math.ceil((lo_w + hi_w) * panels_per_unit))
    edges = np.linspace(tau0 - lo_w, tau0 + hi_w, n + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    tau = mid + half * _GL_X[None, :]
    # rewrite about tau0 to keep exponents bounded
    u = tau - tau0
    f = np.exp((2 - 2 * alpha) * u) / (1.0 + np.exp(2 * u))
    val = np.sum(half * _GL_W[None, :] * f)
    # lam * e^{(2-2a) tau0} = lam^alpha
    return val * lam ** alpha


def scalar_dt_identity(lam: float, alpha: float, tol: float = 1e-12) -> float:
    """Dunford-Taylor quadrature for lam^alpha, 0 < alpha < 1.

    Evaluates (2 sin(pi a) / pi) int_0^inf lam t^(1-2a) / (1 + t^2 lam) dt
    without ever forming lam^alpha in the integrand's tails: the
    integrand decays like e^{(2-2a) u} for u -> -inf and e^{-2a u} for
    u -> +inf, and each side is truncated where its tail drops below ``tol``.
    The result is checked against a refined rule.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    # tail of e^{-r u} beyond w is e^{-r w}/r
    lo_w = (math.log(1.0 / tol) - math.log(2 - 2 * alpha)) / (2 - 2 * alpha)
    hi_w = (math.log(1.0 / tol) - math.log(2 * alpha)) / (2 * alpha)
    lo_w, hi_w = max(lo_w, 1.0), max(hi_w, 1.0)
    const = 2.0 * math.sin(math.pi * alpha) / math.pi
    coarse = const * _dt_integral(lam, alpha, (lo_w, hi_w), 1)
    fine = const * _dt_integral(lam, alpha, (lo_w, hi_w), 2)
    resid = abs(fine - coarse)
    if resid > 1e3 * tol * abs(fine):
        raise QuadratureError(f"Dunford-Taylor quadrature did not converge (residual {resid:.3e})")
    return fine
