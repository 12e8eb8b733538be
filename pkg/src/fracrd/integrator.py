"""Krogstad's fourth-order exponential Runge-Kutta scheme (ETDRK4-B) for diagonal linear parts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "phi",
    "PhiTable",
    "build_phi_table",
    "StepperState",
    "BlowUpError",
    "etdrk4_step",
    "integrate",
    "amplification_factor",
    "StabilityBoundary",
    "stability_boundary",
]

# Below |z| = 1/2 the Taylor series sum_j z^j / (j+k)! is used.  Its tail after
# 20 terms is bounded by 0.5^20/21! * 2 < 4e-26, far below double precision;
# above it the direct formula loses at most ~2 digits (phi_3 at |z| = 1/2).
Z_SWITCH = 0.5
N_SERIES = 20


def _phi_series(z, k):
    # Horner on sum_{j=0}^{N_SERIES} z^j / (j+k)!
    out = np.full_like(z, 1.0 / math.factorial(N_SERIES + k))
    for j in range(N_SERIES - 1, -1, -1):
        out = out * z + 1.0 / math.factorial(j + k)
    return out


def _phi_direct(z, k):
    em1 = np.expm1(z)
    if k == 1:
        return em1 / z
    if k == 2:
        return (em1 - z) / (z * z)
    return (em1 - z - 0.5 * z * z) / (z * z * z)


def phi(z, k: int):
    """phi_k(z) = (e^z - sum_{j<k} z^j/j!) / z^k for k in {1, 2, 3}, real or complex z.

    phi_k(0) = 1/k! by continuity.
    """
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    scalar = np.ndim(z) == 0
    z = np.asarray(z)
    if not np.iscomplexobj(z):
        z = z.astype(float)
    out = np.empty_like(z)
    small = np.abs(z) < Z_SWITCH
    if np.any(small):
        out[small] = _phi_series(z[small], k)
    big = ~small
    if np.any(big):
        with np.errstate(over="ignore", invalid="ignore"):
            out[big] = _phi_direct(z[big], k)
    return out[()] if scalar else out


@dataclass(frozen=True, eq=False)
class PhiTable:
    """exp and phi_1..3 at tau*sigma (full step) and tau*sigma/2 (half step)."""

    tau: float
    exp_full: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    phi3: np.ndarray
    exp_half: np.ndarray
    phi1_half: np.ndarray
    phi2_half: np.ndarray
    phi3_half: np.ndarray


def build_phi_table(sigma, tau: float) -> PhiTable:
    if not tau > 0:
        raise ValueError("tau must be positive")
    z = tau * np.asarray(sigma, dtype=float)
    zh = 0.5 * z
    return PhiTable(
        tau=tau,
        exp_full=np.exp(z), phi1=phi(z, 1), phi2=phi(z, 2), phi3=phi(z, 3),
        exp_half=np.exp(zh), phi1_half=phi(zh, 1), phi2_half=phi(zh, 2), phi3_half=phi(zh, 3),
    )


class BlowUpError(FloatingPointError):
    def __init__(self, step, t, stage):
        super().__init__(f"non-finite values at step {step} (t = {t:.6g}, stage {stage})")
        self.step = step
        self.t = t
        self.stage = stage


class _Weights:
    """Stage and update weights of the scheme, combined once per step size."""

    def __init__(self, p: PhiTable):
        tau = p.tau
        self.e = p.exp_full
        self.eh = p.exp_half
        self.a21 = 0.5 * tau * p.phi1_half
        self.a31 = 0.5 * tau * (p.phi1_half - 2.0 * p.phi2_half)
        self.a32 = tau * p.phi2_half
        self.a41 = tau * (p.phi1 - 2.0 * p.phi2)
        self.a43 = 2.0 * tau * p.phi2
        self.b1 = tau * (4.0 * p.phi3 - 3.0 * p.phi2 + p.phi1)
        self.b23 = 2.0 * tau * (p.phi2 - 2.0 * p.phi3)
        self.b4 = tau * (4.0 * p.phi3 - p.phi2)


@dataclass(eq=False)
class StepperState:
    """Coefficient state ``u`` (species first) of u_t = sigma * u + rhs(u, t).

    ``rhs`` maps a coefficient array and a time to coefficient values of the
    nonlinear term; for reaction-diffusion it is the pseudospectral
    evaluation built by :func:`fracrd.solver.pseudospectral_rhs`.
    """

    u: np.ndarray
    sigma: np.ndarray
    tau: float
    rhs: Callable[[np.ndarray, float], np.ndarray]
    t: float = 0.0
    step: int = 0
    phi: PhiTable | None = None
    _w: _Weights | None = field(default=None, repr=False)

    def __post_init__(self):
        self.u = np.array(self.u, dtype=float)
        self.sigma = np.broadcast_to(np.asarray(self.sigma, dtype=float), self.u.shape)
        if self.phi is None:
            self.phi = build_phi_table(self.sigma, self.tau)
        elif self.phi.tau != self.tau or self.phi.exp_full.shape != self.u.shape:
            raise ValueError("phi table does not match the step size or state shape")
        self._w = _Weights(self.phi)


def _check(a, state, stage):
    if not np.all(np.isfinite(a)):
        raise BlowUpError(state.step, state.t, stage)


def etdrk4_step(state: StepperState) -> StepperState:
    """Advance ``state`` by one step in place and return it."""
    w = state._w
    u, t, tau, N = state.u, state.t, state.tau, state.rhs
    n1 = N(u, t)
    _check(n1, state, 1)
    eu_h = w.eh * u
    mu2 = eu_h + w.a21 * n1
    n2 = N(mu2, t + 0.5 * tau)
    _check(n2, state, 2)
    mu3 = eu_h + w.a31 * n1 + w.a32 * n2
    n3 = N(mu3, t + 0.5 * tau)
    _check(n3, state, 3)
    mu4 = w.e * u + w.a41 * n1 + w.a43 * n3
    n4 = N(mu4, t + tau)
    _check(n4, state, 4)
    new = w.e * u + w.b1 * n1 + w.b23 * (n2 + n3) + w.b4 * n4
    _check(new, state, 5)
    state.u = new
    state.step += 1
    state.t = t + tau
    return state


def integrate(state: StepperState, n_steps: int, callback=None) -> StepperState:
    """Take ``n_steps`` steps; ``callback(state)`` runs after each one."""
    for _ in range(n_steps):
        etdrk4_step(state)
        if callback is not None:
            callback(state)
    return state


def amplification_factor(x, y):
    """One-step ratio r(x, y) of the scheme on u' = (lambda + rho) u, x = rho tau, y = lambda tau <= 0."""
    y = np.asarray(y, dtype=float)
    if np.any(y > 0):
        raise ValueError("y must be non-positive")
    x = np.asarray(x, dtype=complex)
    p1, p2, p3 = phi(y, 1), phi(y, 2), phi(y, 3)
    h1, h2 = phi(0.5 * y, 1), phi(0.5 * y, 2)
    e, eh = np.exp(y), np.exp(0.5 * y)
    c0 = e
    c1 = 4 * p3 - 3 * p2 + p1 + 4 * eh * (p2 - 2 * p3) + e * (4 * p3 - p2)
    c2 = (2 * (h1 - h2 + eh * h2) * (p2 - 2 * p3)
          + (p1 - 2 * p2 + 2 * eh * p2) * (4 * p3 - p2))
    c3 = ((p2 * (h1 - 2 * h2) + 2 * eh * h2 * p2) * (4 * p3 - p2)
          + h1 * h2 * (p2 - 2 * p3))
    c4 = h1 * h2 * p2 * (4 * p3 - p2)
    r = c0 + x * (c1 + x * (c2 + x * (c3 + x * c4)))
    return r[()] if r.ndim == 0 else r


@dataclass
class StabilityBoundary:
    y: float
    angles: np.ndarray
    radius: np.ndarray
    bounded: np.ndarray
    rho_max: float

    @property
    def points(self) -> np.ndarray:
        return self.radius * np.exp(1j * self.angles)

    def area(self) -> float:
        """Shoelace area of the polygon through the boundary points (unbounded rays cut at rho_max)."""
        p = self.points
        q = np.roll(p, -1)
        return 0.5 * abs(np.sum(p.real * q.imag - q.real * p.imag))


def stability_boundary(y: float, n_angles: int = 256, rho_max: float = 60.0,
                       n_scan: int = 4000, tol: float = 1e-12) -> StabilityBoundary:
    """Trace |r(x, y)| = 1 along rays x = rho e^{i theta} from the origin.

    Each ray is scanned outward for the first point with |r| > 1 and the
    crossing is then bisected.  Rays that stay inside up to ``rho_max`` are
    flagged unbounded and reported at ``rho_max``.
    """
    if n_angles < 8:
        raise ValueError("n_angles must be at least 8")
    if y > 0:
        raise ValueError("y must be non-positive")
    angles = 2 * np.pi * np.arange(n_angles) / n_angles
    rho = rho_max * np.arange(1, n_scan + 1) / n_scan
    rho_max = float(rho_max)
    radius = np.full(n_angles, rho_max)
    bounded = np.zeros(n_angles, dtype=bool)
    for i, th in enumerate(angles):
        d = np.exp(1j * th)
        g = np.abs(amplification_factor(rho * d, y)) - 1.0
        out = np.nonzero(g > 0)[0]
        if out.size == 0:
            continue
        k = out[0]
        lo = 0.0 if k == 0 else rho[k - 1]
        hi = rho[k]
        while hi - lo > tol * max(hi, 1.0):
            mid = 0.5 * (lo + hi)
            if abs(amplification_factor(mid * d, y)) - 1.0 > 0:
                hi = mid
            else:
                lo = mid
        radius[i] = 0.5 * (lo + hi)
        bounded[i] = True
    return StabilityBoundary(y=float(y), angles=angles, radius=radius, bounded=bounded, rho_max=rho_max)
