"""
Mapped Chebyshev functions and the Fourier-like biorthogonal basis on the real line.

The algebraic map x = y / sqrt(1 - y^2) carries (-1, 1) onto R.  The mapped
Chebyshev functions (MCFs)

    T_n(x) = (c_n pi / 2)^(-1/2) (1 + x^2)^(-1/2) T_n(x / sqrt(1 + x^2))

are orthonormal in L^2(R).  Diagonalising their stiffness (derivative Gram)
matrix S = E diag(lam) E^T yields a basis that is orthonormal in L^2 and
diagonal in the H^1 seminorm, so that (-Delta)^s becomes a diagonal multiplier.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft
import scipy.linalg
from numpy.polynomial import chebyshev as C

__all__ = [
    "BasisSpec",
    "CollocationGrid",
    "Eigenbasis",
    "SpectralField",
    "GridField",
    "Transform",
    "mcf_norm",
    "evaluate_mcf",
    "evaluate_mcf_derivative",
    "build_stiffness",
    "stiffness_closed_form",
    "eigendecompose",
    "build_grid",
    "forward_transform",
    "inverse_transform",
    "evaluate_expansion",
]


@dataclass(frozen=True)
class BasisSpec:
    """Highest mode index ``N`` per direction and spatial dimension ``d``."""

    N: int
    d: int = 1

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be an integer >= 1, got {self.N}")
        if self.d not in (1, 2, 3):
            raise ValueError(f"d must be 1, 2 or 3, got {self.d}")

    @property
    def modes(self) -> int:
        return self.N + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N + 1,) * self.d


def mcf_norm(n):
    """Normalisation (c_n pi / 2)^(-1/2), with c_0 = 2 and c_n = 1 otherwise."""
    n = np.asarray(n)
    c = np.where(n == 0, 2.0, 1.0)
    return 1.0 / np.sqrt(c * np.pi / 2.0)


def evaluate_mcf(n: int, x):
    """Evaluate the mapped Chebyshev function of index ``n`` at ``x``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=float)
    r = np.sqrt(1.0 + x * x)
    y = x / r
    coef = np.zeros(n + 1)
    coef[n] = 1.0
    return mcf_norm(n) * C.chebval(y, coef) / r


def evaluate_mcf_derivative(n: int, x):
    """d/dx of the MCF, written directly in x (used by the quadrature oracles)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=float)
    r2 = 1.0 + x * x
    r = np.sqrt(r2)
    y = x / r
    coef = np.zeros(n + 1)
    coef[n] = 1.0
    tn = C.chebval(y, coef)
    dtn = C.chebval(y, C.chebder(coef)) if n > 0 else np.zeros_like(y)
    # dy/dx = (1 + x^2)^(-3/2)
    return mcf_norm(n) * (-x * tn / (r2 * r) + dtn / (r2 * r2))


def build_stiffness(spec: BasisSpec | int) -> np.ndarray:
    """Exact stiffness matrix S_mn = int_R T'_m T'_n dx.

    With y = cos(theta) the integrand becomes

        (cos t cos nt - n sin t sin nt)(cos t cos mt - m sin t sin mt) sin^2 t

    on (0, pi), a cosine polynomial of degree <= 2N + 4, so a Gauss-Chebyshev
    rule in theta with 2N + 9 points integrates it exactly.
    """
    N = spec.N if isinstance(spec, BasisSpec) else int(spec)
    if N < 0:
        raise ValueError("N must be non-negative")
    M = 2 * N + 9
    theta = (2 * np.arange(M) + 1) * np.pi / (2 * M)
    n = np.arange(N + 1)[:, None]
    g = (np.cos(theta) * np.cos(n * theta) - n * np.sin(theta) * np.sin(n * theta))
    g = g * np.sin(theta)
    S = (np.pi / M) * (g @ g.T)
    k = mcf_norm(np.arange(N + 1))
    S *= np.outer(k, k)
    # parity: odd offsets vanish exactly; offsets beyond 4 vanish exactly
    m = np.arange(N + 1)
    off = np.abs(m[:, None] - m[None, :])
    S[(off % 2 == 1) | (off > 4)] = 0.0
    return 0.5 * (S + S.T)


def stiffness_closed_form(N: int) -> np.ndarray:
    """Tabulated entries, with c_k = 0 for k < 0, c_0 = 2, c_k = 1 for k >= 1.

    Only trusted for rows/columns n >= 2; kept as a cross-check on
    :func:`build_stiffness`.
    """

    def c(k):
        return 0.0 if k < 0 else (2.0 if k == 0 else 1.0)

    S = np.zeros((N + 1, N + 1))
    for n in range(N + 1):
        S[n, n] = ((4 * c(n - 1) - c(n - 2)) * (n - 1) ** 2 / 16
                   + (4 * c(n + 1) - c(n + 2)) * (n + 1) ** 2 / 16
                   - c(n) / 4) / c(n)
        if n + 2 <= N:
            v = ((c(n) - c(n + 2)) * (n + 1) / 8 - c(n + 1) * (n + 1) ** 2 / 4)
            S[n, n + 2] = S[n + 2, n] = v / np.sqrt(c(n) * c(n + 2))
        if n + 4 <= N:
            v = c(n + 2) * (n + 1) * (n + 3) / 16
            S[n, n + 4] = S[n + 4, n] = v / np.sqrt(c(n) * c(n + 4))
    return S


@dataclass(frozen=True, eq=False)
class Eigenbasis:
    """Orthonormal eigenvectors ``E`` (columns) and ascending eigenvalues ``lam`` of S."""

    N: int
    E: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        self.E.setflags(write=False)
        self.lam.setflags(write=False)


def _parity_block(S, idx):
    sub = S[np.ix_(idx, idx)]
    p = len(idx)
    if p == 1:
        return sub[0].copy(), np.ones((1, 1))
    u = min(2, p - 1)
    # upper banded storage for eig_banded
    ab = np.zeros((u + 1, p))
    for k in range(u + 1):
        ab[u - k, k:] = np.diagonal(sub, k)
    try:
        w, v = scipy.linalg.eig_banded(ab, lower=False, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"symmetric banded eigensolver failed: {exc}") from exc
    return w, v


def eigendecompose(S: np.ndarray) -> Eigenbasis:
    """Eigen-decompose the stiffness matrix, one pentadiagonal solve per parity class."""
    S = np.asarray(S, dtype=float)
    N = S.shape[0] - 1
    lam = np.empty(N + 1)
    E = np.zeros((N + 1, N + 1))
    col = 0
    blocks = []
    for parity in (0, 1):
        idx = np.arange(parity, N + 1, 2)
        if len(idx) == 0:
            continue
        w, v = _parity_block(S, idx)
        for j in range(len(w)):
            blocks.append((w[j], parity, j))
            lam[col] = w[j]
            E[idx, col] = v[:, j]
            col += 1
    # ascending; ties broken by parity block, then index within the block
    order = sorted(range(N + 1), key=lambda i: (lam[i], blocks[i][1], blocks[i][2]))
    lam = lam[order]
    E = E[:, order]
    # sign convention: largest-magnitude entry of each eigenvector is positive
    pivot = np.argmax(np.abs(E), axis=0)
    E *= np.sign(E[pivot, np.arange(N + 1)])
    if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
        raise RuntimeError("stiffness matrix eigenvalues are not all positive")
    return Eigenbasis(N=N, E=np.ascontiguousarray(E), lam=lam)


@dataclass(frozen=True, eq=False)
class CollocationGrid:
    """Chebyshev-Gauss nodes in y and their images on R, sorted so x increases."""

    N: int
    y_nodes: np.ndarray
    x_nodes: np.ndarray
    jacobian_scale: np.ndarray

    def mesh(self, d: int) -> list[np.ndarray]:
        return np.meshgrid(*([self.x_nodes] * d), indexing="ij")


def build_grid(spec: BasisSpec | int) -> CollocationGrid:
    N = spec.N if isinstance(spec, BasisSpec) else int(spec)
    j = np.arange(N + 1)
    # reverse of y_j = cos((2j+1) pi / (2(N+1))) so that nodes ascend
    y = -np.cos((2 * j + 1) * np.pi / (2 * (N + 1)))
    y = 0.5 * (y - y[::-1])  # exact odd symmetry
    w = np.sqrt(1.0 - y * y)
    x = y / w
    for arr in (y, x, w):
        arr.setflags(write=False)
    return CollocationGrid(N=N, y_nodes=y, x_nodes=x, jacobian_scale=1.0 / w)


class Transform:
    """Point values <-> biorthogonal coefficients, applied one axis at a time.

    Per axis the forward map is E^T diag(1/k_n) DCT diag(sqrt(1 + x^2)),
    folded into one dense (N+1) x (N+1) matrix at construction; the
    inverse is the exact algebraic inverse, built the same way.
    """

    def __init__(self, basis: Eigenbasis, grid: CollocationGrid):
        if basis.N != grid.N:
            raise ValueError("basis and grid were built for different N")
        N = basis.N
        M = N + 1
        k = mcf_norm(np.arange(M))
        eye = np.eye(M)
        # grid is stored with y ascending; the DCT expects theta ascending (y descending)
        dct = scipy.fft.dct(eye[::-1], type=2, axis=0) / M
        dct[0] *= 0.5
        idct = scipy.fft.idct(eye, type=2, axis=0) * M
        idct[:, 0] *= 2.0
        idct = idct[::-1]
        fwd = basis.E.T @ ((dct / k[:, None]) * grid.jacobian_scale[None, :])
        inv = (idct * k[None, :]) / grid.jacobian_scale[:, None] @ basis.E
        self.N = N
        self.basis = basis
        self.grid = grid
        self.fwd = np.ascontiguousarray(fwd)
        self.inv = np.ascontiguousarray(inv)

    @staticmethod
    def _apply(mat, a, d):
        # the last d axes are spatial; any leading axes are batch (e.g. species)
        a = np.asarray(a, dtype=float)
        M = mat.shape[0]
        if a.ndim < d or any(n != M for n in a.shape[a.ndim - d:]):
            raise ValueError(f"expected trailing shape ({M},)*{d}, got {a.shape}")
        if d == 1:
            return a @ mat.T
        out = mat @ a @ mat.T
        if d == 3:
            lead = out.shape[:-3]
            out = (mat @ out.reshape(lead + (M, M * M))).reshape(out.shape)
        return out

    def forward(self, values, d=None):
        """Point values -> coefficients; ``d`` defaults to the array rank."""
        return self._apply(self.fwd, values, np.ndim(values) if d is None else d)

    def inverse(self, coeffs, d=None):
        return self._apply(self.inv, coeffs, np.ndim(coeffs) if d is None else d)


@dataclass
class SpectralField:
    coeffs: np.ndarray
    basis: Eigenbasis
    species_label: str | None = None


@dataclass
class GridField:
    values: np.ndarray
    grid: CollocationGrid = field(repr=False)


def forward_transform(g: GridField, basis: Eigenbasis, grid: CollocationGrid | None = None) -> SpectralField:
    tr = Transform(basis, grid if grid is not None else g.grid)
    return SpectralField(tr.forward(g.values), basis)


def inverse_transform(u: SpectralField, basis: Eigenbasis, grid: CollocationGrid) -> GridField:
    tr = Transform(basis, grid)
    return GridField(tr.inverse(u.coeffs), grid)


def evaluate_expansion(coeffs, basis: Eigenbasis, x):
    """Evaluate a 1-D biorthogonal expansion at arbitrary points ``x``."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (basis.N + 1,):
        raise ValueError("evaluate_expansion expects a 1-D coefficient vector")
    a = basis.E @ coeffs * mcf_norm(np.arange(basis.N + 1))
    x = np.asarray(x, dtype=float)
    r = np.sqrt(1.0 + x * x)
    return C.chebval(x / r, a) / r
