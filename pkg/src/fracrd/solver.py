"""Assembly of discretisation, diagonal symbols and pseudospectral reaction terms."""

from __future__ import annotations

import numpy as np

from .basis import BasisSpec, CollocationGrid, Eigenbasis, Transform, build_grid, build_stiffness, eigendecompose
from .integrator import StepperState
from .operators import build_symbol
from .reactions import ModelKind, ModelSpec, manufactured_source, reaction_eval


class Discretization:
    """Everything that depends only on (N, d): eigenbasis, grid and transforms."""

    def __init__(self, spec: BasisSpec, basis: Eigenbasis | None = None):
        self.spec = spec
        self.basis = basis if basis is not None else eigendecompose(build_stiffness(spec))
        if self.basis.N != spec.N:
            raise ValueError("eigenbasis built for a different N")
        self.grid: CollocationGrid = build_grid(spec)
        self.transform = Transform(self.basis, self.grid)

    @property
    def N(self):
        return self.spec.N

    @property
    def d(self):
        return self.spec.d

    @property
    def shape(self):
        return self.spec.shape

    def coords(self):
        return self.grid.mesh(self.d)

    def forward(self, values):
        return self.transform.forward(values)

    def inverse(self, coeffs):
        return self.transform.inverse(coeffs)

    def forward_species(self, values):
        return self.transform.forward(values, self.d)

    def inverse_species(self, coeffs):
        return self.transform.inverse(coeffs, self.d)


def model_symbols(model: ModelSpec, disc: Discretization) -> np.ndarray:
    return np.stack([build_symbol(op, disc.basis, disc.d) for op in model.operators])


def pseudospectral_rhs(model: ModelSpec, disc: Discretization):
    """N(u, t) in coefficient space: to the grid, react pointwise, back to coefficients."""
    source = None
    if model.kind is ModelKind.ALLEN_CAHN_SOURCED:
        source = manufactured_source(model.manufactured, disc.coords())

    def rhs(coeffs, t):
        values = disc.inverse_species(coeffs)
        return disc.forward_species(reaction_eval(model, values, t, source=source))

    return rhs


def make_stepper(model: ModelSpec, disc: Discretization, tau: float, initial_values, t0: float = 0.0) -> StepperState:
    """Stepper for ``model`` starting from grid values (species on the leading axis)."""
    initial_values = np.asarray(initial_values, dtype=float)
    if initial_values.shape != (model.species,) + disc.shape:
        raise ValueError(f"initial data shape {initial_values.shape} does not match "
                         f"{(model.species,) + disc.shape}")
    return StepperState(
        u=disc.forward_species(initial_values),
        sigma=model_symbols(model, disc),
        tau=tau,
        rhs=pseudospectral_rhs(model, disc),
        t=t0,
    )
