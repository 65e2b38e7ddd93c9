"""Dense oracle: assemble the full real generator and exponentiate it.

This path shares no propagation code with the per-mode backends.  The
derivative is the closed-form periodic spectral differentiation matrix
(no FFT), the generator is split into real and imaginary parts entrywise in
position space, and the exponential is a scaling-and-squaring Padé
approximant.  Dense vectors are ordered ``[Re psi1, Re psi2, Im psi1,
Im psi2]``, each block a row-major flattening of the grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fields as fl
from .algebra import SIGMA_X, SIGMA_Y
from .dynamics import EquationKind
from .errors import ContractError, NumericError, ResourceError
from .fields import Grid, SpinorField

DEFAULT_ORACLE_CAP = 4096


def _derivative_1d(n: int, length: float) -> np.ndarray:
    """Periodic spectral derivative for even ``n``.

    ``D[i, j] = (pi / L) (-1)^(i-j) cot(pi (i - j) / n)`` off the diagonal;
    the Nyquist mode is mapped to zero.
    """
    idx = np.arange(n)
    diff = idx[:, None] - idx[None, :]
    out = np.zeros((n, n))
    off = diff != 0
    sign = np.where(diff % 2 == 0, 1.0, -1.0)
    out[off] = (np.pi / length) * sign[off] / np.tan(np.pi * diff[off] / n)
    return out


def spectral_derivative(grid: Grid, axis: int) -> np.ndarray:
    """Full-grid real matrix of d/dx_axis acting on row-major samples."""
    if not 0 <= axis < grid.dim:
        raise ValueError(f"axis {axis} out of range for a {grid.dim}D grid")
    mats = [np.eye(n) for n in grid.n]
    mats[axis] = _derivative_1d(grid.n[axis], grid.length[axis])
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


@dataclass(frozen=True, eq=False)
class DenseGenerator:
    matrix: np.ndarray
    kind: EquationKind
    grid: Grid


def _check_cap(grid: Grid, cap: int) -> None:
    if grid.size > cap:
        raise ResourceError(
            f"dense oracle limited to {cap} grid points, grid has {grid.size}"
        )


def dense_generator(grid: Grid, kind: EquationKind, cap: int = DEFAULT_ORACLE_CAP) -> DenseGenerator:
    """Real matrix G with dPsi/dt = G Psi on the whole grid."""
    _check_cap(grid, cap)
    npts = grid.size
    eye = np.eye(npts)
    # D = ks sum_j sigma_j (x) (-i d_j) + M (x) 1
    lin = np.kron(kind.mass_matrix(), eye)
    for axis, sigma in zip(range(grid.dim), (SIGMA_X, SIGMA_Y)):
        lin = lin + kind.kinetic_sign * np.kron(sigma, -1j * spectral_derivative(grid, axis))
    a = -1j * lin
    b = np.kron(-1j * kind.conjugate_coefficient(), eye)
    a_r, a_i = a.real, a.imag
    b_r, b_i = b.real, b.imag
    g = np.block([[a_r + b_r, -a_i + b_i], [a_i + b_i, a_r - b_r]])
    return DenseGenerator(g, kind, grid)


# Padé(13) coefficients and theta_13 from Higham (2005).
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a fixed Padé(13) approximant."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expm needs a square matrix")
    if not np.all(np.isfinite(a)):
        raise NumericError("expm input has non-finite entries")
    norm1 = np.abs(a).sum(axis=0).max() if a.size else 0.0
    if norm1 == 0:
        return np.eye(a.shape[0], dtype=a.dtype)
    s = max(0, int(np.ceil(np.log2(norm1 / _THETA13))))
    a = a / 2.0**s
    b = _PADE13
    ident = np.eye(a.shape[0], dtype=a.dtype)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
         + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


class DensePropagator:
    """Fixed-time dense propagator exp(G t) applied to position-space fields."""

    def __init__(self, grid: Grid, kind: EquationKind, t: float, cap: int = DEFAULT_ORACLE_CAP):
        self.grid = grid
        self.generator = dense_generator(grid, kind, cap)
        self.matrix = expm(self.generator.matrix * float(t))
        if not np.all(np.isfinite(self.matrix)):
            raise NumericError("dense propagator has non-finite entries")

    def __call__(self, f: SpinorField) -> SpinorField:
        if f.grid != self.grid:
            raise ContractError("field grid does not match the oracle grid")
        psi4 = fl.real_expand(f).values
        out = (self.matrix @ psi4.ravel()).reshape(psi4.shape)
        if not np.all(np.isfinite(out)):
            raise NumericError("dense evolution produced non-finite values")
        return fl.real_contract(fl.RealField4(self.grid, out))


def dense_propagator(grid: Grid, kind: EquationKind, t: float, cap: int = DEFAULT_ORACLE_CAP) -> DensePropagator:
    return DensePropagator(grid, kind, t, cap)


def dense_evolve(f: SpinorField, kind: EquationKind, t: float, cap: int = DEFAULT_ORACLE_CAP) -> SpinorField:
    return DensePropagator(f.grid, kind, t, cap)(f)
