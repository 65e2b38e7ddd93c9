"""Periodic grids, spinor fields and the Majorana decomposition of states.

Field values are stored component-first: a two-component field on a grid
with ``n = (nx,)`` or ``(nx, ny)`` points has ``values.shape == (2, *n)``.
Momentum-space values use numpy's FFT ordering along each axis.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .algebra import CONJ2, SQRT2
from .errors import ConfigError, ContractError

POSITION = "position"
MOMENTUM = "momentum"


@dataclass(frozen=True)
class Grid:
    """Periodic lattice with ``x in [-L/2, L/2)`` along every axis."""

    n: tuple[int, ...]
    length: tuple[float, ...]

    def __post_init__(self):
        if len(self.n) not in (1, 2) or len(self.n) != len(self.length):
            raise ConfigError(
                f"grid must be 1D or 2D with one length per axis, got n={self.n}, "
                f"length={self.length}"
            )

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def size(self) -> int:
        return math.prod(self.n)

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple(L / n for n, L in zip(self.n, self.length))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.dx)

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        """1D coordinate arrays, one per axis."""
        return tuple(-L / 2 + np.arange(n) * (L / n) for n, L in zip(self.n, self.length))

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays broadcast to the full grid shape."""
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def k_axes(self) -> tuple[np.ndarray, ...]:
        """Lattice momenta 2 pi j / L per axis, FFT order, Nyquist at -pi n / L."""
        return tuple(2 * np.pi * np.fft.fftfreq(n, d=L / n) for n, L in zip(self.n, self.length))

    @cached_property
    def p_axes(self) -> tuple[np.ndarray, ...]:
        """Symbol of the momentum operator -i d/dx per axis.

        Identical to ``k_axes`` except at the Nyquist index, where it is 0.
        Only a zero there keeps -i d/dx odd under complex conjugation.
        """
        out = []
        for k in self.k_axes:
            p = k.copy()
            p[len(p) // 2] = 0.0
            out.append(p)
        return tuple(out)

    @cached_property
    def momenta(self) -> np.ndarray:
        """Momentum-operator symbols on the full grid, shape ``(dim, *n)``."""
        return np.stack(np.meshgrid(*self.p_axes, indexing="ij"))

    @cached_property
    def lattice_momenta(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.k_axes, indexing="ij"))


def make_grid(dim: int, n_per_axis: Sequence[int], length_per_axis: Sequence[float]) -> Grid:
    if dim not in (1, 2):
        raise ConfigError(
            f"dimension {dim} unsupported: only 1 or 2 spatial dimensions "
            "(the two-component decomposition does not carry over to 3+1D)"
        )
    n = tuple(int(v) for v in n_per_axis)
    length = tuple(float(v) for v in length_per_axis)
    if len(n) != dim or len(length) != dim:
        raise ConfigError(f"need {dim} point counts and lengths, got n={n}, length={length}")
    for v in n:
        if v < 4 or v % 2:
            raise ConfigError(f"points per axis must be even and >= 4, got {v}")
    for v in length:
        if not (math.isfinite(v) and v > 0):
            raise ConfigError(f"axis length must be positive and finite, got {v}")
    return Grid(n, length)


def _check_values(grid: Grid, values: np.ndarray, ncomp: int) -> None:
    if values.shape != (ncomp,) + grid.shape:
        raise ContractError(
            f"values shape {values.shape} does not match {(ncomp,) + grid.shape}"
        )


@dataclass(frozen=True, eq=False)
class SpinorField:
    grid: Grid
    values: np.ndarray
    space: str = POSITION

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        _check_values(self.grid, values, 2)
        if self.space not in (POSITION, MOMENTUM):
            raise ContractError(f"unknown space {self.space!r}")
        if not np.all(np.isfinite(values)):
            raise ContractError("field has non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def with_values(self, values: np.ndarray, space: str | None = None) -> "SpinorField":
        return SpinorField(self.grid, values, self.space if space is None else space)


@dataclass(frozen=True, eq=False)
class RealField4:
    """Real expansion (Re psi1, Re psi2, Im psi1, Im psi2) of a position-space field."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values)
        if np.iscomplexobj(values):
            raise ContractError("RealField4 values must be real")
        values = values.astype(float)
        _check_values(self.grid, values, 4)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class MajoranaPair:
    plus: SpinorField
    minus: SpinorField
    mass_plus: float | None = None
    mass_minus: float | None = None

    def __post_init__(self):
        _same_layout(self.plus, self.minus)


def _same_layout(a: SpinorField, b: SpinorField) -> None:
    if a.grid != b.grid:
        raise ContractError("fields live on different grids")
    if a.space != b.space:
        raise ContractError(f"fields are in different spaces ({a.space} vs {b.space})")


def _require_position(f: SpinorField) -> None:
    if f.space != POSITION:
        raise ContractError("operation requires a position-space field")


# -- initial states ---------------------------------------------------------


def _spinor2(s) -> np.ndarray:
    arr = np.asarray(s, dtype=complex)
    if arr.shape != (2,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"spinor must be two finite complex numbers, got {s!r}")
    return arr


@dataclass(frozen=True)
class GaussianState:
    """exp(i p0.x) exp(-|x|^2 / (4 delta^2)) times a constant spinor."""

    p0: tuple[float, ...]
    delta: float
    spinor: tuple[complex, complex] = (1, 1)
    normalize: bool = False


@dataclass(frozen=True)
class UniformState:
    spinor: tuple[complex, complex] = (1, 0)
    normalize: bool = False


@dataclass(frozen=True)
class TableState:
    path: Union[str, Path]


InitialState = Union[GaussianState, UniformState, TableState]


def sample_initial(grid: Grid, spec: InitialState) -> SpinorField:
    if isinstance(spec, TableState):
        return read_table(grid, spec.path)
    spinor = _spinor2(spec.spinor)
    if isinstance(spec, GaussianState):
        if not (math.isfinite(spec.delta) and spec.delta > 0):
            raise ConfigError(f"gaussian width must be positive, got {spec.delta}")
        p0 = np.atleast_1d(np.asarray(spec.p0, dtype=float))
        if p0.shape != (grid.dim,) or not np.all(np.isfinite(p0)):
            raise ConfigError(f"p0 must have {grid.dim} finite entries, got {spec.p0!r}")
        r2 = sum(x**2 for x in grid.coords)
        phase = sum(p * x for p, x in zip(p0, grid.coords))
        envelope = np.exp(1j * phase) * np.exp(-r2 / (4 * spec.delta**2))
    elif isinstance(spec, UniformState):
        envelope = np.ones(grid.shape, dtype=complex)
    else:
        raise ConfigError(f"unknown initial-state spec {spec!r}")
    f = SpinorField(grid, spinor.reshape((2,) + (1,) * grid.dim) * envelope[None])
    if spec.normalize:
        nrm = norm(f)
        if nrm == 0:
            raise ConfigError("cannot normalize a zero initial state")
        f = f.with_values(f.values / nrm)
    return f


def table_header(dim: int) -> list[str]:
    return ["x", "y"][:dim] + ["re1", "im1", "re2", "im2"]


def read_table(grid: Grid, path) -> SpinorField:
    """Read a CSV field table (``x[,y],re1,im1,re2,im2``, row-major)."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read table {path}: {exc}") from exc
    expected = table_header(grid.dim)
    if not rows or [h.strip() for h in rows[0]] != expected:
        raise ConfigError(f"{path}: header must be {','.join(expected)}")
    body = rows[1:]
    if len(body) != grid.size:
        raise ConfigError(f"{path}: {len(body)} rows for a grid of {grid.size} points")
    try:
        data = np.array([[float(v) for v in row] for row in body])
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if data.shape[1] != len(expected):
        raise ConfigError(f"{path}: expected {len(expected)} columns")
    for axis, x in enumerate(grid.coords):
        tol = 1e-9 * grid.length[axis]
        if not np.allclose(data[:, axis], x.ravel(), atol=tol, rtol=0):
            raise ConfigError(f"{path}: coordinates on axis {axis} do not match the grid")
    amp = data[:, grid.dim:]
    psi1 = amp[:, 0] + 1j * amp[:, 1]
    psi2 = amp[:, 2] + 1j * amp[:, 3]
    try:
        return SpinorField(grid, np.stack([psi1, psi2]).reshape((2,) + grid.shape))
    except ContractError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# -- conjugation and decomposition -------------------------------------------


def charge_conjugate(f: SpinorField) -> SpinorField:
    """Pointwise psi_c = -i sigma_z sigma_y psi*."""
    _require_position(f)
    return f.with_values(np.einsum("ab,b...->a...", CONJ2, np.conj(f.values)))


def decompose_majorana(f: SpinorField) -> MajoranaPair:
    """Split psi into Majorana fields with psi = (psi_plus + i psi_minus) / sqrt 2.

    psi_plus = (psi + psi_c) / sqrt 2 and psi_minus = -i (psi - psi_c) / sqrt 2.
    """
    _require_position(f)
    conj = charge_conjugate(f).values
    plus = (f.values + conj) / SQRT2
    minus = -1j * (f.values - conj) / SQRT2
    return MajoranaPair(f.with_values(plus), f.with_values(minus))


def reconstruct(pair: MajoranaPair) -> SpinorField:
    return pair.plus.with_values((pair.plus.values + 1j * pair.minus.values) / SQRT2)


def real_expand(f: SpinorField) -> RealField4:
    _require_position(f)
    return RealField4(f.grid, np.concatenate([f.values.real, f.values.imag]))


def real_contract(r: RealField4) -> SpinorField:
    return SpinorField(r.grid, r.values[:2] + 1j * r.values[2:])


# -- Fourier transforms and quadrature ---------------------------------------


def _spatial_axes(grid: Grid) -> tuple[int, ...]:
    return tuple(range(1, grid.dim + 1))


def to_momentum(f: SpinorField) -> SpinorField:
    """Unitary DFT of each spinor component (1/sqrt(n) per axis)."""
    if f.space != POSITION:
        raise ContractError("field is already in momentum space")
    vals = np.fft.fftn(f.values, axes=_spatial_axes(f.grid), norm="ortho")
    return f.with_values(vals, MOMENTUM)


def to_position(f: SpinorField) -> SpinorField:
    if f.space != MOMENTUM:
        raise ContractError("field is already in position space")
    vals = np.fft.ifftn(f.values, axes=_spatial_axes(f.grid), norm="ortho")
    return f.with_values(vals, POSITION)


def inner(a: SpinorField, b: SpinorField) -> complex:
    """Riemann-sum inner product sum conj(a) b dV (the same weight in both spaces)."""
    _same_layout(a, b)
    return complex(np.vdot(a.values, b.values) * a.grid.cell_volume)


def norm(f: SpinorField) -> float:
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.grid.cell_volume))


def zeros_like(f: SpinorField) -> SpinorField:
    return f.with_values(np.zeros_like(f.values))


def uniform_field(grid: Grid, spinor) -> SpinorField:
    return sample_initial(grid, UniformState(tuple(_spinor2(spinor))))
