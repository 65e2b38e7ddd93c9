"""Time evolution backends.

All equations handled here have constant coefficients on a periodic grid,
so every backend propagates exactly: each Fourier mode is advanced by the
exponential of its small generator.  ``dt`` therefore only sets the
recording resolution, never the accuracy.

Backends
--------
decomposed
    Split psi into two Majorana fields and evolve each with a 2x2 Dirac
    propagator (masses +m / -m, or m_D +- m_M), then recombine.
expanded
    Evolve the real 4-vector (Re psi, Im psi) with the per-mode 4x4
    generator of the antilinear equation.
oracle
    Dense exponential of the full real generator (see ``reference``).
"""
from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.linalg import expm as _scipy_expm

from . import fields as fl
from .algebra import (
    SIGMA_Y,
    SIGMA_Z,
    SQRT2,
    antilinear_generator_mode,
    dirac_mode_hamiltonian,
    expm_antihermitian,
    expm_hermitian2,
    is_hermitian,
    sigma_dot_p,
)
from .errors import ConfigError, ContractError, NumericError
from .fields import Grid, MajoranaPair, SpinorField

# -- equation kinds ------------------------------------------------------------


def _unit_sign(value, name: str) -> int:
    if value not in (1, -1):
        raise ConfigError(f"{name} must be +1 or -1, got {value!r}")
    return int(value)


def _finite(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise ConfigError(f"{name} must be finite")
    return value


@dataclass(frozen=True)
class Weyl:
    name = "weyl"

    kinetic_sign: int = 1

    def mass_matrix(self) -> np.ndarray:
        return np.zeros((2, 2), dtype=complex)

    def conjugate_coefficient(self) -> np.ndarray:
        return np.zeros((2, 2), dtype=complex)


@dataclass(frozen=True)
class Dirac:
    name = "dirac"

    m: float
    mass_sign: int = 1
    kinetic_sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "m", _finite(self.m, "m"))
        _unit_sign(self.mass_sign, "mass_sign")
        _unit_sign(self.kinetic_sign, "kinetic_sign")

    def mass_matrix(self) -> np.ndarray:
        return self.mass_sign * self.m * SIGMA_Z

    def conjugate_coefficient(self) -> np.ndarray:
        return np.zeros((2, 2), dtype=complex)


@dataclass(frozen=True)
class Majorana:
    """i dpsi/dt = (sigma . p) psi - i m sigma_y psi*."""

    name = "majorana"

    m: float

    def __post_init__(self):
        object.__setattr__(self, "m", _finite(self.m, "m"))

    @property
    def kinetic_sign(self) -> int:
        return 1

    def mass_matrix(self) -> np.ndarray:
        return np.zeros((2, 2), dtype=complex)

    def conjugate_coefficient(self) -> np.ndarray:
        return -1j * self.m * SIGMA_Y


@dataclass(frozen=True)
class DiracMajorana:
    """Dirac mass m_D sigma_z psi plus Majorana mass -i m_M sigma_y psi*."""

    name = "dirac_majorana"

    m_D: float
    m_M: float

    def __post_init__(self):
        object.__setattr__(self, "m_D", _finite(self.m_D, "m_D"))
        object.__setattr__(self, "m_M", _finite(self.m_M, "m_M"))

    @property
    def kinetic_sign(self) -> int:
        return 1

    def mass_matrix(self) -> np.ndarray:
        return self.m_D * SIGMA_Z

    def conjugate_coefficient(self) -> np.ndarray:
        return -1j * self.m_M * SIGMA_Y


@dataclass(frozen=True, eq=False)
class Custom:
    """i dpsi/dt = (ks sigma . p + M) psi + K psi* with constant M (Hermitian) and K."""

    name = "custom"

    mass: np.ndarray
    K: np.ndarray
    kinetic_sign: int = 1

    def __post_init__(self):
        mass = np.array(self.mass, dtype=complex)
        K = np.array(self.K, dtype=complex)
        if mass.shape != (2, 2) or K.shape != (2, 2):
            raise ValueError("custom mass and K must be 2x2 matrices")
        if not (np.all(np.isfinite(mass)) and np.all(np.isfinite(K))):
            raise ValueError("custom mass and K must be finite")
        if not is_hermitian(mass):
            raise ValueError("custom linear symbol must be Hermitian")
        _unit_sign(self.kinetic_sign, "kinetic_sign")
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "K", K)

    def mass_matrix(self) -> np.ndarray:
        return self.mass.copy()

    def conjugate_coefficient(self) -> np.ndarray:
        return self.K.copy()


EquationKind = Union[Weyl, Dirac, Majorana, DiracMajorana, Custom]


def linear_symbol(kind: EquationKind) -> Callable[[np.ndarray], np.ndarray]:
    """Fourier symbol ``k -> ks (sigma . k) + M`` of the linear part of ``kind``."""
    ks = kind.kinetic_sign
    mass = kind.mass_matrix()

    def symbol(k: np.ndarray) -> np.ndarray:
        return ks * sigma_dot_p(k) + mass

    return symbol


def describe(kind: EquationKind) -> dict:
    out = {"kind": kind.name}
    if isinstance(kind, Custom):
        out.update(
            mass=[[[z.real, z.imag] for z in row] for row in kind.mass],
            K=[[[z.real, z.imag] for z in row] for row in kind.K],
            kinetic_sign=kind.kinetic_sign,
        )
    else:
        out.update({f: getattr(kind, f) for f in kind.__dataclass_fields__})
    return out


class Backend(str, enum.Enum):
    DECOMPOSED = "decomposed"
    EXPANDED = "expanded"
    ORACLE = "oracle"


# -- per-mode machinery ----------------------------------------------------------


def _mode_matrices(grid: Grid, build: Callable[[np.ndarray], np.ndarray], workers: int) -> np.ndarray:
    """Evaluate ``build`` on all grid momenta, flattened to ``(modes, n, n)``."""
    k = grid.momenta.reshape(grid.dim, -1)
    chunks = _chunks(k.shape[1], workers)
    if len(chunks) == 1:
        return build(k)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda sl: build(k[:, sl]), chunks))
    return np.concatenate(parts)


def _chunks(n_modes: int, workers: int) -> list[slice]:
    workers = max(1, int(workers))
    bounds = np.linspace(0, n_modes, min(workers, n_modes) + 1).astype(int)
    return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]


def _apply_modes(props: np.ndarray, vec: np.ndarray, workers: int) -> np.ndarray:
    """Batched matrix-vector product ``props[j] @ vec[:, j]`` over modes."""
    out = np.empty_like(vec)
    chunks = _chunks(vec.shape[1], workers)

    def run(sl: slice) -> None:
        out[:, sl] = np.einsum("jab,bj->aj", props[sl], vec[:, sl])

    if len(chunks) == 1:
        run(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, chunks))
    return out


def _check_finite(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericError(f"non-finite values in {what}")


def _check_dim(grid: Grid) -> None:
    if grid.dim not in (1, 2):
        raise ContractError(f"evolution supports 1 or 2 spatial dimensions, not {grid.dim}")


class DiracPropagator:
    """exp(-i H(k) t) per mode for H = ks (sigma . k) + ms m sigma_z."""

    def __init__(self, grid: Grid, m: float, mass_sign: int, kinetic_sign: int, t: float,
                 workers: int = 1):
        _check_dim(grid)
        self.grid = grid
        self.workers = workers
        self.matrices = _mode_matrices(
            grid,
            lambda k: expm_hermitian2(dirac_mode_hamiltonian(k, m, mass_sign, kinetic_sign), t),
            workers,
        )

    def __call__(self, f: SpinorField) -> SpinorField:
        if f.grid != self.grid:
            raise ContractError("field grid does not match the propagator grid")
        space = f.space
        spec = fl.to_momentum(f) if space == fl.POSITION else f
        vec = spec.values.reshape(2, -1)
        out = _apply_modes(self.matrices, vec, self.workers).reshape(spec.values.shape)
        _check_finite(out, "Dirac propagation")
        res = spec.with_values(out)
        return fl.to_position(res) if space == fl.POSITION else res


def evolve_dirac(f: SpinorField, m: float, mass_sign: int = 1, kinetic_sign: int = 1,
                 t: float = 0.0, workers: int = 1) -> SpinorField:
    """Exact Dirac evolution; the result is returned in the input's space."""
    return DiracPropagator(f.grid, m, mass_sign, kinetic_sign, float(t), workers)(f)


class PairPropagator:
    """Evolve a Majorana pair: each member under its own Dirac Hamiltonian.

    ``mass_plus`` and ``mass_minus`` are signed masses multiplying sigma_z.
    """

    def __init__(self, grid: Grid, mass_plus: float, mass_minus: float, t: float,
                 kinetic_sign: int = 1, workers: int = 1):
        self.mass_plus = float(mass_plus)
        self.mass_minus = float(mass_minus)
        self.plus = DiracPropagator(grid, self.mass_plus, 1, kinetic_sign, t, workers)
        self.minus = DiracPropagator(grid, self.mass_minus, 1, kinetic_sign, t, workers)

    def __call__(self, pair: MajoranaPair) -> MajoranaPair:
        return MajoranaPair(self.plus(pair.plus), self.minus(pair.minus),
                            self.mass_plus, self.mass_minus)


def split_masses(kind: EquationKind) -> tuple[float, float]:
    """Signed sigma_z masses of the two Majorana components of ``kind``."""
    if isinstance(kind, Majorana):
        return kind.m, -kind.m
    if isinstance(kind, DiracMajorana):
        return kind.m_D + kind.m_M, kind.m_D - kind.m_M
    if isinstance(kind, Dirac):
        # A plain Dirac mass acts identically on both components.
        m = kind.mass_sign * kind.m
        return m, m
    if isinstance(kind, Weyl):
        return 0.0, 0.0
    raise ContractError(f"equation kind {kind.name!r} has no Majorana decomposition")


def evolve_dirac_majorana_decomposed(f: SpinorField, m_D: float, m_M: float, t: float,
                                     kinetic_sign: int = 1, workers: int = 1):
    """Evolve via the Majorana components with masses m_D + m_M and m_D - m_M.

    Returns ``(psi_t, pair_t)``.
    """
    pair = fl.decompose_majorana(f)
    prop = PairPropagator(f.grid, m_D + m_M, m_D - m_M, float(t), kinetic_sign, workers)
    evolved = prop(pair)
    return fl.reconstruct(evolved), evolved


def evolve_majorana_decomposed(f: SpinorField, m: float, t: float, kinetic_sign: int = 1,
                               workers: int = 1):
    """Evolve the Majorana equation through two Dirac equations with masses +m and -m.

    ``kinetic_sign = -1`` reproduces the flipped kinetic term and is only
    useful to show that it breaks the equivalence.  Returns
    ``(psi_t, pair_t)``.
    """
    return evolve_dirac_majorana_decomposed(f, 0.0, m, t, kinetic_sign, workers)


class ExpandedPropagator:
    """Per-mode exp(G(k) t) acting on the Fourier transform of the real 4-vector."""

    def __init__(self, grid: Grid, kind: EquationKind, t: float, workers: int = 1):
        _check_dim(grid)
        self.grid = grid
        self.workers = workers
        symbol = linear_symbol(kind)
        K = kind.conjugate_coefficient()
        antisym_K = np.allclose(K, -K.T, atol=1e-14, rtol=0)

        def build(k: np.ndarray) -> np.ndarray:
            g = antilinear_generator_mode(symbol, K, k)
            if antisym_K:
                return expm_antihermitian(g, t)
            return _scipy_expm(g * t)

        self.matrices = _mode_matrices(grid, build, workers)

    def raw(self, f: SpinorField) -> np.ndarray:
        """Evolved real 4-vector as a complex array, imaginary part kept."""
        if f.grid != self.grid:
            raise ContractError("field grid does not match the propagator grid")
        psi4 = fl.real_expand(f).values
        axes = tuple(range(1, self.grid.dim + 1))
        spec = np.fft.fftn(psi4, axes=axes, norm="ortho").reshape(4, -1)
        out = _apply_modes(self.matrices, spec, self.workers).reshape(psi4.shape)
        out = np.fft.ifftn(out, axes=axes, norm="ortho")
        _check_finite(out, "expanded propagation")
        return out

    def __call__(self, f: SpinorField) -> SpinorField:
        return fl.real_contract(fl.RealField4(self.grid, self.raw(f).real))


def propagate_expanded_raw(f: SpinorField, kind: EquationKind, t: float) -> np.ndarray:
    """Expanded-backend result before discarding the (roundoff) imaginary part."""
    return ExpandedPropagator(f.grid, kind, float(t)).raw(f)


def evolve_expanded(f: SpinorField, kind: EquationKind, t: float, workers: int = 1) -> SpinorField:
    return ExpandedPropagator(f.grid, kind, float(t), workers)(f)


def rest_frame_solution(spinor0, m: float, t: float) -> np.ndarray:
    """Closed-form zero-momentum Majorana evolution of a single spinor."""
    s = np.asarray(spinor0, dtype=complex)
    if s.shape != (2,) or not np.all(np.isfinite(s)):
        raise ValueError("spinor0 must be two finite complex numbers")
    s_c = np.array([-np.conj(s[1]), -np.conj(s[0])])
    plus = (s + s_c) / SQRT2
    minus = -1j * (s - s_c) / SQRT2
    phase = np.exp(-1j * m * t * np.array([1.0, -1.0]))
    return (phase * plus + 1j * np.conj(phase) * minus) / SQRT2


# -- stepping and recording -------------------------------------------------------


class Stepper:
    """Single exact step of duration ``dt`` for a given kind and backend.

    ``step`` maps ``(psi, pair)`` to ``(psi, pair)``; ``pair`` is ``None``
    for backends that do not carry a decomposition.
    """

    def __init__(self, grid: Grid, kind: EquationKind, backend: Backend | str, dt: float,
                 workers: int = 1, kinetic_sign: int = 1, oracle_cap: int | None = None):
        self.grid = grid
        self.kind = kind
        self.backend = Backend(backend)
        self.dt = float(dt)
        if self.backend is Backend.DECOMPOSED:
            mass_plus, mass_minus = split_masses(kind)
            self._pair_prop = PairPropagator(grid, mass_plus, mass_minus, self.dt,
                                             kinetic_sign * kind.kinetic_sign, workers)
        elif self.backend is Backend.EXPANDED:
            self._prop = ExpandedPropagator(grid, kind, self.dt, workers)
        else:
            from .reference import DEFAULT_ORACLE_CAP, dense_propagator

            cap = DEFAULT_ORACLE_CAP if oracle_cap is None else oracle_cap
            self._prop = dense_propagator(grid, kind, self.dt, cap=cap)

    def start(self, f: SpinorField):
        if self.backend is Backend.DECOMPOSED:
            return f, fl.decompose_majorana(f)
        return f, None

    def step(self, f: SpinorField, pair: MajoranaPair | None):
        if self.backend is Backend.DECOMPOSED:
            pair = self._pair_prop(pair)
            return fl.reconstruct(pair), pair
        return self._prop(f), None


def evolve(f: SpinorField, kind: EquationKind, backend: Backend | str, t: float,
           workers: int = 1, oracle_cap: int | None = None) -> SpinorField:
    """One-shot evolution by time ``t`` with any backend."""
    stepper = Stepper(f.grid, kind, backend, t, workers=workers, oracle_cap=oracle_cap)
    psi, pair = stepper.start(f)
    return stepper.step(psi, pair)[0]


Observer = Callable[[float, SpinorField, Optional[MajoranaPair]], object]


def evolve_recorded(
    f: SpinorField,
    kind: EquationKind,
    backend: Backend | str,
    dt: float,
    steps: int,
    record_every: int = 1,
    observers: Sequence[Observer] | None = None,
    on_record: Callable[[int, float, SpinorField, MajoranaPair], None] | None = None,
    workers: int = 1,
    kinetic_sign: int = 1,
    oracle_cap: int | None = None,
):
    """Evolve in exact steps of ``dt`` and record observables.

    Records are taken at t = 0 and after every ``record_every`` steps.  Each
    observer is called as ``observer(t, psi, pair)``; when the backend does
    not carry a Majorana pair, the pair of the current state is passed.

    Returns ``(series, final_field)`` where ``series`` is an
    ``ObservableSeries`` (when ``observers`` is None, ``measure.observe`` is
    used) or, for custom observers, a list of ``(t, outputs)`` tuples.
    On non-finite values a ``NumericError`` is raised whose ``partial``
    attribute holds the records collected so far.
    """
    from .measure import ObservableSeries, observe

    if not (np.isfinite(dt) and dt > 0):
        raise ConfigError(f"dt must be positive, got {dt}")
    if steps < 0:
        raise ConfigError(f"steps must be >= 0, got {steps}")
    if record_every < 1:
        raise ConfigError(f"record_every must be >= 1, got {record_every}")

    default = observers is None
    meta = {"kind": describe(kind), "backend": Backend(backend).value,
            "grid": {"n": list(f.grid.n), "length": list(f.grid.length)}}
    records = ObservableSeries(metadata=meta) if default else []

    def record(index: int, t: float, psi: SpinorField, pair: MajoranaPair | None) -> None:
        if pair is None:
            pair = fl.decompose_majorana(psi)
        if default:
            records.append(observe(psi, pair, t=t))
        else:
            records.append((t, [obs(t, psi, pair) for obs in observers]))
        if on_record is not None:
            on_record(index, t, psi, pair)

    stepper = Stepper(f.grid, kind, backend, dt, workers=workers,
                      kinetic_sign=kinetic_sign, oracle_cap=oracle_cap)
    psi, pair = stepper.start(f)
    record(0, 0.0, psi, pair)
    n_rec = 1
    for i in range(1, steps + 1):
        try:
            psi, pair = stepper.step(psi, pair)
        except (NumericError, ContractError) as exc:
            raise NumericError(f"step {i}: {exc}", partial=records) from exc
        if i % record_every == 0:
            record(n_rec, i * dt, psi, pair)
            n_rec += 1
    return records, psi
