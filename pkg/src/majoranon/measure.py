"""Observables of psi and of its Majorana pair, plus CSV output."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import fields as fl
from .errors import ContractError, MajoranonError
from .fields import MajoranaPair, SpinorField

# x_mean is flagged when the boundary density exceeds this fraction of the peak
BOUNDARY_FRACTION = 1e-6


class OutputError(MajoranonError, OSError):
    """Failure writing an output file."""


@dataclass
class ObservableRecord:
    t: float
    norm: float
    norm_plus: float
    norm_minus: float
    x_mean: tuple[float, ...]
    p_mean: tuple[float, ...]
    pop_up: float
    majorana_defect: float
    cross_inner_im: float
    boundary_warning: bool = False
    # set when psi vanishes and the normalized quantities are NaN
    zero_norm: bool = False


@dataclass
class ObservableSeries:
    records: list[ObservableRecord] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def append(self, rec: ObservableRecord) -> None:
        if self.records and not rec.t > self.records[-1].t:
            raise ValueError("series times must be strictly increasing")
        self.records.append(rec)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def density(f: SpinorField) -> np.ndarray:
    if f.space != fl.POSITION:
        raise ContractError("density needs a position-space field")
    return np.sum(np.abs(f.values) ** 2, axis=0)


def majorana_defect(f: SpinorField) -> float:
    """||psi - psi_c|| / ||psi||; zero exactly for Majorana fields."""
    nrm = fl.norm(f)
    if nrm == 0:
        return math.nan
    return fl.norm(f.with_values(f.values - fl.charge_conjugate(f).values)) / nrm


def _boundary_max(rho: np.ndarray) -> float:
    edges = []
    for axis in range(rho.ndim):
        edges.append(np.take(rho, [0, -1], axis=axis).max())
    return float(max(edges))


def observe(f: SpinorField, pair: Optional[MajoranaPair] = None, t: float = 0.0) -> ObservableRecord:
    """Evaluate the standard observables of ``f`` (and of ``pair`` if given)."""
    if f.space != fl.POSITION:
        raise ContractError("observe needs a position-space field")
    if pair is not None and pair.plus.grid != f.grid:
        raise ContractError("pair and field live on different grids")
    grid = f.grid
    rho = density(f)
    total = float(rho.sum())
    nrm = math.sqrt(total * grid.cell_volume)
    dim = grid.dim

    if pair is not None:
        norm_plus, norm_minus = fl.norm(pair.plus), fl.norm(pair.minus)
        cross = abs(fl.inner(pair.plus, pair.minus).imag)
    else:
        norm_plus = norm_minus = cross = math.nan

    if total == 0:
        nan = (math.nan,) * dim
        return ObservableRecord(t, 0.0, norm_plus, norm_minus, nan, nan, math.nan,
                                math.nan, cross, False, True)

    x_mean = tuple(float(np.sum(x * rho) / total) for x in grid.coords)
    rho_k = np.sum(np.abs(fl.to_momentum(f).values) ** 2, axis=0)
    p_mean = tuple(float(np.sum(p * rho_k) / rho_k.sum()) for p in grid.momenta)
    pop_up = float(np.sum(np.abs(f.values[0]) ** 2) / total)
    warn = _boundary_max(rho) > BOUNDARY_FRACTION * float(rho.max())
    return ObservableRecord(t, nrm, norm_plus, norm_minus, x_mean, p_mean, pop_up,
                            majorana_defect(f), cross, bool(warn))


# -- CSV output --------------------------------------------------------------------


def series_header(dim: int) -> list[str]:
    x_cols = ["x_mean", "y_mean"][:dim]
    p_cols = ["p_mean", "py_mean"][:dim]
    return (["t", "norm", "norm_plus", "norm_minus"] + x_cols + p_cols
            + ["pop_up", "majorana_defect", "cross_inner_im", "boundary_warning"])


def _fmt(v: float) -> str:
    # repr gives the shortest string that round-trips
    return repr(float(v))


def _record_row(r: ObservableRecord) -> list[str]:
    return ([_fmt(r.t), _fmt(r.norm), _fmt(r.norm_plus), _fmt(r.norm_minus)]
            + [_fmt(v) for v in r.x_mean] + [_fmt(v) for v in r.p_mean]
            + [_fmt(r.pop_up), _fmt(r.majorana_defect), _fmt(r.cross_inner_im),
               str(int(r.boundary_warning))])


def _write_rows(path, header: list[str], rows) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def series_to_csv(series: ObservableSeries, path, dim: int | None = None) -> None:
    """Write a series; ``dim`` is only needed for an empty series."""
    if dim is None:
        if series.records:
            dim = len(series.records[0].x_mean)
        else:
            dim = len(series.metadata.get("grid", {}).get("n", [0])) or 1
    _write_rows(path, series_header(dim), (_record_row(r) for r in series.records))


def snapshot_to_csv(f: SpinorField, path) -> None:
    """Write ``x[,y],re1,im1,re2,im2`` rows in row-major point order."""
    if f.space != fl.POSITION:
        raise ContractError("snapshots are written in position space")
    grid = f.grid
    coords = [x.ravel() for x in grid.coords]
    psi1 = f.values[0].ravel()
    psi2 = f.values[1].ravel()
    rows = (
        [_fmt(c[i]) for c in coords]
        + [_fmt(psi1[i].real), _fmt(psi1[i].imag), _fmt(psi2[i].real), _fmt(psi2[i].imag)]
        for i in range(grid.size)
    )
    _write_rows(path, fl.table_header(grid.dim), rows)
