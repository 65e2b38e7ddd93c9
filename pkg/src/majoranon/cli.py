"""Command-line driver.

    majoranon simulate  --config run.json [--backend B] [--quiet]
    majoranon decompose --config run.json [--quiet]
    majoranon check     --config run.json [--debug-flip-kinetic-sign] [--quiet]
    majoranon spectrum  --mass M K [K ...]

Exit codes: 0 success, 2 configuration, 3 numeric failure, 4 I/O,
5 validation mismatch.
"""
from __future__ import annotations

import argparse
import json
import platform
import re
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import scipy

from . import __version__
from . import fields as fl
from . import measure as ms
from .algebra import (
    decoupled_mode_hamiltonian,
    decoupling_unitary,
    dirac_mode_hamiltonian,
    eigvalsh_sorted,
    majorana_mode_hamiltonian,
    majorana_rep_mode_hamiltonian,
)
from .dynamics import (
    Backend,
    Custom,
    Dirac,
    DiracMajorana,
    EquationKind,
    Majorana,
    Weyl,
    evolve,
    evolve_recorded,
)
from .errors import ConfigError, NumericError, ResourceError
from .reference import dense_evolve

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO, EXIT_MISMATCH = 0, 2, 3, 4, 5

CHECK_TOL = 1e-10
SPECTRUM_TOL = 1e-12

CONVENTIONS = {
    "units": "hbar = c = 1",
    "charge_conjugation": "psi_c = -i sigma_z sigma_y conj(psi)",
    "decomposition": "psi_plus = (psi + psi_c)/sqrt2, psi_minus = -i (psi - psi_c)/sqrt2",
    "reconstruction": "psi = (psi_plus + i psi_minus)/sqrt2",
    "majorana_equation": "i dpsi/dt = (sigma . p) psi - i m sigma_y conj(psi)",
    "decomposed_hamiltonians": "H_pm = kinetic_sign (sigma . p) + m_pm sigma_z",
    "fourier": "unitary DFT, 1/sqrt(n) per axis, numpy FFT mode order",
    "nyquist": "lattice label -pi n/L; momentum-operator symbol 0 at the Nyquist index",
    "real_expansion": "(Re psi1, Re psi2, Im psi1, Im psi2)",
}


# -- configuration -------------------------------------------------------------------


@dataclass
class SimulationConfig:
    dimension: int
    equation: EquationKind
    grid: fl.Grid
    initial: fl.InitialState
    backend: Backend
    dt: float
    steps: int
    record_every: int
    series_path: Path
    snapshot_pattern: str | None
    metadata_path: Path
    oracle_cap: int
    workers: int
    resolved: dict


class _Reader:
    """Validates a parsed JSON document and reports errors with line numbers."""

    def __init__(self, text: str, source: str):
        self.lines = text.splitlines()
        self.source = source

    def line_of(self, key: str) -> int:
        pat = re.compile(r'"%s"\s*:' % re.escape(key))
        for i, line in enumerate(self.lines, 1):
            if pat.search(line):
                return i
        return 1

    def fail(self, where: str, message: str) -> ConfigError:
        key = where.split(".")[-1] if where else ""
        line = self.line_of(key) if key else 1
        return ConfigError(f"{self.source}:{line}: {where or '<root>'}: {message}")

    def section(self, obj: Any, where: str, required: set, optional: dict) -> dict:
        if not isinstance(obj, dict):
            raise self.fail(where, "expected an object")
        unknown = sorted(set(obj) - required - set(optional))
        if unknown:
            raise self.fail(f"{where}.{unknown[0]}".lstrip("."), "unknown key")
        missing = sorted(required - set(obj))
        if missing:
            raise self.fail(where, f"missing key {missing[0]!r}")
        out = dict(optional)
        out.update(obj)
        return out

    def number(self, value: Any, where: str, positive: bool = False) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.fail(where, f"expected a number, got {value!r}")
        value = float(value)
        if not np.isfinite(value):
            raise self.fail(where, "must be finite")
        if positive and value <= 0:
            raise self.fail(where, f"must be positive, got {value}")
        return value

    def integer(self, value: Any, where: str, minimum: int | None = None) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.fail(where, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise self.fail(where, f"must be >= {minimum}, got {value}")
        return value

    def sign(self, value: Any, where: str) -> int:
        if value not in (1, -1) or isinstance(value, bool):
            raise self.fail(where, f"must be +1 or -1, got {value!r}")
        return int(value)

    def complex_(self, value: Any, where: str) -> complex:
        if isinstance(value, list) and len(value) == 2:
            return complex(self.number(value[0], where), self.number(value[1], where))
        return complex(self.number(value, where))

    def vector(self, value: Any, where: str, length: int) -> list:
        if not isinstance(value, list) or len(value) != length:
            raise self.fail(where, f"expected a list of {length} entries")
        return value

    def matrix2(self, value: Any, where: str) -> np.ndarray:
        rows = self.vector(value, where, 2)
        return np.array([[self.complex_(v, where) for v in self.vector(r, where, 2)] for r in rows])


def _encode_complex(z: complex):
    return [z.real, z.imag] if z.imag else z.real


def _parse_equation(rd: _Reader, obj: Any, dim: int) -> tuple[EquationKind, dict]:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise rd.fail("equation", "expected an object with a 'kind'")
    kind = obj["kind"]
    try:
        if kind == "weyl":
            sec = rd.section(obj, "equation", {"kind"}, {"kinetic_sign": 1})
            eq = Weyl(rd.sign(sec["kinetic_sign"], "equation.kinetic_sign"))
        elif kind == "dirac":
            sec = rd.section(obj, "equation", {"kind", "m"}, {"mass_sign": 1, "kinetic_sign": 1})
            eq = Dirac(rd.number(sec["m"], "equation.m"),
                       rd.sign(sec["mass_sign"], "equation.mass_sign"),
                       rd.sign(sec["kinetic_sign"], "equation.kinetic_sign"))
        elif kind == "majorana":
            sec = rd.section(obj, "equation", {"kind", "m"}, {})
            eq = Majorana(rd.number(sec["m"], "equation.m"))
        elif kind == "dirac_majorana":
            sec = rd.section(obj, "equation", {"kind", "m_D", "m_M"}, {})
            eq = DiracMajorana(rd.number(sec["m_D"], "equation.m_D"),
                               rd.number(sec["m_M"], "equation.m_M"))
        elif kind == "custom":
            sec = rd.section(obj, "equation", {"kind", "mass", "K"}, {"kinetic_sign": 1})
            mass = rd.matrix2(sec["mass"], "equation.mass")
            K = rd.matrix2(sec["K"], "equation.K")
            try:
                eq = Custom(mass, K, rd.sign(sec["kinetic_sign"], "equation.kinetic_sign"))
            except ValueError as exc:
                raise rd.fail("equation.mass", str(exc)) from None
            sec = dict(sec, mass=[[_encode_complex(z) for z in r] for r in mass],
                       K=[[_encode_complex(z) for z in r] for r in K])
        else:
            raise rd.fail("equation.kind", f"unknown equation kind {kind!r}")
    except ConfigError as exc:
        if str(exc).startswith(rd.source):
            raise
        raise rd.fail("equation", str(exc)) from None
    return eq, sec


def _parse_initial(rd: _Reader, obj: Any, dim: int, base: Path) -> tuple[fl.InitialState, dict]:
    if not isinstance(obj, dict) or "type" not in obj:
        raise rd.fail("initial", "expected an object with a 'type'")
    kind = obj["type"]
    if kind == "gaussian":
        sec = rd.section(obj, "initial", {"type", "p0", "delta", "spinor"}, {"normalize": False})
        p0 = sec["p0"] if isinstance(sec["p0"], list) else [sec["p0"]]
        p0 = [rd.number(v, "initial.p0") for v in rd.vector(p0, "initial.p0", dim)]
        delta = rd.number(sec["delta"], "initial.delta", positive=True)
        spinor = [rd.complex_(v, "initial.spinor") for v in rd.vector(sec["spinor"], "initial.spinor", 2)]
        if not isinstance(sec["normalize"], bool):
            raise rd.fail("initial.normalize", "expected true or false")
        spec = fl.GaussianState(tuple(p0), delta, tuple(spinor), sec["normalize"])
        sec = dict(sec, p0=p0, spinor=[_encode_complex(z) for z in spinor])
    elif kind == "uniform":
        sec = rd.section(obj, "initial", {"type", "spinor"}, {"normalize": False})
        spinor = [rd.complex_(v, "initial.spinor") for v in rd.vector(sec["spinor"], "initial.spinor", 2)]
        if not isinstance(sec["normalize"], bool):
            raise rd.fail("initial.normalize", "expected true or false")
        spec = fl.UniformState(tuple(spinor), sec["normalize"])
        sec = dict(sec, spinor=[_encode_complex(z) for z in spinor])
    elif kind == "table":
        sec = rd.section(obj, "initial", {"type", "path"}, {})
        if not isinstance(sec["path"], str):
            raise rd.fail("initial.path", "expected a string")
        spec = fl.TableState(base / sec["path"])
    else:
        raise rd.fail("initial.type", f"unknown initial state type {kind!r}")
    return spec, sec


def parse_config(path) -> SimulationConfig:
    """Load and validate a JSON run configuration.

    Relative paths inside the document are resolved against its directory.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: malformed JSON: {exc.msg}") from None
    rd = _Reader(text, str(path))
    base = path.parent

    top = rd.section(
        doc, "",
        {"dimension", "equation", "grid", "initial", "time"},
        {"backend": "decomposed", "output": {}, "oracle_cap": 4096, "workers": 1},
    )
    dim = rd.integer(top["dimension"], "dimension")
    if dim not in (1, 2):
        raise rd.fail("dimension", f"{dim} not supported: only 1+1D and 2+1D are simulated; "
                                   "the two-component decomposition does not work in 3+1D")

    eq, eq_sec = _parse_equation(rd, top["equation"], dim)

    gsec = rd.section(top["grid"], "grid", {"n", "length"}, {})
    n = [rd.integer(v, "grid.n") for v in rd.vector(gsec["n"], "grid.n", dim)]
    length = [rd.number(v, "grid.length", positive=True)
              for v in rd.vector(gsec["length"], "grid.length", dim)]
    try:
        grid = fl.make_grid(dim, n, length)
    except ConfigError as exc:
        raise rd.fail("grid.n", str(exc)) from None

    initial, init_sec = _parse_initial(rd, top["initial"], dim, base)

    if top["backend"] not in [b.value for b in Backend]:
        raise rd.fail("backend", f"unknown backend {top['backend']!r}")
    backend = Backend(top["backend"])

    tsec = rd.section(top["time"], "time", {"dt", "steps"}, {"record_every": 1})
    dt = rd.number(tsec["dt"], "time.dt", positive=True)
    steps = rd.integer(tsec["steps"], "time.steps", minimum=0)
    record_every = rd.integer(tsec["record_every"], "time.record_every", minimum=1)

    osec = rd.section(top["output"], "output", set(),
                      {"series": "series.csv", "snapshots": None, "metadata": "metadata.json"})
    for key in ("series", "metadata"):
        if not isinstance(osec[key], str):
            raise rd.fail(f"output.{key}", "expected a path string")
    if osec["snapshots"] is not None and not isinstance(osec["snapshots"], str):
        raise rd.fail("output.snapshots", "expected a path pattern or null")

    oracle_cap = rd.integer(top["oracle_cap"], "oracle_cap", minimum=1)
    workers = rd.integer(top["workers"], "workers", minimum=1)

    resolved = {
        "dimension": dim,
        "equation": eq_sec,
        "grid": {"n": n, "length": length},
        "initial": init_sec,
        "backend": backend.value,
        "time": {"dt": dt, "steps": steps, "record_every": record_every},
        "output": osec,
        "oracle_cap": oracle_cap,
        "workers": workers,
    }
    snapshots = None if osec["snapshots"] is None else str(base / osec["snapshots"])
    return SimulationConfig(dim, eq, grid, initial, backend, dt, steps, record_every,
                            base / osec["series"], snapshots, base / osec["metadata"],
                            oracle_cap, workers, resolved)


# -- helpers -----------------------------------------------------------------------


class _Console:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def __call__(self, *args) -> None:
        if not self.quiet:
            print(*args)


def _versions() -> dict:
    return {"majoranon": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def _write_metadata(cfg: SimulationConfig, wall: float | None, conventions: dict) -> None:
    doc = {"config": cfg.resolved, "conventions": conventions, "versions": _versions(),
           "wall_seconds": wall}
    try:
        cfg.metadata_path.parent.mkdir(parents=True, exist_ok=True)
        cfg.metadata_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise ms.OutputError(f"cannot write {cfg.metadata_path}: {exc}") from exc


def _conventions(kinetic_sign: int = 1) -> dict:
    return dict(CONVENTIONS, kinetic_sign_decomposed=kinetic_sign)


def _snapshot_path(pattern: str, **fields) -> Path:
    return Path(pattern.format(**fields))


def _majorana_mass(kind: EquationKind) -> float:
    if isinstance(kind, Majorana):
        return kind.m
    if isinstance(kind, DiracMajorana):
        return kind.m_M
    return 1.0


def decoupling_residual(m: float, k_values) -> float:
    """max |U^dag H_M(k) U - diag(H+(k), H-(k))| over ``k_values``."""
    u = decoupling_unitary()
    k = np.asarray(k_values, dtype=float)
    rotated = np.conj(u.T) @ majorana_mode_hamiltonian(k, m) @ u
    return float(np.abs(rotated - decoupled_mode_hamiltonian(k, m)).max())


# -- commands ----------------------------------------------------------------------


def cmd_simulate(cfg: SimulationConfig, say=print) -> int:
    start = time.perf_counter()
    _write_metadata(cfg, None, _conventions())
    psi0 = fl.sample_initial(cfg.grid, cfg.initial)

    def on_record(index, t, psi, pair):
        if cfg.snapshot_pattern:
            ms.snapshot_to_csv(psi, _snapshot_path(cfg.snapshot_pattern, index=index, name="psi"))

    try:
        series, _ = evolve_recorded(
            psi0, cfg.equation, cfg.backend, cfg.dt, cfg.steps, cfg.record_every,
            on_record=on_record, workers=cfg.workers, oracle_cap=cfg.oracle_cap,
        )
    except NumericError as exc:
        if exc.partial is not None:
            ms.series_to_csv(exc.partial, cfg.series_path, cfg.dimension)
        say(f"numeric failure: {exc}")
        return EXIT_NUMERIC
    ms.series_to_csv(series, cfg.series_path, cfg.dimension)
    _write_metadata(cfg, time.perf_counter() - start, _conventions())
    last = series.records[-1]
    say(f"{len(series)} records -> {cfg.series_path}")
    say(f"t={last.t:.6g} norm={last.norm:.15g} pop_up={last.pop_up:.15g}")
    return EXIT_OK


def cmd_decompose(cfg: SimulationConfig, say=print) -> int:
    _write_metadata(cfg, None, _conventions())
    psi = fl.sample_initial(cfg.grid, cfg.initial)
    pair = fl.decompose_majorana(psi)
    pattern = cfg.snapshot_pattern or str(cfg.series_path.parent / "decompose_{name}.csv")
    paths = {}
    for name in ("psi", "plus", "minus"):
        path = _snapshot_path(pattern, index=0, name=name)
        if "{name}" not in pattern:
            path = path.with_name(f"{path.stem}_{name}{path.suffix}")
        paths[name] = path
    for name, f in (("psi", psi), ("plus", pair.plus), ("minus", pair.minus)):
        ms.snapshot_to_csv(f, paths[name])
        say(f"{name:>5}: norm={fl.norm(f):.15g} majorana_defect={ms.majorana_defect(f):.3e} "
            f"-> {paths[name]}")
    flat = psi.values.reshape(2, -1)
    if np.array_equal(flat, np.repeat(flat[:, :1], flat.shape[1], axis=1)):
        with np.printoptions(precision=15):
            say(f"uniform state: psi_plus = {pair.plus.values.reshape(2, -1)[:, 0]}, "
                f"psi_minus = {pair.minus.values.reshape(2, -1)[:, 0]}")
    return EXIT_OK


def cmd_check(cfg: SimulationConfig, say=print, flip_kinetic_sign: bool = False) -> int:
    if cfg.grid.size > cfg.oracle_cap:
        say(f"grid of {cfg.grid.size} points exceeds oracle_cap={cfg.oracle_cap}")
        return EXIT_CONFIG
    t = cfg.dt * cfg.steps if cfg.steps else cfg.dt
    psi0 = fl.sample_initial(cfg.grid, cfg.initial)
    results = {}
    if not isinstance(cfg.equation, Custom):
        from .dynamics import Stepper

        stepper = Stepper(cfg.grid, cfg.equation, Backend.DECOMPOSED, t, workers=cfg.workers,
                          kinetic_sign=-1 if flip_kinetic_sign else 1)
        results["decomposed"] = stepper.step(*stepper.start(psi0))[0]
    results["expanded"] = evolve(psi0, cfg.equation, Backend.EXPANDED, t, workers=cfg.workers)
    results["oracle"] = dense_evolve(psi0, cfg.equation, t, cap=cfg.oracle_cap)

    names = list(results)
    failures = []
    say(f"t = {t:.6g}, kind = {cfg.equation.name}, grid = {cfg.grid.n}")
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            dev = float(np.abs(results[a].values - results[b].values).max())
            ok = dev <= CHECK_TOL
            say(f"  {a} vs {b}: max deviation {dev:.3e} {'ok' if ok else 'FAIL'}")
            if not ok:
                failures.append(f"{a} vs {b}")
    k_sweep = np.linspace(-10, 10, 64)
    resid = decoupling_residual(_majorana_mass(cfg.equation), k_sweep)
    ok = resid <= CHECK_TOL
    say(f"  decoupling residual over {len(k_sweep)} momenta: {resid:.3e} {'ok' if ok else 'FAIL'}")
    if not ok:
        failures.append("decoupling unitary")
    if failures:
        say("mismatch: " + ", ".join(failures))
        return EXIT_MISMATCH
    return EXIT_OK


def spectrum_table(k_values, m: float) -> list[tuple[float, np.ndarray, np.ndarray, np.ndarray]]:
    rows = []
    for k in k_values:
        expanded = eigvalsh_sorted(majorana_mode_hamiltonian(k, m))
        majorana_rep = eigvalsh_sorted(majorana_rep_mode_hamiltonian(k, m))
        split = np.sort(np.concatenate([
            eigvalsh_sorted(dirac_mode_hamiltonian([k], m, +1)),
            eigvalsh_sorted(dirac_mode_hamiltonian([k], m, -1)),
        ]))
        rows.append((float(k), expanded, majorana_rep, split))
    return rows


def cmd_spectrum(k_values, m: float, say=print) -> int:
    worst = 0.0
    with np.printoptions(precision=12, suppress=True):
        for k, a, b, c in spectrum_table(k_values, m):
            dev = max(np.abs(a - b).max(), np.abs(a - c).max())
            worst = max(worst, dev)
            say(f"k={k:g}: H_M {a}  majorana-rep {b}  H+/H- {c}  dev={dev:.1e}")
    ok = worst <= SPECTRUM_TOL
    say(f"max spectral deviation {worst:.3e} {'ok' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_MISMATCH


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="majoranon", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, backend: bool = False):
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--quiet", action="store_true")
        if backend:
            p.add_argument("--backend", choices=[b.value for b in Backend],
                           help="override the configured backend")

    common(sub.add_parser("simulate", help="run the configured evolution"), backend=True)
    common(sub.add_parser("decompose", help="write the Majorana pair of the initial state"))
    p = sub.add_parser("check", help="cross-check all backends on the configured problem")
    common(p)
    p.add_argument("--debug-flip-kinetic-sign", action="store_true",
                   help="evolve the decomposed components with the opposite kinetic sign")
    p = sub.add_parser("spectrum", help="compare per-mode spectra")
    p.add_argument("--mass", "-m", type=float, required=True)
    p.add_argument("k", type=float, nargs="+")
    p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    say = _Console(args.quiet)
    if args.command == "spectrum":
        return cmd_spectrum(args.k, args.mass, say)
    try:
        cfg = parse_config(args.config)
        if getattr(args, "backend", None):
            cfg.backend = Backend(args.backend)
            cfg.resolved["backend"] = cfg.backend.value
        if args.command == "simulate":
            return cmd_simulate(cfg, say)
        if args.command == "decompose":
            return cmd_decompose(cfg, say)
        return cmd_check(cfg, say, args.debug_flip_kinetic_sign)
    except (ConfigError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ms.OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
