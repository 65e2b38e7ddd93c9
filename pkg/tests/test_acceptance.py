"""Acceptance criteria, one test per criterion.

Each test prints a ``[PASS]``/``[FAIL]`` line (also collected into the
terminal summary) and then asserts.  Tolerances and runtime limits are fixed
here; run with ``pytest tests/test_acceptance.py -v -s``.
"""
import json
import time

import numpy as np

from majoranon import algebra as al
from majoranon import cli
from majoranon import dynamics as dy
from majoranon import fields as fl
from majoranon import measure as ms
from majoranon import reference as rf
from conftest import ACCEPTANCE_LINES, random_field

SX, SZ = al.constant_matrix("sigma_x"), al.constant_matrix("sigma_z")


def report(number, title, checks, elapsed, limit):
    """``checks`` maps a label to (value, bound[, "above"]).

    Values must be <= their bound, or > it when marked "above".
    """
    failed, parts = [], []
    for label, (value, bound, *above) in checks.items():
        ok = value > bound if above else value <= bound
        if not ok:
            failed.append(label)
        parts.append(f"{label}={value:.2e} ({'>' if above else '<='} {bound:.0e})")
    if elapsed >= limit:
        failed.append(f"runtime {elapsed:.2f}s >= {limit}s")
    detail = "; ".join(parts)
    line = f"[{'FAIL' if failed else 'PASS'}] criterion {number}: {title} | {detail} | {elapsed:.2f}s < {limit}s"
    print("\n" + line)
    ACCEPTANCE_LINES.append(line)
    assert not failed, line


def gaussian_field(grid, p0, delta=2.0, spinor=(1, 1)):
    return fl.sample_initial(grid, fl.GaussianState(tuple(p0), delta, spinor))


def max_dev(a, b):
    return float(np.abs(a.values - b.values).max())


def rel_norm_change(f, g):
    return abs(fl.norm(g) - fl.norm(f)) / fl.norm(f)


def test_criterion_01_rest_frame():
    start = time.perf_counter()
    g = fl.make_grid(1, [8], [8.0])
    psi0 = fl.uniform_field(g, [1, 0])
    psi_dev = pop_dev = dirac_dev = 0.0
    for j in range(1, 64):
        t = j / 10
        psi, _ = dy.evolve_majorana_decomposed(psi0, 1.0, t)
        expected = np.array([np.cos(t), -1j * np.sin(t)])[:, None] * np.ones(8)
        psi_dev = max(psi_dev, float(np.abs(psi.values - expected).max()))
        pop_dev = max(pop_dev, abs(ms.observe(psi).pop_up - np.cos(t) ** 2))
        dirac = dy.evolve(psi0, dy.Dirac(1.0), "decomposed", t)
        dirac_dev = max(dirac_dev, abs(ms.observe(dirac).pop_up - 1.0))
    report(1, "rest-frame Majoranon", {
        "psi vs (cos t, -i sin t)": (psi_dev, 1e-12),
        "pop_up vs cos^2 t": (pop_dev, 1e-12),
        "Dirac pop_up vs 1": (dirac_dev, 1e-12),
    }, time.perf_counter() - start, 1.0)


def test_criterion_02_decomposition_fidelity():
    start = time.perf_counter()
    chi_plus, chi_minus = al.majorana_basis()
    g = fl.make_grid(1, [8], [8.0])
    pair = fl.decompose_majorana(fl.uniform_field(g, [1, 0]))
    rest = max(float(np.abs(pair.plus.values - chi_plus[:, None]).max()),
               float(np.abs(pair.minus.values + chi_minus[:, None]).max()))

    g = fl.make_grid(1, [256], [40.0])
    x = g.axes[0]
    pair = fl.decompose_majorana(gaussian_field(g, (0.5,)))
    env = np.exp(-x**2 / 16)
    # closed forms scaled by sqrt 2 for the unitary decomposition
    gauss = max(float(np.abs(pair.plus.values - 2 * np.sin(0.5 * x) * env * chi_minus[:, None]).max()),
                float(np.abs(pair.minus.values + 2 * np.cos(0.5 * x) * env * chi_minus[:, None]).max()))
    report(2, "decomposition fidelity", {
        "rest frame vs (chi+, -chi-)": (rest, 1e-15),
        "Gaussian vs sin/cos forms": (gauss, 1e-12),
    }, time.perf_counter() - start, 1.0)


def test_criterion_03_decoupling_unitary():
    start = time.perf_counter()
    u = al.decoupling_unitary()
    worst = 0.0
    for m in (0.0, 0.5, 2.0):
        for k in np.linspace(-10, 10, 64):
            h_plus, h_minus = k * SX + m * SZ, k * SX - m * SZ
            target = np.block([[h_plus, np.zeros((2, 2))], [np.zeros((2, 2)), h_minus]])
            rotated = u.conj().T @ al.majorana_mode_hamiltonian(k, m) @ u
            worst = max(worst, np.linalg.norm(rotated - target, np.inf))
    report(3, "decoupling unitary", {"||U^dag H_M U - diag(H+, H-)||_inf": (worst, 1e-13)},
           time.perf_counter() - start, 1.0)


def test_criterion_04_backend_triangle_1d():
    start = time.perf_counter()
    g = fl.make_grid(1, [64], [40.0])
    psi0 = gaussian_field(g, (0.5,))
    kind = dy.Majorana(1.0)
    out = {b: dy.evolve(psi0, kind, b, 5.0) for b in ("decomposed", "expanded", "oracle")}
    names = list(out)
    checks = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            checks[f"{a} vs {b}"] = (max_dev(out[a], out[b]), 1e-10)
    for name, f in out.items():
        checks[f"norm drift {name}"] = (rel_norm_change(psi0, f), 1e-12)
    report(4, "backend triangle 1+1D", checks, time.perf_counter() - start, 10.0)


def test_criterion_05_backend_pair_2d():
    start = time.perf_counter()
    g = fl.make_grid(2, [32, 32], [20.0, 20.0])
    psi0 = gaussian_field(g, (0.5, 0.3))
    kind = dy.Majorana(1.0)
    dec = dy.evolve(psi0, kind, "decomposed", 2.0)
    exp = dy.evolve(psi0, kind, "expanded", 2.0)
    flipped, _ = dy.evolve_majorana_decomposed(psi0, 1.0, 2.0, kinetic_sign=-1)
    report(5, "backend pair 2+1D", {
        "decomposed vs expanded": (max_dev(dec, exp), 1e-10),
        "flipped-sign deviation": (max_dev(flipped, exp), 1e-2, "above"),
    }, time.perf_counter() - start, 30.0)


def test_criterion_06_dirac_majorana_splitting():
    start = time.perf_counter()
    g = fl.make_grid(1, [32], [20.0])
    psi0 = gaussian_field(g, (0.5,))
    t = 3.0
    dec, pair = dy.evolve_dirac_majorana_decomposed(psi0, 1.0, 0.5, t)
    oracle = rf.dense_evolve(psi0, dy.DiracMajorana(1.0, 0.5), t)
    to_dirac = dy.evolve(psi0, dy.DiracMajorana(1.0, 0.0), "decomposed", t)
    to_majorana = dy.evolve(psi0, dy.DiracMajorana(0.0, 0.7), "decomposed", t)
    report(6, "Dirac-Majorana splitting", {
        "decomposed vs oracle": (max_dev(dec, oracle), 1e-10),
        "m_M=0 vs Dirac": (max_dev(to_dirac, dy.evolve_dirac(psi0, 1.0, 1, 1, t)), 1e-12),
        "m_D=0 vs Majorana": (max_dev(to_majorana, dy.evolve(psi0, dy.Majorana(0.7), "expanded", t)), 1e-12),
        "split masses (1.5, 0.5)": (abs(pair.mass_plus - 1.5) + abs(pair.mass_minus - 0.5), 0.0),
    }, time.perf_counter() - start, 10.0)


def test_criterion_07_spectral_equivalence():
    start = time.perf_counter()
    rep_dev = disp_dev = 0.0
    for m in (0.0, 0.9, 2.0):
        for k in np.linspace(-10, 10, 64):
            a = np.linalg.eigvalsh(al.majorana_mode_hamiltonian(k, m))
            b = np.linalg.eigvalsh(al.majorana_rep_mode_hamiltonian(k, m))
            e = np.hypot(k, m)
            rep_dev = max(rep_dev, float(np.abs(a - b).max()))
            disp_dev = max(disp_dev, float(np.abs(a - [-e, -e, e, e]).max()),
                           float(np.abs(b - [-e, -e, e, e]).max()))
    report(7, "spectral equivalence", {
        "Majorana rep vs real-expanded": (rep_dev, 1e-12),
        "vs +-sqrt(k^2+m^2) twice": (disp_dev, 1e-12),
    }, time.perf_counter() - start, 1.0)


def test_criterion_08_structural_invariants():
    start = time.perf_counter()
    g1 = fl.make_grid(1, [64], [30.0])
    g2 = fl.make_grid(2, [16, 16], [10.0, 12.0])
    cond = real = inner = norm_id = semi = 0.0
    for seed in range(10):
        for g in (g1, g2):
            f = random_field(g, seed)
            f = f.with_values(f.values / fl.norm(f))
            pair = fl.decompose_majorana(f)
            for part in (pair.plus, pair.minus):
                for sign in (1, -1):
                    out = dy.evolve_dirac(part, 1.3, sign, 1, 2.1)
                    cond = max(cond, max_dev(fl.charge_conjugate(out), out))
            inner = max(inner, abs(fl.inner(pair.plus, pair.minus).imag))
            norm_id = max(norm_id, abs(1.0 - 0.5 * (fl.norm(pair.plus) ** 2 + fl.norm(pair.minus) ** 2)))
            raw = dy.propagate_expanded_raw(f, dy.Majorana(0.8), 1.7)
            real = max(real, float(np.abs(raw.imag).max()))
            kind = dy.DiracMajorana(0.4, 0.9)
            for backend in ("decomposed", "expanded"):
                whole = dy.evolve(f, kind, backend, 2.5)
                parts = dy.evolve(dy.evolve(f, kind, backend, 1.1), kind, backend, 1.4)
                semi = max(semi, max_dev(whole, parts))
    gen = rf.dense_generator(g2, dy.Majorana(1.0)).matrix
    report(8, "structural invariants", {
        "Majorana condition under H+-": (cond, 1e-12),
        "expanded realness": (real, 1e-12),
        "Im <psi+, psi->": (inner, 1e-14),
        "norm identity": (norm_id, 1e-12),
        "semigroup": (semi, 1e-11),
        "generator antisymmetry": (float(np.abs(gen + gen.T).max()), 1e-12),
    }, time.perf_counter() - start, 10.0)


def test_criterion_09_four_spinor_fixed_points():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        psi_l = rng.normal(size=2) + 1j * rng.normal(size=2)
        s = al.build_majorana_4spinor(psi_l)
        worst = max(worst, float(np.abs(al.charge_conjugate_4c(s) - s).max()))
    report(9, "four-spinor construction", {"|C(Psi) - Psi|": (worst, 1e-14)},
           time.perf_counter() - start, 1.0)


def test_criterion_10_determinism(tmp_path):
    start = time.perf_counter()
    cfg = {
        "dimension": 2,
        "equation": {"kind": "dirac_majorana", "m_D": 1.0, "m_M": 0.5},
        "grid": {"n": [32, 32], "length": [20.0, 20.0]},
        "initial": {"type": "gaussian", "p0": [0.5, -0.2], "delta": 2.0, "spinor": [1, [0, 1]]},
        "time": {"dt": 0.25, "steps": 8, "record_every": 2},
        "output": {"snapshots": "snap_{index}.csv"},
    }
    blobs = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        (d / "run.json").write_text(json.dumps(cfg))
        assert cli.main(["simulate", "--quiet", "--config", str(d / "run.json")]) == 0
        meta = json.loads((d / "metadata.json").read_text())
        del meta["wall_seconds"]
        snaps = [(d / f"snap_{i}.csv").read_bytes() for i in range(5)]
        blobs.append(((d / "series.csv").read_bytes(), snaps, json.dumps(meta, sort_keys=True)))
    identical = 0.0 if blobs[0] == blobs[1] else 1.0

    g = fl.make_grid(2, [32, 32], [20.0, 20.0])
    f = random_field(g, 7)
    threads = 0.0
    for backend in ("decomposed", "expanded"):
        one = dy.evolve(f, dy.DiracMajorana(1.0, 0.5), backend, 2.0, workers=1)
        four = dy.evolve(f, dy.DiracMajorana(1.0, 0.5), backend, 2.0, workers=4)
        threads = max(threads, max_dev(one, four))
    report(10, "determinism", {
        "outputs differ (0 = byte-identical)": (identical, 0.0),
        "1 vs 4 workers": (threads, 1e-13),
    }, time.perf_counter() - start, 10.0)
