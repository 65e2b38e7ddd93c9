"""Fixed-representation matrices and per-mode generators.

Every function here is a pure function of its inputs.  Momentum arguments
may carry extra trailing axes (``k.shape == (dim, ...)``), in which case the
returned matrices are stacked as ``(..., n, n)``.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

SQRT2 = np.sqrt(2.0)

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# eps = i sigma_y
EPSILON = 1j * SIGMA_Y
# two-component charge conjugation: psi_c = CONJ2 @ conj(psi)
CONJ2 = -1j * SIGMA_Z @ SIGMA_Y

_ZERO2 = np.zeros((2, 2), dtype=complex)
GAMMA0_CHIRAL = np.block([[_ZERO2, SIGMA_0], [SIGMA_0, _ZERO2]])
C_TILDE = np.block([[1j * SIGMA_Y, _ZERO2], [_ZERO2, -1j * SIGMA_Y]])
GAMMA0_MAJORANA = np.kron(SIGMA_Y, SIGMA_X)
GAMMA3_MAJORANA = 1j * np.kron(SIGMA_Y, SIGMA_Y)
# psi = M @ Psi for Psi = (Re psi1, Re psi2, Im psi1, Im psi2)
EXPANSION_MAP = np.hstack([SIGMA_0, 1j * SIGMA_0])

_CONSTANTS = {
    "sigma_x": SIGMA_X,
    "sigma_y": SIGMA_Y,
    "sigma_z": SIGMA_Z,
    "epsilon": EPSILON,
    "conj2": CONJ2,
    "c_tilde": C_TILDE,
    "gamma0_chiral": GAMMA0_CHIRAL,
    "gamma0_majorana": GAMMA0_MAJORANA,
    "gamma3_majorana": GAMMA3_MAJORANA,
    "expansion_map": EXPANSION_MAP,
}
for _m in _CONSTANTS.values():
    _m.setflags(write=False)

CONSTANT_NAMES = tuple(_CONSTANTS)


def constant_matrix(name: str) -> np.ndarray:
    """Return a copy of the named constant matrix.

    Known names are listed in ``CONSTANT_NAMES``.
    """
    try:
        return _CONSTANTS[name].copy()
    except KeyError:
        raise ValueError(
            f"unknown constant {name!r}; expected one of {', '.join(CONSTANT_NAMES)}"
        ) from None


def _finite_spinor(s, size: int) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    if s.shape != (size,):
        raise ValueError(f"expected a {size}-component spinor, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError("spinor has non-finite entries")
    return s


def charge_conjugate_2c(s) -> np.ndarray:
    """psi -> -i sigma_z sigma_y psi*, valid in 1+1 and 2+1 dimensions."""
    return CONJ2 @ np.conj(_finite_spinor(s, 2))


def majorana_basis() -> tuple[np.ndarray, np.ndarray]:
    """The Majorana-condition basis spinors (chi_plus, chi_minus)."""
    chi_plus = np.array([1, -1], dtype=complex) / SQRT2
    chi_minus = np.array([1j, 1j], dtype=complex) / SQRT2
    return chi_plus, chi_minus


def build_majorana_4spinor(psi_l) -> np.ndarray:
    """Stack a left-chiral spinor into the four-spinor (eps psi_L*, psi_L)."""
    psi_l = _finite_spinor(psi_l, 2)
    return np.concatenate([EPSILON @ np.conj(psi_l), psi_l])


def charge_conjugate_4c(s) -> np.ndarray:
    """Chiral-representation charge conjugation C~ (gamma0)^T Psi*."""
    s = _finite_spinor(s, 4)
    return C_TILDE @ GAMMA0_CHIRAL.T @ np.conj(s)


def decoupling_unitary() -> np.ndarray:
    """U = i exp(-i pi sigma_y / 4) (x) exp(-i pi sigma_x / 4).

    Conjugating the expanded Majorana Hamiltonian with U yields the
    block-diagonal pair of Dirac Hamiltonians with masses +m and -m.
    """
    rot_y = (SIGMA_0 - 1j * SIGMA_Y) / SQRT2
    rot_x = (SIGMA_0 - 1j * SIGMA_X) / SQRT2
    return 1j * np.kron(rot_y, rot_x)


def _momentum(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        k = k[None]
    if k.shape[0] not in (1, 2):
        raise ValueError(
            f"momentum must have 1 or 2 components, got {k.shape[0]}"
        )
    if not np.all(np.isfinite(k)):
        raise ValueError("momentum has non-finite entries")
    return k


def _outer(coeff, mat: np.ndarray) -> np.ndarray:
    return np.asarray(coeff)[..., None, None] * mat


def sigma_dot_p(k) -> np.ndarray:
    """sigma_x k_x (+ sigma_y k_y), stacked over trailing axes of ``k``."""
    k = _momentum(k)
    out = _outer(k[0], SIGMA_X)
    if k.shape[0] == 2:
        out = out + _outer(k[1], SIGMA_Y)
    return out


def dirac_mode_hamiltonian(k, m: float, mass_sign: int = 1, kinetic_sign: int = 1) -> np.ndarray:
    """Momentum-space Dirac Hamiltonian ``ks (sigma . k) + ms m sigma_z``."""
    if mass_sign not in (1, -1) or kinetic_sign not in (1, -1):
        raise ValueError("mass_sign and kinetic_sign must be +1 or -1")
    kinetic = sigma_dot_p(k)
    return kinetic_sign * kinetic + mass_sign * float(m) * SIGMA_Z


def majorana_mode_hamiltonian(k, m: float) -> np.ndarray:
    """Real-expanded 1+1D Majorana Hamiltonian (1 (x) sigma_x) k - m sigma_x (x) sigma_y."""
    k = np.asarray(k, dtype=float)
    return _outer(k, np.kron(SIGMA_0, SIGMA_X)) - float(m) * np.kron(SIGMA_X, SIGMA_Y)


def majorana_rep_mode_hamiltonian(k, m: float) -> np.ndarray:
    """Four-component Hamiltonian in the Majorana representation.

    ``i d/dz`` acting on ``exp(ikz)`` gives ``-k``, hence the sign on the
    kinetic term.
    """
    k = np.asarray(k, dtype=float)
    return _outer(-k, np.kron(SIGMA_0, SIGMA_Z)) + float(m) * np.kron(SIGMA_Y, SIGMA_X)


def decoupled_mode_hamiltonian(k, m: float) -> np.ndarray:
    """diag(H+(k), H-(k)) with H+- = sigma_x k +- m sigma_z."""
    k = np.asarray(k, dtype=float)
    out = np.zeros(k.shape + (4, 4), dtype=complex)
    out[..., :2, :2] = dirac_mode_hamiltonian(k[None], m, +1)
    out[..., 2:, 2:] = dirac_mode_hamiltonian(k[None], m, -1)
    return out


def is_hermitian(a: np.ndarray, atol: float = 1e-12) -> bool:
    a = np.asarray(a)
    return bool(np.allclose(a, np.conj(np.swapaxes(a, -1, -2)), atol=atol, rtol=0))


def antilinear_generator_mode(
    d_symbol: Callable[[np.ndarray], np.ndarray], K, k
) -> np.ndarray:
    """Per-mode generator of the real expansion of ``i dpsi/dt = D psi + K psi*``.

    Parameters
    ----------
    d_symbol : callable
        Maps a momentum array ``(dim, ...)`` to the Fourier symbol of the
        linear operator ``D``, shape ``(..., 2, 2)``.
    K : (2, 2) array
        Constant coefficient of the conjugate term.
    k : array, shape (dim, ...)
        Momenta at which to evaluate the generator.

    Returns
    -------
    G : array, shape (..., 4, 4)
        Fourier symbol of the real operator with ``dPsi/dt = G Psi`` for
        ``Psi = (Re psi1, Re psi2, Im psi1, Im psi2)``.  ``G(-k) = conj(G(k))``
        always holds, so ``G`` is the symbol of a real operator; at ``k = 0``
        it is a real matrix.

    Notes
    -----
    Writing ``A = -i D`` as ``A_R + i A_I`` with real operators
    ``A_R = (A + A-bar) / 2``, where ``A-bar`` has symbol ``conj(A(-k))``,
    and ``-i K = B_R + i B_I`` gives

        G = [[A_R + B_R, -A_I + B_I],
             [A_I + B_I,  A_R - B_R]].
    """
    k = _momentum(k)
    d_here = np.asarray(d_symbol(k), dtype=complex)
    d_refl = np.asarray(d_symbol(-k), dtype=complex)
    if not is_hermitian(d_here):
        raise ValueError("linear symbol D(k) must be Hermitian")
    K = np.asarray(K, dtype=complex)
    if K.shape != (2, 2) or not np.all(np.isfinite(K)):
        raise ValueError("K must be a finite 2x2 matrix")

    a = -1j * d_here
    a_bar = np.conj(-1j * d_refl)
    a_r = 0.5 * (a + a_bar)
    a_i = -0.5j * (a - a_bar)
    b = -1j * K
    b_r, b_i = b.real, b.imag

    g = np.empty(a.shape[:-2] + (4, 4), dtype=complex)
    g[..., :2, :2] = a_r + b_r
    g[..., :2, 2:] = -a_i + b_i
    g[..., 2:, :2] = a_i + b_i
    g[..., 2:, 2:] = a_r - b_r
    return g


def eigvalsh2(h: np.ndarray) -> np.ndarray:
    """Closed-form ascending eigenvalues of stacked 2x2 Hermitian matrices."""
    h = np.asarray(h, dtype=complex)
    mean = 0.5 * (h[..., 0, 0] + h[..., 1, 1]).real
    half_gap = np.hypot(0.5 * (h[..., 0, 0] - h[..., 1, 1]).real, np.abs(h[..., 1, 0]))
    return np.stack([mean - half_gap, mean + half_gap], axis=-1)


def eigvalsh_sorted(h: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of stacked Hermitian matrices (2x2 in closed form)."""
    h = np.asarray(h)
    if h.shape[-2:] == (2, 2):
        return eigvalsh2(h)
    return np.linalg.eigvalsh(h)


def expm_hermitian2(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) for stacked 2x2 Hermitian ``h``, in closed form.

    With ``h = a0 + a . sigma`` the result is
    ``exp(-i a0 t) (cos(|a| t) - i sin(|a| t) (a . sigma) / |a|)``.
    """
    h = np.asarray(h, dtype=complex)
    a0 = 0.5 * (h[..., 0, 0] + h[..., 1, 1]).real
    traceless = h - a0[..., None, None] * SIGMA_0
    norm_a = np.hypot(0.5 * (h[..., 0, 0] - h[..., 1, 1]).real, np.abs(h[..., 1, 0]))
    cos_part = np.cos(norm_a * t)
    # sin(|a| t) / |a| without the 0/0 at |a| = 0
    sin_over = t * np.sinc(norm_a * t / np.pi)
    phase = np.exp(-1j * a0 * t)
    return phase[..., None, None] * (
        cos_part[..., None, None] * SIGMA_0 - 1j * sin_over[..., None, None] * traceless
    )


def expm_antihermitian(g: np.ndarray, t: float) -> np.ndarray:
    """exp(g t) for stacked anti-Hermitian ``g`` via the Hermitian form ``i g``."""
    h = 1j * np.asarray(g, dtype=complex)
    h = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
