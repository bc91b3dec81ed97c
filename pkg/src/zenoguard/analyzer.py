"""Static protection analysis: dark states of the fast dynamics and P H P."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .closure import derive_rate_system
from .dynamics import simulate_p0
from .models import LevelScheme, split_hamiltonian
from .operators import hermiticity_residual

KERNEL_RTOL = 1e-8
COUPLING_TOL = 1e-10


@dataclass
class DarkStateReport:
    kernel_vectors: np.ndarray  # (k, dim), each normalized, supported outside the controlled subspace
    couplings: np.ndarray  # (k, n_controlled): <v| h_slow |c>
    controlled_basis: np.ndarray  # (n_controlled, dim)
    protected: bool

    @property
    def n_dark(self) -> int:
        return len(self.kernel_vectors)


def _subspaces(p_cs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(p_cs)
    return v[:, w > 0.5], v[:, w <= 0.5]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = np.argmax(np.abs(v) > np.abs(v).max() - 1e-12)
    return v * (abs(v[k]) / v[k])


def fast_generator(scheme: LevelScheme, h_fast: np.ndarray) -> np.ndarray:
    """``h_fast - (i/2) sum_k C_k^dag C_k`` in the full space."""
    return h_fast - 0.5j * scheme.decay_operator


def find_dark_states(scheme: LevelScheme, split: tuple[np.ndarray, np.ndarray] | None = None) -> DarkStateReport:
    """Kernel of the fast generator on the outside subspace.

    The subspace is protected unless some kernel vector couples to the
    controlled subspace through ``h_slow``. When the kernel is degenerate its
    basis is rotated so that the couplings are concentrated on the leading
    vectors.
    """
    h_slow, h_fast = split_hamiltonian(scheme) if split is None else split
    h_slow = np.asarray(h_slow, dtype=complex)
    h_fast = np.asarray(h_fast, dtype=complex)
    if np.max(np.abs(h_slow + h_fast - scheme.h_int)) > 1e-12:
        raise ValueError("h_slow + h_fast does not reproduce h_int")
    inside, outside = _subspaces(scheme.p_cs)
    g = outside.conj().T @ fast_generator(scheme, h_fast) @ outside

    if scheme.params is not None:
        scale = scheme.params.max_rate
    else:
        scale = max(np.max(np.abs(scheme.h_int)), np.max(np.abs(scheme.decay_operator)))
    tol = KERNEL_RTOL * scale if scale > 0 else 1e-12

    if g.size:
        _, sv, vh = np.linalg.svd(g)
        kern = vh.conj().T[:, sv <= tol]
    else:
        kern = np.zeros((0, 0), dtype=complex)
    vecs = (outside @ kern).T  # (k, dim)
    coup = vecs.conj() @ h_slow @ inside  # (k, n_in)
    if len(vecs) > 1:
        u, _, _ = np.linalg.svd(coup)
        vecs = u.T @ vecs
    vecs = np.array([_fix_phase(v / np.linalg.norm(v)) for v in vecs]).reshape(-1, scheme.dim)
    coup = vecs.conj() @ h_slow @ inside
    protected = not bool(np.any(np.abs(coup) > COUPLING_TOL))
    return DarkStateReport(
        kernel_vectors=vecs,
        couplings=coup,
        controlled_basis=inside.T,
        protected=protected,
    )


def effective_hamiltonian(h: np.ndarray, p_cs: np.ndarray) -> np.ndarray:
    """``P H P`` for a Hermitian projector ``P``."""
    h = np.asarray(h, dtype=complex)
    p = np.asarray(p_cs, dtype=complex)
    if h.shape != p.shape:
        raise ValueError(f"dimension mismatch: {h.shape} vs {p.shape}")
    if hermiticity_residual(p) > 1e-10 or np.max(np.abs(p @ p - p)) > 1e-10:
        raise ValueError("p_cs is not a Hermitian projector")
    return p @ h @ p


def bright_dark_frame() -> np.ndarray:
    """Columns |0>, (|1> - |3>)/sqrt2, (|1> + |3>)/sqrt2, |2> of the four-level chain."""
    s = 1 / np.sqrt(2)
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = 1
    u[1, 1], u[3, 1] = s, -s
    u[1, 2], u[3, 2] = s, s
    u[2, 3] = 1
    return u


def bright_dark_rewrite(scheme: LevelScheme) -> np.ndarray:
    """``h_int`` of the four-level chain in the frame {|0>, |dark>, |bright>, |2>}.

    In this frame ``|0>`` couples to both combinations with ``xi/sqrt2`` while
    only the bright one is driven, with ``sqrt2 * omega``.
    """
    if scheme.name != "four_level_chain":
        raise ValueError(f"bright/dark rewrite applies to four_level_chain, not {scheme.name!r}")
    u = bright_dark_frame()
    h = u.conj().T @ scheme.h_int @ u
    xi, om = scheme.params.xi, scheme.params.omega
    expected = np.zeros((4, 4), dtype=complex)
    expected[0, 1] = expected[0, 2] = xi / np.sqrt(2)
    expected[2, 3] = np.sqrt(2) * om
    expected = expected + expected.conj().T
    scale = max(1.0, xi, om)
    if np.max(np.abs(h - expected)) > 1e-12 * scale:
        raise ArithmeticError("frame change did not produce the bright/dark form")
    return h


@dataclass
class ProtectionCheck:
    window: tuple[float, float]
    min_p0: float
    mean_p0: float


def dynamic_protection(scheme: LevelScheme, t_end: float | None = None, n_points: int = 4001) -> ProtectionCheck:
    """Minimum and time average of P0 from |0> over ``[0, t_end]``.

    ``t_end`` defaults to ``2 pi / xi``. The minimum is refined on the dense
    solution.
    """
    if t_end is None:
        if scheme.params is None or scheme.params.xi == 0:
            raise ValueError("t_end is required when xi is zero or unknown")
        t_end = 2 * np.pi / scheme.params.xi
    t = np.linspace(0.0, t_end, n_points)
    ts = simulate_p0(scheme, derive_rate_system(scheme), "ket0", t, dense=True)
    _, p_min = ts.minimum()
    mean = float(trapezoid(ts.p0, t) / t_end)
    return ProtectionCheck(window=(0.0, float(t_end)), min_p0=p_min, mean_p0=mean)
