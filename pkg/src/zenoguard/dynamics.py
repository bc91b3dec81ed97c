"""Time integration of the rate equations and of the Lindblad master equation."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from .closure import RateSystem
from .models import LevelScheme
from .operators import outer

RTOL = 1e-9
ATOL = 1e-12
STIFFNESS_CAP = 1e4
POSITIVITY_TOL = 1e-6


class IntegrationError(RuntimeError):
    """Solver failure or loss of physicality during integration."""


@dataclass
class TimeSeries:
    times: np.ndarray
    p0: np.ndarray
    populations: np.ndarray | None  # (n_times, dim); None when not reconstructible
    p0_at: Callable[[float], float] | None = None

    def to_csv(self, path, dim: int | None = None) -> None:
        """Write ``t,P0,p0,...`` with 12 significant digits.

        Populations that cannot be reconstructed are left as empty cells.
        """
        if dim is None:
            dim = self.populations.shape[1] if self.populations is not None else 0
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "P0"] + [f"p{i}" for i in range(dim)])
            for k, t in enumerate(self.times):
                row = [f"{t:.12g}", f"{self.p0[k]:.12g}"]
                if self.populations is None:
                    row += [""] * dim
                else:
                    row += [f"{p:.12g}" for p in self.populations[k]]
                w.writerow(row)

    def minimum(self, window: tuple[float, float] | None = None) -> tuple[float, float]:
        """``(t_min, P0_min)``, refined with the dense solution when available."""
        t = self.times
        mask = np.ones_like(t, dtype=bool) if window is None else (t >= window[0]) & (t <= window[1])
        idx = np.flatnonzero(mask)
        k = idx[np.argmin(self.p0[idx])]
        t_best, p_best = float(t[k]), float(self.p0[k])
        if self.p0_at is None:
            return t_best, p_best
        lo = t[max(k - 1, idx[0])]
        hi = t[min(k + 1, idx[-1])]
        if hi > lo:
            res = minimize_scalar(self.p0_at, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
            if res.fun < p_best:
                t_best, p_best = float(res.x), float(res.fun)
        return t_best, p_best


def default_grid(t_max: float = 20.0, n_points: int = 2000) -> np.ndarray:
    return np.linspace(0.0, t_max, n_points)


def check_stiffness(params) -> None:
    if params is None or params.xi == 0:
        return
    if max(params.omega, params.gamma) > STIFFNESS_CAP * params.xi:
        raise ValueError(
            f"omega/gamma above {STIFFNESS_CAP:g} * xi: outside the non-stiff regime of the explicit solver"
        )


def _solve(rhs, y0, t_grid, rtol, atol, dense):
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be a strictly increasing 1-d array")
    if t_grid.size == 1 or t_grid[-1] == t_grid[0]:
        return np.asarray(y0)[:, None], None
    sol = solve_ivp(
        rhs,
        (t_grid[0], t_grid[-1]),
        y0,
        method="RK45",
        t_eval=t_grid,
        rtol=rtol,
        atol=atol,
        dense_output=dense,
    )
    if not sol.success:
        t_fail = sol.t[-1] if sol.t.size else t_grid[0]
        raise IntegrationError(f"solver failed at t={t_fail:.6g}: {sol.message}")
    return sol.y, sol.sol


def population_maps(rs: RateSystem, dim: int):
    """Affine maps for each ``|i><i|``; ``None`` if any lies outside the retained span."""
    maps = [rs.affine_map(outer(dim, i, i)) for i in range(dim)]
    if any(m is None for m in maps):
        return None
    c0 = np.array([m[0] for m in maps])
    c = np.array([m[1] for m in maps])
    return c0, c


def integrate_rate_system(
    rs: RateSystem,
    init: np.ndarray,
    t_grid: np.ndarray,
    rtol: float = RTOL,
    atol: float = ATOL,
    dense: bool = False,
) -> TimeSeries:
    """Integrate ``d<s>/dt = M<s> + b`` and map the solution to populations."""
    init = np.asarray(init, dtype=float)
    if init.shape != (rs.size,):
        raise ValueError(f"init must have length {rs.size}, got shape {init.shape}")
    m, b = rs.m, rs.b
    y, sol = _solve(lambda t, s: m @ s + b, init, t_grid, rtol, atol, dense)
    p0 = rs.p0_identity + rs.p0_coeffs @ y
    maps = population_maps(rs, rs.basis.dim)
    pops = None if maps is None else (maps[0][:, None] + maps[1] @ y).T
    p0_at = None
    if sol is not None:
        p0_at = lambda t: float(rs.p0_identity + rs.p0_coeffs @ sol(t))  # noqa: E731
    return TimeSeries(times=np.asarray(t_grid, float), p0=p0, populations=pops, p0_at=p0_at)


def lindblad_rhs(scheme: LevelScheme) -> Callable[[float, np.ndarray], np.ndarray]:
    d = scheme.dim
    h = scheme.h_int
    cs = np.array(scheme.collapse_ops) if scheme.collapse_ops else None
    if cs is not None:
        cds = cs.conj().transpose(0, 2, 1)
        decay = scheme.decay_operator

    def rhs(t, y):
        rho = y.reshape(d, d)
        out = -1j * (h @ rho - rho @ h)
        if cs is not None:
            out += np.einsum("kab,bc,kcd->ad", cs, rho, cds) - 0.5 * (decay @ rho + rho @ decay)
        return out.ravel()

    return rhs


def as_density_matrix(state, dim: int) -> np.ndarray:
    """Accept a ket, a density matrix, a level index or ``"mixed"``."""
    if isinstance(state, str):
        if state == "mixed":
            return np.eye(dim, dtype=complex) / dim
        if state == "ket0":
            return outer(dim, 0, 0)
        raise ValueError(f"unknown initial state {state!r}")
    if isinstance(state, (int, np.integer)):
        if not 0 <= state < dim:
            raise ValueError(f"level {state} outside 0..{dim - 1}")
        return outer(dim, int(state), int(state))
    a = np.asarray(state, dtype=complex)
    if a.shape == (dim,):
        a = a / np.linalg.norm(a)
        return np.outer(a, a.conj())
    if a.shape != (dim, dim):
        raise ValueError(f"state shape {a.shape} does not match dim {dim}")
    return a


def validate_density_matrix(rho: np.ndarray, tol: float = 1e-10) -> None:
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1) > tol:
        raise ValueError("density matrix trace differs from 1")
    if np.min(np.linalg.eigvalsh(rho)) < -1e-8:
        raise ValueError("density matrix is not positive semidefinite")


def integrate_master_equation(
    scheme: LevelScheme,
    rho0,
    t_grid: np.ndarray,
    rtol: float = RTOL,
    atol: float = ATOL,
    dense: bool = False,
    return_states: bool = False,
):
    """Integrate the Lindblad equation; record ``P0 = Tr(P_CS rho)`` and populations.

    With ``return_states`` the density matrices on the grid are returned as
    a second value.
    """
    check_stiffness(scheme.params)
    d = scheme.dim
    rho0 = as_density_matrix(rho0, d)
    validate_density_matrix(rho0)
    y, sol = _solve(lindblad_rhs(scheme), rho0.ravel(), t_grid, rtol, atol, dense)
    rhos = y.T.reshape(-1, d, d)
    herm = 0.5 * (rhos + rhos.conj().transpose(0, 2, 1))
    min_eig = np.linalg.eigvalsh(herm).min(axis=1)
    bad = np.flatnonzero(min_eig < -POSITIVITY_TOL)
    if bad.size:
        k = bad[0]
        raise IntegrationError(
            f"positivity lost at t={t_grid[k]:.6g} (eigenvalue {min_eig[k]:.3g}); tighten tolerances"
        )
    p_cs = scheme.p_cs
    p0 = np.einsum("ab,kba->k", p_cs, rhos).real
    pops = np.einsum("kaa->ka", rhos).real
    p0_at = None
    if sol is not None:
        p0_at = lambda t: float(np.einsum("ab,ba->", p_cs, sol(t).reshape(d, d)).real)  # noqa: E731
    ts = TimeSeries(times=np.asarray(t_grid, float), p0=p0, populations=pops, p0_at=p0_at)
    return (ts, rhos) if return_states else ts


def expectations_of(state, rs: RateSystem) -> np.ndarray:
    """``Tr(rho sigma_i)`` for every retained basis element."""
    rho = as_density_matrix(state, rs.basis.dim)
    els = rs.basis.elements[list(rs.indices)]
    return np.einsum("ab,kba->k", rho, els).real


def simulate_p0(scheme: LevelScheme, rs: RateSystem, state, t_grid, **tol) -> TimeSeries:
    """Rate-equation route from a physical initial state."""
    check_stiffness(scheme.params)
    return integrate_rate_system(rs, expectations_of(state, rs), t_grid, **tol)
