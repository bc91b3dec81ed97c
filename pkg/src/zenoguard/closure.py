"""Closed linear equations for Gell-Mann expectation values.

For a scheme with Hamiltonian ``H`` and collapse operators ``C_k`` the
expectation of any operator obeys ``d<A>/dt = <L^dag(A)>`` with

    L^dag(A) = i[H, A] + sum_k (C_k^dag A C_k - 1/2 {C_k^dag C_k, A}).

Expanding ``L^dag(sigma_i)`` in the basis gives ``d<s>/dt = M <s> + b``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import LevelScheme
from .operators import OperatorBasis, anticommutator, expand_in_basis, gellmann_basis

COUPLING_TOL = 1e-12
IMAG_TOL = 1e-10


def adjoint_generator(scheme: LevelScheme, a: np.ndarray) -> np.ndarray:
    """Heisenberg-picture generator applied to ``a``."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (scheme.dim, scheme.dim):
        raise ValueError(f"dimension mismatch: operator {a.shape}, scheme dim {scheme.dim}")
    h = scheme.h_int
    out = 1j * (h @ a - a @ h)
    for c in scheme.collapse_ops:
        cd = c.conj().T
        out = out + cd @ a @ c - 0.5 * anticommutator(cd @ c, a)
    return out


@dataclass(frozen=True)
class RateSystem:
    """``d<s>/dt = m @ <s> + b`` over the retained basis elements.

    ``P0 = p0_identity + p0_coeffs @ <s>``.
    """

    basis: OperatorBasis
    indices: tuple[int, ...]
    m: np.ndarray
    b: np.ndarray
    p0_identity: float
    p0_coeffs: np.ndarray

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.basis.labels[i] for i in self.indices)

    @property
    def p0_map(self) -> tuple[float, np.ndarray]:
        return self.p0_identity, self.p0_coeffs

    @property
    def size(self) -> int:
        return len(self.indices)

    def affine_map(self, op: np.ndarray) -> tuple[float, np.ndarray] | None:
        """Express ``<op>`` affinely in the retained expectations, if possible."""
        coeffs, c0 = expand_in_basis(op, self.basis)
        mask = np.ones(len(coeffs), dtype=bool)
        mask[list(self.indices)] = False
        if np.any(np.abs(coeffs[mask]) > COUPLING_TOL):
            return None
        return c0, coeffs[list(self.indices)]


def _real(x: np.ndarray, what: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(x))))
    if np.max(np.abs(x.imag)) > IMAG_TOL * scale:
        raise ArithmeticError(f"{what} has a non-vanishing imaginary part; check conventions")
    return x.real.copy()


def full_generator_matrix(scheme: LevelScheme) -> tuple[OperatorBasis, np.ndarray, np.ndarray]:
    """``M`` and ``b`` over the whole ``d^2 - 1`` basis."""
    basis = gellmann_basis(scheme.dim)
    images = np.array([adjoint_generator(scheme, s) for s in basis.elements])
    # M_ij = Tr(sigma_j L(sigma_i)) / 2, b_i = Tr(L(sigma_i)) / d
    m = np.einsum("jab,iba->ij", basis.elements, images) / 2.0
    b = np.einsum("iaa->i", images) / scheme.dim
    return basis, _real(m, "M"), _real(b, "b")


def prune_indices(m: np.ndarray, seed: list[int]) -> list[int]:
    """Smallest index set containing ``seed`` that is closed under ``m``."""
    keep = set(seed)
    frontier = list(seed)
    while frontier:
        i = frontier.pop()
        for j in np.flatnonzero(np.abs(m[i]) > COUPLING_TOL):
            if j not in keep:
                keep.add(int(j))
                frontier.append(int(j))
    return sorted(keep)


def derive_rate_system(scheme: LevelScheme, prune: bool = True) -> RateSystem:
    basis, m, b = full_generator_matrix(scheme)
    coeffs, c0 = expand_in_basis(scheme.p_cs, basis)
    if prune:
        seed = [int(i) for i in np.flatnonzero(np.abs(coeffs) > COUPLING_TOL)]
        idx = prune_indices(m, seed)
    else:
        idx = list(range(len(basis)))
    sub = np.ix_(idx, idx)
    return RateSystem(
        basis=basis,
        indices=tuple(idx),
        m=m[sub],
        b=b[idx],
        p0_identity=c0,
        p0_coeffs=coeffs[idx],
    )


def closure_residual(scheme: LevelScheme, rs: RateSystem) -> float:
    """Max entry of ``L(sigma_i) - sum_j M_ij sigma_j - b_i I`` over retained i."""
    worst = 0.0
    for row, i in enumerate(rs.indices):
        img = adjoint_generator(scheme, rs.basis.elements[i])
        approx = rs.b[row] * np.eye(scheme.dim) + np.tensordot(
            rs.m[row], rs.basis.elements[list(rs.indices)], axes=1
        )
        worst = max(worst, float(np.max(np.abs(img - approx))))
    return worst


def steady_state(rs: RateSystem) -> np.ndarray:
    """Fixed point ``M s + b = 0``; raises if it is not unique."""
    if np.linalg.matrix_rank(rs.m, tol=1e-10 * max(1.0, np.max(np.abs(rs.m)))) < rs.size:
        raise np.linalg.LinAlgError("rate matrix is singular: no unique steady state")
    return np.linalg.solve(rs.m, -rs.b)


def p0_steady(rs: RateSystem) -> float:
    return float(rs.p0_identity + rs.p0_coeffs @ steady_state(rs))
