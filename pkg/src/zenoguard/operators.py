"""Dense operator helpers and the generalized Gell-Mann basis.

Operators are plain complex ``numpy`` arrays of shape ``(d, d)``. Units: hbar = 1,
frequencies in units of the leakage coupling xi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL = 1e-12


def ket(dim: int, i: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[i] = 1.0
    return v


def outer(dim: int, i: int, j: int) -> np.ndarray:
    """The matrix unit |i><j|."""
    m = np.zeros((dim, dim), dtype=complex)
    m[i, j] = 1.0
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermiticity_residual(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T)))


def is_hermitian(a: np.ndarray, tol: float = TOL) -> bool:
    return hermiticity_residual(a) <= tol


def _check_square(a: np.ndarray, name: str = "operator") -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``ab - ba``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_square(a, "a")
    _check_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


@dataclass(frozen=True)
class OperatorBasis:
    """Ordered Hermitian traceless basis with ``Tr(s_i s_j) = 2 delta_ij``.

    ``elements[i]`` carries the label ``labels[i] == f"sigma_{i + 1}"``.
    """

    dim: int
    elements: np.ndarray  # shape (dim**2 - 1, dim, dim)
    labels: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, label: str | int) -> np.ndarray:
        return self.elements[self.index(label)]

    def index(self, label: str | int) -> int:
        """Position of a label; integers are the 1-based sigma index."""
        if isinstance(label, (int, np.integer)):
            if not 1 <= label <= len(self.labels):
                raise KeyError(label)
            return int(label) - 1
        return self.labels.index(label)


def gellmann_basis(dim: int) -> OperatorBasis:
    """Generalized Gell-Mann matrices in pair-major order.

    For every level ``k = 1 .. dim-1`` the pairs ``(j, k)`` with ``j < k`` are
    emitted in increasing ``j``, each as the symmetric element followed by the
    antisymmetric one, and the block is closed by the diagonal element that
    first touches level ``k``. This gives sigma_1..sigma_3 = Pauli for the
    first two levels, sigma_8 and sigma_15 as the diagonal elements for three
    and four levels.
    """
    if int(dim) != dim or dim < 2:
        raise ValueError(f"dim must be an integer >= 2, got {dim!r}")
    dim = int(dim)
    elements = []
    for k in range(1, dim):
        for j in range(k):
            elements.append(outer(dim, j, k) + outer(dim, k, j))
            elements.append(-1j * (outer(dim, j, k) - outer(dim, k, j)))
        m = k + 1
        diag = np.zeros(dim)
        diag[:k] = 1.0
        diag[k] = -k
        elements.append(np.sqrt(2.0 / (m * (m - 1))) * np.diag(diag).astype(complex))
    stack = np.array(elements)
    stack.setflags(write=False)
    labels = tuple(f"sigma_{i + 1}" for i in range(len(elements)))
    return OperatorBasis(dim=dim, elements=stack, labels=labels)


def expand_in_basis(a: np.ndarray, basis: OperatorBasis) -> tuple[np.ndarray, float]:
    """Real coefficients with ``a = c0 * I + sum_i c_i * sigma_i``.

    Returns ``(coeffs, c0)`` where ``coeffs[i] = Tr(a sigma_i) / 2`` and
    ``c0 = Tr(a) / dim``.
    """
    a = np.asarray(a, dtype=complex)
    _check_square(a)
    if a.shape[0] != basis.dim:
        raise ValueError(f"dimension mismatch: operator {a.shape[0]}, basis {basis.dim}")
    scale = max(1.0, float(np.max(np.abs(a))))
    if hermiticity_residual(a) > TOL * scale:
        raise ValueError("expand_in_basis requires a Hermitian operator")
    coeffs = np.einsum("ij,kji->k", a, basis.elements).real / 2.0
    identity_coeff = float(np.trace(a).real) / basis.dim
    return coeffs, identity_coeff


def reconstruct(coeffs: np.ndarray, identity_coeff: float, basis: OperatorBasis) -> np.ndarray:
    """Inverse of :func:`expand_in_basis`."""
    return identity_coeff * np.eye(basis.dim) + np.tensordot(coeffs, basis.elements, axes=1)
