"""Level schemes with a single controlled state |0> and an outside space.

Three chains are provided, each with an optional decay rate ``gamma``:

* ``two_level``: 0 -(xi)- 1, decay 1 -> 0
* ``three_level_chain``: 0 -(xi)- 1 -(omega)- 2, decay 2 -> 1
* ``four_level_chain``: 0 -(xi)- 1 -(omega)- 2 -(omega)- 3, decays 2 -> 1 and 3 -> 2

Rabi frequencies are used without the customary factor 1/2, i.e. the
coupling term is ``xi * (|0><1| + |1><0|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .operators import _check_square, hermiticity_residual, outer

MODEL_NAMES = ("two_level", "three_level_chain", "four_level_chain")
DIMS = {"two_level": 2, "three_level_chain": 3, "four_level_chain": 4}


@dataclass(frozen=True)
class ModelParams:
    xi: float = 1.0
    omega: float = 0.0
    gamma: float = 0.0
    # level energies, only read by the interaction-picture check
    free_energies: tuple[float, ...] | None = None

    def __post_init__(self):
        for name in ("xi", "omega", "gamma"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if self.free_energies is not None:
            object.__setattr__(self, "free_energies", tuple(float(w) for w in self.free_energies))
            if not all(math.isfinite(w) for w in self.free_energies):
                raise ValueError("free_energies must be finite")

    @property
    def max_rate(self) -> float:
        return max(self.xi, self.omega, self.gamma)


@dataclass(frozen=True)
class LevelScheme:
    name: str
    dim: int
    h_int: np.ndarray
    collapse_ops: tuple[np.ndarray, ...]
    p_cs: np.ndarray
    params: ModelParams | None = None
    # structural split of h_int into the leakage (slow) and outside (fast) parts
    h_slow: np.ndarray | None = field(default=None, repr=False)
    h_fast: np.ndarray | None = field(default=None, repr=False)

    @property
    def gamma(self) -> float:
        return self.params.gamma if self.params is not None else 0.0

    @property
    def decay_operator(self) -> np.ndarray:
        """``sum_k C_k^dag C_k``."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c in self.collapse_ops:
            out += c.conj().T @ c
        return out

    @property
    def h_nonhermitian(self) -> np.ndarray:
        """No-jump generator ``H - (i/2) sum_k C_k^dag C_k``."""
        return self.h_int - 0.5j * self.decay_operator


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def custom_scheme(
    h_int: np.ndarray,
    collapse_ops: Sequence[np.ndarray] = (),
    p_cs: np.ndarray | None = None,
    *,
    name: str = "custom",
    params: ModelParams | None = None,
    h_slow: np.ndarray | None = None,
    h_fast: np.ndarray | None = None,
) -> LevelScheme:
    """Generic ``(H, {C_k}, P_CS)`` scheme; ``p_cs`` defaults to |0><0|."""
    h = np.asarray(h_int, dtype=complex)
    _check_square(h, "h_int")
    dim = h.shape[0]
    scale = max(1.0, float(np.max(np.abs(h))))
    if hermiticity_residual(h) > 1e-12 * scale:
        raise ValueError("h_int must be Hermitian")
    p = outer(dim, 0, 0) if p_cs is None else np.asarray(p_cs, dtype=complex)
    if p.shape != h.shape:
        raise ValueError("p_cs dimension does not match h_int")
    if hermiticity_residual(p) > 1e-12 or np.max(np.abs(p @ p - p)) > 1e-10:
        raise ValueError("p_cs must be a Hermitian projector")
    cs = []
    for c in collapse_ops:
        c = np.asarray(c, dtype=complex)
        if c.shape != h.shape:
            raise ValueError("collapse operator dimension does not match h_int")
        cs.append(_frozen(c))
    if (h_slow is None) != (h_fast is None):
        raise ValueError("give both h_slow and h_fast or neither")
    if h_slow is not None:
        h_slow, h_fast = _frozen(h_slow), _frozen(h_fast)
    return LevelScheme(
        name=name,
        dim=dim,
        h_int=_frozen(h),
        collapse_ops=tuple(cs),
        p_cs=_frozen(p),
        params=params,
        h_slow=h_slow,
        h_fast=h_fast,
    )


def _sym(dim: int, i: int, j: int) -> np.ndarray:
    return outer(dim, i, j) + outer(dim, j, i)


def build_model(name: str, params: ModelParams) -> LevelScheme:
    """Construct one of the named chains (see module docstring)."""
    if name not in DIMS:
        raise ValueError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")
    d = DIMS[name]
    xi, om, g = params.xi, params.omega, params.gamma
    h_slow = xi * _sym(d, 0, 1)
    if name == "two_level":
        h_fast = np.zeros((d, d), dtype=complex)
        decays = [(0, 1)]
    elif name == "three_level_chain":
        h_fast = om * _sym(d, 1, 2)
        decays = [(1, 2)]
    else:
        h_fast = om * (_sym(d, 1, 2) + _sym(d, 2, 3))
        decays = [(1, 2), (2, 3)]
    collapse = [math.sqrt(g) * outer(d, j, k) for j, k in decays] if g > 0 else []
    return custom_scheme(
        h_slow + h_fast,
        collapse,
        outer(d, 0, 0),
        name=name,
        params=params,
        h_slow=h_slow,
        h_fast=h_fast,
    )


def split_hamiltonian(scheme: LevelScheme) -> tuple[np.ndarray, np.ndarray]:
    """``(h_slow, h_fast)``: xi-terms vs omega-terms of a named scheme."""
    if scheme.h_slow is None:
        raise ValueError(f"scheme {scheme.name!r} carries no slow/fast split; pass one explicitly")
    return scheme.h_slow, scheme.h_fast


# --- interaction picture -----------------------------------------------------


@dataclass(frozen=True)
class CouplingTerm:
    """``amplitude * exp(i * frequency * t) * |bra><ket| + h.c.``"""

    bra: int
    ket: int
    amplitude: complex
    frequency: float


def resonant_terms(name: str, params: ModelParams) -> list[CouplingTerm]:
    """Schroedinger-picture couplings of a named chain, driven on resonance.

    Each term oscillates at ``w_ket - w_bra`` of ``params.free_energies``
    (default: equally spaced levels 0, 1, 2, ...).
    """
    if name not in DIMS:
        raise ValueError(f"unknown model {name!r}")
    d = DIMS[name]
    w = params.free_energies or tuple(float(i) for i in range(d))
    if len(w) != d:
        raise ValueError(f"{name} needs {d} free energies, got {len(w)}")
    pairs = [(0, 1, params.xi)]
    if name == "three_level_chain":
        pairs.append((1, 2, params.omega))
    elif name == "four_level_chain":
        pairs += [(1, 2, params.omega), (2, 3, params.omega)]
    return [CouplingTerm(j, k, amp, w[k] - w[j]) for j, k, amp in pairs]


def _term_matrix(dim: int, term: CouplingTerm, t: float) -> np.ndarray:
    m = term.amplitude * np.exp(1j * term.frequency * t) * outer(dim, term.bra, term.ket)
    return m + m.conj().T


def interaction_picture(
    terms: Sequence[CouplingTerm],
    energies: Sequence[float],
    sample_times: Sequence[float],
    tol: float = 1e-10,
) -> np.ndarray:
    """Transform ``H(t) = sum(terms) + diag(energies)`` into the frame of ``H_0``.

    Evaluates ``exp(iH_0 t)(H(t) - H_0)exp(-iH_0 t)`` at every sample time and
    returns the common value. Raises ``ValueError`` naming the first term
    whose transformed contribution is not constant in time.
    """
    w = np.asarray(energies, dtype=float)
    dim = len(w)
    times = np.asarray(sample_times, dtype=float)
    if times.size == 0:
        raise ValueError("need at least one sample time")
    for term in terms:
        if not (0 <= term.bra < dim and 0 <= term.ket < dim) or term.bra == term.ket:
            raise ValueError(f"invalid levels in {term}")

    def rotate(m: np.ndarray, t: float) -> np.ndarray:
        phase = np.exp(1j * w * t)
        return phase[:, None] * m * phase.conj()[None, :]

    for term in terms:
        ref = rotate(_term_matrix(dim, term, times[0]), times[0])
        for t in times[1:]:
            dev = np.max(np.abs(rotate(_term_matrix(dim, term, t), t) - ref))
            if dev > tol:
                raise ValueError(
                    f"term {term} is not resonant: interaction-picture deviation {dev:.3g} at t={t:g}"
                )

    samples = []
    for t in times:
        h = sum((_term_matrix(dim, term, t) for term in terms), np.zeros((dim, dim), complex))
        samples.append(rotate(h, t))
    samples = np.array(samples)
    dev = float(np.max(np.abs(samples - samples[0])))
    if dev > tol:
        raise ValueError(f"interaction Hamiltonian is time dependent (deviation {dev:.3g})")
    return samples[0]
