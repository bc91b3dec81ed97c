"""Quantum-jump unraveling of the damped schemes.

Between jumps a trajectory follows ``exp(-i K t)|psi>`` with the no-jump
generator ``K = H - (i/2) sum_k C_k^dag C_k``. A jump fires when the squared
norm falls below a uniform random threshold drawn at the start of the
segment; the crossing time is located by bisection, the channel is drawn
with weights ``||C_k psi||^2`` and the state is renormalized.

All trajectories of an ensemble are advanced together. Each trajectory owns
a Philox stream keyed by ``(seed, trajectory index)``, so results do not
depend on how an ensemble is split into batches.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .models import LevelScheme

EIG_COND_MAX = 1e6
TIME_TOL = 1e-6  # in units of 1 / (largest decay rate)


@dataclass(frozen=True)
class JumpRecord:
    time: float
    channel: int


@dataclass
class TrajectoryResult:
    jumps: list[JumpRecord]
    sample_times: np.ndarray
    states: np.ndarray  # (n_samples, dim), normalized

    @property
    def jump_times(self) -> np.ndarray:
        return np.array([j.time for j in self.jumps])


@dataclass
class EnsembleResult:
    seed: int
    t_max: float
    jump_times: list[np.ndarray]
    jump_channels: list[np.ndarray]
    sample_times: np.ndarray
    populations: np.ndarray | None  # (n_traj, n_samples, dim)

    @property
    def n_traj(self) -> int:
        return len(self.jump_times)

    def mean_populations(self) -> tuple[np.ndarray, np.ndarray]:
        """Ensemble mean and standard error of the level populations."""
        pops = self.populations
        mean = pops.mean(axis=0)
        se = pops.std(axis=0, ddof=1) / math.sqrt(pops.shape[0])
        return mean, se

    def write_jumps_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["traj_id", "t", "channel"])
            for i, (ts, ch) in enumerate(zip(self.jump_times, self.jump_channels)):
                for t, c in zip(ts, ch):
                    w.writerow([i, f"{t:.12g}", int(c)])


class Propagator:
    """``exp(-i K tau) psi`` for many ``(tau, psi)`` pairs at once."""

    def __init__(self, k: np.ndarray):
        self.k = np.asarray(k, dtype=complex)
        w, v = np.linalg.eig(self.k)
        self.use_eig = np.linalg.cond(v) < EIG_COND_MAX
        if self.use_eig:
            self.w = w
            self.v = v
            self.vinv = np.linalg.inv(v)

    def __call__(self, tau: np.ndarray, psi: np.ndarray) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        if self.use_eig:
            c = psi @ self.vinv.T
            c = c * np.exp(-1j * tau[:, None] * self.w[None, :])
            return c @ self.v.T
        # near an exceptional point the eigenbasis is ill-conditioned
        u = expm(-1j * tau[:, None, None] * self.k[None])
        return np.einsum("nab,nb->na", u, psi)


class _Streams:
    """Buffered uniforms from one Philox generator per trajectory."""

    def __init__(self, seed: int, traj_ids: Sequence[int], block: int = 64):
        self.gens = [
            np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(int(i),))))
            for i in traj_ids
        ]
        self.block = block
        self.buf = np.array([g.random(block) for g in self.gens]) if self.gens else np.zeros((0, block))
        self.pos = np.zeros(len(self.gens), dtype=np.int64)

    def take(self, rows: np.ndarray) -> np.ndarray:
        for i in rows[self.pos[rows] >= self.block]:
            self.buf[i] = self.gens[i].random(self.block)
            self.pos[i] = 0
        out = self.buf[rows, self.pos[rows]]
        self.pos[rows] += 1
        return out


def _normalize(psi: np.ndarray) -> np.ndarray:
    return psi / np.linalg.norm(psi, axis=-1, keepdims=True)


def _simulate(
    scheme: LevelScheme,
    psi0: np.ndarray,
    t_max: float,
    seed: int,
    traj_ids: Sequence[int],
    sample_times: np.ndarray | None,
    keep_states: bool,
):
    if not scheme.collapse_ops:
        raise ValueError("quantum-jump unraveling needs gamma > 0 (no collapse operators)")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (scheme.dim,):
        raise ValueError(f"psi0 must have length {scheme.dim}")
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise ValueError("psi0 must be normalized")

    d = scheme.dim
    n = len(traj_ids)
    cs = np.array(scheme.collapse_ops)
    decay_scale = float(np.max(np.linalg.eigvalsh(scheme.decay_operator)))
    prop = Propagator(scheme.h_nonhermitian)
    rate = max(decay_scale, float(np.max(np.abs(np.linalg.eigvals(scheme.h_nonhermitian)))))
    h0 = 0.25 / rate
    tol = TIME_TOL / decay_scale

    cps = np.array([], float) if sample_times is None else np.asarray(sample_times, float)
    if cps.size and (np.any(np.diff(cps) < 0) or cps[0] < 0 or cps[-1] > t_max):
        raise ValueError("sample_times must be sorted and lie in [0, t_max]")
    samples = np.zeros((n, cps.size, d), dtype=complex if keep_states else float)

    streams = _Streams(seed, traj_ids)
    all_rows = np.arange(n)
    start = np.tile(psi0, (n, 1))
    t0 = np.zeros(n)
    tau = np.zeros(n)
    step = np.full(n, h0)
    r = streams.take(all_rows)
    active = np.ones(n, dtype=bool)
    next_cp = np.zeros(n, dtype=np.int64)
    rec_traj, rec_t, rec_ch = [], [], []

    def store(rows, psi):
        psi = _normalize(psi)
        samples[rows, next_cp[rows]] = psi if keep_states else np.abs(psi) ** 2

    # samples at t = 0
    while cps.size:
        rows = all_rows[(next_cp < cps.size) & (cps[np.minimum(next_cp, cps.size - 1)] <= 0.0)]
        if rows.size == 0:
            break
        store(rows, start[rows])
        next_cp[rows] += 1

    while active.any():
        a = np.flatnonzero(active)
        lo = tau[a]
        hi = np.minimum(lo + step[a], t_max - t0[a])
        psi_hi = prop(hi, start[a])
        crossed = np.einsum("na,na->n", psi_hi.conj(), psi_hi).real < r[a]

        end = hi.copy()
        if crossed.any():
            c = a[crossed]
            blo, bhi = lo[crossed], hi[crossed]
            # per-row iteration counts keep each result independent of the batch
            n_iter = np.ceil(np.log2(np.maximum(bhi - blo, tol) / tol)).astype(np.int64)
            for k in range(int(n_iter.max(initial=0))):
                live = n_iter > k
                mid = 0.5 * (blo + bhi)
                pm = prop(mid, start[c])
                below = np.einsum("na,na->n", pm.conj(), pm).real < r[c]
                bhi = np.where(live & below, mid, bhi)
                blo = np.where(live & ~below, mid, blo)
            end[crossed] = bhi

        # samples inside (t0 + lo, t0 + end]
        if cps.size:
            t_end = t0[a] + end
            while True:
                has = next_cp[a] < cps.size
                due = has & (cps[np.minimum(next_cp[a], cps.size - 1)] <= t_end)
                if not due.any():
                    break
                rows = a[due]
                store(rows, prop(cps[next_cp[rows]] - t0[rows], start[rows]))
                next_cp[rows] += 1

        calm = ~crossed
        if calm.any():
            rows = a[calm]
            tau[rows] = hi[calm]
            step[rows] *= 2.0
            finished = rows[t0[rows] + tau[rows] >= t_max * (1 - 1e-15)]
            active[finished] = False

        if crossed.any():
            c = a[crossed]
            tj = end[crossed]
            psi = prop(tj, start[c])
            kicked = np.einsum("kab,nb->nka", cs, psi)
            weights = np.einsum("nka,nka->nk", kicked.conj(), kicked).real
            total = weights.sum(axis=1)
            if np.any(total <= 0):
                raise ArithmeticError("jump fired in a state with vanishing emission rate")
            u = streams.take(c)
            cum = np.cumsum(weights, axis=1) / total[:, None]
            chan = np.minimum((cum < u[:, None]).sum(axis=1), cs.shape[0] - 1)
            new = kicked[np.arange(c.size), chan]
            start[c] = _normalize(new)
            t0[c] = t0[c] + tj
            tau[c] = 0.0
            step[c] = h0
            r[c] = streams.take(c)
            rec_traj.append(c)
            rec_t.append(t0[c].copy())
            rec_ch.append(chan)
            done = c[t0[c] >= t_max]
            active[done] = False

    if rec_traj:
        tr = np.concatenate(rec_traj)
        tt = np.concatenate(rec_t)
        ch = np.concatenate(rec_ch)
        order = np.lexsort((tt, tr))
        tr, tt, ch = tr[order], tt[order], ch[order]
        bounds = np.searchsorted(tr, np.arange(n + 1))
        jump_times = [tt[bounds[i] : bounds[i + 1]] for i in range(n)]
        jump_channels = [ch[bounds[i] : bounds[i + 1]] for i in range(n)]
    else:
        jump_times = [np.zeros(0) for _ in range(n)]
        jump_channels = [np.zeros(0, dtype=np.int64) for _ in range(n)]
    return jump_times, jump_channels, cps, samples


def run_trajectory(
    scheme: LevelScheme,
    psi0,
    t_max: float,
    seed: int,
    sample_times=None,
    traj_index: int = 0,
) -> TrajectoryResult:
    """A single trajectory with its normalized states on ``sample_times``.

    ``traj_index`` selects the random stream, so ``run_trajectory(..., i)``
    reproduces trajectory ``i`` of :func:`run_ensemble` with the same seed.
    """
    times, chans, cps, states = _simulate(
        scheme, psi0, t_max, seed, [traj_index], sample_times, keep_states=True
    )
    jumps = [JumpRecord(float(t), int(c)) for t, c in zip(times[0], chans[0])]
    return TrajectoryResult(jumps=jumps, sample_times=cps, states=states[0])


def run_ensemble(
    scheme: LevelScheme,
    psi0,
    t_max: float,
    n_traj: int,
    seed: int,
    sample_times=None,
    batch_size: int = 20000,
) -> EnsembleResult:
    """``n_traj`` trajectories; populations are recorded on ``sample_times``."""
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    jt, jc, pops = [], [], []
    cps = None
    for lo in range(0, n_traj, batch_size):
        ids = range(lo, min(lo + batch_size, n_traj))
        times, chans, cps, samples = _simulate(scheme, psi0, t_max, seed, ids, sample_times, False)
        jt += times
        jc += chans
        pops.append(samples)
    populations = np.concatenate(pops) if sample_times is not None else None
    return EnsembleResult(
        seed=seed,
        t_max=t_max,
        jump_times=jt,
        jump_channels=jc,
        sample_times=cps,
        populations=populations,
    )


@dataclass
class TrajectoryStats:
    n_traj: int
    seed: int | None
    dark_threshold: float
    mean_dark_period: float | None
    dark_period_samples: np.ndarray = field(repr=False)
    emission_rate_light: float | None
    n_censored: int = 0

    @property
    def n_samples(self) -> int:
        return int(self.dark_period_samples.size)

    def csv_row(self) -> dict:
        fmt = lambda x: "" if x is None else f"{x:.12g}"  # noqa: E731
        return {
            "n_traj": self.n_traj,
            "seed": "" if self.seed is None else self.seed,
            "threshold": f"{self.dark_threshold:.12g}",
            "mean_dark": fmt(self.mean_dark_period),
            "n_samples": self.n_samples,
            "rate_light": fmt(self.emission_rate_light),
        }


STATS_FIELDS = ("n_traj", "seed", "threshold", "mean_dark", "n_samples", "rate_light")


def _as_times(rec) -> np.ndarray:
    if isinstance(rec, TrajectoryResult):
        return rec.jump_times
    rec = list(rec) if not isinstance(rec, np.ndarray) else rec
    if len(rec) and isinstance(rec[0], JumpRecord):
        return np.array([j.time for j in rec])
    return np.asarray(rec, dtype=float)


def dark_period_stats(records, dark_threshold: float, t_max: float, seed: int | None = None) -> TrajectoryStats:
    """Split emission gaps into dark periods (``>= dark_threshold``) and light ones.

    Only gaps between two emissions are used. The gap from the last emission
    to ``t_max`` is censored and only counted in ``n_censored``. The light
    emission rate is the number of short gaps over their total duration.
    """
    if dark_threshold <= 0:
        raise ValueError("dark_threshold must be positive")
    if isinstance(records, EnsembleResult):
        seed = records.seed if seed is None else seed
        records = records.jump_times
    records = list(records)
    if not records:
        raise ValueError("no trajectories given")
    dark, light = [], []
    censored = 0
    for rec in records:
        t = _as_times(rec)
        if t.size and np.any(np.diff(t) <= 0):
            raise ValueError("jump times must be strictly increasing")
        gaps = np.diff(t)
        dark.append(gaps[gaps >= dark_threshold])
        light.append(gaps[gaps < dark_threshold])
        if t.size and t_max - t[-1] >= dark_threshold:
            censored += 1
    dark = np.concatenate(dark)
    light = np.concatenate(light)
    light_time = light.sum()
    return TrajectoryStats(
        n_traj=len(records),
        seed=seed,
        dark_threshold=dark_threshold,
        mean_dark_period=float(dark.mean()) if dark.size else None,
        dark_period_samples=dark,
        emission_rate_light=float(light.size / light_time) if light_time > 0 else None,
        n_censored=censored,
    )
