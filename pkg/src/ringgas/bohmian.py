"""Bohmian particle dynamics in freely evolving many-body states.

Every Fock state of the ideal gas is an energy eigenstate, so a state
vector evolves by per-component phases only; the guidance velocity of
particle l is v_l = Im(d_l psi / psi).  For two-mode states this is a
closed form in symmetric polynomials of the phase factors (eigenstates:
the field is time independent); general state vectors are handled by
central finite differences of the batched amplitude.

Trajectories follow fixed-step RK4 with local step halving when the
amplitude comes close to a node, wrapped onto [0, L).  Realizations are
integrated as one vectorized batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import FockState, free_energy
from .hamiltonian import StateVector
from .sampling import SampleSet, align_samples, metropolis_sample
from .wavefunction import amplitude_batch, esp_batch, esp_drop_batch, two_mode_view

__all__ = [
    "VelocityField",
    "TrajectorySet",
    "BohmianRun",
    "NearNodeError",
    "evolve_state",
    "velocity",
    "integrate",
    "equivariance_check",
    "harmonic_notch_position",
    "histogram_notch_depth",
]

NODE_FLOOR = 1e-14  # |psi|^2 below this multiple of its config-mean counts as a node
HALVING_FLOOR = 1e-10  # step halving kicks in below this multiple
MAX_HALVINGS = 20
FD_STEP = 1e-6


class NearNodeError(RuntimeError):
    """Velocity requested too close to a node of the wave function."""


def evolve_state(state, t: float, L: float = 1.0):
    """Free evolution: per-component phases exp(-i E_n t) with E_n = kinetic energy.

    A single Fock state only gains a global phase, so it is returned
    unchanged; a StateVector gets its amplitudes rotated.
    """
    if isinstance(state, FockState):
        return state
    if not isinstance(state, StateVector):
        raise TypeError(f"cannot evolve {type(state).__name__}")
    energies = np.array([free_energy(s, L) for s in state.basis.states])
    return StateVector(state.basis, state.amplitudes * np.exp(-1j * energies * t))


@dataclass
class VelocityField:
    """Evaluates all N guidance velocities at configurations (R, N).

    Rows whose |psi|^2 falls below `floor` times the config-space mean
    1/L^N are flagged; `velocities` raises for flagged rows unless asked
    to return the mask instead.
    """

    state: object
    L: float = 1.0
    t: float = 0.0

    def __post_init__(self):
        self._view = two_mode_view(self.state) if isinstance(self.state, FockState) else None
        if isinstance(self.state, StateVector):
            self._evolved = evolve_state(self.state, self.t, self.L)
        N = self.state.particles if isinstance(self.state, FockState) else self.state.basis.N
        self.N = N
        # log of the config-space mean of |psi|^2 for a normalized state
        self._log_mean = -N * math.log(self.L)

    def _two_mode(self, X: np.ndarray):
        view = self._view
        q = 2.0 * np.pi / self.L
        d = np.exp(1j * q * view.dk * X)
        if view.Kp == 0:
            return np.full_like(X, q * view.k1), np.zeros(X.shape[0], dtype=bool)
        e = esp_batch(d, view.Kp)
        eK = e[:, view.Kp]
        drop = esp_drop_batch(e, d, view.Kp - 1)
        log_density = 2.0 * (np.log(np.abs(eK) + 1e-300) + view.log_norm(self.L))
        low = log_density - self._log_mean < math.log(NODE_FLOOR)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(eK[:, None] != 0, d * drop / eK[:, None], 0.0)
        v = q * view.k1 + q * view.dk * np.real(ratio)
        return v, low

    def _finite_difference(self, X: np.ndarray):
        state = self._evolved if isinstance(self.state, StateVector) else self.state
        R, N = X.shape
        h = FD_STEP * self.L
        stack = [X]
        for l in range(N):
            for s in (h, -h):
                Xs = X.copy()
                Xs[:, l] = np.mod(Xs[:, l] + s, self.L)
                stack.append(Xs)
        amps = amplitude_batch(state, np.concatenate(stack, axis=0), self.L)
        psi = amps[:R]
        dens = np.abs(psi) ** 2
        low = dens < NODE_FLOOR * math.exp(self._log_mean)
        v = np.empty((R, N))
        for l in range(N):
            plus = amps[(1 + 2 * l) * R : (2 + 2 * l) * R]
            minus = amps[(2 + 2 * l) * R : (3 + 2 * l) * R]
            with np.errstate(divide="ignore", invalid="ignore"):
                v[:, l] = np.imag(np.where(psi != 0, (plus - minus) / (2.0 * h * psi), 0.0))
        return v, low

    def velocities(self, X: np.ndarray, return_mask: bool = False):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self._view is not None:
            v, low = self._two_mode(X)
        else:
            v, low = self._finite_difference(X)
        if return_mask:
            return v, low
        if np.any(low):
            raise NearNodeError(f"{int(low.sum())} configuration(s) too close to a node")
        return v

    def halving_mask(self, X: np.ndarray) -> np.ndarray:
        """Rows whose density is low enough to warrant a smaller step."""
        if self._view is not None and self._view.Kp > 0:
            q = 2.0 * np.pi / self.L
            d = np.exp(1j * q * self._view.dk * X)
            eK = esp_batch(d, self._view.Kp)[:, self._view.Kp]
            log_density = 2.0 * (np.log(np.abs(eK) + 1e-300) + self._view.log_norm(self.L))
            return log_density - self._log_mean < math.log(HALVING_FLOOR)
        state = self._evolved if isinstance(self.state, StateVector) else self.state
        dens = np.abs(amplitude_batch(state, X, self.L)) ** 2
        return dens < HALVING_FLOOR * math.exp(self._log_mean)


def velocity(state, t: float, config, L: float = 1.0) -> np.ndarray:
    """Guidance velocities of all N particles at one configuration."""
    from .wavefunction import PositionConfig

    if isinstance(config, PositionConfig):
        config, L = config.positions, config.L
    return VelocityField(state, L=L, t=t).velocities(np.asarray(config, dtype=float))[0]


@dataclass
class TrajectorySet:
    """Positions of one realization's N particles at the recorded times."""

    times: np.ndarray
    positions: np.ndarray  # (n_times, N), wrapped into [0, L)
    realization: int
    seed: object = None


@dataclass
class BohmianRun:
    """Batch integration result: snapshot positions for every realization."""

    times: np.ndarray
    snapshots: np.ndarray  # (R, n_times, N)
    L: float
    aborted: np.ndarray  # realizations whose step control underflowed
    halving_events: int
    paths: list[TrajectorySet] = field(default_factory=list)  # dense, first few realizations

    @property
    def realizations(self) -> list[TrajectorySet]:
        return [
            TrajectorySet(times=self.times, positions=self.snapshots[r], realization=r)
            for r in range(self.snapshots.shape[0])
        ]

    def sample_set_at(self, i: int) -> SampleSet:
        ok = ~self.aborted
        return SampleSet(
            positions=self.snapshots[ok, i, :],
            L=self.L,
            provenance={"method": "bohmian", "time": float(self.times[i])},
        )


def _rk4_step(fields, t: float, X: np.ndarray, dt: float, L: float) -> np.ndarray:
    k1 = fields(t).velocities(X)
    k2 = fields(t + 0.5 * dt).velocities(np.mod(X + 0.5 * dt * k1, L))
    k3 = fields(t + 0.5 * dt).velocities(np.mod(X + 0.5 * dt * k2, L))
    k4 = fields(t + dt).velocities(np.mod(X + dt * k3, L))
    return np.mod(X + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), L)


def integrate(
    state,
    initial: SampleSet,
    dt: float = 1e-3,
    T: float | None = None,
    t_snapshots=None,
    n_paths: int = 10,
    L: float | None = None,
) -> BohmianRun:
    """Integrate dx_l/dt = v_l for every shot of `initial`.

    Fixed-step RK4; a realization whose amplitude drops near a node gets
    its step halved locally (up to MAX_HALVINGS, then it is marked
    aborted and frozen).  Snapshots are recorded at the requested times
    (multiples of dt); the first `n_paths` realizations also keep their
    full per-step paths.
    """
    L = initial.L if L is None else L
    if t_snapshots is None:
        if T is None:
            raise ValueError("need T or t_snapshots")
        t_snapshots = [T]
    t_snapshots = sorted(float(t) for t in t_snapshots)
    T_end = t_snapshots[-1]
    n_steps = int(round(T_end / dt))
    if abs(n_steps * dt - T_end) > 1e-9 * max(1.0, T_end):
        raise ValueError("final snapshot time must be a multiple of dt")
    snap_steps = {}
    for ts in t_snapshots:
        k = int(round(ts / dt))
        if abs(k * dt - ts) > 1e-9:
            raise ValueError(f"snapshot time {ts} is not a multiple of dt={dt}")
        snap_steps[k] = ts

    X = initial.positions.copy()
    R, N = X.shape
    is_eigen = isinstance(state, FockState)
    field_cache: dict[float, VelocityField] = {}

    def fields(t: float) -> VelocityField:
        key = 0.0 if is_eigen else round(t, 12)
        fld = field_cache.get(key)
        if fld is None:
            if len(field_cache) > 8:
                field_cache.clear()
            fld = VelocityField(state, L=L, t=key)
            field_cache[key] = fld
        return fld

    aborted = np.zeros(R, dtype=bool)
    halvings = 0
    times_rec: list[float] = []
    snaps: list[np.ndarray] = []
    if 0 in snap_steps:
        times_rec.append(0.0)
        snaps.append(X.copy())
    n_paths = min(n_paths, R)
    path_times = [0.0]
    path_pos = [X[:n_paths].copy()]

    def advance_rows(rows: np.ndarray, t: float, dt_loc: float, depth: int) -> np.ndarray:
        """RK4 on a row subset with recursive halving near nodes."""
        nonlocal halvings
        sub = X[rows]
        need_halving = fields(t).halving_mask(sub)
        if depth < MAX_HALVINGS and np.any(need_halving):
            halvings += int(need_halving.sum())
            fine = rows[need_halving]
            coarse = rows[~need_halving]
            if coarse.size:
                X[coarse] = _rk4_step(fields, t, X[coarse], dt_loc, L)
            if fine.size:
                advance_rows(fine, t, dt_loc / 2.0, depth + 1)
                advance_rows(fine, t + dt_loc / 2.0, dt_loc / 2.0, depth + 1)
            return rows
        if depth >= MAX_HALVINGS:
            aborted[rows] = True
            return rows
        try:
            X[rows] = _rk4_step(fields, t, X[rows], dt_loc, L)
        except NearNodeError:
            if depth + 1 >= MAX_HALVINGS:
                aborted[rows] = True
            else:
                halvings += rows.size
                advance_rows(rows, t, dt_loc / 2.0, depth + 1)
                advance_rows(rows, t + dt_loc / 2.0, dt_loc / 2.0, depth + 1)
        return rows

    all_rows = np.arange(R)
    for step in range(n_steps):
        t = step * dt
        active = all_rows[~aborted]
        if active.size:
            advance_rows(active, t, dt, 0)
        if step + 1 in snap_steps:
            times_rec.append((step + 1) * dt)
            snaps.append(X.copy())
        if n_paths:
            path_times.append((step + 1) * dt)
            path_pos.append(X[:n_paths].copy())

    times = np.array(times_rec)
    snapshots = np.stack(snaps, axis=1) if snaps else np.empty((R, 0, N))
    paths = []
    if n_paths:
        parr = np.stack(path_pos, axis=1)  # (n_paths, steps+1, N)
        pt = np.array(path_times)
        paths = [
            TrajectorySet(times=pt, positions=parr[r], realization=r)
            for r in range(n_paths)
        ]
    return BohmianRun(
        times=times,
        snapshots=snapshots,
        L=L,
        aborted=aborted,
        halving_events=halvings,
        paths=paths,
    )


# ---------------------------------------------------------------------------
# histogram metrics and consistency checks


def harmonic_notch_position(positions: np.ndarray, L: float = 1.0, harmonic: int = 1) -> float:
    """Notch location from the pooled positions' first (or m-th) circular moment.

    For a density 1 + cos-like profile the m-th Fourier coefficient points
    at the density maximum; the notch sits half a period away.  Resolution
    is sub-bin since no histogram is involved.  With harmonic m the result
    is defined modulo L/m.
    """
    q = 2.0 * np.pi * harmonic / L
    c = np.exp(1j * q * np.asarray(positions).ravel()).mean()
    peak = np.angle(c) / q
    period = L / harmonic
    return float(np.mod(peak + period / 2.0, period))


def histogram_notch_depth(hist) -> float:
    """Relative depth (mean - min)/mean of a histogram's density; 0 = flat."""
    dens = hist.density
    mean = dens.mean()
    return float((mean - dens.min()) / mean)


@dataclass
class EquivarianceReport:
    ks_statistic: float
    p_value: float
    n_realizations: int
    aborted: int
    halving_events: int


def equivariance_check(
    state,
    dt: float = 1e-3,
    T: float = 0.1,
    n_realizations: int = 1000,
    seed=0,
    L: float = 1.0,
    burn_in: int | None = None,
) -> EquivarianceReport:
    """Bohmian consistency: positions at T are distributed as |psi(T)|^2.

    Integrates realizations started from |psi(0)|^2 and compares their
    aligned single-particle marginal at T against direct Metropolis
    samples of the evolved state (two-sample Kolmogorov-Smirnov).
    """
    from scipy import stats

    initial = metropolis_sample(state, n_realizations, seed=seed, L=L, burn_in=burn_in)
    run = integrate(state, initial, dt=dt, T=T, n_paths=0)
    moved = align_samples(run.sample_set_at(-1))

    evolved = evolve_state(state, T, L)
    direct = align_samples(
        metropolis_sample(evolved, n_realizations, seed=seed + 1, L=L, burn_in=burn_in)
    )
    ks = stats.ks_2samp(moved.positions[:, 0], direct.positions[:, 0])
    return EquivarianceReport(
        ks_statistic=float(ks.statistic),
        p_value=float(ks.pvalue),
        n_realizations=n_realizations,
        aborted=int(run.aborted.sum()),
        halving_events=run.halving_events,
    )
