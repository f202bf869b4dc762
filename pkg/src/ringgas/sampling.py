"""Position sampling from many-body densities, alignment, histograms.

Measurement shots are N-point configurations drawn from |psi|^2, either
with a Metropolis chain (single-particle circular proposals) or by the
sequential scheme: x_1 uniform, every further particle from its exact
one-dimensional conditional marginal.  For states occupying at most two
modes the marginals are closed forms in elementary symmetric polynomials,
so shots at N ~ 32 stay cheap; general state vectors fall back to Monte
Carlo marginalization.

Ring translational symmetry makes raw single-particle marginals uniform;
structure appears only after rotating every shot so its center of mass
(vector sum of the unit vectors pointing at the particles) faces a fixed
direction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .basis import FockState
from .hamiltonian import StateVector
from .wavefunction import (
    PositionConfig,
    amplitude_batch,
    dicke_SM,
    esp_batch,
    two_mode_view,
)

__all__ = [
    "SampleSet",
    "AlignedHistogram",
    "DepthHistogram",
    "UndefinedDirectionError",
    "metropolis_sample",
    "sequential_sample",
    "sequential_draw",
    "conditional_marginal",
    "center_of_mass",
    "align_samples",
    "histogram",
    "notch_depth_histogram",
    "acceptance_probability",
    "derive_seed",
]

SEQUENTIAL_GRID = 4096
MC_MARGINAL_DRAWS = 128


class UndefinedDirectionError(ValueError):
    """Center-of-mass vector canceled (antipodal configuration)."""


def derive_seed(master, task: str, index: int = 0) -> np.random.SeedSequence:
    """Deterministic per-task seed: SeedSequence([master, crc32(task), index])."""
    import zlib

    return np.random.SeedSequence([int(master), zlib.crc32(task.encode()), int(index)])


@dataclass
class SampleSet:
    """Measurement shots: row r holds the N positions of shot r."""

    positions: np.ndarray
    L: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))

    def __len__(self):
        return self.positions.shape[0]

    def __getitem__(self, r) -> PositionConfig:
        return PositionConfig(self.positions[r], self.L)

    @property
    def N(self) -> int:
        return self.positions.shape[1]


@dataclass
class AlignedHistogram:
    """Pooled particle positions of (aligned) shots, binned over [0, L)."""

    bin_edges: np.ndarray
    counts: np.ndarray
    total: int
    reference_direction: float
    L: float

    @property
    def density(self) -> np.ndarray:
        """Probability density per bin (integrates to 1 over the ring)."""
        widths = np.diff(self.bin_edges)
        return self.counts / (self.total * widths)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


def _n_particles(state) -> int:
    if isinstance(state, StateVector):
        return state.basis.N
    if isinstance(state, FockState):
        return state.particles
    raise TypeError(f"cannot sample {type(state).__name__}")


def _density_fn(state, L: float):
    """Vectorized |psi|^2 evaluator over configuration rows (unnormalized)."""
    if isinstance(state, FockState):
        view = two_mode_view(state)
        if view is not None:
            q = 2.0 * np.pi / L

            def dens(X):
                d = np.exp(1j * q * view.dk * X)
                return np.abs(esp_batch(d, view.Kp)[:, view.Kp]) ** 2

            return dens

    def dens(X):
        return np.abs(amplitude_batch(state, X, L)) ** 2

    return dens


def acceptance_probability(p_new: float, p_old: float) -> float:
    """Metropolis rule min(1, p_new/p_old) for an unnormalized target."""
    if p_old <= 0.0:
        return 1.0
    return min(1.0, p_new / p_old)


def metropolis_sample(
    state,
    n_samples: int,
    burn_in: int | None = None,
    thinning: int | None = None,
    proposal_width: float | None = None,
    seed=0,
    L: float = 1.0,
    n_chains: int | None = None,
) -> SampleSet:
    """Markov chain over configurations with target |psi|^2.

    One sweep = N single-particle proposals (particle picked at random,
    circular Gaussian step of `proposal_width`, default L/8).  `burn_in`
    and `thinning` count sweeps; defaults 1000*N and N.  Several chains
    run in lockstep so the sweep loop vectorizes; every chain gets a
    derived seed, and the output is reproducible for a fixed seed.
    """
    if n_samples < 1:
        raise ValueError("need n_samples >= 1")
    N = _n_particles(state)
    if burn_in is None:
        burn_in = 1000 * N
    if thinning is None:
        thinning = N
    if proposal_width is None:
        proposal_width = L / 8.0
    C = n_chains or min(n_samples, 64)
    per_chain = -(-n_samples // C)  # ceil
    dens = _density_fn(state, L)
    rng = np.random.default_rng(derive_seed(seed, "metropolis"))

    X = rng.uniform(0.0, L, size=(C, N))
    p = dens(X)
    for _ in range(100):
        bad = p <= 0.0
        if not np.any(bad):
            break
        X[bad] = rng.uniform(0.0, L, size=(int(bad.sum()), N))
        p = dens(X)
    else:
        raise RuntimeError("could not find a nonzero-density starting point")

    accepted = 0
    proposed = 0
    kept = []

    def sweep():
        nonlocal accepted, proposed, X, p
        for _ in range(N):
            l = rng.integers(0, N, size=C)
            step = rng.normal(0.0, proposal_width, size=C)
            Xp = X.copy()
            Xp[np.arange(C), l] = np.mod(Xp[np.arange(C), l] + step, L)
            pp = dens(Xp)
            u = rng.uniform(size=C)
            acc = u * p < pp  # min(1, pp/p) without dividing by zero
            X[acc] = Xp[acc]
            p = np.where(acc, pp, p)
            accepted += int(acc.sum())
            proposed += C

    for _ in range(burn_in):
        sweep()
    for _ in range(per_chain):
        for _ in range(thinning):
            sweep()
        kept.append(X.copy())

    samples = np.concatenate(kept, axis=0)[:n_samples]
    rate = accepted / proposed if proposed else 0.0
    if not 0.1 <= rate <= 0.9:
        warnings.warn(
            f"Metropolis acceptance rate {rate:.3f} outside [0.1, 0.9]; "
            "consider tuning proposal_width",
            stacklevel=2,
        )
    return SampleSet(
        positions=samples,
        L=L,
        provenance={
            "method": "metropolis",
            "seed": seed,
            "burn_in": burn_in,
            "thinning": thinning,
            "proposal_width": proposal_width,
            "acceptance_rate": rate,
            "n_chains": C,
        },
    )


# ---------------------------------------------------------------------------
# sequential (conditional-marginal) sampling


def _two_mode_marginal_weights(view, j: int):
    """Binomial weights C(N-j, Kp-r) for the r-sum of the step-j marginal."""
    N, Kp = view.N, view.Kp
    rest = N - j
    w = np.zeros(Kp + 1)
    for r in range(Kp + 1):
        if 0 <= Kp - r <= rest:
            w[r] = math.comb(rest, Kp - r)
    return w


def _marginal_harmonics(view, e: np.ndarray, j: int):
    """Coefficients (A, B) with P(x_j | prefix) ~ A + 2 Re(B e^{i q dk x_j}).

    The step-j marginal is sum_r C(N-j, Kp-r) |e_r + d(x) e_{r-1}|^2 over
    the prefix polynomials e (trailing particles integrate out by mode
    orthogonality), which collapses to a single harmonic in x_j.
    """
    w = _two_mode_marginal_weights(view, j)
    abs2 = np.abs(e) ** 2
    A = abs2 @ w
    wl = np.zeros_like(w)
    wl[:-1] = w[1:]  # weight of |e_{r-1}|^2 contributions
    A = A + abs2 @ wl
    B = (e[:, :-1] * np.conj(e[:, 1:])) @ w[1:]
    return A, B


def conditional_marginal(state, prefix, x, L: float = 1.0) -> np.ndarray:
    """Normalized density P(x_j | x_1..x_{j-1}) of the next sequential draw.

    Exact for two-mode states; the trailing particles are integrated out
    analytically.  `x` is the evaluation grid (assumed uniform over [0, L)
    for the normalization).
    """
    prefix = np.asarray(prefix, dtype=float)
    x = np.asarray(x, dtype=float)
    view = two_mode_view(state) if isinstance(state, FockState) else None
    if view is None:
        raise ValueError("exact conditional marginals exist for two-mode states only")
    q = 2.0 * np.pi / L
    j = prefix.size + 1
    if j > view.N:
        raise ValueError("prefix already holds all particles")
    e = esp_batch(np.exp(1j * q * view.dk * prefix)[None, :], view.Kp)
    A, B = _marginal_harmonics(view, e, j)
    pdf = A[0] + 2.0 * np.real(B[0] * np.exp(1j * q * view.dk * x))
    return pdf / (pdf.sum() * (L / x.size))


def _sequential_two_mode(view, n_samples: int, rng, L: float, grid_size: int) -> np.ndarray:
    """Exact sequential draw for a two-mode state, vectorized over samples."""
    N, Kp = view.N, view.Kp
    q = 2.0 * np.pi / L
    R = n_samples
    G = grid_size
    xg = np.arange(G) * (L / G)
    dg = np.exp(1j * q * view.dk * xg)  # (G,)

    out = np.empty((R, N))
    out[:, 0] = rng.uniform(0.0, L, size=R)
    e = np.zeros((R, Kp + 1), dtype=complex)
    e[:, 0] = 1.0
    d0 = np.exp(1j * q * view.dk * out[:, 0])
    for r in range(min(1, Kp), 0, -1):
        e[:, r] += d0 * e[:, r - 1]

    for j in range(2, N + 1):
        A, B = _marginal_harmonics(view, e, j)
        pdf = A[:, None] + 2.0 * np.real(B[:, None] * dg[None, :])
        np.clip(pdf, 0.0, None, out=pdf)  # guard tiny negative round-off
        x_new = _inverse_cdf_rows(pdf, rng, L)
        out[:, j - 1] = x_new
        d_new = np.exp(1j * q * view.dk * x_new)
        for r in range(min(j, Kp), 0, -1):
            e[:, r] += d_new * e[:, r - 1]
    return out


def _inverse_cdf_rows(pdf: np.ndarray, rng, L: float) -> np.ndarray:
    """Sample one point per row from a gridded density (linear within bins)."""
    R, G = pdf.shape
    cdf = np.cumsum(pdf, axis=1)
    total = cdf[:, -1]
    if np.any(total <= 0):
        raise RuntimeError("degenerate conditional: zero mass on the grid")
    u = rng.uniform(size=R) * total
    idx = np.minimum((cdf < u[:, None]).sum(axis=1), G - 1)
    prev = np.where(idx > 0, cdf[np.arange(R), idx - 1], 0.0)
    frac = (u - prev) / np.maximum(cdf[np.arange(R), idx] - prev, 1e-300)
    return np.mod((idx + frac) * (L / G), L)


def _sequential_general(state, n_samples: int, rng, L: float, grid_size: int) -> np.ndarray:
    """Monte Carlo marginalization fallback for general state vectors."""
    N = _n_particles(state)
    G = min(grid_size, 256)
    S = MC_MARGINAL_DRAWS
    xg = np.arange(G) * (L / G)
    out = np.empty((n_samples, N))
    for r in range(n_samples):
        out[r, 0] = rng.uniform(0.0, L)
        for j in range(2, N + 1):
            rest = rng.uniform(0.0, L, size=(S, N - j))
            # configs: (G*S, N) with prefix fixed, x_j on grid, rest random
            cfg = np.empty((G * S, N))
            cfg[:, : j - 1] = out[r, : j - 1]
            cfg[:, j - 1] = np.repeat(xg, S)
            if N - j:
                cfg[:, j:] = np.tile(rest, (G, 1))
            dens = np.abs(amplitude_batch(state, cfg, L)) ** 2
            pdf = dens.reshape(G, S).mean(axis=1)[None, :]
            out[r, j - 1] = _inverse_cdf_rows(pdf, rng, L)[0]
    return out


def sequential_sample(
    state, n_samples: int, seed=0, L: float = 1.0, grid_size: int = SEQUENTIAL_GRID,
    n_positions: int | None = None,
) -> SampleSet:
    """Draw shots position-by-position from exact conditional marginals.

    `n_positions` < N draws only the leading particles (used for
    conditional-depth statistics on the remaining one).
    """
    if n_samples < 1:
        raise ValueError("need n_samples >= 1")
    N = _n_particles(state)
    rng = np.random.default_rng(derive_seed(seed, "sequential"))
    if isinstance(state, FockState) and two_mode_view(state) is not None:
        pos = _sequential_two_mode(two_mode_view(state), n_samples, rng, L, grid_size)
    else:
        pos = _sequential_general(state, n_samples, rng, L, grid_size)
    if n_positions is not None:
        pos = pos[:, :n_positions]
    return SampleSet(
        positions=pos,
        L=L,
        provenance={
            "method": "sequential",
            "seed": seed,
            "grid_size": grid_size,
            "burn_in": 0,
            "thinning": 0,
            "acceptance_rate": 1.0,
        },
    )


def sequential_draw(state, seed=0, L: float = 1.0, grid_size: int = SEQUENTIAL_GRID) -> PositionConfig:
    """One full configuration drawn sequentially."""
    return sequential_sample(state, 1, seed=seed, L=L, grid_size=grid_size)[0]


# ---------------------------------------------------------------------------
# alignment and histograms


def center_of_mass(config) -> tuple[float, float]:
    """Direction (as a position in [0, L)) and magnitude of the vector sum.

    Each particle contributes the unit vector at angle 2 pi x / L; the
    magnitude is the plain (unnormalized) length of the sum.
    """
    if isinstance(config, PositionConfig):
        pos, L = config.positions, config.L
    else:
        pos, L = np.asarray(config, dtype=float), 1.0
    z = np.exp(2j * np.pi * pos / L).sum()
    mag = abs(z)
    if mag < 1e-12:
        raise UndefinedDirectionError(
            f"center-of-mass vector length {mag:.2e} below threshold"
        )
    return float(np.mod(np.angle(z) * L / (2.0 * np.pi), L)), float(mag)


def align_samples(samples: SampleSet) -> SampleSet:
    """Rotate every shot so its center of mass points at position 0.

    Shots with an undefined direction are skipped; the count is recorded
    in the provenance, never silently patched.
    """
    z = np.exp(2j * np.pi * samples.positions / samples.L).sum(axis=1)
    ok = np.abs(z) >= 1e-12
    shift = np.angle(z[ok]) * samples.L / (2.0 * np.pi)
    aligned = np.mod(samples.positions[ok] - shift[:, None], samples.L)
    prov = dict(samples.provenance)
    prov["aligned"] = True
    prov["skipped_undefined_com"] = int((~ok).sum())
    return SampleSet(positions=aligned, L=samples.L, provenance=prov)


def histogram(samples: SampleSet, bins: int = 64) -> AlignedHistogram:
    """Pooled positions of all particles of all shots, binned over [0, L)."""
    if bins < 8:
        raise ValueError("need at least 8 bins")
    pooled = samples.positions.ravel()
    counts, edges = np.histogram(pooled, bins=bins, range=(0.0, samples.L))
    return AlignedHistogram(
        bin_edges=edges,
        counts=counts,
        total=pooled.size,
        reference_direction=0.0,
        L=samples.L,
    )


# ---------------------------------------------------------------------------
# conditional depth statistics


@dataclass
class DepthHistogram:
    """Distribution of conditional-notch depths across shots."""

    depths: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray
    skipped: int

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def notch_depth_histogram(
    state, n_samples: int, seed=0, L: float = 1.0, bins: int = 50,
    bin_range: tuple[float, float] | None = None,
) -> DepthHistogram:
    """Histogram of the conditional's minimum density over many shots.

    The state must be a two-mode Dicke state |n_0=N-K, n_1=K>.  For each
    shot the leading N-1 positions are drawn sequentially and the
    conditional minimum is evaluated in closed form,
    (|S|-|M|)^2 / (L (|S|^2+|M|^2)): the exact normalized minimum, free of
    grid-resolution floor effects.
    """
    if not isinstance(state, FockState):
        raise TypeError("depth statistics need a Fock state")
    view = two_mode_view(state)
    if view is None or (view.k1, view.k2) != (0, 1) or view.Kp < 1:
        raise ValueError("depth statistics defined for Dicke states |n_0=N-K, n_1=K>")
    N, K = view.N, view.Kp
    prefix = sequential_sample(state, n_samples, seed=seed, L=L, n_positions=N - 1)
    depths = np.empty(n_samples)
    skipped = 0
    for r in range(n_samples):
        pair = dicke_SM(K, prefix.positions[r], L)
        s, m = abs(pair.S), abs(pair.M)
        denom = L * (s * s + m * m)
        if denom == 0.0:
            skipped += 1
            depths[r] = np.nan
            continue
        depths[r] = (s - m) ** 2 / denom
    good = depths[~np.isnan(depths)]
    if bin_range is None:
        bin_range = (0.0, max(float(good.max()) * 1.05, 1e-9))
    counts, edges = np.histogram(good, bins=bins, range=bin_range)
    return DepthHistogram(depths=good, bin_edges=edges, counts=counts, skipped=skipped)
