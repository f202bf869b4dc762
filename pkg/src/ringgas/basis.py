"""Momentum-constrained Fock basis for N bosons on a ring.

Single-particle orbitals are plane waves exp(i*2*pi*k*x/L)/sqrt(L) with
integer mode index k in [-k_max, k_max].  A basis block collects every
occupation vector with fixed particle number N and fixed (integer) total
momentum K, in units of 2*pi/L.  All bookkeeping is exact integer
arithmetic; energies are the only floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "FockState",
    "BasisSet",
    "BasisError",
    "enumerate_basis",
    "free_energy",
    "free_yrast_state",
    "two_branches",
]

# Keep N * k_max**2 comfortably inside int64 in case occupations end up in
# numpy arrays downstream.
_MAX_PARTICLES = 10**6
_MAX_CUTOFF = 10**4


class BasisError(ValueError):
    """Invalid or infeasible basis request."""


@dataclass(frozen=True)
class FockState:
    """Occupation numbers over the modes -k_max..+k_max (a tuple, index k+k_max)."""

    occ: tuple[int, ...]
    k_max: int

    def __post_init__(self):
        if len(self.occ) != 2 * self.k_max + 1:
            raise BasisError(
                f"occupation tuple has {len(self.occ)} entries, expected {2 * self.k_max + 1}"
            )
        if any(n < 0 for n in self.occ):
            raise BasisError("negative occupation number")

    @classmethod
    def from_occupations(cls, occupations: dict[int, int], k_max: int | None = None) -> "FockState":
        """Build from a {mode: occupation} mapping, zero entries allowed."""
        occupations = {k: n for k, n in occupations.items() if n != 0}
        if k_max is None:
            k_max = max((abs(k) for k in occupations), default=1)
        occ = [0] * (2 * k_max + 1)
        for k, n in occupations.items():
            if abs(k) > k_max:
                raise BasisError(f"mode {k} outside cutoff {k_max}")
            occ[k + k_max] = n
        return cls(tuple(occ), k_max)

    @property
    def occupations(self) -> dict[int, int]:
        """Nonzero occupations as {mode: count}."""
        return {k - self.k_max: n for k, n in enumerate(self.occ) if n > 0}

    def n(self, k: int) -> int:
        """Occupation of mode k (0 outside the cutoff)."""
        if abs(k) > self.k_max:
            return 0
        return self.occ[k + self.k_max]

    @property
    def particles(self) -> int:
        return sum(self.occ)

    @property
    def momentum(self) -> int:
        return sum((k - self.k_max) * n for k, n in enumerate(self.occ))

    def occupied_modes(self) -> list[tuple[int, int]]:
        """List of (mode, occupation) for occupied modes, ascending in mode."""
        return [(k - self.k_max, n) for k, n in enumerate(self.occ) if n > 0]

    def with_cutoff(self, k_max: int) -> "FockState":
        """Re-express on a wider (or equal) cutoff."""
        if k_max < self.k_max:
            if any(n for k, n in self.occupations.items() if abs(k) > k_max):
                raise BasisError("state has support outside the requested cutoff")
        return FockState.from_occupations(self.occupations, k_max)

    def __str__(self):
        inner = ", ".join(f"n_{k}={n}" for k, n in self.occupied_modes())
        return f"|{inner}>"


@dataclass(frozen=True)
class BasisSet:
    """Ordered momentum block of Fock states with a state -> index bijection.

    `K is None` marks a merged basis spanning several momentum blocks
    (used for cross-block superpositions and conservation tests).
    """

    N: int
    K: int | None
    k_max: int
    states: tuple[FockState, ...]
    index: dict[tuple[int, ...], int] = field(repr=False)

    def __len__(self):
        return len(self.states)

    def index_of(self, state: FockState) -> int:
        occ = state.with_cutoff(self.k_max).occ if state.k_max != self.k_max else state.occ
        try:
            return self.index[occ]
        except KeyError:
            raise BasisError(f"state {state} not in basis (N={self.N}, K={self.K})") from None

    @classmethod
    def from_states(cls, states: list[FockState]) -> "BasisSet":
        """Merged basis from explicit states (same N, momenta may differ)."""
        if not states:
            raise BasisError("empty state list")
        k_max = max(s.k_max for s in states)
        states = tuple(s.with_cutoff(k_max) for s in states)
        ns = {s.particles for s in states}
        if len(ns) != 1:
            raise BasisError(f"mixed particle numbers {sorted(ns)}")
        momenta = {s.momentum for s in states}
        K = momenta.pop() if len(momenta) == 1 else None
        index = {s.occ: i for i, s in enumerate(states)}
        if len(index) != len(states):
            raise BasisError("duplicate states")
        return cls(ns.pop(), K, k_max, states, index)


def _validate(N: int, K: int, k_max: int):
    if N < 1:
        raise BasisError(f"need at least one particle, got N={N}")
    if k_max < 1:
        raise BasisError(f"need k_max >= 1, got {k_max}")
    if N > _MAX_PARTICLES or k_max > _MAX_CUTOFF:
        raise BasisError("N or k_max too large for safe integer arithmetic")
    if abs(K) > N * k_max:
        raise BasisError(f"|K|={abs(K)} exceeds N*k_max={N * k_max}: empty block")


def enumerate_basis(N: int, K: int, k_max: int) -> BasisSet:
    """Every Fock state with sum(n) = N and sum(k*n_k) = K, support in [-k_max, k_max].

    Deterministic canonical order: lexicographic on the occupation tuple
    read from k=-k_max to +k_max.  Recursive assignment with the pruning
    bound that the remaining momentum must be reachable by the remaining
    particles in the remaining modes.
    """
    _validate(N, K, k_max)
    n_modes = 2 * k_max + 1
    states: list[tuple[int, ...]] = []
    occ = [0] * n_modes

    def assign(mode_idx: int, n_rem: int, k_rem: int):
        if mode_idx == n_modes - 1:
            # last mode is k=+k_max: occupation forced
            if k_max > 0 and k_rem == n_rem * k_max:
                occ[mode_idx] = n_rem
                states.append(tuple(occ))
                occ[mode_idx] = 0
            return
        k = mode_idx - k_max
        lo_next = mode_idx + 1 - k_max  # most negative remaining mode
        for n in range(n_rem + 1):
            r = n_rem - n
            kr = k_rem - n * k
            if not (lo_next * r <= kr <= k_max * r):
                continue
            occ[mode_idx] = n
            assign(mode_idx + 1, r, kr)
        occ[mode_idx] = 0

    assign(0, N, K)
    if not states:
        raise BasisError(f"no Fock states for N={N}, K={K}, k_max={k_max}")
    fock = tuple(FockState(s, k_max) for s in states)
    return BasisSet(N, K, k_max, fock, {s: i for i, s in enumerate(states)})


def free_energy(state: FockState, L: float = 1.0) -> float:
    """Kinetic energy (2*pi^2/L^2) * sum_k n_k k^2 of a Fock state."""
    s = sum(n * (k - state.k_max) ** 2 for k, n in enumerate(state.occ))
    return 2.0 * math.pi**2 / L**2 * s


def free_yrast_state(N: int, K: int, k_max: int | None = None) -> FockState:
    """Lowest-energy Fock state at total momentum K: |n_0=N-K, n_1=K>.

    Only 0 <= K <= N is meaningful for this two-mode form; anything else
    is rejected.
    """
    if not 0 <= K <= N:
        raise BasisError(f"free yrast state needs 0 <= K <= N, got K={K}, N={N}")
    return FockState.from_occupations({0: N - K, 1: K}, k_max=k_max or 1)


def two_branches(N: int, K_range, L: float = 1.0) -> list[tuple[int, float, float]]:
    """Per K: (K, single-particle excitation energy ~K^2, yrast energy ~K)."""
    pref = 2.0 * math.pi**2 / L**2
    return [(int(K), pref * K * K, pref * K) for K in K_range]
