"""Contact-interacting bosons on a ring in a fixed momentum block.

H = sum_k (2 pi^2 k^2 / L^2) a+_k a_k
  + (g / 2L) sum_{k,l,m} a+_{k+m} a+_{l-m} a_l a_k,

with every mode index restricted to [-k_max, k_max].  The interaction
conserves total momentum, so the Hamiltonian acts block-diagonally on the
bases of `ringgas.basis`.  The lowest state of a block (the yrast state)
is found by repeated application of (C - H) with C above the top of the
truncated spectrum; a Lanczos backend is available as a faster
alternative, the shifted power iteration is the reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import BasisSet, FockState, enumerate_basis, free_energy, free_yrast_state

__all__ = [
    "ModelParams",
    "StateVector",
    "YrastResult",
    "ConvergenceError",
    "apply_hamiltonian",
    "build_hamiltonian",
    "find_yrast",
    "find_yrast_converged",
    "fidelity",
    "fidelity_sweep",
    "spectral_shift",
]

# Above this block dimension the sparse matrix is not cached and H is
# applied term-by-term (memory safety at large cutoffs).
SPARSE_CACHE_LIMIT = 200_000


class ConvergenceError(RuntimeError):
    """Iteration failed to reach the requested residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class ModelParams:
    """Physical and truncation parameters of one momentum block."""

    N: int
    K: int
    k_max: int
    g: float = 0.0
    L: float = 1.0

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError(f"ring length must be positive, got L={self.L}")
        if self.g < 0:
            raise ValueError(f"coupling must be repulsive or zero, got g={self.g}")

    def with_cutoff(self, k_max: int) -> "ModelParams":
        return ModelParams(self.N, self.K, k_max, self.g, self.L)

    def healing_length(self) -> float:
        """xi = 1/sqrt(g N / L); inf for the ideal gas."""
        if self.g == 0:
            return math.inf
        return 1.0 / math.sqrt(self.g * self.N / self.L)


@dataclass
class StateVector:
    """Complex amplitudes over a Fock basis."""

    basis: BasisSet
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (len(self.basis),):
            raise ValueError(
                f"amplitude vector of length {self.amplitudes.shape} on a "
                f"{len(self.basis)}-dimensional basis"
            )

    @classmethod
    def from_fock(cls, basis: BasisSet, state: FockState) -> "StateVector":
        amp = np.zeros(len(basis), dtype=complex)
        amp[basis.index_of(state)] = 1.0
        return cls(basis, amp)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / n)

    def top_components(self, n_top: int = 5) -> list[tuple[FockState, complex]]:
        order = np.argsort(-np.abs(self.amplitudes))[:n_top]
        return [(self.basis.states[i], complex(self.amplitudes[i])) for i in order]


def _check_same_basis(u: StateVector, v: StateVector):
    if u.basis is not v.basis and u.basis != v.basis:
        raise ValueError("state vectors live on different bases")


def fidelity(u: StateVector, v: StateVector) -> float:
    """|<u|v>|^2 for normalized u, v (normalizes defensively)."""
    _check_same_basis(u, v)
    un, vn = u.norm(), v.norm()
    return float(abs(np.vdot(u.amplitudes, v.amplitudes)) ** 2 / (un * vn) ** 2)


def _interaction_terms(state: FockState, k_max: int):
    """Yield (occ_tuple, amplitude) of a+_{k+m} a+_{l-m} a_l a_k |state>, all (k,l,m)."""
    occ = state.occ
    occupied = state.occupied_modes()
    for k, nk in occupied:
        for l, nl in occupied:
            if k == l and nk < 2:
                continue
            f1 = nk * (nl - (1 if k == l else 0))
            for m in range(-2 * k_max, 2 * k_max + 1):
                kp = k + m
                lp = l - m
                if abs(kp) > k_max or abs(lp) > k_max:
                    continue
                new = list(occ)
                new[k + k_max] -= 1
                new[l + k_max] -= 1
                amp = f1 * (new[lp + k_max] + 1)
                new[lp + k_max] += 1
                amp *= new[kp + k_max] + 1
                new[kp + k_max] += 1
                yield tuple(new), math.sqrt(amp)


def kinetic_diagonal(basis: BasisSet, L: float = 1.0) -> np.ndarray:
    return np.array([free_energy(s, L) for s in basis.states])


def build_interaction(basis: BasisSet, L: float = 1.0) -> sp.csr_matrix:
    """Sparse interaction matrix at unit coupling: (1/2L) sum a+ a+ a a terms."""
    dim = len(basis)
    pref = 1.0 / (2.0 * L)
    rows, cols, vals = [], [], []
    for i, state in enumerate(basis.states):
        for occ, amp in _interaction_terms(state, basis.k_max):
            j = basis.index.get(occ)
            if j is None:
                continue  # merged bases may be incomplete blocks
            rows.append(j)
            cols.append(i)
            vals.append(pref * amp)
    V = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    V.sum_duplicates()
    return V


def build_hamiltonian(params: ModelParams, basis: BasisSet | None = None) -> sp.csr_matrix:
    """Sparse H on the (N, K, k_max) block (or an explicitly supplied basis)."""
    if basis is None:
        basis = enumerate_basis(params.N, params.K, params.k_max)
    H = sp.diags(kinetic_diagonal(basis, params.L), format="csr", dtype=float)
    if params.g != 0.0:
        H = (H + params.g * build_interaction(basis, params.L)).tocsr()
    return H


def apply_hamiltonian(params: ModelParams, v: StateVector) -> StateVector:
    """H|v>, term by term (matrix-free; used directly for large blocks)."""
    basis = v.basis
    if basis.N != params.N or basis.k_max != params.k_max:
        raise ValueError("state vector basis does not match params")
    L = params.L
    pref = params.g / (2.0 * L)
    out = np.zeros_like(v.amplitudes)
    amps = v.amplitudes
    for i, state in enumerate(basis.states):
        c = amps[i]
        if c == 0:
            continue
        out[i] += free_energy(state, L) * c
        if params.g == 0.0:
            continue
        for occ, amp in _interaction_terms(state, basis.k_max):
            j = basis.index.get(occ)
            if j is not None:
                out[j] += pref * amp * c
    return StateVector(basis, out)


def spectral_shift(params: ModelParams) -> float:
    """Rigorous upper bound on the truncated spectrum.

    Kinetic part is at most 2 pi^2 N k_max^2 / L^2 (all particles at the
    cutoff); the interaction row sums are bounded by (g/2L) N^2.
    """
    return 2.0 * math.pi**2 * params.N * params.k_max**2 / params.L**2 + (
        params.g / (2.0 * params.L)
    ) * params.N**2


@dataclass
class YrastResult:
    state: StateVector
    energy: float
    residual: float
    iterations: int
    params: ModelParams
    degenerate: bool = False
    energy_history: np.ndarray | None = field(default=None, repr=False)

    def fidelity_with_free_yrast(self) -> float:
        target = StateVector.from_fock(
            self.state.basis, free_yrast_state(self.params.N, self.params.K, self.params.k_max)
        )
        return fidelity(self.state, target)


def _initial_vector(dim: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _lanczos_gap_probe(H, E0: float, v0: np.ndarray) -> float:
    """Second-lowest eigenvalue of H (deterministic ARPACK run)."""
    vals = spla.eigsh(H, k=2, which="SA", v0=v0, return_eigenvectors=False, tol=0)
    vals = np.sort(vals)
    return float(vals[1] - E0)


def find_yrast(
    params: ModelParams,
    tol: float = 1e-10,
    max_iters: int = 1_000_000,
    seed=12345,
    method: str = "power",
    basis: BasisSet | None = None,
    H: sp.csr_matrix | None = None,
    check_degeneracy: bool = True,
    record_history: bool = False,
) -> YrastResult:
    """Lowest-energy state of the (N, K) block.

    method="power": repeated application of (C - H) to a seeded random
    vector, C from `spectral_shift`; stops when ||Hv - Ev|| <= tol.
    method="lanczos": ARPACK eigsh with a deterministic start vector
    (faster on large blocks, same contract, residual still verified).
    A prebuilt sparse `H` on `basis` may be passed in (coupling sweeps
    reuse the unit-coupling interaction matrix).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if basis is None:
        basis = enumerate_basis(params.N, params.K, params.k_max)
    if H is None and len(basis) <= SPARSE_CACHE_LIMIT:
        H = build_hamiltonian(params, basis)

    def matvec(x):
        if H is not None:
            return H @ x
        return apply_hamiltonian(params, StateVector(basis, x)).amplitudes

    dim = len(basis)
    v = _initial_vector(dim, seed)
    history = [] if record_history else None

    if method == "lanczos":
        op = H if H is not None else spla.LinearOperator(
            (dim, dim), matvec=matvec, dtype=complex
        )
        v0 = np.abs(v) if H is not None else v  # cached H is real symmetric
        vals, vecs = spla.eigsh(op, k=1, which="SA", v0=v0, tol=0)
        v = vecs[:, 0].astype(complex)
        Hv = matvec(v)
        E = float(np.real(np.vdot(v, Hv)))
        res = float(np.linalg.norm(Hv - E * v))
        iters = 0
        if res > tol:
            raise ConvergenceError(f"lanczos residual {res:.3e} above tol {tol:.3e}", res)
    elif method == "power":
        C = spectral_shift(params)
        E = math.inf
        res = math.inf
        for iters in range(1, max_iters + 1):
            Hv = matvec(v)
            E = float(np.real(np.vdot(v, Hv)))
            res = float(np.linalg.norm(Hv - E * v))
            if history is not None:
                history.append(E)
            if res <= tol:
                break
            w = C * v - Hv
            v = w / np.linalg.norm(w)
        else:
            raise ConvergenceError(
                f"power iteration did not reach tol={tol:.1e} in {max_iters} steps "
                f"(last residual {res:.3e})",
                res,
            )
    else:
        raise ValueError(f"unknown method {method!r}")

    degenerate = False
    if check_degeneracy and dim >= 3 and H is not None and sp.issparse(H):
        try:
            gap = _lanczos_gap_probe(H, E, np.abs(_initial_vector(dim, seed)))
            degenerate = gap < 1e-9
        except spla.ArpackError:  # pragma: no cover - probe is best-effort
            pass

    return YrastResult(
        state=StateVector(basis, v).normalized(),
        energy=E,
        residual=res,
        iterations=iters,
        params=params,
        degenerate=degenerate,
        energy_history=np.array(history) if history is not None else None,
    )


@dataclass
class ConvergedYrast:
    """Yrast solve at the first cutoff whose doubling leaves E within conv_tol."""

    result: YrastResult
    doubled: YrastResult
    k_max: int

    @property
    def energy_change(self) -> float:
        return abs(self.doubled.energy - self.result.energy)

    @property
    def fidelity_change(self) -> float:
        return abs(
            self.doubled.fidelity_with_free_yrast() - self.result.fidelity_with_free_yrast()
        )


def find_yrast_converged(
    params: ModelParams,
    conv_tol: float = 1e-4,
    k_max_start: int = 2,
    k_max_cap: int = 16,
    **kwargs,
) -> ConvergedYrast:
    """Double k_max until the yrast energy moves by less than conv_tol (relative)."""
    k = max(k_max_start, 1)
    prev = find_yrast(params.with_cutoff(k), **kwargs)
    while True:
        k2 = 2 * k
        cur = find_yrast(params.with_cutoff(k2), **kwargs)
        if abs(cur.energy - prev.energy) <= conv_tol * max(1.0, abs(cur.energy)):
            return ConvergedYrast(result=prev, doubled=cur, k_max=k)
        if k2 >= k_max_cap:
            raise ConvergenceError(
                f"cutoff still not converged at k_max={k2} "
                f"(dE={abs(cur.energy - prev.energy):.3e})"
            )
        k, prev = k2, cur


def fidelity_sweep(
    N_list,
    g_grid,
    k_max: int = 4,
    L: float = 1.0,
    tol: float = 1e-10,
    seed=12345,
    method: str = "power",
) -> list[dict]:
    """Fidelity of the K=N/2 yrast state with |N/2, N/2> across couplings.

    Returns one row per (N, g) with the healing length xi = 1/sqrt(gN/L)
    as abscissa.  The basis and the unit-coupling interaction matrix are
    built once per N; failures of individual cells are recorded, not
    raised.
    """
    rows = []
    for N in N_list:
        if N % 2:
            raise ValueError(f"sweep needs even N, got {N}")
        basis = enumerate_basis(N, N // 2, k_max)
        kin = sp.diags(kinetic_diagonal(basis, L), format="csr", dtype=float)
        V = build_interaction(basis, L)
        for g in g_grid:
            params = ModelParams(N=N, K=N // 2, k_max=k_max, g=float(g), L=L)
            row = {
                "N": N,
                "g": float(g),
                "xi": params.healing_length(),
                "fidelity": math.nan,
                "error": "",
            }
            try:
                H = kin if g == 0 else (kin + float(g) * V).tocsr()
                res = find_yrast(params, tol=tol, seed=seed, method=method,
                                 basis=basis, H=H, check_degeneracy=False)
                row["fidelity"] = res.fidelity_with_free_yrast()
            except (ConvergenceError, MemoryError) as exc:
                row["error"] = str(exc)
            rows.append(row)
    return rows
