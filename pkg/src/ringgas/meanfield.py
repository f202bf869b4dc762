"""Mean-field comparison curves: dark/gray solitons of the ring GPE.

The nonlinear Schroedinger field i psi_t = -psi_xx/2 + gN |psi|^2 psi on a
ring of length L admits solitary-wave solutions psi(x, t) = phi(x - vt)
e^{-i mu t} whose density profile is an elliptic sn^2 train with a single
notch.  The profile solves the co-moving stationary equation

    -phi''/2 + i v phi' + gN |phi|^2 phi = mu phi,

which is the plug-back residual used throughout (v = 0 only for the
trivial uniform cases; on a ring even the black soliton moves, at
v = pi/L).  Parameters are fixed by (i) periodicity of the density,
(ii) unit norm, (iii) single-valuedness of the phase, and (iv) the
prescribed average momentum per particle, k_avg in units of 2 pi / L.

In the ideal limit gN -> 0 the profile collapses to 1 + A e^{2 pi i x/L}
with A^2/(1+A^2) = k_avg, which is what the many-body conditionals are
compared against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import ellipe, ellipj, ellipk, elliprf, elliprj

__all__ = [
    "GPEProfile",
    "average_momentum",
    "ideal_limit_soliton",
    "gpe_soliton",
    "healing_length",
    "stationary_residual",
    "phase_winding",
    "gradient_flow_soliton",
]

DEFAULT_GRID = 1024


class SolitonSolveError(RuntimeError):
    """Parameter matching failed to bracket a solution."""


@dataclass
class GPEProfile:
    """Normalized complex mean-field amplitude on a uniform ring grid."""

    grid: np.ndarray
    psi: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def L(self) -> float:
        return float(self.params["L"])

    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    def phase(self) -> np.ndarray:
        ph = np.unwrap(np.angle(self.psi))
        return ph - ph[int(np.argmax(np.abs(self.psi)))]

    def norm(self) -> float:
        return float(np.sum(self.density()) * self.L / self.grid.size)


def _uniform_grid(grid, L: float) -> np.ndarray:
    if grid is None:
        grid = DEFAULT_GRID
    if np.isscalar(grid):
        return np.arange(int(grid)) * (L / int(grid))
    g = np.asarray(grid, dtype=float)
    dx = np.diff(g)
    if g.ndim != 1 or not np.allclose(dx, dx[0]):
        raise ValueError("mean-field profiles need a uniform grid")
    return g


def _fft_modes(n: int, L: float) -> np.ndarray:
    return np.fft.fftfreq(n, d=L / n) * L  # integer mode numbers


def average_momentum(profile: GPEProfile) -> float:
    """Mode-number average (L/2 pi i) int psi* psi' dx, in units of 2 pi / L.

    Computed from the discrete Fourier weights, which is exact for the
    band-limited profiles produced here.
    """
    nrm = profile.norm()
    if abs(nrm - 1.0) > 1e-6:
        raise ValueError(f"profile not normalized (norm {nrm:.6f})")
    c = np.fft.fft(profile.psi)
    w = np.abs(c) ** 2
    modes = _fft_modes(profile.psi.size, profile.L)
    return float(np.sum(modes * w) / np.sum(w))


def phase_winding(profile: GPEProfile) -> float:
    """Total phase accumulated around the ring, in units of 2 pi."""
    psi = profile.psi
    ratio = np.roll(psi, -1) / np.where(psi == 0, 1.0, psi)
    return float(np.sum(np.angle(ratio)) / (2.0 * math.pi))


def healing_length(g: float, N: int, L: float = 1.0) -> float:
    """xi = 1/sqrt(g N / L); infinite for the ideal gas."""
    if g < 0:
        raise ValueError("repulsive or zero coupling only")
    if g == 0:
        return math.inf
    return 1.0 / math.sqrt(g * N / L)


def ideal_limit_soliton(k_avg: float, grid=None, L: float = 1.0) -> GPEProfile:
    """Zero-coupling limit profile 1 + A e^{2 pi i x/L}, A^2/(1+A^2) = k_avg."""
    if not 0.0 <= k_avg <= 1.0:
        raise ValueError(f"k_avg must lie in [0, 1], got {k_avg}")
    x = _uniform_grid(grid, L)
    q = 2.0 * math.pi / L
    if k_avg == 1.0:
        psi = np.exp(1j * q * x) / math.sqrt(L)
        params = {"gN": 0.0, "L": L, "k_avg": 1.0, "A": math.inf,
                  "velocity": 0.0, "mu": q * q / 2.0}
    else:
        A = math.sqrt(k_avg / (1.0 - k_avg))
        psi = (1.0 + A * np.exp(1j * q * x)) / math.sqrt(L * (1.0 + A * A))
        params = {"gN": 0.0, "L": L, "k_avg": k_avg, "A": A,
                  "velocity": math.pi / L, "mu": 0.0}
    return GPEProfile(grid=x, psi=psi, params=params)


# ---------------------------------------------------------------------------
# elliptic construction


def _Pi_complete(n: float, m: float) -> float:
    # Legendre complete integral of the third kind via Carlson symmetric forms
    return float(elliprf(0.0, 1.0 - m, 1.0) + (n / 3.0) * elliprj(0.0, 1.0 - m, 1.0, 1.0 - n))


def _roots_from_m(m: float, gamma: float, L: float):
    """Roots rho1 <= rho2 <= rho3 of the density cubic, from the elliptic parameter.

    Density periodicity pins b = 2K(m)/L and unit norm pins rho1, leaving a
    one-parameter family in m.
    """
    K = float(ellipk(m))
    E = float(ellipe(m))
    b = 2.0 * K / L
    r31 = b * b / gamma
    rho1 = (1.0 - 4.0 * K * (K - E) / (gamma * L)) / L
    return rho1, rho1 + m * r31, rho1 + r31, b


def _kavg_of_m(m: float, gamma: float, L: float) -> float:
    rho1, rho2, rho3, b = _roots_from_m(m, gamma, L)
    if rho1 <= 0.0:
        return 0.5
    W = -math.sqrt(gamma * rho1 * rho2 * rho3)
    I1 = (2.0 / (b * rho1)) * _Pi_complete(-(rho2 - rho1) / rho1, m)
    v = -W * I1 / L  # zero phase winding
    return (L / (2.0 * math.pi)) * (v + W * L)


def _black_m(gamma: float, L: float) -> float:
    # norm condition with rho1 = 0: 4 K(m) (K(m) - E(m)) = gamma L
    f = lambda m: 4.0 * ellipk(m) * (ellipk(m) - ellipe(m)) - gamma * L
    lo, hi = 1e-15, 1.0 - 1e-15
    if f(hi) < 0:
        raise SolitonSolveError(f"black-soliton bracket failed at gN={gamma}")
    return brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16)


def _spectral_antiderivative(values: np.ndarray, L: float) -> np.ndarray:
    """Antiderivative on the grid, zero at x=0; exact for band-limited input."""
    n = values.size
    x = np.arange(n) * (L / n)
    fk = np.fft.fft(values)
    mean = fk[0].real / n
    kf = 2.0 * np.pi * np.fft.fftfreq(n, d=L / n)
    Fk = np.zeros_like(fk)
    Fk[1:] = fk[1:] / (1j * kf[1:])
    out = np.real(np.fft.ifft(Fk))
    return out - out[0] + mean * x


def _reflect(profile: GPEProfile) -> GPEProfile:
    """Map k_avg -> 1 - k_avg: psi -> e^{2 pi i x/L} conj(psi)."""
    L = profile.L
    q = 2.0 * math.pi / L
    psi = np.exp(1j * q * profile.grid) * np.conj(profile.psi)
    p = dict(profile.params)
    p["k_avg"] = 1.0 - p["k_avg"]
    v = p["velocity"]
    p["velocity"] = q - v
    p["mu"] = p["mu"] - 0.5 * q * q + v * q
    return GPEProfile(grid=profile.grid, psi=psi, params=p)


def gpe_soliton(gN: float, k_avg: float, grid=None, L: float = 1.0, tol: float = 1e-10) -> GPEProfile:
    """Single-notch solitary wave of the ring GPE with prescribed momentum.

    Density rho(x) = rho1 + (rho2 - rho1) sn^2(b (x - L/2) | m): the notch
    sits at L/2 as in the ideal limit.  The elliptic parameter is found by
    bisection on the momentum condition; the black case k_avg = 1/2 has
    rho1 = 0, a pi phase jump at the notch and velocity pi/L exactly.
    """
    if gN < 0:
        raise ValueError("gN must be >= 0")
    if not 0.0 <= k_avg <= 1.0:
        raise ValueError(f"k_avg must lie in [0, 1], got {k_avg}")
    x = _uniform_grid(grid, L)
    if gN == 0.0:
        return ideal_limit_soliton(k_avg, x, L)
    q = 2.0 * math.pi / L
    if k_avg == 0.0 or k_avg == 1.0:
        # uniform background, exactly stationary (v = 0)
        k0 = 0 if k_avg == 0.0 else 1
        psi = np.exp(1j * q * k0 * x) / math.sqrt(L)
        mu = 0.5 * q * q * k0 * k0 + gN / L
        return GPEProfile(grid=x, psi=psi, params={
            "gN": gN, "L": L, "k_avg": float(k_avg), "velocity": 0.0, "mu": mu, "m": 0.0,
        })
    if k_avg > 0.5:
        return _reflect(gpe_soliton(gN, 1.0 - k_avg, x, L, tol))

    gamma = gN
    m_black = _black_m(gamma, L)
    if k_avg == 0.5:
        m = m_black
        rho1, rho2, rho3, b = _roots_from_m(m, gamma, L)
        rho1 = 0.0
        v = math.pi / L
        W = 0.0
        sn, _, _, _ = ellipj(b * (x - L / 2.0), m)
        # sn itself changes sign at the node: the pi jump of the black soliton
        psi = -math.sqrt(rho2) * sn * np.exp(1j * v * x)
    else:
        f = lambda m: _kavg_of_m(m, gamma, L) - k_avg
        lo = 1e-14
        if f(lo) > 0:
            raise SolitonSolveError(f"momentum bracket failed at gN={gN}, k_avg={k_avg}")
        m = brentq(f, lo, m_black * (1.0 - 1e-14), xtol=1e-15, rtol=8.9e-16)
        rho1, rho2, rho3, b = _roots_from_m(m, gamma, L)
        W = -math.sqrt(gamma * rho1 * rho2 * rho3)
        I1 = (2.0 / (b * rho1)) * _Pi_complete(-(rho2 - rho1) / rho1, m)
        v = -W * I1 / L
        sn, _, _, _ = ellipj(b * (x - L / 2.0), m)
        rho = rho1 + (rho2 - rho1) * sn**2
        theta = v * x + _spectral_antiderivative(W / rho, L)
        psi = np.sqrt(rho) * np.exp(1j * theta)
    mu = gamma * (rho1 + rho2 + rho3) / 2.0 - 0.5 * v * v
    prof = GPEProfile(grid=x, psi=psi, params={
        "gN": gN, "L": L, "k_avg": float(k_avg), "velocity": v, "mu": mu,
        "m": m, "rho_min": rho1, "rho_max": rho2, "W": W,
    })
    res = stationary_residual(prof)
    if res > max(10.0 * tol, 1e-8):
        raise SolitonSolveError(
            f"constructed profile violates the stationary equation "
            f"(residual {res:.2e} at gN={gN}, k_avg={k_avg})"
        )
    return prof


def stationary_residual(profile: GPEProfile) -> float:
    """Max norm of -psi''/2 + i v psi' + gN |psi|^2 psi - mu psi (spectral derivatives)."""
    psi = profile.psi
    L = profile.L
    gN = profile.params["gN"]
    v = profile.params["velocity"]
    mu = profile.params["mu"]
    kf = 2.0 * np.pi * np.fft.fftfreq(psi.size, d=L / psi.size)
    psik = np.fft.fft(psi)
    d1 = np.fft.ifft(1j * kf * psik)
    d2 = np.fft.ifft(-(kf**2) * psik)
    res = -0.5 * d2 + 1j * v * d1 + gN * np.abs(psi) ** 2 * psi - mu * psi
    return float(np.max(np.abs(res)))


# ---------------------------------------------------------------------------
# independent cross-validation solver


def _tilt_to_momentum(psik: np.ndarray, modes: np.ndarray, k0: float) -> np.ndarray:
    """Rescale Fourier weights by exp(theta k / 2) so the mean mode equals k0.

    The tilted mean is monotone in theta (logistic family), so a few
    Newton steps converge; this retracts the iterate back onto the
    fixed-momentum manifold after each descent step.
    """
    w = np.abs(psik) ** 2
    theta = 0.0
    for _ in range(60):
        tw = w * np.exp(theta * (modes - k0))
        s = tw.sum()
        mean = float((modes * tw).sum() / s) - k0
        var = float((modes**2 * tw).sum() / s) - (mean + k0) ** 2
        if abs(mean) < 1e-14:
            break
        if var <= 0:
            raise SolitonSolveError("momentum retraction degenerate")
        theta -= mean / var
    return psik * np.exp(0.5 * theta * (modes - k0))


def gradient_flow_soliton(
    gN: float,
    k_avg: float,
    grid=None,
    L: float = 1.0,
    dtau: float = 1.0,
    max_steps: int = 200_000,
    tol: float = 1e-7,
) -> GPEProfile:
    """Constrained imaginary-time solution, no elliptic functions.

    The soliton is the energy minimum at fixed norm and fixed average
    momentum, so plain split-step imaginary time converges once every
    step is retracted back onto the momentum manifold (an exponential
    tilt of the mode weights).  The multipliers (mu, v) of the co-moving
    stationary equation are recovered by least squares at the end.  Used
    to cross-validate the elliptic construction.
    """
    x = _uniform_grid(grid, L)
    n = x.size
    kf = 2.0 * np.pi * np.fft.fftfreq(n, d=L / n)
    modes = _fft_modes(n, L)
    dx = L / n
    psi = ideal_limit_soliton(min(max(k_avg, 0.02), 0.98), x, L).psi.copy()

    def multipliers_and_residual(psi):
        psik = np.fft.fft(psi)
        d1 = np.fft.ifft(1j * kf * psik)
        d2 = np.fft.ifft(-(kf**2) * psik)
        Hpsi = -0.5 * d2 + gN * np.abs(psi) ** 2 * psi
        # least squares Hpsi ~ mu psi - i v psi'  over (mu, v)
        cols = np.stack([psi, -1j * d1], axis=1)
        coef, *_ = np.linalg.lstsq(cols, Hpsi, rcond=None)
        mu, v = float(np.real(coef[0])), float(np.real(coef[1]))
        res = float(np.max(np.abs(Hpsi - mu * psi + 1j * v * d1)))
        return mu, v, res

    res = math.inf
    sigma = 0.5 * (2.0 * math.pi / L) ** 2 + gN / L  # preconditioner shift
    precond = 1.0 / (0.5 * kf**2 + sigma)
    for step in range(max_steps):
        psik = np.fft.fft(psi)
        d1 = np.fft.ifft(1j * kf * psik)
        d2 = np.fft.ifft(-(kf**2) * psik)
        Hpsi = -0.5 * d2 + gN * np.abs(psi) ** 2 * psi
        cols = np.stack([psi, -1j * d1], axis=1)
        coef, *_ = np.linalg.lstsq(cols, Hpsi, rcond=None)
        grad = Hpsi - coef[0] * psi - coef[1] * (-1j * d1)
        res = float(np.max(np.abs(grad)))
        if res <= tol:
            break
        # preconditioned tangent step, then retract to the constraint manifold
        psi = psi - dtau * np.fft.ifft(precond * np.fft.fft(grad))
        psik = _tilt_to_momentum(np.fft.fft(psi), modes, k_avg)
        psi = np.fft.ifft(psik)
        psi /= math.sqrt(float(np.sum(np.abs(psi) ** 2) * dx))
    else:
        raise SolitonSolveError(f"gradient flow stalled at residual {res:.2e}")
    mu, v, res = multipliers_and_residual(psi)
    # gauge: real positive at the density maximum, as in the elliptic route
    imax = int(np.argmax(np.abs(psi)))
    psi = psi * np.exp(-1j * np.angle(psi[imax]))
    return GPEProfile(grid=x, psi=psi, params={
        "gN": gN, "L": L, "k_avg": k_avg, "velocity": v, "mu": mu, "solver": "gradient-flow",
    })
