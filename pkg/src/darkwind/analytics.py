"""Closed-form predictions: localization lengths, phase boundaries,
asymptotic coherence, and exact trimer dark states.

Edge modes of the chiral-symmetric chains live on the non-decaying
sublattice with amplitudes that are products of bond ratios, so their
inverse localization length is a difference of disorder-averaged
logarithms of couplings; its zero locus is the topological phase
boundary.  The needed expectations E[ln|J + mu*w|] over uniform w have
elementary closed forms implemented here and cross-checked against
adaptive quadrature in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import TRIMER, ModelSpec, build_hamiltonian

#: |signed balance| at a reported boundary point must be below this
ROOT_TOLERANCE = 1e-8

#: half-widths below this are treated as zero in the two-variable average
_TINY_MU = 1e-9


class DivergentLogAverage(ValueError):
    """E[ln|...|] diverges (coupling and half-width both zero)."""


def _xlogx(x: float) -> float:
    return 0.0 if x == 0.0 else x * math.log(abs(x))


def _x2logx(x: float) -> float:
    return 0.0 if x == 0.0 else x * x * math.log(abs(x))


def expected_log_abs_uniform(j: float, mu: float) -> float:
    """E[ln|j + mu*w|] with w uniform on [-1, 1].

    Equals ``[(j+mu)ln|j+mu| - (j-mu)ln|j-mu|]/(2 mu) - 1`` for mu > 0
    (with x ln|x| extended by 0 at x = 0) and ln|j| at mu = 0.
    """
    if mu < 0:
        raise ValueError("mu must be >= 0")
    if mu == 0.0:
        if j == 0.0:
            raise DivergentLogAverage("E[ln|0|] diverges")
        return math.log(abs(j))
    return (_xlogx(j + mu) - _xlogx(j - mu)) / (2.0 * mu) - 1.0


def expected_log_abs_uniform2(s: float, a: float, b: float) -> float:
    """E[ln|s + a*w + b*w'|] for independent uniform w, w' on [-1, 1].

    Quadratic-log closed form: the four corner terms
    ``(s +- a +- b)^2 ln|...|`` weighted by 1/(8ab), minus 3/2.  Vanishing
    half-widths reduce to the single-variable form.
    """
    if a < 0 or b < 0:
        raise ValueError("half-widths must be >= 0")
    if a < _TINY_MU and b < _TINY_MU:
        if s == 0.0:
            raise DivergentLogAverage("E[ln|0|] diverges")
        return math.log(abs(s))
    if a < _TINY_MU:
        return expected_log_abs_uniform(s, b)
    if b < _TINY_MU:
        return expected_log_abs_uniform(s, a)
    q = _x2logx
    return (q(s + a + b) - q(s + a - b) - q(s - a + b) + q(s - a - b)) / (8.0 * a * b) - 1.5


def log_coupling_balance_dimer(j1: float, j2: float, mu1: float, mu2: float) -> float:
    """Signed quantity E[ln|j1-family|] - E[ln|j2-family|].

    Negative in the topologically non-trivial phase (edge mode localized),
    zero on the boundary.
    """
    return expected_log_abs_uniform(j1, mu1) - expected_log_abs_uniform(j2, mu2)


def inv_loc_length_dimer(j1: float, j2: float, mu1: float, mu2: float) -> float:
    """Inverse localization length (per cell) of the dimer edge mode."""
    return abs(log_coupling_balance_dimer(j1, j2, mu1, mu2))


def log_coupling_balance_trimer(j: float, j2: float, j3: float,
                                mu_j: float, mu2: float, mu3: float,
                                branch: int) -> float:
    """Signed balance E[ln|(j-family) +- (j2-family)|] - E[ln|j3-family|]
    for the chosen edge-mode branch (+1 or -1)."""
    if branch not in (+1, -1):
        raise ValueError("branch must be +1 or -1")
    return (expected_log_abs_uniform2(j + branch * j2, mu_j, mu2)
            - expected_log_abs_uniform(j3, mu3))


def inv_loc_length_trimer(j: float, j2: float, j3: float,
                          mu_j: float, mu2: float, mu3: float,
                          branch: int) -> float:
    """Inverse localization length of one trimer edge-mode branch."""
    return abs(log_coupling_balance_trimer(j, j2, j3, mu_j, mu2, mu3, branch))


@dataclass(frozen=True)
class BoundaryContour:
    """Critical-coupling contour over a disorder grid (NaN = no root)."""

    mu_values: np.ndarray
    critical: np.ndarray


def _bracket_root(f, lo: float, hi: float) -> float:
    f_lo, f_hi = f(lo), f(hi)
    if not np.isfinite(f_lo) or not np.isfinite(f_hi) or f_lo * f_hi > 0:
        return math.nan
    root = brentq(f, lo, hi, xtol=1e-12, rtol=8.9e-16)
    if abs(f(root)) >= ROOT_TOLERANCE:
        return math.nan
    return root


def phase_boundary_dimer(j2: float, mu_map, mu_grid, j1_max: float | None = None) -> BoundaryContour:
    """Critical j1 (divergent edge-mode localization length) per disorder value.

    ``mu_map`` maps the swept disorder strength to ``(mu1, mu2)``, e.g.
    ``lambda mu: (mu, mu)`` for isotropic disorder.  Roots are bracketed
    in (1e-6, j1_max] and refined well below :data:`ROOT_TOLERANCE`;
    grid points without a sign change are reported as NaN.
    """
    mu_grid = np.asarray(mu_grid, dtype=float)
    critical = np.empty_like(mu_grid)
    for k, mu in enumerate(mu_grid):
        mu1, mu2 = mu_map(mu)
        hi = j1_max if j1_max is not None else max(5.0 * abs(j2), abs(j2) + mu1 + mu2)
        critical[k] = _bracket_root(
            lambda j1: log_coupling_balance_dimer(j1, j2, mu1, mu2), 1e-6, hi)
    return BoundaryContour(mu_values=mu_grid, critical=critical)


def phase_boundary_trimer(j2: float, j3: float, mu_map, mu_grid, branch: int,
                          j_max: float | None = None) -> BoundaryContour:
    """Critical next-nearest-neighbor coupling j* per disorder value.

    ``mu_map`` maps the swept strength to ``(mu_j, mu2, mu3)``; one
    contour per branch, the winding changing by 1 across each.
    """
    mu_grid = np.asarray(mu_grid, dtype=float)
    critical = np.empty_like(mu_grid)
    for k, mu in enumerate(mu_grid):
        mu_j, mu2, mu3 = mu_map(mu)
        hi = j_max if j_max is not None else 2.0 * (abs(j2) + abs(j3) + mu_j + mu2 + mu3) + 1.0
        critical[k] = _bracket_root(
            lambda j: log_coupling_balance_trimer(j, j2, j3, mu_j, mu2, mu3, branch),
            1e-6, hi)
    return BoundaryContour(mu_values=mu_grid, critical=critical)


def dimer_boundary_small_mu(j2: float, mu1: float, mu2: float) -> float:
    """Second-order small-disorder expansion of the critical j1:
    ``|j2| * exp((mu1^2 - mu2^2) / (6 j2^2))``."""
    return abs(j2) * math.exp((mu1**2 - mu2**2) / (6.0 * j2**2))


@dataclass(frozen=True)
class AsymptoticCoherence:
    value: float
    within_validity: bool


def asymptotic_coherence_dimer(j1: float, j2: float, mu1: float, mu2: float) -> AsymptoticCoherence:
    """Disorder-averaged long-time coherence plateau of the dimer chain,
    ``1 - (3 j1^2 + mu1^2) / (3 j2^2 - 3 mu2^2)``.

    Valid for weak disorder, ``mu1 + mu2 < |j2| - |j1|`` (no disorder-induced
    phase change); outside that window the value is advisory only.
    """
    within = mu1 + mu2 < abs(j2) - abs(j1)
    denom = 3.0 * j2**2 - 3.0 * mu2**2
    value = math.nan if denom == 0.0 else 1.0 - (3.0 * j1**2 + mu1**2) / denom
    return AsymptoticCoherence(value=value, within_validity=within)


@dataclass(frozen=True)
class DarkStatePair:
    """The two exact dark states of a clean trimer chain (N mod 3 = 2).

    ``v_plus``/``v_minus`` are unit-normalized eigenvectors at energies
    ``eps_a + j1`` and ``eps_a - j1``; both vanish on every leaky site.
    ``a2_plus``/``a2_minus`` are the squared boundary amplitudes entering
    the long-time coherence; residuals are ``||H v - E v||`` relative to
    the spectral norm of H.
    """

    v_plus: np.ndarray
    v_minus: np.ndarray
    delta_plus: float
    delta_minus: float
    a2_plus: float
    a2_minus: float
    residual_plus: float
    residual_minus: float


def _norm_square_inverse(delta: float, n_pairs: int) -> float:
    """2 * sum_{k=0}^{K} delta^(2k) with K = n_pairs - 1 (delta = 1 handled)."""
    if delta == 1.0:
        return 2.0 * n_pairs
    return 2.0 * (1.0 - delta ** (2 * n_pairs)) / (1.0 - delta**2)


def trimer_dark_states(spec: ModelSpec) -> DarkStatePair:
    """Construct the exact dark-state pair of a clean trimer chain.

    Requires ``n_sites % 3 == 2`` (exact, rather than quasi-, dark states)
    and ``j3 != 0``.  Amplitudes alternate over cells with signed ratios
    ``(j +- j2)/j3``; sites on the leaky sublattice carry exactly 0.
    """
    if spec.kind != TRIMER:
        raise ValueError("dark-state construction requires a trimer spec")
    if spec.n_sites % 3 != 2:
        raise ValueError("exact dark states require n_sites mod 3 = 2")
    if spec.j3 == 0.0:
        raise ValueError("j3 must be nonzero")
    if spec.eps_a != spec.eps_b:
        raise ValueError("dark-state construction requires eps_a == eps_b")

    N = spec.n_sites
    n_pairs = (N + 1) // 3  # A/B pairs, including the final partial cell
    H = build_hamiltonian(spec)
    h_norm = np.linalg.norm(H, 2)

    out: dict[str, float | np.ndarray] = {}
    for label, sign in (("plus", +1.0), ("minus", -1.0)):
        ratio = (spec.j + sign * spec.j2) / spec.j3
        delta = abs(ratio)
        v = np.zeros(N)
        for k in range(n_pairs):
            amp = (-ratio) ** k
            v[3 * k] = amp
            v[3 * k + 1] = sign * amp
        a2 = 1.0 / _norm_square_inverse(delta, n_pairs)
        v = v * math.sqrt(a2)
        energy = spec.eps_a + sign * spec.j1
        residual = float(np.linalg.norm(H @ v - energy * v))
        out[f"v_{label}"] = v
        out[f"delta_{label}"] = delta
        out[f"a2_{label}"] = a2
        out[f"residual_{label}"] = residual / max(h_norm, np.finfo(float).tiny)

    return DarkStatePair(
        v_plus=out["v_plus"], v_minus=out["v_minus"],
        delta_plus=out["delta_plus"], delta_minus=out["delta_minus"],
        a2_plus=out["a2_plus"], a2_minus=out["a2_minus"],
        residual_plus=out["residual_plus"], residual_minus=out["residual_minus"])


def asymptotic_coherence_trimer(times, j1: float, a2_plus: float, a2_minus: float) -> np.ndarray:
    """Late-time coherence of a two-dark-state chain.

    Modulus of the interference of the two boundary amplitudes beating at
    energy splitting 2*j1:
    ``sqrt(a2p^2 + a2m^2 + 2 a2p a2m cos(2 j1 t))``.
    """
    times = np.asarray(times, dtype=float)
    return np.sqrt(np.maximum(
        a2_plus**2 + a2_minus**2 + 2.0 * a2_plus * a2_minus * np.cos(2.0 * j1 * times),
        0.0))
