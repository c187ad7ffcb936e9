"""Coherence evolution, complex spectra and coherence-time extraction.

The boundary-qubit coherence is ``C(t) = |<1| exp(-i t H) |1>|`` for the
restricted non-Hermitian Hamiltonian H of the chain.  Eigendecomposition
gives every requested time at once and is used whenever the eigenvector
matrix is well conditioned; otherwise the propagator is built by
scaling-and-squaring matrix exponentials between checkpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .model import BondNoise, DisorderSpec, ModelSpec, build_hamiltonian, sample_noise

#: eigenvector 1-norm condition number above which expm stepping is used
EIG_COND_LIMIT = 1e8


class NoFiniteCoherenceTime(ValueError):
    """Raised when a coherence trace does not decay over the fit window."""


@dataclass(frozen=True)
class CoherenceTrace:
    """Disorder-averaged coherence on a time grid."""

    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    realizations: int


@dataclass(frozen=True)
class DOSHistogram:
    """2D histogram of complex eigenvalues accumulated over realizations."""

    re_edges: np.ndarray
    im_edges: np.ndarray
    counts: np.ndarray
    realizations: int
    overflow: int = 0
    skipped: int = 0


def _check_times(times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1D array")
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be ascending and non-negative")
    return times


def coherence_trace(H: np.ndarray, times) -> np.ndarray:
    """``|<1| exp(-i t H) |1>|`` for every t in ``times`` (ascending, >= 0)."""
    H = np.asarray(H, dtype=complex)
    if not np.all(np.isfinite(H)):
        raise ValueError("Hamiltonian has non-finite entries")
    times = _check_times(times)

    w, P = np.linalg.eig(H)
    try:
        Pinv = np.linalg.inv(P)
        cond = np.linalg.norm(P, 1) * np.linalg.norm(Pinv, 1)
    except np.linalg.LinAlgError:
        cond = np.inf
    if cond < EIG_COND_LIMIT:
        amp = P[0, :] * Pinv[:, 0]
        return np.abs(np.exp(-1j * np.outer(times, w)) @ amp)
    return _coherence_by_expm(H, times)


def _coherence_by_expm(H: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Fallback for defective/ill-conditioned H: step checkpoint to checkpoint."""
    v = np.zeros(H.shape[0], dtype=complex)
    v[0] = 1.0
    out = np.empty(len(times))
    t_prev = 0.0
    cache: dict[float, np.ndarray] = {}
    for k, t in enumerate(times):
        dt = t - t_prev
        if dt > 0:
            prop = cache.get(dt)
            if prop is None:
                try:
                    prop = expm(-1j * dt * H)
                except Exception as exc:  # pragma: no cover - expm rarely fails
                    raise ArithmeticError(f"matrix exponential failed at dt={dt}") from exc
                cache[dt] = prop
            v = prop @ v
        out[k] = abs(v[0])
        t_prev = t
    return out


def coherence_mean(spec: ModelSpec, dspec: DisorderSpec, realizations: int,
                   times) -> CoherenceTrace:
    """Mean and standard error of the coherence over disorder realizations."""
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    times = _check_times(times)
    traces = np.empty((realizations, len(times)))
    for r in range(realizations):
        noise = sample_noise(spec, dspec, r)
        traces[r] = coherence_trace(build_hamiltonian(spec, noise), times)
    mean = traces.mean(axis=0)
    if realizations > 1:
        stderr = traces.std(axis=0, ddof=1) / math.sqrt(realizations)
    else:
        stderr = np.zeros_like(mean)
    return CoherenceTrace(times=times, mean=mean, stderr=stderr,
                          realizations=realizations)


def default_times(gamma: float, t_max: float, n: int = 400) -> np.ndarray:
    """Geometric-then-linear grid: dense below ~10/gamma, coarse after."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    if gamma <= 0 or t_max <= 12.0 / gamma:
        return np.linspace(0.0, t_max, n)
    t_break = 10.0 / gamma
    n_dense = max(n // 2, 8)
    n_lin = n - n_dense
    dense = np.geomspace(t_break / 200.0, t_break, n_dense - 1)
    linear = np.linspace(t_break, t_max, n_lin + 1)[1:]
    return np.concatenate([[0.0], dense, linear])


def long_time_mean(values: np.ndarray, fraction: float = 0.1) -> float:
    """Mean over the trailing ``fraction`` of grid points (the plateau
    estimator used when comparing against asymptotic predictions)."""
    values = np.asarray(values)
    k = max(1, int(math.ceil(fraction * len(values))))
    return float(values[-k:].mean())


def eigenvalues(spec: ModelSpec, noise: BondNoise | None = None) -> np.ndarray:
    """Spectrum of the restricted Hamiltonian for one realization."""
    return np.linalg.eigvals(build_hamiltonian(spec, noise))


def complex_dos(spec: ModelSpec, dspec: DisorderSpec, realizations: int,
                re_bins=60, im_bins=60) -> DOSHistogram:
    """Histogram all eigenvalues of ``realizations`` disordered chains.

    ``re_bins``/``im_bins`` are either bin counts (range auto-fitted to
    the data) or explicit, strictly increasing edge arrays.  With explicit
    edges, out-of-range eigenvalues are clamped into the boundary bins and
    counted in ``overflow``; realizations whose eigensolve fails to
    converge are skipped and counted in ``skipped``.
    """
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    vals = []
    skipped = 0
    for r in range(realizations):
        noise = sample_noise(spec, dspec, r)
        try:
            vals.append(eigenvalues(spec, noise))
        except np.linalg.LinAlgError:
            skipped += 1
    if not vals:
        raise ArithmeticError("all eigensolves failed")
    ev = np.concatenate(vals)
    re, im = ev.real, ev.imag

    def edges(bins, x):
        if np.isscalar(bins):
            lo, hi = x.min(), x.max()
            pad = 1e-9 + 0.05 * max(hi - lo, 1e-12)
            return np.linspace(lo - pad, hi + pad, int(bins) + 1)
        e = np.asarray(bins, dtype=float)
        if e.ndim != 1 or len(e) < 2 or np.any(np.diff(e) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        return e

    re_edges = edges(re_bins, re)
    im_edges = edges(im_bins, im)
    outside = ((re < re_edges[0]) | (re > re_edges[-1])
               | (im < im_edges[0]) | (im > im_edges[-1]))
    overflow = int(outside.sum())
    re = np.clip(re, re_edges[0], re_edges[-1])
    im = np.clip(im, im_edges[0], im_edges[-1])
    counts, _, _ = np.histogram2d(re, im, bins=[re_edges, im_edges])
    return DOSHistogram(re_edges=re_edges, im_edges=im_edges,
                        counts=counts.astype(np.int64),
                        realizations=realizations - skipped,
                        overflow=overflow, skipped=skipped)


def coherence_time_tau(trace, times, t0: float, t1: float) -> float:
    """Coherence time from the integral of an exponentially decaying trace.

    For ``C(t) = C(t0) exp(-(t - t0)/tau)`` the integral over [t0, t1]
    equals ``tau * (C(t0) - C(t1))``, so ``tau = I / (C(t0) - C(t1))``.
    Raises :class:`NoFiniteCoherenceTime` when the trace does not decay.
    """
    trace = np.asarray(trace, dtype=float)
    times = _check_times(times)
    if len(trace) != len(times):
        raise ValueError("trace and times must have equal length")
    if not (times[0] <= t0 < t1 <= times[-1]):
        raise ValueError("need times[0] <= t0 < t1 <= times[-1]")
    c0 = float(np.interp(t0, times, trace))
    c1 = float(np.interp(t1, times, trace))
    if c0 <= c1 or c1 <= 0.0:
        raise NoFiniteCoherenceTime(
            f"trace does not decay on [{t0}, {t1}] (C(t0)={c0:.6g}, C(t1)={c1:.6g})")
    inside = (times > t0) & (times < t1)
    tg = np.concatenate([[t0], times[inside], [t1]])
    cg = np.concatenate([[c0], trace[inside], [c1]])
    integral = float(np.trapezoid(cg, tg))
    return integral / (c0 - c1)
