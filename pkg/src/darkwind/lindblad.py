"""Full master-equation integrator on the vacuum + one-excitation sector.

Test-scope oracle: for the initial states considered here the excitation
number never increases, so the (N+1)-dimensional basis {vacuum,
excitation on site j} carries the exact Lindblad dynamics of the whole
network.  Integrating it directly and reading off the boundary-qubit
coherence 2|<0|rho|1>| cross-checks the restricted non-Hermitian
propagation used everywhere else, with no shared code path.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .model import BondNoise, ModelSpec, build_hamiltonian
from .dynamics import coherence_trace

#: largest chain the oracle accepts (dense (N+1)^2 density matrices)
MAX_SITES = 12


def hermitian_hamiltonian(spec: ModelSpec, noise: BondNoise | None = None) -> np.ndarray:
    """The closed-system (gamma = 0) tight-binding Hamiltonian, real N x N."""
    closed = dataclasses.replace(spec, gamma=0.0)
    return build_hamiltonian(closed, noise).real


def _embedded(spec: ModelSpec, noise: BondNoise | None):
    """H on {|0>, |1>..|N>} (vacuum decoupled) and the leaky-site indices."""
    N = spec.n_sites
    if N > MAX_SITES:
        raise ValueError(f"oracle limited to n_sites <= {MAX_SITES}")
    H1 = np.zeros((N + 1, N + 1))
    H1[1:, 1:] = hermitian_hamiltonian(spec, noise)
    leaky = 1 + spec.leaky_sites()
    return H1, leaky


def lindblad_rhs(rho: np.ndarray, spec: ModelSpec, noise: BondNoise | None = None) -> np.ndarray:
    """d(rho)/dt = -i[H, rho] + sum_l gamma (2 a_l rho a_l^dag - {a_l^dag a_l, rho})
    restricted to the 0/1-excitation sector (a_l maps |l> to the vacuum)."""
    H1, leaky = _embedded(spec, noise)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != H1.shape:
        raise ValueError(f"rho must be {H1.shape} for this spec")
    out = -1j * (H1 @ rho - rho @ H1)
    g = spec.gamma
    if g > 0:
        feed = 2.0 * g * np.trace(rho[np.ix_(leaky, leaky)])
        out[0, 0] += feed
        out[leaky, :] -= g * rho[leaky, :]
        out[:, leaky] -= g * rho[:, leaky]
    return out


def initial_state(spec: ModelSpec) -> np.ndarray:
    """Fiducial qubit in (|down> + |up>)/sqrt(2), everything else empty."""
    N = spec.n_sites
    psi = np.zeros(N + 1, dtype=complex)
    psi[0] = psi[1] = 1.0 / np.sqrt(2.0)
    return np.outer(psi, psi.conj())


def integrate_master(spec: ModelSpec, rho0: np.ndarray, times,
                     noise: BondNoise | None = None,
                     local_tol: float = 1e-10) -> list[np.ndarray]:
    """Adaptive step-doubling RK4 integration of the master equation.

    Each step is taken once at h and twice at h/2; the Richardson error
    estimate ``|y2 - y1|/15`` is kept below ``local_tol`` (max norm) and
    the extrapolated fifth-order update is accepted.  Returns rho at every
    requested time.
    """
    times = np.asarray(times, dtype=float)
    H1, leaky = _embedded(spec, noise)
    g = spec.gamma

    def rhs(r):
        out = -1j * (H1 @ r - r @ H1)
        if g > 0:
            out[0, 0] += 2.0 * g * np.trace(r[np.ix_(leaky, leaky)])
            out[leaky, :] -= g * r[leaky, :]
            out[:, leaky] -= g * r[:, leaky]
        return out

    def rk4(r, h):
        k1 = rhs(r)
        k2 = rhs(r + 0.5 * h * k1)
        k3 = rhs(r + 0.5 * h * k2)
        k4 = rhs(r + h * k3)
        return r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    rho = np.array(rho0, dtype=complex)
    t = 0.0
    snapshots = []
    h = 0.01
    h_min = 1e-13
    for t_target in times:
        while t < t_target:
            h = min(h, t_target - t)
            while True:
                full = rk4(rho, h)
                half = rk4(rk4(rho, 0.5 * h), 0.5 * h)
                err = np.max(np.abs(half - full)) / 15.0
                if err <= local_tol or h <= h_min:
                    break
                h = max(h_min, 0.9 * h * (local_tol / err) ** 0.2)
            if h <= h_min and err > local_tol:
                raise ArithmeticError("step size underflow in master-equation integration")
            rho = half + (half - full) / 15.0
            t += h
            if err > 0:
                h *= min(2.0, 0.9 * (local_tol / err) ** 0.2)
        snapshots.append(rho.copy())
    return snapshots


def coherence_master(spec: ModelSpec, times, noise: BondNoise | None = None,
                     local_tol: float = 1e-10) -> np.ndarray:
    """2|<0|rho(t)|1>| from the full master equation."""
    rhos = integrate_master(spec, initial_state(spec), times, noise, local_tol)
    return np.array([2.0 * abs(r[0, 1]) for r in rhos])


@dataclass(frozen=True)
class OracleReport:
    max_deviation: float
    max_trace_error: float
    min_eigenvalue: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance


def evolve_and_compare(spec: ModelSpec, times, tol: float = 1e-8,
                       noise: BondNoise | None = None) -> OracleReport:
    """Compare master-equation coherence with the restricted propagation.

    Also monitors trace preservation and positivity of rho along the way.
    """
    times = np.asarray(times, dtype=float)
    rhos = integrate_master(spec, initial_state(spec), times, noise)
    coh_full = np.array([2.0 * abs(r[0, 1]) for r in rhos])
    trace_err = max(abs(np.trace(r).real - 1.0) + abs(np.trace(r).imag) for r in rhos)
    min_eig = min(float(np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min()) for r in rhos)
    coh_restricted = coherence_trace(build_hamiltonian(spec, noise), times)
    max_dev = float(np.max(np.abs(coh_full - coh_restricted)))
    return OracleReport(max_deviation=max_dev, max_trace_error=float(trace_err),
                        min_eigenvalue=min_eig, tolerance=tol)
