"""Chain definitions, quenched disorder sampling and Hamiltonian assembly.

A chain is a 1D array of qubit and cavity sites grouped into unit cells of
two (A, B) or three (A, B, C) sites, with the last site of each cell the
leaky one (local decay rate ``gamma``).  In the zero/one-excitation sector
the coherence of the boundary qubit evolves under a non-Hermitian
tight-binding Hamiltonian whose only complex entries are ``-i*gamma`` on
the leaky diagonal.  Site ordering is A1, B1[, C1], A2, ... ; an open
chain keeps every bond whose two endpoints exist, so the outgoing
inter-cell bond of the final cell is absent.

Couplings per cell j:

* dimer:  ``j1`` on A_j-B_j, ``j2`` on B_j-A_{j+1}
* trimer: ``j1`` on A_j-B_j, ``j2`` on B_j-C_j, ``j`` on A_j-C_j,
  ``j3`` on C_j-A_{j+1}

Quenched disorder adds an independent uniform offset in
``[-mu_family, +mu_family]`` to each bond of a family (and optionally to
every on-site energy), drawn reproducibly from a seed chain (see
:mod:`darkwind.seeds`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from .seeds import absorb

DIMER = "dimer"
TRIMER = "trimer"


@dataclass(frozen=True)
class ModelSpec:
    """Static definition of a clean chain.

    Unused couplings of a kind (``j3``, ``j`` for dimers) stay at 0.
    """

    kind: str
    n_sites: int
    j1: float
    j2: float
    j3: float = 0.0
    j: float = 0.0
    eps_a: float = 0.0
    eps_b: float = 0.0
    eps_c: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in (DIMER, TRIMER):
            raise ValueError(f"kind must be '{DIMER}' or '{TRIMER}', got {self.kind!r}")
        if self.n_sites < 2:
            raise ValueError("n_sites must be >= 2")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")

    @property
    def cell_size(self) -> int:
        return 2 if self.kind == DIMER else 3

    @property
    def n_cells(self) -> int:
        """Number of complete unit cells."""
        return self.n_sites // self.cell_size

    @property
    def whole_cells(self) -> bool:
        return self.n_sites % self.cell_size == 0

    def leaky_sites(self) -> np.ndarray:
        """0-based indices of the decaying sites (last site of each cell)."""
        n = self.cell_size
        return np.arange(n - 1, self.n_sites, n)

    def bond_counts(self) -> dict[str, int]:
        """Number of physical bonds per coupling family on the open chain."""
        return {fam: len(pairs) for fam, pairs in self._bond_sites().items()}

    def _bond_sites(self) -> dict[str, list[tuple[int, int]]]:
        N = self.n_sites
        if self.kind == DIMER:
            return {
                "j1": [(s, s + 1) for s in range(0, N - 1, 2)],
                "j2": [(s, s + 1) for s in range(1, N - 1, 2)],
            }
        return {
            "j1": [(s, s + 1) for s in range(0, N - 1, 3)],
            "j2": [(s, s + 1) for s in range(1, N - 1, 3)],
            "j": [(s, s + 2) for s in range(0, N - 2, 3)],
            "j3": [(s, s + 1) for s in range(2, N - 1, 3)],
        }


@dataclass(frozen=True)
class DisorderSpec:
    """Half-widths of the uniform disorder per coupling family.

    ``mu_diag`` perturbs every on-site energy independently (this breaks
    the chiral symmetry protecting the winding number, so topology
    routines reject it; dynamics routines accept it).
    """

    mu1: float = 0.0
    mu2: float = 0.0
    mu3: float = 0.0
    mu_j: float = 0.0
    mu_diag: float = 0.0
    base_seed: int = 0

    def __post_init__(self):
        for name in ("mu1", "mu2", "mu3", "mu_j", "mu_diag"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class BondNoise:
    """One quenched disorder realization: additive offsets per bond/site."""

    dj1: np.ndarray
    dj2: np.ndarray
    dj3: np.ndarray
    dj: np.ndarray
    deps: np.ndarray
    seed: int = 0

    @classmethod
    def zero(cls, spec: ModelSpec) -> "BondNoise":
        """The clean (no disorder) realization for ``spec``."""
        counts = spec.bond_counts()
        return cls(
            dj1=np.zeros(counts["j1"]),
            dj2=np.zeros(counts["j2"]),
            dj3=np.zeros(counts.get("j3", 0)),
            dj=np.zeros(counts.get("j", 0)),
            deps=np.zeros(spec.n_sites),
        )

    def check_shape(self, spec: ModelSpec) -> None:
        counts = spec.bond_counts()
        expected = {
            "dj1": counts["j1"],
            "dj2": counts["j2"],
            "dj3": counts.get("j3", 0),
            "dj": counts.get("j", 0),
            "deps": spec.n_sites,
        }
        for name, n in expected.items():
            got = len(getattr(self, name))
            if got != n:
                raise ValueError(f"noise array {name} has length {got}, expected {n}")


def sample_noise(spec: ModelSpec, dspec: DisorderSpec, realization_index: int) -> BondNoise:
    """Draw one disorder realization.

    Deterministic in (``dspec.base_seed``, ``realization_index``); each
    offset is uniform in [-mu, +mu] of its family and all draws are
    independent.  Zero half-widths give exactly zero offsets.
    """
    if realization_index < 0:
        raise ValueError("realization_index must be >= 0")
    seed = absorb(dspec.base_seed, realization_index)
    rng = np.random.default_rng(seed)
    counts = spec.bond_counts()

    def draw(mu, n):
        if mu == 0.0:
            # keep the draw to preserve stream alignment across mu values
            rng.uniform(-1.0, 1.0, n)
            return np.zeros(n)
        return mu * rng.uniform(-1.0, 1.0, n)

    return BondNoise(
        dj1=draw(dspec.mu1, counts["j1"]),
        dj2=draw(dspec.mu2, counts["j2"]),
        dj3=draw(dspec.mu3, counts.get("j3", 0)),
        dj=draw(dspec.mu_j, counts.get("j", 0)),
        deps=draw(dspec.mu_diag, spec.n_sites),
        seed=seed,
    )


def _family_values(spec: ModelSpec, noise: BondNoise) -> dict[str, np.ndarray]:
    base = {"j1": spec.j1, "j2": spec.j2, "j3": spec.j3, "j": spec.j}
    offs = {"j1": noise.dj1, "j2": noise.dj2, "j3": noise.dj3, "j": noise.dj}
    return {fam: base[fam] + offs[fam] for fam in offs}


def onsite_energies(spec: ModelSpec, noise: BondNoise) -> np.ndarray:
    """Complex on-site energies, ``-i*gamma`` included on leaky sites."""
    n = spec.cell_size
    eps = np.empty(spec.n_sites, dtype=complex)
    per_cell = ([spec.eps_a, spec.eps_b] if n == 2
                else [spec.eps_a, spec.eps_b, spec.eps_c])
    for s in range(spec.n_sites):
        eps[s] = per_cell[s % n]
    eps += noise.deps
    eps[spec.leaky_sites()] -= 1j * spec.gamma
    return eps


def build_hamiltonian(spec: ModelSpec, noise: BondNoise | None = None) -> np.ndarray:
    """Assemble the restricted non-Hermitian Hamiltonian as a dense array.

    The matrix is complex-symmetric (all couplings real); its only
    imaginary entries are ``-i*gamma`` on the leaky diagonal.
    """
    if noise is None:
        noise = BondNoise.zero(spec)
    noise.check_shape(spec)
    N = spec.n_sites
    H = np.zeros((N, N), dtype=complex)
    H[np.arange(N), np.arange(N)] = onsite_energies(spec, noise)
    values = _family_values(spec, noise)
    for fam, pairs in spec._bond_sites().items():
        vals = values[fam]
        for k, (a, b) in enumerate(pairs):
            H[a, b] = H[b, a] = vals[k]
    if not np.all(np.isfinite(H)):
        raise ValueError("non-finite Hamiltonian entries")
    return H


def sublattice_blocks(spec: ModelSpec, noise: BondNoise | None = None) -> dict[str, np.ndarray]:
    """Rearrange the chain by sublattice and return the non-leaky blocks.

    With sites regrouped as (all A, all B[, all C]) the Hamiltonian takes
    the block form ``[[Lambda, V], [V^T, eps_leaky - i*gamma*I]]`` where
    ``Lambda`` couples only non-decaying sites and ``V`` holds the
    hopping from non-decaying onto decaying sites.  Returns ``Lambda``
    ((n-1)M x (n-1)M) and ``V`` ((n-1)M x M) for M complete cells.
    """
    if noise is None:
        noise = BondNoise.zero(spec)
    noise.check_shape(spec)
    if not spec.whole_cells:
        raise ValueError("sublattice blocks require a whole number of unit cells")
    M = spec.n_cells
    vals = _family_values(spec, noise)
    eps = onsite_energies(spec, noise)

    if spec.kind == DIMER:
        lam = np.diag(eps[0::2])
        V = np.zeros((M, M))
        V[np.arange(M), np.arange(M)] = vals["j1"]
        V[np.arange(1, M), np.arange(M - 1)] = vals["j2"]
        return {"Lambda": lam, "V": V}

    lam = np.zeros((2 * M, 2 * M), dtype=complex)
    lam[:M, :M] = np.diag(eps[0::3])
    lam[M:, M:] = np.diag(eps[1::3])
    lam[np.arange(M), M + np.arange(M)] = vals["j1"]
    lam[M + np.arange(M), np.arange(M)] = vals["j1"]
    h_ac = np.zeros((M, M))
    h_ac[np.arange(M), np.arange(M)] = vals["j"]
    h_ac[np.arange(1, M), np.arange(M - 1)] = vals["j3"]
    h_bc = np.diag(vals["j2"])
    return {"Lambda": lam, "V": np.vstack([h_ac, h_bc]), "H_AC": h_ac, "H_BC": h_bc}


def sublattice_permutation(spec: ModelSpec) -> np.ndarray:
    """Site permutation p with p[k] = original index of sublattice slot k."""
    n = spec.cell_size
    return np.concatenate([np.arange(a, spec.n_sites, n) for a in range(n)])


def save_matrix(path, H: np.ndarray) -> None:
    """Write a square complex matrix as text: header ``N=<dim>``, then one
    line per row of space-separated ``re,im`` pairs."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("expected a square matrix")
    with open(path, "w") as fh:
        fh.write(f"N={H.shape[0]}\n")
        for row in H:
            fh.write(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row) + "\n")


def load_matrix(path) -> np.ndarray:
    """Inverse of :func:`save_matrix`."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("N="):
            raise ValueError("missing N=<dim> header")
        N = int(header[2:])
        H = np.empty((N, N), dtype=complex)
        for i in range(N):
            parts = fh.readline().split()
            if len(parts) != N:
                raise ValueError(f"row {i} has {len(parts)} entries, expected {N}")
            for k, p in enumerate(parts):
                re, im = p.split(",")
                H[i, k] = complex(float(re), float(im))
    return H
