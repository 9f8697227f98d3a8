"""Bound-state spectra and eigenvectors from the continued-fraction Green's matrix.

Eigenvalues are the real poles of ``G^(N)(z)``.  They are bracketed on a
grid along the real axis and refined by bisection.  The bracketing signal
is the inertia of the block factorization that evaluates the continued
fraction: the number of positive pivots of ``J(z)`` counts the
eigenvalues below ``z``.  The sign of ``det J^(N)`` alone also flips at the
poles of the tail ``C_{N+1}``; the inertia count is immune to those.

Eigenvectors come from the residue of ``G`` on a small circle around each
pole, evaluated with the trapezoid rule.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSpec, PotentialSpec, cs_radial_table, hamiltonian_matrix, overlap_matrix
from .errors import CSGreenError, ContourError
from .mcf import green_matrices, hamiltonian_blocks, scan_real

log = logging.getLogger(__name__)

__all__ = [
    "Level",
    "SpectrumResult",
    "Eigenstate",
    "find_eigenvalues",
    "contour_residue",
    "residue_at",
    "eigenstate_eval",
    "rayleigh_quotient",
    "sweep_b",
]

# log|det| below which a grid minimum without a count change is suspicious
FLAG_LOGDET = -30.0


@dataclass(frozen=True)
class Level:
    index: int
    E: float
    lo: float
    hi: float
    K: int
    N: int
    validated: bool = False

    @property
    def bracket(self):
        return self.hi - self.lo


@dataclass(frozen=True)
class SpectrumResult:
    """Located eigenvalues in a window.

    ``levels`` are sorted by energy; ``index`` is the global 0-based level
    number (how many eigenvalues lie below it).  ``rejected`` holds roots
    that moved under tail-depth doubling and ``flagged`` holds suspected
    degenerate or even-multiplicity poles.
    """

    levels: tuple
    window: tuple
    N: int
    K: int
    rejected: tuple = ()
    flagged: tuple = ()

    @property
    def energies(self):
        return np.array([lv.E for lv in self.levels])

    def __len__(self):
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)


@dataclass(frozen=True)
class Eigenstate:
    """Bound state ``psi = sum_n c_n |n>`` with ``c_n = <n~|psi>``.

    ``norm_defect`` is ``|c.T S c - 1|`` of the raw residue coefficients
    (before rescaling to unit norm), ``rank_defect`` the ratio of the second
    to the first singular value of the residue matrix.
    """

    E: float
    coefficients: np.ndarray
    norm_defect: float
    rank_defect: float
    basis: BasisSpec
    radius: float = 0.0
    points: int = 0
    residue: np.ndarray = field(default=None, repr=False)


def _count(blocks, z, N, K):
    scan = scan_real(blocks, z, N, K)
    return scan.count


def _bisect(blocks, N, K, targets, lo, hi, tol):
    """Shrink ``[lo, hi]`` so that ``count(lo) <= target < count(hi)``."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        width_ok = (hi - lo) <= tol * np.maximum(1.0, np.abs(mid))
        stuck = (mid <= lo) | (mid >= hi)
        active = ~(width_ok | stuck)
        if not np.any(active):
            break
        c = _count(blocks, mid[active], N, K)
        up = c > targets[active]
        idx = np.nonzero(active)[0]
        hi[idx[up]] = mid[active][up]
        lo[idx[~up]] = mid[active][~up]
    return lo, hi


def _locate(blocks, window, N, K, grid, tol, count_limit):
    E_lo, E_hi = window
    z = np.linspace(E_lo, E_hi, grid)
    scan = scan_real(blocks, z, N, K)
    ok = scan.ok
    zg, cg = z[ok], scan.count[ok]
    if zg.size < 2:
        return [], [], []
    first = int(cg[0])
    last = int(cg[-1])
    if last < first:
        raise CSGreenError("eigenvalue count decreased along the real axis")
    targets = np.arange(first, last)
    if count_limit is not None:
        targets = targets[:count_limit]
    if targets.size == 0:
        return [], [], _flag_minima(scan, [])
    pos = np.searchsorted(cg, targets, side="right")
    lo, hi = _bisect(blocks, N, K, targets, zg[pos - 1], zg[pos], tol)
    E = 0.5 * (lo + hi)
    # a level sitting on a window edge is counted or not depending on rounding
    edge = 4 * tol * np.maximum(1.0, np.abs(E))
    keep = (E - E_lo > edge) & (E_hi - E > edge)
    roots = list(zip(targets[keep].tolist(), E[keep], lo[keep], hi[keep]))
    return roots, scan, _flag_minima(scan, E)


def _flag_minima(scan, energies):
    """Grid minima of ``log|det J^(N)|`` below the floor with no eigenvalue nearby."""
    la = scan.logabs
    z = scan.z
    flagged = []
    if z.size < 3:
        return flagged
    h = z[1] - z[0]
    for i in range(1, z.size - 1):
        if la[i] < FLAG_LOGDET and la[i] <= la[i - 1] and la[i] <= la[i + 1]:
            if not any(abs(E - z[i]) <= 2 * h for E in energies):
                flagged.append(float(z[i]))
    return flagged


def find_eigenvalues(basis: BasisSpec, pot: PotentialSpec, window, N: int, count_limit=None, tol=1e-12,
                     grid=2000, K_start=None, K_max=2**16, m=None, validate=False, blocks=None) -> SpectrumResult:
    """Eigenvalues of ``H`` inside ``window = (E_lo, E_hi)``.

    Roots are located at tail depth ``K`` and again at ``2K``; the depth
    doubles until every root is stable to ``2 tol max(1, |E|)``.  Roots
    still moving at ``K_max`` are returned in ``rejected``.  With
    ``validate`` set each level is also checked by the residue rank test.
    """
    E_lo, E_hi = map(float, window)
    if not E_lo < E_hi:
        raise ValueError("empty energy window")
    if not pot.is_confining():
        raise ValueError("potential is not confining; the spectrum is not purely discrete")
    if E_hi >= pot.threshold:
        raise ValueError(f"window reaches the continuum threshold {pot.threshold:g}")
    if blocks is None:
        blocks = hamiltonian_blocks(basis, pot, m)
    K = K_start or max(2 * N, 64, N + 1)
    roots, _, flagged = _locate(blocks, (E_lo, E_hi), N, K, grid, tol, count_limit)
    while True:
        K2 = 2 * K
        roots2, _, flagged2 = _locate(blocks, (E_lo, E_hi), N, K2, grid, tol, count_limit)
        prev = {i: E for i, E, _, _ in roots}
        stable, moving = [], []
        for i, E, lo, hi in roots2:
            if i in prev and abs(prev[i] - E) <= 2 * tol * max(1.0, abs(E)):
                stable.append((i, E, lo, hi))
            else:
                moving.append((i, E, lo, hi))
        done = not moving and len(roots2) == len(roots)
        if done or K2 * 2 > K_max:
            break
        K, roots, flagged = K2, roots2, flagged2
    levels = [Level(i, float(E), float(lo), float(hi), K2, N) for i, E, lo, hi in stable]
    rejected = tuple(Level(i, float(E), float(lo), float(hi), K2, N) for i, E, lo, hi in moving)
    for lv in rejected:
        log.warning("level %d at %.12g not stable under depth doubling", lv.index, lv.E)
    flags = [("logdet-minimum", z) for z in flagged2]
    for a, b in zip(levels, levels[1:]):
        if b.E - a.E <= 4 * tol * max(1.0, abs(b.E)):
            flags.append(("degenerate", a.E))
    spectrum = SpectrumResult(tuple(levels), (E_lo, E_hi), N, K2, rejected, tuple(flags))
    if validate and levels:
        checked = []
        for k, lv in enumerate(levels):
            try:
                state = residue_at(basis, pot, lv.E, N=N, spectrum=spectrum, blocks=blocks)
                good = state.rank_defect < 1e-6
            except CSGreenError as exc:
                log.warning("level %d failed residue validation: %s", lv.index, exc)
                good = False
            checked.append(Level(lv.index, lv.E, lv.lo, lv.hi, lv.K, lv.N, good))
        spectrum = SpectrumResult(tuple(checked), (E_lo, E_hi), N, K2, rejected, tuple(flags))
    return spectrum


def contour_residue(blocks, center, radius, N, Q=32, tol=1e-10, K_max=2**20, Q_max=1024):
    """``(1/2 pi i) \\oint G^(N)(z) dz`` on a circle, trapezoid rule with ``Q`` doubling.

    Returns ``(R, Q)``; ``R`` is real for a circle centred on the real axis.
    """
    def nodes(q, offset):
        theta = 2 * np.pi * (np.arange(q) + offset) / q
        return center + radius * np.exp(1j * theta)

    def weighted_sum(z):
        G = green_matrices(blocks, z, N, tol=min(tol, 1e-12), K_max=K_max)[0]
        return np.tensordot(z - center, G, axes=(0, 0))

    total = weighted_sum(nodes(Q, 0.0))
    R = (total / Q).real
    while True:
        # the 2Q rule reuses the Q existing nodes and adds the midpoints
        total = total + weighted_sum(nodes(Q, 0.5))
        Q *= 2
        R2 = (total / Q).real
        scale = max(np.max(np.abs(R2)), 1e-300)
        if np.max(np.abs(R2 - R)) <= tol * max(scale, 1.0) or Q >= Q_max:
            return R2, Q
        R = R2


def residue_at(basis: BasisSpec, pot: PotentialSpec, E: float, radius=None, Q=32, N=3, tol=1e-10,
               spectrum: SpectrumResult = None, m=None, blocks=None) -> Eigenstate:
    """Eigenstate at the pole ``E`` from the contour integral of ``G``.

    The circle must enclose exactly one located eigenvalue.  Without an
    explicit ``spectrum`` the neighbourhood of ``E`` is searched first; the
    default radius is a quarter of the distance to the nearest neighbour.

    Raises
    ------
    ContourError
        If the contour encloses or touches another level, encloses no pole,
        or the residue is not rank one within ``1e-6``.
    """
    if blocks is None:
        blocks = hamiltonian_blocks(basis, pot, m)
    if spectrum is None:
        span = max(1.0, 0.25 * abs(E))
        hi = E + span
        if np.isfinite(pot.threshold):
            # levels accumulate at the threshold; stop well short of it
            hi = min(hi, pot.threshold + 0.25 * (E - pot.threshold))
        spectrum = find_eigenvalues(basis, pot, (E - span, hi), N, blocks=blocks)
    energies = spectrum.energies
    others = energies[np.abs(energies - E) > 1e-8 * max(1.0, abs(E))]
    gap = np.min(np.abs(others - E)) if others.size else abs(E) + 1.0
    if radius is None:
        lo, hi = spectrum.window
        # nothing is known past the searched window
        reach = min(gap, E - lo, hi - E) if lo < E < hi else gap
        radius = reach / 4
        if not others.size:
            radius = min(radius, 0.25)
    if radius >= gap:
        raise ContourError(f"contour of radius {radius} around {E} encloses a neighbouring level")
    for _, z in spectrum.flagged:
        if abs(abs(z - E) - radius) < 1e-6 * max(1.0, abs(E)):
            raise ContourError(f"contour passes through flagged point {z}")

    R, used = contour_residue(blocks, E, radius, N, Q=Q, tol=tol)
    R = 0.5 * (R + R.T)
    w, V = np.linalg.eigh(R)
    order = np.argsort(-np.abs(w))
    w, V = w[order], V[:, order]
    if abs(w[0]) < tol:
        raise ContourError(f"no pole inside the contour around {E}")
    if w[0] < 0:
        raise ContourError("residue is negative definite; not a bound-state pole")
    rank_defect = float(abs(w[1]) / abs(w[0])) if w.size > 1 else 0.0
    if rank_defect > 1e-6:
        raise ContourError(f"residue at {E} is not rank one (defect {rank_defect:.2e}); degenerate or contaminated")
    c = np.sqrt(w[0]) * V[:, 0]
    S = overlap_matrix(basis, c.size).to_dense()
    norm = float(c @ S @ c)
    c = c / np.sqrt(norm)
    if c[np.argmax(np.abs(c))] < 0:
        c = -c
    c.setflags(write=False)
    return Eigenstate(float(E), c, abs(norm - 1.0), rank_defect, basis, float(radius), used, R)


def eigenstate_eval(basis: BasisSpec, state: Eigenstate, r):
    """Radial wave function ``sum_n c_n <r|n>``."""
    r = np.asarray(r, dtype=float)
    c = state.coefficients
    table = cs_radial_table(basis, c.size - 1, r)
    return np.tensordot(c, table, axes=(0, 0))


def rayleigh_quotient(basis: BasisSpec, pot: PotentialSpec, c):
    """``c.T H c / c.T S c`` with exact band matrices of matching order."""
    c = np.asarray(c, dtype=float)
    H = hamiltonian_matrix(basis, pot, c.size).to_dense()
    S = overlap_matrix(basis, c.size).to_dense()
    return float(c @ H @ c / (c @ S @ c))


def sweep_b(basis: BasisSpec, pot: PotentialSpec, b_values, N, window, tol=1e-12, **kwargs):
    """Eigenvalues for each basis scale ``b``; long-format ``(b, index, E)`` records."""
    records = []
    for b in b_values:
        try:
            spectrum = find_eigenvalues(basis.with_b(float(b)), pot, window, N, tol=tol, **kwargs)
        except (CSGreenError, ValueError) as exc:
            log.error("sweep failed at b=%g: %s", b, exc)
            continue
        records.extend((float(b), lv.index, lv.E) for lv in spectrum.levels)
    return records
