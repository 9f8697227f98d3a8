"""Matrix continued fraction for the Green's matrix of a band Hamiltonian.

``J(z) = z S - H`` is cut into ``m x m`` blocks so that it becomes block
tridiagonal with diagonal blocks ``D_j`` and super-diagonal blocks ``E_j``
(the sub-diagonal block is ``E_j.T``).  Eliminating every block row beyond
``N`` leaves the leading ``(N+1) m`` square matrix with its last diagonal
block shifted by ``-E_N C_{N+1} E_N.T``, where the tail

    C_j = (D_j - E_j C_{j+1} E_j.T)^-1

is evaluated backward from ``C_{K+1} = 0``.  The inverse of the corrected
matrix is the leading corner of the Green's matrix.
"""
import logging
import threading
from dataclasses import dataclass, field

import numpy as np

from .basis import BandedSymmetric, BasisSpec, PotentialSpec, hamiltonian_matrix, overlap_matrix
from .errors import AtPoleError, NonConvergenceError, PartitionError, TailSingularityError

log = logging.getLogger(__name__)

__all__ = [
    "BlockTridiagonal",
    "GreenBlockMatrix",
    "blockify",
    "hamiltonian_blocks",
    "tail_cf",
    "corrected_matrix",
    "green_matrix",
    "green_matrices",
    "logdet_corrected",
    "scan_real",
    "defect_residual",
]

PIVOT_FLOOR = 1e-300
# condition number above which the corrected matrix counts as singular
POLE_COND = 1e14
# relative size of the perturbation used to measure rounding noise
JITTER = 4 * np.finfo(float).eps
# convergence is declared once the change is below this multiple of the noise
NOISE_FACTOR = 10.0


def _band_blocks(band: BandedSymmetric, m: int, nblocks: int):
    """Diagonal and super-diagonal ``m x m`` blocks of a band matrix."""
    w = band.half_bandwidth
    bands = band.bands
    order = band.order
    a = np.arange(m)
    j = np.arange(nblocks)[:, None, None]
    rows = j * m + a[None, :, None]

    def gather(cols):
        lo = np.minimum(rows, cols)
        d = np.abs(cols - rows)
        ok = (d <= w) & (cols < order) & (rows < order)
        vals = bands[np.minimum(d, w), np.minimum(lo, order - 1)]
        return np.where(ok, vals, 0)

    diag = gather(j * m + a[None, None, :])
    upper = gather((j + 1) * m + a[None, None, :])
    return diag, upper


class BlockTridiagonal:
    """Block-Jacobi view of the affine band matrix ``J(z) = z * slope + offset``.

    Rows are produced lazily: ``provider(M)`` must return the pair
    ``(slope, offset)`` of order-``M`` symmetric band matrices, and is
    called again with a larger ``M`` whenever deeper rows are requested.
    Cached rows are immutable, so instances can be shared between threads.
    """

    def __init__(self, provider, m, half_bandwidth, initial_blocks=256):
        if m < max(1, half_bandwidth):
            raise PartitionError(
                f"block size {m} smaller than half bandwidth {half_bandwidth}: partition is not tridiagonal"
            )
        self.provider = provider
        self.m = int(m)
        self.half_bandwidth = int(half_bandwidth)
        self._lock = threading.Lock()
        self._nblocks = 0
        self._cache = None
        self._ensure(initial_blocks)

    def _ensure(self, nblocks):
        if nblocks <= self._nblocks:
            return
        with self._lock:
            if nblocks <= self._nblocks:
                return
            size = max(nblocks, 2 * self._nblocks)
            slope, offset = self.provider((size + 1) * self.m)
            sd, su = _band_blocks(slope, self.m, size)
            od, ou = _band_blocks(offset, self.m, size)
            for arr in (sd, su, od, ou):
                arr.setflags(write=False)
            self._cache = (sd, su, od, ou)
            self._nblocks = size

    @property
    def cached_blocks(self):
        return self._nblocks

    def pencil_rows(self, j0, j1):
        """Slope and offset blocks of rows ``j0 .. j1-1``: ``(sD, sE, oD, oE)``."""
        self._ensure(j1)
        sd, su, od, ou = self._cache
        return sd[j0:j1], su[j0:j1], od[j0:j1], ou[j0:j1]

    def block_row(self, j, z):
        """``(D_j, E_j) = (J_{j,j}(z), J_{j,j+1}(z))``."""
        sd, su, od, ou = self.pencil_rows(j, j + 1)
        return z * sd[0] + od[0], z * su[0] + ou[0]

    def dense(self, z, nblocks):
        """Dense leading ``nblocks * m`` square of ``J(z)``."""
        m = self.m
        sd, su, od, ou = self.pencil_rows(0, nblocks)
        D = z * sd + od
        E = z * su + ou
        A = np.zeros((nblocks * m, nblocks * m), dtype=np.result_type(D, E))
        for j in range(nblocks):
            s = slice(j * m, (j + 1) * m)
            A[s, s] = D[j]
            if j + 1 < nblocks:
                t = slice((j + 1) * m, (j + 2) * m)
                A[s, t] = E[j]
                A[t, s] = E[j].T
        return A


def blockify(provider, m) -> BlockTridiagonal:
    """Partition a lazily generated symmetric band pencil into ``m x m`` blocks."""
    slope, offset = provider(4 * max(m, 1))
    w = max(slope.half_bandwidth, offset.half_bandwidth)
    return BlockTridiagonal(provider, m, w)


def hamiltonian_blocks(basis: BasisSpec, pot: PotentialSpec, m=None, initial_blocks=256) -> BlockTridiagonal:
    """Blocks of ``J(z) = z S - H`` on the Coulomb-Sturmian basis.

    The default block size equals the half bandwidth ``max(1, k+1)``.
    """
    w = pot.half_bandwidth
    if m is None:
        m = w

    def provider(M):
        return overlap_matrix(basis, M), BandedSymmetric(-hamiltonian_matrix(basis, pot, M).bands)

    return BlockTridiagonal(provider, m, w, initial_blocks=initial_blocks)


def _as_batch(z):
    z = np.asarray(z)
    if np.iscomplexobj(z) and np.all(z.imag == 0):
        z = z.real
    if not np.iscomplexobj(z):
        z = z.astype(float)
    return z.reshape(-1)


def _backward(blocks, z, j_hi, j_lo, track=False, jitter=None, C0=None):
    """Backward sweep ``C_j`` for ``j = j_hi .. j_lo`` over a batch of energies.

    Returns ``C_{j_lo}`` with shape ``(nz, m, m)``.  With ``track`` set, for
    real energies, also returns the number of positive eigenvalues and the
    summed ``log|det|`` of the Schur complements ``C_j^-1``.  ``jitter`` (a
    random generator) perturbs every Schur complement by a few ulps.  ``C0``
    continues a sweep from ``C_{j_hi+1}``.
    """
    m = blocks.m
    nz = z.shape[0]
    real = not np.iscomplexobj(z)
    dtype = float if real else complex
    C = np.zeros((nz, m, m), dtype=dtype) if C0 is None else C0
    positive = np.zeros(nz, dtype=int)
    logabs = np.zeros(nz)
    if j_hi < j_lo:
        return (C, positive, logabs) if track else C
    sd, su, od, ou = blocks.pencil_rows(j_lo, j_hi + 1)
    zz = z[:, None, None]
    for j in range(j_hi, j_lo - 1, -1):
        k = j - j_lo
        D = zz * sd[k] + od[k]
        E = zz * su[k] + ou[k]
        schur = D - E @ C @ np.swapaxes(E, -1, -2)
        if jitter is not None:
            schur = schur * (1 + JITTER * jitter.uniform(-1, 1, schur.shape))
        if real:
            schur = 0.5 * (schur + np.swapaxes(schur, -1, -2))
            w, V = np.linalg.eigh(schur)
            if np.any(np.abs(w) < PIVOT_FLOOR) or not np.all(np.isfinite(w)):
                raise TailSingularityError(j)
            C = (V / w[:, None, :]) @ np.swapaxes(V, -1, -2)
            if track:
                positive += np.count_nonzero(w > 0, axis=1)
                logabs += np.sum(np.log(np.abs(w)), axis=1)
        else:
            try:
                C = np.linalg.inv(schur)
            except np.linalg.LinAlgError:
                raise TailSingularityError(j) from None
            if not np.all(np.isfinite(C)):
                raise TailSingularityError(j)
    return (C, positive, logabs) if track else C


def tail_cf(blocks: BlockTridiagonal, z, N: int, K: int):
    """Continued-fraction tail ``C_{N+1}`` evaluated backward from depth ``K``.

    ``C_{K+1} = 0`` and ``C_j = (D_j - E_j C_{j+1} E_j.T)^-1`` for
    ``j = K .. N+1``.
    """
    if K <= N:
        raise ValueError(f"tail depth K={K} must exceed N={N}")
    C = _backward(blocks, _as_batch(z), K, N + 1)
    return C[0]


def corrected_matrix(blocks: BlockTridiagonal, z, N: int, tail):
    """Leading ``(N+1) m`` square of ``J(z)`` with the tail folded into block ``(N, N)``."""
    m = blocks.m
    J = blocks.dense(z, N + 1)
    _, E_N = blocks.block_row(N, z)
    J[N * m :, N * m :] -= E_N @ tail @ E_N.T
    return J


@dataclass(frozen=True)
class GreenBlockMatrix:
    """Leading corner ``<n~|G(z)|n~'>`` of the Green's matrix.

    ``values`` has shape ``((N+1) m, (N+1) m)``; ``depth`` is the tail depth
    ``K`` at which the relative change dropped below tolerance,
    ``estimate`` that change and ``noise`` the measured rounding noise.
    """

    z: complex
    N: int
    m: int
    values: np.ndarray
    depth: int
    estimate: float
    tail: np.ndarray
    history: tuple = field(default=())
    noise: float = 0.0

    def block(self, i, j):
        m = self.m
        return self.values[i * m : (i + 1) * m, j * m : (j + 1) * m]

    def asymmetry(self):
        G = self.values
        return float(np.max(np.abs(G - G.T)) / np.max(np.abs(G)))


def _corrected_batch(blocks, z, N, C):
    m = blocks.m
    n = (N + 1) * m
    sd, su, od, ou = blocks.pencil_rows(0, N + 1)
    zz = z[:, None, None]
    J = np.zeros((z.shape[0], n, n), dtype=np.result_type(z, sd, od))
    for j in range(N + 1):
        s = slice(j * m, (j + 1) * m)
        J[:, s, s] = zz * sd[j] + od[j]
        if j < N:
            t = slice((j + 1) * m, (j + 2) * m)
            E = zz * su[j] + ou[j]
            J[:, s, t] = E
            J[:, t, s] = np.swapaxes(E, -1, -2)
    E_N = zz * su[N] + ou[N]
    J[:, N * m :, N * m :] -= E_N @ C @ np.swapaxes(E_N, -1, -2)
    return J


def _invert_batch(J, z):
    cond = np.linalg.cond(J)
    bad = ~np.isfinite(cond) | (cond > POLE_COND)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise AtPoleError(z[i], cond[i])
    return np.linalg.inv(J)


def green_matrices(blocks: BlockTridiagonal, z, N: int, tol=1e-12, K_max=2**20, K_start=None):
    """Batched ``G^(N)`` at several energies sharing one depth schedule.

    Returns ``(G, C, K, history, noise)`` with ``G`` of shape ``(nz, n, n)``,
    the tails ``C_{N+1}``, the common converged depth, the relative changes
    per doubling and the measured rounding noise.

    The rounding noise of the backward sweep is measured once, by repeating
    the first sweep with every Schur complement perturbed at the ulp level;
    the stopping threshold is ``max(tol, NOISE_FACTOR * noise)`` since the
    depth-doubling change cannot fall below the noise.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if N < 0:
        raise ValueError("N must be non-negative")
    z = _as_batch(z)
    K = K_start or max(2 * N, 64, N + 1)
    prev = None
    history = []
    noise = None
    while True:
        if K > K_max:
            raise NonConvergenceError(history[-1] if history else np.inf, K // 2)
        C = _backward(blocks, z, K, N + 1)
        G = _invert_batch(_corrected_batch(blocks, z, N, C), z)
        scale = np.max(np.abs(G), axis=(1, 2))
        if noise is None:
            Cj = _backward(blocks, z, K, N + 1, jitter=np.random.default_rng(len(z) + K))
            Gj = np.linalg.inv(_corrected_batch(blocks, z, N, Cj))
            noise = float(np.max(np.max(np.abs(Gj - G), axis=(1, 2)) / scale))
            threshold = max(tol, NOISE_FACTOR * noise)
        if prev is not None:
            est = float(np.max(np.max(np.abs(G - prev), axis=(1, 2)) / scale))
            history.append(est)
            log.debug("green depth K=%d change=%.3e noise=%.3e", K, est, noise)
            if est < threshold:
                G = 0.5 * (G + np.swapaxes(G, -1, -2))
                return G, C, K, tuple(history), noise
        prev = G
        K *= 2


def green_matrix(blocks: BlockTridiagonal, z, N: int, tol=1e-12, K_max=2**20, K_start=None) -> GreenBlockMatrix:
    """Green's matrix ``G^(N)(z)`` from the tail-corrected truncated ``J``.

    The tail depth starts at ``max(2N, 64)`` and doubles until the max-norm
    relative change of ``G^(N)`` falls below ``tol``, or below ten times the
    measured rounding noise when that is larger (see :func:`green_matrices`).

    Raises
    ------
    NonConvergenceError
        If the depth would exceed ``K_max``.
    AtPoleError
        If the corrected matrix is singular, i.e. ``z`` is an eigenvalue.
    """
    zb = _as_batch(z)[:1]
    G, C, K, history, noise = green_matrices(blocks, zb, N, tol, K_max, K_start)
    values = G[0]
    values.setflags(write=False)
    return GreenBlockMatrix(zb[0], N, blocks.m, values, K, history[-1], C[0], history, noise)


def logdet_corrected(blocks: BlockTridiagonal, z, N: int, K: int):
    """``(sign, log|det|)`` of the tail-corrected ``J^(N)(z)``.

    For real ``z`` the sign is a real number in ``{-1, 0, 1}``; otherwise it
    is a unit complex phase.
    """
    z = _as_batch(z)[0]
    C = tail_cf(blocks, z, N, K)
    return np.linalg.slogdet(corrected_matrix(blocks, z, N, C))


@dataclass(frozen=True)
class RealScan:
    """Per-energy data from a batched sweep along the real axis."""

    z: np.ndarray
    sign: np.ndarray  # sign of det of the tail-corrected J^(N)
    logabs: np.ndarray  # log|det| of the tail-corrected J^(N)
    tail_sign: np.ndarray  # sign of the product of tail Schur determinants
    count: np.ndarray  # eigenvalues of the depth-K pencil below z
    ok: np.ndarray


def _scan_batch(blocks, z, N, K):
    # eliminating through block 0 keeps the inertia free of the normwise
    # rounding a dense factorization of the large corrected matrix would add
    C, pos, _ = _backward(blocks, z, K, N + 1, track=True)
    _, head_pos, logabs = _backward(blocks, z, N, 0, track=True, C0=C)
    head_neg = (N + 1) * blocks.m - head_pos
    sign = np.where(head_neg % 2 == 0, 1.0, -1.0)
    tail_neg = (K - N) * blocks.m - pos
    tail_sign = np.where(tail_neg % 2 == 0, 1.0, -1.0)
    return sign, logabs, tail_sign, pos + head_pos


def scan_real(blocks: BlockTridiagonal, z, N: int, K: int) -> RealScan:
    """Evaluate the corrected determinant and the eigenvalue count at real energies.

    The count is the inertia of the depth-``K`` block factorization: the
    number of positive eigenvalues of ``J(z)``, which by Sylvester's law
    equals the number of eigenvalues of ``(H, S)`` below ``z``.  Points
    where the tail hits a singular term are marked in ``ok``.
    """
    z = np.asarray(z, dtype=float).reshape(-1)
    try:
        sign, logabs, tail_sign, count = _scan_batch(blocks, z, N, K)
        ok = np.ones(z.shape, dtype=bool)
    except TailSingularityError:
        sign = np.zeros(z.shape)
        logabs = np.full(z.shape, np.nan)
        tail_sign = np.zeros(z.shape)
        count = np.full(z.shape, -1)
        ok = np.zeros(z.shape, dtype=bool)
        for i, zi in enumerate(z):
            try:
                s, la, ts, c = _scan_batch(blocks, z[i : i + 1], N, K)
            except TailSingularityError as exc:
                log.info("skipping z=%r: singular tail at depth %d", zi, exc.depth)
                continue
            sign[i], logabs[i], tail_sign[i], count[i], ok[i] = s[0], la[0], ts[0], c[0], True
    return RealScan(z, sign, logabs, tail_sign, count, ok)


def defect_residual(blocks: BlockTridiagonal, green: GreenBlockMatrix) -> float:
    """Max residual of the block equations ``J_{n,n-1}G + J_{n,n}G + J_{n,n+1}G = delta``.

    Rows ``0..N`` are checked; row ``N`` uses the exterior block
    ``G_{N+1,n'} = -C_{N+1} J_{N+1,N} G_{N,n'}``.
    """
    N, m, z = green.N, green.m, green.z
    G = green.values
    n = (N + 1) * m
    J = blocks.dense(z, N + 2)
    _, E_N = blocks.block_row(N, z)
    exterior = -green.tail @ E_N.T @ G[N * m :, :]
    G_ext = np.vstack([G, exterior])
    R = J[:n, : n + m] @ G_ext - np.eye(n)
    return float(np.max(np.abs(R)))
