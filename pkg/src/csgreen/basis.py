"""Coulomb-Sturmian basis and band-matrix representations of the Hamiltonian.

The radial functions are

    <r|n> = sqrt(n!/Gamma(n+2L+2)) exp(-b r) (2br)^(L+1) L_n^(2L+1)(2br)

with effective angular momentum ``L = l + (D-3)/2``. In this basis the
overlap, kinetic energy and every power ``r**i`` are symmetric band
matrices; ``1/r`` is the identity.

Matrix elements of ``r**i`` are obtained from the normalized Laguerre
moment tables.  With ``x = 2br`` one has

    <n|r^i|n'> = (2b)^-(i+1) * Xt^(i+1)[n, n']

where ``Xt`` is the symmetric tridiagonal (Jacobi) matrix of multiplication
by ``x`` in the orthonormalized Laguerre basis of weight ``x^(2L+1) e^-x``:

    Xt[n, n]   = 2n + 2L + 2
    Xt[n, n+1] = -sqrt((n+1)(n+2L+2))

Every matrix power of ``Xt`` is a sum over lattice paths whose signs are
all equal, so the products are free of cancellation.
"""
from dataclasses import dataclass, field
from math import lgamma, log

import numpy as np

from .errors import UnsupportedPowerError

__all__ = [
    "BasisSpec",
    "PotentialSpec",
    "BandedSymmetric",
    "MomentTable",
    "cs_radial_eval",
    "cs_radial_table",
    "moment_matrices",
    "overlap_matrix",
    "kinetic_matrix",
    "power_matrix",
    "hamiltonian_matrix",
    "assemble_j",
    "sturmian_defect",
]


@dataclass(frozen=True)
class BasisSpec:
    """Coulomb-Sturmian basis parameters.

    Parameters
    ----------
    D : int
        Spatial dimension, at least 2.
    l : int
        Orbital angular momentum, non-negative.
    b : float
        Inverse-length scale of the basis, positive.
    """

    D: int
    l: int
    b: float

    def __post_init__(self):
        if int(self.D) != self.D or self.D < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.D}")
        if int(self.l) != self.l or self.l < 0:
            raise ValueError(f"l must be a non-negative integer, got {self.l}")
        if not self.b > 0:
            raise ValueError(f"b must be positive, got {self.b}")

    @property
    def L(self) -> float:
        """Effective angular momentum ``l + (D-3)/2``."""
        return self.l + (self.D - 3) / 2

    @property
    def alpha(self) -> float:
        """Laguerre index ``2L+1``."""
        return 2 * self.L + 1

    def lam(self, n):
        """Sturmian eigen-charge ``(n+L+1) b`` of basis state ``n``."""
        return (np.asarray(n) + self.L + 1) * self.b

    def with_b(self, b):
        return BasisSpec(self.D, self.l, b)


@dataclass(frozen=True)
class PotentialSpec:
    """Polynomial potential ``sum_i a_i r**i`` for ``i >= -1``.

    Zero coefficients are dropped; ``degree`` is the largest power with a
    nonzero coefficient (``-1`` for the free particle).
    """

    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for power, value in dict(self.coeffs).items():
            if int(power) != power:
                raise UnsupportedPowerError(f"non-integer power {power}")
            if power < -1:
                raise UnsupportedPowerError(f"power {power} < -1 is not supported")
            if value != 0:
                clean[int(power)] = float(value)
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def from_pairs(cls, pairs):
        coeffs = {}
        for power, value in pairs:
            coeffs[power] = coeffs.get(power, 0.0) + value
        return cls(coeffs)

    @property
    def degree(self) -> int:
        return max(self.coeffs, default=-1)

    @property
    def half_bandwidth(self) -> int:
        """Half bandwidth of ``J(z)`` on the Coulomb-Sturmian basis."""
        return max(1, self.degree + 1)

    def coefficient(self, power):
        return self.coeffs.get(power, 0.0)

    @property
    def threshold(self) -> float:
        """Energy below which the spectrum is discrete (``inf`` when confining)."""
        if self.degree >= 1 and self.coeffs[self.degree] > 0:
            return float("inf")
        return 0.0

    def is_confining(self) -> bool:
        """True when there are bound states: a growing potential or an attractive 1/r."""
        k = self.degree
        if k >= 1:
            return self.coeffs[k] > 0
        return self.coefficient(-1) < 0

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return sum(a * r**i for i, a in self.coeffs.items())


@dataclass(frozen=True)
class BandedSymmetric:
    """Truncated symmetric band matrix in upper-diagonal storage.

    ``bands[d, n]`` holds ``A[n, n+d]`` for ``0 <= d <= w``; slots with
    ``n + d >= order`` are zero.
    """

    bands: np.ndarray

    def __post_init__(self):
        bands = np.array(self.bands)
        if bands.ndim != 2:
            raise ValueError("bands must be two-dimensional (w+1, order)")
        order = bands.shape[1]
        for d in range(1, bands.shape[0]):
            bands[d, max(order - d, 0):] = 0
        bands.setflags(write=False)
        object.__setattr__(self, "bands", bands)

    @property
    def order(self) -> int:
        return self.bands.shape[1]

    @property
    def half_bandwidth(self) -> int:
        return self.bands.shape[0] - 1

    @property
    def dtype(self):
        return self.bands.dtype

    def entry(self, n, n2):
        n, n2 = min(n, n2), max(n, n2)
        if n < 0 or n2 >= self.order:
            raise IndexError(f"({n}, {n2}) outside order {self.order}")
        d = n2 - n
        if d > self.half_bandwidth:
            return self.bands.dtype.type(0)
        return self.bands[d, n]

    def diagonal(self, d=0):
        """The ``d``-th super-diagonal as a vector of length ``order - d``."""
        if d > self.half_bandwidth:
            return np.zeros(max(self.order - d, 0), dtype=self.dtype)
        return self.bands[d, : self.order - d].copy()

    def to_dense(self):
        M = self.order
        A = np.zeros((M, M), dtype=self.dtype)
        idx = np.arange(M)
        for d in range(min(self.half_bandwidth, M - 1) + 1):
            A[idx[: M - d], idx[d:]] = self.bands[d, : M - d]
            A[idx[d:], idx[: M - d]] = self.bands[d, : M - d]
        return A

    def corner(self, M):
        """Leading ``M x M`` principal submatrix."""
        if M > self.order:
            raise ValueError(f"corner {M} larger than order {self.order}")
        return BandedSymmetric(self.bands[:, :M])

    def padded(self, w):
        """Same matrix stored with half bandwidth ``w >= self.half_bandwidth``."""
        if w < self.half_bandwidth:
            raise ValueError("cannot shrink stored bandwidth")
        out = np.zeros((w + 1, self.order), dtype=self.dtype)
        out[: self.half_bandwidth + 1] = self.bands
        return BandedSymmetric(out)

    @classmethod
    def from_dense(cls, A, w):
        A = np.asarray(A)
        M = A.shape[0]
        bands = np.zeros((w + 1, M), dtype=A.dtype)
        for d in range(w + 1):
            bands[d, : M - d] = np.diagonal(A, d)
        return cls(bands)

    @classmethod
    def linear_combination(cls, terms):
        """Sum ``c * A`` over ``(c, A)`` pairs of equal order."""
        terms = list(terms)
        order = terms[0][1].order
        w = max(A.half_bandwidth for _, A in terms)
        dtype = np.result_type(*[np.asarray(c).dtype for c, _ in terms], *[A.dtype for _, A in terms])
        out = np.zeros((w + 1, order), dtype=dtype)
        for c, A in terms:
            if A.order != order:
                raise ValueError("orders differ")
            out[: A.half_bandwidth + 1] += c * A.bands
        return cls(out)


def _jacobi_x(alpha, size):
    """Diagonals of multiplication by ``x`` in orthonormal Laguerre form."""
    n = np.arange(size, dtype=float)
    diag = 2 * n + alpha + 1
    off = -np.sqrt((n[:-1] + 1) * (n[:-1] + alpha + 1))
    return diag, off


@dataclass(frozen=True)
class MomentTable:
    """Laguerre moments ``I^(p)(n,n') = int e^-x x^(alpha+p) L_n L_n' dx``.

    Stored normalized: ``normalized[p]`` is ``c_n c_n' I^(p)`` with
    ``c_n = sqrt(n!/Gamma(n+alpha+1))``, which is the matrix power
    ``Xt**p`` and stays finite for any ``n``.
    """

    L: float
    normalized: tuple

    @property
    def order(self):
        return self.normalized[0].order

    @property
    def p_max(self):
        return len(self.normalized) - 1

    def log_norm(self, n):
        """``log c_n``."""
        alpha = 2 * self.L + 1
        return 0.5 * (lgamma(n + 1) - lgamma(n + alpha + 1))

    def raw(self, p, n, n2):
        """Unnormalized moment ``I^(p)(n, n')``; overflows for large ``n``."""
        return float(self.normalized[p].entry(n, n2)) * np.exp(-self.log_norm(n) - self.log_norm(n2))


def _band_times_tridiagonal(bands, diag, off):
    """Product of a symmetric band matrix with a symmetric tridiagonal one.

    Both share the same order; the result has half bandwidth one larger.
    Only upper diagonals are formed: the factors are powers of the same
    matrix, so the product is symmetric.
    """
    w = bands.shape[0] - 1
    M = bands.shape[1]

    def upper(d):
        # A[n, n+d] as a length-M vector for -w <= d <= w + 1, zero outside
        v = np.zeros(M)
        if 0 <= d <= w:
            v[: M - d] = bands[d, : M - d]
        elif -w <= d < 0:
            v[-d:] = bands[-d, : M + d]
        return v

    out = np.zeros((w + 2, M))
    for d in range(min(w + 2, M)):
        m = M - d
        # C[n,n+d] = A[n,n+d] X[n+d,n+d] + A[n,n+d-1] X[n+d-1,n+d] + A[n,n+d+1] X[n+d+1,n+d]
        acc = upper(d)[:m] * diag[d:]
        if d >= 1:
            acc += upper(d - 1)[:m] * off[d - 1 :]
        else:
            acc[1:] += upper(-1)[1:m] * off
        if m > 1:
            acc[: m - 1] += upper(d + 1)[: m - 1] * off[d:]
        out[d, :m] = acc
    return out


def moment_matrices(basis: BasisSpec, M: int, p_max: int) -> MomentTable:
    """Normalized Laguerre moment tables ``p = 0..p_max`` of order ``M``.

    Built on ``M + p_max`` internal rows so that every returned entry is
    exact (truncation only disturbs rows within ``p`` of the edge).
    """
    if M < 1 or p_max < 0:
        raise ValueError("need M >= 1 and p_max >= 0")
    size = M + p_max + 1
    diag, off = _jacobi_x(basis.alpha, size)
    current = np.ones((1, size))
    tables = [BandedSymmetric(current[:, :M])]
    for _ in range(p_max):
        current = _band_times_tridiagonal(current, diag, off)
        tables.append(BandedSymmetric(current[:, :M]))
    return MomentTable(basis.L, tuple(tables))


def overlap_matrix(basis: BasisSpec, M: int) -> BandedSymmetric:
    """``<n|n'>``: diagonal ``(n+L+1)/b``, off-diagonal ``-sqrt(n'(n'+2L+1))/(2b)``."""
    diag, off = _jacobi_x(basis.alpha, M)
    bands = np.zeros((2, M))
    bands[0] = diag / (2 * basis.b)
    bands[1, : M - 1] = off / (2 * basis.b)
    return BandedSymmetric(bands)


def kinetic_matrix(basis: BasisSpec, M: int) -> BandedSymmetric:
    """``<n|H0|n'>``: diagonal ``b(n+L+1)/2``, off-diagonal ``+b sqrt(n'(n'+2L+1))/4``."""
    n = np.arange(M, dtype=float)
    L = basis.L
    bands = np.zeros((2, M))
    bands[0] = basis.b * (n + L + 1) / 2
    bands[1, : M - 1] = basis.b * np.sqrt((n[:-1] + 1) * (n[:-1] + 2 * L + 2)) / 4
    return BandedSymmetric(bands)


def power_matrix(basis: BasisSpec, M: int, i: int, moments: MomentTable = None) -> BandedSymmetric:
    """``<n|r^i|n'>`` for ``i >= -1``; half bandwidth ``i+1`` (0 for ``i = -1``)."""
    if int(i) != i or i < -1:
        raise UnsupportedPowerError(f"power {i} not supported (need integer >= -1)")
    if i == -1:
        return BandedSymmetric(np.ones((1, M)))
    if i == 0:
        return overlap_matrix(basis, M)
    if moments is None or moments.p_max < i + 1 or moments.order < M:
        moments = moment_matrices(basis, M, i + 1)
    table = moments.normalized[i + 1].corner(M)
    return BandedSymmetric(table.bands * (2 * basis.b) ** (-(i + 1)))


def hamiltonian_matrix(basis: BasisSpec, pot: PotentialSpec, M: int) -> BandedSymmetric:
    """``<n|H|n'>`` with ``H = H0 + sum_i a_i r**i``."""
    k = pot.degree
    moments = moment_matrices(basis, M, k + 1) if k >= 1 else None
    terms = [(1.0, kinetic_matrix(basis, M))]
    for i, a in pot.coeffs.items():
        terms.append((a, power_matrix(basis, M, i, moments)))
    H = BandedSymmetric.linear_combination(terms)
    return H.padded(pot.half_bandwidth) if H.half_bandwidth < pot.half_bandwidth else H


def assemble_j(basis: BasisSpec, pot: PotentialSpec, z, M: int) -> BandedSymmetric:
    """Complex-symmetric band matrix of ``J(z) = z - H`` on the basis."""
    S = overlap_matrix(basis, M)
    H = hamiltonian_matrix(basis, pot, M)
    return BandedSymmetric.linear_combination([(complex(z), S), (-1.0 + 0j, H)])


def _log_norms(basis, nmax):
    n = np.arange(nmax + 1)
    from scipy.special import gammaln

    return 0.5 * (gammaln(n + 1) - gammaln(n + basis.alpha + 1))


def cs_radial_table(basis: BasisSpec, nmax: int, r):
    """``<r|n>`` for ``n = 0..nmax`` at every ``r``; shape ``(nmax+1,) + r.shape``.

    Uses the upward three-term Laguerre recurrence
    ``(k+1) L_{k+1} = (2k+1+alpha-x) L_k - (k+alpha) L_{k-1}``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radial coordinate must be non-negative")
    alpha = basis.alpha
    x = 2 * basis.b * r
    lag = np.empty((nmax + 1,) + r.shape)
    lag[0] = 1.0
    if nmax >= 1:
        lag[1] = 1 + alpha - x
    for k in range(1, nmax):
        lag[k + 1] = ((2 * k + 1 + alpha - x) * lag[k] - (k + alpha) * lag[k - 1]) / (k + 1)
    with np.errstate(divide="ignore"):
        log_env = np.where(x > 0, (basis.L + 1) * np.log(np.where(x > 0, x, 1.0)) - x / 2, -np.inf)
    log_c = _log_norms(basis, nmax)
    env = np.exp(log_c.reshape((-1,) + (1,) * r.ndim) + log_env)
    return env * lag


def cs_radial_eval(basis: BasisSpec, n: int, r: float) -> float:
    """Value of the Coulomb-Sturmian function ``<r|n>``."""
    if r < 0:
        raise ValueError("radial coordinate must be non-negative")
    if n < 0:
        raise ValueError("radial quantum number must be non-negative")
    if r == 0:
        return 0.0
    x = 2 * basis.b * r
    alpha = basis.alpha
    prev, cur = 0.0, 1.0
    for k in range(n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    log_c = 0.5 * (lgamma(n + 1) - lgamma(n + alpha + 1))
    return cur * np.exp(log_c - x / 2 + (basis.L + 1) * log(x))


def sturmian_defect(basis: BasisSpec, M: int) -> float:
    """Max entrywise residual of ``H0 - lambda_n/r + b^2/2`` on the basis."""
    T = kinetic_matrix(basis, M).to_dense()
    S = overlap_matrix(basis, M).to_dense()
    lam = basis.lam(np.arange(M))
    R = T - np.diag(lam) + basis.b**2 / 2 * S
    return float(np.max(np.abs(R)))
