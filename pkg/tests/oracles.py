"""Independent reference computations shared by the tests."""
import numpy as np
import scipy.linalg
from scipy.special import eval_genlaguerre, gammaln, roots_genlaguerre


def closed_form_r(L, b, n, n2):
    """<n|r|n'> as printed, n <= n2."""
    if n2 == n:
        return (6 * n**2 + 2 * (L + 1) * (6 * n + 2 * L + 3)) / (4 * b**2)
    if n2 == n + 1:
        return -(2 * n2 + 2 * L + 1) * np.sqrt(n2 * (n2 + 2 * L + 1)) / (2 * b**2)
    if n2 == n + 2:
        return np.sqrt(n2 * (n2 - 1) * (n2 + 2 * L) * (n2 + 2 * L + 1)) / (4 * b**2)
    return 0.0


def closed_form_r2(L, b, n, n2):
    """<n|r^2|n'> as printed, n <= n2."""
    if n2 == n:
        return (((10 * n + 2 * L + 4) * (n + 2 * L + 3) + 9 * n * (n - 1)) * (n + 2 * L + 2)
                + n * (n - 1) * (n - 2)) / (8 * b**3)
    if n2 == n + 1:
        return (-3 / (8 * b**3) * ((4 * n2 + 2 * L) * (n2 + 2 * L + 2) + (n2 - 1) * (n2 - 2))
                * np.sqrt(n2 * (n2 + 2 * L + 1)))
    if n2 == n + 2:
        return 3 / (8 * b**3) * (2 * n2 + 2 * L) * np.sqrt(n2 * (n2 - 1) * (n2 + 2 * L + 1) * (n2 + 2 * L))
    if n2 == n + 3:
        return -1 / (8 * b**3) * np.sqrt(
            n2 * (n2 - 1) * (n2 - 2) * (n2 + 2 * L + 1) * (n2 + 2 * L) * (n2 + 2 * L - 1))
    return 0.0


def closed_form_matrix(fn, L, b, M):
    A = np.zeros((M, M))
    for p in range(M):
        for q in range(p, M):
            A[p, q] = A[q, p] = fn(L, b, p, q)
    return A


def quadrature_power(basis, M, i, nodes=None):
    """<n|r^i|n'> by Gauss-Laguerre quadrature in x = 2br (exact for polynomials)."""
    a = basis.alpha
    nodes = nodes or (M + i + 20)
    x, w = roots_genlaguerre(nodes, a)
    n = np.arange(M)
    log_c = 0.5 * (gammaln(n + 1) - gammaln(n + a + 1))
    P = np.array([np.exp(log_c[k]) * eval_genlaguerre(k, a, x) for k in n])
    return (P * w * x ** (i + 1)) @ P.T / (2 * basis.b) ** (i + 1)


def dense_spectrum(basis, pot, M, count):
    from csgreen.basis import hamiltonian_matrix, overlap_matrix

    H = hamiltonian_matrix(basis, pot, M).to_dense()
    S = overlap_matrix(basis, M).to_dense()
    return scipy.linalg.eigh(H, S, eigvals_only=True, subset_by_index=[0, count - 1])


def dense_green_corner(basis, pot, z, M, size):
    from csgreen.basis import assemble_j

    J = assemble_j(basis, pot, z, M).to_dense()
    return np.linalg.inv(J)[:size, :size]


def random_confining(rng, k_max=3):
    from csgreen.basis import PotentialSpec

    k = int(rng.integers(1, k_max + 1))
    coeffs = {i: float(rng.uniform(-2, 2)) for i in range(-1, k)}
    coeffs[k] = float(rng.uniform(0.1, 2))
    return PotentialSpec(coeffs)
