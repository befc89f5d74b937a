"""Spectral analysis of graph Laplacians.

The eigensolver is a cyclic Jacobi iteration, which is accurate and entirely
adequate at the graph sizes this library targets (a few hundred nodes).
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, NumericError, ValidationError

_SYMMETRY_TOL = 1e-10


def _check_symmetric(m, what="matrix"):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{what} must be square, got shape {m.shape}")
    if m.size and np.max(np.abs(m - m.T)) > _SYMMETRY_TOL * max(1.0, np.max(np.abs(m))):
        raise ValidationError(f"{what} is not symmetric")
    return m


@dataclass
class SpectralDecomposition:
    """Eigenvectors (columns, the graph Fourier basis) and ascending eigenvalues."""

    eigenvectors: np.ndarray
    eigenvalues: np.ndarray


def jacobi_eigh(m, tol=1e-14, max_sweeps=64):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvector columns).
    """
    a = np.array(m, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v
    norm = max(1.0, np.linalg.norm(a))
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.square(a - np.diag(a.diagonal()))))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot_p = a[:, p].copy()
                rot_q = a[:, q].copy()
                a[:, p] = c * rot_p - s * rot_q
                a[:, q] = s * rot_p + c * rot_q
                rot_p = a[p, :].copy()
                rot_q = a[q, :].copy()
                a[p, :] = c * rot_p - s * rot_q
                a[q, :] = s * rot_p + c * rot_q
                rot_p = v[:, p].copy()
                rot_q = v[:, q].copy()
                v[:, p] = c * rot_p - s * rot_q
                v[:, q] = s * rot_p + c * rot_q
    else:
        raise NumericError("Jacobi eigensolver did not converge")
    eigenvalues = a.diagonal().copy()
    order = np.argsort(eigenvalues, kind="stable")
    return eigenvalues[order], v[:, order]


def spectral_decompose(lap):
    """Eigendecomposition of a symmetric Laplacian, eigenvalues ascending."""
    lap = _check_symmetric(lap, "Laplacian")
    eigenvalues, eigenvectors = jacobi_eigh(lap)
    return SpectralDecomposition(eigenvectors=eigenvectors, eigenvalues=eigenvalues)


def graph_fourier(x, decomp):
    """Forward graph Fourier transform: project node signals onto the basis."""
    x = np.asarray(x, dtype=np.float64)
    u = decomp.eigenvectors
    if x.shape[0] != u.shape[0]:
        raise DimensionError(f"signal has {x.shape[0]} rows, basis expects {u.shape[0]}")
    return u.T @ x


def inverse_graph_fourier(x_hat, decomp):
    x_hat = np.asarray(x_hat, dtype=np.float64)
    u = decomp.eigenvectors
    if x_hat.shape[0] != u.shape[0]:
        raise DimensionError(f"spectrum has {x_hat.shape[0]} rows, basis expects {u.shape[0]}")
    return u @ x_hat


def lambda_max(lap, tol=1e-9, max_iters=20000):
    """Largest eigenvalue by power iteration on L + cI, c = max row sum."""
    lap = _check_symmetric(lap, "Laplacian")
    n = lap.shape[0]
    if n == 1:
        return float(lap[0, 0])
    shift = float(np.max(np.abs(lap).sum(axis=1)))
    if shift < 1e-300:
        return 0.0
    shifted = lap + shift * np.eye(n)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    prev = np.inf
    for _ in range(max_iters):
        w = shifted @ v
        norm = np.linalg.norm(w)
        if norm < 1e-300:
            return -shift  # L = -c I edge case; not reachable for Laplacians
        v = w / norm
        estimate = float(v @ (lap @ v))
        if abs(estimate - prev) <= tol * max(1.0, abs(estimate)):
            return estimate
        prev = estimate
    raise NumericError(f"power iteration did not converge within {max_iters} iterations")


def scaled_laplacian(lap, lam_max):
    """Rescale so the spectrum lands in [-1, 1]: 2L/lambda_max - I.

    An (edgeless) Laplacian with lambda_max ~ 0 maps to -I.
    """
    if lam_max < 0:
        raise ValidationError("lambda_max must be non-negative")
    lap = np.asarray(lap, dtype=np.float64)
    n = lap.shape[0]
    if lam_max < 1e-12:
        return -np.eye(n)
    return (2.0 / lam_max) * lap - np.eye(n)
