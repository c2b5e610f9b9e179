"""Numerical substrate: random streams, small dense linear algebra, quadrature,
optimization and the one-dimensional empirical Wasserstein distance.

Every routine here is pure given its inputs. Randomness only enters through an
explicit :class:`RandomStream`, so concurrent callers on disjoint streams never
interfere.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import DivergenceSuspected, MaxIterExceeded, NotPositiveDefinite, NotSymmetric

_U64 = 2**64


class RandomStream:
    """Counter-based random stream keyed by ``(seed, stream_id)``.

    Backed by the Philox-4x64 counter generator with the 128-bit key
    ``stream_id << 64 | seed``. Two streams with the same key produce the same
    bit sequence; streams with different keys share no state, so replications
    can be scattered over workers without coordination.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        seed, stream_id = int(seed), int(stream_id)
        if not (0 <= seed < _U64 and 0 <= stream_id < _U64):
            raise ValueError("seed and stream_id must be unsigned 64-bit integers")
        self._seed = seed
        self._stream_id = stream_id
        self._gen = np.random.Generator(np.random.Philox(key=(stream_id << 64) | seed))

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def stream_id(self) -> int:
        return self._stream_id

    def __repr__(self):
        return f"RandomStream(seed={self._seed}, stream_id={self._stream_id})"

    def substream(self, *keys: int) -> "RandomStream":
        """Fresh stream whose id is a hash of this stream's id and ``keys``.

        Does not consume draws from ``self``.
        """
        payload = struct.pack(f"<{len(keys) + 1}Q", self._stream_id, *(int(k) % _U64 for k in keys))
        digest = hashlib.blake2b(payload, digest_size=8, person=b"arblobo-sub").digest()
        return RandomStream(self._seed, int.from_bytes(digest, "little"))

    def normal(self, size=None) -> np.ndarray:
        return self._gen.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None) -> np.ndarray:
        return self._gen.uniform(low, high, size)

    def chisquare(self, df, size=None) -> np.ndarray:
        return self._gen.chisquare(df, size)

    def choice(self, n: int, p=None, size=None) -> np.ndarray:
        return self._gen.choice(n, size=size, p=p)

    def dirichlet(self, alpha, size=None) -> np.ndarray:
        return self._gen.dirichlet(alpha, size)

    def integers(self, low, high=None, size=None) -> np.ndarray:
        return self._gen.integers(low, high, size)


# ---------------------------------------------------------------------------
# dense linear algebra
# ---------------------------------------------------------------------------

def _check_symmetric(M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if M.size and np.max(np.abs(M - M.T)) > tol * scale:
        raise NotSymmetric("matrix is not symmetric within tolerance")
    return M


def cholesky(M) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == M``.

    Raises :class:`NotPositiveDefinite` when a pivot falls below
    ``1e-14 * max(diag(M))``.
    """
    M = _check_symmetric(M)
    d = M.shape[0]
    L = np.zeros_like(M)
    floor = 1e-14 * max(float(np.max(np.diag(M))), 0.0) if d else 0.0
    for j in range(d):
        pivot = M[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > floor:
            raise NotPositiveDefinite(f"non-positive pivot {pivot:.3e} at column {j}")
        L[j, j] = np.sqrt(pivot)
        L[j + 1:, j] = (M[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def log_det_cholesky(L: np.ndarray) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def sym_eigen(M, tol: float = 1e-15, max_sweeps: int = 100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns
    -------
    values : (d,) ndarray, sorted in descending order
    vectors : (d, d) ndarray, orthonormal columns matching ``values``
    """
    A = _check_symmetric(M).copy()
    A = 0.5 * (A + A.T)
    d = A.shape[0]
    V = np.eye(d)
    total = np.sqrt(np.sum(A * A))
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= tol * total or off == 0.0:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    values = np.diag(A).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], V[:, order]


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _scale_matrix(mean: np.ndarray, scale) -> np.ndarray:
    L = np.asarray(scale, dtype=float)
    d = mean.shape[-1]
    if L.shape != (d, d):
        raise ValueError(f"scale has shape {L.shape}, expected {(d, d)}")
    return L


def sample_gaussian(stream: RandomStream, mean, scale, size=None) -> np.ndarray:
    """``mean + L z`` with ``z`` standard normal drawn from ``stream``.

    ``mean`` may carry leading batch axes; ``size`` prepends extra draw axes.
    """
    mean = np.asarray(mean, dtype=float)
    L = _scale_matrix(mean, scale)
    shape = mean.shape if size is None else tuple(np.atleast_1d(size)) + mean.shape
    z = stream.normal(shape)
    return mean + z @ L.T


def sample_student_t(stream: RandomStream, dof: float, mean, scale, size=None) -> np.ndarray:
    """Multivariate t draw ``mean + L z / sqrt(w / dof)``, ``w ~ chi2(dof)``."""
    if not dof > 0:
        raise ValueError("degrees of freedom must be positive")
    mean = np.asarray(mean, dtype=float)
    L = _scale_matrix(mean, scale)
    shape = mean.shape if size is None else tuple(np.atleast_1d(size)) + mean.shape
    z = stream.normal(shape)
    w = stream.chisquare(dof, shape[:-1])
    return mean + (z @ L.T) / np.sqrt(np.asarray(w) / dof)[..., None]


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _gauss_legendre(order: int = 16):
    return np.polynomial.legendre.leggauss(order)


def _panel_nodes(a: float, b: float, panels: int):
    if not a < b:
        raise ValueError("quadrature needs a < b")
    if panels < 1:
        raise ValueError("panels must be >= 1")
    nodes, weights = _gauss_legendre()
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


def _evaluate(f: Callable, *args) -> np.ndarray:
    try:
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = np.asarray(f(*args), dtype=float)
    except (TypeError, ValueError):
        vals = None
    if vals is None or vals.shape != args[0].shape:
        vals = np.array([f(*pt) for pt in zip(*args)], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand returned a non-finite value")
    return vals


def quadrature_1d(f: Callable, a: float, b: float, panels: int = 64) -> float:
    """Composite 16-node Gauss-Legendre rule on ``[a, b]``.

    ``f`` should accept an array of abscissae; scalar-only callables are
    evaluated point by point.
    """
    x, w = _panel_nodes(float(a), float(b), int(panels))
    return float(np.dot(w, _evaluate(f, x)))


def quadrature_2d(f: Callable, x_range, y_range, panels: int = 64) -> float:
    """Tensor-product version of :func:`quadrature_1d`; ``f(x, y)`` vectorized."""
    x, wx = _panel_nodes(float(x_range[0]), float(x_range[1]), int(panels))
    y, wy = _panel_nodes(float(y_range[0]), float(y_range[1]), int(panels))
    X, Y = np.meshgrid(x, y, indexing="ij")
    vals = _evaluate(f, X.ravel(), Y.ravel()).reshape(X.shape)
    return float(wx @ vals @ wy)


# ---------------------------------------------------------------------------
# Wasserstein in one dimension
# ---------------------------------------------------------------------------

def empirical_w1_1d(samples_a, samples_b) -> float:
    """W1 between two equally weighted empirical measures on the line.

    Inputs are sorted here, so callers need not pre-sort.
    """
    a = np.sort(np.asarray(samples_a, dtype=float).ravel())
    b = np.sort(np.asarray(samples_b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("empirical W1 needs non-empty samples")
    if a.size != b.size:
        raise ValueError(f"sample sizes differ: {a.size} vs {b.size}")
    return float(np.mean(np.abs(a - b)))


# ---------------------------------------------------------------------------
# optimization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimizerResult:
    minimizer: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    converged: bool


def gradient_descent(
    objective: Callable,
    gradient: Callable,
    x0,
    tolerance: float = 1e-8,
    max_iter: int = 20_000,
    max_norm: float = np.inf,
    strict: bool = True,
) -> OptimizerResult:
    """Steepest descent with Armijo backtracking (c=1e-4, shrink 0.5).

    The first trial step is 1 on the opening iteration and the
    Barzilai-Borwein length s's / s'y afterwards, which keeps ill-conditioned
    problems from crawling while every accepted step still decreases f.

    Near the optimum the objective decrease drops below round-off; a trial
    step is then also accepted if it raises the objective by no more than
    round-off and it shrinks the gradient norm.

    Raises
    ------
    DivergenceSuspected
        if an iterate leaves the ball of radius ``max_norm``.
    MaxIterExceeded
        if the tolerance is not met within ``max_iter`` iterations and
        ``strict`` is set; otherwise the unconverged result is returned.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    x = np.array(x0, dtype=float)
    f = float(objective(x))
    g = np.asarray(gradient(x), dtype=float)
    gn = float(np.linalg.norm(g))
    trial = 1.0
    for it in range(max_iter):
        if gn <= tolerance:
            return OptimizerResult(x, f, gn, it, True)
        step = trial
        while True:
            xn = x - step * g
            fn = float(objective(xn))
            if np.isfinite(fn):
                if fn <= f - 1e-4 * step * gn * gn:
                    gnew = np.asarray(gradient(xn), dtype=float)
                    break
                if fn <= f + 16.0 * np.finfo(float).eps * (1.0 + abs(f)):
                    gnew = np.asarray(gradient(xn), dtype=float)
                    if np.linalg.norm(gnew) < gn:
                        break
            step *= 0.5
            if step < 1e-30:
                result = OptimizerResult(x, f, gn, it, False)
                raise MaxIterExceeded("line search stalled", result)
        sk, yk = xn - x, gnew - g
        sy = float(sk @ yk)
        trial = min(max(float(sk @ sk) / sy, 1e-10), 1e10) if sy > 0 else 1.0
        x, f, g = xn, fn, gnew
        gn = float(np.linalg.norm(g))
        if float(np.linalg.norm(x)) > max_norm:
            raise DivergenceSuspected(
                f"iterate norm exceeded {max_norm} after {it + 1} iterations", iterate=x
            )
    result = OptimizerResult(x, f, gn, max_iter, gn <= tolerance)
    if result.converged or not strict:
        return result
    raise MaxIterExceeded(f"gradient norm {gn:.3e} > {tolerance:.1e} after {max_iter} iterations", result)


def check_gradient(f: Callable, grad: Callable, x, eps: float = 1e-6) -> float:
    """Largest ``|grad_i - fd_i| / (1 + |grad_i|)`` against central differences."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    x = np.array(x, dtype=float)
    g = np.asarray(grad(x), dtype=float)
    fd = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = eps
        fd.flat[i] = (float(f(x + e)) - float(f(x - e))) / (2.0 * eps)
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(fd))):
        raise ValueError("non-finite gradient or function value")
    return float(np.max(np.abs(g - fd) / (1.0 + np.abs(g))))
