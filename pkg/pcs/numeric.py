import hashlib
import numpy as np
from dataclasses import dataclass
from scipy import linalg

from pcs.errors import FactorizationError, InvalidArgumentError

__all__ = [
    'RngStream', 'SpdFactor', 'as_matrix', 'as_vector', 'cholesky', 'gaussian_vector', 'logdet_spd', 'solve_spd',
    'stable_seed'
]

# pivots (squared diagonal entries of the factor) at or below this are rejected
PIVOT_TOL = 1e-12


def as_vector(x, name='x'):
    """Validate a Vector: 1-D, float64, finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InvalidArgumentError(f'{name} must be a vector, but got shape {arr.shape}.')
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f'{name} has non-finite entries.')
    return arr


def as_matrix(a, name='A'):
    """Validate a Matrix: 2-D, float64, finite entries."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidArgumentError(f'{name} must be a matrix, but got shape {arr.shape}.')
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f'{name} has non-finite entries.')
    return arr


def stable_seed(*parts):
    """Mix integers and strings into a 64-bit seed.

    The digest only depends on the textual form of the parts, so the same tuple gives the
    same seed on every platform and in every process.
    """
    digest = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, (bool, np.bool_)):
            key = str(bool(part))
        elif isinstance(part, (int, np.integer)):
            key = str(int(part))
        elif isinstance(part, (float, np.floating)):
            key = repr(float(part))
        else:
            key = str(part)
        digest.update(key.encode('utf-8'))
        digest.update(b'\x1f')
    return int.from_bytes(digest.digest(), 'little')


class RngStream():
    """A seeded, counter-based random stream.

    Backed by numpy's Philox generator keyed directly with the seed, so two streams with
    the same seed produce the same numbers everywhere. Streams are single-owner; use
    :meth:`spawn` for a child stream and :meth:`clone` to replay from the start.

    Args:
        seed (int): 64-bit seed.
    """

    def __init__(self, seed):
        self.seed = int(seed) % (1 << 64)
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def __repr__(self):
        return f'RngStream(seed={self.seed})'

    def spawn(self, *keys):
        """Child stream derived from (seed, keys); independent of how much of this stream was used."""
        return RngStream(stable_seed(self.seed, *keys))

    def clone(self):
        return RngStream(self.seed)

    def uniform(self, size=None):
        """Uniform variates on [0, 1)."""
        return self._gen.random(size)

    def normal(self, size=None):
        """Standard normal variates by the Box-Muller transform of Philox uniforms."""
        shape = () if size is None else np.atleast_1d(size).astype(int).tolist()
        count = int(np.prod(shape)) if shape else 1
        pairs = (count + 1) // 2
        u1 = 1.0 - self._gen.random(pairs)  # (0, 1]
        u2 = self._gen.random(pairs)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        out = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:count]
        if size is None:
            return float(out[0])
        return out.reshape(shape)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)

    def choice(self, probs, size=None):
        """Categorical draws by inverse CDF; zero-probability entries are never returned."""
        probs = np.asarray(probs, dtype=np.float64)
        cdf = np.cumsum(probs)
        u = self._gen.random(size) * cdf[-1]
        idx = np.searchsorted(cdf, u, side='right')
        return np.minimum(idx, len(probs) - 1)

    def permutation(self, n):
        return self._gen.permutation(n)


def gaussian_vector(n, rng):
    """n i.i.d. standard normal entries drawn from ``rng``."""
    if int(n) < 1:
        raise InvalidArgumentError(f'gaussian_vector needs n >= 1, but got {n}.')
    return rng.normal(int(n))


@dataclass(frozen=True)
class SpdFactor:
    """Lower-triangular Cholesky factor L with L @ L.T equal to the factored matrix."""
    lower: np.ndarray

    @property
    def dim(self):
        return self.lower.shape[0]

    def matrix(self):
        return self.lower @ self.lower.T


def cholesky(M):
    """Cholesky factor of a symmetric positive-definite matrix.

    Raises:
        InvalidArgumentError: non-square or non-symmetric input.
        FactorizationError: the matrix is not positive definite (pivot <= 1e-12).
    """
    M = as_matrix(M, 'M')
    if M.shape[0] != M.shape[1]:
        raise InvalidArgumentError(f'cholesky needs a square matrix, but got shape {M.shape}.')
    scale = max(1.0, float(np.max(np.abs(M))))
    if not np.allclose(M, M.T, rtol=0, atol=1e-10 * scale):
        raise InvalidArgumentError('cholesky needs a symmetric matrix.')
    try:
        lower = linalg.cholesky(M, lower=True, check_finite=False)
    except linalg.LinAlgError as error:
        raise FactorizationError(f'matrix is not positive definite: {error}') from error
    if np.min(np.diag(lower))**2 <= PIVOT_TOL:
        raise FactorizationError(f'pivot {np.min(np.diag(lower))**2:.3e} is below {PIVOT_TOL}.')
    return SpdFactor(lower=lower)


def solve_spd(factor, b):
    """Solve M x = b given the factor of M; ``b`` may be a vector or a matrix of columns."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != factor.dim:
        raise InvalidArgumentError(f'dimension mismatch: factor is {factor.dim}x{factor.dim}, b has {b.shape[0]} rows.')
    return linalg.cho_solve((factor.lower, True), b, check_finite=False)


def logdet_spd(factor):
    """Natural-log determinant of the factored matrix."""
    return float(2.0 * np.sum(np.log(np.diag(factor.lower))))
