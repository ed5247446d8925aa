import json
import numpy as np
from dataclasses import dataclass

from pcs.errors import InvalidArgumentError
from pcs.numeric import as_matrix, as_vector

__all__ = ['MeasurementProcess', 'MeasurementRecord', 'draw_matrix', 'measure', 'infinity_operator_norm']

MEASUREMENT_KINDS = ('gaussian', 'mask', 'explicit')


@dataclass(frozen=True)
class MeasurementProcess:
    """How the measurement matrix is produced.

    Args:
        kind (str): 'gaussian' (i.i.d. N(0, 1/m) entries), 'mask' (identity rows picked by
            ``mask``) or 'explicit' (the stored ``matrix``).
        m (int): Number of measurements.
        n (int): Ambient dimension.
        sigma (float): Noise level; the noise vector is N(0, sigma^2/m I).
        mask (tuple[int] | None): Observed coordinates for the mask kind.
        matrix (ndarray | None): The matrix for the explicit kind.
    """
    kind: str
    m: int
    n: int
    sigma: float = 0.0
    mask: tuple = None
    matrix: np.ndarray = None

    def __post_init__(self):
        if self.kind not in MEASUREMENT_KINDS:
            raise InvalidArgumentError(f'unknown measurement kind {self.kind!r}; use one of {MEASUREMENT_KINDS}.')
        if self.m < 1 or self.n < 1:
            raise InvalidArgumentError(f'need m >= 1 and n >= 1, but got m={self.m}, n={self.n}.')
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise InvalidArgumentError(f'sigma must be finite and >= 0, but got {self.sigma}.')
        if self.kind == 'mask':
            if self.mask is None or len(self.mask) != self.m:
                raise InvalidArgumentError(f'mask kind needs {self.m} indices, but got {self.mask}.')
            if len(set(self.mask)) != len(self.mask) or min(self.mask) < 0 or max(self.mask) >= self.n:
                raise InvalidArgumentError(f'mask indices must be distinct and in [0, {self.n}), got {self.mask}.')
            object.__setattr__(self, 'mask', tuple(int(i) for i in self.mask))
        if self.kind == 'explicit':
            matrix = as_matrix(self.matrix)
            if matrix.shape != (self.m, self.n):
                raise InvalidArgumentError(f'explicit matrix has shape {matrix.shape}, expected {(self.m, self.n)}.')
            object.__setattr__(self, 'matrix', matrix)

    @classmethod
    def gaussian(cls, m, n, sigma=0.0):
        return cls('gaussian', int(m), int(n), float(sigma))

    @classmethod
    def masked(cls, mask, n, sigma=0.0):
        return cls('mask', len(mask), int(n), float(sigma), mask=tuple(mask))

    @classmethod
    def explicit(cls, matrix, sigma=0.0):
        matrix = as_matrix(matrix)
        return cls('explicit', matrix.shape[0], matrix.shape[1], float(sigma), matrix=matrix)


def draw_matrix(proc, rng):
    """Realize the measurement matrix of ``proc``; only the gaussian kind consumes ``rng``."""
    if proc.kind == 'gaussian':
        return rng.normal((proc.m, proc.n)) / np.sqrt(proc.m)
    if proc.kind == 'mask':
        A = np.zeros((proc.m, proc.n))
        A[np.arange(proc.m), list(proc.mask)] = 1.0
        return A
    return proc.matrix.copy()


@dataclass(frozen=True)
class MeasurementRecord:
    """One realized measurement y = A x + xi."""
    A: np.ndarray
    y: np.ndarray
    sigma: float

    def __post_init__(self):
        A = as_matrix(self.A)
        y = as_vector(self.y, 'y')
        if A.shape[0] != len(y):
            raise InvalidArgumentError(f'y has length {len(y)}, A has {A.shape[0]} rows.')
        if self.sigma < 0:
            raise InvalidArgumentError(f'sigma must be >= 0, but got {self.sigma}.')
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'y', y)
        object.__setattr__(self, 'sigma', float(self.sigma))

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def noise_var(self):
        """Per-coordinate noise variance sigma^2 / m."""
        return self.sigma**2 / self.m

    def to_dict(self):
        return {'m': self.m, 'n': self.n, 'sigma': self.sigma, 'A': self.A.tolist(), 'y': self.y.tolist()}

    @classmethod
    def from_dict(cls, data):
        A = np.asarray(data['A'], dtype=np.float64).reshape(int(data['m']), int(data['n']))
        return cls(A, np.asarray(data['y'], dtype=np.float64), float(data['sigma']))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def measure(A, x, sigma, rng):
    """y = A x + xi with xi ~ N(0, sigma^2/m I); sigma = 0 draws nothing from ``rng``."""
    A = as_matrix(A)
    x = as_vector(x)
    if A.shape[1] != len(x):
        raise InvalidArgumentError(f'A has {A.shape[1]} columns, x has length {len(x)}.')
    if sigma < 0:
        raise InvalidArgumentError(f'sigma must be >= 0, but got {sigma}.')
    y = A @ x
    if sigma > 0:
        y = y + sigma / np.sqrt(A.shape[0]) * rng.normal(A.shape[0])
    return MeasurementRecord(A, y, sigma)


def infinity_operator_norm(A):
    """Largest absolute entry of A."""
    A = as_matrix(A)
    if A.size == 0:
        raise InvalidArgumentError('A is empty.')
    return float(np.max(np.abs(A)))
