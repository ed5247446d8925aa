import numpy as np
from dataclasses import asdict, dataclass

from pcs.errors import InvalidArgumentError

__all__ = ['AnnealSchedule', 'DEFAULT_START_FACTOR']

# sigma_1 defaults to this multiple of the final noise scale
DEFAULT_START_FACTOR = 4.0


@dataclass(frozen=True)
class AnnealSchedule:
    """Noise ladder for annealed Langevin dynamics and annealed MAP.

    Levels run from ``sigma_start`` down to ``sigma_end`` geometrically; level t uses the step
    alpha_t = base_step * (sigma_t / sigma_end)^2. With a single level the ladder is just
    ``sigma_end`` and the chain is plain Langevin.

    Args:
        sigma_start (float): sigma_1, the first (largest) pretended noise level.
        sigma_end (float): sigma_L, the final level; usually the measurement noise.
        num_levels (int): L. Default: 10.
        steps_per_level (int): Iterations per level. Default: 200.
        base_step (float | None): Step at the last level. None picks step_scale / Lipschitz bound.
        kappa (float): Level t smooths the prior by N(0, s_t^2 I) with
            s_t = kappa sqrt(sigma_t^2 - sigma_end^2), so the last level is unsmoothed. 0 disables
            smoothing. Default: 1.
        step_scale (float): Fraction of the inverse Lipschitz bound used by the automatic step.
    """
    sigma_start: float
    sigma_end: float
    num_levels: int = 10
    steps_per_level: int = 200
    base_step: float = None
    kappa: float = 1.0
    step_scale: float = 0.05

    def __post_init__(self):
        if not self.sigma_end > 0:
            raise InvalidArgumentError(f'sigma_end must be > 0, but got {self.sigma_end}.')
        if self.sigma_start < self.sigma_end:
            raise InvalidArgumentError(f'sigma_start {self.sigma_start} is below sigma_end {self.sigma_end}.')
        if self.num_levels < 1 or self.steps_per_level < 1:
            raise InvalidArgumentError(f'need num_levels >= 1 and steps_per_level >= 1, but got '
                                       f'{self.num_levels} and {self.steps_per_level}.')
        if self.base_step is not None and not self.base_step > 0:
            raise InvalidArgumentError(f'base_step must be > 0, but got {self.base_step}.')
        if self.kappa < 0 or not self.step_scale > 0:
            raise InvalidArgumentError(f'need kappa >= 0 and step_scale > 0, got {self.kappa}, {self.step_scale}.')

    @classmethod
    def for_noise(cls, sigma, **kwargs):
        """Default ladder 4 sigma -> sigma."""
        kwargs.setdefault('sigma_end', sigma)
        kwargs.setdefault('sigma_start', DEFAULT_START_FACTOR * kwargs['sigma_end'])
        return cls(**kwargs)

    @classmethod
    def from_dict(cls, opt, sigma=None):
        """Build from an options dict; missing noise levels fall back to the ``sigma`` defaults."""
        opt = dict(opt or {})
        opt.pop('sigma_floor', None)
        if sigma is not None:
            return cls.for_noise(sigma, **opt)
        return cls(**opt)

    def to_dict(self):
        return asdict(self)

    def sigmas(self):
        if self.num_levels == 1:
            return np.array([float(self.sigma_end)])
        t = np.arange(self.num_levels) / (self.num_levels - 1)
        out = self.sigma_start * (self.sigma_end / self.sigma_start)**t
        out[-1] = self.sigma_end
        return out

    def step_sizes(self, base_step=None):
        base = self.base_step if base_step is None else base_step
        if base is None:
            raise InvalidArgumentError('no base step: set base_step or pass one.')
        return base * (self.sigmas() / self.sigma_end)**2

    def smoothing_scales(self):
        """Prior smoothing s_t per level; exactly 0 at the last level."""
        return self.kappa * np.sqrt(np.maximum(self.sigmas()**2 - self.sigma_end**2, 0.0))
