import numpy as np
import torch

from pcs.errors import DivergenceError, InvalidArgumentError
from pcs.priors import GaussianMixturePrior, LinearGenerativePrior
from pcs.utils import get_root_logger

__all__ = ['LangevinSampler', 'langevin_x', 'langevin_z', 'annealed_map']

# a chain whose norm exceeds this multiple of the prior support radius has diverged
DIVERGENCE_FACTOR = 1e3


class LangevinSampler():
    """Annealed Langevin dynamics on the posterior of a linear measurement.

    Level t targets the posterior with pretended noise sigma_t and, in x-space, the prior smoothed
    by N(0, s_t^2 I) with s_t from :meth:`AnnealSchedule.smoothing_scales`. The last level is unsmoothed,
    so with sigma_L equal to the measurement noise the chain ends on p(x | y):

        v <- v + (alpha_t / 2) grad log p_t(v | y) + sqrt(alpha_t) zeta,  zeta ~ N(0, I).

    In z-space the chain runs on the latent of a linear generative prior, whose prior term is the
    standard normal, and the output is G(z). Gradients come from torch autograd in float64.

    Args:
        prior (GaussianMixturePrior | LinearGenerativePrior): Signal prior.
        rec (MeasurementRecord): Measurement.
        sched (AnnealSchedule): Noise ladder.
        space (str): 'x' or 'z'. Default: 'x'.
        add_noise (bool): False drops the zeta term, which gives annealed MAP. Default: True.
    """

    def __init__(self, prior, rec, sched, space='x', add_noise=True):
        if space not in ('x', 'z'):
            raise InvalidArgumentError(f"space must be 'x' or 'z', but got {space!r}.")
        if space == 'z' and not isinstance(prior, LinearGenerativePrior):
            raise InvalidArgumentError(f'z-space Langevin needs a linear_generative prior, got {prior.tag}.')
        if rec.n != prior.dim:
            raise InvalidArgumentError(f'A has {rec.n} columns, prior has dimension {prior.dim}.')
        self.generator = prior if space == 'z' else None
        if space == 'x' and isinstance(prior, LinearGenerativePrior):
            prior = prior.as_gaussian_mixture()
        if space == 'x' and not isinstance(prior, GaussianMixturePrior):
            raise InvalidArgumentError(f'x-space Langevin needs a Gaussian mixture prior, got {prior.tag}.')
        self.prior = prior
        self.rec = rec
        self.sched = sched
        self.space = space
        self.add_noise = add_noise
        self.limit = DIVERGENCE_FACTOR * max(prior.support_radius(), 1.0)
        if sched.sigma_end < rec.sigma:
            get_root_logger().warning(f'Langevin final level {sched.sigma_end} is below the measurement noise '
                                      f'{rec.sigma}; the chain targets a sharper posterior than the true one.')

        self._A = torch.from_numpy(rec.A)
        self._y = torch.from_numpy(rec.y)
        if space == 'z':
            self._gen = torch.from_numpy(self.generator.matrix)
            self._offset = torch.from_numpy(self.generator.offset)
        self.last_latent = None

    @property
    def var_dim(self):
        return self.generator.seed_dim if self.space == 'z' else self.prior.dim

    def lipschitz(self):
        """Upper bound on the curvature of -log p(v | y) at the final level."""
        data = self.rec.m / self.sched.sigma_end**2
        if self.space == 'z':
            return data * np.linalg.norm(self.rec.A @ self.generator.matrix, 2)**2 + 1.0
        return data * np.linalg.norm(self.rec.A, 2)**2 + self.prior.max_precision(0.0)

    def base_step(self):
        if self.sched.base_step is not None:
            return self.sched.base_step
        return self.sched.step_scale / self.lipschitz()

    def to_signal(self, v):
        if self.space == 'z':
            return v @ self._gen.T + self._offset
        return v

    def log_target(self, v, sigma_t, s_t=0.0):
        """Per-chain log p_t(v | y) up to a constant; ``s_t`` smooths the x-space prior."""
        resid = self._y - self.to_signal(v) @ self._A.T
        log_lik = -self.rec.m / (2.0 * sigma_t**2) * torch.sum(resid**2, dim=-1)
        if self.space == 'z':
            return log_lik - 0.5 * torch.sum(v**2, dim=-1)
        return log_lik + self.prior.torch_log_prob(v, s_t)

    def grad_log_target(self, v, sigma_t, s_t=0.0):
        v = v.detach().requires_grad_(True)
        total = self.log_target(v, sigma_t, s_t).sum()
        return torch.autograd.grad(total, v)[0]

    def _check(self, v, level):
        x = self.to_signal(v)
        norms = torch.linalg.norm(x, dim=-1)
        if not torch.all(torch.isfinite(norms)) or torch.any(norms > self.limit):
            raise DivergenceError(f'Langevin chain left the ball of radius {self.limit:.3g} at level {level}.')

    def run(self, rng, num_chains=None):
        """Run independent chains from v_0 ~ N(0, I); returns one signal or an array of ``num_chains``."""
        chains = 1 if num_chains is None else int(num_chains)
        v = torch.from_numpy(rng.normal((chains, self.var_dim)))
        sigmas = self.sched.sigmas()
        alphas = self.sched.step_sizes(self.base_step())
        smoothing = self.sched.smoothing_scales()
        with torch.no_grad():
            for level, (sigma_t, alpha_t, s_t) in enumerate(zip(sigmas, alphas, smoothing)):
                for _ in range(self.sched.steps_per_level):
                    with torch.enable_grad():
                        grad = self.grad_log_target(v, float(sigma_t), float(s_t))
                    v = v + 0.5 * alpha_t * grad
                    if self.add_noise:
                        v = v + np.sqrt(alpha_t) * torch.from_numpy(rng.normal((chains, self.var_dim)))
                self._check(v, level)
            x = self.to_signal(v).numpy().copy()
        self.last_latent = v.numpy().copy() if self.space == 'z' else None
        return x[0] if num_chains is None else x


def langevin_x(prior, rec, sched, rng, num_chains=None):
    return LangevinSampler(prior, rec, sched, space='x').run(rng, num_chains)


def langevin_z(gen, rec, sched, rng, num_chains=None, return_latent=False):
    """z-space annealed Langevin for a linear generative prior; returns G(z_final)."""
    sampler = LangevinSampler(gen, rec, sched, space='z')
    x = sampler.run(rng, num_chains)
    if return_latent:
        z = sampler.last_latent
        return x, (z[0] if num_chains is None else z)
    return x


def annealed_map(prior, rec, sched, rng, space='x'):
    """Noise-free annealed gradient ascent along the same ladder."""
    return LangevinSampler(prior, rec, sched, space=space, add_noise=False).run(rng)
