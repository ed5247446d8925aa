import numpy as np
import torch
from dataclasses import asdict, dataclass, field, replace

from pcs.errors import DivergenceError, InvalidArgumentError
from pcs.measurement import measure
from pcs.priors import GaussianMixturePrior, LinearGenerativePrior

__all__ = ['MapConfig', 'MapResult', 'MapSampler', 'map_estimate', 'select_map_by_likelihood', 'select_by_holdout']

MAP_OPTIMIZERS = ('gd', 'adam')


@dataclass(frozen=True)
class MapConfig:
    """Settings of the MAP and modified-MAP baselines.

    Args:
        gamma (float | None): Prior weight of the modified objective ||y - A G(z)||^2 - gamma log q(z).
            None uses m ||y - A G(z)||^2 / (2 sigma^2) - log q(z), the plain MAP objective.
        step_size (float): Initial gradient step (or the Adam learning rate). Default: 0.1.
        iterations (int): Iterations per restart. Default: 500.
        restarts (int): Independent starts from N(0, I); the lowest objective wins. Default: 2.
        halving (bool): Halve the step whenever it would increase the objective. Default: True.
        max_halvings (int): Halvings allowed per iteration. Default: 30.
        optimizer (str): 'gd' or 'adam'. Default: 'gd'.
    """
    gamma: float = None
    step_size: float = 0.1
    iterations: int = 500
    restarts: int = 2
    halving: bool = True
    max_halvings: int = 30
    optimizer: str = 'gd'

    def __post_init__(self):
        if self.gamma is not None and self.gamma < 0:
            raise InvalidArgumentError(f'gamma must be >= 0, but got {self.gamma}.')
        if self.iterations < 1 or self.restarts < 1:
            raise InvalidArgumentError(f'need iterations >= 1 and restarts >= 1, got {self.iterations}, '
                                       f'{self.restarts}.')
        if not self.step_size > 0:
            raise InvalidArgumentError(f'step_size must be > 0, but got {self.step_size}.')
        if self.optimizer not in MAP_OPTIMIZERS:
            raise InvalidArgumentError(f'unknown optimizer {self.optimizer!r}; use one of {MAP_OPTIMIZERS}.')

    @classmethod
    def from_dict(cls, opt):
        return cls(**(opt or {}))

    def to_dict(self):
        return asdict(self)


@dataclass
class MapResult:
    x: np.ndarray
    objective: float
    latent: np.ndarray = None
    trace: np.ndarray = field(default=None, repr=False)
    step_size: float = None


class MapSampler():
    """Gradient-based minimisation of the (modified) MAP objective.

    Gaussian mixture priors are optimised in x-space, linear generative priors in z-space. The
    objective is data_weight ||y - A x||^2 - prior_weight log q, where (data_weight, prior_weight)
    is (m / 2 sigma^2, 1) for plain MAP, (1, gamma) for the modified objective and (1, 0) when
    sigma = 0 and gamma is unset.
    """

    def __init__(self, prior, rec, cfg):
        if rec.n != prior.dim:
            raise InvalidArgumentError(f'A has {rec.n} columns, prior has dimension {prior.dim}.')
        if isinstance(prior, LinearGenerativePrior):
            self.space = 'z'
            self._gen = torch.from_numpy(prior.matrix)
            self._offset = torch.from_numpy(prior.offset)
            self.var_dim = prior.seed_dim
        elif isinstance(prior, GaussianMixturePrior):
            self.space = 'x'
            self.var_dim = prior.dim
        else:
            raise InvalidArgumentError(f'MAP needs a Gaussian mixture or linear generative prior, got {prior.tag}.')
        self.prior = prior
        self.rec = rec
        self.cfg = cfg
        if cfg.gamma is not None:
            self.data_weight, self.prior_weight = 1.0, float(cfg.gamma)
        elif rec.sigma > 0:
            self.data_weight, self.prior_weight = rec.m / (2.0 * rec.sigma**2), 1.0
        else:
            self.data_weight, self.prior_weight = 1.0, 0.0
        self._A = torch.from_numpy(rec.A)
        self._y = torch.from_numpy(rec.y)

    def to_signal(self, v):
        if self.space == 'z':
            return v @ self._gen.T + self._offset
        return v

    def objective(self, v):
        """Per-row objective values for a batch of points."""
        resid = self._y - self.to_signal(v) @ self._A.T
        value = self.data_weight * torch.sum(resid**2, dim=-1)
        if self.prior_weight == 0:
            return value
        if self.space == 'z':
            return value + self.prior_weight * 0.5 * torch.sum(v**2, dim=-1)
        return value - self.prior_weight * self.prior.torch_log_prob(v, 0.0)

    def _value_and_grad(self, v):
        v = v.detach().requires_grad_(True)
        value = self.objective(v)
        grad = torch.autograd.grad(value.sum(), v)[0]
        return value.detach(), grad

    def _descend(self, v):
        cfg = self.cfg
        value, grad = self._value_and_grad(v)
        if not torch.all(torch.isfinite(value)):
            raise DivergenceError('MAP objective is not finite at the starting point.')
        steps = torch.full((v.shape[0], ), cfg.step_size, dtype=v.dtype)
        trace = [value.numpy().copy()]
        for _ in range(cfg.iterations):
            cand = v - steps[:, None] * grad
            with torch.no_grad():
                cand_value = self.objective(cand)
            if cfg.halving:
                for _ in range(cfg.max_halvings):
                    worse = ~(cand_value <= value)
                    if not torch.any(worse):
                        break
                    steps = torch.where(worse, 0.5 * steps, steps)
                    cand = v - steps[:, None] * grad
                    with torch.no_grad():
                        cand_value = self.objective(cand)
                accept = cand_value <= value
                v = torch.where(accept[:, None], cand, v)
            else:
                if not torch.all(torch.isfinite(cand_value)):
                    raise DivergenceError(f'MAP objective became non-finite with step {cfg.step_size}.')
                v = cand
            value, grad = self._value_and_grad(v)
            trace.append(value.numpy().copy())
        return v.detach(), value, np.stack(trace)

    def _adam(self, v):
        cfg = self.cfg
        v = v.clone().requires_grad_(True)
        optimizer = torch.optim.Adam([v], lr=cfg.step_size)
        best_v, best_value = v.detach().clone(), None
        trace = []
        for _ in range(cfg.iterations + 1):
            optimizer.zero_grad()
            value = self.objective(v)
            if not torch.all(torch.isfinite(value)):
                raise DivergenceError(f'MAP objective became non-finite with learning rate {cfg.step_size}.')
            trace.append(value.detach().numpy().copy())
            if best_value is None:
                best_value = value.detach().clone()
            better = value.detach() < best_value
            best_v = torch.where(better[:, None], v.detach(), best_v)
            best_value = torch.where(better, value.detach(), best_value)
            value.sum().backward()
            optimizer.step()
        return best_v, best_value, np.stack(trace)

    def run(self, rng):
        v0 = torch.from_numpy(rng.normal((self.cfg.restarts, self.var_dim)))
        if self.cfg.optimizer == 'adam':
            v, value, trace = self._adam(v0)
        else:
            v, value, trace = self._descend(v0)
        best = int(torch.argmin(value))
        with torch.no_grad():
            x = self.to_signal(v[best:best + 1])[0].numpy().copy()
        latent = v[best].numpy().copy() if self.space == 'z' else None
        return MapResult(
            x=x, objective=float(value[best]), latent=latent, trace=trace[:, best], step_size=self.cfg.step_size)


def map_estimate(prior, rec, cfg, rng, return_result=False):
    """MAP (or modified-MAP with ``cfg.gamma``) point estimate; best of ``cfg.restarts`` starts."""
    result = MapSampler(prior, rec, cfg).run(rng)
    return result if return_result else result.x


def select_map_by_likelihood(prior, rec, cfg, step_sizes, rng):
    """Run MAP once per step size and keep the result with the lowest objective.

    Every step size starts from the same points, so only the step differs between runs.
    """
    if len(step_sizes) == 0:
        raise InvalidArgumentError('step_sizes is empty.')
    results = []
    for step in step_sizes:
        run_cfg = MapConfig(**{**cfg.to_dict(), 'step_size': float(step)})
        results.append(MapSampler(prior, rec, run_cfg).run(rng.clone()))
    return min(results, key=lambda r: r.objective)


def select_by_holdout(prior, rec, cfg, rng, gammas=None, step_sizes=None, holdout=5):
    """Tune (gamma, step size) on held-out signals by reconstruction error.

    ``holdout`` signals are drawn from ``prior`` and measured through ``rec.A`` at noise ``rec.sigma``;
    every candidate runs on the same held-out measurements and starts, and the one with the lowest mean
    ||x - x_hat|| wins (ties go to the earlier candidate).

    Returns:
        tuple[MapConfig, float]: The winning config and its mean held-out error.
    """
    gammas = [cfg.gamma] if gammas is None else list(gammas)
    step_sizes = [cfg.step_size] if step_sizes is None else list(step_sizes)
    if len(gammas) == 0 or len(step_sizes) == 0:
        raise InvalidArgumentError('gammas and step_sizes must not be empty.')
    if holdout < 1:
        raise InvalidArgumentError(f'holdout must be >= 1, but got {holdout}.')
    scenes = []
    for i in range(int(holdout)):
        x = prior.sample(rng.spawn('signal', i))
        scenes.append((x, measure(rec.A, x, rec.sigma, rng.spawn('noise', i)), rng.spawn('start', i)))

    best_cfg, best_error = None, None
    for gamma in gammas:
        for step in step_sizes:
            cand = replace(cfg, gamma=None if gamma is None else float(gamma), step_size=float(step))
            errors = [
                np.linalg.norm(x - MapSampler(prior, held, cand).run(start.clone()).x) for x, held, start in scenes
            ]
            error = float(np.mean(errors))
            if best_error is None or error < best_error:
                best_cfg, best_error = cand, error
    return best_cfg, best_error
