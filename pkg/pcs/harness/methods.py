import numpy as np

from pcs.posterior import discrete_posterior, exact_posterior, sir_posterior_sample
from pcs.priors import DiscreteAtomsPrior
from pcs.samplers import (AnnealSchedule, LangevinSampler, MapConfig, map_estimate, select_by_holdout,
                          select_map_by_likelihood)

__all__ = ['METHOD_PRIORS', 'NOISE_FLOOR_KEYS', 'SWEEP_KEYS', 'run_method']

ALL_PRIORS = ('gaussian_mixture', 'ball_mixture', 'linear_generative', 'discrete_atoms')
GRADIENT_PRIORS = ('gaussian_mixture', 'linear_generative')

# prior types each recovery method can run on
METHOD_PRIORS = {
    'exact': ('gaussian_mixture', 'linear_generative', 'discrete_atoms'),
    'langevin': GRADIENT_PRIORS,
    'annealed_map': GRADIENT_PRIORS,
    'langevin_z': ('linear_generative', ),
    'map': GRADIENT_PRIORS,
    'modified_map': GRADIENT_PRIORS,
    'sir': ALL_PRIORS,
}

# sampler section and key holding the noise floor a method falls back on when sigma = 0
NOISE_FLOOR_KEYS = {
    'exact': ('exact', 'noise_floor'),
    'langevin': ('langevin', 'sigma_floor'),
    'annealed_map': ('langevin', 'sigma_floor'),
    'langevin_z': ('langevin', 'sigma_floor'),
    'sir': ('sir', 'sigma_floor'),
}


# sweep settings of the map and modified_map sections; the rest is MapConfig
SWEEP_KEYS = ('step_sizes', 'gammas', 'holdout')
DEFAULT_HOLDOUT = 5


def _schedule(samplers, sigma):
    opt = dict(samplers['langevin'])
    floor = opt.pop('sigma_floor', 0.0) or 0.0
    return AnnealSchedule.from_dict(opt, sigma=max(sigma, floor))


def run_method(method, prior, rec, samplers, rng):
    """Recover a signal from ``rec`` with one method.

    Args:
        method (str): A key of METHOD_PRIORS.
        prior (Prior): The prior the method believes in.
        rec (MeasurementRecord): Measurement.
        samplers (dict): The ``samplers`` options section.
        rng (RngStream): Stream owned by this method run.

    Returns:
        tuple[ndarray, dict]: The estimate and extra metrics for the aux column.
    """
    aux = {}
    if method == 'exact':
        if isinstance(prior, DiscreteAtomsPrior):
            x_hat = discrete_posterior(prior, rec).sample(rng)
        else:
            x_hat = exact_posterior(prior, rec, noise_floor=samplers['exact']['noise_floor']).sample(rng)
    elif method in ('langevin', 'annealed_map'):
        sampler = LangevinSampler(prior, rec, _schedule(samplers, rec.sigma), add_noise=method == 'langevin')
        x_hat = sampler.run(rng)
    elif method == 'langevin_z':
        sampler = LangevinSampler(prior, rec, _schedule(samplers, rec.sigma), space='z')
        x_hat = sampler.run(rng)
        aux['z_sq_per_dim'] = float(np.mean(sampler.last_latent[0]**2))
    elif method in ('map', 'modified_map'):
        result = _run_map(method, prior, rec, samplers[method], rng, aux)
        x_hat = result.x
        aux['objective'] = result.objective
        if result.latent is not None:
            aux['z_sq_per_dim'] = float(np.mean(result.latent**2))
    elif method == 'sir':
        sir = samplers['sir']
        x_hat = sir_posterior_sample(prior, rec, sir['particles'], rng, sigma_t=sir['sigma_floor'])
    else:
        raise KeyError(f'unknown method {method!r}')
    return x_hat, aux


def _run_map(method, prior, rec, section, rng, aux):
    """MAP picks its step size by likelihood (lowest objective); modified-MAP tunes gamma and step
    size by reconstruction error on held-out signals."""
    cfg = MapConfig.from_dict({k: v for k, v in section.items() if k not in SWEEP_KEYS})
    step_sizes = section.get('step_sizes')
    if method == 'modified_map' and (section.get('gammas') or step_sizes):
        cfg, _ = select_by_holdout(prior, rec, cfg, rng.spawn('holdout'), section.get('gammas'), step_sizes,
                                   section.get('holdout', DEFAULT_HOLDOUT))
        if cfg.gamma is not None:
            aux['gamma'] = cfg.gamma
        aux['step_size'] = cfg.step_size
        return map_estimate(prior, rec, cfg, rng, return_result=True)
    if step_sizes:
        result = select_map_by_likelihood(prior, rec, cfg, step_sizes, rng)
        aux['step_size'] = result.step_size
        return result
    return map_estimate(prior, rec, cfg, rng, return_result=True)
