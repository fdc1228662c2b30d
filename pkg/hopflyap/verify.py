#!/bin/env python3
# This program is free software; you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation; either version 2 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
#
# See LICENSE for more details.
#
# Copyright: hopflyap developers 2024
"""
Acceptance suites

The ``quick`` suite runs the closed-form and quadrature checks plus a few
short simulations, ``full`` adds the desk-scale Monte Carlo checks
(simulated constants, regimes, symmetries, cross-method agreement and the
stability-diagram anchors).
"""

import collections
import itertools
import logging
import math

import numpy
from scipy import stats

from . import analytic, diagram, estimator, model, sde
from .analytic import DensityModel
from .model import Params
from .result import CheckResult, ERROR, FAIL, PASS, SuiteResults

LOG = logging.getLogger(__name__)

SUITES = ("quick", "full")

#: Default master seed of the suites
DEFAULT_SEED = 20240229

#: The (mu, a, sigma) oracle grid of the density checks
DENSITY_GRID = tuple(itertools.product((-2.0, 0.0, 2.0), (0.5, 1.0, 2.0),
                                       (0.5, 1.0, 2.0)))

#: Frozen first-order bias slope of the dt-convergence check
DT_BIAS_SLOPE = 2.0

#: Maximal pairwise z-score of the consistency checks
Z_LIMIT = 4.0

#: gamma0 to eight digits
GAMMA0_REFERENCE = 0.28930826

#: Integrator of the high-shear checks
SHEAR_METHOD = "polar"

Outcome = collections.namedtuple("Outcome", ("passed", "value", "expected",
                                             "details"), defaults=(None,))

Context = collections.namedtuple("Context", ("seed", "threads"))

_CHECKS = collections.OrderedDict()


def check(name, full=False):
    """Register a check function(ctx) -> Outcome under ``group/name``"""
    def decorator(func):
        _CHECKS[name] = (func, full)
        return func
    return decorator


def check_names(suite):
    """Names of the checks of a suite in execution order"""
    return [name for name, (_, full) in _CHECKS.items()
            if suite == "full" or not full]


def _stream(ctx, name):
    """Per-check seed depending on the master seed and the check position"""
    return sde.derive_seed(ctx.seed, list(_CHECKS).index(name))


def _cfg(seed, horizon, dt=1e-3):
    return sde.SimConfig.desk(dt=dt, n_steps=int(round(horizon / dt)),
                              seed=seed)


def _rng(seed):
    return numpy.random.default_rng(seed)


def _random_params(rng, count):
    """Random moderate parameter sets"""
    return [Params(float(rng.uniform(-1, 2)), float(rng.uniform(0, 5)),
                   float(rng.uniform(0.5, 2)), float(rng.uniform(0, 3)),
                   float(rng.uniform(0.3, 1.5))) for _ in range(count)]


def _within(value, expected, tolerance):
    return abs(value - expected) <= tolerance


# Closed form and quadrature


@check("constants/gamma0")
def _gamma0(ctx):
    value = analytic.gamma0()
    return Outcome(_within(value, GAMMA0_REFERENCE, 1e-5), value,
                   GAMMA0_REFERENCE)


@check("constants/c_star")
def _c_star(ctx):
    value = analytic.c_star()
    return Outcome(3.52 <= value <= 3.56, value, "[3.52, 3.56]")


@check("psi/sign_pattern")
def _psi_signs(ctx):
    values = [analytic.psi_big(1.0), analytic.psi_big(analytic.c_star()),
              analytic.psi_big(10.0)]
    passed = values[0] < 0 and abs(values[1]) <= 1e-6 and values[2] > 0
    return Outcome(passed, values, "[<0, |.|<=1e-6, >0]")


@check("density/normalization")
def _normalization(ctx):
    worst = max(abs(analytic.moment(DensityModel(*point), 0) - 1)
                for point in DENSITY_GRID)
    return Outcome(worst <= 1e-10, worst, "<= 1e-10")


@check("density/second_moment")
def _second_moment(ctx):
    worst = 0.0
    for point in DENSITY_GRID:
        density = DensityModel(*point)
        closed = analytic.moment_r2_closed(density)
        worst = max(worst, abs(analytic.moment(density, 2) - closed) / closed)
    return Outcome(worst <= 1e-8, worst, "<= 1e-8 relative")


@check("density/gaussian_domination")
def _domination(ctx):
    margins = [analytic.gaussian_domination_bound(density) -
               analytic.moment_centered(density)
               for density in (DensityModel(*point)
                               for point in DENSITY_GRID if point[0] > 0)]
    return Outcome(min(margins) >= 0, min(margins), ">= 0")


@check("model/scaling_identity")
def _scaling_identity(ctx):
    worst = 0.0
    rng = _rng(_stream(ctx, "model/scaling_identity"))
    for params in _random_params(rng, 5):
        time_scale, space_scale = rng.uniform(0.2, 5, 2)
        scaled, factor = model.rescale(params, time_scale, space_scale)
        first = model.canonicalize(params)
        second = model.canonicalize(scaled)
        worst = max(worst, abs(first.mu_hat - second.mu_hat),
                    abs(first.b_hat - second.b_hat),
                    abs(first.multiplier - factor * second.multiplier) /
                    first.multiplier)
    return Outcome(worst <= 1e-12, worst, "<= 1e-12")


@check("model/q_bounds")
def _q_bounds(ctx):
    psi = numpy.linspace(0, math.pi, 20001)
    worst = 0.0
    for params in _random_params(_rng(_stream(ctx, "model/q_bounds")), 5):
        for radius in (0.5, 1.0, 2.0):
            values = model.q_integrand(radius, psi, params)
            worst = max(worst,
                        abs(values.max() -
                            model.q_upper_bound(radius, params)),
                        abs(values.min() -
                            model.q_lower_bound(radius, params)))
    return Outcome(worst <= 1e-6, worst, "<= 1e-6")


# Short simulations


@check("simulation/gamma0_short")
def _gamma0_short(ctx):
    drift, noise = analytic.ya_matrices()
    est = estimator.estimate_linear2d(
        drift, noise, _cfg(_stream(ctx, "simulation/gamma0_short"), 500), 8,
        ctx.threads)
    tolerance = max(0.03, 4 * est.stderr)
    return Outcome(_within(est.mean, analytic.gamma0(), tolerance), est.mean,
                   analytic.gamma0(), "stderr=%.3g" % est.stderr)


@check("simulation/certificate_region")
def _certificate_region(ctx):
    params = Params(0.0, 0.0, 1.0, 0.0, 1.0)
    est = estimator.estimate_lyapunov(
        params, _cfg(_stream(ctx, "simulation/certificate_region"), 200),
        "cartesian", 8, ctx.threads)
    return Outcome(est.mean + 3 * est.stderr < 0, est.mean, "< 0",
                   "stderr=%.3g" % est.stderr)


@check("simulation/determinism")
def _determinism(ctx):
    params = Params(1.0, 0.0, 1.0, 1.0, 0.5)
    cfg = _cfg(_stream(ctx, "simulation/determinism"), 50)
    first = estimator.estimate_lyapunov(params, cfg, "polar", 4, ctx.threads)
    second = estimator.estimate_lyapunov(params, cfg, "polar", 4, 1)
    return Outcome(first == second, first.mean, second.mean)


@check("simulation/renormalization_neutrality")
def _renormalization(ctx):
    params = Params(1.0, 0.0, 1.0, 2.0, 0.5)
    cfg = _cfg(_stream(ctx, "simulation/renormalization_neutrality"), 100)
    first = sde.simulate_cartesian_ftle(params, cfg).value
    second = sde.simulate_cartesian_ftle(
        params, cfg._replace(renorm_interval=cfg.renorm_interval // 2)).value
    diff = abs(first - second) / max(abs(first), 1e-300)
    return Outcome(diff < 1e-10, diff, "< 1e-10 relative")


# Desk-scale simulations


@check("constants/gamma0_simulation", full=True)
def _gamma0_simulation(ctx):
    drift, noise = analytic.ya_matrices()
    est = estimator.estimate_linear2d(
        drift, noise, _cfg(_stream(ctx, "constants/gamma0_simulation"), 5000),
        8, ctx.threads)
    expected = analytic.gamma0()
    return Outcome(_within(est.mean, expected, max(0.01, 3 * est.stderr)),
                   est.mean, expected, "stderr=%.3g" % est.stderr)


@check("psi/simulation", full=True)
def _psi_simulation(ctx):
    drift, noise = analytic.yb_matrices(2.0)
    est = estimator.estimate_linear2d(
        drift, noise, _cfg(_stream(ctx, "psi/simulation"), 2000), 16,
        ctx.threads)
    expected = analytic.psi_big(2.0)
    return Outcome(_within(est.mean, expected, max(0.02, 3 * est.stderr)),
                   est.mean, expected, "stderr=%.3g" % est.stderr)


def _regime(ctx, name, params, expected, tolerance, method="cartesian",
            horizon=2000, batches=16):
    est = estimator.estimate_lyapunov(params, _cfg(_stream(ctx, name),
                                                   horizon),
                                      method, batches, ctx.threads)
    limit = max(tolerance, 3 * est.stderr)
    return Outcome(_within(est.mean, expected, limit), est.mean, expected,
                   "stderr=%.3g" % est.stderr)


@check("regime/small_sigma_b0", full=True)
def _small_sigma_b0(ctx):
    params = Params(1.0, 0.0, 1.0, 0.0, 0.2)
    return _regime(ctx, "regime/small_sigma_b0", params,
                   analytic.predict_small_sigma(params), 0.012)


@check("regime/small_sigma_b1", full=True)
def _small_sigma_b1(ctx):
    params = Params(1.0, 0.0, 1.0, 1.0, 0.2)
    return _regime(ctx, "regime/small_sigma_b1", params,
                   analytic.predict_small_sigma(params), 0.012)


@check("regime/stable_focus", full=True)
def _stable_focus(ctx):
    params = Params(-1.0, 0.0, 1.0, 0.0, 0.1)
    return _regime(ctx, "regime/stable_focus", params,
                   analytic.predict_stable_focus(params), 0.05)


@check("regime/frozen_radius", full=True)
def _frozen_radius(ctx):
    params = Params(1.0, 0.0, 1.0, 1.0, 0.1)
    drift, noise = analytic.frozen_radius_system(params)
    est = estimator.estimate_linear2d(
        drift, noise, _cfg(_stream(ctx, "regime/frozen_radius"), 2000), 16,
        ctx.threads)
    expected = analytic.predict_small_sigma(params)
    return Outcome(_within(est.mean, expected, max(0.005, 3 * est.stderr)),
                   est.mean, expected, "stderr=%.3g" % est.stderr)


@check("regime/large_b", full=True)
def _large_b(ctx):
    params = Params(0.0, 0.0, 1.0, 2000.0, 1.0)
    est = estimator.estimate_lyapunov(
        params, _cfg(_stream(ctx, "regime/large_b"), 20), SHEAR_METHOD, 8,
        ctx.threads)
    coefficient = analytic.gamma0() * analytic.moment(
        DensityModel.from_params(params), 2 / 3)
    value = est.mean / (2 * params.b * params.sigma) ** (2 / 3)
    return Outcome(_within(value, coefficient, 0.15 * coefficient), value,
                   coefficient, "lambda=%.6g stderr=%.3g"
                   % (est.mean, est.stderr))


@check("regime/ce", full=True)
def _ce(ctx):
    params = Params(1.0, 0.0, 1.0, 40.0, 0.05)
    expected = analytic.predict_ce(params)
    return _regime(ctx, "regime/ce", params, expected, 0.1 * abs(expected),
                   SHEAR_METHOD)


@check("regime/ce_positive", full=True)
def _ce_positive(ctx):
    params = Params(1.0, 0.0, 1.0, 80.0, 0.05)
    est = estimator.estimate_lyapunov(
        params, _cfg(_stream(ctx, "regime/ce_positive"), 2000),
        SHEAR_METHOD, 16, ctx.threads)
    return Outcome(est.mean > 0, est.mean, "> 0",
                   "stderr=%.3g" % est.stderr)


@check("bounds/certificates", full=True)
def _certificates(ctx):
    rng = _rng(_stream(ctx, "bounds/certificates"))
    cfg = _cfg(_stream(ctx, "bounds/certificates"), 200)
    negative = 0
    contradictions = []
    for index in range(20):
        mu, a, sigma = rng.uniform(-2, 2), rng.uniform(0.5, 2), \
            rng.uniform(0.5, 2)
        limit = a * analytic.jhat(mu / math.sqrt(2 * a * sigma ** 2))
        params = Params(float(mu), 0.0, float(a),
                        float(rng.uniform(0, limit)), float(sigma))
        est = estimator.estimate_lyapunov(
            params, cfg._replace(seed=sde.derive_seed(cfg.seed, index)),
            "cartesian", 8, ctx.threads)
        if est.mean < 0:
            negative += 1
        if est.mean + 4 * est.stderr >= 0.05:
            contradictions.append(params)
    return Outcome(negative >= 19 and not contradictions, negative,
                   ">= 19 of 20 negative, none contradicted",
                   "contradicted: %s" % contradictions if contradictions
                   else None)


@check("bounds/upper_bound", full=True)
def _upper_bound(ctx):
    cfg = _cfg(_stream(ctx, "bounds/upper_bound"), 500)
    worst = -math.inf
    for index, params in enumerate(_random_params(
            _rng(_stream(ctx, "bounds/upper_bound")), 5)):
        est = estimator.estimate_lyapunov(
            params, cfg._replace(seed=sde.derive_seed(cfg.seed, index)),
            "cartesian", 8, ctx.threads)
        worst = max(worst, est.mean - 3 * est.stderr -
                    analytic.lambda_upper_bound(params))
    return Outcome(worst < 0, worst, "< 0")


def _consistency(ctx, name, func):
    cfg = _cfg(_stream(ctx, name), 250)
    worst = 0.0
    for index, params in enumerate(_random_params(_rng(_stream(ctx, name)),
                                                  5)):
        worst = max(worst, func(params, cfg._replace(
            seed=sde.derive_seed(cfg.seed, index))))
    return Outcome(worst <= Z_LIMIT, worst, "<= %s" % Z_LIMIT)


@check("symmetry/omega", full=True)
def _omega(ctx):
    return _consistency(ctx, "symmetry/omega", lambda params, cfg: (
        estimator.omega_invariance_check(params, cfg, (0.0, 5.0), 16,
                                         threads=ctx.threads)["max_z"]))


@check("symmetry/reflection", full=True)
def _reflection(ctx):
    return _consistency(ctx, "symmetry/reflection", lambda params, cfg: (
        estimator.reflection_check(params, cfg, 16,
                                   threads=ctx.threads)["z"]))


@check("symmetry/scaling", full=True)
def _scaling(ctx):
    return _consistency(ctx, "symmetry/scaling", lambda params, cfg: (
        estimator.scaling_check(params, cfg, 16, threads=ctx.threads)["z"]))


@check("methods/cross_validation", full=True)
def _cross_validation(ctx):
    return _consistency(ctx, "methods/cross_validation", lambda params, cfg: (
        estimator.cross_validate(params, cfg, 16, ctx.threads)["max_z"]))


@check("methods/dt_convergence", full=True)
def _dt_convergence(ctx):
    params = Params(1.0, 0.0, 1.0, 0.0, 0.5)
    seed = _stream(ctx, "methods/dt_convergence")
    coarse = estimator.estimate_lyapunov(
        params, _cfg(sde.derive_seed(seed, 0), 1000, 2e-3), "cartesian", 10,
        ctx.threads)
    fine = estimator.estimate_lyapunov(
        params, _cfg(sde.derive_seed(seed, 1), 1000, 1e-3), "cartesian", 10,
        ctx.threads)
    diff = abs(coarse.mean - fine.mean)
    limit = 3 * math.hypot(coarse.stderr, fine.stderr) + DT_BIAS_SLOPE * 2e-3
    return Outcome(diff <= limit, diff, "<= %.3g" % limit)


@check("density/radius_ks", full=True)
def _radius_ks(ctx):
    params = Params(1.0, 0.0, 1.0, 0.0, 1.0)
    radii = sde.sample_radius(params, _cfg(_stream(ctx, "density/radius_ks"),
                                           4000), thin=2000)
    density = DensityModel.from_params(params)
    result = stats.kstest(radii, lambda r: analytic.cdf(density, r))
    return Outcome(result.pvalue > 1e-3, float(result.statistic),
                   "p-value > 0.001", "p-value=%.3g" % result.pvalue)


_ZERO_ANCHORS = ((0.0, 6.0, 12.0, 8.5, 9.7), (2.0, 4.0, 9.0, 5.7, 7.1),
                 (4.0, 9.0, 16.0, 10.8, 13.2))


@check("diagram/zero_anchors", full=True)
def _zero_anchors(ctx):
    cfg = _cfg(_stream(ctx, "diagram/zero_anchors"), 2000)
    roots = []
    passed = True
    for mu, b_lo, b_hi, low, high in _ZERO_ANCHORS:
        root = diagram.find_zero_b(mu, b_lo, b_hi, cfg, 16, 0.5,
                                   threads=ctx.threads)
        roots.append(root)
        passed = passed and low <= root <= high
    return Outcome(passed, roots, [[low, high]
                                   for _, _, _, low, high in _ZERO_ANCHORS])


def run_suite(name="quick", seed=DEFAULT_SEED, threads=None):
    """
    Run all checks of a suite

    A check raising an exception is recorded as ERROR and the suite goes on.

    :param name: one of SUITES
    :param seed: master seed
    :param threads: worker threads
    :return: SuiteResults
    """
    if name not in SUITES:
        raise ValueError("Unknown suite %r, use one of %s"
                         % (name, ", ".join(SUITES)))
    ctx = Context(int(seed), threads)
    results = SuiteResults(name, ctx.seed)
    for check_name in check_names(name):
        func = _CHECKS[check_name][0]
        LOG.info("Running %s", check_name)
        try:
            outcome = func(ctx)
        except Exception as details:    # pylint: disable=W0703
            LOG.debug("Check %s failed", check_name, exc_info=True)
            results.add(CheckResult(ERROR, check_name,
                                    details="%s: %s"
                                    % (type(details).__name__, details)))
            continue
        results.add(CheckResult(PASS if outcome.passed else FAIL, check_name,
                                _plain(outcome.value),
                                _plain(outcome.expected), outcome.details))
    return results


def _plain(value):
    """numpy scalars and tuples into plain JSON types"""
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, (numpy.floating, float)):
        return float(value)
    if isinstance(value, (numpy.integer, int)) and \
            not isinstance(value, bool):
        return int(value)
    if isinstance(value, numpy.bool_):
        return bool(value)
    return value
