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
Batch-means Lyapunov estimates and their consistency reports
"""

import collections
import itertools
import logging
import math

import numpy

from . import sde, utils
from .exceptions import DomainError, NumericalBlowup
from .model import canonicalize, validate

LOG = logging.getLogger(__name__)

#: Integrators of the noisy Hopf normal form by method name
SIMULATORS = collections.OrderedDict((
    ("cartesian", sde.simulate_cartesian_ftle),
    ("polar", sde.simulate_polar_ftle),
    ("frame", sde.simulate_frame_ftle)))

METHODS = tuple(SIMULATORS)

# Stream keys of the secondary estimates of the consistency reports, kept
# away from the batch indexes
_MIRROR_STREAM = 1 << 32
_CANONICAL_STREAM = (1 << 32) + 1
_OMEGA_STREAM = (1 << 32) + 2


class FtleEstimate(collections.namedtuple("FtleEstimate",
                                          ("mean", "stderr", "n_batches",
                                           "method", "total_steps",
                                           "reflections_flagged", "dt",
                                           "horizon", "seed"))):

    """
    Batch-means estimate of the top Lyapunov exponent

    ``stderr`` is the sample standard deviation of the batch values divided
    by sqrt(n_batches).
    """

    __slots__ = ()

    def as_dict(self, prefix=""):
        """Flat dict representation (optionally with prefixed keys)"""
        return {prefix + key: value
                for key, value in zip(self._fields, self)}


def _combine(samples, method, seed):
    """Fold batch samples in index order"""
    values = numpy.array([sample.value for sample in samples])
    return FtleEstimate(float(values.mean()),
                        float(values.std(ddof=1) / math.sqrt(values.size)),
                        values.size, method,
                        sum(sample.steps for sample in samples),
                        any(sample.biased for sample in samples),
                        samples[0].dt, samples[0].horizon, seed)


def _run_batches(simulate, cfg, n_batches, threads):
    if int(n_batches) != n_batches or n_batches < 2:
        raise DomainError("at least 2 batches are required, got %s"
                          % n_batches, "batches")
    sde.validate_config(cfg)

    def batch(index):
        batch_cfg = cfg._replace(seed=sde.derive_seed(cfg.seed, index))
        try:
            sample = simulate(batch_cfg)
        except NumericalBlowup as exc:
            exc.batch = index
            exc.args = ("Batch %s: %s" % (index, exc),)
            raise
        LOG.debug("Batch %s finished: %s", index, sample.value)
        return sample

    return utils.parallel_map(batch, range(int(n_batches)), threads)


def estimate_lyapunov(params, cfg, method="cartesian", n_batches=16,
                      threads=None):
    """
    Estimate the top Lyapunov exponent from independent trajectories

    Batch i uses the seed derive_seed(cfg.seed, i); the batches are combined
    in index order so the result does not depend on scheduling.

    :param params: model Params
    :param cfg: SimConfig (the per-batch settings)
    :param method: one of METHODS
    :param n_batches: number of batches (>= 2)
    :param threads: worker threads (None => default concurrency)
    :return: FtleEstimate
    :raise NumericalBlowup: with the ``batch`` index of the failing batch
    """
    validate(params)
    try:
        simulate = SIMULATORS[method]
    except KeyError:
        raise DomainError("unknown method %r, use one of %s"
                          % (method, ", ".join(METHODS)), "method") from None
    samples = _run_batches(lambda batch_cfg: simulate(params, batch_cfg),
                           cfg, n_batches, threads)
    return _combine(samples, method, cfg.seed)


def estimate_linear2d(drift, noise, cfg, n_batches=16, threads=None):
    """
    Batch-means exponent of dY = drift Y dt + noise Y dW

    :return: FtleEstimate with method ``linear2d``
    """
    samples = _run_batches(
        lambda batch_cfg: sde.simulate_linear2d_ftle(drift, noise, batch_cfg),
        cfg, n_batches, threads)
    return _combine(samples, "linear2d", cfg.seed)


def z_score(first, second):
    """
    |m1 - m2| / sqrt(s1^2 + s2^2) of two estimates

    Equal means give 0, distinct means without any error give inf.
    """
    diff = abs(first.mean - second.mean)
    if diff == 0:
        return 0.0
    error = math.hypot(first.stderr, second.stderr)
    if error == 0:
        return math.inf
    return diff / error


def _pairwise(estimates):
    return collections.OrderedDict(
        ("%s/%s" % (first, second),
         z_score(estimates[first], estimates[second]))
        for first, second in itertools.combinations(estimates, 2))


def cross_validate(params, cfg, n_batches=16, threads=None):
    """
    Estimate with all three formulations and compare them

    :return: dict with ``estimates`` (by method), ``z_scores`` (by
             "first/second" pair) and ``max_z``
    """
    estimates = collections.OrderedDict(
        (method, estimate_lyapunov(params, cfg, method, n_batches, threads))
        for method in METHODS)
    z_scores = _pairwise(estimates)
    return {"estimates": estimates, "z_scores": z_scores,
            "max_z": max(z_scores.values())}


def omega_invariance_check(params, cfg, omegas, n_batches=16,
                           method="cartesian", threads=None,
                           shared_seed=False):
    """
    Compare estimates over different rotation speeds omega

    By default every omega uses its own stream; ``shared_seed=True`` reuses
    cfg.seed for all of them, which makes the polar and frame estimates
    bit-identical as omega never enters their equations.

    :return: dict with ``estimates`` (by omega), ``z_scores`` and ``max_z``
    :raise DomainError: for fewer than 2 omegas
    """
    omegas = list(omegas)
    if len(omegas) < 2:
        raise DomainError("at least 2 omegas are required, got %s"
                          % len(omegas), "omegas")
    estimates = collections.OrderedDict()
    for index, omega in enumerate(omegas):
        if shared_seed:
            omega_cfg = cfg
        else:
            omega_cfg = cfg._replace(seed=sde.derive_seed(cfg.seed,
                                                          _OMEGA_STREAM,
                                                          index))
        estimates[omega] = estimate_lyapunov(params._replace(omega=omega),
                                             omega_cfg, method, n_batches,
                                             threads)
    z_scores = _pairwise(estimates)
    return {"estimates": estimates, "z_scores": z_scores,
            "max_z": max(z_scores.values())}


def reflection_check(params, cfg, n_batches=16, method="cartesian",
                     threads=None):
    """
    Compare the estimates at +b and -b (independent streams)

    :return: dict with ``plus``, ``minus`` and ``z``
    """
    plus = estimate_lyapunov(params, cfg, method, n_batches, threads)
    mirror_cfg = cfg._replace(seed=sde.derive_seed(cfg.seed, _MIRROR_STREAM))
    minus = estimate_lyapunov(params._replace(b=-params.b), mirror_cfg,
                              method, n_batches, threads)
    return {"plus": plus, "minus": minus, "z": z_score(plus, minus)}


def scaling_check(params, cfg, n_batches=16, method="cartesian",
                  threads=None):
    """
    Compare the estimate of params with multiplier * estimate of its
    canonical form

    :return: dict with ``direct``, ``canonical`` (already multiplied),
             ``form`` (CanonicalForm) and ``z``
    """
    form = canonicalize(params)
    direct = estimate_lyapunov(params, cfg, method, n_batches, threads)
    canonical_cfg = cfg._replace(seed=sde.derive_seed(cfg.seed,
                                                      _CANONICAL_STREAM))
    raw = estimate_lyapunov(form.params(), canonical_cfg, method, n_batches,
                            threads)
    canonical = raw._replace(mean=form.multiplier * raw.mean,
                             stderr=form.multiplier * raw.stderr)
    return {"direct": direct, "canonical": canonical, "form": form,
            "z": z_score(direct, canonical)}
