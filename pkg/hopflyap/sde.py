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
Euler-Maruyama finite-time Lyapunov exponents

Three equivalent formulations of the noisy Hopf normal form are provided
(Cartesian tangent flow, polar Furstenberg-Khasminskii average and the
rotating-frame tangent flow) plus a generic constant-coefficient linear
SDE in the plane driven by a scalar Wiener process.

The Wiener increments of a trajectory are drawn in blocks from
``Generator(Philox(seed)).standard_normal`` so every sample is a pure
function of its inputs.
"""

import collections
import logging
import math

import numpy

from . import kernels
from .exceptions import DomainError, NumericalBlowup
from .model import validate

LOG = logging.getLogger(__name__)

#: Rows of Wiener increments generated per kernel call
BLOCK_ROWS = 8192
#: Sample is flagged as biased when reflections exceed this share of steps
BIASED_SHARE = 1e-3
#: Safety factor of the automatic step guard
STEP_GUARD = 0.05


class SimConfig(collections.namedtuple("SimConfig",
                                       ("dt", "n_steps", "burn_in_steps",
                                        "seed", "renorm_interval",
                                        "r_floor"))):

    """
    Integrator settings of a single trajectory

    ``n_steps`` counts the averaged steps, ``burn_in_steps`` are discarded
    before them.
    """

    __slots__ = ()

    @property
    def horizon(self):
        """Averaging horizon T = dt * n_steps"""
        return self.dt * self.n_steps

    @classmethod
    def desk(cls, **overrides):
        """
        Desk-scale defaults (dt=1e-3, T=2000, 10% burn-in)

        :param overrides: fields to be replaced; ``burn_in_steps=None``
                          means 10% of n_steps
        """
        values = dict(dt=1e-3, n_steps=2000000, burn_in_steps=None,
                      seed=20240229, renorm_interval=64, r_floor=1e-3)
        values.update(overrides)
        if values["burn_in_steps"] is None:
            values["burn_in_steps"] = int(values["n_steps"]) // 10
        return validate_config(cls(**values))


def validate_config(cfg):
    """
    Check the SimConfig constraints

    :return: the unchanged cfg
    :raise DomainError: naming the offending field
    """
    if not (math.isfinite(cfg.dt) and cfg.dt > 0):
        raise DomainError("dt must be > 0, got %s" % cfg.dt, "dt")
    for name in ("n_steps", "renorm_interval"):
        value = getattr(cfg, name)
        if int(value) != value or value <= 0:
            raise DomainError("%s must be a positive integer, got %s"
                              % (name, value), name)
    if int(cfg.burn_in_steps) != cfg.burn_in_steps or cfg.burn_in_steps < 0:
        raise DomainError("burn_in_steps must be a non-negative integer, got "
                          "%s" % cfg.burn_in_steps, "burn_in_steps")
    if int(cfg.seed) != cfg.seed or not 0 <= cfg.seed < 2 ** 64:
        raise DomainError("seed must be an unsigned 64-bit integer, got %s"
                          % cfg.seed, "seed")
    if not (math.isfinite(cfg.r_floor) and cfg.r_floor > 0):
        raise DomainError("r_floor must be > 0, got %s" % cfg.r_floor,
                          "r_floor")
    return cfg


CartesianState = collections.namedtuple("CartesianState",
                                        ("x", "u", "log_norm_sum"))
PolarState = collections.namedtuple("PolarState", ("r", "psi", "q_sum"))
FrameState = collections.namedtuple("FrameState", ("r", "v", "log_norm_sum"))
LinearState = collections.namedtuple("LinearState", ("y", "log_norm_sum"))

#: Finite-time exponent of one trajectory and its diagnostics
FtleSample = collections.namedtuple("FtleSample",
                                    ("value", "horizon", "seed_used", "dt",
                                     "steps", "reflections", "biased",
                                     "state"))


def derive_seed(master, *key):
    """
    Derive an independent 64-bit stream seed

    :param master: master seed
    :param key: non-negative integers identifying the stream (trajectory
                index, grid cell, ...)
    """
    sequence = numpy.random.SeedSequence(int(master),
                                         spawn_key=tuple(int(_) for _ in key))
    return int(sequence.generate_state(1, numpy.uint64)[0])


def _radius_scale(params):
    return max(1.0, params.mu / params.a + params.sigma)


def effective_step(params, cfg, with_rotation=True):
    """
    Automatic step guard

    The step is reduced to STEP_GUARD / (|omega| + |b| m + 3 a m) with
    m = max(1, mu/a + sigma) while the averaging horizon and the burn-in
    time are preserved. The |omega| term only matters when the rotation
    is integrated.

    :return: tuple (dt, n_steps, burn_in_steps)
    """
    scale = _radius_scale(params)
    speed = abs(params.b) * scale + 3 * params.a * scale
    if with_rotation:
        speed += abs(params.omega)
    limit = STEP_GUARD / speed
    if cfg.dt <= limit:
        return cfg.dt, int(cfg.n_steps), int(cfg.burn_in_steps)
    n_steps = int(math.ceil(cfg.horizon / limit))
    dt = cfg.horizon / n_steps
    burn_in = int(math.ceil(cfg.dt * cfg.burn_in_steps / dt))
    LOG.debug("Step guard reduced dt %s -> %s (%s steps) for %s", cfg.dt, dt,
              n_steps, params)
    return dt, n_steps, burn_in


def _advance(kernel, state, coeffs, rng, noise_dim, count, dt, cfg,
             counter, rows=BLOCK_ROWS, phase="averaging"):
    """
    Advance a kernel by ``count`` steps drawing ``rows`` increments at a time

    :return: tuple (counter, reflections)
    """
    reflections = 0
    done = 0
    while done < count:
        size = min(rows, count - done)
        counter, hits, failed = kernel(state,
                                       rng.standard_normal((size, noise_dim)),
                                       coeffs, dt, cfg.renorm_interval,
                                       counter)
        if failed >= 0:
            raise NumericalBlowup("Integrator state became non-finite at "
                                  "step %s during %s (dt=%s), consider a "
                                  "smaller dt" % (counter, phase, dt),
                                  step=counter)
        reflections += hits
        done += size
    return counter, reflections


def _integrate(kernel, state, coeffs, noise_dim, cfg, dt, burn_in, n_steps,
               reset):
    """
    Run the burn-in and the averaging phase of a kernel

    :param reset: callback to restart the accumulators after burn-in
    :return: reflections during the averaging phase
    """
    rng = numpy.random.Generator(numpy.random.Philox(cfg.seed))
    counter, _ = _advance(kernel, state, coeffs, rng, noise_dim, burn_in, dt,
                          cfg, 0, phase="burn-in")
    reset(state)
    _, reflections = _advance(kernel, state, coeffs, rng, noise_dim, n_steps,
                              dt, cfg, counter)
    return reflections


def _reset_tangent(first, log_slot):
    def reset(state):
        norm = math.hypot(state[first], state[first + 1])
        state[first] /= norm
        state[first + 1] /= norm
        state[log_slot] = 0.0
    return reset


def _reset_sum(state):
    state[-1] = 0.0


def _start_radius(params):
    return math.sqrt(max(params.mu, 0.0) / params.a) + params.sigma


def _sample(value, cfg, dt, n_steps, reflections, state):
    biased = reflections > BIASED_SHARE * n_steps
    if biased:
        LOG.warning("%s of %s steps reflected at r_floor=%s (seed %s), the "
                    "sample is biased", reflections, n_steps, cfg.r_floor,
                    cfg.seed)
    return FtleSample(float(value), dt * n_steps, cfg.seed, dt, n_steps,
                      reflections, biased, state)


def _check_floor(params, cfg):
    scale = 0.01 * max(1.0, math.sqrt(abs(params.mu) / params.a))
    if cfg.r_floor >= scale:
        LOG.warning("r_floor=%s is not small compared to the radius scale "
                    "of %s", cfg.r_floor, params)


def simulate_cartesian_ftle(params, cfg):
    """
    Finite-time exponent of the tangent flow dU = DF(X) U dt in the plane

    The rotation (omega + b |X|^2) J X is integrated exactly, see
    :func:`hopflyap.kernels.cartesian_block`.

    :param params: model Params
    :param cfg: SimConfig
    :return: FtleSample with CartesianState
    :raise NumericalBlowup: when the state becomes non-finite
    """
    validate(params)
    validate_config(cfg)
    dt, n_steps, burn_in = effective_step(params, cfg, True)
    state = numpy.array([_start_radius(params), 0.0, 1.0, 0.0, 0.0])
    coeffs = numpy.array([params.mu, params.omega, params.a, params.b,
                          params.sigma], dtype=float)
    _integrate(kernels.cartesian_block, state, coeffs, 2, cfg, dt, burn_in,
               n_steps, _reset_tangent(2, 4))
    log_sum = state[4] + math.log(math.hypot(state[2], state[3]))
    return _sample(log_sum / (dt * n_steps), cfg, dt, n_steps, 0,
                   CartesianState(state[0:2].copy(), state[2:4].copy(),
                                  float(log_sum)))


def _polar_coeffs(params, cfg):
    return numpy.array([params.mu, params.a, params.b, params.sigma,
                        cfg.r_floor], dtype=float)


def simulate_polar_ftle(params, cfg):
    """
    Time average of Q(r, psi) along the (r, psi) diffusion

    omega does not enter the polar equations; the step and the Wiener path
    are therefore the same for every omega.

    :return: FtleSample with PolarState
    """
    validate(params)
    validate_config(cfg)
    _check_floor(params, cfg)
    dt, n_steps, burn_in = effective_step(params, cfg, False)
    state = numpy.array([_start_radius(params), math.pi / 2, 0.0])
    reflections = _integrate(kernels.polar_block, state,
                             _polar_coeffs(params, cfg), 2, cfg, dt, burn_in,
                             n_steps, _reset_sum)
    return _sample(state[2] / (dt * n_steps), cfg, dt, n_steps, reflections,
                   PolarState(float(state[0]), float(state[1]),
                              float(state[2])))


def simulate_frame_ftle(params, cfg):
    """
    Growth rate of the rotating-frame tangent V together with the radius

    The noise acts on V as a norm-preserving rotation (Stratonovich form).

    :return: FtleSample with FrameState
    """
    validate(params)
    validate_config(cfg)
    _check_floor(params, cfg)
    dt, n_steps, burn_in = effective_step(params, cfg, False)
    state = numpy.array([_start_radius(params), 0.0, 1.0, 0.0])
    reflections = _integrate(kernels.frame_block, state,
                             _polar_coeffs(params, cfg), 2, cfg, dt, burn_in,
                             n_steps, _reset_tangent(1, 3))
    log_sum = state[3] + math.log(math.hypot(state[1], state[2]))
    return _sample(log_sum / (dt * n_steps), cfg, dt, n_steps, reflections,
                   FrameState(float(state[0]), state[1:3].copy(),
                              float(log_sum)))


def _matrix(value, name):
    matrix = numpy.asarray(value, dtype=float)
    if matrix.shape != (2, 2):
        raise DomainError("%s must be a 2x2 matrix, got shape %s"
                          % (name, matrix.shape), name)
    if not numpy.all(numpy.isfinite(matrix)):
        raise DomainError("%s must be finite" % name, name)
    return matrix


def simulate_linear2d_ftle(drift, noise, cfg):
    """
    Finite-time exponent of dY = drift Y dt + noise Y dW, W scalar

    No step guard is applied, cfg.dt is used as is.

    :param drift: 2x2 matrix
    :param noise: 2x2 matrix
    :return: FtleSample with LinearState
    """
    coeffs = numpy.concatenate((_matrix(drift, "drift").ravel(),
                                _matrix(noise, "noise").ravel()))
    validate_config(cfg)
    state = numpy.array([1.0, 0.0, 0.0])
    _integrate(kernels.linear_block, state, coeffs, 1, cfg, cfg.dt,
               int(cfg.burn_in_steps), int(cfg.n_steps),
               _reset_tangent(0, 2))
    log_sum = state[2] + math.log(math.hypot(state[0], state[1]))
    return _sample(log_sum / cfg.horizon, cfg, cfg.dt, int(cfg.n_steps), 0,
                   LinearState(state[0:2].copy(), float(log_sum)))


def sample_radius(params, cfg, thin=1000):
    """
    Record the radius of the polar integrator every ``thin`` steps

    Burn-in steps are discarded; the number of records is
    n_steps // thin (after the step guard).

    :return: numpy array of radii
    """
    validate(params)
    validate_config(cfg)
    if int(thin) != thin or thin <= 0:
        raise DomainError("thin must be a positive integer, got %s" % thin,
                          "thin")
    dt, n_steps, burn_in = effective_step(params, cfg, False)
    state = numpy.array([_start_radius(params), math.pi / 2, 0.0])
    coeffs = _polar_coeffs(params, cfg)
    rng = numpy.random.Generator(numpy.random.Philox(cfg.seed))
    counter, _ = _advance(kernels.polar_block, state, coeffs, rng, 2, burn_in,
                          dt, cfg, 0, phase="burn-in")
    records = numpy.empty(n_steps // thin)
    for i in range(records.size):
        counter, _ = _advance(kernels.polar_block, state, coeffs, rng, 2,
                              thin, dt, cfg, counter, rows=thin)
        records[i] = state[0]
    return records
