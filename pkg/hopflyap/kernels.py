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
Compiled Euler-Maruyama block kernels

Every kernel advances ``state`` in place by ``noise.shape[0]`` steps using
the standard normal increments stored row-wise in ``noise`` and returns
``(counter, reflections, failed)`` where ``counter`` is the updated global
step counter, ``reflections`` the number of r-floor reflections within the
block and ``failed`` the row at which the state stopped being finite (-1
when the whole block went fine).

The last element of every state accumulates the log growth (or the
integral of Q for the polar formulation).
"""

import math

from numba import njit

#: Tangent components outside of this window trigger renormalization
TINY = 1e-20
HUGE = 1e20

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _renormalize(state, first, log_slot):
    norm = math.hypot(state[first], state[first + 1])
    state[log_slot] += math.log(norm)
    state[first] /= norm
    state[first + 1] /= norm


@njit(**_JIT)
def _needs_renorm(u0, u1, counter, renorm_interval):
    if counter % renorm_interval == 0:
        return True
    biggest = max(abs(u0), abs(u1))
    return biggest > HUGE or biggest < TINY


@njit(**_JIT)
def _reflect(r, r_floor):
    if r >= r_floor:
        return r, 0
    r = 2.0 * r_floor - r
    if r < r_floor:
        r = r_floor
    return r, 1


@njit(**_JIT)
def cartesian_block(state, noise, coeffs, dt, renorm_interval, counter):
    """
    X and its tangent U in the plane

    Each step first applies the exact flow of the rotation
    (omega + b |X|^2) J X, which keeps |X|, together with its exact
    linearization, then an Euler-Maruyama step of (mu - a |X|^2) X plus
    the noise.

    state = [x0, x1, u0, u1, log_norm_sum],
    coeffs = [mu, omega, a, b, sigma]
    """
    mu, omega, a, b, sigma = coeffs[0], coeffs[1], coeffs[2], coeffs[3], \
        coeffs[4]
    scale = sigma * math.sqrt(dt)
    for k in range(noise.shape[0]):
        x0, x1, u0, u1 = state[0], state[1], state[2], state[3]
        r2 = x0 * x0 + x1 * x1
        angle = (omega + b * r2) * dt
        cos = math.cos(angle)
        sin = math.sin(angle)
        y0 = cos * x0 - sin * x1
        y1 = sin * x0 + cos * x1
        shear = 2.0 * b * dt * (x0 * u0 + x1 * u1)
        w0 = cos * u0 - sin * u1 - shear * y1
        w1 = sin * u0 + cos * u1 + shear * y0
        growth = (mu - a * r2) * dt
        pull = 2.0 * a * dt * (y0 * w0 + y1 * w1)
        state[0] = y0 + growth * y0 + scale * noise[k, 0]
        state[1] = y1 + growth * y1 + scale * noise[k, 1]
        state[2] = w0 + growth * w0 - pull * y0
        state[3] = w1 + growth * w1 - pull * y1
        counter += 1
        if not (math.isfinite(state[0]) and math.isfinite(state[1]) and
                math.isfinite(state[2]) and math.isfinite(state[3])):
            return counter, 0, k
        if _needs_renorm(state[2], state[3], counter, renorm_interval):
            _renormalize(state, 2, 4)
    return counter, 0, -1


@njit(**_JIT)
def polar_block(state, noise, coeffs, dt, renorm_interval, counter):
    """
    Radius and tangent phase gap, accumulating the integral of Q

    state = [r, psi, q_sum], coeffs = [mu, a, b, sigma, r_floor];
    noise column 0 drives the radius, column 1 the angle.
    """
    mu, a, b, sigma, r_floor = coeffs[0], coeffs[1], coeffs[2], coeffs[3], \
        coeffs[4]
    sqdt = math.sqrt(dt)
    reflections = 0
    for k in range(noise.shape[0]):
        r, psi = state[0], state[1]
        r2 = r * r
        cos = math.cos(psi)
        sin = math.sin(psi)
        state[2] += (mu - a * r2 + 2.0 * r2 * cos * (b * sin - a * cos)) * dt
        radius = r + (mu * r - a * r2 * r + 0.5 * sigma * sigma / r) * dt + \
            sigma * sqdt * noise[k, 0]
        psi += (2.0 * r2 * cos * (b * cos + a * sin) * dt -
                sigma / r * sqdt * noise[k, 1])
        radius, hit = _reflect(radius, r_floor)
        state[0] = radius
        reflections += hit
        state[1] = psi - math.pi * math.floor(psi / math.pi)
        counter += 1
        if not (math.isfinite(state[0]) and math.isfinite(state[1]) and
                math.isfinite(state[2])):
            return counter, reflections, k
    return counter, reflections, -1


@njit(**_JIT)
def frame_block(state, noise, coeffs, dt, renorm_interval, counter):
    """
    Radius and the rotating-frame tangent V (Stratonovich form)

    The drift of V is an Euler step, the noise term (sigma / r) J V dW is
    applied as the exact rotation of V by -(sigma / r) dW so it never
    changes |V|.

    state = [r, v0, v1, log_norm_sum], coeffs = [mu, a, b, sigma, r_floor];
    noise column 0 drives the radius, column 1 the rotation of V.
    """
    mu, a, b, sigma, r_floor = coeffs[0], coeffs[1], coeffs[2], coeffs[3], \
        coeffs[4]
    sqdt = math.sqrt(dt)
    reflections = 0
    for k in range(noise.shape[0]):
        r, v0, v1 = state[0], state[1], state[2]
        r2 = r * r
        w0 = v0 + (mu - 3.0 * a * r2) * v0 * dt
        w1 = v1 + (2.0 * b * r2 * v0 + (mu - a * r2) * v1) * dt
        turn = sigma / r * sqdt * noise[k, 1]
        cos = math.cos(turn)
        sin = math.sin(turn)
        state[1] = cos * w0 + sin * w1
        state[2] = cos * w1 - sin * w0
        radius = r + (mu * r - a * r2 * r + 0.5 * sigma * sigma / r) * dt + \
            sigma * sqdt * noise[k, 0]
        radius, hit = _reflect(radius, r_floor)
        state[0] = radius
        reflections += hit
        counter += 1
        if not (math.isfinite(state[0]) and math.isfinite(state[1]) and
                math.isfinite(state[2])):
            return counter, reflections, k
        if _needs_renorm(state[1], state[2], counter, renorm_interval):
            _renormalize(state, 1, 3)
    return counter, reflections, -1


@njit(**_JIT)
def linear_block(state, noise, coeffs, dt, renorm_interval, counter):
    """
    dY = A Y dt + B Y dW for a scalar Wiener process

    state = [y0, y1, log_norm_sum], coeffs = A and B flattened row-wise
    """
    sqdt = math.sqrt(dt)
    for k in range(noise.shape[0]):
        y0, y1 = state[0], state[1]
        kick = sqdt * noise[k, 0]
        state[0] = y0 + (coeffs[0] * y0 + coeffs[1] * y1) * dt + \
            (coeffs[4] * y0 + coeffs[5] * y1) * kick
        state[1] = y1 + (coeffs[2] * y0 + coeffs[3] * y1) * dt + \
            (coeffs[6] * y0 + coeffs[7] * y1) * kick
        counter += 1
        if not (math.isfinite(state[0]) and math.isfinite(state[1])):
            return counter, 0, k
        if _needs_renorm(state[0], state[1], counter, renorm_interval):
            _renormalize(state, 0, 2)
    return counter, 0, -1
