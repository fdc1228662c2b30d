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
Parameters of the noisy Hopf normal form

    dX = (M X + |X|^2 C X) dt + sigma dW,  M = [[mu, -omega], [omega, mu]],
                                           C = [[-a, -b], [b, -a]]

together with the integrand Q(r, psi) whose stationary average is the top
Lyapunov exponent, and the exact symmetry and scaling transforms of the
exponent.
"""

import collections
import math

import numpy

from .exceptions import DomainError

#: Field names of Params in their canonical order
PARAM_FIELDS = ("mu", "omega", "a", "b", "sigma")


class Params(collections.namedtuple("Params", PARAM_FIELDS)):

    """
    The five model constants (mu, omega, a, b, sigma)

    Instances are immutable; use :func:`validate` before simulating.
    """

    __slots__ = ()

    @property
    def twist(self):
        """Twist factor b/a"""
        return self.b / self.a

    @property
    def reduced_drift(self):
        """Reduced drift mu/(sigma*sqrt(a))"""
        return self.mu / (self.sigma * math.sqrt(self.a))

    def as_dict(self):
        """Flat dict representation (JSON friendly)"""
        return dict(zip(PARAM_FIELDS, (float(_) for _ in self)))


class CanonicalForm(collections.namedtuple("CanonicalForm",
                                           ("mu_hat", "b_hat", "multiplier"))):

    """
    Two-parameter reduction lambda(p) = multiplier * lambda(mu_hat, 1, b_hat, 1)
    """

    __slots__ = ()

    def params(self):
        """Return the canonical Params (mu_hat, 0, 1, b_hat, 1)"""
        return Params(self.mu_hat, 0.0, 1.0, self.b_hat, 1.0)


def validate(params):
    """
    Check the model constraints

    :param params: Params to be checked
    :return: the unchanged params
    :raise DomainError: naming the first violated constraint
    """
    for name, value in zip(PARAM_FIELDS, params):
        try:
            finite = math.isfinite(value)
        except TypeError:
            raise DomainError("%s must be a real number, got %r"
                              % (name, value), name) from None
        if not finite:
            raise DomainError("%s must be finite, got %s" % (name, value),
                              name)
    if params.a <= 0:
        raise DomainError("a must be > 0 for the system to be recurrent, "
                          "got %s" % params.a, "a")
    if params.sigma <= 0:
        raise DomainError("sigma must be > 0, got %s" % params.sigma, "sigma")
    return params


def q_integrand(r, psi, params):
    """
    Furstenberg-Khasminskii integrand

    Q(r, psi) = mu - a r^2 + 2 r^2 cos(psi) (b sin(psi) - a cos(psi))

    :param r: radius (> 0), float or numpy array
    :param psi: tangent phase gap (mod pi), float or numpy array
    :param params: model Params
    """
    r2 = numpy.square(r)
    cos = numpy.cos(psi)
    return (params.mu - params.a * r2 +
            2 * r2 * cos * (params.b * numpy.sin(psi) - params.a * cos))


def q_integrand_double_angle(r, psi, params):
    """
    Double-angle form mu - 2 a r^2 + r^2 (b sin(2 psi) - a cos(2 psi))
    """
    r2 = numpy.square(r)
    return (params.mu - 2 * params.a * r2 +
            r2 * (params.b * numpy.sin(2 * psi) -
                  params.a * numpy.cos(2 * psi)))


def q_upper_bound(r, params):
    """Sharp upper bound mu + (sqrt(a^2+b^2) - 2a) r^2 of Q over psi"""
    return params.mu + (math.hypot(params.a, params.b) -
                        2 * params.a) * numpy.square(r)


def q_lower_bound(r, params):
    """Sharp lower bound mu - (sqrt(a^2+b^2) + 2a) r^2 of Q over psi"""
    return params.mu - (math.hypot(params.a, params.b) +
                        2 * params.a) * numpy.square(r)


def q_bounded_above(params):
    """
    Whether Q is bounded above on the whole phase space

    This holds iff |b| <= sqrt(3) a, in which case mu is the sharp bound.
    """
    return abs(params.b) <= math.sqrt(3) * params.a


def canonicalize(params):
    """
    Reduce params to the canonical two-parameter form

    Uses the scaling lambda(mu,a,b,sigma) = sigma sqrt(a) *
    lambda(mu/(sigma sqrt(a)), 1, b/a, 1), the reflection b -> -b and the
    omega independence of the exponent.

    :param params: valid Params
    :return: CanonicalForm
    """
    validate(params)
    multiplier = params.sigma * math.sqrt(params.a)
    return CanonicalForm(params.mu / multiplier, abs(params.b) / params.a,
                         multiplier)


def rescale(params, time_scale, space_scale):
    """
    Apply the exact time/space scaling of the exponent

    lambda(mu,a,b,sigma) = (1/A) lambda(A mu, A a/B^2, A b/B^2, sqrt(A) B sigma)

    :param params: Params
    :param time_scale: A > 0
    :param space_scale: B > 0
    :return: tuple (rescaled Params, multiplier 1/A)
    """
    if not time_scale > 0:
        raise DomainError("time scale must be > 0, got %s" % time_scale, "A")
    if not space_scale > 0:
        raise DomainError("space scale must be > 0, got %s" % space_scale,
                          "B")
    factor = time_scale / space_scale ** 2
    return (Params(time_scale * params.mu, time_scale * params.omega,
                   factor * params.a, factor * params.b,
                   math.sqrt(time_scale) * space_scale * params.sigma),
            1.0 / time_scale)


def normalize_mu(params):
    """
    Scale mu to +-1: lambda(mu,a,b,sigma) = |mu| lambda(+-1, a, b, sigma/|mu|)

    :return: tuple (Params with mu=+-1, multiplier |mu|)
    """
    if params.mu == 0:
        raise DomainError("mu must be non-zero to be normalized", "mu")
    scale = abs(params.mu)
    normalized, multiplier = rescale(params, 1.0 / scale,
                                     1.0 / math.sqrt(scale))
    # exact +-1 and a, b instead of their rounded images
    return (normalized._replace(mu=math.copysign(1.0, params.mu),
                                a=params.a, b=params.b), multiplier)
