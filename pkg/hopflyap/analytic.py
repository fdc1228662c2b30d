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
Closed-form and quadrature based quantities of the noisy Hopf normal form

All expressions containing exp(-z^2)/erfc(-z) are evaluated through the
scaled complementary error function erfcx so they stay finite for any z.
"""

import collections
import logging
import math
import threading
import warnings

import numpy
from scipy import integrate, optimize, special

from .exceptions import DomainError, QuadratureFailure
from .model import validate

LOG = logging.getLogger(__name__)

#: Relative accuracy required from every quadrature
QUAD_RTOL = 1e-10
# What we ask quadpack for, leaving headroom below QUAD_RTOL
_QUAD_REQUEST = 1e-12
_QUAD_LIMIT = 200
# Moment integrals are truncated where the log-weight drops this far below
# its maximum (exp(-80) ~ 1e-35)
_MOMENT_LOG_CUTOFF = 80.0
# Psi integrals are truncated where the integrand underflows
_PSI_LOG_CUTOFF = 745.0
#: Below this zeta the Psi quadrature is cross-checked by Laplace's method
LAPLACE_ZETA = 0.05
#: Bracket and tolerance of the c* bisection
C_STAR_BRACKET = (1.0, 10.0)
C_STAR_XTOL = 1e-6

_SQRT_PI = math.sqrt(math.pi)

PsiInput = collections.namedtuple("PsiInput", ("zeta",))


def erfcx_scaled(x):
    """
    Scaled complementary error function exp(x^2) erfc(x)

    :param x: float or numpy array
    """
    out = special.erfcx(x)
    return float(out) if numpy.ndim(out) == 0 else out


def log_erfc(x):
    """
    Overflow-safe log(erfc(x))

    :param x: float or numpy array
    """
    x = numpy.asarray(x, dtype=float)
    neg = numpy.minimum(x, 0.0)
    pos = numpy.maximum(x, 0.0)
    out = numpy.where(x < 0, numpy.log(special.erfc(neg)),
                      numpy.log(special.erfcx(pos)) - pos * pos)
    return float(out) if out.ndim == 0 else out


def _quad(name, func, low, high, **kwargs):
    """
    Adaptive Gauss-Kronrod quadrature with an enforced relative tolerance

    :raise QuadratureFailure: when the error estimate exceeds QUAD_RTOL
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, error = integrate.quad(func, low, high, epsabs=0.0,
                                      epsrel=_QUAD_REQUEST,
                                      limit=_QUAD_LIMIT, **kwargs)
    if not math.isfinite(value) or error > QUAD_RTOL * abs(value) + 1e-300:
        raise QuadratureFailure(name, value, error)
    return value


class DensityModel:

    """
    Invariant law of the radius r of the noisy Hopf normal form

        rho(r) = 2 r exp(-(a/2 sigma^2)(r^2 - mu/a)^2) / N,
        N = sqrt(pi sigma^2/2a) erfc(-mu/(sigma sqrt(2a)))

    In the variable s = r^2 this is a normal law with mean mu/a and
    standard deviation sigma/sqrt(a) truncated to s >= 0.
    """

    __slots__ = ("mu", "a", "sigma", "center", "spread", "z_param",
                 "log_normalizer")

    def __init__(self, mu, a, sigma):
        for name, value in (("mu", mu), ("a", a), ("sigma", sigma)):
            if not math.isfinite(value):
                raise DomainError("%s must be finite, got %s" % (name, value),
                                  name)
        if a <= 0:
            raise DomainError("a must be > 0, got %s" % a, "a")
        if sigma <= 0:
            raise DomainError("sigma must be > 0, got %s" % sigma, "sigma")
        self.mu = mu
        self.a = a
        self.sigma = sigma
        self.center = mu / a
        self.spread = sigma / math.sqrt(a)
        self.z_param = mu / (sigma * math.sqrt(2 * a))
        self.log_normalizer = (0.5 * math.log(math.pi * self.spread ** 2 / 2)
                               + log_erfc(-self.z_param))

    @classmethod
    def from_params(cls, params):
        """Build the radial model of the given Params"""
        return cls(params.mu, params.a, params.sigma)

    def log_weight(self, s, tilt=0.0):
        """
        Unnormalized log density in s = r^2, optionally tilted by
        exp(tilt (s - mu/a)^2)
        """
        return -(s - self.center) ** 2 * (0.5 / self.spread ** 2 - tilt)

    def __repr__(self):
        return ("DensityModel(mu=%s, a=%s, sigma=%s)"
                % (self.mu, self.a, self.sigma))


def _window(model, tilt=0.0):
    """
    Integration window [low, high] in s and the location of the weight peak
    """
    spread = model.spread / math.sqrt(1 - 2 * tilt * model.spread ** 2)
    cut = math.sqrt(2 * _MOMENT_LOG_CUTOFF) * spread
    center = model.center
    low = max(0.0, center - cut)
    high = center + math.sqrt(min(center, 0.0) ** 2 + cut ** 2)
    return low, high, max(center, 0.0)


def _expectation(model, name, power=0.0, factor=None, tilt=0.0):
    """
    E[s^power * factor(s) * exp(tilt (s - mu/a)^2)] under the radial law,
    where s = r^2
    """
    low, high, peak = _window(model, tilt)
    shift = model.log_weight(peak, tilt)

    def integrand(s):
        value = math.exp(model.log_weight(s, tilt) - shift)
        if factor is not None:
            value *= factor(s)
        return value

    if power != 0 and low == 0.0:
        value = _quad(name, integrand, low, high, weight='alg',
                      wvar=(power, 0.0))
    elif power != 0:
        value = _quad(name, lambda s: s ** power * integrand(s), low, high)
    else:
        value = _quad(name, integrand, low, high)
    return value * math.exp(shift - model.log_normalizer)


def rho(model, r):
    """
    Stationary density of the radius

    :param model: DensityModel
    :param r: radius, float or numpy array (0 for r <= 0)
    """
    r = numpy.asarray(r, dtype=float)
    positive = numpy.maximum(r, 0.0)
    out = numpy.where(r > 0, 2 * positive *
                      numpy.exp(model.log_weight(positive * positive) -
                                model.log_normalizer), 0.0)
    return float(out) if out.ndim == 0 else out


def cdf(model, r):
    """
    Distribution function of the radius, P(r_t <= r) under the stationary law
    """
    r = numpy.asarray(r, dtype=float)
    scaled = ((numpy.square(numpy.maximum(r, 0.0)) - model.center) /
              (model.spread * math.sqrt(2)))
    log_ratio = log_erfc(scaled) - log_erfc(-model.z_param)
    out = numpy.where(r > 0, -numpy.expm1(numpy.minimum(log_ratio, 0.0)),
                      0.0)
    return float(out) if out.ndim == 0 else out


def moment(model, kappa):
    """
    Moment E[r^kappa] of the stationary radius by adaptive quadrature

    :param model: DensityModel
    :param kappa: exponent, must be > -2 for integrability
    :raise DomainError: when kappa <= -2
    :raise QuadratureFailure: when QUAD_RTOL is not met
    """
    if not kappa > -2:
        raise DomainError("moment exponent must be > -2, got %s" % kappa,
                          "kappa")
    return _expectation(model, "E[r^%s]" % kappa, power=kappa / 2.0)


def moment_r2_closed(model):
    """
    Exact E[r^2] = mu/a + sqrt(2 sigma^2/(pi a)) exp(-z^2)/erfc(-z)
    """
    return float(model.center + model.spread * math.sqrt(2 / math.pi) /
                 special.erfcx(-model.z_param))


def moment_centered(model):
    """Second moment of r^2 around mu/a, E[(r^2 - mu/a)^2]"""
    center = model.center
    return _expectation(model, "E[(r^2-mu/a)^2]",
                        factor=lambda s: (s - center) ** 2)


def gaussian_domination_bound(model):
    """Upper bound 2 sigma^2/a of :func:`moment_centered` (for mu > 0)"""
    return 2 * model.spread ** 2


def exponential_moment(model, gamma):
    """
    E[exp(gamma (r^2 - mu/a)^2)], finite only for gamma < a/(2 sigma^2)
    """
    if not gamma < 0.5 / model.spread ** 2:
        raise DomainError("gamma must be < a/(2 sigma^2) = %s, got %s"
                          % (0.5 / model.spread ** 2, gamma), "gamma")
    return _expectation(model, "E[exp(%s (r^2-mu/a)^2)]" % gamma, tilt=gamma)


def exponential_moment_bound(model, gamma):
    """Upper bound 2/sqrt(1 - 2 gamma sigma^2/a) of the exponential moment"""
    return 2.0 / math.sqrt(1 - 2 * gamma * model.spread ** 2)


def bound_J(z, b_ratio):
    """
    J(z, b) = z + (sqrt(1+b^2) - 2)(z + exp(-z^2)/(sqrt(pi) erfc(-z)))

    lambda(mu,a,b,sigma) < sqrt(2 a sigma^2) J(mu/sqrt(2 a sigma^2), b/a)
    """
    return float(z + (math.hypot(1.0, b_ratio) - 2) *
                 (z + 1.0 / (_SQRT_PI * special.erfcx(-z))))


def jhat(z):
    """
    Threshold of the negativity bound: J(z, b) <= 0 iff |b| <= jhat(z)

    :param z: reduced drift mu/sqrt(2 a sigma^2)
    """
    with numpy.errstate(over='ignore', invalid='ignore'):
        scaled = _SQRT_PI * z * special.erfcx(-z) if z else 0.0
    inner = 1.0 / (1.0 + scaled)
    return float(math.sqrt(inner * (inner + 2)))


def _reduced_drift(params):
    return params.mu / math.sqrt(2 * params.a * params.sigma ** 2)


def negativity_certificate(params):
    """
    Rigorous certificate of lambda < 0: |b| <= a jhat(mu/(sigma sqrt(2a)))

    A False result says nothing about the sign of lambda.
    """
    validate(params)
    return abs(params.b) <= params.a * jhat(_reduced_drift(params))


def lambda_upper_bound(params):
    """Strict upper bound sqrt(2 a sigma^2) J(z, |b|/a) of lambda"""
    validate(params)
    return (math.sqrt(2 * params.a * params.sigma ** 2) *
            bound_J(_reduced_drift(params), abs(params.b) / params.a))


def _psi_integral(zeta, power):
    """
    int_0^inf u^power exp(-(u^3/6 - u/2)/zeta) du / exp(1/(3 zeta))

    The exponent equals -(u-1)^2 (u+2)/(6 zeta) after removing the value at
    its maximum u=1; the range is split at the peak and at its width.
    """
    def integrand(u):
        return math.exp(-(u - 1.0) ** 2 * (u + 2.0) / (6.0 * zeta))

    def weighted(u):
        return u ** power * integrand(u)

    width = 8.0 * math.sqrt(zeta)
    upper = 1.0 + (6.0 * _PSI_LOG_CUTOFF * zeta) ** (1.0 / 3)
    name = "Psi(%s) u^%s" % (zeta, power)
    edge = max(0.0, 1.0 - width)
    total = 0.0
    if edge > 0:
        total += _quad(name, integrand, 0.0, edge, weight='alg',
                       wvar=(power, 0.0))
        total += _quad(name, weighted, edge, 1.0)
    else:
        total += _quad(name, integrand, 0.0, 1.0, weight='alg',
                       wvar=(power, 0.0))
    if 1.0 + width < upper:
        total += _quad(name, weighted, 1.0, 1.0 + width)
        total += _quad(name, weighted, 1.0 + width, upper)
    else:
        total += _quad(name, weighted, 1.0, upper)
    return total


def psi_laplace(zeta):
    """
    Second order Laplace expansion of Psi for small zeta (~ -zeta/2)
    """
    return 0.5 * ((1 - zeta / 6.0) / (1 + 5 * zeta / 6.0) - 1)


def psi_big(zeta):
    """
    Top Lyapunov exponent of the canonical sheared linear SDE

        Psi(zeta) = 1/2 (I(1/2) / I(-1/2) - 1),
        I(p) = int_0^inf u^p exp(-(u^3/6 - u/2)/zeta) du

    :param zeta: zeta > 0 (float or PsiInput)
    :raise DomainError: for non-positive or non-finite zeta
    :raise QuadratureFailure: when QUAD_RTOL is not met
    """
    zeta = getattr(zeta, "zeta", zeta)
    if not (math.isfinite(zeta) and zeta > 0):
        raise DomainError("zeta must be finite and > 0, got %s" % zeta,
                          "zeta")
    value = 0.5 * (_psi_integral(zeta, 0.5) / _psi_integral(zeta, -0.5) - 1)
    if zeta < LAPLACE_ZETA:
        approx = psi_laplace(zeta)
        if abs(value - approx) > 1e-6 + 2 * zeta ** 2:
            LOG.warning("Psi(%s)=%s disagrees with its Laplace expansion %s",
                        zeta, value, approx)
    return float(value)


_C_STAR = None
_C_STAR_LOCK = threading.Lock()


def c_star():
    """
    Unique zero of Psi, the critical shear ratio (~3.543)

    Computed once by bisection on C_STAR_BRACKET and cached.
    """
    global _C_STAR  # pylint: disable=W0603
    with _C_STAR_LOCK:
        if _C_STAR is None:
            _C_STAR = float(optimize.bisect(psi_big, *C_STAR_BRACKET,
                                            xtol=C_STAR_XTOL))
            LOG.debug("c* = %s", _C_STAR)
    return _C_STAR


def ce_slope():
    """Asymptotic slope b/mu = sqrt(2 c*) of the zero curve for large mu"""
    return math.sqrt(2 * c_star())


def gamma0():
    """
    Top Lyapunov exponent of the canonical nilpotent linear SDE

        gamma0 = pi / (2^(1/3) 3^(1/6) Gamma(1/3)^2)
    """
    return float(math.pi / (2 ** (1 / 3.0) * 3 ** (1 / 6.0) *
                            special.gamma(1 / 3.0) ** 2))


def phi_shear(w):
    """
    Phi(w) = w/(1+w^2) - w^2 (1-w^2) / (2 (1+w^2)^2), Phi(+-inf) = 1/2

    For |w| > 1 the form in 1/w is used so large and infinite w stay exact.
    """
    w = numpy.asarray(w, dtype=float)
    far = numpy.abs(w) > 1
    with numpy.errstate(divide='ignore'):
        x = numpy.where(far, 1.0 / numpy.where(far, w, 1.0), w)
    x2 = x * x
    out = x / (1 + x2) - numpy.where(far, x2 - 1, x2 * (1 - x2)) / \
        (2 * (1 + x2) ** 2)
    return float(out) if out.ndim == 0 else out


def ya_matrices():
    """Drift and noise of dY = [[0,0],[1,0]] Y dt + [[0,1],[0,0]] Y dW"""
    return (numpy.array([[0.0, 0.0], [1.0, 0.0]]),
            numpy.array([[0.0, 1.0], [0.0, 0.0]]))


def yb_matrices(zeta):
    """
    Drift and noise of the sheared linear SDE whose exponent is Psi(zeta)

    dY = [[-1,0],[zeta^(1/3),0]] Y dt + [[0,zeta^(1/6)],[0,0]] Y dW
    """
    if not zeta > 0:
        raise DomainError("zeta must be > 0, got %s" % zeta, "zeta")
    return (numpy.array([[-1.0, 0.0], [zeta ** (1 / 3.0), 0.0]]),
            numpy.array([[0.0, zeta ** (1 / 6.0)], [0.0, 0.0]]))


def frozen_radius_system(params):
    """
    Rotating-frame tangent SDE with r frozen at sqrt(mu/a)

    Its exponent is -sigma^2 (a^2+b^2)/(2 mu a) + O(sigma^4).

    :return: tuple (drift, noise) for a scalar Wiener process
    """
    validate(params)
    mu, a, b, sigma = params.mu, params.a, params.b, params.sigma
    if mu <= 0:
        raise DomainError("frozen radius requires mu > 0, got %s" % mu, "mu")
    damping = sigma ** 2 * a / (2 * mu)
    drift = numpy.array([[-2 * mu - damping, 0.0],
                         [2 * b * mu / a, -damping]])
    noise = sigma * math.sqrt(a / mu) * numpy.array([[0.0, 1.0],
                                                     [-1.0, 0.0]])
    return drift, noise


def predict_large_b(params):
    """
    Large shear asymptote (2 b sigma)^(2/3) gamma0 E[r^(2/3)]
    """
    validate(params)
    shear = abs(params.b)
    if shear == 0:
        raise DomainError("large-b prediction requires b != 0", "b")
    model = DensityModel.from_params(params)
    return ((2 * shear * params.sigma) ** (2 / 3.0) * gamma0() *
            moment(model, 2 / 3.0))


def predict_small_sigma(params):
    """
    Small noise expansion -(a^2+b^2) sigma^2/(2 mu a), valid for mu > 0
    """
    validate(params)
    if params.mu <= 0:
        raise DomainError("small-sigma prediction requires mu > 0, got %s"
                          % params.mu, "mu")
    return -((params.a ** 2 + params.b ** 2) * params.sigma ** 2 /
             (2 * params.mu * params.a))


def predict_stable_focus(params):
    """
    Small noise limit lambda = mu + O(sigma^2) of the stable focus (mu < 0)
    """
    validate(params)
    if params.mu >= 0:
        raise DomainError("stable-focus prediction requires mu < 0, got %s"
                          % params.mu, "mu")
    return float(params.mu)


def predict_ce(params):
    """
    Small noise, large shear limit 2 mu Psi(b^2 sigma^2/(2 mu^2 a))

    b = 0 gives the limit 0 of Psi at zeta -> 0.
    """
    validate(params)
    if params.mu <= 0:
        raise DomainError("CE prediction requires mu > 0, got %s"
                          % params.mu, "mu")
    zeta = (params.b * params.sigma) ** 2 / (2 * params.mu ** 2 * params.a)
    if zeta == 0:
        return 0.0
    return 2 * params.mu * psi_big(zeta)
