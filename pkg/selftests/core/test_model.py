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
Tests for the model.py module
"""

import math
import unittest

import numpy

from hopflyap import model
from hopflyap.exceptions import DomainError
from hopflyap.model import Params


def random_params(rng, size):
    """Vectorized random parameter sets (as Params of arrays)"""
    return Params(rng.uniform(-5, 5, size), rng.uniform(-5, 5, size),
                  rng.uniform(0.1, 5, size), rng.uniform(-10, 10, size),
                  rng.uniform(0.1, 3, size))


class Validate(unittest.TestCase):

    def test_ok(self):
        params = Params(1, 0, 1, 0, 1)
        self.assertIs(model.validate(params), params)

    def test_violations(self):
        for params, field in ((Params(1, 0, -1, 0, 1), "a"),
                              (Params(1, 0, 0, 0, 1), "a"),
                              (Params(1, 0, 1, 0, 0), "sigma"),
                              (Params(1, 0, 1, 0, -2), "sigma"),
                              (Params(float("nan"), 0, 1, 0, 1), "mu"),
                              (Params(1, float("inf"), 1, 0, 1), "omega"),
                              (Params(1, 0, 1, "x", 1), "b")):
            with self.assertRaises(DomainError) as exc:
                model.validate(params)
            self.assertEqual(exc.exception.field, field, params)

    def test_derived(self):
        params = Params(2, 0, 4, 8, 0.5)
        self.assertEqual(params.twist, 2)
        self.assertEqual(params.reduced_drift, 2)
        self.assertEqual(params.as_dict(), {"mu": 2, "omega": 0, "a": 4,
                                            "b": 8, "sigma": 0.5})


class Integrand(unittest.TestCase):

    def test_examples(self):
        self.assertAlmostEqual(
            model.q_integrand(1, math.pi / 2, Params(1, 0, 1, 0, 1)), 0,
            places=12)
        self.assertAlmostEqual(
            model.q_integrand(1, 0, Params(1, 0, 1, 5, 1)), -2, places=12)
        self.assertAlmostEqual(
            model.q_integrand(1, math.pi / 4, Params(0, 0, 1, 2, 1)), 0,
            places=12)

    def test_two_forms(self):
        rng = numpy.random.default_rng(1)
        size = 1000000
        params = random_params(rng, size)
        radius = rng.uniform(1e-3, 5, size)
        psi = rng.uniform(0, math.pi, size)
        first = model.q_integrand(radius, psi, params)
        second = model.q_integrand_double_angle(radius, psi, params)
        self.assertTrue(numpy.all(numpy.abs(first - second) <=
                                  1e-12 * (1 + numpy.abs(first)) * 100))
        rel = numpy.abs(first - second) / (1 + numpy.abs(first))
        self.assertLess(numpy.median(rel), 1e-12)

    def test_bounds(self):
        rng = numpy.random.default_rng(2)
        for _ in range(200):
            params = Params(rng.uniform(-5, 5), 0, rng.uniform(0.1, 5),
                            rng.uniform(-10, 10), 1)
            radius = rng.uniform(1e-3, 5, 500)
            psi = rng.uniform(0, math.pi, 500)
            value = model.q_integrand(radius, psi, params)
            slack = 1e-9 * (1 + numpy.abs(value))
            self.assertTrue(numpy.all(
                value <= model.q_upper_bound(radius, params) + slack))
            self.assertTrue(numpy.all(
                value >= model.q_lower_bound(radius, params) - slack))

    def test_bounds_sharp(self):
        params = Params(0.5, 0, 1, 3, 1)
        psi = numpy.linspace(0, math.pi, 200001)
        values = model.q_integrand(2.0, psi, params)
        self.assertAlmostEqual(values.max(),
                               model.q_upper_bound(2.0, params), places=6)
        self.assertAlmostEqual(values.min(),
                               model.q_lower_bound(2.0, params), places=6)

    def test_bounded_above(self):
        self.assertTrue(model.q_bounded_above(Params(0, 0, 1, 1.7, 1)))
        self.assertTrue(model.q_bounded_above(Params(0, 0, 1, -1.7, 1)))
        self.assertFalse(model.q_bounded_above(Params(0, 0, 1, 1.8, 1)))
        # for |b| <= sqrt(3) a the upper bound never exceeds mu
        params = Params(0.3, 0, 1, 1.7, 1)
        radius = numpy.linspace(0.01, 10, 100)
        self.assertTrue(numpy.all(model.q_upper_bound(radius, params) <=
                                  params.mu))

    def test_periodic(self):
        params = Params(0.3, 0, 1.5, -2, 1)
        psi = numpy.linspace(0, math.pi, 17)
        numpy.testing.assert_allclose(
            model.q_integrand(1.3, psi, params),
            model.q_integrand(1.3, psi + math.pi, params), rtol=1e-12,
            atol=1e-12)


class Scaling(unittest.TestCase):

    def assertCanonical(self, actual, expected):
        for act, exp in zip(actual, expected):
            self.assertAlmostEqual(act, exp, places=12)

    def test_canonicalize(self):
        self.assertCanonical(model.canonicalize(Params(1, 3, 4, 8, 0.5)),
                             (1, 2, 1))
        self.assertCanonical(model.canonicalize(Params(2, 0, 1, 3, 2)),
                             (1, 3, 2))
        self.assertCanonical(model.canonicalize(Params(0, 0, 1, -5, 1)),
                             (0, 5, 1))
        self.assertRaises(DomainError, model.canonicalize,
                          Params(0, 0, 1, 1, 0))

    def test_canonical_params(self):
        form = model.canonicalize(Params(2, 7, 1, -3, 2))
        self.assertEqual(form.params(), Params(1, 0, 1, 3, 1))

    def test_rescale(self):
        params = Params(1, 0, 1, 1, 1)
        self.assertEqual(model.rescale(params, 1, 1), (params, 1))
        scaled, mult = model.rescale(params, 2, 1)
        self.assertCanonical(scaled, (2, 0, 2, 2, math.sqrt(2)))
        self.assertEqual(mult, 0.5)
        scaled, mult = model.rescale(Params(-1, 0, 1, 1, 1), 1, 2)
        self.assertCanonical(scaled, (-1, 0, 0.25, 0.25, 2))
        self.assertEqual(mult, 1)
        self.assertRaises(DomainError, model.rescale, params, 0, 1)
        self.assertRaises(DomainError, model.rescale, params, 1, -1)

    def test_rescale_canonicalize_consistency(self):
        rng = numpy.random.default_rng(3)
        for _ in range(100):
            params = Params(rng.uniform(-5, 5), rng.uniform(-5, 5),
                            rng.uniform(0.1, 5), rng.uniform(-10, 10),
                            rng.uniform(0.1, 3))
            time_scale, space_scale = rng.uniform(0.1, 10, 2)
            scaled, mult = model.rescale(params, time_scale, space_scale)
            first = model.canonicalize(params)
            second = model.canonicalize(scaled)
            self.assertAlmostEqual(first.mu_hat, second.mu_hat, delta=1e-12 *
                                   (1 + abs(first.mu_hat)))
            self.assertAlmostEqual(first.b_hat, second.b_hat, delta=1e-12 *
                                   (1 + first.b_hat))
            self.assertAlmostEqual(first.multiplier,
                                   mult * second.multiplier,
                                   delta=1e-12 * first.multiplier)

    def test_normalize_mu(self):
        params, mult = model.normalize_mu(Params(-4, 2, 1, 3, 2))
        self.assertEqual(params.mu, -1)
        self.assertEqual((params.a, params.b), (1, 3))
        self.assertAlmostEqual(params.sigma, 0.5)
        self.assertAlmostEqual(params.omega, 0.5)
        self.assertAlmostEqual(mult, 4)
        self.assertRaises(DomainError, model.normalize_mu,
                          Params(0, 0, 1, 1, 1))


if __name__ == '__main__':
    unittest.main()
