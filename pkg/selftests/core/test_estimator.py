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

import math
import unittest
from unittest import mock

import numpy

from hopflyap import estimator, sde
from hopflyap.exceptions import DomainError, NumericalBlowup
from hopflyap.model import Params

from . import short_config


def fake_sample(value, seed=0, biased=False):
    return sde.FtleSample(value, 20.0, seed, 1e-2, 2000, 0, biased, None)


class Batches(unittest.TestCase):

    def test_combine(self):
        est = estimator._combine([fake_sample(_) for _ in (1.0, 2.0, 3.0)],
                                 "polar", 5)
        self.assertEqual(est.mean, 2.0)
        self.assertAlmostEqual(est.stderr, 1 / math.sqrt(3))
        self.assertEqual(est.n_batches, 3)
        self.assertEqual(est.total_steps, 6000)
        self.assertEqual(est.method, "polar")
        self.assertEqual(est.seed, 5)
        self.assertFalse(est.reflections_flagged)
        est = estimator._combine([fake_sample(1.0),
                                  fake_sample(1.0, biased=True)], "frame", 5)
        self.assertTrue(est.reflections_flagged)
        self.assertEqual(est.stderr, 0)

    def test_batch_seeds(self):
        cfg = short_config()
        seen = []

        def simulate(params, batch_cfg):
            seen.append(batch_cfg.seed)
            return fake_sample(float(batch_cfg.seed % 7), batch_cfg.seed)

        with mock.patch.dict(estimator.SIMULATORS, {"cartesian": simulate}):
            est = estimator.estimate_lyapunov(Params(1, 0, 1, 0, 1), cfg,
                                              n_batches=4, threads=1)
        self.assertEqual(seen, [sde.derive_seed(cfg.seed, i)
                                for i in range(4)])
        self.assertEqual(est.mean, numpy.mean([_ % 7 for _ in seen]))

    def test_thread_independence(self):
        cfg = short_config()
        params = Params(1, 0, 1, 2, 1)
        first = estimator.estimate_lyapunov(params, cfg, "polar", 4, 1)
        second = estimator.estimate_lyapunov(params, cfg, "polar", 4, 3)
        self.assertEqual(first, second)

    def test_few_batches(self):
        with self.assertRaises(DomainError) as exc:
            estimator.estimate_lyapunov(Params(1, 0, 1, 0, 1), short_config(),
                                        n_batches=1)
        self.assertEqual(exc.exception.field, "batches")

    def test_unknown_method(self):
        with self.assertRaises(DomainError) as exc:
            estimator.estimate_lyapunov(Params(1, 0, 1, 0, 1), short_config(),
                                        "spherical")
        self.assertEqual(exc.exception.field, "method")

    def test_blowup_batch(self):
        def simulate(params, batch_cfg):
            if batch_cfg.seed == sde.derive_seed(42, 2):
                raise NumericalBlowup("boom", step=10)
            return fake_sample(0.0)

        with mock.patch.dict(estimator.SIMULATORS, {"cartesian": simulate}):
            with self.assertRaises(NumericalBlowup) as exc:
                estimator.estimate_lyapunov(Params(1, 0, 1, 0, 1),
                                            short_config(), n_batches=4,
                                            threads=1)
        self.assertEqual(exc.exception.batch, 2)
        self.assertEqual(exc.exception.step, 10)
        self.assertIn("Batch 2", str(exc.exception))

    def test_linear(self):
        est = estimator.estimate_linear2d([[-1, 0], [0, -2]],
                                          numpy.zeros((2, 2)),
                                          short_config(), 2, 1)
        self.assertEqual(est.method, "linear2d")
        self.assertAlmostEqual(est.mean, math.log(0.99) / 0.01, places=9)

    def test_as_dict(self):
        est = estimator._combine([fake_sample(1.0), fake_sample(3.0)],
                                 "cartesian", 1)
        data = est.as_dict("x_")
        self.assertEqual(data["x_mean"], 2.0)
        self.assertEqual(sorted(data), sorted("x_" + _ for _ in est._fields))


class Reports(unittest.TestCase):

    def setUp(self):
        self.calls = []

        def estimate(params, cfg, method="cartesian", n_batches=16,
                     threads=None):
            self.calls.append((params, cfg.seed, method))
            return estimator.FtleEstimate(1.0, 0.1,
                                          n_batches, method, 0, False, 0.01,
                                          20.0, cfg.seed)

        patcher = mock.patch.object(estimator, "estimate_lyapunov", estimate)
        patcher.start()
        self.addCleanup(patcher.stop)

    def test_z_score(self):
        first = estimator.FtleEstimate(1.0, 0.3, 2, "a", 0, False, 0, 0, 0)
        self.assertEqual(estimator.z_score(first, first), 0)
        second = first._replace(mean=2.0, stderr=0.4)
        self.assertAlmostEqual(estimator.z_score(first, second), 2.0)
        self.assertEqual(estimator.z_score(first._replace(stderr=0),
                                           second._replace(stderr=0)),
                         math.inf)

    def test_cross_validate(self):
        report = estimator.cross_validate(Params(1, 0, 1, 2, 1),
                                          short_config(), 4, 1)
        self.assertEqual(list(report["estimates"]), list(estimator.METHODS))
        self.assertEqual(list(report["z_scores"]),
                         ["cartesian/polar", "cartesian/frame",
                          "polar/frame"])
        self.assertEqual(report["max_z"], 0)

    def test_omega(self):
        cfg = short_config()
        report = estimator.omega_invariance_check(Params(1, 0, 1, 2, 1), cfg,
                                                  [0, 5, 10], 4)
        self.assertEqual([_[0].omega for _ in self.calls], [0, 5, 10])
        self.assertEqual(len({_[1] for _ in self.calls}), 3)
        self.assertEqual(len(report["z_scores"]), 3)
        self.calls.clear()
        estimator.omega_invariance_check(Params(1, 0, 1, 2, 1), cfg, [0, 5],
                                         4, shared_seed=True)
        self.assertEqual({_[1] for _ in self.calls}, {cfg.seed})
        with self.assertRaises(DomainError) as exc:
            estimator.omega_invariance_check(Params(1, 0, 1, 2, 1), cfg, [1])
        self.assertEqual(exc.exception.field, "omegas")

    def test_reflection(self):
        cfg = short_config()
        report = estimator.reflection_check(Params(1, 0, 1, 2, 1), cfg, 4)
        self.assertEqual([_[0].b for _ in self.calls], [2, -2])
        self.assertNotEqual(self.calls[0][1], self.calls[1][1])
        self.assertEqual(report["z"], 0)

    def test_scaling(self):
        params = Params(4, 0, 2, 2, 1)
        report = estimator.scaling_check(params, short_config(), 4)
        form = report["form"]
        self.assertEqual(self.calls[1][0], form.params())
        self.assertAlmostEqual(report["canonical"].mean, form.multiplier)
        self.assertAlmostEqual(report["canonical"].stderr,
                               0.1 * form.multiplier)


class Agreement(unittest.TestCase):

    """Estimates of real (reduced horizon) simulations"""

    def test_cross_validate(self):
        cfg = sde.SimConfig.desk(n_steps=250000, seed=11)
        for params in (Params(0, 0, 1, 3, 1), Params(1, 0, 1, 1, 0.5)):
            report = estimator.cross_validate(params, cfg, 16)
            self.assertLessEqual(report["max_z"], 4,
                                 (params, report["z_scores"]))
            for est in report["estimates"].values():
                self.assertLess(est.mean, 0, (params, est))

    def test_large_shear(self):
        params = Params(1, 0, 1, 40, 0.05)
        cfg = sde.SimConfig.desk(n_steps=200000, seed=5)
        cartesian = estimator.estimate_lyapunov(params, cfg, "cartesian", 8)
        polar = estimator.estimate_lyapunov(params, cfg, "polar", 8)
        self.assertTrue(math.isfinite(cartesian.mean))
        self.assertLessEqual(estimator.z_score(cartesian, polar), 4,
                             (cartesian, polar))
