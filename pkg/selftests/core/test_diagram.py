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
Tests for the diagram.py module (the estimator is replaced by a linear
lambda = b - 9.1 with stderr 0.4/sqrt(n_batches))
"""

import math
import os
from unittest import mock

from hopflyap import analytic, diagram, estimator, sde
from hopflyap.exceptions import (AmbiguityError, BracketError, DomainError,
                                 NumericalBlowup)

from . import Selftest, short_config


class FakeEstimator:

    def __init__(self, zero=9.1, scale=0.4):
        self.zero = zero
        self.scale = scale
        self.calls = []
        self.methods = set()

    def __call__(self, params, cfg, method="cartesian", n_batches=16,
                 threads=None):
        self.calls.append((params.mu, params.b, cfg.seed, n_batches))
        self.methods.add(method)
        if params.b < 0:
            raise NumericalBlowup("negative shear", step=1)
        return estimator.FtleEstimate(params.b - self.zero,
                                      self.scale / math.sqrt(n_batches),
                                      n_batches, method, 100 * n_batches,
                                      False, cfg.dt, cfg.horizon, cfg.seed)


class DiagramTest(Selftest):

    def setUp(self):
        super().setUp()
        self.fake = FakeEstimator()
        patcher = mock.patch.object(estimator, "estimate_lyapunov",
                                    self.fake)
        patcher.start()
        self.addCleanup(patcher.stop)


class Grid(DiagramTest):

    def test_points(self):
        spec = diagram.GridSpec(-1, 1, 3, 0, 12, 2)
        self.assertEqual(diagram.grid_points(spec),
                         [(-1, 0), (-1, 12), (0, 0), (0, 12), (1, 0),
                          (1, 12)])

    def test_invalid(self):
        for spec, field in (((1, -1, 3, 0, 1, 2), "mu_max"),
                            ((0, 1, 0, 0, 1, 2), "mu_steps"),
                            ((0, 1, 2, -1, 1, 2), "b_min"),
                            ((0, 1, 2, 2, 1, 2), "b_max"),
                            ((0, float("inf"), 2, 0, 1, 2), "mu_max"),
                            ((0, 1, 2, 0, 1, 1.5), "b_steps")):
            with self.assertRaises(DomainError) as exc:
                diagram.GridSpec(*spec).validate()
            self.assertEqual(exc.exception.field, field, spec)

    def test_classify(self):
        self.assertEqual(diagram.classify(-1, 0), diagram.PROVABLY_NEGATIVE)
        self.assertEqual(diagram.classify(3, 0), diagram.PROVABLY_NEGATIVE)
        self.assertEqual(diagram.classify(-1, 12), diagram.NO_CERTIFICATE)

    def test_ce_reference(self):
        self.assertTrue(math.isnan(diagram.ce_reference(0, 3)))
        self.assertAlmostEqual(diagram.ce_reference(2, 10),
                               10 - 2 * analytic.ce_slope())

    def test_scan(self):
        cfg = short_config()
        spec = diagram.GridSpec(-1, 1, 3, 0, 12, 2)
        points = diagram.scan_grid(spec, cfg, 4, threads=3)
        self.assertEqual([(_.mu, _.b) for _ in points],
                         diagram.grid_points(spec))
        self.assertEqual([_.seed for _ in points],
                         [sde.derive_seed(cfg.seed, k) for k in range(6)])
        self.assertEqual([_.lambda_hat for _ in points],
                         [b - 9.1 for _, b in diagram.grid_points(spec)])
        self.assertEqual({_.batches for _ in points}, {4})
        self.assertEqual({_.steps for _ in points}, {100})
        self.assertEqual(points[0].certificate, diagram.PROVABLY_NEGATIVE)
        self.assertEqual(points[1].certificate, diagram.NO_CERTIFICATE)
        self.assertIsNone(points[0].error)
        self.assertEqual(self.fake.methods, {"polar"})

    def test_scan_failure(self):
        cfg = short_config()
        with mock.patch.object(diagram, "grid_points",
                               return_value=[(0.0, -1.0), (0.0, 1.0)]):
            with self.assertLogs("hopflyap.diagram", "ERROR"):
                points = diagram.scan_grid(
                    diagram.GridSpec(0, 0, 1, 0, 1, 2), cfg, 4, threads=1)
        self.assertTrue(math.isnan(points[0].lambda_hat))
        self.assertIn("negative shear", points[0].error)
        self.assertEqual(points[1].lambda_hat, 1.0 - 9.1)

    def test_csv(self):
        cfg = short_config()
        points = diagram.scan_grid(diagram.GridSpec(-1, 1, 2, 0, 12, 3), cfg,
                                   4, threads=1)
        path = os.path.join(self.tmpdir, "sub", "diagram.csv")
        diagram.write_csv(points, path)
        with open(path, encoding="utf-8") as fd_csv:
            lines = fd_csv.read().split("\n")
        self.assertEqual(lines[0], ",".join(diagram.CSV_HEADER))
        self.assertEqual(lines[-1], "")
        self.assertEqual(len(lines), 8)
        self.assertIn(",nan,", lines[1])
        read = diagram.read_csv(path)
        self.assertEqual(len(read), len(points))
        for got, exp in zip(read, points):
            self.assertEqual((got.mu, got.b, got.lambda_hat, got.seed,
                              got.steps, got.batches, got.certificate),
                             (exp.mu, exp.b, exp.lambda_hat, exp.seed,
                              exp.steps, exp.batches, exp.certificate))

    def test_csv_header(self):
        path = os.path.join(self.tmpdir, "bad.csv")
        with open(path, "w", encoding="utf-8") as fd_csv:
            fd_csv.write("mu,b\n1,2\n")
        self.assertRaises(ValueError, diagram.read_csv, path)


class Zero(DiagramTest):

    def test_bisection(self):
        cfg = short_config()
        root = diagram.find_zero_b(0.0, 6.0, 12.0, cfg, 16, 0.5)
        self.assertLessEqual(abs(root - 9.1), 0.25)
        self.assertEqual(self.fake.methods, {diagram.DEFAULT_METHOD})
        # batches are doubled at the midpoint 9 which starts ambiguous
        self.assertIn((0.0, 9.0, sde.derive_seed(cfg.seed,
                                                 diagram._float_key(9.0)),
                       256), self.fake.calls)

    def test_seed_by_b(self):
        cfg = short_config()
        diagram.find_zero_b(0.0, 6.0, 12.0, cfg, 16, 0.5)
        first = list(self.fake.calls)
        self.fake.calls.clear()
        diagram.find_zero_b(0.0, 6.0, 12.0, cfg, 16, 0.5, threads=4)
        self.assertEqual(first, self.fake.calls)
        seeds = {}
        for _, b_value, seed, _ in first:
            seeds.setdefault(b_value, set()).add(seed)
        for b_value, used in seeds.items():
            self.assertEqual(used, {sde.derive_seed(
                cfg.seed, diagram._float_key(b_value))})

    def test_ambiguous(self):
        self.fake.scale = 1.6   # 3 stderr stay above 0.1 even at 256 batches
        cfg = short_config()
        with self.assertLogs("hopflyap.diagram", "WARNING"):
            root = diagram.find_zero_b(0.0, 6.0, 12.0, cfg, 16, 0.5)
        self.assertLessEqual(abs(root - 9.1), 0.25)
        self.assertRaises(AmbiguityError, diagram.find_zero_b, 0.0, 6.0,
                          12.0, cfg, 16, 0.5, strict=True)

    def test_bracket(self):
        cfg = short_config()
        self.assertRaises(BracketError, diagram.find_zero_b, 0.0, 10.0,
                          12.0, cfg)
        self.assertRaises(BracketError, diagram.find_zero_b, 0.0, 1.0, 2.0,
                          cfg)

    def test_invalid(self):
        cfg = short_config()
        for args, field in (((0.0, 5.0, 5.0), "b_lo"),
                            ((float("nan"), 1.0, 5.0), "mu"),
                            ((0.0, 1.0, float("inf")), "b_hi")):
            with self.assertRaises(DomainError) as exc:
                diagram.find_zero_b(*args, cfg=cfg)
            self.assertEqual(exc.exception.field, field)
        with self.assertRaises(DomainError) as exc:
            diagram.find_zero_b(0.0, 1.0, 5.0, cfg, tol_b=0)
        self.assertEqual(exc.exception.field, "tol")
