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
import shutil
import tempfile
import unittest

from hopflyap import sde


def short_config(**overrides):
    """Tiny SimConfig suitable for unit tests"""
    settings = dict(dt=1e-2, n_steps=2000, burn_in_steps=200, seed=42,
                    renorm_interval=16, r_floor=1e-3)
    settings.update(overrides)
    return sde.SimConfig(**settings)


class Selftest(unittest.TestCase):
    tmpdir = None
    maxDiff = None

    def setUp(self):
        self.tmpdir = tempfile.mkdtemp(prefix="hopflyap-selftest")

    def assertWithin(self, value, expected, sigmas, stderr, msg=None):
        """Check |value - expected| <= sigmas * stderr"""
        self.assertLessEqual(abs(value - expected), sigmas * stderr,
                             msg or "%s not within %s*%s of %s"
                             % (value, sigmas, stderr, expected))

    def tearDown(self):
        if self.tmpdir:
            shutil.rmtree(self.tmpdir)
