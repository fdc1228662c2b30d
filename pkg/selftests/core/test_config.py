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

import os

from hopflyap import config
from hopflyap.exceptions import DomainError

from . import Selftest


class Config(Selftest):

    def _write(self, content, name="cfg.yaml"):
        path = os.path.join(self.tmpdir, name)
        with open(path, "w", encoding="utf-8") as fd_cfg:
            fd_cfg.write(content)
        return path

    def test_yaml(self):
        path = self._write("dt: 1e-2\nsteps: 5000.0\nmethod: polar\n")
        self.assertEqual(config.load_config(path),
                         {"dt": 0.01, "steps": 5000, "method": "polar"})

    def test_json(self):
        path = self._write('{"seed": 7, "batches": 4, "burn_in": null}',
                           "cfg.json")
        self.assertEqual(config.load_config(path),
                         {"seed": 7, "batches": 4, "burn_in": None})

    def test_empty(self):
        self.assertEqual(config.load_config(self._write("")), {})

    def test_invalid(self):
        for content in ("- 1\n- 2\n", "dt: [1\n", "speed: 1\n",
                        "steps: fast\n", "seed: 1.5\n", "dt: true\n",
                        "method: 1\n"):
            with self.assertRaises(DomainError) as exc:
                config.load_config(self._write(content))
            self.assertEqual(exc.exception.field, "config", content)

    def test_layers(self):
        settings = config.effective_settings(
            {"dt": 0.05, "seed": None, "method": None},
            {"dt": 0.1, "seed": 3, "steps": 100})
        self.assertEqual(settings["dt"], 0.05)
        self.assertEqual(settings["seed"], 3)
        self.assertEqual(settings["steps"], 100)
        self.assertIsNone(settings["method"])
        self.assertEqual(set(settings), set(config.DEFAULTS))
        self.assertEqual(config.effective_settings(), config.DEFAULTS)

    def test_sim_config(self):
        cfg = config.sim_config(config.effective_settings(
            {"steps": 1000, "dt": 0.01}))
        self.assertEqual(cfg.n_steps, 1000)
        self.assertEqual(cfg.burn_in_steps, 100)
        self.assertEqual(cfg.seed, config.DEFAULTS["seed"])
        cfg = config.sim_config(config.effective_settings({"burn_in": 0}))
        self.assertEqual(cfg.burn_in_steps, 0)
        with self.assertRaises(DomainError) as exc:
            config.sim_config(config.effective_settings({"dt": -1.0}))
        self.assertEqual(exc.exception.field, "dt")
