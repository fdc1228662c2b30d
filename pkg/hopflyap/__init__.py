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

from argparse import ArgumentParser
import logging
import math
import sys
import time

import numpy

from . import (analytic, config, diagram, estimator, exceptions, model,
               result, sde, utils, verify)
from .version import __version__

PROG = 'hopf-lyap'
DESCRIPTION = ("Top Lyapunov exponent of the noisy Hopf normal form: "
               "simulation, closed-form bounds and stability diagrams.")

# Command-line flag of every DomainError field which is not simply
# "--" + field with dashes
_FIELD_FLAGS = {"n_steps": "--steps",
                "burn_in_steps": "--burn-in"}

_REGIMES = {"large-b": analytic.predict_large_b,
            "small-sigma": analytic.predict_small_sigma,
            "ce": analytic.predict_ce,
            "stable-focus": analytic.predict_stable_focus}


def setup_logging(verbosity_arg, fmt=None):
    """
    Setup logging according to -v arg
    """
    if verbosity_arg >= 2:
        log_level = logging.DEBUG
    elif verbosity_arg >= 1:
        log_level = logging.INFO
    else:
        log_level = logging.WARN
    if fmt is None:
        fmt = '%(asctime)s.%(msecs)03d: %(name)-15s: %(message)s'

    logging.basicConfig(level=log_level, stream=sys.stderr,
                        format=fmt, datefmt="%H:%M:%S")
    # In case root logger already existed reset the root's log_level
    logging.getLogger('').setLevel(log_level)


def _flag(field):
    if field is None:
        return "input"
    return _FIELD_FLAGS.get(field, "--" + str(field).replace("_", "-"))


def _write_manifest(path, command, argv, parameters, seed, duration):
    """Store the RunManifest next to an output file"""
    utils.write_file(path + ".manifest.json",
                     utils.dump_json({"command": command,
                                      "argv": list(argv),
                                      "parameters": parameters,
                                      "seed": seed,
                                      "version": __version__,
                                      "duration": duration}))


class HopfLyap:

    """
    Command line tool exposing the simulations, the closed-form quantities,
    the stability diagram and the acceptance suites
    """

    def __init__(self):
        self.log = logging.getLogger("hopf-lyap")
        self.argv = None
        self.started = None

    @staticmethod
    def _parser():
        common = ArgumentParser(add_help=False)
        common.add_argument("--config", help="YAML or JSON file with "
                            "simulation settings (overridden by flags)")
        common.add_argument("--threads", type=int, help="Maximal number of "
                            "worker threads (default: $HOPF_LYAP_THREADS or "
                            "the number of CPUs)")
        common.add_argument("--verbose", "-v", action="count", default=0,
                            help="Increase the verbosity level")

        simulation = ArgumentParser(add_help=False)
        simulation.add_argument("--dt", type=float, help="Time step "
                                "(default %s)" % config.DEFAULTS["dt"])
        simulation.add_argument("--steps", type=int, help="Averaged steps "
                                "per batch (default %s)"
                                % config.DEFAULTS["steps"])
        simulation.add_argument("--burn-in", type=int, help="Discarded "
                                "steps per batch (default 10%% of steps)")
        simulation.add_argument("--batches", type=int, help="Number of "
                                "batches (default %s)"
                                % config.DEFAULTS["batches"])
        simulation.add_argument("--seed", type=int, help="Master seed "
                                "(default %s)" % config.DEFAULTS["seed"])
        simulation.add_argument("--renorm-interval", type=int, help="Steps "
                                "between tangent renormalizations")
        simulation.add_argument("--r-floor", type=float, help="Reflection "
                                "barrier of the polar/frame integrators")
        simulation.add_argument("--method", choices=estimator.METHODS +
                                ("all",), help="Integrator (default %s, "
                                "%s for diagram and zero)"
                                % (estimator.METHODS[0],
                                   diagram.DEFAULT_METHOD))

        def params(parser, omega=True, b=True, b_required=True):
            parser.add_argument("--mu", type=float, required=True)
            if omega:
                parser.add_argument("--omega", type=float, default=0.0)
            parser.add_argument("--a", type=float, required=True)
            if b:
                parser.add_argument("--b", type=float, required=b_required,
                                    default=0.0)
            parser.add_argument("--sigma", type=float, required=True)

        parser = ArgumentParser(prog=PROG, description=DESCRIPTION)
        parser.add_argument("--version", action="version",
                            version="%(prog)s " + __version__)
        commands = parser.add_subparsers(dest="command", metavar="COMMAND")
        commands.required = True

        cmd = commands.add_parser("lyapunov", parents=[common, simulation],
                                  help="Batch-means estimate of lambda")
        params(cmd)

        cmd = commands.add_parser("density", parents=[common],
                                  help="Stationary density of the radius")
        params(cmd, omega=False, b=False)
        cmd.add_argument("--r-max", type=float, required=True)
        cmd.add_argument("--points", type=int, required=True)
        cmd.add_argument("--out", required=True, help="Output CSV file")

        cmd = commands.add_parser("bounds", parents=[common],
                                  help="Rigorous negativity bound")
        params(cmd, omega=False, b_required=False)

        cmd = commands.add_parser("psi", parents=[common],
                                  help="Exponent Psi of the sheared linear "
                                  "SDE")
        group = cmd.add_mutually_exclusive_group(required=True)
        group.add_argument("--zeta", type=float)
        group.add_argument("--scan", type=float, nargs=3,
                           metavar=("ZMIN", "ZMAX", "N"))

        commands.add_parser("cstar", parents=[common],
                            help="Zero c* of Psi")

        cmd = commands.add_parser("predict", parents=[common],
                                  help="Asymptotic predictions of lambda")
        params(cmd, omega=False)
        cmd.add_argument("--regime", choices=sorted(_REGIMES))

        cmd = commands.add_parser("diagram", parents=[common, simulation],
                                  help="Stability diagram at a=sigma=1")
        for name in ("mu-min", "mu-max", "b-min", "b-max"):
            cmd.add_argument("--" + name, type=float, required=True)
        for name in ("mu-steps", "b-steps"):
            cmd.add_argument("--" + name, type=int, required=True)
        cmd.add_argument("--out", required=True, help="Output CSV file")

        cmd = commands.add_parser("zero", parents=[common, simulation],
                                  help="Zero of lambda(mu,1,b,1) in b")
        cmd.add_argument("--mu", type=float, required=True)
        cmd.add_argument("--b-lo", type=float, required=True)
        cmd.add_argument("--b-hi", type=float, required=True)
        cmd.add_argument("--tol", type=float, default=0.5)
        cmd.add_argument("--strict", action="store_true", help="Fail on "
                         "midpoints with an unresolved sign")

        cmd = commands.add_parser("verify", parents=[common],
                                  help="Run the acceptance suites")
        cmd.add_argument("--suite", choices=verify.SUITES, default="quick")
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--out", help="Write JSON results to this file")
        cmd.add_argument("--xunit", help="Write XUnit/JUnit results to "
                         "this file")
        return parser

    @staticmethod
    def _params(args):
        return model.validate(model.Params(args.mu, getattr(args, "omega", 0.0),
                                           args.a, getattr(args, "b", 0.0),
                                           args.sigma))

    @staticmethod
    def _settings(args):
        loaded = config.load_config(args.config) if args.config else {}
        overrides = {key: getattr(args, key, None) for key in config.DEFAULTS}
        settings = config.effective_settings(overrides, loaded)
        settings["threads"] = utils.get_threads(settings["threads"])
        if settings["batches"] < 2:
            raise exceptions.DomainError("at least 2 batches are required, "
                                         "got %s" % settings["batches"],
                                         "batches")
        return settings

    def _emit(self, data):
        sys.stdout.write(utils.dump_json(data))
        return 0

    def _duration(self):
        return round(time.time() - self.started, 3)

    def lyapunov(self, args, settings):
        """Batch-means estimate(s) of lambda"""
        params = self._params(args)
        cfg = config.sim_config(settings)
        out = dict(params.as_dict(), seed=cfg.seed)
        method = settings["method"] or estimator.METHODS[0]
        if method == "all":
            report = estimator.cross_validate(params, cfg,
                                              settings["batches"],
                                              settings["threads"])
            for name, est in report["estimates"].items():
                out.update(est.as_dict(name + "_"))
                del out[name + "_method"]
            for pair, value in report["z_scores"].items():
                out["z_" + pair.replace("/", "_")] = value
            out["max_z"] = report["max_z"]
        else:
            est = estimator.estimate_lyapunov(params, cfg, method,
                                              settings["batches"],
                                              settings["threads"])
            out.update(est.as_dict())
        return self._emit(out)

    def density(self, args, settings):
        """Tabulate the stationary density rho(r) into a CSV file"""
        density = analytic.DensityModel(args.mu, args.a, args.sigma)
        if not (math.isfinite(args.r_max) and args.r_max > 0):
            raise exceptions.DomainError("r-max must be > 0", "r_max")
        if args.points < 1:
            raise exceptions.DomainError("points must be >= 1", "points")
        radii = args.r_max * numpy.arange(1, args.points + 1) / args.points
        values = analytic.rho(density, radii)
        lines = ["r,rho"] + ["%.17g,%.17g" % pair
                             for pair in zip(radii, values)]
        utils.write_file(args.out, "\n".join(lines) + "\n")
        _write_manifest(args.out, "density", self.argv,
                        {"mu": args.mu, "a": args.a, "sigma": args.sigma,
                         "r_max": args.r_max, "points": args.points},
                        None, self._duration())
        return self._emit({"out": args.out, "points": args.points})

    def bounds(self, args, settings):
        """Negativity threshold, J value and upper bound"""
        params = self._params(args)
        z_value = params.mu / math.sqrt(2 * params.a * params.sigma ** 2)
        return self._emit({
            "z": z_value,
            "jhat_threshold_b": params.a * analytic.jhat(z_value),
            "j_value_at_b": analytic.bound_J(z_value,
                                             abs(params.b) / params.a),
            "lambda_upper_bound": analytic.lambda_upper_bound(params),
            "certificate": analytic.negativity_certificate(params),
            "b": params.b})

    def psi(self, args, settings):
        """Psi at a single zeta or over a linear scan"""
        if args.zeta is not None:
            return self._emit({"zeta": args.zeta,
                               "psi": analytic.psi_big(args.zeta)})
        low, high, count = args.scan
        if int(count) != count or count < 1:
            raise exceptions.DomainError("scan N must be a positive integer",
                                         "scan")
        zetas = [float(_) for _ in numpy.linspace(low, high, int(count))]
        return self._emit({"zeta": zetas,
                           "psi": [analytic.psi_big(_) for _ in zetas]})

    def cstar(self, args, settings):
        """The zero of Psi"""
        return self._emit({"c_star": analytic.c_star(),
                           "ce_slope": analytic.ce_slope()})

    def predict(self, args, settings):
        """Asymptotic predictions of one or all regimes"""
        params = self._params(args)
        if args.regime:
            return self._emit({"regime": args.regime,
                               "prediction": _REGIMES[args.regime](params)})
        out = {}
        for name, func in sorted(_REGIMES.items()):
            try:
                out[name.replace("-", "_")] = func(params)
            except exceptions.DomainError as details:
                self.log.debug("Regime %s does not apply: %s", name, details)
                out[name.replace("-", "_")] = None
        return self._emit(out)

    def _single_method(self, settings):
        if settings["method"] == "all":
            raise exceptions.DomainError("method 'all' is only supported by "
                                         "the lyapunov command", "method")
        return settings["method"] or diagram.DEFAULT_METHOD

    def diagram(self, args, settings):
        """Scan the (mu, b) grid into a CSV file"""
        spec = diagram.GridSpec(args.mu_min, args.mu_max, args.mu_steps,
                                args.b_min, args.b_max,
                                args.b_steps).validate()
        method = self._single_method(settings)
        cfg = config.sim_config(settings)
        points = diagram.scan_grid(spec, cfg, settings["batches"], method,
                                   settings["threads"])
        diagram.write_csv(points, args.out)
        _write_manifest(args.out, "diagram", self.argv,
                        dict(settings, method=method, **spec._asdict()),
                        cfg.seed, self._duration())
        return self._emit({"out": args.out, "points": len(points),
                           "failed": sum(1 for _ in points if _.error)})

    def zero(self, args, settings):
        """Bisect the zero of lambda(mu, 1, b, 1) in b"""
        method = self._single_method(settings)
        cfg = config.sim_config(settings)
        root = diagram.find_zero_b(args.mu, args.b_lo, args.b_hi, cfg,
                                   settings["batches"], args.tol, method,
                                   settings["threads"], args.strict)
        return self._emit({"mu": args.mu, "b_zero": root, "tol": args.tol,
                           "seed": cfg.seed})

    def verify(self, args, settings):
        """Run an acceptance suite"""
        seed = args.seed if args.seed is not None else settings["seed"]
        results = verify.run_suite(args.suite, seed, settings["threads"])
        sys.stderr.write(results.table() + "\n")
        if args.out:
            utils.write_file(args.out, results.to_json())
            _write_manifest(args.out, "verify", self.argv,
                            {"suite": args.suite}, seed, self._duration())
        if args.xunit:
            utils.write_file(args.xunit, results.get_xunit(), "wb")
        return results.finish()

    def __call__(self, argv=None):
        """
        Parse the arguments and run the sub-command

        :param argv: arguments (default sys.argv[1:])
        :return: exit code (0 success, 1 runtime error, 2 usage error)
        """
        self.argv = list(sys.argv[1:] if argv is None else argv)
        self.started = time.time()
        parser = self._parser()
        try:
            args = parser.parse_args(self.argv)
        except SystemExit as exc:
            return exc.code
        setup_logging(args.verbose, "%(levelname)-5s| %(message)s")
        try:
            settings = self._settings(args)
            return getattr(self, args.command)(args, settings)
        except exceptions.DomainError as details:
            self.log.error("argument %s: %s", _flag(details.field), details)
            return 2
        except (exceptions.NumericalBlowup, exceptions.QuadratureFailure,
                exceptions.BracketError, exceptions.AmbiguityError,
                OSError, ValueError, ArithmeticError) as details:
            self.log.debug("%s failed", args.command, exc_info=True)
            self.log.error("%s", details)
            return 1


def run(argv=None):
    """Run the hopf-lyap command line and return the exit code"""
    return HopfLyap()(argv)


def main():
    """Entry point of the hopf-lyap script"""
    sys.exit(run())
