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
Stability diagram of lambda(mu, 1, b, 1) in the (mu, b) half plane
"""

import collections
import csv
import io
import logging
import math
import struct

import numpy

from . import analytic, estimator, sde, utils
from .exceptions import AmbiguityError, BracketError, DomainError
from .model import Params

LOG = logging.getLogger(__name__)

PROVABLY_NEGATIVE = "provably_negative"
NO_CERTIFICATE = "none"

#: Exact CSV header of the diagram files
CSV_HEADER = ("mu", "b", "lambda", "stderr", "certificate", "ce_reference",
              "seed", "dt", "steps", "batches")

#: A sign is resolved once |mean| exceeds this many standard errors
SIGN_SIGMAS = 3.0
#: Maximal number of batch-count doublings at an ambiguous point
MAX_DOUBLINGS = 4
#: Integrator of the grid scans and zero searches
DEFAULT_METHOD = "polar"


class GridSpec(collections.namedtuple("GridSpec",
                                      ("mu_min", "mu_max", "mu_steps",
                                       "b_min", "b_max", "b_steps"))):

    """Rectangular (mu, b) grid, both axes sampled by linspace"""

    __slots__ = ()

    def validate(self):
        """
        :return: self
        :raise DomainError: naming the offending field
        """
        for name in ("mu_min", "mu_max", "b_min", "b_max"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError("%s must be finite" % name, name)
        for name in ("mu_steps", "b_steps"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DomainError("%s must be a positive integer, got %s"
                                  % (name, value), name)
        if self.mu_min > self.mu_max:
            raise DomainError("mu_min must be <= mu_max", "mu_max")
        if self.b_min < 0:
            raise DomainError("b_min must be >= 0, got %s" % self.b_min,
                              "b_min")
        if self.b_min > self.b_max:
            raise DomainError("b_min must be <= b_max", "b_max")
        return self


class DiagramPoint(collections.namedtuple("DiagramPoint",
                                          ("mu", "b", "lambda_hat", "stderr",
                                           "certificate", "ce_reference",
                                           "seed", "dt", "steps", "batches",
                                           "error"))):

    """
    One estimated cell of the diagram

    ``error`` holds the message of a failed estimate (lambda_hat and stderr
    are NaN then); it is not part of the CSV.
    """

    __slots__ = ()

    def __new__(cls, mu, b, lambda_hat, stderr, certificate, ce_reference,
                seed, dt, steps, batches, error=None):
        return super().__new__(cls, mu, b, lambda_hat, stderr, certificate,
                               ce_reference, seed, dt, steps, batches, error)


def grid_points(spec):
    """
    :return: list of (mu, b) in row-major order (by mu, then b)
    """
    spec.validate()
    mus = numpy.linspace(spec.mu_min, spec.mu_max, int(spec.mu_steps))
    bs = numpy.linspace(spec.b_min, spec.b_max, int(spec.b_steps))
    return [(float(mu), float(b)) for mu in mus for b in bs]


def diagram_params(mu, b):
    """Params of a diagram cell (a = sigma = 1, omega = 0)"""
    return Params(mu, 0.0, 1.0, b, 1.0)


def classify(mu, b):
    """
    :return: PROVABLY_NEGATIVE when the negativity certificate holds,
             NO_CERTIFICATE otherwise
    """
    if analytic.negativity_certificate(diagram_params(mu, b)):
        return PROVABLY_NEGATIVE
    return NO_CERTIFICATE


def ce_reference(mu, b):
    """Distance b - mu sqrt(2 c*) to the large-mu zero line, NaN for mu <= 0"""
    if mu <= 0:
        return math.nan
    return b - mu * analytic.ce_slope()


def scan_grid(spec, cfg, n_batches=16, method=DEFAULT_METHOD, threads=None):
    """
    Estimate lambda on every cell of the grid

    Cell k uses the master seed derive_seed(cfg.seed, k). Cells run
    concurrently; a failing cell is recorded in its point and the scan
    goes on.

    :return: list of DiagramPoint in row-major order
    """
    sde.validate_config(cfg)
    cells = list(enumerate(grid_points(spec)))

    def evaluate(cell):
        index, (mu, b) = cell
        seed = sde.derive_seed(cfg.seed, index)
        certificate = classify(mu, b)
        try:
            est = estimator.estimate_lyapunov(diagram_params(mu, b),
                                              cfg._replace(seed=seed),
                                              method, n_batches, threads=1)
        except Exception as exc:    # pylint: disable=W0703
            LOG.error("Cell mu=%s b=%s failed: %s", mu, b, exc)
            return DiagramPoint(mu, b, math.nan, math.nan, certificate,
                                ce_reference(mu, b), seed, cfg.dt,
                                int(cfg.n_steps), int(n_batches), str(exc))
        LOG.debug("Cell mu=%s b=%s: %s +- %s", mu, b, est.mean, est.stderr)
        return DiagramPoint(mu, b, est.mean, est.stderr, certificate,
                            ce_reference(mu, b), seed, est.dt,
                            est.total_steps // est.n_batches, est.n_batches)

    return utils.parallel_map(evaluate, cells, threads)


def _float_key(value):
    """Non-negative integer carrying the bits of a float64"""
    return struct.unpack("<Q", struct.pack("<d", float(value)))[0]


class _SignOracle:

    """CI-gated sign of lambda(mu, 1, b, 1) with batch doubling"""

    def __init__(self, mu, cfg, n_batches, method, threads):
        self.mu = mu
        self.cfg = cfg
        self.n_batches = int(n_batches)
        self.method = method
        self.threads = threads

    def estimate(self, b, n_batches):
        """Estimate at b with a seed depending on (master seed, b) only"""
        cfg = self.cfg._replace(seed=sde.derive_seed(self.cfg.seed,
                                                     _float_key(b)))
        return estimator.estimate_lyapunov(diagram_params(self.mu, b), cfg,
                                           self.method, n_batches,
                                           self.threads)

    def sign(self, b):
        """
        :return: tuple (sign, estimate); sign is 0 when it stayed ambiguous
                 after MAX_DOUBLINGS doublings
        """
        n_batches = self.n_batches
        for doubling in range(MAX_DOUBLINGS + 1):
            est = self.estimate(b, n_batches)
            if abs(est.mean) > SIGN_SIGMAS * est.stderr:
                return (1 if est.mean > 0 else -1), est
            if doubling < MAX_DOUBLINGS:
                n_batches *= 2
                LOG.info("mu=%s b=%s ambiguous (%s +- %s), doubling batches "
                         "to %s", self.mu, b, est.mean, est.stderr, n_batches)
        return 0, est


def find_zero_b(mu, b_lo, b_hi, cfg, n_batches=16, tol_b=0.5,
                method=DEFAULT_METHOD, threads=None, strict=False):
    """
    Locate the sign change of lambda(mu, 1, b, 1) in b by bisection

    :param mu: fixed mu
    :param b_lo: lower bracket
    :param b_hi: upper bracket
    :param tol_b: final bracket width
    :param strict: raise AmbiguityError instead of accepting the sign of
                   the mean at a midpoint that stayed ambiguous
    :return: midpoint of the final bracket
    :raise BracketError: when the brackets are not resolved into opposite
                         signs
    """
    for name, value in (("mu", mu), ("b_lo", b_lo), ("b_hi", b_hi),
                        ("tol", tol_b)):
        if not math.isfinite(value):
            raise DomainError("%s must be finite" % name, name)
    if not tol_b > 0:
        raise DomainError("tol must be > 0, got %s" % tol_b, "tol")
    if not b_lo < b_hi:
        raise DomainError("b_lo must be < b_hi (%s, %s)" % (b_lo, b_hi),
                          "b_lo")
    sde.validate_config(cfg)
    oracle = _SignOracle(mu, cfg, n_batches, method, threads)
    lo_sign, lo_est = oracle.sign(b_lo)
    hi_sign, hi_est = oracle.sign(b_hi)
    if not lo_sign or not hi_sign or lo_sign == hi_sign:
        raise BracketError("Bracket [%s, %s] at mu=%s is not resolved into "
                           "opposite signs (%s +- %s, %s +- %s)"
                           % (b_lo, b_hi, mu, lo_est.mean, lo_est.stderr,
                              hi_est.mean, hi_est.stderr))
    while b_hi - b_lo > tol_b:
        mid = 0.5 * (b_lo + b_hi)
        sign, est = oracle.sign(mid)
        if not sign:
            if strict:
                raise AmbiguityError("Sign of lambda at mu=%s b=%s stayed "
                                     "ambiguous (%s +- %s)"
                                     % (mu, mid, est.mean, est.stderr))
            sign = 1 if est.mean > 0 else -1
            LOG.warning("Accepting sign %+d of the mean at mu=%s b=%s "
                        "(%s +- %s)", sign, mu, mid, est.mean, est.stderr)
        if sign == lo_sign:
            b_lo = mid
        else:
            b_hi = mid
        LOG.info("mu=%s zero bracket [%s, %s]", mu, b_lo, b_hi)
    return 0.5 * (b_lo + b_hi)


def _format(value):
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def write_csv(points, path):
    """
    Write the diagram points in scan order

    :raise OutputError: naming the path
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for point in points:
        writer.writerow([_format(point.mu), _format(point.b),
                         _format(float(point.lambda_hat)),
                         _format(float(point.stderr)), point.certificate,
                         _format(float(point.ce_reference)), point.seed,
                         _format(float(point.dt)), point.steps,
                         point.batches])
    utils.write_file(path, out.getvalue())


def read_csv(path):
    """
    Parse a file produced by :func:`write_csv`

    :return: list of DiagramPoint
    :raise ValueError: when the header does not match
    """
    with open(path, "r", encoding="utf-8", newline="") as fd_csv:
        reader = csv.reader(fd_csv)
        header = next(reader, None)
        if tuple(header or ()) != CSV_HEADER:
            raise ValueError("Unexpected header %s in %s" % (header, path))
        return [DiagramPoint(float(row[0]), float(row[1]), float(row[2]),
                             float(row[3]), row[4], float(row[5]),
                             int(row[6]), float(row[7]), int(row[8]),
                             int(row[9]))
                for row in reader if row]
