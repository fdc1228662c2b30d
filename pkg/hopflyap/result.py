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
# Based on: https://github.com/avocado-framework/avocado/blob/master/avocado
#           /plugins/xunit.py

import datetime
import logging
import string
from xml.dom.minidom import Document  # nosec

from . import utils

# Check statuses
PASS = 0
FAIL = -1
ERROR = -2

STATUS_MAP = {PASS: 'PASS',
              FAIL: 'FAIL',
              ERROR: 'ERROR'}

PRINTABLE = string.ascii_letters + string.digits + string.punctuation + '\n\r '

LOG = logging.getLogger(__name__)


class CheckResult:
    """Outcome of a single verification check"""

    __slots__ = ("status", "classname", "testname", "value", "expected",
                 "details")

    def __init__(self, status, name, value=None, expected=None,
                 details=None):
        if status not in STATUS_MAP:
            raise ValueError("Unknown status %s" % status)
        self.status = status
        name = name.rsplit('/', 1)
        if len(name) == 2:
            self.classname, self.testname = name
        elif name[0]:
            self.classname = "<undefined>"
            self.testname = name[0]
        else:
            raise ValueError("No check name specified")
        self.value = value
        self.expected = expected
        self.details = details

    @property
    def name(self):
        """Full check name"""
        return "%s/%s" % (self.classname, self.testname)

    def as_dict(self):
        """JSON friendly representation"""
        return {"name": self.name, "status": STATUS_MAP[self.status],
                "value": self.value, "expected": self.expected,
                "details": self.details}

    def __str__(self):
        if self.details:
            return "%s: %s (%s)" % (STATUS_MAP[self.status], self.name,
                                    self.details)
        return "%s: %s" % (STATUS_MAP[self.status], self.name)


class SuiteResults:
    """Ordered collection of CheckResult"""

    def __init__(self, suite, seed=None):
        self.suite = suite
        self.seed = seed
        self.records = []

    def add(self, record):
        """Append a record and log it"""
        self.records.append(record)
        if record.status == PASS:
            LOG.info("%s", record)
        else:
            LOG.error("%s", record)

    @property
    def failures(self):
        """Records that did not pass"""
        return [record for record in self.records if record.status != PASS]

    def table(self):
        """Human readable table of the records"""
        def _value(value):
            if isinstance(value, float):
                return "%.6g" % value
            return "" if value is None else str(value)

        return utils.tabular_output(
            [[STATUS_MAP[record.status], record.name, _value(record.value),
              _value(record.expected)] for record in self.records],
            ["STATUS", "CHECK", "VALUE", "EXPECTED"])

    def to_json(self):
        """Deterministic JSON (no timing information)"""
        return utils.dump_json({"suite": self.suite, "seed": self.seed,
                                "checks": [record.as_dict()
                                           for record in self.records]})

    def get_xunit(self):
        """
        xUnit XML report of all records

        :return: UTF-8 encoded XML document
        """

        def _str(text):
            return ''.join(_ if _ in PRINTABLE else "\\x%02x" % ord(_)
                           for _ in str(text))

        document = Document()
        testsuite = document.createElement('testsuite')
        testsuite.setAttribute('name', 'hopflyap-%s' % _str(self.suite))
        testsuite.setAttribute('timestamp',
                               _str(datetime.datetime.now().isoformat()))
        document.appendChild(testsuite)
        errors = failures = 0
        for record in self.records:
            testcase = document.createElement('testcase')
            testcase.setAttribute('classname', _str(record.classname))
            testcase.setAttribute('name', _str(record.testname))
            testcase.setAttribute('time', "0.000")
            if record.status != PASS:
                if record.status == FAIL:
                    failures += 1
                    element_type = 'failure'
                else:
                    errors += 1
                    element_type = 'error'
                element = document.createElement(element_type)
                element.setAttribute('type', element_type)
                element.setAttribute('message', _str(record.details or
                                                     record.value))
                testcase.appendChild(element)
            testsuite.appendChild(testcase)
        testsuite.setAttribute('tests', str(len(self.records)))
        testsuite.setAttribute('errors', str(errors))
        testsuite.setAttribute('failures', str(failures))
        testsuite.setAttribute('skipped', "0")
        testsuite.setAttribute('time', "0.000")
        return document.toprettyxml(encoding='UTF-8')

    def finish(self):
        """
        Report the overall status

        :return: 0 when all checks passed, 1 otherwise (also when no check
                 was performed)
        """
        failures = self.failures
        if failures:
            LOG.error("%s/%s checks of the %s suite failed", len(failures),
                      len(self.records), self.suite)
            return 1
        if not self.records:
            LOG.error("No checks performed")
            return 1
        LOG.info("All %s checks of the %s suite passed", len(self.records),
                 self.suite)
        return 0
