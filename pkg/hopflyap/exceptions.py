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


class DomainError(ValueError):

    """
    Exception used when a parameter is outside of its domain
    """

    def __init__(self, msg, field=None):
        super().__init__(msg)
        self.field = field


class NumericalBlowup(RuntimeError):

    """
    Exception used when the integrator state becomes non-finite
    """

    def __init__(self, msg, step=None, batch=None):
        super().__init__(msg)
        self.step = step
        self.batch = batch


class QuadratureFailure(ArithmeticError):

    """
    Exception used when an integral does not reach the requested tolerance
    """

    def __init__(self, name, value, error):
        super().__init__("Quadrature of %s did not converge (value=%s, "
                         "error estimate=%s)" % (name, value, error))
        self.name = name
        self.value = value
        self.error = error


class BracketError(RuntimeError):

    """
    Exception used when bisection endpoints do not resolve into opposite signs
    """


class AmbiguityError(RuntimeError):

    """
    Exception used when a bisection midpoint sign stays unresolved
    """


class OutputError(OSError):

    """
    Exception used when writing of results fails
    """
