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
from concurrent import futures
import itertools
import json
import logging
import math
import os

from ..exceptions import DomainError, OutputError

#: Environment variable capping the worker threads
THREADS_ENV = "HOPF_LYAP_THREADS"


def write_file(path, content, mode='w'):
    """
    Write content to path (UTF-8, LF line endings), create the necessary
    upper dirs

    :raise OutputError: naming the path when anything goes wrong
    """
    try:
        dir_path = os.path.dirname(path)
        if dir_path:
            os.makedirs(dir_path, exist_ok=True)
        if 'b' in mode:
            with open(path, mode) as fd_path:
                fd_path.write(content)
        else:
            with open(path, mode, encoding='utf-8', newline='\n') as fd_path:
                fd_path.write(content)
    except OSError as exc:
        raise OutputError("Unable to write %s: %s" % (path, exc)) from exc
    logging.getLogger(__name__).info("Written %s", path)


def json_safe(value):
    """
    Turn non-finite floats into None (JSON null) recursively, everything
    else is passed through
    """
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(item) for item in value]
    return value


def dump_json(data):
    """Deterministic JSON (sorted keys, non-finite floats as null)"""
    return json.dumps(json_safe(data), sort_keys=True, indent=4) + "\n"


def get_threads(threads=None):
    """
    Resolve the worker concurrency

    Explicit value > $HOPF_LYAP_THREADS > os.cpu_count()

    :raise DomainError: for a non-positive or non-integer value
    """
    source = "threads"
    if threads is None:
        threads = os.environ.get(THREADS_ENV)
        source = THREADS_ENV
    if threads is None:
        return os.cpu_count() or 1
    try:
        value = int(threads)
    except (TypeError, ValueError):
        value = 0
    if value < 1 or str(value) != str(threads).strip():
        raise DomainError("%s must be a positive integer, got %r"
                          % (source, threads), "threads")
    return value


def parallel_map(func, items, threads=None):
    """
    Apply func to every item using a thread pool, results in item order

    The first exception (in item order) is re-raised.

    :param threads: worker threads (None => :func:`get_threads`)
    """
    items = list(items)
    workers = min(get_threads(threads), len(items)) or 1
    if workers == 1:
        return [func(item) for item in items]
    with futures.ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def iter_tabular_output(matrix, header=None):
    """
    Generator of aligned lines representing a list of rows

    Every column is padded to its widest cell; the last cell of a row is
    never padded and empty rows are skipped.

    :param matrix: list of rows (lists of cells)
    :param header: optional first row
    """
    rows = [[str(cell) for cell in row]
            for row in itertools.chain([header] if header else [], matrix)]
    widths = {}
    for row in rows:
        for i, cell in enumerate(row[:-1]):
            widths[i] = max(widths.get(i, 0), len(cell))
    for row in rows:
        if not row:
            continue
        cells = [cell.ljust(widths[i]) for i, cell in enumerate(row[:-1])]
        cells.append(row[-1])
        yield " ".join(cells).rstrip()


def tabular_output(matrix, header=None):
    """
    Pretty, aligned string representation of a list of rows

    :param matrix: list of rows (lists of cells)
    :param header: optional first row
    :return: the lines joined by unix line feeds
    """
    return "\n".join(iter_tabular_output(matrix, header))
