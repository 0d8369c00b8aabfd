# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import argparse
import contextlib
import inspect
import os
import tempfile
from typing import Iterator, List, TextIO

from sqip.lib.errors import ParameterError


def parse_bool(bool_str: str) -> bool:
    value = str(bool_str).strip().lower()
    if value in ("true", "t", "yes", "y", "1", "on"):
        return True
    if value in ("false", "f", "no", "n", "0", "off"):
        return False
    raise argparse.ArgumentTypeError(f"Not a boolean value: {bool_str!r}")


def parse_int_list(spec: str) -> List[int]:
    """Parse a comma separated list of integers, eg. "40,80,160"."""
    try:
        return [int(item) for item in str(spec).split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Not a list of integers: {spec!r}")


def call_using_args(function, args: argparse.Namespace, **overrides):
    """Call function, taking keyword arguments from an argparse namespace.

    Only parameters named in the function signature are taken from `args`;
    `overrides` win over namespace values.
    """
    signature = inspect.signature(function)
    kwargs = {}
    for name in signature.parameters:
        if name in overrides:
            kwargs[name] = overrides[name]
        elif hasattr(args, name):
            kwargs[name] = getattr(args, name)
    return function(**kwargs)


def read_key_value_file(path: str) -> dict:
    """Read a flat `key = value` file. Dashes in keys become underscores."""
    config = {}
    with open(path, "r") as cfile:
        for lineno, line in enumerate(cfile, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            key = key.strip().lstrip("-").replace("-", "_")
            config[key] = value.strip()
    return config


@contextlib.contextmanager
def atomic_write(path: str, mode: str = "w") -> Iterator[TextIO]:
    """Write to a temporary file next to `path`, then rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(
        dir=directory, prefix=".tmp-", suffix=os.path.basename(path)
    )
    try:
        with os.fdopen(fd, mode) as f:
            yield f
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
