# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import argparse
import os

import pytest

from sqip.lib.errors import ParameterError
from sqip.lib.util import (
    atomic_write,
    call_using_args,
    parse_bool,
    parse_int_list,
    read_key_value_file,
)


@pytest.mark.parametrize("text", ["true", "Yes", "1", "on"])
def test_parse_bool_true(text):
    assert parse_bool(text) is True


@pytest.mark.parametrize("text", ["false", "No", "0", "off"])
def test_parse_bool_false(text):
    assert parse_bool(text) is False


def test_parse_bool_rejects_garbage():
    with pytest.raises(argparse.ArgumentTypeError):
        parse_bool("maybe")


def test_parse_int_list():
    assert parse_int_list("40,80, 160") == [40, 80, 160]
    with pytest.raises(argparse.ArgumentTypeError):
        parse_int_list("40,eighty")


def test_call_using_args_prefers_overrides():
    def f(a, b=2):
        return a, b

    args = argparse.Namespace(a=1, b=5, unrelated=9)
    assert call_using_args(f, args) == (1, 5)
    assert call_using_args(f, args, b=7) == (1, 7)


def test_read_key_value_file(tmp_path):
    path = tmp_path / "study.cfg"
    path.write_text("# Table 1\nproblem = test1\n--n-list = 40,80  # coarse\n\nqip=Q2\n")
    assert read_key_value_file(str(path)) == {
        "problem": "test1",
        "n_list": "40,80",
        "qip": "Q2",
    }


def test_read_key_value_file_rejects_bad_line(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("problem test1\n")
    with pytest.raises(ParameterError):
        read_key_value_file(str(path))


def test_atomic_write_replaces_and_cleans_up(tmp_path):
    path = tmp_path / "out" / "report.csv"
    with atomic_write(str(path)) as f:
        f.write("a,b\n")
    assert path.read_text() == "a,b\n"
    with pytest.raises(RuntimeError):
        with atomic_write(str(path)) as f:
            f.write("partial")
            raise RuntimeError("interrupted")
    assert path.read_text() == "a,b\n"
    assert os.listdir(path.parent) == ["report.csv"]
