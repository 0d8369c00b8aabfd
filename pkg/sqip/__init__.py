# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""Spline quasi-interpolating projection methods for Urysohn integral equations."""

__version__ = "0.1.0"
