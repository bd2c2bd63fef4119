"""Named example graphs and the MACS covariance matrices."""

from __future__ import annotations

import numpy as np

from .graph import Admg
from .sem import CovMatrix


def _edges(text: str) -> list[tuple[str, str]]:
    return [tuple(e.split("-")) for e in text.split()]


def verma() -> Admg:
    return Admg("1234", _edges("1-2 2-3 3-4 1-3"), _edges("2-4"))


def gadget() -> Admg:
    return Admg("1234", _edges("1-3 2-4"), _edges("1-2 1-4 2-3"))


def cut_vertex_example() -> Admg:
    return Admg("123456", _edges("1-2 2-3 3-4 4-5 5-6 4-6"), _edges("1-4 1-3 2-5 2-6"))


def instrumental_variable() -> Admg:
    return Admg("123", _edges("1-2 2-3"), _edges("2-3"))


def double_treatment() -> Admg:
    return Admg("1234", _edges("1-2 2-3 3-4 1-3 2-4 1-4"), _edges("2-4"))


def double_verma() -> Admg:
    return Admg("01234", _edges("0-1 1-2 2-3 3-4 1-3"), _edges("2-4 0-2 0-3 0-4"))


def bidirected_triangle() -> Admg:
    return Admg("123", (), _edges("1-2 2-3 1-3"))


def macs() -> Admg:
    """1 baseline CD4, 2 and 3 later CD4 counts, 4 and 5 AZT doses."""
    return Admg("12345", _edges("1-2 2-3 1-4 2-5 4-2 5-3"), _edges("1-3 1-2 2-3"))


GRAPHS = {
    "verma": verma,
    "gadget": gadget,
    "cut-vertex": cut_vertex_example,
    "iv": instrumental_variable,
    "double-treatment": double_treatment,
    "double-verma": double_verma,
    "triangle": bidirected_triangle,
    "macs": macs,
}

# Printed to three decimals; standardized data, so the diagonal is 1.
MACS_SIGMA = CovMatrix("12345", np.array([
    [1.000, 0.835, 0.794, -0.025, -0.004],
    [0.835, 1.000, 0.853, -0.039, -0.029],
    [0.794, 0.853, 1.000, -0.058, -0.051],
    [-0.025, -0.039, -0.058, 1.000, 0.891],
    [-0.004, -0.029, -0.051, 0.891, 1.000],
]))

# After deleting 1->4, as printed. The (1,4) entry is not consistent with the
# rest: deleting the only trek source of 1 into 4 forces it to zero.
MACS_SIGMA_STAR_PRINTED = CovMatrix("12345", np.array([
    [1.000, 0.835, 0.793, -0.025, 0.018],
    [0.835, 0.999, 0.852, -0.018, -0.010],
    [0.793, 0.852, 0.999, -0.038, -0.033],
    [-0.025, -0.018, -0.038, 0.999, 0.891],
    [0.018, -0.010, -0.033, 0.891, 1.000],
]))

MACS_LAMBDA_14 = -0.0252
