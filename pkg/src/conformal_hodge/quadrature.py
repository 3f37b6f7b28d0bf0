"""Polar quadrature and sample grids for the unit disk and annulus."""

from __future__ import annotations

import math
import warnings
from typing import NamedTuple

import numpy as np


class QuadratureSpec(NamedTuple):
    """Gauss-Legendre radial nodes x uniform (trapezoid) angular nodes."""

    n_radial: int = 64
    n_angular: int = 128


class QuadratureResolutionWarning(UserWarning):
    """Requested recovery degree exceeds what the quadrature resolves."""


def polar_nodes(spec: QuadratureSpec, r_inner: float = 0.0):
    """Nodes z and area weights w with sum w_i f(z_i) ~ integral of f dA."""
    x, wx = np.polynomial.legendre.leggauss(spec.n_radial)
    r = r_inner + (x + 1) * (1.0 - r_inner) / 2
    wr = wx * (1.0 - r_inner) / 2
    theta = 2 * math.pi * np.arange(spec.n_angular) / spec.n_angular
    wt = 2 * math.pi / spec.n_angular
    z = r[:, None] * np.exp(1j * theta)[None, :]
    w = (wr * r)[:, None] * np.full(spec.n_angular, wt)[None, :]
    return z.ravel(), w.ravel()


def disk_grid(n_radial=64, n_angular=128, closed=True):
    """Sample grid of the (closed) unit disk, radii equispaced including r=1."""
    if closed:
        r = np.linspace(0.0, 1.0, n_radial)
    else:
        r = (np.arange(n_radial) + 0.5) / n_radial
    theta = 2 * math.pi * np.arange(n_angular) / n_angular
    return (r[:, None] * np.exp(1j * theta)[None, :]).ravel()


def boundary_points(samples=256, radius=1.0):
    theta = 2 * math.pi * np.arange(samples) / samples
    return radius * np.exp(1j * theta)


def check_resolution(spec: QuadratureSpec, field_degree: int, out_degree: int):
    """Warn when moment recovery up to out_degree is not exact for the quadrature.

    Angular exactness needs n_angular > field_degree + out_degree (else modes
    alias); radial Gauss exactness needs 2*n_radial - 1 >= field_degree +
    out_degree + 1.
    """
    resolved = True
    if spec.n_angular <= field_degree + out_degree:
        resolved = False
    if 2 * spec.n_radial - 1 < field_degree + out_degree + 1:
        resolved = False
    if not resolved:
        warnings.warn(
            f"quadrature {spec.n_radial}x{spec.n_angular} does not exactly "
            f"resolve degree {out_degree} recovery from a degree-{field_degree} "
            "field; results are approximate",
            QuadratureResolutionWarning,
            stacklevel=3,
        )
    return resolved
