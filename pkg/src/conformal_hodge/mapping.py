"""Conformally mapped disks: weighted inner products, kernel, projection, adjoint.

A ConformalMap is a holomorphic series phi: D -> U with nonvanishing
derivative.  The inverse is never represented as a series: every mapped
computation pulls back to the disk through phi (change of variables), and
pointwise kernel evaluation inverts phi by Newton iteration.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from . import series
from .series import (
    HolomorphicSeries,
    InnerProductValue,
    as_field,
    as_series,
    inner_product,
    multiply,
)
from .quadrature import boundary_points, disk_grid


class EmbeddingError(ValueError):
    """The candidate map fails the immersion or boundary-injectivity checks."""


class InversionError(RuntimeError):
    """Newton inversion of the map failed to converge (point likely outside)."""


class GramConditionWarning(UserWarning):
    """The weighted Gram system is ill-conditioned; results may lose accuracy."""


GRAM_CONDITION_LIMIT = 1e12


_GRID_CACHE = {}


def _cached_disk_grid(grid):
    if grid not in _GRID_CACHE:
        _GRID_CACHE[grid] = disk_grid(*grid, closed=True)
    return _GRID_CACHE[grid]


_NONADJACENT_CACHE = {}


def _nonadjacent_mask(samples):
    if samples not in _NONADJACENT_CACHE:
        idx = np.arange(samples)
        sep = np.minimum(np.abs(idx[:, None] - idx[None, :]),
                         samples - np.abs(idx[:, None] - idx[None, :]))
        _NONADJACENT_CACHE[samples] = sep > 1
    return _NONADJACENT_CACHE[samples]


class ConformalMap:
    """Holomorphic embedding of the unit disk given by a truncated series."""

    def __init__(self, phi, validate=True, grid=(64, 128), boundary_samples=256,
                 injectivity_tol=1e-12):
        self.phi = as_series(phi)
        self.phi_prime = self.phi.derivative()
        self._grid = grid
        self._caches = {}
        if validate:
            if self.min_deriv <= 0.0:
                raise EmbeddingError(
                    f"derivative vanishes on the sample grid (min |phi'| = {self.min_deriv})"
                )
            self.check_boundary_injectivity(boundary_samples, injectivity_tol)

    @property
    def min_deriv(self):
        """min |phi'| over a closed-disk sample grid (computed lazily, cached)."""
        if "min_deriv" not in self._caches:
            pts = _cached_disk_grid(self._grid)
            self._caches["min_deriv"] = float(
                np.min(np.abs(series.evaluate_grid(self.phi_prime.to_field(), pts)))
            )
        return self._caches["min_deriv"]

    @staticmethod
    def identity():
        return ConformalMap(HolomorphicSeries([0.0, 1.0]), validate=False)

    def check_boundary_injectivity(self, samples=256, tol=1e-12):
        pts = boundary_points(samples)
        img = series.evaluate_grid(self.phi.to_field(), pts)
        dist = np.abs(img[:, None] - img[None, :])
        close = (dist < tol) & _nonadjacent_mask(samples)
        if np.any(close):
            i, j = np.argwhere(close)[0]
            raise EmbeddingError(
                f"boundary images {i} and {j} nearly coincide (|dz| < {tol:g})"
            )
        return True

    def __call__(self, z):
        return self.phi(z)

    def invert(self, w, tol=1e-13, max_iter=50):
        """Solve phi(zeta) = w by Newton iteration seeded from a coarse grid."""
        seeds = self._caches.get("seeds")
        if seeds is None:
            seeds = disk_grid(9, 32, closed=True)
            self._caches["seeds"] = (seeds, series.evaluate_grid(self.phi.to_field(), seeds))
        seed_pts, seed_vals = self._caches["seeds"]
        z = complex(seed_pts[int(np.argmin(np.abs(seed_vals - w)))])
        for _ in range(max_iter):
            fz = self.phi(z) - w
            if abs(fz) <= tol * (1.0 + abs(w)):
                if abs(z) > 1.0 + 1e-9:
                    raise InversionError(
                        f"preimage {z:.6g} lies outside the closed disk"
                    )
                return z
            dz = self.phi_prime(z)
            if dz == 0:
                raise InversionError("derivative vanished during Newton iteration")
            z = z - fz / dz
        raise InversionError(
            f"Newton iteration did not converge for w = {w:.6g} "
            f"(point likely outside the image domain)"
        )

    # -- cached series helpers ------------------------------------------------

    def power(self, k, max_degree):
        """phi^k truncated at max_degree (cached)."""
        key = ("pow", k, max_degree)
        if key not in self._caches:
            if k == 0:
                out = HolomorphicSeries([1.0])
            else:
                out = (self.power(k - 1, max_degree) * self.phi).truncated(
                    max_degree, warn=False
                )
            self._caches[key] = out
        return self._caches[key]

    def weighted_basis(self, degree, max_degree):
        """Series phi' * phi^k for k = 0..degree, the pulled-back monomial frame."""
        key = ("basis", degree, max_degree)
        if key not in self._caches:
            self._caches[key] = [
                (self.phi_prime * self.power(k, max_degree)).truncated(
                    max_degree, warn=False
                )
                for k in range(degree + 1)
            ]
        return self._caches[key]

    def basis_matrix(self, degree, max_degree):
        """Rows are the coefficient vectors of phi' phi^k (padded to equal width)."""
        key = ("bmat", degree, max_degree)
        if key not in self._caches:
            basis = self.weighted_basis(degree, max_degree)
            width = max(b.degree for b in basis) + 1
            B = np.zeros((degree + 1, width), dtype=complex)
            for j, b in enumerate(basis):
                B[j, : len(b.coeffs)] = b.coeffs
            self._caches[key] = B
        return self._caches[key]

    def gram(self, degree, max_degree):
        """Hermitian Gram matrix G[j,k] = <<phi' phi^k, phi' phi^j>> on the disk."""
        key = ("gram", degree, max_degree)
        if key not in self._caches:
            B = self.basis_matrix(degree, max_degree)
            d = series.pair_constants(B.shape[1])
            self._caches[key] = ((B * d) @ B.conj().T).T
        return self._caches[key]

    def natural_cap(self, degree):
        """Truncation degree that keeps phi^degree * phi' exact."""
        return degree * max(self.phi.degree, 1) + self.phi_prime.degree

    def compose_with(self, xi: HolomorphicSeries, max_degree):
        """xi o phi truncated at max_degree (cached per coefficient tuple)."""
        key = ("compose", xi.coeffs, max_degree)
        if key not in self._caches:
            self._caches[key] = xi.compose(self.phi, max_degree)
        return self._caches[key]


def map_inner_product(mapping: ConformalMap, f, g) -> InnerProductValue:
    """Weighted pairing <<phi' f, phi' g>> for fields given in pulled-back coordinates."""
    f, g = as_field(f), as_field(g)
    dphi = mapping.phi_prime.to_field()
    cap_f = f.max_degree + dphi.max_degree
    cap_g = g.max_degree + dphi.max_degree
    return inner_product(
        multiply(dphi, f, max_degree=cap_f), multiply(dphi, g, max_degree=cap_g)
    )


def map_norm(mapping: ConformalMap, f) -> float:
    return math.sqrt(max(map_inner_product(mapping, f, f).real_value, 0.0))


def bergman_kernel_mapped(mapping: ConformalMap, z, zeta):
    """Kernel on the image domain via the inverse map psi:

    K_U(z, zeta) = K_D(psi(z), psi(zeta)) psi'(zeta) conj(psi'(z)).
    """
    from .disk import bergman_kernel_disk

    pz = mapping.invert(z)
    pzeta = mapping.invert(zeta)
    dpsi_z = 1.0 / mapping.phi_prime(pz)
    dpsi_zeta = 1.0 / mapping.phi_prime(pzeta)
    return bergman_kernel_disk(pz, pzeta) * dpsi_zeta * np.conj(dpsi_z)


def _solve_gram(mapping, rhs, degree, max_degree):
    G = mapping.gram(degree, max_degree)
    cond = np.linalg.cond(G)
    if cond > GRAM_CONDITION_LIMIT:
        warnings.warn(
            f"weighted Gram system condition estimate {cond:.3e} exceeds "
            f"{GRAM_CONDITION_LIMIT:.0e}",
            GramConditionWarning,
            stacklevel=3,
        )
    return np.linalg.solve(G, rhs)


def project_con_mapped(mapping: ConformalMap, f, degree, max_degree=None) -> HolomorphicSeries:
    """Orthogonal projection onto the mapped monomial span, in image coordinates.

    Solves the normal equations of the weighted inner product; the residual
    f minus the pulled-back projection is orthogonal to every basis pullback
    up to `degree`.
    """
    f = as_field(f)
    if max_degree is None:
        max_degree = max(mapping.natural_cap(degree), f.max_degree)
    dphi = mapping.phi_prime.to_field()
    wf = multiply(dphi, f, max_degree=f.max_degree + dphi.max_degree)
    B = mapping.basis_matrix(degree, max_degree)
    # <<wf, phi' phi^j>> pairs each (m, n) term against basis coefficient m-n
    rhs = np.zeros(degree + 1, dtype=complex)
    width = B.shape[1]
    for (m, n), c in wf.items():
        k = m - n
        if 0 <= k < width:
            rhs += c * (math.pi / (m + 1) + series._INNER_PRODUCT_FAULT) * B[:, k].conj()
    coeffs = _solve_gram(mapping, rhs, degree, max_degree)
    return HolomorphicSeries(coeffs)


def pullback(mapping: ConformalMap, xi, max_degree=None) -> HolomorphicSeries:
    """Compose a series on the image domain with phi (coordinates back on the disk)."""
    xi = as_series(xi)
    if max_degree is None:
        max_degree = mapping.natural_cap(xi.degree)
    return mapping.compose_with(xi, max_degree)


def adjoint_dz_mapped(mapping: ConformalMap, xi, degree, max_degree=None) -> HolomorphicSeries:
    """Adjoint of d/dz on the image domain, computed entirely on the disk.

    With A = z^2 phi' (xi o phi), the weighted right-hand sides reduce to the
    unweighted disk pairings <<A', phi^j>> (the 1/conj(phi') factor cancels
    against the weight), so only the Gram solve is approximate.
    """
    xi = as_series(xi)
    if max_degree is None:
        max_degree = max(
            mapping.natural_cap(degree), mapping.natural_cap(xi.degree) + 2
        )
    xi_pull = pullback(mapping, xi, max_degree)
    A = (HolomorphicSeries([0.0, 0.0, 1.0]) * mapping.phi_prime * xi_pull).truncated(
        max_degree + 1, warn=False
    )
    A_z = A.derivative()
    powers = [mapping.power(j, max_degree) for j in range(degree + 1)]
    width = max(max(p.degree for p in powers), A_z.degree) + 1
    P = np.zeros((degree + 1, width), dtype=complex)
    for j, p in enumerate(powers):
        P[j, : len(p.coeffs)] = p.coeffs
    a = np.zeros(width, dtype=complex)
    a[: len(A_z.coeffs)] = A_z.coeffs
    rhs = P.conj() @ (a * series.pair_constants(width))
    coeffs = _solve_gram(mapping, rhs, degree, max_degree)
    return HolomorphicSeries(coeffs)
