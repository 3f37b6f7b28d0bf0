"""Laurent-coefficient calculus on the annulus r_in <= |z| <= 1.

Fields carry indices (m, n) in a symmetric band; inner products come from
the closed-form moments of z^a zbar^b over the annulus.  The Dirichlet
Poisson solver augments the Laurent table with powers of ln(z zbar), which
is what the z^-1 modes and the two-circle boundary matching require.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .series import InnerProductValue


class NonConformalInputError(ValueError):
    """Input field has nonzero antiholomorphic content."""


class LaurentField:
    """Polynomial in z, zbar, 1/z, 1/zbar with a band limit on the indices."""

    __slots__ = ("_terms", "band_limit", "r_in")

    def __init__(self, terms=None, r_in=0.5, band_limit=None):
        if not 0.0 < r_in < 1.0:
            raise ValueError("r_in must lie strictly between 0 and 1")
        clean = {}
        for (m, n), c in (terms or {}).items():
            c = complex(c)
            if c != 0:
                clean[(int(m), int(n))] = clean.get((int(m), int(n)), 0j) + c
        inferred = max((max(abs(m), abs(n)) for m, n in clean), default=0)
        if band_limit is None:
            band_limit = inferred
        if inferred > band_limit:
            raise ValueError(f"index outside band limit {band_limit}")
        self._terms = clean
        self.band_limit = int(band_limit)
        self.r_in = float(r_in)

    def terms(self):
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items())

    def coefficient(self, m, n):
        return self._terms.get((m, n), 0j)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, LaurentField):
            return NotImplemented
        return self._terms == other._terms and self.r_in == other.r_in

    def __repr__(self):
        return f"LaurentField({dict(self.items())!r}, r_in={self.r_in})"

    def __add__(self, other):
        self._check_domain(other)
        terms = self.terms()
        for idx, c in other._terms.items():
            terms[idx] = terms.get(idx, 0j) + c
        return LaurentField(terms, r_in=self.r_in,
                            band_limit=max(self.band_limit, other.band_limit))

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, a):
        return LaurentField(
            {idx: complex(a) * c for idx, c in self._terms.items()},
            r_in=self.r_in,
            band_limit=self.band_limit,
        )

    def conjugate(self):
        return LaurentField(
            {(n, m): c.conjugate() for (m, n), c in self._terms.items()},
            r_in=self.r_in,
            band_limit=self.band_limit,
        )

    def is_real(self, tol=0.0):
        for (m, n), c in self._terms.items():
            if abs(c - self._terms.get((n, m), 0j).conjugate()) > tol:
                return False
        return True

    def coefficient_norm(self):
        return math.sqrt(sum(abs(c) ** 2 for c in self._terms.values()))

    def wirtinger(self, which):
        terms = {}
        if which == "d_z":
            for (m, n), c in self._terms.items():
                if m != 0:
                    terms[(m - 1, n)] = terms.get((m - 1, n), 0j) + m * c
        elif which == "d_zbar":
            for (m, n), c in self._terms.items():
                if n != 0:
                    terms[(m, n - 1)] = terms.get((m, n - 1), 0j) + n * c
        else:
            raise ValueError(f"unknown derivative {which!r}")
        return LaurentField(terms, r_in=self.r_in)

    def real_part(self):
        return (self + self.conjugate()).scaled(0.5)

    def imag_part(self):
        return (self - self.conjugate()).scaled(-0.5j)

    def holomorphic_part(self):
        return LaurentField(
            {(m, n): c for (m, n), c in self._terms.items() if n == 0},
            r_in=self.r_in,
        )

    def antiholomorphic_norm(self):
        return math.sqrt(
            sum(abs(c) ** 2 for (m, n), c in self._terms.items() if n != 0)
        )

    def evaluate(self, point):
        z = complex(point)
        zb = z.conjugate()
        return sum(c * z**m * zb**n for (m, n), c in self.items())

    def evaluate_grid(self, points):
        points = np.asarray(points, dtype=complex)
        out = np.zeros_like(points)
        conj = np.conj(points)
        for (m, n), c in self.items():
            out += c * points ** float(m) * conj ** float(n)
        return out

    def _check_domain(self, other):
        if not isinstance(other, LaurentField):
            raise TypeError("expected a LaurentField")
        if other.r_in != self.r_in:
            raise ValueError("operands live on annuli with different r_in")


def laurent_monomial(m, n, c=1.0, r_in=0.5):
    return LaurentField({(m, n): c}, r_in=r_in)


# -- closed-form moments -------------------------------------------------------


def annulus_moment(a, r_in):
    """Integral of z^a zbar^a over the annulus (angular average already zero for a != b)."""
    if a == -1:
        return 2 * math.pi * math.log(1.0 / r_in)
    return math.pi * (1.0 - r_in ** (2 * a + 2)) / (a + 1)


def annulus_inner(f: LaurentField, g: LaurentField) -> InnerProductValue:
    """Complex pairing over the annulus, conjugate-linear in the second slot."""
    f._check_domain(g)
    buckets = defaultdict(list)
    for (p, q), d in g.items():
        buckets[p - q].append((p, q, d))
    total = 0j
    for (m, n), c in f.items():
        for p, q, d in buckets.get(m - n, ()):
            total += c * d.conjugate() * annulus_moment(m + q, f.r_in)
    return InnerProductValue(total)


def annulus_norm(f: LaurentField) -> float:
    return math.sqrt(max(annulus_inner(f, f).real_value, 0.0))


# -- conformal classification ---------------------------------------------------


@dataclass(frozen=True)
class AnnulusClassification:
    """Coordinates of a conformal annulus field on the 1/z and i/z directions."""

    a4_coeff: float
    a5_coeff: float
    a6_part: LaurentField


def annulus_classify(h: LaurentField, tol=0.0) -> AnnulusClassification:
    """Split the z^-1 coefficient p + iq into the i/z (a4) and 1/z (a5) coordinates.

    The remaining modes form the a6 part.  Input must be conformal (no zbar
    content above tol).
    """
    bad = h.antiholomorphic_norm()
    if bad > tol:
        raise NonConformalInputError(
            f"field has antiholomorphic coefficient mass {bad:.3e}"
        )
    c = h.coefficient(-1, 0)
    rest = {
        (m, n): v for (m, n), v in h.terms().items() if (m, n) != (-1, 0) and n == 0
    }
    return AnnulusClassification(
        a4_coeff=c.imag,
        a5_coeff=c.real,
        a6_part=LaurentField(rest, r_in=h.r_in),
    )


# -- log-augmented fields and the Dirichlet-Poisson solve ------------------------


class LogLaurentField:
    """sum c_{mnl} z^m zbar^n ln(z zbar)^l; closed under the annulus Laplace solve."""

    __slots__ = ("_terms", "r_in")

    def __init__(self, terms=None, r_in=0.5):
        clean = {}
        for (m, n, ell), c in (terms or {}).items():
            c = complex(c)
            if c != 0:
                key = (int(m), int(n), int(ell))
                clean[key] = clean.get(key, 0j) + c
        self._terms = clean
        self.r_in = float(r_in)

    @staticmethod
    def from_laurent(f: LaurentField):
        return LogLaurentField(
            {(m, n, 0): c for (m, n), c in f.items()}, r_in=f.r_in
        )

    def items(self):
        return sorted(self._terms.items())

    def __add__(self, other):
        terms = dict(self._terms)
        for idx, c in other._terms.items():
            terms[idx] = terms.get(idx, 0j) + c
        return LogLaurentField(terms, r_in=self.r_in)

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, a):
        return LogLaurentField(
            {idx: complex(a) * c for idx, c in self._terms.items()}, r_in=self.r_in
        )

    def conjugate(self):
        return LogLaurentField(
            {(n, m, ell): c.conjugate() for (m, n, ell), c in self._terms.items()},
            r_in=self.r_in,
        )

    def real_part(self):
        return (self + self.conjugate()).scaled(0.5)

    def imag_part(self):
        return (self - self.conjugate()).scaled(-0.5j)

    def wirtinger(self, which):
        # d/dz [z^m zbar^n ln^l] = m z^(m-1) zbar^n ln^l + l z^(m-1) zbar^n ln^(l-1)
        terms = defaultdict(complex)
        for (m, n, ell), c in self._terms.items():
            if which == "d_z":
                if m != 0:
                    terms[(m - 1, n, ell)] += m * c
                if ell > 0:
                    terms[(m - 1, n, ell - 1)] += ell * c
            elif which == "d_zbar":
                if n != 0:
                    terms[(m, n - 1, ell)] += n * c
                if ell > 0:
                    terms[(m, n - 1, ell - 1)] += ell * c
            else:
                raise ValueError(f"unknown derivative {which!r}")
        return LogLaurentField(terms, r_in=self.r_in)

    def boundary_trace(self, radius):
        """Angular-mode coefficients of the restriction to |z| = radius."""
        modes = defaultdict(complex)
        ln_r2 = 2.0 * math.log(radius)
        for (m, n, ell), c in self._terms.items():
            modes[m - n] += c * radius ** (m + n) * ln_r2**ell
        return dict(modes)

    def laurent_part(self):
        """(pure Laurent component, coefficient norm of the leftover log terms)."""
        plain = {}
        leftover_sq = 0.0
        for (m, n, ell), c in self._terms.items():
            if ell == 0:
                plain[(m, n)] = plain.get((m, n), 0j) + c
            else:
                leftover_sq += abs(c) ** 2
        return LaurentField(plain, r_in=self.r_in), math.sqrt(leftover_sq)

    def coefficient_norm(self):
        return math.sqrt(sum(abs(c) ** 2 for c in self._terms.values()))

    def evaluate(self, point):
        z = complex(point)
        zb = z.conjugate()
        ln = math.log((z * zb).real)
        return sum(c * z**m * zb**n * ln**ell for (m, n, ell), c in self.items())

    def inner(self, other) -> InnerProductValue:
        """Complex pairing using the log-weighted radial moments."""
        buckets = defaultdict(list)
        for (p, q, le2), d in other.items():
            buckets[p - q].append((p, q, le2, d))
        total = 0j
        for (m, n, le1), c in self.items():
            for p, q, le2, d in buckets.get(m - n, ()):
                total += c * d.conjugate() * _log_moment(m + q, le1 + le2, self.r_in)
        return InnerProductValue(total)

    def norm(self):
        return math.sqrt(max(self.inner(self).real_value, 0.0))


def _radial_antiderivative(p, L, r):
    """Antiderivative of r^p ln(r)^L evaluated at r (elementary recursion)."""
    if p == -1:
        return math.log(r) ** (L + 1) / (L + 1)
    if L == 0:
        return r ** (p + 1) / (p + 1)
    return (
        r ** (p + 1) * math.log(r) ** L / (p + 1)
        - L / (p + 1) * _radial_antiderivative(p, L - 1, r)
    )


def _log_moment(a, L, r_in):
    """Integral over the annulus of z^a zbar^a ln(z zbar)^L."""
    upper = _radial_antiderivative(2 * a + 1, L, 1.0)
    lower = _radial_antiderivative(2 * a + 1, L, r_in)
    return 2 * math.pi * (2.0**L) * (upper - lower)


def poisson_annulus(rhs: LaurentField) -> LogLaurentField:
    """Solve Laplace(F) = rhs with F = 0 on both boundary circles, exactly.

    Particular solutions lift indices by (1,1); the m = -1 / n = -1 cases
    pick up a ln(z zbar) factor.  Boundary values are matched per angular
    mode with the harmonic pairs {z^k, zbar^-k} (and {1, ln(z zbar)} for
    the rotationally symmetric mode).
    """
    scale = max(rhs.coefficient_norm(), 1.0)
    if not rhs.is_real(tol=1e-12 * scale):
        raise ValueError("poisson_annulus needs a real-valued right-hand side")
    rhs = rhs.real_part()
    r_in = rhs.r_in
    particular = defaultdict(complex)
    for (m, n), c in rhs.items():
        if m != -1 and n != -1:
            particular[(m + 1, n + 1, 0)] += c / (4.0 * (m + 1) * (n + 1))
        elif m == -1 and n != -1:
            particular[(0, n + 1, 1)] += c / (4.0 * (n + 1))
        elif m != -1 and n == -1:
            particular[(m + 1, 0, 1)] += c / (4.0 * (m + 1))
        else:
            particular[(0, 0, 2)] += c / 8.0
    part = LogLaurentField(particular, r_in=r_in)
    outer = part.boundary_trace(1.0)
    inner = part.boundary_trace(r_in)
    correction = defaultdict(complex)
    for k in sorted(set(outer) | set(inner)):
        t1 = outer.get(k, 0j)
        t2 = inner.get(k, 0j)
        if k == 0:
            # basis {1, ln(z zbar)} with traces {1, 2 ln r}
            a = -t1
            b = (t1 - t2) / (2.0 * math.log(r_in))
            correction[(0, 0, 0)] += a
            correction[(0, 0, 1)] += b
        else:
            # basis {z^k, zbar^-k} (k > 0) traces r^k, r^-k on |z| = r
            kk = abs(k)
            mat = np.array(
                [[1.0, 1.0], [r_in**kk, r_in ** (-kk)]], dtype=float
            )
            sol = np.linalg.solve(mat, np.array([-t1, -t2]))
            if k > 0:
                correction[(k, 0, 0)] += sol[0]
                correction[(0, -k, 0)] += sol[1]
            else:
                correction[(0, kk, 0)] += sol[0]
                correction[(-kk, 0, 0)] += sol[1]
    return part + LogLaurentField(correction, r_in=r_in)
