"""Exact algebra of truncated bivariate polynomial fields on the unit disk.

A field is a finite sum ``sum c_{mn} z^m zbar^n`` identified with the
complex-valued function it evaluates to, and hence with a planar vector
field ``u + i v``.  All values are immutable after construction and every
operation is a pure function; reductions run in a fixed (sorted-index)
order so results are bit-reproducible.
"""

from __future__ import annotations

import math
import warnings
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

DEFAULT_MAX_DEGREE = 16
DROP_TOLERANCE = 1e-300
TRUNCATION_WARN_TOL = 1e-12

# Additive perturbation of the closed-form inner-product constant.
# Test-only fault-injection hook; leave at 0.0 in production.
_INNER_PRODUCT_FAULT = 0.0


class TruncationWarning(UserWarning):
    """Dropped-mass norm of a truncated operation exceeded its tolerance."""


def _warn_truncation(op, dropped, total, warn_tol):
    if total > 0 and dropped > warn_tol * total:
        warnings.warn(
            f"{op}: truncation dropped coefficient mass {dropped:.3e} "
            f"({dropped / total:.3e} relative)",
            TruncationWarning,
            stacklevel=3,
        )


class BivariateField:
    """Polynomial in z and zbar with complex coefficients, total degree <= max_degree."""

    __slots__ = ("_terms", "max_degree")

    def __init__(self, terms=None, max_degree=None, drop_tolerance=DROP_TOLERANCE):
        clean = {}
        for (m, n), c in (terms or {}).items():
            m = int(m)
            n = int(n)
            if m < 0 or n < 0:
                raise ValueError(f"negative index ({m}, {n}) not allowed here")
            c = complex(c)
            if abs(c) >= drop_tolerance and c != 0:
                clean[(m, n)] = clean.get((m, n), 0j) + c
        inferred = max((m + n for m, n in clean), default=0)
        if max_degree is None:
            max_degree = max(inferred, 0)
        if inferred > max_degree:
            raise ValueError(
                f"term of total degree {inferred} exceeds max_degree {max_degree}"
            )
        self._terms = clean
        self.max_degree = int(max_degree)

    @classmethod
    def _raw(cls, terms, max_degree):
        # trusted constructor: terms already {(int, int): nonzero complex}
        obj = object.__new__(cls)
        obj._terms = terms
        obj.max_degree = max_degree
        return obj

    # -- accessors ---------------------------------------------------------

    def terms(self):
        """Copy of the coefficient table {(m, n): c}."""
        return dict(self._terms)

    def items(self):
        """Terms in lexicographic (m, n) order."""
        return sorted(self._terms.items())

    def coefficient(self, m, n):
        return self._terms.get((m, n), 0j)

    def degree(self):
        """Largest total degree actually present (0 for the zero field)."""
        return max((m + n for m, n in self._terms), default=0)

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if not isinstance(other, BivariateField):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self.items()))

    def __repr__(self):
        inner = ", ".join(f"({m},{n}): {c:.6g}" for (m, n), c in self.items()[:6])
        more = "" if len(self._terms) <= 6 else ", ..."
        return f"BivariateField({{{inner}{more}}}, max_degree={self.max_degree})"

    # -- arithmetic sugar (delegates to the module-level operations) --------

    def __add__(self, other):
        return add(self, as_field(other))

    __radd__ = __add__

    def __sub__(self, other):
        return subtract(self, as_field(other))

    def __rsub__(self, other):
        return subtract(as_field(other), self)

    def __neg__(self):
        return scale(self, -1)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return scale(self, other)
        return multiply(self, as_field(other))

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return scale(self, other)
        return multiply(as_field(other), self)

    def conjugate(self):
        return conjugate(self)

    def is_real(self, tol=0.0):
        """True when c_{nm} == conj(c_{mn}) within tol (pointwise real values)."""
        for (m, n), c in self._terms.items():
            if abs(c - self._terms.get((n, m), 0j).conjugate()) > tol:
                return False
        return True

    def __call__(self, point):
        return evaluate(self, point)


@dataclass(frozen=True)
class InnerProductValue:
    """Complex pairing <<f,g>> together with its real part <f,g>."""

    complex_value: complex

    @property
    def real_value(self) -> float:
        return self.complex_value.real

    def __complex__(self):
        return self.complex_value

    def __float__(self):
        return self.real_value


class HolomorphicSeries:
    """Truncated Taylor series sum a_k z^k; the conformal (Cauchy-Riemann) fields."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = tuple(complex(c) for c in coeffs)
        while cs and cs[-1] == 0:
            cs = cs[:-1]
        self.coeffs = cs

    @classmethod
    def _raw(cls, cs):
        # trusted constructor: cs is a list of complex, possibly untrimmed
        while cs and cs[-1] == 0:
            cs.pop()
        obj = object.__new__(cls)
        obj.coeffs = tuple(cs)
        return obj

    @property
    def degree(self):
        return max(len(self.coeffs) - 1, 0)

    def coefficient(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0j

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, HolomorphicSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"HolomorphicSeries({list(self.coeffs)!r})"

    def __add__(self, other):
        other = as_series(other)
        k = max(len(self.coeffs), len(other.coeffs))
        return HolomorphicSeries._raw(
            [self.coefficient(i) + other.coefficient(i) for i in range(k)]
        )

    def __sub__(self, other):
        other = as_series(other)
        k = max(len(self.coeffs), len(other.coeffs))
        return HolomorphicSeries._raw(
            [self.coefficient(i) - other.coefficient(i) for i in range(k)]
        )

    def __neg__(self):
        return HolomorphicSeries._raw([-c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return HolomorphicSeries._raw([c * complex(other) for c in self.coeffs])
        other = as_series(other)
        out = [0j] * (len(self.coeffs) + len(other.coeffs) - 1 or 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return HolomorphicSeries._raw(out)

    __rmul__ = __mul__

    def __call__(self, point):
        # Horner; stable for |point| <= 1-ish arguments used here.
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * point + c
        return acc

    def derivative(self):
        return HolomorphicSeries._raw(
            [k * c for k, c in enumerate(self.coeffs)][1:]
        )

    def antiderivative(self):
        """Primitive with zero constant term."""
        return HolomorphicSeries._raw(
            [0j] + [c / (k + 1) for k, c in enumerate(self.coeffs)]
        )

    def to_field(self, max_degree=None):
        terms = {(k, 0): c for k, c in enumerate(self.coeffs) if c != 0}
        if max_degree is None:
            max_degree = max(self.degree, 0)
        return BivariateField._raw(terms, max_degree)

    def truncated(self, max_degree, warn=True):
        if len(self.coeffs) - 1 <= max_degree:
            return self
        dropped = math.sqrt(sum(abs(c) ** 2 for c in self.coeffs[max_degree + 1 :]))
        total = math.sqrt(sum(abs(c) ** 2 for c in self.coeffs))
        if warn:
            _warn_truncation("HolomorphicSeries.truncated", dropped, total, 0.0)
        return HolomorphicSeries._raw(list(self.coeffs[: max_degree + 1]))

    @staticmethod
    def from_field(field, tol=0.0):
        """Extract the pure z-power part; reject fields with zbar content above tol."""
        field = as_field(field)
        coeffs = [0j] * (field.max_degree + 1)
        for (m, n), c in field.items():
            if n == 0:
                coeffs[m] = c
            elif abs(c) > tol:
                raise ValueError(
                    f"field has non-holomorphic term ({m},{n}) with |c|={abs(c):.3e}"
                )
        return HolomorphicSeries(coeffs)

    def compose(self, inner, max_degree=DEFAULT_MAX_DEGREE):
        """Series composition self(inner(z)), truncated at max_degree."""
        inner = as_series(inner)
        acc = HolomorphicSeries([])
        for c in reversed(self.coeffs):
            acc = (acc * inner).truncated(max_degree, warn=False) + HolomorphicSeries([c])
        return acc


def as_field(x) -> BivariateField:
    if isinstance(x, BivariateField):
        return x
    if isinstance(x, HolomorphicSeries):
        return x.to_field()
    if isinstance(x, (int, float, complex)):
        return BivariateField({(0, 0): complex(x)})
    raise TypeError(f"cannot interpret {type(x).__name__} as a field")


def as_series(x) -> HolomorphicSeries:
    if isinstance(x, HolomorphicSeries):
        return x
    if isinstance(x, (int, float, complex)):
        return HolomorphicSeries([complex(x)])
    if isinstance(x, BivariateField):
        return HolomorphicSeries.from_field(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as a holomorphic series")


def monomial(m, n, c=1.0, max_degree=None):
    return BivariateField({(m, n): c}, max_degree=max_degree)


def zero_field():
    return BivariateField({})


# -- elementary operations ---------------------------------------------------


def add(f, g):
    f, g = as_field(f), as_field(g)
    terms = dict(f._terms)
    for idx, c in g._terms.items():
        s = terms.get(idx, 0j) + c
        if s == 0:
            terms.pop(idx, None)
        else:
            terms[idx] = s
    return BivariateField._raw(terms, max(f.max_degree, g.max_degree))


def subtract(f, g):
    return add(f, scale(g, -1))


def scale(f, a):
    f = as_field(f)
    a = complex(a)
    if a == 0:
        return BivariateField._raw({}, f.max_degree)
    return BivariateField._raw(
        {idx: a * c for idx, c in f._terms.items()}, f.max_degree
    )


def conjugate(f):
    """Pointwise complex conjugate: swaps (m, n) -> (n, m) and conjugates."""
    f = as_field(f)
    return BivariateField._raw(
        {(n, m): c.conjugate() for (m, n), c in f._terms.items()}, f.max_degree
    )


def convolve(f, g, max_degree=None):
    """Full product with truncation; returns (field, dropped_mass_norm)."""
    f, g = as_field(f), as_field(g)
    if max_degree is None:
        max_degree = min(f.max_degree + g.max_degree, DEFAULT_MAX_DEGREE)
    terms = defaultdict(complex)
    for (m, n), c in f._terms.items():
        for (p, q), d in g._terms.items():
            terms[(m + p, n + q)] += c * d
    kept, dropped_sq = {}, 0.0
    for (m, n), c in terms.items():
        if c == 0:
            continue
        if m + n <= max_degree:
            kept[(m, n)] = c
        else:
            dropped_sq += abs(c) ** 2
    return BivariateField._raw(kept, max_degree), math.sqrt(dropped_sq)


def multiply(f, g, max_degree=None, warn_tol=TRUNCATION_WARN_TOL):
    result, dropped = convolve(f, g, max_degree=max_degree)
    total = coefficient_norm(result) + dropped
    _warn_truncation("multiply", dropped, total, warn_tol)
    return result


def combine(kind, f, g=None, max_degree=None):
    """Dispatch arithmetic by name: add | subtract | scale | multiply | conjugate."""
    if kind == "add":
        return add(f, g)
    if kind == "subtract":
        return subtract(f, g)
    if kind == "scale":
        return scale(f, g)
    if kind == "multiply":
        return multiply(f, g, max_degree=max_degree)
    if kind == "conjugate":
        return conjugate(f)
    raise ValueError(f"unknown combine kind {kind!r}")


def wirtinger(f, which):
    """Wirtinger derivative: d_z maps z^m zbar^n -> m z^(m-1) zbar^n, d_zbar likewise in n."""
    f = as_field(f)
    terms = {}
    if which == "d_z":
        for (m, n), c in f._terms.items():
            if m > 0:
                terms[(m - 1, n)] = m * c
    elif which == "d_zbar":
        for (m, n), c in f._terms.items():
            if n > 0:
                terms[(m, n - 1)] = n * c
    else:
        raise ValueError(f"unknown derivative {which!r} (want 'd_z' or 'd_zbar')")
    return BivariateField._raw(terms, max(f.max_degree - 1, 0))


def cr_residual(f):
    """2 d_zbar f; zero iff f is conformal.  Re = u_x - v_y, Im = v_x + u_y."""
    return scale(wirtinger(f, "d_zbar"), 2)


def div_curl(f):
    """2 d_z f; Re = divergence u_x + v_y, Im = scalar vorticity v_x - u_y."""
    return scale(wirtinger(f, "d_z"), 2)


def real_part(f):
    """(f + conj f)/2 as a real-valued field (exact coefficient arithmetic)."""
    return scale(add(f, conjugate(f)), 0.5)


def imag_part(f):
    """(f - conj f)/(2i) as a real-valued field."""
    return scale(subtract(f, conjugate(f)), -0.5j)


def laplacian(f):
    """4 d_z d_zbar f (the flat Laplacian on coefficient tables)."""
    return scale(wirtinger(wirtinger(f, "d_z"), "d_zbar"), 4)


# -- inner products ----------------------------------------------------------


@contextmanager
def inner_product_fault(eps):
    """Test-only hook: additively perturb the closed-form pairing constant."""
    global _INNER_PRODUCT_FAULT
    old = _INNER_PRODUCT_FAULT
    _INNER_PRODUCT_FAULT = float(eps)
    try:
        yield
    finally:
        _INNER_PRODUCT_FAULT = old


def _pair_constant(m, q):
    # disk moment of the matched monomial pair, pi/(m+q+1)
    return math.pi / (m + q + 1) + _INNER_PRODUCT_FAULT


def pair_constants(count):
    """Vector of the matched-monomial disk moments pi/(i+1), fault included."""
    return math.pi / (np.arange(count) + 1.0) + _INNER_PRODUCT_FAULT


def inner_product(f, g) -> InnerProductValue:
    """Complex L2 pairing on the unit disk, conjugate-linear in the second slot.

    Closed form: <<z^m zbar^n, z^p zbar^q>> = pi/(m+q+1) when m+q == n+p,
    else 0; extended bilinearly.  Terms are bucketed by the angular index
    m-n so only matching buckets pair; sums run in sorted index order for
    bit-reproducibility.
    """
    f, g = as_field(f), as_field(g)
    ft, gt = f._terms, g._terms
    if all(n == 0 for _, n in ft) and all(n == 0 for _, n in gt):
        total = 0j
        for (m, _), c in sorted(ft.items()):
            d = gt.get((m, 0))
            if d is not None:
                total += c * d.conjugate() * _pair_constant(m, 0)
        return InnerProductValue(total)
    buckets = defaultdict(list)
    for (p, q), d in sorted(gt.items()):
        buckets[p - q].append((p, q, d))
    total = 0j
    for (m, n), c in sorted(ft.items()):
        for p, q, d in buckets.get(m - n, ()):
            total += c * d.conjugate() * _pair_constant(m, q)
    return InnerProductValue(total)


def norm(f) -> float:
    """L2 norm sqrt(<f, f>) on the unit disk."""
    v = inner_product(f, f).real_value
    return math.sqrt(max(v, 0.0))


def coefficient_norm(f) -> float:
    f = as_field(f)
    return math.sqrt(sum(abs(c) ** 2 for c in f._terms.values()))


# -- evaluation ---------------------------------------------------------------


def evaluate(f, point):
    """Horner-style evaluation of sum c_{mn} z^m zbar^n at a complex point.

    Disk semantics expect |point| <= 1; evaluation outside is permitted but
    the inner-product and projection contracts only hold on the disk.
    """
    f = as_field(f)
    z = complex(point)
    zb = z.conjugate()
    rows = defaultdict(dict)
    for (m, n), c in f._terms.items():
        rows[m][n] = c
    acc = 0j
    for m in range(max(rows, default=0), -1, -1):
        row = rows.get(m, {})
        inner = 0j
        for n in range(max(row, default=0), -1, -1):
            inner = inner * zb + row.get(n, 0j)
        acc = acc * z + inner
    return acc


def evaluate_grid(f, points):
    """Vectorised evaluation on a numpy array of complex points."""
    f = as_field(f)
    points = np.asarray(points, dtype=complex)
    out = np.zeros_like(points)
    conj = np.conj(points)
    for (m, n), c in f.items():
        out += c * points**m * conj**n
    return out


def boundary_max(f, samples=256):
    """max |f| over equispaced samples of the unit circle."""
    theta = 2 * math.pi * np.arange(samples) / samples
    pts = np.exp(1j * theta)
    return float(np.max(np.abs(evaluate_grid(f, pts))))


def random_field(rng, degree, real=False, max_degree=None):
    """Random field with standard-normal complex coefficients up to total degree."""
    terms = {}
    for m in range(degree + 1):
        for n in range(degree + 1 - m):
            terms[(m, n)] = complex(rng.standard_normal(), rng.standard_normal())
    f = BivariateField(terms, max_degree=max_degree or degree)
    return real_part(f) if real else f


def random_series(rng, degree):
    return HolomorphicSeries(
        [complex(rng.standard_normal(), rng.standard_normal()) for _ in range(degree + 1)]
    )
