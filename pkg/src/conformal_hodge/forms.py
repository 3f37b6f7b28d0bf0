"""Differential forms on flat planar charts and the subspace membership test.

Components are coefficient fields: polynomial on the disk, Laurent on the
annulus.  Orientation fixes star(dx) = dy, star(dy) = -dx, and on 1-forms
the co-differential is delta = star d star, so that for a vector field
u + iv the reflected image u dx - v dy has delta = u_x - v_y and
d = -(v_x + u_y) dx^dy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import annulus as ann
from . import disk as disk_mod
from . import series
from .annulus import LaurentField, LogLaurentField, laurent_monomial, poisson_annulus


# -- generic component arithmetic (disk polynomials or annulus Laurent tables) --


def _is_laurent(f):
    return isinstance(f, LaurentField)


def _d_z(f):
    return f.wirtinger("d_z") if _is_laurent(f) else series.wirtinger(f, "d_z")


def _d_zbar(f):
    return f.wirtinger("d_zbar") if _is_laurent(f) else series.wirtinger(f, "d_zbar")


def _scale(f, a):
    return f.scaled(a) if _is_laurent(f) else series.scale(f, a)


def _add(f, g):
    return f + g if _is_laurent(f) else series.add(f, g)


def _sub(f, g):
    return f - g if _is_laurent(f) else series.subtract(f, g)


def _real(f):
    return f.real_part() if _is_laurent(f) else series.real_part(f)


def _imag(f):
    return f.imag_part() if _is_laurent(f) else series.imag_part(f)


def _coefficient_norm(f):
    return f.coefficient_norm() if _is_laurent(f) else series.coefficient_norm(f)


def _inner_real(f, g):
    if _is_laurent(f):
        return ann.annulus_inner(f, g).real_value
    return series.inner_product(f, g).real_value


def _field_norm(f):
    return ann.annulus_norm(f) if _is_laurent(f) else series.norm(f)


def _evaluate_grid(f, pts):
    return f.evaluate_grid(pts) if _is_laurent(f) else series.evaluate_grid(f, pts)


def d_x(f):
    """Partial derivative in x: d_z + d_zbar."""
    return _add(_d_z(f), _d_zbar(f))


def d_y(f):
    """Partial derivative in y: i (d_z - d_zbar)."""
    return _scale(_sub(_d_z(f), _d_zbar(f)), 1j)


def _check_real(name, f, tol_factor=1e-9):
    if not f.is_real(tol=tol_factor * max(_coefficient_norm(f), 1.0)):
        raise ValueError(f"{name} component of a form must be real-valued")


# -- form types -----------------------------------------------------------------


@dataclass(frozen=True)
class ZeroForm:
    value: object

    def __post_init__(self):
        _check_real("0-form", self.value)


@dataclass(frozen=True)
class OneForm:
    """alpha = u dx + v dy with real component fields."""

    u_dx: object
    v_dy: object

    def __post_init__(self):
        _check_real("u dx", self.u_dx)
        _check_real("v dy", self.v_dy)


@dataclass(frozen=True)
class TwoForm:
    density: object  # w in w dx^dy

    def __post_init__(self):
        _check_real("2-form", self.density)


def star(form):
    """Hodge star: star(1) = dx^dy, star(dx) = dy, star(dy) = -dx, star(dx^dy) = 1."""
    if isinstance(form, ZeroForm):
        return TwoForm(form.value)
    if isinstance(form, OneForm):
        return OneForm(u_dx=_scale(form.v_dy, -1), v_dy=form.u_dx)
    if isinstance(form, TwoForm):
        return ZeroForm(form.density)
    raise TypeError(f"not a form: {type(form).__name__}")


def exterior_derivative(form):
    if isinstance(form, ZeroForm):
        return OneForm(u_dx=d_x(form.value), v_dy=d_y(form.value))
    if isinstance(form, OneForm):
        return TwoForm(_sub(d_x(form.v_dy), d_y(form.u_dx)))
    if isinstance(form, TwoForm):
        raise ValueError("no 3-forms on a 2-manifold")
    raise TypeError(f"not a form: {type(form).__name__}")


def codifferential(form):
    """delta = star d star on 1- and 2-forms (positive sign in two dimensions)."""
    if isinstance(form, OneForm):
        return ZeroForm(_add(d_x(form.u_dx), d_y(form.v_dy)))
    if isinstance(form, TwoForm):
        w = form.density
        return OneForm(u_dx=_scale(d_y(w), -1), v_dy=d_x(w))
    if isinstance(form, ZeroForm):
        raise ValueError("the co-differential of a 0-form vanishes identically")
    raise TypeError(f"not a form: {type(form).__name__}")


def one_form_calculus(form, op):
    """Dispatch by name: op in {'d', 'delta', 'star'}."""
    if op == "d":
        return exterior_derivative(form)
    if op == "delta":
        return codifferential(form)
    if op == "star":
        return star(form)
    raise ValueError(f"unknown operation {op!r}")


def form_inner(alpha: OneForm, beta: OneForm) -> float:
    """L2 pairing of 1-forms: integral of (u1 u2 + v1 v2)."""
    return _inner_real(alpha.u_dx, beta.u_dx) + _inner_real(alpha.v_dy, beta.v_dy)


def form_norm(alpha: OneForm) -> float:
    return math.sqrt(max(form_inner(alpha, alpha), 0.0))


# -- reflected flat / sharp maps -------------------------------------------------


def flat_map(f) -> OneForm:
    """Reflected metric image of the field u + iv: the 1-form u dx - v dy.

    This is the isometry under which conformal fields correspond exactly to
    the harmonic (closed and co-closed) 1-forms.
    """
    if not _is_laurent(f):
        f = series.as_field(f)
    return OneForm(u_dx=_real(f), v_dy=_scale(_imag(f), -1))


def sharp_map(alpha: OneForm):
    """Inverse of flat_map: u dx + v dy -> the field u - iv."""
    return _add(alpha.u_dx, _scale(alpha.v_dy, -1j))


# -- boundary traces --------------------------------------------------------------


def boundary_traces(alpha: OneForm, radius=1.0, samples=256):
    """(max tangential, max normal) component over a sample circle |z| = radius."""
    theta = 2 * math.pi * np.arange(samples) / samples
    pts = radius * np.exp(1j * theta)
    u = _evaluate_grid(alpha.u_dx, pts)
    v = _evaluate_grid(alpha.v_dy, pts)
    tangent = pts * 1j / radius
    normal = pts / radius
    tang = u * tangent.real + v * tangent.imag
    norm_c = u * normal.real + v * normal.imag
    return float(np.max(np.abs(tang))), float(np.max(np.abs(norm_c)))


# -- membership classification ----------------------------------------------------


@dataclass(frozen=True)
class MembershipReport:
    domain: str
    labels: tuple
    norms: dict
    inconclusive: tuple
    boundary_tangential_max: float
    boundary_normal_max: float
    closedness_defect: float
    coclosedness_defect: float
    coordinates: dict
    potentials: dict


def _labels_from_norms(norms, total, tol):
    thr = tol * max(total, 1e-300)
    labels, inconclusive = [], []
    for name in sorted(norms):
        n = norms[name]
        if n > 3 * thr:
            labels.append(name)
        elif n > thr / 3:
            inconclusive.append(name)
    return tuple(labels), tuple(inconclusive)


def hodge_membership(alpha: OneForm, domain: str, tol=1e-10) -> MembershipReport:
    """Classify a 1-form into the six-space catalog by potential recovery.

    The form is carried to a field by the reflected sharp map, split by the
    Dirichlet-Poisson route into gradient / skew-gradient / harmonic parts,
    and, on the annulus, the harmonic part is further resolved against the
    two distinguished z^-1 directions.  Components whose norms land within
    a factor of 3 of the decision threshold are reported as inconclusive
    rather than guessed.
    """
    if domain == "disk":
        return _membership_disk(alpha, tol)
    if domain == "annulus":
        return _membership_annulus(alpha, tol)
    raise ValueError(f"membership classification supports disk/annulus, not {domain!r}")


def _membership_disk(alpha: OneForm, tol) -> MembershipReport:
    f = sharp_map(alpha)
    dec = disk_mod.conformal_decompose(f)
    gF = disk_mod.grad_bar(dec.multipliers.F)
    sG = disk_mod.sgrad_bar(dec.multipliers.G)
    norms = {
        "A1": series.norm(gF),
        "A2": series.norm(sG),
        "A3": 0.0,
        "A4": 0.0,
        "A5": 0.0,
        "A6": series.norm(dec.conformal.to_field()),
    }
    labels, inconclusive = _labels_from_norms(norms, series.norm(f), tol)
    d_defect = series.coefficient_norm(exterior_derivative(alpha).density)
    delta_defect = series.coefficient_norm(codifferential(alpha).value)
    tang, nrm = boundary_traces(alpha, radius=1.0)
    return MembershipReport(
        domain="disk",
        labels=labels,
        norms=norms,
        inconclusive=inconclusive,
        boundary_tangential_max=tang,
        boundary_normal_max=nrm,
        closedness_defect=d_defect,
        coclosedness_defect=delta_defect,
        coordinates={},
        potentials={"A1": dec.multipliers.F, "A2": dec.multipliers.G},
    )


def _membership_annulus(alpha: OneForm, tol) -> MembershipReport:
    f = sharp_map(alpha)
    r_in = f.r_in
    residue = _d_zbar(f).scaled(2)
    F = poisson_annulus(residue.real_part())
    G = poisson_annulus(residue.imag_part())
    W = F + G.scaled(1j)
    gradient_sum = W.wirtinger("d_z").scaled(2)
    h_log = LogLaurentField.from_laurent(f) - gradient_sum
    h, log_defect = h_log.laurent_part()
    harmonic = h.holomorphic_part()
    stray = math.hypot(h.antiholomorphic_norm(), log_defect)

    gF = F.wirtinger("d_z").scaled(2)
    sG = G.wirtinger("d_z").scaled(2j)
    one_over_z = laurent_monomial(-1, 0, 1.0, r_in=r_in)
    basis_norm = ann.annulus_norm(one_over_z)
    c_res = harmonic.coefficient(-1, 0)
    # Under the reflected sharp the field 1/z is the d ln(x^2+y^2) direction
    # (normal harmonic, exact) and i/z is its star image.
    a4_coord = c_res.real
    a5_coord = c_res.imag
    a6_part = harmonic - one_over_z.scaled(c_res)
    norms = {
        "A1": gF.norm(),
        "A2": sG.norm(),
        "A3": 0.0,
        "A4": abs(a4_coord) * basis_norm,
        "A5": abs(a5_coord) * basis_norm,
        "A6": ann.annulus_norm(a6_part),
    }
    total = ann.annulus_norm(f)
    labels, inconclusive = _labels_from_norms(norms, total, tol)
    if stray > tol * max(total, 1.0):
        inconclusive = tuple(sorted(set(inconclusive) | {"unresolved"}))
    d_defect = _coefficient_norm(exterior_derivative(alpha).density)
    delta_defect = _coefficient_norm(codifferential(alpha).value)
    t_out, n_out = boundary_traces(alpha, radius=1.0)
    t_in, n_in = boundary_traces(alpha, radius=r_in)
    return MembershipReport(
        domain="annulus",
        labels=labels,
        norms=norms,
        inconclusive=inconclusive,
        boundary_tangential_max=max(t_out, t_in),
        boundary_normal_max=max(n_out, n_in),
        closedness_defect=d_defect,
        coclosedness_defect=delta_defect,
        coordinates={"A4": a4_coord, "A5": a5_coord},
        potentials={"A1": F, "A2": G},
    )
