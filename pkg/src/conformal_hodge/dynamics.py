"""Variational dynamics of conformal fields: stationary points, waves, geodesics.

The wave equation integrates with kick-drift-kick leapfrog (the quadratic
potential turns the modes into uncoupled oscillators, which the symplectic
scheme tracks with bounded energy error); the geodesic embedding flow uses
classical RK4 with re-projection onto the conformal subspace each stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import series
from .disk import (
    MultiplierPair,
    adjoint_dz_disk,
    conformal_decompose,
    project_con_rule,
)
from .mapping import (
    ConformalMap,
    EmbeddingError,
    adjoint_dz_mapped,
    map_inner_product,
    project_con_mapped,
    pullback,
)
from .series import (
    DEFAULT_MAX_DEGREE,
    BivariateField,
    HolomorphicSeries,
    add,
    as_field,
    as_series,
    conjugate,
    multiply,
    scale,
    subtract,
    wirtinger,
)


class IntegrationInstabilityError(RuntimeError):
    """Coefficient norm blew up; reduce dt (stability needs dt * omega_max < 2)."""


class GeodesicDegeneracyError(RuntimeError):
    """The evolving embedding lost its immersion or boundary injectivity."""


# -- potentials ----------------------------------------------------------------


@dataclass(frozen=True)
class PotentialSpec:
    """Potential V acting through the composition grad(V) o xi.

    kind 'quadratic' means V(z) = c |z|^2 / 2, whose gradient field is c z,
    so composition is just scaling by c.  kind 'polynomial' carries the
    gradient V_x + i V_y as a bivariate field to be composed by series
    substitution.
    """

    kind: str
    c: float = 0.0
    gradient_field: BivariateField | None = None

    @staticmethod
    def quadratic(c):
        return PotentialSpec(kind="quadratic", c=float(c))

    @staticmethod
    def zero():
        return PotentialSpec(kind="quadratic", c=0.0)

    @staticmethod
    def polynomial(V):
        V = as_field(V)
        if not V.is_real(tol=1e-12 * max(series.coefficient_norm(V), 1.0)):
            raise ValueError("polynomial potential must be real-valued")
        grad = scale(wirtinger(series.real_part(V), "d_zbar"), 2)  # V_x + i V_y
        return PotentialSpec(kind="polynomial", gradient_field=grad)


def compose_bivariate(W, g, max_degree=DEFAULT_MAX_DEGREE):
    """Substitute g into W: sum W_ab g^a conj(g)^b, truncated with mass reporting."""
    W, g = as_field(W), as_field(g)
    gc = conjugate(g)
    pow_g = {0: series.monomial(0, 0)}
    pow_gc = {0: series.monomial(0, 0)}

    def _power(table, base, k):
        if k not in table:
            table[k] = multiply(_power(table, base, k - 1), base, max_degree=max_degree)
        return table[k]

    total = series.zero_field()
    for (a, b), c in W.items():
        term = multiply(_power(pow_g, g, a), _power(pow_gc, gc, b), max_degree=max_degree)
        total = add(total, scale(term, c))
    return total


def grad_V_compose(V: PotentialSpec, xi, max_degree=DEFAULT_MAX_DEGREE) -> BivariateField:
    """grad(V) evaluated along the field xi."""
    xi = as_field(xi)
    if V.kind == "quadratic":
        return scale(xi, V.c)
    if V.kind == "polynomial":
        return compose_bivariate(V.gradient_field, xi, max_degree=max_degree)
    raise ValueError(f"unknown potential kind {V.kind!r}")


# -- stationary problem ----------------------------------------------------------


def stationary_residual(xi, V: PotentialSpec, domain="disk", proj_degree=None):
    """Adjoint-derivative term plus projected potential force; zero at stationary points."""
    xi = as_series(xi)
    if domain == "disk" or domain is None:
        adj = adjoint_dz_disk(xi.derivative())
        forced = project_con_rule(grad_V_compose(V, xi.to_field()))
        return adj + forced
    mapping: ConformalMap = domain
    if proj_degree is None:
        proj_degree = xi.degree + 1
    adj = adjoint_dz_mapped(mapping, xi.derivative(), degree=proj_degree)
    pulled = pullback(mapping, xi)
    forced_field = grad_V_compose(V, pulled.to_field(),
                                  max_degree=mapping.natural_cap(proj_degree))
    forced = project_con_mapped(mapping, forced_field, degree=proj_degree)
    return adj + forced


@dataclass(frozen=True)
class StationaryResult:
    xi: HolomorphicSeries
    multipliers: MultiplierPair | None
    iterations: int
    converged: bool
    residual_norm: float


def _coeff_array(h: HolomorphicSeries, length):
    out = np.zeros(length, dtype=complex)
    cs = h.coeffs[:length]
    out[: len(cs)] = cs
    return out


def stationary_solve(V: PotentialSpec, init, tol=1e-10, max_iter=50, damping=0.5,
                     domain="disk", degree=None) -> StationaryResult:
    """Damped Newton (least-squares steps) on the truncated coefficient vector.

    Non-convergence is a reported outcome, not an exception: the best iterate
    comes back with converged=False.  Multipliers are recovered afterwards by
    decomposing the unprojected residual (disk domain only).
    """
    init = as_series(init)
    n = (degree if degree is not None else max(init.degree, 1)) + 1
    m = n + 2  # adjoint raises the degree by one; keep slack

    def residual_vec(x):
        r = stationary_residual(HolomorphicSeries(x), V, domain=domain)
        arr = _coeff_array(r, m)
        return np.concatenate([arr.real, arr.imag])

    x = _coeff_array(init, n)
    r = residual_vec(x)
    rnorm = float(np.linalg.norm(r))
    iterations = 0
    while rnorm > tol and iterations < max_iter:
        J = np.zeros((2 * m, 2 * n))
        h = 1e-7
        for k in range(n):
            for part, delta in ((0, h), (1, h * 1j)):
                xp = x.copy()
                xp[k] += delta
                J[:, 2 * k + part] = (residual_vec(xp) - r) / h
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        dx = step[0::2] + 1j * step[1::2]
        lam = 1.0
        for _ in range(30):
            r_new = residual_vec(x + lam * dx)
            if np.linalg.norm(r_new) < (1 - 1e-4 * lam) * rnorm:
                break
            lam *= damping
        else:
            break  # no descent; report best iterate
        x = x + lam * dx
        r = residual_vec(x)
        rnorm = float(np.linalg.norm(r))
        iterations += 1
    xi = HolomorphicSeries(x)
    multipliers = None
    if domain == "disk" or domain is None:
        unprojected = add(
            adjoint_dz_disk(xi.derivative()).to_field(),
            grad_V_compose(V, xi.to_field()),
        )
        multipliers = conformal_decompose(unprojected).multipliers
    return StationaryResult(
        xi=xi,
        multipliers=multipliers,
        iterations=iterations,
        converged=bool(rnorm <= tol),
        residual_norm=rnorm,
    )


# -- conformal wave equation -------------------------------------------------------


@dataclass(frozen=True)
class WaveState:
    xi: HolomorphicSeries
    xi_t: HolomorphicSeries
    t: float = 0.0


@dataclass(frozen=True)
class FirstIntegralReport:
    """Per-mode oscillator energies I_m = |xi_t_m|^2/2 + (m^2+m+c)|xi_m|^2/2."""

    values: tuple
    t: float


def first_integrals(state: WaveState, c, max_m) -> FirstIntegralReport:
    x = _coeff_array(state.xi, max_m + 1)
    v = _coeff_array(state.xi_t, max_m + 1)
    vals = tuple(
        0.5 * abs(v[k]) ** 2 + 0.5 * (k * k + k + c) * abs(x[k]) ** 2
        for k in range(max_m + 1)
    )
    return FirstIntegralReport(values=vals, t=state.t)


def wave_rhs(state: WaveState, V: PotentialSpec) -> HolomorphicSeries:
    """Acceleration: minus the adjoint of the derivative, minus the projected force."""
    adj = adjoint_dz_disk(state.xi.derivative())
    forced = project_con_rule(grad_V_compose(V, state.xi.to_field()))
    return -(adj + forced)


def wave_mode_solution(m, c, xi0, xidot0, t):
    """Exact evolution of a single mode: oscillator, drift, or hyperbolic growth."""
    w2 = m * m + m + c
    xi0 = complex(xi0)
    xidot0 = complex(xidot0)
    if w2 > 0:
        w = math.sqrt(w2)
        return (
            xi0 * math.cos(w * t) + xidot0 * math.sin(w * t) / w,
            -xi0 * w * math.sin(w * t) + xidot0 * math.cos(w * t),
        )
    if w2 == 0:
        return (xi0 + t * xidot0, xidot0)
    mu = math.sqrt(-w2)
    return (
        xi0 * math.cosh(mu * t) + xidot0 * math.sinh(mu * t) / mu,
        xi0 * mu * math.sinh(mu * t) + xidot0 * math.cosh(mu * t),
    )


@dataclass(frozen=True)
class WaveTrajectory:
    times: tuple
    xi: tuple  # coefficient arrays per sample
    xi_t: tuple
    integrals: tuple | None
    dt: float
    steps: int
    sample_stride: int


def wave_integrate(state0: WaveState, V: PotentialSpec, dt, steps, sample_stride=1,
                   max_m=6, instability_factor=1e6) -> WaveTrajectory:
    """Stoermer-Verlet (kick-drift-kick) on the coefficient vector.

    For the quadratic potential the acceleration is the diagonal map
    -(m^2+m+c) xi_m and per-mode energies are reported at every sample.
    Stability needs dt < 2/omega_max with omega_max^2 = D^2+D+c at the
    truncation degree D; blow-up past instability_factor aborts.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = max(state0.xi.degree, state0.xi_t.degree, max_m) + 1
    x = _coeff_array(state0.xi, n)
    v = _coeff_array(state0.xi_t, n)
    quadratic = V.kind == "quadratic"
    ks = np.arange(n, dtype=float)

    if quadratic:
        diag = ks * ks + ks + V.c

        def accel(xc):
            return -diag * xc

    else:

        def accel(xc):
            rhs = wave_rhs(WaveState(HolomorphicSeries(xc), HolomorphicSeries([]), 0.0), V)
            return _coeff_array(rhs, n)

    initial_scale = max(float(np.linalg.norm(x)) + float(np.linalg.norm(v)), 1.0)
    times, xs, vs, reports = [], [], [], []

    def record(step):
        t = step * dt
        times.append(t)
        xs.append(x.copy())
        vs.append(v.copy())
        if quadratic:
            st = WaveState(HolomorphicSeries(x), HolomorphicSeries(v), t)
            reports.append(first_integrals(st, V.c, max_m))

    record(0)
    a = accel(x)
    for step in range(1, steps + 1):
        v_half = v + 0.5 * dt * a
        x = x + dt * v_half
        a = accel(x)
        v = v_half + 0.5 * dt * a
        if np.linalg.norm(x) > instability_factor * initial_scale:
            raise IntegrationInstabilityError(
                f"coefficient norm exceeded {instability_factor:.0e} x initial at "
                f"step {step}; dt*omega_max = "
                f"{dt * math.sqrt(max((n - 1) ** 2 + n - 1 + (V.c if quadratic else 0.0), 0.0)):.3f} "
                "(stability needs < 2)"
            )
        if step % sample_stride == 0 or step == steps:
            record(step)
    return WaveTrajectory(
        times=tuple(times),
        xi=tuple(xs),
        xi_t=tuple(vs),
        integrals=tuple(reports) if quadratic else None,
        dt=dt,
        steps=steps,
        sample_stride=sample_stride,
    )


# -- geodesic flow of conformal embeddings ------------------------------------------


@dataclass(frozen=True)
class GeodesicState:
    phi: ConformalMap
    xi: HolomorphicSeries  # velocity in image coordinates
    t: float = 0.0


def geodesic_rhs(state: GeodesicState, proj_degree=None, max_degree=None):
    """Time derivatives (phi_dot, xi_dot) of the embedding flow.

    phi_dot is the pulled-back velocity xi o phi.  xi_dot is the projection
    of conj(xi) * adjoint_dz(xi) - 2 div(xi) xi; the orthogonal multiplier
    terms are absorbed by the projection and recoverable on demand from the
    unprojected field.
    """
    mapping, xi = state.phi, state.xi
    if proj_degree is None:
        proj_degree = max(xi.degree + 1, 2)
    if max_degree is None:
        max_degree = max(mapping.natural_cap(proj_degree), DEFAULT_MAX_DEGREE)
    xi_pull = pullback(mapping, xi, max_degree)
    phi_dot = xi_pull
    aT = adjoint_dz_mapped(mapping, xi, degree=proj_degree, max_degree=max_degree)
    aT_pull = pullback(mapping, aT, max_degree)
    xi_prime_pull = pullback(mapping, xi.derivative(), max_degree)
    div_pull = add(xi_prime_pull.to_field(), conjugate(xi_prime_pull.to_field()))
    # degree-budget truncation is the design here, so drop mass silently
    term1, _ = series.convolve(
        conjugate(xi_pull.to_field()), aT_pull.to_field(), max_degree=max_degree
    )
    term2, _ = series.convolve(div_pull, xi_pull.to_field(), max_degree=max_degree)
    B = subtract(term1, scale(term2, 2))
    xi_dot = project_con_mapped(mapping, B, degree=proj_degree, max_degree=max_degree)
    return phi_dot, xi_dot


def geodesic_energy(state: GeodesicState) -> float:
    xi_pull = pullback(state.phi, state.xi)
    return 0.5 * map_inner_product(state.phi, xi_pull.to_field(), xi_pull.to_field()).real_value


@dataclass(frozen=True)
class GeodesicTrajectory:
    times: tuple
    phi: tuple  # coefficient arrays per sample
    xi: tuple
    energy: tuple
    min_deriv: tuple
    dt: float
    steps: int
    sample_stride: int


def geodesic_integrate(state0: GeodesicState, dt, steps, sample_stride=1,
                       degree=DEFAULT_MAX_DEGREE, proj_degree=None,
                       min_deriv_floor=1e-3) -> GeodesicTrajectory:
    """Classical RK4 on the pair of coefficient vectors.

    The velocity stays a holomorphic series by construction (every stage
    output passes through the conformal projection).  Each accepted step the
    map is revalidated: min |phi'| under the floor or a boundary
    self-intersection aborts the run.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if proj_degree is None:
        proj_degree = max(state0.xi.degree + 1, 2)
    n_phi = degree + 1
    n_xi = proj_degree + 1
    phi_arr = _coeff_array(state0.phi.phi, n_phi)
    xi_arr = _coeff_array(state0.xi, n_xi)

    def rhs(phi_c, xi_c):
        mapping = ConformalMap(HolomorphicSeries(phi_c), validate=False)
        st = GeodesicState(mapping, HolomorphicSeries(xi_c), 0.0)
        phi_dot, xi_dot = geodesic_rhs(st, proj_degree=proj_degree, max_degree=degree)
        return (
            _coeff_array(phi_dot.truncated(degree, warn=False), n_phi),
            _coeff_array(xi_dot, n_xi),
        )

    times, phis, xis, energies, derivs = [], [], [], [], []

    def record(step, mapping):
        times.append(step * dt)
        phis.append(phi_arr.copy())
        xis.append(xi_arr.copy())
        st = GeodesicState(mapping, HolomorphicSeries(xi_arr), step * dt)
        energies.append(geodesic_energy(st))
        derivs.append(mapping.min_deriv)

    record(0, ConformalMap(HolomorphicSeries(phi_arr), validate=False))
    for step in range(1, steps + 1):
        k1p, k1x = rhs(phi_arr, xi_arr)
        k2p, k2x = rhs(phi_arr + 0.5 * dt * k1p, xi_arr + 0.5 * dt * k1x)
        k3p, k3x = rhs(phi_arr + 0.5 * dt * k2p, xi_arr + 0.5 * dt * k2x)
        k4p, k4x = rhs(phi_arr + dt * k3p, xi_arr + dt * k3x)
        phi_arr = phi_arr + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        xi_arr = xi_arr + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        mapping = ConformalMap(HolomorphicSeries(phi_arr), validate=False)
        if mapping.min_deriv < min_deriv_floor:
            raise GeodesicDegeneracyError(
                f"min |phi'| = {mapping.min_deriv:.3e} fell below the floor "
                f"{min_deriv_floor:g} at step {step}"
            )
        try:
            mapping.check_boundary_injectivity()
        except EmbeddingError as exc:
            raise GeodesicDegeneracyError(
                f"boundary self-intersection at step {step}: {exc}"
            ) from exc
        if step % sample_stride == 0 or step == steps:
            record(step, mapping)
    return GeodesicTrajectory(
        times=tuple(times),
        phi=tuple(phis),
        xi=tuple(xis),
        energy=tuple(energies),
        min_deriv=tuple(derivs),
        dt=dt,
        steps=steps,
        sample_stride=sample_stride,
    )


# -- variation identity (finite-difference verification) ----------------------------


def solve_composition(inner: HolomorphicSeries, rhs: HolomorphicSeries, degree):
    """Find series c with c(inner(z)) = rhs(z) matched through the available orders."""
    rows = max(rhs.degree, degree * max(inner.degree, 1)) + 1
    M = np.zeros((rows, degree + 1), dtype=complex)
    power = HolomorphicSeries([1.0])
    for k in range(degree + 1):
        M[:, k] = _coeff_array(power, rows)
        power = (power * inner).truncated(rows - 1, warn=False)
    b = _coeff_array(rhs, rows)
    sol, *_ = np.linalg.lstsq(M, b, rcond=None)
    return HolomorphicSeries(sol)


def variation_identity_defect(mapping: ConformalMap, xi, eta0, eta1,
                              eps=1e-5, out_degree=None, max_degree=None):
    """Central-difference check of the variation formula for the velocity field.

    Vary the embedding by s -> phi + s (eta0 o phi) with time derivative
    carrying eta1 = d(eta)/dt; the recovered velocity variation must match
    eta1 + eta0' xi - xi' eta0.  Returns (defect_norm, closed_form_norm) in
    the weighted norm of the image domain.
    """
    xi, eta0, eta1 = as_series(xi), as_series(eta0), as_series(eta1)
    if out_degree is None:
        out_degree = xi.degree + eta0.degree + 4
    if max_degree is None:
        max_degree = 4 * max(
            mapping.natural_cap(out_degree), DEFAULT_MAX_DEGREE
        )
    phi = mapping.phi
    phi_dot = pullback(mapping, xi, max_degree)
    eta0_pull = pullback(mapping, eta0, max_degree)
    eta1_pull = pullback(mapping, eta1, max_degree)
    eta0p_pull = pullback(mapping, eta0.derivative(), max_degree)

    def velocity(s):
        phi_s = phi + s * eta0_pull
        phi_dot_s = phi_dot + s * (eta1_pull + (eta0p_pull * phi_dot).truncated(max_degree, warn=False))
        return solve_composition(phi_s, phi_dot_s, out_degree)

    fd = (velocity(eps) - velocity(-eps)) * (1.0 / (2 * eps))
    closed = eta1 + (eta0.derivative() * xi - xi.derivative() * eta0).truncated(
        out_degree, warn=False
    )
    diff = fd - closed
    diff_pull = pullback(mapping, diff, max_degree)
    closed_pull = pullback(mapping, closed, max_degree)
    defect = math.sqrt(max(
        map_inner_product(mapping, diff_pull.to_field(), diff_pull.to_field()).real_value, 0.0))
    ref = math.sqrt(max(
        map_inner_product(mapping, closed_pull.to_field(), closed_pull.to_field()).real_value, 0.0))
    return defect, ref
