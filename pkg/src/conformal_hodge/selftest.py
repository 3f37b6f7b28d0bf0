"""Built-in verification suite behind the `check` CLI subcommand.

Each suite exercises one family of cross-checks (independent-route
agreement, adjoint identities, reconstruction, the catalog table,
conservation) and reports its worst observed defect against a threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import annulus as ann
from . import dynamics, series
from .catalog import hodge_catalog
from .disk import (
    adjoint_dz_disk,
    conformal_decompose,
    helmholtz_decompose,
    project_con_bergman,
    project_con_gram_oracle,
    project_con_rule,
)
from .mapping import ConformalMap, adjoint_dz_mapped, map_inner_product, pullback
from .quadrature import QuadratureSpec
from .series import HolomorphicSeries, inner_product, monomial, norm

DEFAULT_QUADRATURE = QuadratureSpec(64, 128)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    metric: float
    threshold: float
    note: str = ""


def _series_gap(a: HolomorphicSeries, b: HolomorphicSeries) -> float:
    return max(
        (abs(a.coefficient(k) - b.coefficient(k)) for k in range(max(a.degree, b.degree) + 1)),
        default=0.0,
    )


def suite_projection_three_way(quadrature=DEFAULT_QUADRATURE, degree=6):
    worst_exact = 0.0
    worst_quad = 0.0
    for m in range(degree + 1):
        for n in range(degree + 1 - m):
            f = monomial(m, n)
            rule = project_con_rule(f)
            gram = project_con_gram_oracle(f)
            berg = project_con_bergman(f, quadrature=quadrature)
            worst_exact = max(worst_exact, _series_gap(rule, gram))
            worst_quad = max(worst_quad, _series_gap(rule, berg))
    degraded = tuple(quadrature) < tuple(DEFAULT_QUADRATURE)
    quad_threshold = 1e-3 if degraded else 1e-6
    note = "degraded quadrature, relaxed threshold" if degraded else ""
    results = [
        SuiteResult("projection rule vs gram oracle", worst_exact <= 1e-12, worst_exact, 1e-12),
        SuiteResult(
            "projection rule vs kernel quadrature",
            worst_quad <= quad_threshold,
            worst_quad,
            quad_threshold,
            note,
        ),
    ]
    return results


def suite_adjoint_identities():
    worst = 0.0
    for m in range(9):
        for n in range(9):
            xi, eta = monomial(m, 0), monomial(n, 0)
            lhs = inner_product(xi, series.wirtinger(eta, "d_z")).real_value
            rhs = inner_product(
                adjoint_dz_disk(HolomorphicSeries.from_field(xi)).to_field(), eta
            ).real_value
            worst = max(worst, abs(lhs - rhs))
    out = [SuiteResult("disk adjoint identity", worst <= 1e-12, worst, 1e-12)]

    mapping = ConformalMap(HolomorphicSeries([0.0, 1.0, 0.1]))
    worst_mapped = 0.0
    for j in range(5):
        xi = HolomorphicSeries([0.0] * j + [1.0])
        adj = adjoint_dz_mapped(mapping, xi, degree=8)
        for k in range(5):
            eta = HolomorphicSeries([0.0] * k + [1.0])
            lhs = map_inner_product(
                mapping,
                pullback(mapping, xi).to_field(),
                pullback(mapping, eta.derivative()).to_field(),
            ).real_value
            rhs = map_inner_product(
                mapping,
                pullback(mapping, adj).to_field(),
                pullback(mapping, eta).to_field(),
            ).real_value
            worst_mapped = max(worst_mapped, abs(lhs - rhs))
    out.append(
        SuiteResult("mapped adjoint identity", worst_mapped <= 1e-8, worst_mapped, 1e-8)
    )
    return out


def suite_decomposition(n_fields=20, degree=6, seed=7):
    rng = np.random.default_rng(seed)
    worst_recon = 0.0
    worst_orth = 0.0
    worst_boundary = 0.0
    worst_rule = 0.0
    for _ in range(n_fields):
        f = series.random_field(rng, degree)
        dec = conformal_decompose(f)
        scale = max(norm(f), 1e-30)
        worst_recon = max(worst_recon, dec.residual_norm / scale)
        parts = [p for _, p in dec.parts()]
        norms = [max(norm(p), 1e-30) for p in parts]
        for i in range(3):
            for j in range(i + 1, 3):
                ip = abs(inner_product(parts[i], parts[j]).real_value)
                worst_orth = max(worst_orth, ip / (norms[i] * norms[j]))
        coeff_scale = max(
            series.coefficient_norm(dec.multipliers.F),
            series.coefficient_norm(dec.multipliers.G),
            1e-30,
        )
        worst_boundary = max(
            worst_boundary, dec.multipliers.boundary_trace_max() / coeff_scale
        )
        worst_rule = max(worst_rule, dec.closed_form_defect / scale)
        hh = helmholtz_decompose(f)
        div_defect = series.coefficient_norm(
            series.real_part(series.div_curl(hh.divergence_free))
        )
        worst_recon = max(worst_recon, hh.residual_norm / scale, div_defect / scale)
    return [
        SuiteResult("decomposition reconstruction", worst_recon <= 1e-10, worst_recon, 1e-10),
        SuiteResult("decomposition orthogonality", worst_orth <= 1e-10, worst_orth, 1e-10),
        SuiteResult("multiplier boundary traces", worst_boundary <= 1e-10, worst_boundary, 1e-10),
        SuiteResult("poisson vs closed-form projection", worst_rule <= 1e-10, worst_rule, 1e-10),
    ]


def suite_catalog():
    expected = {
        "disk": {"A1": "infinite", "A2": "infinite", "A3": "zero", "A4": "zero",
                 "A5": "zero", "A6": "infinite"},
        "annulus": {"A1": "infinite", "A2": "infinite", "A3": "zero",
                    "A4": "finite(1)", "A5": "finite(1)", "A6": "infinite"},
        "torus": {"A1": "infinite", "A2": "infinite", "A3": "finite(2)",
                  "A4": "zero", "A5": "zero", "A6": "zero"},
        "sphere": {"A1": "infinite", "A2": "infinite", "A3": "zero",
                   "A4": "zero", "A5": "zero", "A6": "zero"},
    }
    ok = all(hodge_catalog(d).as_dict() == expected[d] for d in expected)
    cls_1z = ann.annulus_classify(ann.laurent_monomial(-1, 0, 1.0, r_in=0.5))
    cls_iz = ann.annulus_classify(ann.laurent_monomial(-1, 0, 1j, r_in=0.5))
    ok = ok and cls_1z.a5_coeff == 1.0 and cls_1z.a4_coeff == 0.0
    ok = ok and cls_iz.a4_coeff == 1.0 and cls_iz.a5_coeff == 0.0
    return [SuiteResult("hodge catalog table", ok, 0.0 if ok else 1.0, 0.5)]


def suite_wave(steps=2000, dt=1e-3):
    state0 = dynamics.WaveState(
        HolomorphicSeries([0.0, 1.0]), HolomorphicSeries([]), 0.0
    )
    traj = dynamics.wave_integrate(
        state0, dynamics.PotentialSpec.quadratic(0.0), dt, steps, sample_stride=10
    )
    worst_mode = 0.0
    for t, x in zip(traj.times, traj.xi):
        exact, _ = dynamics.wave_mode_solution(1, 0.0, 1.0, 0.0, t)
        worst_mode = max(worst_mode, abs(x[1] - exact))
    i1 = [rep.values[1] for rep in traj.integrals]
    drift = max(abs(v - i1[0]) for v in i1) / i1[0]
    return [
        SuiteResult("wave vs closed form", worst_mode <= 1e-4, worst_mode, 1e-4),
        SuiteResult("wave first-integral drift", drift <= 1e-6, drift, 1e-6),
    ]


def suite_geodesic(steps=300, dt=1e-3):
    state0 = dynamics.GeodesicState(
        ConformalMap.identity(), HolomorphicSeries([0.1]), 0.0
    )
    traj = dynamics.geodesic_integrate(
        state0, dt, steps, sample_stride=30, degree=8, proj_degree=4
    )
    e0 = traj.energy[0]
    drift = max(abs(e - e0) for e in traj.energy) / max(e0, 1e-30)
    return [SuiteResult("geodesic energy drift", drift <= 1e-6, drift, 1e-6)]


def run_self_test(quadrature=DEFAULT_QUADRATURE, inner_fault=0.0):
    """Run every suite; returns the list of SuiteResult rows."""
    results = []
    with series.inner_product_fault(inner_fault):
        results += suite_projection_three_way(quadrature=QuadratureSpec(*quadrature))
        results += suite_adjoint_identities()
        results += suite_decomposition()
        results += suite_catalog()
        results += suite_wave()
        results += suite_geodesic()
    return results


def format_report(results):
    width = max(len(r.name) for r in results) + 2
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        note = f"  ({r.note})" if r.note else ""
        lines.append(
            f"{status}  {r.name:<{width}} metric={r.metric:.3e} "
            f"threshold={r.threshold:.1e}{note}"
        )
    failed = [r.name for r in results if not r.passed]
    lines.append(
        f"{len(results) - len(failed)}/{len(results)} suites passed"
        + (f"; failing: {', '.join(failed)}" if failed else "")
    )
    return "\n".join(lines)
