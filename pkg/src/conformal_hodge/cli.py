"""Command-line front end.

Subcommands: project, decompose, adjoint, classify, catalog, stationary,
wave, geodesic, check.  Exit codes: 0 success, 1 failed self-test, 2
input/parse error, 3 numerical failure (non-convergence, instability,
degeneracy), 4 incompatible domain/subcommand.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys

import numpy as np

from . import dynamics, forms, serialization as ser
from .annulus import NonConformalInputError, annulus_classify
from .catalog import DOMAINS, hodge_catalog
from .disk import (
    adjoint_dz_disk,
    conformal_decompose,
    helmholtz_decompose,
    project_con_rule,
    symplectic_decompose,
)
from .dynamics import (
    GeodesicDegeneracyError,
    GeodesicState,
    IntegrationInstabilityError,
    PotentialSpec,
    WaveState,
)
from .mapping import ConformalMap, EmbeddingError, InversionError, adjoint_dz_mapped, project_con_mapped
from .selftest import format_report, run_self_test
from .series import HolomorphicSeries
from .torus import torus_project_con

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_INCOMPATIBLE = 4

# Parallelism cap honoured by any internal worker pools (all current
# computations run serially, so the cap is respected trivially).
MAX_THREADS = 1


class InputError(Exception):
    pass


class IncompatibleError(Exception):
    pass


def _read_threads_env():
    global MAX_THREADS
    raw = os.environ.get("CONFORMAL_HODGE_THREADS")
    if raw is None:
        return
    try:
        val = int(raw)
        if val < 1:
            raise ValueError
        MAX_THREADS = val
    except ValueError:
        print(
            f"warning: ignoring invalid CONFORMAL_HODGE_THREADS={raw!r}",
            file=sys.stderr,
        )


# -- small parsers ---------------------------------------------------------------


def parse_domain(spec):
    """'disk' | 'map:<json-path>' | 'annulus:<r_in>' | 'torus' -> (kind, payload)."""
    if spec == "disk":
        return ("disk", None)
    if spec == "torus":
        return ("torus", None)
    if spec.startswith("map:"):
        path = spec[4:]
        return ("map", ser.map_from_json(ser.read_json(path)))
    if spec.startswith("annulus:"):
        try:
            r_in = float(spec.split(":", 1)[1])
        except ValueError as exc:
            raise InputError(f"bad annulus inner radius in {spec!r}") from exc
        if not 0.0 < r_in < 1.0:
            raise InputError("annulus inner radius must lie in (0, 1)")
        return ("annulus", r_in)
    raise InputError(
        f"unknown domain {spec!r}; expected disk, torus, map:<path>, annulus:<r_in>"
    )


def _split_top_level(s, sep="+"):
    parts, depth, cur = [], 0, []
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


_TERM_RE = re.compile(r"^(?:(?P<coef>.+?)\*)?(?P<z>z(?:\^(?P<pow>\d+))?)$")


def parse_series_spec(spec):
    """A JSON path, or a small expression like 'z', '0.5', '0.3*z^2 + 1'."""
    spec = spec.strip()
    if spec.endswith(".json") or os.path.exists(spec):
        return ser.series_from_json(ser.read_json(spec))
    text = spec.replace(" ", "")
    try:
        return HolomorphicSeries([complex(text)])
    except ValueError:
        pass
    coeffs = {}
    for term in _split_top_level(text):
        if not term:
            raise InputError(f"empty term in series expression {spec!r}")
        m = _TERM_RE.match(term)
        if m and m.group("z"):
            power = int(m.group("pow") or 1)
            coef_text = m.group("coef")
            coef = 1.0 + 0j
            if coef_text:
                try:
                    coef = complex(coef_text.strip("()"))
                except ValueError as exc:
                    raise InputError(f"bad coefficient {coef_text!r} in {spec!r}") from exc
        else:
            power = 0
            try:
                coef = complex(term.strip("()"))
            except ValueError as exc:
                raise InputError(f"cannot parse term {term!r} in {spec!r}") from exc
        coeffs[power] = coeffs.get(power, 0j) + coef
    top = max(coeffs)
    return HolomorphicSeries([coeffs.get(k, 0j) for k in range(top + 1)])


_CONFIG_KEYS = ("dt", "steps", "sample_stride", "degree", "tol")


def _apply_config(args):
    """Fold --map/--r-in into the domain selector and merge the JSON config.

    Explicit flags win; config values fill options left unset, and the
    documented defaults cover the rest.
    """
    if getattr(args, "map", None):
        args.domain = f"map:{args.map}"
    if getattr(args, "r_in", None) is not None:
        args.domain = f"annulus:{args.r_in}"
    path = getattr(args, "config", None)
    if path:
        cfg = ser.read_json(path)
        if not isinstance(cfg, dict):
            raise InputError("config JSON must be an object")
        unknown = set(cfg) - set(_CONFIG_KEYS)
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        for key, val in cfg.items():
            if hasattr(args, key) and getattr(args, key) is None:
                setattr(args, key, val)
    for key, default in (("degree", 16), ("tol", 1e-10)):
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, default)
    for key in ("dt", "steps"):
        if hasattr(args, key) and getattr(args, key) is None:
            raise InputError(f"--{key} is required (flag or config JSON)")
    if getattr(args, "dt", None) is not None:
        args.dt = float(args.dt)
    if getattr(args, "steps", None) is not None:
        args.steps = int(args.steps)


def _check_numeric(args):
    if getattr(args, "dt", None) is not None and args.dt <= 0:
        raise InputError("dt must be positive")
    if getattr(args, "steps", None) is not None and args.steps < 1:
        raise InputError("steps must be at least 1")
    stride = getattr(args, "sample_stride", None)
    if stride is not None and stride < 1:
        raise InputError("sample-stride must be at least 1")
    degree = getattr(args, "degree", None)
    if degree is not None and not 1 <= degree <= 64:
        raise InputError("degree must lie in [1, 64]")
    tol = getattr(args, "tol", None)
    if tol is not None and tol <= 0:
        raise InputError("tol must be positive")


def _emit(args, obj):
    text = ser.dumps(obj)
    if getattr(args, "out", None):
        ser.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


# -- subcommand implementations ----------------------------------------------------


def cmd_project(args):
    kind, payload = parse_domain(args.domain)
    if kind == "disk":
        f = ser.field_from_json(ser.read_json(args.input))
        _emit(args, ser.series_to_json(project_con_rule(f)))
    elif kind == "map":
        f = ser.field_from_json(ser.read_json(args.input))
        proj = project_con_mapped(payload, f, degree=args.degree)
        _emit(args, ser.series_to_json(proj))
    elif kind == "torus":
        f = ser.torus_from_json(ser.read_json(args.input))
        result = torus_project_con(f)
        _emit(
            args,
            {
                "c_theta": result.c_theta,
                "c_phi": result.c_phi,
                "residual": ser.torus_to_json(result.residual),
            },
        )
    else:
        raise IncompatibleError("project supports disk, map:<path>, torus domains")
    return EXIT_OK


def cmd_decompose(args):
    kind, _ = parse_domain(args.domain)
    if kind != "disk":
        raise IncompatibleError("decompose runs on the disk domain")
    f = ser.field_from_json(ser.read_json(args.input))
    dec = {
        "conformal": conformal_decompose,
        "helmholtz": helmholtz_decompose,
        "symplectic": symplectic_decompose,
    }[args.kind](f)
    _emit(args, ser.decomposition_to_json(dec))
    return EXIT_OK


def cmd_adjoint(args):
    kind, payload = parse_domain(args.domain)
    h = ser.series_from_json(ser.read_json(args.input))
    if kind == "disk":
        out = adjoint_dz_disk(h, max_degree=args.degree)
    elif kind == "map":
        out = adjoint_dz_mapped(payload, h, degree=args.degree)
    else:
        raise IncompatibleError("adjoint supports disk and map:<path> domains")
    _emit(args, ser.series_to_json(out))
    return EXIT_OK


def cmd_classify(args):
    kind, payload = parse_domain(args.domain)
    if kind == "disk":
        f = ser.field_from_json(ser.read_json(args.input))
        report = forms.hodge_membership(forms.flat_map(f), "disk", tol=args.tol)
        extra = {}
    elif kind == "annulus":
        data = ser.read_json(args.input)
        data.setdefault("r_in", payload)
        f = ser.laurent_from_json(data)
        if f.r_in != payload:
            raise InputError("r_in in the field JSON disagrees with the domain selector")
        report = forms.hodge_membership(forms.flat_map(f), "annulus", tol=args.tol)
        extra = {}
        if f.antiholomorphic_norm() == 0.0:
            cls = annulus_classify(f)
            extra["a4_coeff"] = cls.a4_coeff
            extra["a5_coeff"] = cls.a5_coeff
    else:
        raise IncompatibleError("classify supports disk and annulus:<r_in> domains")
    out = {
        "labels": list(report.labels),
        "inconclusive": list(report.inconclusive),
        "norms": report.norms,
        "coordinates": report.coordinates,
        "boundary_tangential_max": report.boundary_tangential_max,
        "boundary_normal_max": report.boundary_normal_max,
        "closedness_defect": report.closedness_defect,
        "coclosedness_defect": report.coclosedness_defect,
    }
    out.update(extra)
    _emit(args, out)
    return EXIT_OK


def cmd_catalog(args):
    if args.domain not in DOMAINS:
        raise IncompatibleError(f"catalog domains are {', '.join(DOMAINS)}")
    _emit(args, ser.catalog_to_json(hodge_catalog(args.domain)))
    return EXIT_OK


def cmd_stationary(args):
    kind, payload = parse_domain(args.domain)
    if kind not in ("disk", "map"):
        raise IncompatibleError("stationary supports disk and map:<path> domains")
    V = PotentialSpec.quadratic(args.c)
    init = parse_series_spec(args.init)
    domain = "disk" if kind == "disk" else payload
    result = dynamics.stationary_solve(
        V, init, tol=args.tol, max_iter=args.max_iter, domain=domain, degree=args.degree
    )
    summary = {
        "residual_norm": result.residual_norm,
        "iterations": result.iterations,
        "converged": result.converged,
        "xi": ser.series_to_json(result.xi),
    }
    if result.multipliers is not None:
        summary["F"] = ser.field_to_json(result.multipliers.F)
        summary["G"] = ser.field_to_json(result.multipliers.G)
    _emit(args, summary)
    return EXIT_OK if result.converged else EXIT_NUMERICAL


def _wave_run(xi0, xidot0, c, dt, steps, stride, max_m):
    state0 = WaveState(xi0, xidot0, 0.0)
    return dynamics.wave_integrate(
        state0, PotentialSpec.quadratic(c), dt, steps, sample_stride=stride, max_m=max_m
    )


def _relative_drifts(traj):
    if not traj.integrals:
        return []
    base = [rep.values for rep in traj.integrals]
    i0 = base[0]
    ref = max(max(i0), 1e-300)
    out = []
    for m in range(len(i0)):
        drift = max(abs(vals[m] - i0[m]) for vals in base)
        out.append(drift / max(i0[m], ref * 1e-12))
    return out


def cmd_wave(args):
    kind, _ = parse_domain(args.domain)
    if kind != "disk":
        raise IncompatibleError("the wave equation runs on the disk domain")
    xi0 = parse_series_spec(args.xi0)
    xidot0 = parse_series_spec(args.xidot0) if args.xidot0 else HolomorphicSeries([])
    stride = args.sample_stride or max(args.steps // 1000, 1)
    traj = _wave_run(xi0, xidot0, args.c, args.dt, args.steps, stride, args.max_m)
    n = len(traj.xi[0])
    header = ["t"]
    for k in range(n):
        header += [f"xi{k}_re", f"xi{k}_im"]
    header += [f"I_{m}" for m in range(args.max_m + 1)]
    rows = []
    for i, t in enumerate(traj.times):
        row = [t]
        for k in range(n):
            row += [traj.xi[i][k].real, traj.xi[i][k].imag]
        row += list(traj.integrals[i].values)
        rows.append(row)
    if args.out:
        ser.write_csv(args.out, header, rows)
    else:
        sys.stdout.write(ser.format_csv(header, rows))
    drifts = _relative_drifts(traj)
    summary = {
        "dt": args.dt,
        "steps": args.steps,
        "final_time": traj.times[-1],
        "first_integral_max_rel_drift": max(drifts) if drifts else None,
    }
    if args.halve_dt:
        finals = []
        for k in (1, 2, 4):
            tk = _wave_run(xi0, xidot0, args.c, args.dt / k, args.steps * k,
                           args.steps * k, args.max_m)
            finals.append(tk.xi[-1])
        e1 = float(np.linalg.norm(finals[0] - finals[1]))
        e2 = float(np.linalg.norm(finals[1] - finals[2]))
        summary["order"] = math.log2(e1 / e2) if e2 > 0 else None
    if args.summary:
        ser.write_json(args.summary, summary)
    else:
        sys.stdout.write(ser.dumps(summary))
    return EXIT_OK


def cmd_geodesic(args):
    kind, payload = parse_domain(args.domain)
    if kind == "disk":
        mapping = ConformalMap.identity()
    elif kind == "map":
        mapping = payload
    else:
        raise IncompatibleError("geodesic supports disk and map:<path> domains")
    xi0 = parse_series_spec(args.xi0)
    stride = args.sample_stride or max(args.steps // 1000, 1)

    def run(dt, steps, stride_):
        return dynamics.geodesic_integrate(
            GeodesicState(mapping, xi0, 0.0),
            dt,
            steps,
            sample_stride=stride_,
            degree=args.degree,
        )

    traj = run(args.dt, args.steps, stride)
    n_phi = len(traj.phi[0])
    n_xi = len(traj.xi[0])
    header = ["t"]
    header += [x for k in range(n_phi) for x in (f"phi{k}_re", f"phi{k}_im")]
    header += [x for k in range(n_xi) for x in (f"xi{k}_re", f"xi{k}_im")]
    header += ["energy", "min_deriv"]
    rows = []
    for i, t in enumerate(traj.times):
        row = [t]
        row += [v for k in range(n_phi) for v in (traj.phi[i][k].real, traj.phi[i][k].imag)]
        row += [v for k in range(n_xi) for v in (traj.xi[i][k].real, traj.xi[i][k].imag)]
        row += [traj.energy[i], traj.min_deriv[i]]
        rows.append(row)
    if args.out:
        ser.write_csv(args.out, header, rows)
    else:
        sys.stdout.write(ser.format_csv(header, rows))
    e0 = traj.energy[0]
    summary = {
        "dt": args.dt,
        "steps": args.steps,
        "final_time": traj.times[-1],
        "energy_rel_drift": max(abs(e - e0) for e in traj.energy) / max(e0, 1e-300),
        "min_deriv_min": min(traj.min_deriv),
    }
    if args.halve_dt:
        finals = []
        for k in (1, 2, 4):
            tk = run(args.dt / k, args.steps * k, args.steps * k)
            finals.append(np.concatenate([tk.phi[-1], tk.xi[-1]]))
        e1 = float(np.linalg.norm(finals[0] - finals[1]))
        e2 = float(np.linalg.norm(finals[1] - finals[2]))
        summary["order"] = math.log2(e1 / e2) if e2 > 0 else None
    if args.summary:
        ser.write_json(args.summary, summary)
    else:
        sys.stdout.write(ser.dumps(summary))
    return EXIT_OK


def cmd_check(args):
    quad = (64, 128)
    if args.quadrature:
        try:
            nr, nt = args.quadrature.lower().split("x")
            quad = (int(nr), int(nt))
        except ValueError as exc:
            raise InputError("quadrature must look like 64x128") from exc
    results = run_self_test(quadrature=quad, inner_fault=args.inject_inner_fault)
    print(format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


# -- parser ------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="conformal-hodge",
        description="Spectral calculus for conformal vector fields on planar domains",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, domain=True, out=True):
        if domain:
            sp.add_argument("--domain", default="disk",
                            help="disk | map:<json> | annulus:<r_in> | torus")
        if out:
            sp.add_argument("--out", help="output path (default: stdout)")

    def numeric(sp, dt=False):
        sp.add_argument("--config", help="JSON with {dt, steps, sample_stride, degree, tol}")
        if dt:
            sp.add_argument("--dt", type=float, default=None)
            sp.add_argument("--steps", type=int, default=None)
            sp.add_argument("--sample-stride", type=int, default=None)

    sp = sub.add_parser("project", help="project a field onto the conformal subspace")
    common(sp)
    sp.add_argument("--in", dest="input", required=True, help="field JSON path")
    sp.add_argument("--degree", type=int, default=None)
    sp.add_argument("--map", help="shorthand for --domain map:<path>")
    numeric(sp)
    sp.set_defaults(func=cmd_project)

    sp = sub.add_parser("decompose", help="orthogonal decomposition with multipliers")
    common(sp)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--kind", choices=("conformal", "helmholtz", "symplectic"),
                    default="conformal")
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("adjoint", help="adjoint of d/dz applied to a conformal field")
    common(sp)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--degree", type=int, default=None)
    sp.add_argument("--map", help="shorthand for --domain map:<path>")
    numeric(sp)
    sp.set_defaults(func=cmd_adjoint)

    sp = sub.add_parser("classify", help="six-space membership labels for a field")
    common(sp)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--r-in", type=float, default=None,
                    help="shorthand for --domain annulus:<r_in>")
    numeric(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("catalog", help="subspace dimensions for a model domain")
    sp.add_argument("--domain", required=True, help="disk | annulus | torus | sphere")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_catalog)

    sp = sub.add_parser("stationary", help="solve the stationary conformal problem")
    common(sp)
    sp.add_argument("--c", type=float, default=0.0, help="quadratic potential constant")
    sp.add_argument("--init", default="0", help="initial series (expression or JSON)")
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--max-iter", type=int, default=50)
    sp.add_argument("--degree", type=int, default=None)
    sp.add_argument("--map", help="shorthand for --domain map:<path>")
    numeric(sp)
    sp.set_defaults(func=cmd_stationary)

    sp = sub.add_parser("wave", help="integrate the conformal wave equation")
    common(sp)
    sp.add_argument("--c", type=float, default=0.0)
    sp.add_argument("--xi0", required=True, help="initial series (expression or JSON)")
    sp.add_argument("--xidot0", default=None)
    sp.add_argument("--max-m", type=int, default=6)
    sp.add_argument("--halve-dt", action="store_true",
                    help="also run dt/2 and dt/4 and report the observed order")
    sp.add_argument("--summary", help="write the summary JSON here")
    numeric(sp, dt=True)
    sp.set_defaults(func=cmd_wave)

    sp = sub.add_parser("geodesic", help="integrate the conformal embedding flow")
    common(sp)
    sp.add_argument("--xi0", required=True)
    sp.add_argument("--degree", type=int, default=None)
    sp.add_argument("--map", help="shorthand for --domain map:<path>")
    sp.add_argument("--halve-dt", action="store_true")
    sp.add_argument("--summary")
    numeric(sp, dt=True)
    sp.set_defaults(func=cmd_geodesic)

    sp = sub.add_parser("check", help="run the built-in verification suites")
    sp.add_argument("--quadrature", help="kernel quadrature, e.g. 64x128 or 8x16")
    sp.add_argument("--inject-inner-fault", type=float, default=0.0,
                    help="test-only: perturb the inner-product constant")
    sp.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    _read_threads_env()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_INPUT
    try:
        _apply_config(args)
        _check_numeric(args)
        return args.func(args)
    except (InputError, ser.FormatError, NonConformalInputError, FileNotFoundError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except IncompatibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except (IntegrationInstabilityError, GeodesicDegeneracyError, EmbeddingError,
            InversionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
