"""JSON and CSV interchange formats.

Field JSON: {"max_degree": D, "terms": [{"m": int, "n": int, "re": float,
"im": float}, ...]} with terms in lexicographic (m, n) order and no
duplicate indices.  Annulus fields add "r_in" and "band_limit"; torus
fields carry separate theta/phi term lists with "band_limit".  All writers
are deterministic (sorted keys, shortest round-trip floats) and atomic.
"""

from __future__ import annotations

import json
import os
import tempfile

from .annulus import LaurentField
from .catalog import HodgeCatalogEntry
from .disk import DecompositionResult
from .mapping import ConformalMap
from .series import BivariateField, HolomorphicSeries
from .torus import TorusField


class FormatError(ValueError):
    """Input does not conform to the declared interchange format."""


def _terms_to_list(items):
    return [
        {"m": m, "n": n, "re": c.real, "im": c.imag}
        for (m, n), c in items
        if c != 0
    ]


def _terms_from_list(entries, what="field"):
    terms = {}
    for e in entries:
        try:
            key = (int(e["m"]), int(e["n"]))
            val = complex(float(e["re"]), float(e["im"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed {what} term {e!r}") from exc
        if key in terms:
            raise FormatError(f"duplicate index {key} in {what} terms")
        terms[key] = val
    return terms


def field_to_json(f: BivariateField) -> dict:
    return {"max_degree": f.max_degree, "terms": _terms_to_list(f.items())}


def field_from_json(d: dict) -> BivariateField:
    try:
        max_degree = int(d["max_degree"])
        entries = d["terms"]
    except (KeyError, TypeError) as exc:
        raise FormatError("field JSON needs 'max_degree' and 'terms'") from exc
    try:
        return BivariateField(_terms_from_list(entries), max_degree=max_degree)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def series_to_json(h: HolomorphicSeries) -> dict:
    return field_to_json(h.to_field())


def series_from_json(d: dict) -> HolomorphicSeries:
    try:
        return HolomorphicSeries.from_field(field_from_json(d))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def laurent_to_json(f: LaurentField) -> dict:
    return {
        "band_limit": f.band_limit,
        "r_in": f.r_in,
        "terms": _terms_to_list(f.items()),
    }


def laurent_from_json(d: dict) -> LaurentField:
    try:
        r_in = float(d["r_in"])
        band = int(d["band_limit"])
        terms = _terms_from_list(d["terms"], what="laurent")
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError("laurent JSON needs 'r_in', 'band_limit', 'terms'") from exc
    try:
        return LaurentField(terms, r_in=r_in, band_limit=band)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def torus_to_json(f: TorusField) -> dict:
    n = f.band_limit

    def comp(arr):
        out = []
        for j in range(-n, n + 1):
            for k in range(-n, n + 1):
                c = arr[j + n, k + n]
                if c != 0:
                    out.append({"m": j, "n": k, "re": c.real, "im": c.imag})
        return out

    return {
        "band_limit": n,
        "theta_terms": comp(f.theta_coeffs),
        "phi_terms": comp(f.phi_coeffs),
    }


def torus_from_json(d: dict) -> TorusField:
    import numpy as np

    try:
        n = int(d["band_limit"])
        th_terms = _terms_from_list(d["theta_terms"], what="torus theta")
        ph_terms = _terms_from_list(d["phi_terms"], what="torus phi")
    except (KeyError, TypeError) as exc:
        raise FormatError("torus JSON needs 'band_limit' and component terms") from exc
    side = 2 * n + 1
    th = np.zeros((side, side), dtype=complex)
    ph = np.zeros((side, side), dtype=complex)
    for arr, terms in ((th, th_terms), (ph, ph_terms)):
        for (j, k), c in terms.items():
            if abs(j) > n or abs(k) > n:
                raise FormatError(f"torus index ({j},{k}) outside band {n}")
            arr[j + n, k + n] = c
    try:
        return TorusField(th, ph)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def map_to_json(m: ConformalMap) -> dict:
    return {
        "coeffs": [[c.real, c.imag] for c in m.phi.coeffs],
        "min_deriv": m.min_deriv,
    }


def map_from_json(d: dict) -> ConformalMap:
    try:
        coeffs = [complex(re, im) for re, im in d["coeffs"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError("map JSON needs 'coeffs' as [[re, im], ...]") from exc
    return ConformalMap(HolomorphicSeries(coeffs))


def decomposition_to_json(result: DecompositionResult) -> dict:
    if result.kind == "conformal":
        primary = result.conformal.to_field()
    else:
        primary = result.divergence_free
    return {
        "kind": result.kind,
        "conformal": field_to_json(primary),
        "F": field_to_json(result.multipliers.F),
        "G": field_to_json(result.multipliers.G),
        "residual_norm": result.residual_norm,
        "orthogonality": [list(row) for row in result.orthogonality],
    }


def catalog_to_json(entry: HodgeCatalogEntry) -> dict:
    return {"domain": entry.domain, "dims": entry.as_dict()}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def atomic_write(path, text):
    """Write via a temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    atomic_write(path, dumps(obj))


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read JSON from {path}: {exc}") from exc


def format_csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows):
    atomic_write(path, format_csv(header, rows))
