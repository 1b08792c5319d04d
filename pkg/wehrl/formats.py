#!/usr/bin/env python3
"""
JSON/CSV codecs for polynomials, density states, regions and result records
"""

import csv
import json
import logging
import math
import os
import sys
from contextlib import contextmanager
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, TextIO, Union

import numpy as np

from .errors import DomainError, FormatError, ShapeError
from .functionals import Cap, Region, Superlevel, cap_union
from .polyspace import AffinePoly, HomPoly, unit_vector
from .states import DensityState

logger = logging.getLogger(__name__)

POLY_FIELDS = {'d', 'N', 'terms', 'affine'}
TERM_FIELDS = {'alpha', 're', 'im'}
STATE_FIELDS = {'d', 'N', 'matrix'}
REGION_FIELDS = {'N', 'caps', 'complement'}
CAP_FIELDS = {'center', 't'}


def _read_json(path: str) -> Any:
    if not os.path.exists(path):
        raise FormatError(f"File not found: {path}", 'path')
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"Invalid JSON in {path} ({e})", 'json') from e


def _check_fields(data: Any, allowed: set, required: Iterable[str], where: str) -> None:
    if not isinstance(data, dict):
        raise FormatError(f"{where} must be a JSON object", where)
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise FormatError(f"Unknown field '{unknown[0]}' in {where}", f"{where}.{unknown[0]}")
    for name in required:
        if name not in data:
            raise FormatError(f"Missing field '{name}' in {where}", f"{where}.{name}")


def _int_field(data: Mapping[str, Any], name: str, where: str, minimum: int = 0) -> int:
    value = data[name]
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise FormatError(f"{where}.{name}={value!r} out of range (must be an integer >= {minimum})",
                          f"{where}.{name}")
    return value


def _complex(entry: Any, where: str) -> complex:
    if not isinstance(entry, dict) or set(entry) - {'re', 'im'}:
        raise FormatError(f"{where} must be an object with 're' and 'im'", where)
    try:
        value = complex(float(entry.get('re', 0.0)), float(entry.get('im', 0.0)))
    except (TypeError, ValueError) as e:
        raise FormatError(f"{where} is not numeric", where) from e
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise FormatError(f"{where} is not finite", where)
    return value


def _encode_complex(z: complex) -> Dict[str, float]:
    return {"re": float(z.real), "im": float(z.imag)}


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

def poly_from_dict(data: Any) -> Union[HomPoly, AffinePoly]:
    """Decode {"d", "N", "terms": [{"alpha", "re", "im"}], "affine"?}

    Homogeneous terms need |alpha| = N with d+1 entries; affine terms need
    |alpha| <= N with d entries.

    Raises:
        FormatError: Naming the offending field
    """
    _check_fields(data, POLY_FIELDS, ('d', 'N', 'terms'), 'poly')
    d = _int_field(data, 'd', 'poly', 1)
    N = _int_field(data, 'N', 'poly', 1)
    affine = bool(data.get('affine', False))
    if not isinstance(data['terms'], list):
        raise FormatError("poly.terms must be a list", 'poly.terms')
    terms: Dict[tuple, complex] = {}
    width = d if affine else d + 1
    for k, term in enumerate(data['terms']):
        where = f"terms[{k}]"
        _check_fields(term, TERM_FIELDS, ('alpha',), where)
        alpha = term['alpha']
        if (not isinstance(alpha, list) or len(alpha) != width
                or any(isinstance(a, bool) or not isinstance(a, int) or a < 0 for a in alpha)):
            raise FormatError(f"{where}.alpha must list {width} non-negative integers", f"{where}.alpha")
        if affine and sum(alpha) > N:
            raise FormatError(f"{where}.alpha has degree {sum(alpha)} > N={N}", f"{where}.alpha")
        if not affine and sum(alpha) != N:
            raise FormatError(f"{where}.alpha has degree {sum(alpha)} != N={N}", f"{where}.alpha")
        value = _complex({key: term[key] for key in ('re', 'im') if key in term}, where)
        terms[tuple(alpha)] = terms.get(tuple(alpha), 0.0) + value
    try:
        if affine:
            return AffinePoly.from_terms(d, N, terms)
        return HomPoly.from_terms(d, N, terms)
    except ShapeError as e:
        raise FormatError(str(e), 'poly') from e


def poly_to_dict(poly: Union[HomPoly, AffinePoly]) -> Dict[str, Any]:
    data: Dict[str, Any] = {"d": poly.d, "N": poly.N}
    if isinstance(poly, AffinePoly):
        data["affine"] = True
    data["terms"] = [{"alpha": list(alpha), **_encode_complex(value)} for alpha, value in poly.terms().items()]
    return data


def load_poly(path: str) -> Union[HomPoly, AffinePoly]:
    poly = poly_from_dict(_read_json(path))
    logger.debug(f"Loaded {poly!r} from {path}")
    return poly


def save_poly(poly: Union[HomPoly, AffinePoly], path: str) -> None:
    with open(path, 'w') as f:
        json.dump(poly_to_dict(poly), f, indent=2)


# ---------------------------------------------------------------------------
# Density states
# ---------------------------------------------------------------------------

def state_from_dict(data: Any) -> DensityState:
    """Decode {"d", "N", "matrix": [[{re, im}, ...], ...]}

    Raises:
        FormatError: For malformed entries or a matrix of the wrong size
        DomainError: For a matrix that is not a density operator
    """
    _check_fields(data, STATE_FIELDS, ('d', 'N', 'matrix'), 'state')
    d = _int_field(data, 'd', 'state', 1)
    N = _int_field(data, 'N', 'state', 1)
    rows = data['matrix']
    if not isinstance(rows, list) or any(not isinstance(row, list) for row in rows):
        raise FormatError("state.matrix must be a list of rows", 'state.matrix')
    if any(len(row) != len(rows) for row in rows):
        raise FormatError("state.matrix must be square", 'state.matrix')
    matrix = np.array([[_complex(entry, f"matrix[{i}][{j}]") for j, entry in enumerate(row)]
                       for i, row in enumerate(rows)], dtype=complex)
    try:
        return DensityState(d, N, matrix)
    except ShapeError as e:
        raise FormatError(str(e), 'state.matrix') from e


def state_to_dict(rho: DensityState) -> Dict[str, Any]:
    return {"d": rho.d, "N": rho.N,
            "matrix": [[_encode_complex(z) for z in row] for row in rho.matrix]}


def load_state(path: str) -> DensityState:
    return state_from_dict(_read_json(path))


def save_state(rho: DensityState, path: str) -> None:
    with open(path, 'w') as f:
        json.dump(state_to_dict(rho), f, indent=2)


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

def region_from_dict(data: Any, samples: int, seed: int) -> Region:
    """Decode {"N", "caps": [{"center": [{re, im}, ...], "t"}], "complement"?}"""
    _check_fields(data, REGION_FIELDS, ('N', 'caps'), 'region')
    N = _int_field(data, 'N', 'region', 1)
    if not isinstance(data['caps'], list) or not data['caps']:
        raise FormatError("region.caps must be a non-empty list", 'region.caps')
    caps: List[Cap] = []
    for k, entry in enumerate(data['caps']):
        where = f"caps[{k}]"
        _check_fields(entry, CAP_FIELDS, ('center', 't'), where)
        if not isinstance(entry['center'], list) or len(entry['center']) < 2:
            raise FormatError(f"{where}.center must list at least two complex entries", f"{where}.center")
        center = np.array([_complex(z, f"{where}.center[{j}]") for j, z in enumerate(entry['center'])])
        try:
            caps.append(Cap(unit_vector(center), float(entry['t']), N))
        except (DomainError, TypeError, ValueError) as e:
            raise FormatError(f"Invalid cap: {e}", where) from e
    if len({cap.d for cap in caps}) != 1:
        raise FormatError("All cap centers must have the same length", 'region.caps')
    return cap_union(caps, bool(data.get('complement', False)), samples, seed)


def load_region(path: str, samples: int, seed: int) -> Region:
    return region_from_dict(_read_json(path), samples, seed)


def parse_region(text: str, d: int, N: int, poly: Optional[HomPoly] = None, samples: int = 200_000,
                 seed: int = 0) -> Region:
    """Parse cap:T (cap at e_1) | superlevel:OMEGA (of `poly`) | file:PATH

    Raises:
        ConfigError: For unknown kinds or out-of-range values (field 'region')
    """
    kind, _, arg = text.strip().partition(':')
    try:
        if kind == 'cap':
            center = np.zeros(d + 1, dtype=complex)
            center[0] = 1.0
            return Cap(center, float(arg), N)
        if kind == 'superlevel':
            if poly is None:
                raise FormatError("superlevel regions need --poly", 'region')
            return Superlevel(poly, float(arg)).resolve(samples, seed + 1)
        if kind == 'file' and arg:
            return load_region(arg, samples, seed)
    except (DomainError, ValueError) as e:
        if isinstance(e, FormatError):
            raise
        raise FormatError(f"Invalid region '{text}': {e}", 'region') from e
    raise FormatError(f"Unknown region '{text}' (expected cap:T, superlevel:OMEGA or file:PATH)", 'region')


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------

def _cell(key: str, value: Any) -> str:
    if value is None:
        return 'exact' if key.endswith('stderr') else ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value, sort_keys=True)
    return str(value)


@contextmanager
def _output(path: Optional[str]) -> Iterator[TextIO]:
    if not path or path == '-':
        yield sys.stdout
        sys.stdout.flush()
        return
    with open(path, 'w', newline='') as f:
        yield f


def write_records_csv(rows: Sequence[Mapping[str, Any]], path: Optional[str], config: Mapping[str, Any]) -> None:
    """One row per record, preceded by a '# config:' line with the resolved config

    Missing stderr values (exact computations) are written as 'exact'. A path
    of None or '-' writes to stdout.
    """
    columns: List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    with _output(path) as f:
        f.write(f"# config: {json.dumps(_jsonable(config), sort_keys=True)}\n")
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(key, row.get(key)) for key in columns])


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        value = float(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, complex):
        return _encode_complex(value)
    return value


def write_result_json(record: Mapping[str, Any], path: Optional[str]) -> str:
    """Write a single-evaluation record; returns the JSON text (stdout when path is None)"""
    text = json.dumps(_jsonable(record), indent=2, sort_keys=True)
    if path:
        with open(path, 'w') as f:
            f.write(text + "\n")
    return text


def write_summary_json(summary: Mapping[str, Any], path: str) -> None:
    with open(path, 'w') as f:
        json.dump(_jsonable(summary), f, indent=2, sort_keys=True)
        f.write("\n")
