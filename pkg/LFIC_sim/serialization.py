"""
Canonical text documents (JSON, version 'lfic/1') for scenarios, behaviors and functionals. Rationals are written as
"num/den" strings, floats as JSON numbers of full precision.
"""

__all__ = ['FORMAT_VERSION', 'serialize', 'deserialize', 'to_document', 'from_document', 'scenario_from_dict']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import json
import math
from fractions import Fraction
from typing import Union

import numpy as np

from LFIC_sim.custom_exceptions import DocumentParseError, SchemaError
from LFIC_sim.scenario import Behavior, BellFunctional, Scenario


FORMAT_VERSION = "lfic/1"

Serializable = Union[Scenario, Behavior, BellFunctional]


def _rational_text(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def _parse_rational(value, where: str) -> Fraction:
    if not isinstance(value, str):
        raise SchemaError(f"{where} needs to be a 'num/den' string, got {value!r}.")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise SchemaError(f"{where} is not a rational number: {value!r}.")


def _parse_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where} needs to be a number, got {value!r}.")
    value = float(value)
    if not math.isfinite(value):
        raise SchemaError(f"{where} is not finite.")
    return value


def to_document(obj: Serializable) -> dict:
    """
    Plain-dict form of the object, ready for json.dumps.
    """
    if isinstance(obj, Scenario):
        return {'version': FORMAT_VERSION, 'type': 'scenario', 'scenario': obj.to_dict()}
    if isinstance(obj, Behavior):
        entries = []
        for a, b, x, y in obj.scenario.labels():
            value = obj[a, b, x, y]
            entries.append({'a': a, 'b': b, 'x': x, 'y': y,
                            'p': _rational_text(value) if obj.exact else float(value)})
        return {'version': FORMAT_VERSION, 'type': 'behavior', 'name': obj.name, 'scenario': obj.scenario.to_dict(),
                'exact': obj.exact, 'entries': entries}
    if isinstance(obj, BellFunctional):
        terms = [{'a': a, 'b': b, 'x': x, 'y': y, 'coefficient': _rational_text(c)} for c, a, b, x, y in obj.terms()]
        return {'version': FORMAT_VERSION, 'type': 'functional', 'name': obj.name, 'sense': obj.sense,
                'offset': _rational_text(obj.offset), 'scenario': obj.scenario.to_dict(), 'terms': terms}
    raise TypeError(f"Cannot serialize objects of type {type(obj).__name__}.")


def serialize(obj: Serializable) -> str:
    return json.dumps(to_document(obj), indent=2) + '\n'


def scenario_from_dict(data) -> Scenario:
    if not isinstance(data, dict):
        raise SchemaError("scenario needs to be an object.")
    keys = ('alice_inputs', 'alice_outputs', 'bob_inputs', 'bob_outputs', 'charlie_outputs')
    missing = [k for k in keys[:4] if k not in data]
    if missing:
        raise SchemaError(f"scenario misses {', '.join(missing)}.")
    try:
        return Scenario(*(data.get(k) for k in keys))
    except (TypeError, ValueError) as err:
        raise SchemaError(f"invalid scenario: {err}")


def _index(entry: dict, scenario: Scenario, position: int) -> tuple:
    try:
        a, b, x, y = (entry[k] for k in ('a', 'b', 'x', 'y'))
    except KeyError as err:
        raise SchemaError(f"entry {position} misses the index label {err}.")
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in (a, b, x, y)):
        raise SchemaError(f"entry {position} has non-integer indices.")
    try:
        scenario.index(a, b, x, y)
    except IndexError:
        raise SchemaError(f"entry {position} index (a={a}, b={b}, x={x}, y={y}) is out of range for {scenario}.")
    return a, b, x, y


def from_document(data: dict) -> Serializable:
    if not isinstance(data, dict):
        raise SchemaError("document root needs to be an object.")
    if data.get('version') != FORMAT_VERSION:
        raise SchemaError(f"unsupported version {data.get('version')!r}, expected {FORMAT_VERSION!r}.")
    kind = data.get('type')
    scenario = scenario_from_dict(data.get('scenario'))
    if kind == 'scenario':
        return scenario
    if kind == 'behavior':
        exact = data.get('exact')
        if not isinstance(exact, bool):
            raise SchemaError("behavior needs a boolean 'exact' field.")
        entries = data.get('entries')
        if not isinstance(entries, list):
            raise SchemaError("behavior needs an 'entries' list.")
        table = np.full(scenario.shape, None, dtype=object)
        for position, entry in enumerate(entries):
            if not isinstance(entry, dict):
                raise SchemaError(f"entry {position} needs to be an object.")
            a, b, x, y = _index(entry, scenario, position)
            if table[x, y, a, b] is not None:
                raise SchemaError(f"entry {position} repeats index (a={a}, b={b}, x={x}, y={y}).")
            where = f"entry {position} probability"
            value = _parse_rational(entry.get('p'), where) if exact else _parse_float(entry.get('p'), where)
            if value < 0:
                raise SchemaError(f"{where} is negative.")
            table[x, y, a, b] = value
        if any(v is None for v in table.reshape(-1)):
            raise SchemaError(f"behavior needs all {scenario.dimension} entries, got {len(entries)}.")
        return Behavior(scenario, table if exact else table.astype(float), exact, data.get('name'))
    if kind == 'functional':
        sense = data.get('sense')
        if sense not in ('lower', 'upper'):
            raise SchemaError("functional sense needs to be 'lower' or 'upper'.")
        terms_data = data.get('terms')
        if not isinstance(terms_data, list):
            raise SchemaError("functional needs a 'terms' list.")
        terms = []
        for position, term in enumerate(terms_data):
            if not isinstance(term, dict):
                raise SchemaError(f"term {position} needs to be an object.")
            a, b, x, y = _index(term, scenario, position)
            terms.append((_parse_rational(term.get('coefficient'), f"term {position} coefficient"), a, b, x, y))
        offset = _parse_rational(data.get('offset', '0/1'), "offset")
        return BellFunctional.from_terms(scenario, terms, offset, sense, data.get('name'))
    raise SchemaError(f"unknown document type {kind!r}.")


def deserialize(text: str) -> Serializable:
    """
    Parses a canonical document.
    :raises DocumentParseError: malformed JSON, with line and column
    :raises SchemaError: well-formed JSON that violates the schema
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise DocumentParseError(err.msg, err.lineno, err.colno)
    return from_document(data)
