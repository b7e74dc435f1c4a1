"""Reference LP and MPS readers for round-trip tests.

Deliberately independent of the emitters: these parse the textual formats
back into (objective, constraints, bounds, kinds) so tests can compare
the coefficient matrix against the in-memory model.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


@dataclass
class ParsedModel:
    objective: dict = field(default_factory=dict)  # var -> coefficient
    constraints: dict = field(default_factory=dict)  # name -> (coeffs, sense, rhs)
    binaries: set = field(default_factory=set)
    integers: set = field(default_factory=set)
    upper_bounds: dict = field(default_factory=dict)
    fixed: dict = field(default_factory=dict)


_TERM_RE = re.compile(r"([+-])\s*([0-9.eE+-]+)\s+([A-Za-z][\w.]*)")


def _parse_terms(text: str) -> dict:
    coeffs = {}
    for sign, num, name in _TERM_RE.findall(text):
        value = float(num) * (-1.0 if sign == "-" else 1.0)
        coeffs[name] = coeffs.get(name, 0.0) + value
    return coeffs


def parse_lp(text: str) -> ParsedModel:
    model = ParsedModel()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("\\")]
    section = None
    buffer = ""
    label = None

    def flush():
        nonlocal buffer, label
        if label is None:
            buffer = ""
            return
        m = re.search(r"(<=|>=|=)\s*([0-9.eE+-]+)\s*$", buffer)
        if section == "objective":
            model.objective = _parse_terms(buffer)
        elif m:
            coeffs = _parse_terms(buffer[: m.start()])
            model.constraints[label] = (coeffs, m.group(1), float(m.group(2)))
        buffer = ""
        label = None

    for raw in lines:
        stripped = raw.strip()
        low = stripped.lower()
        if low in ("minimize", "maximize", "subject to", "st", "bounds", "binaries",
                   "binary", "generals", "general", "end"):
            flush()
            section = {
                "minimize": "objective", "maximize": "objective",
                "subject to": "constraints", "st": "constraints",
                "bounds": "bounds", "binaries": "binary", "binary": "binary",
                "generals": "general", "general": "general", "end": "end",
            }[low]
            continue
        if section == "objective":
            if ":" in stripped and label is None:
                label, rest = stripped.split(":", 1)
                label = label.strip()
                buffer = rest
            else:
                buffer += " " + stripped
        elif section == "constraints":
            if re.match(r"^[\w.]+\s*:", stripped):
                flush()
                label, rest = stripped.split(":", 1)
                label = label.strip()
                buffer = rest
            else:
                buffer += " " + stripped
        elif section == "bounds":
            m = re.match(r"^([\w.]+)\s*=\s*([0-9.eE+-]+)$", stripped)
            if m:
                model.fixed[m.group(1)] = float(m.group(2))
                continue
            m = re.match(r"^([\w.]+)\s*<=\s*([0-9.eE+-]+)$", stripped)
            if m:
                model.upper_bounds[m.group(1)] = float(m.group(2))
        elif section == "binary":
            model.binaries.update(stripped.split())
        elif section == "general":
            model.integers.update(stripped.split())
    flush()
    return model


def parse_mps(text: str) -> ParsedModel:
    model = ParsedModel()
    senses = {}
    section = None
    in_integer = False
    for raw in text.splitlines():
        if not raw.strip():
            continue
        head = raw.split()
        if raw[0] not in " \t":
            section = head[0].upper()
            continue
        if section == "ROWS":
            tag, name = head[0].upper(), head[1]
            if tag == "N":
                senses[name] = "obj"
            else:
                senses[name] = {"L": "<=", "G": ">=", "E": "="}[tag]
                model.constraints[name] = ({}, senses[name], 0.0)
        elif section == "COLUMNS":
            if len(head) >= 3 and head[1] == "'MARKER'":
                in_integer = head[2] == "'INTORG'"
                continue
            var, row, coef = head[0], head[1], float(head[2])
            if in_integer:
                model.integers.add(var)
            if row == "obj":
                model.objective[var] = model.objective.get(var, 0.0) + coef
            else:
                coeffs, sense, rhs = model.constraints[row]
                coeffs[var] = coeffs.get(var, 0.0) + coef
        elif section == "RHS":
            _, row, value = head[0], head[1], float(head[2])
            coeffs, sense, _ = model.constraints[row]
            model.constraints[row] = (coeffs, sense, value)
        elif section == "BOUNDS":
            tag = head[0].upper()
            var = head[2]
            if tag == "BV":
                model.binaries.add(var)
            elif tag == "UP":
                model.upper_bounds[var] = float(head[3])
            elif tag == "FX":
                model.fixed[var] = float(head[3])
            elif tag == "PL":
                pass
    model.integers -= model.binaries
    return model
