"""Text format for a module: field, ring and matrix sections.

    # comment
    [field]
    p = 2
    m = 1
    [ring]
    denom = 2
    precision = 8
    [module]
    rank = 2
    entry 1 1 = 1*d^{2}
    entry 1 2 = 1

Entries are 1-indexed; missing entries are zero.  ``modulus`` is optional
in [field] (default: the standard irreducible).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError, TiltphiError
from .gf import format_poly, ff_make, parse_poly
from .phimod import PhiModule, fmt_q
from .tilt import RingConfig, TiltElement, format_element, parse_element

SECTIONS = {
    "field": ("p", "m", "modulus"),
    "ring": ("denom", "precision"),
    "module": ("rank",),
}

_SECTION = re.compile(r"^\[\s*([A-Za-z]+)\s*\]$")
_KEYVAL = re.compile(r"^([A-Za-z_]+)\s*=\s*(.*)$")
_ENTRY = re.compile(r"^entry\s+(\S+)\s+(\S+)\s*=\s*(.*)$")


@dataclass
class ModuleSpec:
    module: PhiModule

    @property
    def config(self) -> RingConfig:
        return self.module.config


def _int(text, line, col, what):
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {text!r}", line, col) from None


def _rational(text, line, col, what):
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{what} must be a rational number, got {text!r}", line, col) from None


def parse_spec(text: str, *, precision=None, denom=None) -> ModuleSpec:
    """Parse a module file; ``precision``/``denom`` override the file values."""
    values: dict[str, dict[str, tuple]] = {s: {} for s in SECTIONS}
    entries: dict[tuple[int, int], tuple] = {}
    section = None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        col = len(raw) - len(raw.lstrip()) + 1
        m = _SECTION.match(stripped)
        if m:
            section = m.group(1).lower()
            if section not in SECTIONS:
                raise ParseError(f"unknown section [{m.group(1)}]", lineno, col)
            continue
        if section is None:
            raise ParseError("content before the first section header", lineno, col)
        m = _ENTRY.match(stripped)
        if m:
            if section != "module":
                raise ParseError("entry lines belong in [module]", lineno, col)
            icol, jcol, vcol = (col + m.start(g) for g in (1, 2, 3))
            i = _int(m.group(1), lineno, icol, "row index")
            j = _int(m.group(2), lineno, jcol, "column index")
            if (i, j) in entries:
                raise ParseError(f"duplicate entry {i} {j}", lineno, icol)
            entries[(i, j)] = (m.group(3), lineno, vcol, icol)
            continue
        m = _KEYVAL.match(stripped)
        if not m:
            raise ParseError(f"cannot parse line {stripped!r}", lineno, col)
        key, val = m.group(1).lower(), m.group(2).strip()
        if key not in SECTIONS[section]:
            raise ParseError(f"unknown key {key!r} in [{section}]", lineno, col)
        if key in values[section]:
            raise ParseError(f"duplicate key {key!r}", lineno, col)
        values[section][key] = (val, lineno, col)

    def need(sec, key):
        if key not in values[sec]:
            raise ParseError(f"missing key {key!r} in [{sec}]")
        return values[sec][key]

    pv = need("field", "p")
    p = _int(pv[0], pv[1], pv[2], "p")
    mv = values["field"].get("m", ("1", None, None))
    m = _int(mv[0], mv[1], mv[2], "m")
    modulus = None
    if "modulus" in values["field"]:
        text_mod, ln, cl = values["field"]["modulus"]
        try:
            coeffs = parse_poly(text_mod, "x")
        except (ValueError, TiltphiError) as exc:
            raise ParseError(str(exc), ln, cl) from None
        deg = max(coeffs) if coeffs else 0
        modulus = [coeffs.get(k, 0) % p for k in range(deg + 1)]
    try:
        F = ff_make(p, m, modulus)
    except (ValueError, TiltphiError) as exc:
        raise ParseError(str(exc), pv[1], pv[2]) from None

    dv = values["ring"].get("denom", ("1", None, None))
    D = int(denom) if denom is not None else _int(dv[0], dv[1], dv[2], "denom")
    Pv = values["ring"].get("precision", ("8", None, None))
    P = Fraction(precision) if precision is not None else _rational(Pv[0], Pv[1], Pv[2], "precision")
    try:
        config = RingConfig(F, D, P)
    except (ValueError, TiltphiError) as exc:
        raise ParseError(str(exc), dv[1], dv[2]) from None

    rv = need("module", "rank")
    r = _int(rv[0], rv[1], rv[2], "rank")
    if r < 0:
        raise ParseError("rank must be >= 0", rv[1], rv[2])
    A = [[TiltElement.zero(config) for _ in range(r)] for _ in range(r)]
    for (i, j), (etext, ln, cl, icol) in entries.items():
        if not (1 <= i <= r and 1 <= j <= r):
            raise ParseError(f"entry {i} {j} outside a rank-{r} matrix", ln, icol)
        try:
            A[i - 1][j - 1] = parse_element(etext, config)
        except ParseError as exc:
            raise ParseError(str(exc), ln, cl) from None
        except (ValueError, TiltphiError) as exc:
            raise ParseError(str(exc), ln, cl) from None
    return ModuleSpec(PhiModule.validated(config, A))


def format_spec(spec: ModuleSpec | PhiModule) -> str:
    """Canonical text; parse(format(x)) reproduces x exactly."""
    M = spec.module if isinstance(spec, ModuleSpec) else spec
    cfg = M.config
    F = cfg.field
    lines = [
        "[field]",
        f"p = {F.p}",
        f"m = {F.m}",
        f"modulus = {format_poly(F.modulus, 'x')}",
        "",
        "[ring]",
        f"denom = {cfg.D}",
        f"precision = {fmt_q(cfg.P)}",
        "",
        "[module]",
        f"rank = {M.r}",
    ]
    for i, row in enumerate(M.A, start=1):
        for j, x in enumerate(row, start=1):
            if x:
                lines.append(f"entry {i} {j} = {format_element(x)}")
    return "\n".join(lines) + "\n"


def read_spec(path, **overrides) -> ModuleSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read(), **overrides)
