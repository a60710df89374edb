"""Truncated series model of the tilted valuation ring.

Elements are finite sums c_e d^e with c_e in F_{p^m} and e on the grid
(1/D)Z, read modulo d^P.  Frobenius raises coefficients to the p-th power
and multiplies exponents by p.  Exponents are stored internally as grid
numerators (e = k/D).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import gcd

from .errors import ConfigMismatch, GridError, NoRootError, NotAUnit, ParseError
from .gf import Field, FieldElement, nth_root


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class RingConfig:
    field: Field
    D: int = 1
    P: Fraction = Fraction(8)
    floor: Fraction = Fraction(0)
    Pn: int = dc_field(init=False, repr=False, compare=False)
    floor_n: int = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        P, fl = _q(self.P), _q(self.floor)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "floor", fl)
        if self.D < 1:
            raise ValueError("exponent denominator must be >= 1")
        if P <= 0:
            raise ValueError("precision must be positive")
        if fl > 0:
            raise ValueError("floor must be <= 0")
        for name, v in (("precision", P), ("floor", fl)):
            if (v * self.D).denominator != 1:
                raise GridError(f"{name} {v} is not on the grid (1/{self.D})Z")
        object.__setattr__(self, "Pn", int(P * self.D))
        object.__setattr__(self, "floor_n", int(fl * self.D))

    @property
    def p(self) -> int:
        return self.field.p

    def replace(self, *, D=None, P=None, floor=None, field=None) -> "RingConfig":
        return RingConfig(
            field if field is not None else self.field,
            D if D is not None else self.D,
            P if P is not None else self.P,
            floor if floor is not None else self.floor,
        )

    def on_grid(self, e) -> bool:
        return (_q(e) * self.D).denominator == 1

    def grid_num(self, e) -> int:
        v = _q(e) * self.D
        if v.denominator != 1:
            raise GridError(f"exponent {e} is not on the grid (1/{self.D})Z")
        return int(v)


class AtLeastP:
    """Valuation of an element that vanishes at the working precision."""

    def __init__(self, P: Fraction):
        self.P = P

    def __eq__(self, other):
        return isinstance(other, AtLeastP) and other.P == self.P

    def __hash__(self):
        return hash(("AtLeastP", self.P))

    def __repr__(self):
        return f">={self.P}"


class TiltElement:
    """An element of the truncated ring; immutable, equality is mod d^P."""

    __slots__ = ("config", "terms")

    def __init__(self, config: RingConfig, terms: dict[int, int] | None = None):
        self.config = config
        clean: dict[int, int] = {}
        if terms:
            Pn, fl = config.Pn, config.floor_n
            for k, c in terms.items():
                if c == 0 or k >= Pn:
                    continue
                if k < fl:
                    raise GridError(f"exponent {Fraction(k, config.D)} below floor {config.floor}")
                clean[k] = c
        self.terms = clean

    # construction
    @classmethod
    def from_dict(cls, config: RingConfig, terms) -> "TiltElement":
        """``terms`` maps rational exponents to field elements or ints."""
        F = config.field
        out: dict[int, int] = {}
        for e, c in terms.items():
            k = config.grid_num(e)
            code = F(c).code
            out[k] = F.add(out.get(k, 0), code)
        return cls(config, out)

    @classmethod
    def zero(cls, config):
        return cls(config)

    @classmethod
    def one(cls, config):
        return cls(config, {0: 1})

    @classmethod
    def constant(cls, config, c):
        return cls(config, {0: config.field(c).code})

    @classmethod
    def monomial(cls, config, c, e):
        return cls(config, {config.grid_num(e): config.field(c).code})

    # basic protocol
    def _check(self, other: "TiltElement"):
        if not isinstance(other, TiltElement):
            raise TypeError(f"expected TiltElement, got {type(other).__name__}")
        if other.config != self.config:
            raise ConfigMismatch("ring configurations differ")

    def __eq__(self, other):
        if isinstance(other, int):
            other = TiltElement.constant(self.config, other)
        if not isinstance(other, TiltElement):
            return NotImplemented
        return self.config == other.config and self.terms == other.terms

    def __hash__(self):
        return hash((self.config, tuple(sorted(self.terms.items()))))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def items(self):
        """(exponent, FieldElement) pairs in ascending exponent order."""
        D, F = self.config.D, self.config.field
        return [(Fraction(k, D), FieldElement(F, c)) for k, c in sorted(self.terms.items())]

    def coefficient(self, e) -> FieldElement:
        k = self.config.grid_num(e)
        return FieldElement(self.config.field, self.terms.get(k, 0))

    # ring operations
    def __add__(self, other):
        if isinstance(other, (int, FieldElement)):
            other = TiltElement.constant(self.config, other)
        self._check(other)
        F = self.config.field
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = F.add(out.get(k, 0), c)
        return TiltElement(self.config, out)

    __radd__ = __add__

    def __neg__(self):
        F = self.config.field
        return TiltElement(self.config, {k: F.neg(c) for k, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, FieldElement)):
            other = TiltElement.constant(self.config, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "TiltElement":
        F = self.config.field
        code = F(c).code
        return TiltElement(self.config, {k: F.mul(code, v) for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, FieldElement)):
            return self.scale(other)
        self._check(other)
        F, Pn = self.config.field, self.config.Pn
        out: dict[int, int] = {}
        b_items = sorted(other.terms.items())
        for ka, ca in self.terms.items():
            for kb, cb in b_items:
                k = ka + kb
                if k >= Pn:
                    break
                out[k] = F.add(out.get(k, 0), F.mul(ca, cb))
        return TiltElement(self.config, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.invert_unit() ** (-n)
        result = TiltElement.one(self.config)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def shift(self, q) -> "TiltElement":
        """Multiply by d^q (q may be negative if the floor allows it)."""
        s = self.config.grid_num(q)
        return TiltElement(self.config, {k + s: c for k, c in self.terms.items()})

    # valuation
    def val(self):
        """Minimal exponent with nonzero coefficient, or AtLeastP for zero."""
        if not self.terms:
            return AtLeastP(self.config.P)
        return Fraction(min(self.terms), self.config.D)

    def val_num(self) -> int | None:
        return min(self.terms) if self.terms else None

    def is_unit(self) -> bool:
        return 0 in self.terms and (not self.terms or min(self.terms) == 0)

    # Frobenius
    def frobenius(self) -> "TiltElement":
        F, p = self.config.field, self.config.p
        return TiltElement(self.config, {p * k: F.frob(c) for k, c in self.terms.items()
                                         if p * k < self.config.Pn})

    def frobenius_inv(self) -> "TiltElement":
        F, p = self.config.field, self.config.p
        out = {}
        for k, c in self.terms.items():
            if k % p:
                raise GridError(
                    f"Frobenius inverse of d^{Fraction(k, self.config.D)} leaves the grid "
                    f"(1/{self.config.D})Z"
                )
            out[k // p] = F.frob_inv(c)
        return TiltElement(self.config, out)

    # units
    def invert_unit(self) -> "TiltElement":
        if not self.is_unit():
            raise NotAUnit(f"{self} is not a unit (valuation {self.val()})")
        F, Pn = self.config.field, self.config.Pn
        c0inv = F.inv(self.terms[0])
        higher = sorted((k, c) for k, c in self.terms.items() if k > 0)
        out: dict[int, int] = {0: c0inv}
        # y_k = -c0^{-1} * sum_{j>0} x_j y_{k-j}, in increasing k
        for k in range(1, Pn):
            acc = 0
            for j, c in higher:
                if j > k:
                    break
                yk = out.get(k - j)
                if yk:
                    acc = F.add(acc, F.mul(c, yk))
            if acc:
                out[k] = F.neg(F.mul(c0inv, acc))
        return TiltElement(self.config, out)

    def root_unit(self, n: int) -> "TiltElement":
        """n-th root with gcd(n, p) = 1, leading coefficient the smallest root."""
        p = self.config.p
        if gcd(n, p) != 1:
            raise ValueError(f"root index {n} is divisible by p={p}")
        if not self.is_unit():
            raise NotAUnit(f"{self} is not a unit")
        F = self.config.field
        lead = FieldElement(F, self.terms[0])
        r = nth_root(lead, n)  # raises NoRootError with the extension degree
        y = TiltElement(self.config, {0: r.code})
        # Newton: y <- y - (y^n - x) / (n y^{n-1}); valuation of the error doubles
        n_inv = pow(n % p, p - 2, p) if p > 2 else 1
        for _ in range(self.config.Pn.bit_length() + 2):
            err = y**n - self
            if err.is_zero():
                break
            y = y - (err * (y ** (n - 1)).invert_unit()).scale(n_inv)
        if y**n != self:
            raise NoRootError("Hensel lifting did not converge")  # pragma: no cover
        return y

    # conversions
    def with_config(self, config: RingConfig) -> "TiltElement":
        """Re-express on a finer grid and/or different precision/floor."""
        if config.field != self.config.field:
            raise ConfigMismatch("cannot change the coefficient field here")
        if config.D % self.config.D:
            raise GridError(f"grid 1/{config.D} does not refine 1/{self.config.D}")
        f = config.D // self.config.D
        return TiltElement(config, {k * f: c for k, c in self.terms.items()})

    def map_coefficients(self, fn, config: RingConfig) -> "TiltElement":
        """Apply a field map (e.g. an embedding) coefficientwise."""
        src = self.config.field
        if config.D != self.config.D:
            raise ConfigMismatch("map_coefficients keeps the grid")
        return TiltElement(config, {k: fn(FieldElement(src, c)).code for k, c in self.terms.items()})

    # text syntax
    def __str__(self):
        return format_element(self)

    def __repr__(self):
        return f"TiltElement({format_element(self)!r})"


def _fmt_exp(e: Fraction) -> str:
    return str(e.numerator) if e.denominator == 1 else f"{e.numerator}/{e.denominator}"


def format_element(x: TiltElement) -> str:
    """Canonical text: ascending exponents, ``coeff*d^{e}`` terms joined by ``" + "``."""
    if not x.terms:
        return "0"
    F = x.config.field
    parts = []
    for k in sorted(x.terms):
        c = F.format_code(x.terms[k])
        if "+" in c:
            c = f"({c})"
        if k == 0:
            parts.append(c)
        else:
            parts.append(f"{c}*d^{{{_fmt_exp(Fraction(k, x.config.D))}}}")
    return " + ".join(parts)


_ELEM_TERM = re.compile(
    r"^\s*(?:\((?P<pc>[^()]*)\)|(?P<c>[0-9a-zA-Z^*]+?))\s*"
    r"(?:\*\s*d\s*(?:\^\s*(?:\{\s*(?P<e1>-?\d+(?:/\d+)?)\s*\}|(?P<e2>-?\d+)))?)?\s*$"
)


def _split_top_level(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if ch == "+" and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
        i += 1
    parts.append("".join(cur))
    return parts


def parse_element(text: str, config: RingConfig) -> TiltElement:
    """Parse ``"(g+1)*d^{1/2} + 1*d^{2}"``; a bare ``d`` or ``d^{e}`` term has coefficient 1."""
    s = text.strip()
    if s == "0":
        return TiltElement.zero(config)
    if not s:
        raise ParseError("empty element")
    F = config.field
    out: dict[int, int] = {}
    for raw in _split_top_level(s):
        term = raw.strip()
        if not term:
            raise ParseError(f"empty term in {text!r}")
        if term == "d" or term.startswith("d^"):
            term = "1*" + term
        m = _ELEM_TERM.match(term)
        if m is None:
            raise ParseError(f"cannot parse term {term!r}")
        ctext = m.group("pc") if m.group("pc") is not None else m.group("c")
        code = F.parse_code(ctext, "g")
        if "*d" in term.replace(" ", "") or term.replace(" ", "").endswith("d"):
            etext = m.group("e1") or m.group("e2") or "1"
            e = Fraction(etext)
        else:
            e = Fraction(0)
        if (e * config.D).denominator != 1:
            raise ParseError(f"exponent {e} is not on the grid (1/{config.D})Z")
        k = int(e * config.D)
        if k < config.floor_n:
            raise ParseError(f"exponent {e} below floor")
        out[k] = F.add(out.get(k, 0), code)
    return TiltElement(config, out)


# spec-level names
def t_add(x, y):
    return x + y


def t_mul(x, y):
    return x * y


def t_val(x):
    return x.val()


def t_frobenius(x):
    return x.frobenius()


def t_frobenius_inv(x):
    return x.frobenius_inv()


def t_invert_unit(x):
    return x.invert_unit()


def t_root_unit(x, n):
    return x.root_unit(n)


def t_dpow(q, config: RingConfig) -> TiltElement:
    q = _q(q)
    if not config.on_grid(q):
        raise GridError(f"exponent {q} is not on the grid (1/{config.D})Z")
    if not (config.floor <= q < config.P):
        raise GridError(f"exponent {q} outside [{config.floor}, {config.P})")
    return TiltElement(config, {config.grid_num(q): 1})
