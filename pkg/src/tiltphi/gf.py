"""Finite fields F_{p^m} with canonical integer encoding.

An element of F_{p^m} = F_p[x]/(f) is stored as the integer
sum(c_i * p**i) where c_0 + c_1 g + ... + c_{m-1} g^{m-1} is its
representative in the power basis of the root g of the modulus f.
The integer order is the canonical element order used everywhere
a "smallest" element is chosen.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from itertools import product
from math import gcd

from .errors import ConfigMismatch, NoRootError, ParseError, TiltphiError

EXHAUSTIVE_LIMIT = 2**16
MAX_ORDER = 2**20


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def _factorize(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# -- polynomials over F_p, ascending coefficient tuples ---------------------

def _fp_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_mod(a, b, p):
    a = _fp_trim(a)
    b = _fp_trim(b)
    inv = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        a = _fp_trim(a)
    return a


def _fp_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _fp_trim(out)


def _fp_gcd(a, b, p):
    a, b = _fp_trim(a), _fp_trim(b)
    while b:
        a, b = b, _fp_mod(a, b, p)
    return a


def _fp_powmod(base, e, mod, p):
    result = [1]
    base = _fp_mod(base, mod, p)
    while e:
        if e & 1:
            result = _fp_mod(_fp_mul(result, base, p), mod, p)
        base = _fp_mod(_fp_mul(base, base, p), mod, p)
        e >>= 1
    return result


def fp_poly_irreducible(f, p: int) -> bool:
    """Rabin's test for a polynomial over F_p (ascending coefficients)."""
    f = _fp_trim([c % p for c in f])
    n = len(f) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    x = [0, 1]
    for q in _factorize(n):
        h = _fp_powmod(x, p ** (n // q), f, p)
        diff = _fp_trim([(a - b) % p for a, b in _zip_pad(h, x)])
        if len(_fp_gcd(f, diff, p)) != 1:
            return False
    h = _fp_powmod(x, p**n, f, p)
    return not _fp_trim([(a - b) % p for a, b in _zip_pad(h, x)])


def _zip_pad(a, b):
    n = max(len(a), len(b))
    return zip(list(a) + [0] * (n - len(a)), list(b) + [0] * (n - len(b)))


# -- text syntax ------------------------------------------------------------

_TERM_RE = re.compile(
    r"^(?:(?P<coef>\d+)\s*\*?\s*)?(?:(?P<var>[a-zA-Z])(?:\s*\^\s*(?P<exp>\d+))?)?$"
)


def parse_poly(text: str, var: str = "x") -> dict[int, int]:
    """Parse ``"x^2+x+1"`` style text into a ``{degree: coefficient}`` map.

    Terms may appear in any order; integer coefficients may be written
    as ``2*x`` or ``2x``.  Coefficients are not reduced.
    """
    s = text.replace(" ", "")
    if not s:
        raise ParseError("empty polynomial")
    if s[0] not in "+-":
        s = "+" + s
    out: dict[int, int] = {}
    for m in re.finditer(r"([+-])([^+-]*)", s):
        sign, body = m.group(1), m.group(2)
        tm = _TERM_RE.match(body)
        if not body or tm is None:
            raise ParseError(f"bad polynomial term {body!r} in {text!r}")
        if tm.group("var") is not None and tm.group("var") != var:
            raise ParseError(f"unexpected variable {tm.group('var')!r} in {text!r}")
        if tm.group("coef") is None and tm.group("var") is None:
            raise ParseError(f"bad polynomial term {body!r} in {text!r}")
        coef = int(tm.group("coef")) if tm.group("coef") is not None else 1
        if tm.group("var") is None:
            deg = 0
        else:
            deg = int(tm.group("exp")) if tm.group("exp") is not None else 1
        if sign == "-":
            coef = -coef
        out[deg] = out.get(deg, 0) + coef
    return out


def format_poly(coeffs, var: str = "x") -> str:
    """Print ascending coefficients in descending-degree canonical form."""
    parts = []
    for deg in range(len(coeffs) - 1, -1, -1):
        c = coeffs[deg]
        if c == 0:
            continue
        if deg == 0:
            parts.append(str(c))
        else:
            mono = var if deg == 1 else f"{var}^{deg}"
            parts.append(mono if c == 1 else f"{c}*{mono}")
    return "+".join(parts) if parts else "0"


# -- fields -----------------------------------------------------------------

class Field:
    """The finite field F_p[x]/(modulus); equality is by (p, m, modulus)."""

    def __init__(self, p: int, m: int, modulus):
        self.p = p
        self.m = m
        self.modulus = tuple(modulus)
        self.q = p**m
        self._key = (p, m, self.modulus)

    def __eq__(self, other):
        return isinstance(other, Field) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        if self.m == 1:
            return f"F_{self.p}"
        return f"F_{self.p}^{self.m}[{format_poly(self.modulus)}]"

    # encoding
    def to_coeffs(self, code: int) -> tuple[int, ...]:
        p = self.p
        out = []
        for _ in range(self.m):
            code, r = divmod(code, p)
            out.append(r)
        return tuple(out)

    def from_coeffs(self, coeffs) -> int:
        code = 0
        for c in reversed(list(coeffs)):
            code = code * self.p + (c % self.p)
        return code

    def __call__(self, value) -> "FieldElement":
        """Build an element from an int (prime-field residue), coefficient
        vector, or polynomial text in the generator ``g``."""
        if isinstance(value, FieldElement):
            if value.field != self:
                raise ConfigMismatch("element belongs to a different field")
            return value
        if isinstance(value, str):
            return FieldElement(self, self.parse_code(value))
        if isinstance(value, int):
            return FieldElement(self, value % self.p)
        coeffs = list(value)
        if len(coeffs) != self.m:
            raise ValueError(f"expected {self.m} coefficients, got {len(coeffs)}")
        return FieldElement(self, self.from_coeffs(coeffs))

    def elements(self):
        return [FieldElement(self, c) for c in range(self.q)]

    @property
    def zero(self):
        return FieldElement(self, 0)

    @property
    def one(self):
        return FieldElement(self, 1)

    @property
    def gen(self):
        """The class of x modulo the modulus."""
        if self.m == 1:
            return FieldElement(self, (-self.modulus[0]) % self.p)
        return FieldElement(self, self.p)

    # arithmetic on codes
    @cached_property
    def _add_table(self):
        if self.q > 256 or self.p == 2 or self.m == 1:
            return None
        return [[self._add_digits(a, b) for b in range(self.q)] for a in range(self.q)]

    def _add_digits(self, a, b):
        p = self.p
        out, scale = 0, 1
        for _ in range(self.m):
            a, ra = divmod(a, p)
            b, rb = divmod(b, p)
            out += ((ra + rb) % p) * scale
            scale *= p
        return out

    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        if self.m == 1:
            return (a + b) % self.p
        t = self._add_table
        if t is not None:
            return t[a][b]
        return self._add_digits(a, b)

    def neg(self, a: int) -> int:
        if self.p == 2:
            return a
        if self.m == 1:
            return (-a) % self.p
        return self.from_coeffs([-c for c in self.to_coeffs(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def _mul_poly(self, a: int, b: int) -> int:
        prod = _fp_mul(list(self.to_coeffs(a)), list(self.to_coeffs(b)), self.p)
        return self.from_coeffs(_fp_mod(prod, self.modulus, self.p) + [0] * self.m)

    def _pow_poly(self, a: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self._mul_poly(result, a)
            a = self._mul_poly(a, a)
            e >>= 1
        return result

    @cached_property
    def _log_tables(self):
        if self.q > EXHAUSTIVE_LIMIT:
            return None
        n = self.q - 1
        primes = _factorize(n) if n > 1 else []
        for cand in range(2, self.q) if n > 1 else [1]:
            if any(self._pow_poly(cand, n // r) == 1 for r in primes):
                continue
            exp = [1]
            x = 1
            for _ in range(n - 1):
                x = self._mul_poly(x, cand)
                exp.append(x)
            log = [0] * self.q
            for i, v in enumerate(exp):
                log[v] = i
            return exp, log
        raise TiltphiError("no primitive element found")  # pragma: no cover

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self.m == 1:
            return a * b % self.p
        t = self._log_tables
        if t is None:
            return self._mul_poly(a, b)
        exp, log = t
        return exp[(log[a] + log[b]) % (self.q - 1)]

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        if a == 0:
            return 1 if e == 0 else 0
        if self.m == 1:
            return pow(a, e, self.p)
        t = self._log_tables
        if t is not None:
            exp, log = t
            return exp[(log[a] * e) % (self.q - 1)]
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self.pow(a, self.q - 2)

    @cached_property
    def _frob_table(self):
        if self.q > EXHAUSTIVE_LIMIT:
            return None
        return [self.pow(a, self.p) for a in range(self.q)]

    def frob(self, a: int) -> int:
        if self.m == 1:
            return a
        t = self._frob_table
        return t[a] if t is not None else self.pow(a, self.p)

    def frob_inv(self, a: int) -> int:
        if self.m == 1:
            return a
        return self.pow(a, self.p ** (self.m - 1))

    # F_p-linear structure: matrices act on coefficient column vectors
    @cached_property
    def frob_matrix(self) -> tuple[tuple[int, ...], ...]:
        cols = [self.to_coeffs(self.frob(self.p**j)) for j in range(self.m)]
        return tuple(tuple(cols[j][i] for j in range(self.m)) for i in range(self.m))

    def mul_matrix(self, c: int) -> tuple[tuple[int, ...], ...]:
        cols = [self.to_coeffs(self.mul(c, self.p**j)) for j in range(self.m)]
        return tuple(tuple(cols[j][i] for j in range(self.m)) for i in range(self.m))

    def parse_code(self, text: str, var: str = "g") -> int:
        terms = parse_poly(text, var)
        acc = 0
        gen = self.gen.code
        for deg, c in terms.items():
            acc = self.add(acc, self.mul(c % self.p, self.pow(gen, deg)))
        return acc

    def format_code(self, code: int, var: str = "g") -> str:
        if self.m == 1:
            return str(code)
        return format_poly(self.to_coeffs(code), var)


@dataclass(frozen=True, eq=False)
class FieldElement:
    field: Field
    code: int

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.field.to_coeffs(self.code)

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise ConfigMismatch("cross-field arithmetic is not allowed; embed explicitly")
            return other.code
        if isinstance(other, int):
            return other % self.field.p
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.code == other.code
        if isinstance(other, int):
            return self.code == other % self.field.p
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.code))

    def __add__(self, other):
        o = self._other(other)
        return FieldElement(self.field, self.field.add(self.code, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return FieldElement(self.field, self.field.sub(self.code, o))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.code))

    def __mul__(self, other):
        o = self._other(other)
        return FieldElement(self.field, self.field.mul(self.code, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        return FieldElement(self.field, self.field.mul(self.code, self.field.inv(o)))

    def __pow__(self, e: int):
        return FieldElement(self.field, self.field.pow(self.code, e))

    def __bool__(self):
        return self.code != 0

    def __lt__(self, other):
        return self.code < other.code

    def __repr__(self):
        return f"{self.field.format_code(self.code)} in {self.field!r}"

    def __str__(self):
        return self.field.format_code(self.code)


def ff_make(p: int, m: int = 1, modulus=None) -> Field:
    """Return F_{p^m}.

    Without ``modulus`` the field uses the lexicographically smallest monic
    irreducible of degree m, comparing the non-leading coefficients from
    the highest degree down (so x^3+x+1 precedes x^3+x^2+1 over F_2).
    ``modulus`` may be polynomial text or ascending coefficients.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if m < 1:
        raise ValueError("extension degree must be >= 1")
    if p**m > MAX_ORDER:
        raise ValueError(f"fields beyond {MAX_ORDER} elements are not supported")
    if modulus is None:
        for tail in product(range(p), repeat=m):
            f = list(reversed(tail)) + [1]
            if fp_poly_irreducible(f, p):
                return Field(p, m, tuple(f))
        raise TiltphiError("no irreducible polynomial found")  # pragma: no cover
    if isinstance(modulus, str):
        terms = parse_poly(modulus, "x")
        deg = max(terms) if terms else -1
        f = [0] * (deg + 1)
        for k, c in terms.items():
            f[k] = c % p
    else:
        f = [c % p for c in modulus]
    f = _fp_trim(f)
    if len(f) - 1 != m:
        raise ValueError(f"modulus has degree {len(f) - 1}, expected {m}")
    if f[-1] != 1:
        inv = pow(f[-1], p - 2, p)
        f = [c * inv % p for c in f]
    if not fp_poly_irreducible(f, p):
        raise ValueError(f"modulus {format_poly(f)} is reducible over F_{p}")
    return Field(p, m, tuple(f))


def ff_frobenius(x: FieldElement) -> FieldElement:
    return FieldElement(x.field, x.field.frob(x.code))


def ff_frobenius_inv(x: FieldElement) -> FieldElement:
    return FieldElement(x.field, x.field.frob_inv(x.code))


# -- polynomials over F_q (ascending lists of codes) -----------------------

def _coerce_poly(f, field: Field) -> list[int]:
    if isinstance(f, str):
        terms = parse_poly(f, "x")
        deg = max(terms)
        out = [0] * (deg + 1)
        for k, c in terms.items():
            out[k] = c % field.p
        return out
    out = []
    for c in f:
        if isinstance(c, FieldElement):
            if c.field != field:
                raise ConfigMismatch("polynomial coefficient from another field")
            out.append(c.code)
        else:
            out.append(c % field.p)
    return out


def _q_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _q_eval(f, x, F: Field):
    acc = 0
    for c in reversed(f):
        acc = F.add(F.mul(acc, x), c)
    return acc


def _q_mul(a, b, F):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    out[i + j] = F.add(out[i + j], F.mul(ai, bj))
    return _q_trim(out)


def _q_divmod(a, b, F):
    a = _q_trim(a)
    b = _q_trim(b)
    inv = 1 if b[-1] == 1 else F.inv(b[-1])
    quot = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b):
        c = a[-1] if inv == 1 else F.mul(a[-1], inv)
        shift = len(a) - len(b)
        quot[shift] = c
        for i, bi in enumerate(b):
            a[shift + i] = F.sub(a[shift + i], F.mul(c, bi))
        a = _q_trim(a)
    return quot, a


def _q_gcd(a, b, F):
    a, b = _q_trim(a), _q_trim(b)
    while b:
        a, b = b, _q_divmod(a, b, F)[1]
    if a:
        inv = F.inv(a[-1])
        a = [F.mul(c, inv) for c in a]
    return a


def _q_powmod(base, e, mod, F):
    result = [1]
    base = _q_divmod(base, mod, F)[1]
    while e:
        if e & 1:
            result = _q_divmod(_q_mul(result, base, F), mod, F)[1]
        base = _q_divmod(_q_mul(base, base, F), mod, F)[1]
        e >>= 1
    return result


def _q_sub(a, b, F):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _q_trim([F.sub(x, y) for x, y in zip(a, b)])


def _split_linear(g, F: Field) -> list[int]:
    """Roots of a squarefree product of distinct linear factors."""
    if len(g) <= 1:
        return []
    if len(g) == 2:
        return [F.mul(F.neg(g[0]), F.inv(g[1]))]
    # power-basis elements first: the trace form is nondegenerate, so one of
    # them separates any two roots
    basis = [F.p**j for j in range(F.m)]
    candidates = basis + [a for a in range(1, F.q) if a not in basis]
    for a in candidates:
        if F.p == 2:
            # trace map T(a x) splits when the Frobenius trace is non-constant
            t = [0]
            term = [0, a]
            for _ in range(F.m):
                t = _q_sub(t, [F.neg(c) for c in term], F)
                term = _q_powmod(term, 2, g, F)
            h = _q_gcd(g, t, F)
        else:
            h = _q_gcd(g, _q_sub(_q_powmod([a, 1], (F.q - 1) // 2, g, F), [1], F), F)
        if 1 < len(h) < len(g):
            other, _ = _q_divmod(g, h, F)
            return _split_linear(h, F) + _split_linear(other, F)
    raise TiltphiError("equal-degree splitting failed")  # pragma: no cover


def poly_roots(f, field: Field) -> frozenset:
    """Distinct roots of ``f`` (ascending coefficients or text in x) in ``field``."""
    coeffs = _q_trim(_coerce_poly(f, field))
    if not coeffs:
        raise ValueError("the zero polynomial has no finite root set")
    if field.q <= EXHAUSTIVE_LIMIT:
        roots = [x for x in range(field.q) if _q_eval(coeffs, x, field) == 0]
    else:
        h = _q_sub(_q_powmod([0, 1], field.q, coeffs, field), [0, 1], field)
        g = _q_gcd(coeffs, h, field)
        roots = _split_linear(g, field)
    return frozenset(FieldElement(field, r) for r in roots)


def nth_root(a: FieldElement, n: int) -> FieldElement:
    """Canonically smallest n-th root of ``a`` in its field.

    Raises NoRootError carrying the minimal extension degree that would
    contain a root.
    """
    F = a.field
    if a.code == 0:
        return a
    for c in range(1, F.q):
        if F.pow(c, n) == a.code:
            return FieldElement(F, c)
    # order of a in F^*, then smallest k with order | (q^k - 1)/gcd(n, q^k - 1)
    order = F.q - 1
    for r in _factorize(F.q - 1):
        while order % r == 0 and F.pow(a.code, order // r) == 1:
            order //= r
    k = 1
    while True:
        k += 1
        big = F.q**k - 1
        if (big // gcd(n, big)) % order == 0:
            raise NoRootError(f"{a} has no {n}-th root in {F!r}", extension_degree=k)


def embed(small: Field, large: Field):
    """Return the embedding F_{p^m} -> F_{p^{mk}} as a function on elements.

    The image of the generator is the smallest root of the small modulus
    in the large field.
    """
    if small.p != large.p or large.m % small.m:
        raise ConfigMismatch(f"{small!r} does not embed in {large!r}")
    roots = poly_roots(list(small.modulus), large)
    r = min(roots, key=lambda e: e.code).code
    powers = [large.pow(r, i) for i in range(small.m)]

    def image(x: FieldElement) -> FieldElement:
        if x.field != small:
            raise ConfigMismatch("element not in the source field")
        acc = 0
        for c, pw in zip(x.coeffs, powers):
            if c:
                acc = large.add(acc, large.mul(c, pw))
        return FieldElement(large, acc)

    return image


class QuadSplit(Enum):
    DISTINCT_SPLIT = "DistinctSplit"
    DOUBLE_ROOT = "DoubleRoot"
    IRREDUCIBLE = "Irreducible"


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def quad_split_fp(a: int, b: int, c: int, p: int) -> QuadSplit:
    """Factorization type of aX^2 + bX + c over F_p."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    a, b, c = a % p, b % p, c % p
    if a == 0:
        raise ValueError("leading coefficient vanishes mod p")
    if p == 2:
        n = sum(1 for x in range(2) if (a * x * x + b * x + c) % 2 == 0)
        if n == 2:
            return QuadSplit.DISTINCT_SPLIT
        if n == 1:
            # only x^2 and x^2+1 = (x+1)^2 have a single root over F_2
            return QuadSplit.DOUBLE_ROOT
        return QuadSplit.IRREDUCIBLE
    chi = legendre(b * b - 4 * a * c, p)
    if chi == 1:
        return QuadSplit.DISTINCT_SPLIT
    if chi == 0:
        return QuadSplit.DOUBLE_ROOT
    return QuadSplit.IRREDUCIBLE
