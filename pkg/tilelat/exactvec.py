"""
Exact sparse rational vectors and l_p norm comparisons for integer p >= 1.

Norms are never taken to the 1/p power: every comparison happens between
p-th powers, so thresholds are stored as ``PowThreshold(c)`` meaning the
real radius ``c ** (1/p)``.
"""
from enum import Enum
from fractions import Fraction
from math import gcd
from typing import Annotated, Any, Dict, Iterable, Iterator, List, Mapping, Tuple, Union

import structlog
from pydantic import BaseModel, Field, PlainSerializer, PlainValidator, field_validator
from sympy import integer_nthroot

logger = structlog.get_logger("exactvec")

RationalLike = Union[Fraction, int, str]


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """Parse the canonical "num/den" form (a bare integer is also accepted).

    Raises:
        ValueError: on floats, zero or negative denominators, or unreduced fractions
    """
    if isinstance(text, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"expected 'num/den' string, got {type(text).__name__}")
    parts = text.strip().split("/")
    try:
        if len(parts) == 1:
            return Fraction(int(parts[0]))
        if len(parts) != 2:
            raise ValueError
        num, den = int(parts[0]), int(parts[1])
    except ValueError:
        raise ValueError(f"malformed rational {text!r}") from None
    if den <= 0:
        raise ValueError(f"denominator must be positive in {text!r}")
    if gcd(num, den) != 1:
        raise ValueError(f"rational {text!r} is not reduced")
    return Fraction(num, den)


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def _validate_rational(value: Any) -> Fraction:
    return parse_rational(value)


Rational = Annotated[Fraction, PlainValidator(_validate_rational), PlainSerializer(format_rational, return_type=str)]


class SparseVector:
    """Finitely supported map from non-negative indices to nonzero rationals.

    Instances are immutable; entries are kept sorted by index and zero
    values are never stored.
    """

    __slots__ = ("_entries", "_lookup", "_hash")

    def __init__(self, entries: Union[Mapping[int, RationalLike], Iterable[Tuple[int, RationalLike]]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        merged: Dict[int, Fraction] = {}
        for index, value in items:
            if isinstance(index, bool) or not isinstance(index, int) or index < 0:
                raise ValueError(f"coordinate index must be a non-negative integer, got {index!r}")
            merged[index] = merged.get(index, Fraction(0)) + (value if isinstance(value, Fraction) else Fraction(value))
        self._entries: Tuple[Tuple[int, Fraction], ...] = tuple(sorted((i, v) for i, v in merged.items() if v != 0))
        self._lookup: Dict[int, Fraction] = dict(self._entries)
        self._hash = None

    @classmethod
    def _from_clean_dict(cls, values: Dict[int, Fraction]) -> "SparseVector":
        vector = cls.__new__(cls)
        vector._entries = tuple(sorted((i, v) for i, v in values.items() if v != 0))
        vector._lookup = dict(vector._entries)
        vector._hash = None
        return vector

    @classmethod
    def zero(cls) -> "SparseVector":
        return cls()

    @classmethod
    def basis(cls, index: int, value: RationalLike = 1) -> "SparseVector":
        """The vector value * e_index"""
        return cls({index: value})

    @classmethod
    def from_json(cls, data: Any) -> "SparseVector":
        """Parse [[index, "num/den"], ...] with strictly increasing indices"""
        if not isinstance(data, list):
            raise ValueError("vector must be a list of [index, value] pairs")
        entries = []
        previous = -1
        for pair in data:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ValueError(f"malformed vector entry {pair!r}")
            index, raw = pair
            if isinstance(index, bool) or not isinstance(index, int) or index < 0:
                raise ValueError(f"malformed coordinate index {index!r}")
            if index <= previous:
                raise ValueError("vector indices must be strictly increasing")
            value = parse_rational(raw)
            if value == 0:
                raise ValueError(f"zero value stored at index {index}")
            entries.append((index, value))
            previous = index
        return cls(entries)

    def to_json(self) -> List[list]:
        return [[index, format_rational(value)] for index, value in self._entries]

    @property
    def entries(self) -> Tuple[Tuple[int, Fraction], ...]:
        return self._entries

    @property
    def support(self) -> frozenset:
        return frozenset(self._lookup)

    def as_dict(self) -> Dict[int, Fraction]:
        return dict(self._lookup)

    def sort_key(self) -> Tuple[Tuple[int, Fraction], ...]:
        return self._entries

    def max_index(self) -> int:
        return self._entries[-1][0] if self._entries else -1

    def __getitem__(self, index: int) -> Fraction:
        return self._lookup.get(index, Fraction(0))

    def __iter__(self) -> Iterator[Tuple[int, Fraction]]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __add__(self, other: "SparseVector") -> "SparseVector":
        if not isinstance(other, SparseVector):
            return NotImplemented
        values = dict(self._lookup)
        for index, value in other._entries:
            values[index] = values.get(index, 0) + value
        return SparseVector._from_clean_dict(values)

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        if not isinstance(other, SparseVector):
            return NotImplemented
        values = dict(self._lookup)
        for index, value in other._entries:
            values[index] = values.get(index, 0) - value
        return SparseVector._from_clean_dict(values)

    def __neg__(self) -> "SparseVector":
        return SparseVector._from_clean_dict({i: -v for i, v in self._entries})

    def __mul__(self, k: RationalLike) -> "SparseVector":
        if isinstance(k, SparseVector):
            return NotImplemented
        return scale(self, k)

    __rmul__ = __mul__

    def dot(self, other: "SparseVector") -> Fraction:
        small, large = (self, other) if len(self) <= len(other) else (other, self)
        return sum((v * large._lookup[i] for i, v in small._entries if i in large._lookup), Fraction(0))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._entries)
        return self._hash

    def __repr__(self) -> str:
        if not self._entries:
            return "SparseVector(0)"
        terms = " + ".join(f"({format_rational(v)})e_{i}" for i, v in self._entries)
        return f"SparseVector({terms})"


def _validate_vector(value: Any) -> SparseVector:
    if isinstance(value, SparseVector):
        return value
    return SparseVector.from_json(value)


Vector = Annotated[SparseVector, PlainValidator(_validate_vector), PlainSerializer(lambda v: v.to_json(), return_type=list)]


class PNorm(BaseModel):
    """The exponent p of l_p"""
    p: int = Field(ge=1)

    class Config:
        frozen = True


class PowThreshold(BaseModel):
    """A real radius c ** (1/p), stored exactly as its p-th power c"""
    c: Rational

    @field_validator("c")
    @classmethod
    def _non_negative(cls, value: Fraction) -> Fraction:
        if value < 0:
            raise ValueError("threshold power must be non-negative")
        return value

    @classmethod
    def of(cls, value: Union["PowThreshold", RationalLike]) -> "PowThreshold":
        if isinstance(value, PowThreshold):
            return value
        return cls(c=parse_rational(value) if isinstance(value, str) else Fraction(value))

    def scaled(self, k: RationalLike, p: Union[int, PNorm]) -> "PowThreshold":
        """Threshold for the radius k * c ** (1/p)"""
        return PowThreshold(c=self.c * Fraction(k) ** exponent(p))

    class Config:
        frozen = True


class Ordering(str, Enum):
    LESS = "Less"
    EQUAL = "Equal"
    GREATER = "Greater"

    @classmethod
    def of(cls, a: Fraction, b: Fraction) -> "Ordering":
        if a < b:
            return cls.LESS
        if a > b:
            return cls.GREATER
        return cls.EQUAL


def exponent(n: Union[int, PNorm]) -> int:
    p = n.p if isinstance(n, PNorm) else n
    if isinstance(p, bool) or not isinstance(p, int) or p < 1:
        raise ValueError(f"p must be an integer >= 1, got {p!r}")
    return p


def _threshold_power(t: Union[PowThreshold, RationalLike]) -> Fraction:
    return PowThreshold.of(t).c


def norm_pow(v: SparseVector, n: Union[int, PNorm]) -> Fraction:
    """Sum of |v_i| ** p, exactly"""
    p = exponent(n)
    if p == 1:
        return sum((abs(value) for _, value in v.entries), Fraction(0))
    return sum((abs(value) ** p for _, value in v.entries), Fraction(0))


def compare_norm(v: SparseVector, n: Union[int, PNorm], t: Union[PowThreshold, RationalLike]) -> Ordering:
    """Order ||v||_p against c ** (1/p) by comparing norm_pow(v) with c"""
    return Ordering.of(norm_pow(v, n), _threshold_power(t))


def add(v: SparseVector, w: SparseVector) -> SparseVector:
    return v + w


def sub(v: SparseVector, w: SparseVector) -> SparseVector:
    return v - w


def scale(v: SparseVector, k: RationalLike) -> SparseVector:
    k = Fraction(k)
    if k == 0:
        return SparseVector()
    return SparseVector._from_clean_dict({i: value * k for i, value in v.entries})


def distance_pow(v: SparseVector, w: SparseVector, n: Union[int, PNorm]) -> Fraction:
    return norm_pow(v - w, n)


def root_bracket(c: Fraction, p: int, bits: int) -> Tuple[Fraction, Fraction]:
    """Rational lo <= c ** (1/p) <= hi with hi - lo <= 2 ** -bits"""
    c = Fraction(c)
    if c == 0:
        return Fraction(0), Fraction(0)
    scale_pow = 2 ** (bits * p)
    floor_num = (c.numerator * scale_pow) // c.denominator
    root, _ = integer_nthroot(floor_num, p)
    lo = Fraction(int(root), 2 ** bits)
    ceil_num = -((-c.numerator * scale_pow) // c.denominator)
    root_hi, exact = integer_nthroot(ceil_num, p)
    hi = Fraction(int(root_hi) + (0 if exact else 1), 2 ** bits)
    return lo, hi


def exact_root(c: Fraction, p: int):
    """c ** (1/p) when it is rational, else None"""
    c = Fraction(c)
    num, num_exact = integer_nthroot(c.numerator, p)
    den, den_exact = integer_nthroot(c.denominator, p)
    if num_exact and den_exact:
        return Fraction(int(num), int(den))
    return None


def compare_root_sum(n: RationalLike, a: RationalLike, b: RationalLike, p: Union[int, PNorm]) -> Ordering:
    """Order n ** (1/p) against a ** (1/p) + b ** (1/p), exactly.

    Used for radii such as 2r + eps and tile_radius + delta, where the
    right-hand side has no rational p-th power.
    """
    p = exponent(p)
    n, a, b = Fraction(n), Fraction(a), Fraction(b)
    if min(n, a, b) < 0:
        raise ValueError("powers must be non-negative")
    if p == 1:
        return Ordering.of(n, a + b)
    if p == 2:
        d = n - a - b
        if d < 0:
            return Ordering.LESS
        return Ordering.of(d * d, 4 * a * b)

    roots = [exact_root(x, p) for x in (n, a, b)]
    if all(r is not None for r in roots):
        return Ordering.of(roots[0], roots[1] + roots[2])
    if a == 0 or b == 0:
        return Ordering.of(n, a + b)
    # a ** (1/p) + b ** (1/p) = b ** (1/p) * (1 + q) when q = (a/b) ** (1/p) is rational
    ratio = exact_root(a / b, p)
    if ratio is not None:
        return Ordering.of(n, b * (1 + ratio) ** p)

    # with (a/b) ** (1/p) irrational the two sides are never equal, so refining terminates
    bits = 32
    while True:
        n_lo, n_hi = root_bracket(n, p, bits)
        a_lo, a_hi = root_bracket(a, p, bits)
        b_lo, b_hi = root_bracket(b, p, bits)
        if n_hi < a_lo + b_lo:
            return Ordering.LESS
        if n_lo > a_hi + b_hi:
            return Ordering.GREATER
        bits *= 2
        logger.debug("root_sum_refined", bits=bits, p=p)


def root_sum_bound(a: RationalLike, b: RationalLike, p: Union[int, PNorm]) -> PowThreshold:
    """A rational c with c >= (a ** (1/p) + b ** (1/p)) ** p"""
    p = exponent(p)
    a, b = Fraction(a), Fraction(b)
    if p == 1:
        return PowThreshold(c=a + b)
    _, a_hi = root_bracket(a, p, 32)
    _, b_hi = root_bracket(b, p, 32)
    return PowThreshold(c=(a_hi + b_hi) ** p)
