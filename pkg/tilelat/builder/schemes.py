"""
Seeded candidate and sample generation.

The grid sequence is ordered by height. An entry x = n / 2**k (n odd when
k > 0) at index i costs i + k + ceil(|x|), and a vector's height is the sum
of its entry costs. Every height holds finitely many vectors; height H
bounds support, denominators and magnitudes by H, so fresh coordinates and
dyadic halves both show up early. Height 0 is {0}, so the sequence always
starts with the zero vector. Inside a height the order is canonical for
seed 0; any other seed shuffles it.
"""
import random
from fractions import Fraction
from itertools import islice
from typing import Iterator, List, Sequence, Tuple, Union

import structlog

from tilelat.builder.models import EnumerationScheme
from tilelat.exactvec import PowThreshold, RationalLike, SparseVector, norm_pow

logger = structlog.get_logger("schemes")

_STREAM_PATIENCE = 10_000
_SAMPLE_TRIES = 32
_QUARTER = Fraction(1, 4)


def _entry_values(cost: int) -> List[Fraction]:
    """Nonzero dyadics with k + ceil(|x|) == cost"""
    values = []
    for k in range(cost):
        ceiling = cost - k
        if k == 0:
            magnitudes = [Fraction(ceiling)]
        else:
            den = 2 ** k
            magnitudes = [Fraction(n, den) for n in range((ceiling - 1) * den + 1, ceiling * den + 1) if n % 2]
        for magnitude in magnitudes:
            values.extend((magnitude, -magnitude))
    return values


def _entries_of_height(height: int, start: int) -> Iterator[Tuple[Tuple[int, Fraction], ...]]:
    if height == 0:
        yield ()
        return
    for index in range(start, height):
        for cost in range(index + 1, height + 1):
            for value in _entry_values(cost - index):
                for rest in _entries_of_height(height - cost, index + 1):
                    yield ((index, value),) + rest


def _canonical_key(entries: Tuple[Tuple[int, Fraction], ...]):
    return len(entries), tuple((index, abs(value), value < 0) for index, value in entries)


def _grid_height(seed: int, height: int) -> List[SparseVector]:
    layer = sorted(_entries_of_height(height, 0), key=_canonical_key)
    if seed != 0:
        random.Random(seed * 1_000_003 + height).shuffle(layer)
    return [SparseVector(dict(entries)) for entries in layer]


def _grid(seed: int) -> Iterator[SparseVector]:
    height = 0
    while True:
        yield from _grid_height(seed, height)
        height += 1


def _stream(scheme: EnumerationScheme) -> Iterator[SparseVector]:
    rng = random.Random(scheme.seed)
    seen = {SparseVector()}
    yield SparseVector()
    misses = 0
    while misses < _STREAM_PATIENCE:
        size = rng.randint(1, scheme.dimension)
        coords = rng.sample(range(scheme.dimension), size)
        entries = {}
        for coord in coords:
            den = 2 ** rng.randint(0, scheme.denominator_levels)
            bound = scheme.magnitude * den
            numerator = rng.choice([k for k in range(-bound, bound + 1) if k != 0])
            entries[coord] = Fraction(numerator, den)
        vector = SparseVector(entries)
        if vector in seen:
            misses += 1
            continue
        misses = 0
        seen.add(vector)
        yield vector
    logger.warning("stream_exhausted", emitted=len(seen), dimension=scheme.dimension)


def iter_candidates(scheme: EnumerationScheme) -> Iterator[SparseVector]:
    if scheme.kind == "grid":
        return _grid(scheme.seed)
    return _stream(scheme)


def enumerate_candidates(scheme: EnumerationScheme, count: int) -> List[SparseVector]:
    """The first `count` candidates of the scheme's injective sequence.

    Args:
        scheme: enumeration parameters
        count: number of candidates, at least 1

    Returns:
        Pairwise distinct vectors, starting with the zero vector
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    return list(islice(iter_candidates(scheme), count))


def _offset(rng: random.Random, pool: List[int], radius: PowThreshold, p: int) -> SparseVector:
    if radius.c >= 1 and rng.random() < 0.25:
        return SparseVector({rng.choice(pool): rng.choice((1, -1))})
    for _ in range(_SAMPLE_TRIES):
        coords = rng.sample(pool, rng.randint(1, min(3, len(pool))))
        offset = SparseVector({coord: rng.randint(-4, 4) * _QUARTER for coord in coords})
        if norm_pow(offset, p) <= radius.c:
            return offset
    return SparseVector()


def sample_points(seed: int, count: int, sites: Sequence[SparseVector], tile_radius: Union[PowThreshold, RationalLike],
                  p: int) -> List[SparseVector]:
    """Seeded points of the form site + offset with ||offset|| <= tile_radius.

    Each offset has one to three quarter-integer entries on coordinates the
    sites use; about a quarter of the offsets are +-e_c, which land on tile
    boundaries. With sites taken from D every sample lies in a tile.
    """
    if not sites:
        return []
    radius = PowThreshold.of(tile_radius)
    rng = random.Random(seed)
    pool = sorted(set().union(*(site.support for site in sites))) or [0]
    return [rng.choice(sites) + _offset(rng, pool, radius, p) for _ in range(count)]


def sample_directions(seed: int, count: int, coordinates: Sequence[int], denominator_levels: int = 2) -> List[SparseVector]:
    """Seeded nonzero dyadic directions over the given coordinates"""
    if not coordinates:
        return []
    rng = random.Random(seed)
    directions = []
    den = 2 ** denominator_levels
    while len(directions) < count:
        entries = {coord: Fraction(rng.randint(-den, den), den) for coord in coordinates}
        vector = SparseVector(entries)
        if vector:
            directions.append(vector)
    return directions
