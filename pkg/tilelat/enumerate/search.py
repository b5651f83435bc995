"""
Exhaustive enumeration of subgroup elements inside an l_p ball.

The default route works on a triangular frame: an ordering g_1..g_m of the
generators with pivot coordinates f_k such that g_k[f_k] != 0 and every
earlier generator vanishes at f_k. For x = sum n_k g_k this gives

    x[f_k] = s_k n_k + (terms in n_{k+1}, ..., n_m),    s_k = g_k[f_k]

so coefficients are resolved from the newest generator to the oldest, each
bounded by the budget left after the pivot terms already fixed. Builder
groups come with this frame (the fresh coordinates, s_k = 1); other groups
get one by peeling generators that own a private coordinate.

When several picks fit in the radius the frame is split: levels whose pivot
no other generator touches are chosen directly, the rest are completed by
the same depth-first search on a much smaller frame.
"""
import copy
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import product
from math import ceil, floor, lcm
from typing import Dict, List, Optional, Sequence, Tuple

import structlog
from sympy import Matrix, Rational as SympyRational, integer_nthroot

from tilelat.builder.models import Subgroup
from tilelat.config import get_settings
from tilelat.enumerate.models import BallEnumeration, BallPoint, BallQuery
from tilelat.errors import BoundUnderivable, UnsupportedNorm
from tilelat.exactvec import SparseVector, norm_pow
from tilelat.observability.metrics import record_nodes

logger = structlog.get_logger("enumerate")


class TriangularFrame:
    """Generator ordering with pivot coordinates (see module docstring)"""

    def __init__(self, order: List[int], pivots: List[int], generators: Sequence[SparseVector]):
        self.order = order  # frame level -> position in the subgroup's generator list
        self.pivots = pivots
        self.vectors: List[Dict[int, Fraction]] = [generators[i].as_dict() for i in order]
        self.scales: List[Fraction] = [self.vectors[k][f] for k, f in enumerate(pivots)]
        self.level_of: Dict[int, int] = {f: k for k, f in enumerate(pivots)}

    def __len__(self) -> int:
        return len(self.order)


def _recorded_frame(subgroup: Subgroup) -> Optional[TriangularFrame]:
    pivots = [record.fresh_index for record in subgroup.records]
    if any(f is None for f in pivots):
        return None
    earlier: set = set()
    for record, f in zip(subgroup.records, pivots):
        if f in earlier or record.g[f] == 0:
            return None
        earlier |= record.g.support
    return TriangularFrame(list(range(subgroup.rank)), pivots, subgroup.generators)


def triangular_frame(subgroup: Subgroup) -> Optional[TriangularFrame]:
    """Find a triangular frame for the subgroup's generators, or None"""
    if subgroup.is_trivial:
        return TriangularFrame([], [], [])
    if subgroup.mode != "generated":
        frame = _recorded_frame(subgroup)
        if frame is not None:
            return frame

    generators = subgroup.generators
    remaining = list(range(len(generators)))
    order_rev: List[int] = []
    pivots_rev: List[int] = []
    while remaining:
        counts = Counter(c for i in remaining for c in generators[i].support)
        chosen = None
        for i in reversed(remaining):
            private = sorted(c for c in generators[i].support if counts[c] == 1)
            if private:
                unit = [c for c in private if abs(generators[i][c]) == 1]
                chosen = (i, (unit or private)[0])
                break
        if chosen is None:
            return None
        remaining.remove(chosen[0])
        order_rev.append(chosen[0])
        pivots_rev.append(chosen[1])
    return TriangularFrame(order_rev[::-1], pivots_rev[::-1], generators)


def coefficient_range(a: Fraction, s: Fraction, budget: Fraction, p: int) -> List[int]:
    """All integers n with |s*n + a|^p <= budget, ascending"""
    if budget < 0:
        return []
    centre = -a / s
    lo = floor(centre)
    found: List[int] = []
    n = lo
    while abs(s * n + a) ** p <= budget:
        found.append(n)
        n -= 1
    found.reverse()
    n = lo + 1
    while abs(s * n + a) ** p <= budget:
        found.append(n)
        n += 1
    return found


class _BallSearch:
    """Depth-first search over one triangular frame"""

    def __init__(self, frame: TriangularFrame, center: SparseVector, radius: Fraction, p: int, strict: bool):
        self.frame = frame
        self.center = center
        self.radius = radius
        self.p = p
        self.strict = strict
        self.points: List[Tuple[Tuple[Tuple[int, int], ...], Dict[int, Fraction]]] = []
        self.nodes = 0
        # min_unit[k]: cheapest nonzero pivot term among levels 0..k
        self.min_unit: List[Fraction] = []
        running = None
        for scale in frame.scales:
            cost = abs(scale) ** p
            running = cost if running is None else min(running, cost)
            self.min_unit.append(running)

    def root(self):
        y = {i: -v for i, v in self.center.entries}
        return len(self.frame) - 1, y, (), Fraction(0)

    def _pending_below(self, k: int, y: Dict[int, Fraction]) -> int:
        level_of = self.frame.level_of
        best = -1
        for coord in y:
            level = level_of.get(coord)
            if level is not None and level < k and level > best:
                best = level
        return best

    def _leaf(self, y: Dict[int, Fraction], coeffs):
        dist = sum((abs(v) ** self.p for v in y.values()), Fraction(0))
        if dist < self.radius or (not self.strict and dist == self.radius):
            self.points.append((coeffs, y))

    def _shift(self, y: Dict[int, Fraction], k: int, n: int) -> Dict[int, Fraction]:
        shifted = dict(y)
        for coord, value in self.frame.vectors[k].items():
            v = shifted.get(coord, 0) + n * value
            if v:
                shifted[coord] = v
            else:
                shifted.pop(coord, None)
        return shifted

    def expand(self, k: int, y: Dict[int, Fraction], coeffs, spent: Fraction):
        """Children of a node: list of (k, y, coeffs, spent), or [] at a leaf"""
        pivots, scales = self.frame.pivots, self.frame.scales
        budget = self.radius - spent
        while k >= 0:
            self.nodes += 1
            a = y.get(pivots[k], 0)
            if a == 0 and budget < self.min_unit[k]:
                k = self._pending_below(k, y)
                continue
            break
        if k < 0:
            self._leaf(y, coeffs)
            return []
        a = y.get(pivots[k], Fraction(0))
        children = []
        for n in coefficient_range(a, scales[k], budget, self.p):
            cost = abs(scales[k] * n + a) ** self.p
            if n == 0:
                children.append((k - 1, y, coeffs, spent + cost))
            else:
                children.append((k - 1, self._shift(y, k, n), coeffs + ((k, n),), spent + cost))
        return children

    def run(self, k: int, y: Dict[int, Fraction], coeffs, spent: Fraction):
        stack = [(k, y, coeffs, spent)]
        while stack:
            node = stack.pop()
            stack.extend(self.expand(*node))


def _added(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def _integer_range(a: int, s: int, budget: int, p: int) -> range:
    """All integers m with |a + m*s|^p <= budget, ascending (s != 0)"""
    if budget < 0:
        return range(0)
    r = int(integer_nthroot(budget, p)[0])
    lo, hi = -r - a, r - a
    if s < 0:
        s, lo, hi = -s, -hi, -lo
    return range(-(-lo // s), hi // s + 1)


class _SplitSearch:
    """Ball search that splits a frame into free and core levels.

    A level is free when no other generator and not the center touch its
    pivot: its coefficient n then costs exactly |n s|^p on the pivot and
    otherwise moves only the shared coordinates. Free picks are made newest
    first and after each pick the core levels are completed by a small
    depth-first search. Linear forms that vanish on the core span bound the
    shared part from below; once a single pick is left, picks that spend the
    budget exactly are looked up by the values of those forms. Everything
    runs on integers after clearing denominators.
    """

    def __init__(self, frame: TriangularFrame, center: SparseVector, radius: Fraction, p: int, strict: bool):
        self.frame = frame
        self.center = center
        self.p = p
        self.nodes = 0
        self.points: List[Tuple[tuple, tuple, Tuple[int, ...]]] = []

        touched = Counter(c for vector in frame.vectors for c in vector)
        centre = center.as_dict()
        free = [k for k, f in enumerate(frame.pivots) if touched[f] == 1 and f not in centre]
        free_set = set(free)
        self.core = [k for k in range(len(frame)) if k not in free_set]
        free_pivots = {frame.pivots[k] for k in free}
        self.shared = sorted(set(touched) - free_pivots)
        self.fixed = {c: v for c, v in centre.items() if c not in touched}

        values = [v for vector in frame.vectors for v in vector.values()] + list(centre.values())
        self.den = lcm(*(v.denominator for v in values)) if values else 1
        scaled_radius = (radius - sum((abs(v) ** p for v in self.fixed.values()), Fraction(0))) * self.den ** p
        self.limit = ceil(scaled_radius) - 1 if strict else floor(scaled_radius)

        self._pos = {c: i for i, c in enumerate(self.shared)}
        self.levels = free
        self.picks: List[list] = []
        for k in free:
            rest = self._scaled(frame.vectors[k])
            unit = abs(frame.scales[k]) * self.den
            options = []
            n = 1
            while self.limit >= 0 and (n * unit) ** p <= self.limit:
                cost = int((n * unit) ** p)
                options.append((n, cost, tuple(n * x for x in rest)))
                options.append((-n, cost, tuple(-n * x for x in rest)))
                n += 1
            self.picks.append(options)
        # cheapest[i]: lowest pick cost among free levels[0..i-1]
        self.cheapest: List[float] = [float("inf")]
        for options in self.picks:
            lowest = min((cost for _, cost, _ in options), default=float("inf"))
            self.cheapest.append(min(self.cheapest[-1], lowest))

    @property
    def worthwhile(self) -> bool:
        return bool(self.levels) and self.limit >= 2 * self.cheapest[-1]

    def _scaled(self, vector: Dict[int, Fraction]) -> Tuple[int, ...]:
        row = [0] * len(self.shared)
        for c, v in vector.items():
            if c in self._pos:
                row[self._pos[c]] = int(v * self.den)
        return tuple(row)

    def _prepare(self):
        p = self.p
        self.core_rows = [self._scaled(self.frame.vectors[k]) for k in self.core]
        self.core_pivot = [self._pos[self.frame.pivots[k]] for k in self.core]
        self.core_scale = [int(self.frame.scales[k] * self.den) for k in self.core]
        if self.core_rows:
            normals = []
            for column in Matrix(self.core_rows).nullspace():
                entries = [_from_sympy(v) for v in column]
                scale = lcm(*(v.denominator for v in entries))
                normals.append(tuple(int(v * scale) for v in entries))
        else:
            normals = [tuple(int(i == j) for j in range(len(self.shared))) for i in range(len(self.shared))]
        self.normals = normals
        if p == 1:
            self.denoms = [max(abs(v) for v in row) for row in normals]
        elif p == 2:
            self.denoms = [sum(v * v for v in row) for row in normals]
        else:
            self.denoms = [sum(abs(v) for v in row) ** p for row in normals]

        self.picks = [[(n, cost, vec, self._forms(vec)) for n, cost, vec in options] for options in self.picks]
        self.by_cost: Dict[int, list] = {}
        self.exact: Dict[int, Dict[tuple, list]] = {}
        for idx, options in enumerate(self.picks):
            for n, cost, vec, form in options:
                self.by_cost.setdefault(cost, []).append((idx, n, vec, form))
                self.exact.setdefault(cost, {}).setdefault(form, []).append((idx, n, vec))
        self.costs = sorted(self.by_cost)

    def _forms(self, vec: Tuple[int, ...]) -> Tuple[int, ...]:
        return tuple(sum(a * b for a, b in zip(row, vec)) for row in self.normals)

    def _feasible(self, forms: Tuple[int, ...], budget: int) -> bool:
        p = self.p
        for value, denom in zip(forms, self.denoms):
            if abs(value) ** p > budget * denom:
                return False
        return True

    def _complete(self, w: Tuple[int, ...], budget: int, picks: tuple):
        """Core coefficients m with ||w + sum m_j g_j||^p <= budget"""
        p = self.p
        self.nodes += 1
        stack = [(len(self.core) - 1, w, (), 0)]
        while stack:
            i, y, chosen, spent = stack.pop()
            if i < 0:
                if sum(abs(v) ** p for v in y) <= budget:
                    self.points.append((picks, chosen, y))
                continue
            self.nodes += 1
            a, s = y[self.core_pivot[i]], self.core_scale[i]
            for m in _integer_range(a, s, budget - spent, p):
                cost = abs(a + m * s) ** p
                if m == 0:
                    stack.append((i - 1, y, chosen, spent + cost))
                else:
                    shifted = tuple(v + m * g for v, g in zip(y, self.core_rows[i]))
                    stack.append((i - 1, shifted, chosen + ((self.core[i], m),), spent + cost))

    def _last(self, limit: int, w, forms, budget: int, picks: tuple):
        for cost in self.costs:
            if cost > budget:
                break
            if cost == budget:
                key = tuple(-v for v in forms)
                for idx, n, vec in self.exact[cost].get(key, ()):
                    if idx < limit:
                        self.nodes += 1
                        self._complete(_added(w, vec), 0, picks + ((self.levels[idx], n),))
                continue
            for idx, n, vec, form in self.by_cost[cost]:
                if idx >= limit:
                    continue
                self.nodes += 1
                if self._feasible(_added(forms, form), budget - cost):
                    self._complete(_added(w, vec), budget - cost, picks + ((self.levels[idx], n),))

    def _visit(self, limit: int, w, forms, budget: int, picks: tuple):
        self.nodes += 1
        if self._feasible(forms, budget):
            self._complete(w, budget, picks)
        if budget < self.cheapest[limit]:
            return
        if budget < 2 * self.cheapest[limit]:
            self._last(limit, w, forms, budget, picks)
            return
        for task in self._children(limit, w, forms, budget, picks):
            self._visit(*task)

    def _children(self, limit: int, w, forms, budget: int, picks: tuple):
        for idx in range(limit - 1, -1, -1):
            for n, cost, vec, form in self.picks[idx]:
                if cost <= budget:
                    yield idx, _added(w, vec), _added(forms, form), budget - cost, picks + ((self.levels[idx], n),)

    def _explore(self, task):
        worker = copy.copy(self)
        worker.points, worker.nodes = [], 0
        worker._visit(*task)
        return worker.points, worker.nodes

    def run(self, threads: int) -> Tuple[list, int]:
        self._prepare()
        root = tuple(-v for v in self._scaled(self.center.as_dict()))
        forms = self._forms(root)
        if threads <= 1:
            self._visit(len(self.levels), root, forms, self.limit, ())
            return self.points, self.nodes
        # root completion here, each top-level pick in its own subtree
        if self._feasible(forms, self.limit):
            self._complete(root, self.limit, ())
        tasks = list(self._children(len(self.levels), root, forms, self.limit, ()))
        raw, nodes = list(self.points), self.nodes + 1
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for points, count in pool.map(self._explore, tasks):
                raw.extend(points)
                nodes += count
        return raw, nodes

    def finish(self, subgroup: Subgroup, raw) -> List[BallPoint]:
        frame, center = self.frame, self.center
        points = []
        for picks, chosen, y in raw:
            coefficients = [0] * subgroup.rank
            entries = {c: -v for c, v in self.fixed.items()}
            for level, n in picks:
                coefficients[frame.order[level]] = n
                entries[frame.pivots[level]] = n * frame.scales[level]
            for level, m in chosen:
                coefficients[frame.order[level]] = m
            for c, v in zip(self.shared, y):
                if v:
                    entries[c] = Fraction(v, self.den)
            element = SparseVector(entries) + center
            points.append(BallPoint(tuple(coefficients), element, norm_pow(element - center, self.p)))
        return points


def _finish(subgroup: Subgroup, frame: TriangularFrame, center: SparseVector, raw, p: int) -> List[BallPoint]:
    points = []
    for coeffs, y in raw:
        coefficients = [0] * subgroup.rank
        for level, n in coeffs:
            coefficients[frame.order[level]] = n
        element = SparseVector(y) + center
        points.append(BallPoint(tuple(coefficients), element, norm_pow(element - center, p)))
    return points


def _canonical(points: List[BallPoint]) -> List[BallPoint]:
    return sorted(points, key=lambda point: (point.distance_pow, point.element.sort_key()))


def _fresh_route(subgroup: Subgroup, frame: TriangularFrame, query: BallQuery, threads: int) -> BallEnumeration:
    p = subgroup.p
    split = _SplitSearch(frame, query.center, query.radius.c, p, query.strict)
    if split.worthwhile:
        raw, nodes = split.run(threads)
        points = _canonical(split.finish(subgroup, raw))
        return BallEnumeration(points=points, certified=True, route="fresh", nodes=nodes)

    search = _BallSearch(frame, query.center, query.radius.c, p, query.strict)
    root = search.root()
    if threads <= 1:
        search.run(*root)
        raw, nodes = search.points, search.nodes
    else:
        # split at the first branching node; subtrees are independent
        tasks = search.expand(*root)
        raw, nodes = list(search.points), search.nodes

        def explore(task):
            worker = _BallSearch(frame, query.center, query.radius.c, p, query.strict)
            worker.run(*task)
            return worker.points, worker.nodes

        with ThreadPoolExecutor(max_workers=threads) as pool:
            for points, count in pool.map(explore, tasks):
                raw.extend(points)
                nodes += count
    points = _canonical(_finish(subgroup, frame, query.center, raw, p))
    return BallEnumeration(points=points, certified=True, route="fresh", nodes=nodes)


def _to_sympy(value: Fraction) -> SympyRational:
    return SympyRational(value.numerator, value.denominator)


def _from_sympy(value) -> Fraction:
    value = SympyRational(value)
    return Fraction(int(value.p), int(value.q))


def _gram_route(subgroup: Subgroup, query: BallQuery) -> BallEnumeration:
    """Closest-vector enumeration on the exact Gram matrix (p = 2 only).

    With G = M^T D M (M unit upper triangular) and y the coordinates of the
    projection of the center onto the span,

        ||sum n_i g_i - center||^2 = sum_i d_i (z_i + sum_{j>i} M_ij z_j)^2 + perp,

    where z = n - y and perp is the squared distance from center to the span.
    """
    if subgroup.p != 2:
        raise UnsupportedNorm("the Gram route needs p = 2", p=subgroup.p)
    generators = subgroup.generators
    m = len(generators)
    center = query.center
    if m == 0:
        dist = norm_pow(center, 2)
        ok = dist < query.radius.c or (not query.strict and dist == query.radius.c)
        points = [BallPoint((), SparseVector(), dist)] if ok else []
        return BallEnumeration(points=points, route="gram", nodes=1)

    gram = Matrix(m, m, lambda i, j: _to_sympy(generators[i].dot(generators[j])))
    rhs = Matrix(m, 1, lambda i, _: _to_sympy(generators[i].dot(center)))
    try:
        L, D = gram.LDLdecomposition(hermitian=False)
    except (ValueError, ZeroDivisionError) as exc:
        raise BoundUnderivable("Gram matrix is singular; generators are dependent") from exc
    if any(D[i, i].is_positive is not True for i in range(m)):
        raise BoundUnderivable("Gram matrix is singular; generators are dependent")
    d = [_from_sympy(D[i, i]) for i in range(m)]
    mu = [[_from_sympy(L[j, i]) for j in range(m)] for i in range(m)]  # mu[i][j] = M_ij
    y = [_from_sympy(v) for v in gram.LUsolve(rhs)]
    perp = norm_pow(center, 2) - sum((y[i] * center.dot(generators[i]) for i in range(m)), Fraction(0))

    radius = query.radius.c
    found: List[Tuple[int, ...]] = []
    nodes = 0
    stack = [(m - 1, (), radius - perp)]
    while stack:
        i, chosen, budget = stack.pop()
        nodes += 1
        if budget < 0:
            continue
        if i < 0:
            found.append(chosen)
            continue
        # chosen holds n_{i+1}..n_{m-1} in increasing index order
        z_tail = [n - y[j] for j, n in zip(range(i + 1, m), chosen)]
        shift = sum((mu[i][j] * z for j, z in zip(range(i + 1, m), z_tail)), Fraction(0))
        for n in coefficient_range(shift - y[i], Fraction(1), budget / d[i], 2):
            term = d[i] * (n - y[i] + shift) ** 2
            stack.append((i - 1, (n,) + chosen, budget - term))

    points = []
    for coefficients in found:
        element = subgroup.element(coefficients)
        dist = norm_pow(element - center, 2)
        if dist < radius or (not query.strict and dist == radius):
            points.append(BallPoint(tuple(coefficients), element, dist))
    return BallEnumeration(points=_canonical(points), route="gram", nodes=nodes)


def _box_route(subgroup: Subgroup, query: BallQuery, box: int) -> BallEnumeration:
    points = []
    nodes = 0
    for coefficients in product(range(-box, box + 1), repeat=subgroup.rank):
        nodes += 1
        element = subgroup.element(coefficients)
        dist = norm_pow(element - query.center, subgroup.p)
        if dist < query.radius.c or (not query.strict and dist == query.radius.c):
            points.append(BallPoint(tuple(coefficients), element, dist))
    return BallEnumeration(points=_canonical(points), certified=False, route="box", nodes=nodes)


def enumerate_group_ball(D: Subgroup, q: BallQuery, coefficient_box: Optional[int] = None,
                         route: str = "fresh", threads: Optional[int] = None) -> BallEnumeration:
    """Every x in D with ||x - center||_p <= radius (< radius when strict).

    Args:
        D: the subgroup
        q: ball query; the radius is a p-th power
        coefficient_box: |n_i| bound used only when D has no triangular frame;
            the result is then flagged as not certified
        route: "fresh" (triangular frame), "gram" (p = 2 closest-vector) or "box"
        threads: subtree parallelism; defaults to TILELAT_THREADS

    Returns:
        BallEnumeration in canonical order (distance, then entries)

    Raises:
        BoundUnderivable: no frame and no coefficient box
    """
    threads = threads or get_settings().threads
    if route == "gram":
        result = _gram_route(D, q)
    elif route == "box":
        if coefficient_box is None:
            raise BoundUnderivable("box route needs a coefficient box")
        result = _box_route(D, q, coefficient_box)
    else:
        frame = triangular_frame(D)
        if frame is None:
            if coefficient_box is None:
                raise BoundUnderivable(
                    "generators have no triangular frame and no coefficient bound was supplied",
                    generators=D.rank,
                )
            logger.warning("box_bound_caveat", box=coefficient_box, generators=D.rank)
            result = _box_route(D, q, coefficient_box)
        else:
            result = _fresh_route(D, frame, q, threads)
    record_nodes(result.route, result.nodes)
    logger.debug(
        "ball_enumerated",
        route=result.route,
        radius=q.radius.c,
        strict=q.strict,
        points=len(result),
        nodes=result.nodes,
    )
    return result
