"""
Hermite and Smith normal forms over the integers.

The Hermite form is computed here with explicit unimodular row operations
so the transform U comes out alongside H; the Smith form delegates to
sympy's decomposition, which returns both transforms.
"""
from typing import List

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_decomp

from tilelat.abelian.models import IntegerMatrix, NormalFormResult


def exgcd(a: int, b: int) -> List[List[int]]:
    """Extended GCD algorithm.

    Args:
        a: an integer.
        b: an integer.

    Returns:
        A 2x2 integer matrix M of determinant 1 so that M @ [a, b] = [gcd(a, b), 0]
        with gcd(a, b) >= 0.
    """
    # Euclid on rows [value, coefficient of a, coefficient of b]
    r0, r1 = [a, 1, 0], [b, 0, 1]
    while r1[0] != 0:
        q = r0[0] // r1[0]
        r0, r1 = r1, [x - q * y for x, y in zip(r0, r1)]
    if r0[0] < 0:
        r0 = [-x for x in r0]
    top, bottom = r0[1:], r1[1:]
    if top[0] * bottom[1] - top[1] * bottom[0] < 0:
        bottom = [-x for x in bottom]
    return [top, bottom]


def _combine(M: List[List[int]], i: int, j: int, op: List[List[int]]):
    """Replace rows (i, j) of M by op @ (row_i, row_j)"""
    (a, b), (c, d) = op
    row_i, row_j = M[i], M[j]
    M[i] = [a * x + b * y for x, y in zip(row_i, row_j)]
    M[j] = [c * x + d * y for x, y in zip(row_i, row_j)]


def hnf(A: IntegerMatrix) -> NormalFormResult:
    """Row Hermite normal form with unimodular certificate.

    H has its nonzero rows first, positive pivots moving strictly right, zeros
    below each pivot and entries above each pivot reduced into [0, pivot).

    Args:
        A: integer matrix

    Returns:
        NormalFormResult with U @ A == H and rank = number of nonzero rows
    """
    m, n = A.rows, A.cols
    H = [list(row) for row in A.entries]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    r = 0
    for col in range(n):
        if r == m:
            break
        for i in range(r + 1, m):
            if H[i][col] == 0:
                continue
            op = exgcd(H[r][col], H[i][col])
            _combine(H, r, i, op)
            _combine(U, r, i, op)
        pivot = H[r][col]
        if pivot == 0:
            continue
        if pivot < 0:
            H[r] = [-x for x in H[r]]
            U[r] = [-x for x in U[r]]
            pivot = -pivot
        for i in range(r):
            q = H[i][col] // pivot
            if q:
                H[i] = [x - q * y for x, y in zip(H[i], H[r])]
                U[i] = [x - q * y for x, y in zip(U[i], U[r])]
        r += 1
    return NormalFormResult(H=IntegerMatrix.from_rows(H), U=IntegerMatrix.from_rows(U), rank=r)


def smith(A: IntegerMatrix) -> NormalFormResult:
    """Smith normal form U @ A @ V = S with invariant factors"""
    S, U, V = smith_normal_decomp(Matrix(A.entries), domain=ZZ)
    as_rows = lambda M: [[int(M[i, j]) for j in range(M.cols)] for i in range(M.rows)]
    diagonal = [abs(int(S[i, i])) for i in range(min(S.rows, S.cols))]
    factors = [d for d in diagonal if d != 0]
    return NormalFormResult(
        H=IntegerMatrix.from_rows(as_rows(S)),
        U=IntegerMatrix.from_rows(as_rows(U)),
        V=IntegerMatrix.from_rows(as_rows(V)),
        rank=len(factors),
        invariant_factors=factors,
    )


def determinant(M: IntegerMatrix) -> int:
    return int(Matrix(M.entries).det())


def inverse_unimodular(M: IntegerMatrix) -> IntegerMatrix:
    """Exact integer inverse of a square matrix with determinant +-1"""
    inverse = Matrix(M.entries).inv()
    return IntegerMatrix.from_rows([[int(inverse[i, j]) for j in range(M.cols)] for i in range(M.rows)])
