"""Small dense linear algebra over ``Fraction`` (exact) or ``float``.

Vectors are tuples, matrices are tuples of row tuples.  Every routine works
exactly when all inputs are rational and falls back to partial pivoting with
an absolute tolerance as soon as a float shows up.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational as _Rational
from typing import Iterable, Sequence

Scalar = Fraction | float
Vec = tuple
Matrix = tuple

FLOAT_TOL = 1e-10


def is_exact(values: Iterable) -> bool:
    """True when every entry (recursively) is an int or Fraction."""
    for v in values:
        if isinstance(v, (tuple, list)):
            if not is_exact(v):
                return False
        elif not isinstance(v, _Rational):
            return False
    return True


def as_vec(values: Iterable) -> Vec:
    """Coerce to a tuple; ints and "p/q" strings become Fractions, floats stay floats."""
    return tuple(Fraction(v) if isinstance(v, (_Rational, str)) else v for v in values)


def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(as_vec(r) for r in rows)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def add(a: Sequence, b: Sequence) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def scale(t, a: Sequence) -> Vec:
    return tuple(t * x for x in a)


def neg(a: Sequence) -> Vec:
    return tuple(-x for x in a)


def matvec(A: Matrix, x: Sequence) -> Vec:
    return tuple(dot(row, x) for row in A)


def transpose(A: Matrix) -> Matrix:
    return tuple(zip(*A))


def matmul(A: Matrix, B: Matrix) -> Matrix:
    Bt = transpose(B)
    return tuple(tuple(dot(row, col) for col in Bt) for row in A)


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def max_abs(a: Iterable):
    return max((abs(x) for x in a), default=Fraction(0))


def _is_zero(x, exact: bool) -> bool:
    return x == 0 if exact else abs(x) <= FLOAT_TOL


def _echelon(rows: Sequence[Sequence]) -> tuple[list[list], list[int]]:
    """Row-reduce a copy of ``rows``; returns (reduced rows, pivot columns)."""
    exact = is_exact(rows)
    M = [list(r) for r in rows]
    if not M:
        return M, []
    ncols = len(M[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(M):
            break
        if exact:
            p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        else:
            p = max(range(r, len(M)), key=lambda i: abs(M[i][c]))
            if abs(M[p][c]) <= FLOAT_TOL:
                p = None
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        M[r] = [x / piv for x in M[r]]
        for i in range(len(M)):
            if i != r and not _is_zero(M[i][c], exact):
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    return M, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(_echelon(rows)[1])


def independent_indices(vectors: Sequence[Sequence]) -> list[int]:
    """Greedy maximal linearly independent subset, in input order."""
    chosen: list[int] = []
    basis: list[Sequence] = []
    for i, v in enumerate(vectors):
        if rank(basis + [v]) > len(basis):
            basis.append(v)
            chosen.append(i)
    return chosen


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[Vec]:
    """Basis of {x : rows @ x = 0}."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    R, pivots = _echelon(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        x = [Fraction(0)] * ncols
        x[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            x[pc] = -R[r][fc]
        basis.append(tuple(x))
    return basis


def solve(A: Matrix, b: Sequence) -> Vec:
    """Solve the square system ``A x = b``; raises ``ZeroDivisionError`` if singular."""
    n = len(A)
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    R, pivots = _echelon(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return tuple(R[i][n] for i in range(n))


def inverse(A: Matrix) -> Matrix:
    n = len(A)
    aug = [list(A[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    R, pivots = _echelon(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return tuple(tuple(R[i][n:]) for i in range(n))


def coordinates(basis: Sequence[Sequence], w: Sequence, tol: float = FLOAT_TOL) -> Vec | None:
    """Coefficients ``a`` with ``sum a_i basis_i = w``, or None if ``w`` is off the span.

    ``basis`` must be linearly independent.  With floats the least-squares
    solution is returned when its residual is within ``tol``.
    """
    k = len(basis)
    if k == 0:
        return () if max_abs(w) <= (0 if is_exact(w) else tol) else None
    if is_exact(basis) and is_exact(w):
        # columns are basis vectors: solve the stacked system exactly
        m = len(w)
        aug = [[basis[j][i] for j in range(k)] + [w[i]] for i in range(m)]
        R, pivots = _echelon(aug)
        if k in pivots:
            return None
        return tuple(R[i][k] for i in range(k))
    G = [[float(dot(bi, bj)) for bj in basis] for bi in basis]
    rhs = [float(dot(bi, w)) for bi in basis]
    a = solve(tuple(tuple(r) for r in G), rhs)
    resid = max_abs(sub(tuple(sum(a[j] * float(basis[j][i]) for j in range(k)) for i in range(len(w))), w))
    return a if resid <= tol else None


def combine(coeffs: Sequence, vectors: Sequence[Sequence]) -> Vec:
    m = len(vectors[0])
    return tuple(sum((c * v[i] for c, v in zip(coeffs, vectors)), Fraction(0)) for i in range(m))


def solve_linear_map(domain: Sequence[Sequence], images: Sequence[Sequence]) -> Matrix:
    """Matrix ``A`` with ``A @ domain[i] = images[i]`` for a basis ``domain`` of R^m."""
    P = transpose(as_matrix(domain))
    Q = transpose(as_matrix(images))
    return matmul(Q, inverse(P))


def format_matrix(A: Matrix) -> str:
    cells = [[str(x) for x in row] for row in A]
    width = max((len(c) for row in cells for c in row), default=1)
    return "\n".join("[ " + "  ".join(c.rjust(width) for c in row) + " ]" for row in cells)
