"""Exact matrix algebra over Q(t) and diagonalization over the local ring.

:func:`smith_normal_form` brings a square invertible matrix to diagonal
form using only transformations invertible over the subring of functions
regular at t = 0: row/column swaps and adding a regular multiple of one
row/column to another. The valuations of the resulting diagonal entries
are the orders of the invariant factors and are independent of the
elimination choices; the elimination itself is made deterministic by
always pivoting on an entry of minimal valuation, ties broken by the
smallest (row, column) pair.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SchemaError
from .field import INFINITE, RatFunc, format_ratfunc, parse_ratfunc, t_power

__all__ = [
    "Mat",
    "SnfResult",
    "NonSquareMatrixError",
    "SingularMatrixError",
    "clear_denominators",
    "smith_normal_form",
    "valuation_of_det",
]


class NonSquareMatrixError(ValueError):
    """An operation that needs a square matrix got a rectangular one."""


class SingularMatrixError(ValueError):
    """An operation that needs an invertible matrix got a singular one."""


def _as_rf(x) -> RatFunc:
    return x if isinstance(x, RatFunc) else RatFunc(x)


class Mat:
    """A dense matrix with RatFunc entries, stored row-major."""

    __slots__ = ("rows", "cols", "_e")

    def __init__(self, entries):
        rows = tuple(tuple(_as_rf(x) for x in row) for row in entries)
        if not rows or not rows[0]:
            raise ValueError("matrix must have at least one row and column")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged matrix rows")
        self.rows = len(rows)
        self.cols = width
        self._e = rows

    @classmethod
    def identity(cls, n: int) -> "Mat":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, diag) -> "Mat":
        diag = list(diag)
        n = len(diag)
        return cls([[diag[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def entries(self) -> tuple:
        return self._e

    def __getitem__(self, rc) -> RatFunc:
        r, c = rc
        return self._e[r][c]

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        return self._e == other._e

    def __hash__(self):
        return hash(self._e)

    def __repr__(self):
        body = "; ".join(
            ", ".join(format_ratfunc(x) for x in row) for row in self._e
        )
        return f"Mat[{body}]"

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.cols != other.rows:
            raise ValueError("matrix dimensions do not match")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = RatFunc(0)
                for k in range(self.cols):
                    acc = acc + self._e[i][k] * other._e[k][j]
                row.append(acc)
            out.append(row)
        return Mat(out)

    def scale(self, f) -> "Mat":
        f = _as_rf(f)
        return Mat([[f * x for x in row] for row in self._e])

    def det(self) -> RatFunc:
        """Exact determinant by fraction-friendly Gaussian elimination."""
        if self.rows != self.cols:
            raise NonSquareMatrixError("determinant of a non-square matrix")
        n = self.rows
        m = [list(row) for row in self._e]
        det = RatFunc(1)
        for i in range(n):
            piv = next((r for r in range(i, n) if not m[r][i].is_zero()), None)
            if piv is None:
                return RatFunc(0)
            if piv != i:
                m[i], m[piv] = m[piv], m[i]
                det = -det
            det = det * m[i][i]
            pinv = m[i][i].inv()
            for r in range(i + 1, n):
                if m[r][i].is_zero():
                    continue
                f = m[r][i] * pinv
                for c in range(i, n):
                    m[r][c] = m[r][c] - f * m[i][c]
        return det

    def inverse(self) -> "Mat":
        if self.rows != self.cols:
            raise NonSquareMatrixError("inverse of a non-square matrix")
        n = self.rows
        m = [list(row) + [RatFunc(1 if i == j else 0) for j in range(n)]
             for i, row in enumerate(self._e)]
        for i in range(n):
            piv = next((r for r in range(i, n) if not m[r][i].is_zero()), None)
            if piv is None:
                raise SingularMatrixError("matrix is singular")
            if piv != i:
                m[i], m[piv] = m[piv], m[i]
            pinv = m[i][i].inv()
            m[i] = [x * pinv for x in m[i]]
            for r in range(n):
                if r == i or m[r][i].is_zero():
                    continue
                f = m[r][i]
                m[r] = [m[r][c] - f * m[i][c] for c in range(2 * n)]
        return Mat([row[n:] for row in m])

    # -- serialization -------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[format_ratfunc(x) for x in row] for row in self._e],
        }

    @classmethod
    def from_json_dict(cls, obj, pointer: str = "",
                       max_degree: int | None = None) -> "Mat":
        if not isinstance(obj, dict):
            raise SchemaError(pointer, "expected a matrix object")
        for key in ("rows", "cols", "entries"):
            if key not in obj:
                raise SchemaError(pointer, f"missing field {key!r}")
        rows, cols = obj["rows"], obj["cols"]
        if not isinstance(rows, int) or rows < 1:
            raise SchemaError(f"{pointer}/rows", "expected a positive integer")
        if not isinstance(cols, int) or cols < 1:
            raise SchemaError(f"{pointer}/cols", "expected a positive integer")
        entries = obj["entries"]
        if not isinstance(entries, list) or len(entries) != rows:
            raise SchemaError(f"{pointer}/entries", f"expected {rows} rows")
        parsed = []
        for i, row in enumerate(entries):
            if not isinstance(row, list) or len(row) != cols:
                raise SchemaError(f"{pointer}/entries/{i}",
                                  f"expected {cols} entries")
            out = []
            for j, cell in enumerate(row):
                if not isinstance(cell, str):
                    raise SchemaError(f"{pointer}/entries/{i}/{j}",
                                      "expected a rational-function string")
                try:
                    out.append(parse_ratfunc(cell, max_degree=max_degree))
                except ValueError as exc:
                    raise SchemaError(f"{pointer}/entries/{i}/{j}", str(exc))
            parsed.append(out)
        return cls(parsed)


def clear_denominators(a: Mat) -> int:
    """Minimal shift making every entry of t**shift * a regular at 0.

    Zero entries are ignored (their valuation is infinite); a matrix that
    is already regular needs no shift.
    """
    vals = [x.val() for row in a.entries for x in row if not x.is_zero()]
    if not vals:
        return 0
    return max(0, -min(vals))


def valuation_of_det(a: Mat):
    """Valuation of det(a); INFINITE when the determinant vanishes."""
    return a.det().val()


@dataclass(frozen=True)
class SnfResult:
    """Diagonalization data: left @ (t**shift * a) @ right is diagonal.

    Both transforms are invertible over the local ring (regular entries,
    determinant of valuation 0) and the i-th diagonal entry of the
    product has valuation ``diag_valuations[i]``; the valuations are
    non-decreasing.
    """

    left: Mat
    diag_valuations: tuple
    right: Mat
    shift: int

    def to_json_dict(self) -> dict:
        return {
            "left": self.left.to_json_dict(),
            "diag_valuations": list(self.diag_valuations),
            "right": self.right.to_json_dict(),
            "shift": self.shift,
        }


def smith_normal_form(a: Mat) -> SnfResult:
    """Diagonalize over the local ring, after clearing denominators.

    Pivots on an entry of minimal valuation in the remaining submatrix
    (ties by smallest (row, column)); clearing a row/column only ever
    adds regular multiples, so the accumulated transforms are invertible
    over the local ring by construction. Because the pivot has minimal
    valuation the cleared submatrix never drops below it, which makes
    the diagonal valuations come out sorted.
    """
    if a.rows != a.cols:
        raise NonSquareMatrixError("smith normal form needs a square matrix")
    n = a.rows
    ell = clear_denominators(a)
    shift = t_power(ell)
    b = [[shift * a[i, j] for j in range(n)] for i in range(n)]
    left = [[RatFunc(1 if i == j else 0) for j in range(n)] for i in range(n)]
    right = [[RatFunc(1 if i == j else 0) for j in range(n)] for i in range(n)]
    diag = []
    for i in range(n):
        best = None
        for r in range(i, n):
            for c in range(i, n):
                v = b[r][c].val()
                if v is INFINITE or v == INFINITE:
                    continue
                if best is None or v < best[0]:
                    best = (v, r, c)
        if best is None:
            raise SingularMatrixError("matrix is singular over the fraction field")
        v, r, c = best
        if r != i:
            b[i], b[r] = b[r], b[i]
            left[i], left[r] = left[r], left[i]
        if c != i:
            for row in b:
                row[i], row[c] = row[c], row[i]
            for row in right:
                row[i], row[c] = row[c], row[i]
        pinv = b[i][i].inv()
        for r2 in range(i + 1, n):
            if b[r2][i].is_zero():
                continue
            f = b[r2][i] * pinv  # regular: the pivot has minimal valuation
            for c2 in range(n):
                b[r2][c2] = b[r2][c2] - f * b[i][c2]
                left[r2][c2] = left[r2][c2] - f * left[i][c2]
        for c2 in range(i + 1, n):
            if b[i][c2].is_zero():
                continue
            f = b[i][c2] * pinv
            for r2 in range(n):
                b[r2][c2] = b[r2][c2] - f * b[r2][i]
                right[r2][c2] = right[r2][c2] - f * right[r2][i]
        diag.append(v)
    if any(diag[i] > diag[i + 1] for i in range(n - 1)):
        raise AssertionError("diagonal valuations came out unsorted")
    return SnfResult(Mat(left), tuple(diag), Mat(right), ell)
