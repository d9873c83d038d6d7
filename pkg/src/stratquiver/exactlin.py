"""Exact linear algebra over the rationals and prime fields GF(p).

Everything downstream (hom spaces, resolutions, filtration certificates)
reduces to the routines in this module, so two constraints are absolute:
arithmetic is exact (no floats anywhere) and pivoting is deterministic
(leftmost pivot column, first nonzero row), making every derived basis
reproducible across runs.
"""

from __future__ import annotations

from fractions import Fraction

try:
    from gmpy2 import mpq as _QELEM
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _QELEM = Fraction


class ExactLinError(ValueError):
    pass


def _is_probable_prime(n: int) -> bool:
    # deterministic Miller-Rabin for n < 3.3 * 10^24
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class Field:
    """The rationals, or a prime field GF(p) with p a machine-word prime.

    Rational elements are gmpy2 ``mpq`` values; GF(p) elements are python
    ints in ``[0, p)``.  All arithmetic goes through the field object so
    callers never need to branch on the kind.
    """

    __slots__ = ("kind", "p")

    def __init__(self, kind: str, p: int | None = None):
        if kind not in ("Q", "GF"):
            raise ExactLinError(f"unknown field kind {kind!r}")
        if kind == "GF":
            if p is None or p < 2 or p >= 2**63 or not _is_probable_prime(p):
                raise ExactLinError(f"GF(p) needs a machine-word prime, got {p!r}")
        self.kind = kind
        self.p = p

    @staticmethod
    def rationals() -> "Field":
        return Field("Q")

    @staticmethod
    def prime(p: int) -> "Field":
        return Field("GF", p)

    def __eq__(self, other):
        return isinstance(other, Field) and self.kind == other.kind and self.p == other.p

    def __hash__(self):
        return hash((self.kind, self.p))

    def __repr__(self):
        return "Q" if self.kind == "Q" else f"GF({self.p})"

    # -- element factories ------------------------------------------------

    @property
    def zero(self):
        return _QELEM(0) if self.kind == "Q" else 0

    @property
    def one(self):
        return _QELEM(1) if self.kind == "Q" else 1 % self.p

    def of(self, value):
        """Coerce an int, Fraction, mpq, or exact decimal string like '-3/7'."""
        if self.kind == "Q":
            if isinstance(value, str):
                return _QELEM(Fraction(value.strip()))
            return _QELEM(value)
        if isinstance(value, str):
            value = Fraction(value.strip())
        if isinstance(value, Fraction):
            if value.denominator % self.p == 0:
                raise ExactLinError(f"{value} has no image in GF({self.p})")
            return value.numerator * pow(value.denominator, -1, self.p) % self.p
        return int(value) % self.p

    def to_str(self, x) -> str:
        return str(x)

    # -- scalar arithmetic -------------------------------------------------

    def add(self, a, b):
        return a + b if self.kind == "Q" else (a + b) % self.p

    def sub(self, a, b):
        return a - b if self.kind == "Q" else (a - b) % self.p

    def mul(self, a, b):
        return a * b if self.kind == "Q" else (a * b) % self.p

    def neg(self, a):
        return -a if self.kind == "Q" else (-a) % self.p

    def inv(self, a):
        if self.kind == "Q":
            if a == 0:
                raise ZeroDivisionError("inverse of 0")
            return 1 / _QELEM(a)
        return pow(a, -1, self.p)

    def is_zero(self, a) -> bool:
        return a == 0

    # -- fused row operations (the hot loops) -------------------------------

    def axpy(self, dst: list, src: list, c) -> None:
        """dst -= c * src, in place."""
        if self.kind == "Q":
            for k, s in enumerate(src):
                if s:
                    dst[k] -= c * s
        else:
            p = self.p
            for k, s in enumerate(src):
                if s:
                    dst[k] = (dst[k] - c * s) % p

    def scale(self, row: list, c) -> None:
        if self.kind == "Q":
            for k, v in enumerate(row):
                if v:
                    row[k] = c * v
        else:
            p = self.p
            for k, v in enumerate(row):
                if v:
                    row[k] = c * v % p

    def dot(self, u: list, v: list):
        if self.kind == "Q":
            return sum((a * b for a, b in zip(u, v) if a and b), _QELEM(0))
        return sum(a * b for a, b in zip(u, v)) % self.p

    def zeros(self, n: int) -> list:
        z = self.zero
        return [z] * n


class Matrix:
    """Dense matrix with exact field entries, row-major."""

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: Field, data: list[list], cols: int | None = None):
        self.field = field
        self.data = data
        self.rows = len(data)
        self.cols = len(data[0]) if data else (cols or 0)
        for row in data:
            if len(row) != self.cols:
                raise ExactLinError("ragged matrix rows")

    @staticmethod
    def zeros(field: Field, rows: int, cols: int) -> "Matrix":
        return Matrix(field, [field.zeros(cols) for _ in range(rows)], cols=cols)

    @staticmethod
    def identity(field: Field, n: int) -> "Matrix":
        m = Matrix.zeros(field, n, n)
        one = field.one
        for i in range(n):
            m.data[i][i] = one
        return m

    @staticmethod
    def from_rows(field: Field, rows: list[list]) -> "Matrix":
        return Matrix(field, [[field.of(x) for x in row] for row in rows])

    def copy(self) -> "Matrix":
        return Matrix(self.field, [row[:] for row in self.data])

    def transpose(self) -> "Matrix":
        return Matrix(self.field, [[self.data[i][j] for i in range(self.rows)]
                                   for j in range(self.cols)])

    def mul(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ExactLinError("matrix shapes do not compose")
        F = self.field
        out = Matrix.zeros(F, self.rows, other.cols)
        for i, row in enumerate(self.data):
            orow = out.data[i]
            for k, a in enumerate(row):
                if not F.is_zero(a):
                    F.axpy(orow, other.data[k], F.neg(a))
        return out

    def apply(self, vec: list) -> list:
        """Matrix times column vector."""
        if self.cols != len(vec):
            raise ExactLinError("matrix/vector shape mismatch")
        F = self.field
        return [F.dot(row, vec) for row in self.data]

    def is_zero(self) -> bool:
        F = self.field
        return all(F.is_zero(x) for row in self.data for x in row)

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.field == other.field
                and self.data == other.data)

    def __repr__(self):
        return f"Matrix({self.field}, {self.rows}x{self.cols})"


def rref(m: Matrix) -> tuple[Matrix, list[int], int]:
    """Reduced row echelon form, pivot columns, and rank.

    Leftmost-pivot, first-nonzero-row strategy; pivots normalized to 1 and
    cleared above and below, so the result is canonical for the row space.
    """
    F = m.field
    a = [row[:] for row in m.data]
    pivots: list[int] = []
    r = 0
    for c in range(m.cols):
        pr = None
        for i in range(r, m.rows):
            if not F.is_zero(a[i][c]):
                pr = i
                break
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        piv = a[r][c]
        if piv != F.one:
            F.scale(a[r], F.inv(piv))
        for i in range(m.rows):
            if i != r and not F.is_zero(a[i][c]):
                F.axpy(a[i], a[r], a[i][c])
        pivots.append(c)
        r += 1
        if r == m.rows:
            break
    return Matrix(F, a), pivots, r


def rank(m: Matrix) -> int:
    return rref(m)[2]


def kernel_basis(m: Matrix) -> list[list]:
    """Basis of the right null space, one vector per free column in order."""
    F = m.field
    red, pivots, _ = rref(m)
    pivot_set = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        v = F.zeros(m.cols)
        v[free] = F.one
        for r, pc in enumerate(pivots):
            v[pc] = F.neg(red.data[r][free])
        basis.append(v)
    return basis


def solve(m: Matrix, rhs: list) -> list | None:
    """One particular solution of m*x = rhs, or None if inconsistent.

    The solution has zeros in all free coordinates (pivot-solution
    convention), which keeps it deterministic.
    """
    if len(rhs) != m.rows:
        raise ExactLinError(f"rhs length {len(rhs)} != rows {m.rows}")
    F = m.field
    aug = Matrix(F, [m.data[i][:] + [rhs[i]] for i in range(m.rows)])
    red, pivots, _ = rref(aug)
    if m.cols in pivots:
        return None
    x = F.zeros(m.cols)
    for r, pc in enumerate(pivots):
        x[pc] = red.data[r][m.cols]
    return x


class Echelon:
    """Incrementally maintained reduced row span with unit pivots.

    The workhorse behind ideal closures, submodule spans, and hom-space
    bases.  Insertion order does not change the final row space, and the
    fully reduced form makes membership tests and normal forms one pass.
    """

    __slots__ = ("field", "width", "rows", "pivot_cols", "_col_to_row")

    def __init__(self, field: Field, width: int):
        self.field = field
        self.width = width
        self.rows: list[list] = []
        self.pivot_cols: list[int] = []
        self._col_to_row: dict[int, int] = {}

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, vec: list) -> list:
        """Return vec reduced modulo the current span (a fresh list)."""
        F = self.field
        v = vec[:]
        for c, r in self._iter_hits(v):
            F.axpy(v, self.rows[r], v[c])
        return v

    def _iter_hits(self, v):
        # pivots are scanned in column order; reduction can only clear,
        # never reintroduce, earlier pivot coordinates
        F = self.field
        for c in self.pivot_cols:
            if not F.is_zero(v[c]):
                yield c, self._col_to_row[c]

    def insert(self, vec: list) -> int | None:
        """Insert a vector; return its pivot column, or None if dependent."""
        F = self.field
        v = self.reduce(vec)
        pc = None
        for c in range(self.width):
            if not F.is_zero(v[c]):
                pc = c
                break
        if pc is None:
            return None
        if v[pc] != F.one:
            F.scale(v, F.inv(v[pc]))
        # clear the new pivot column from existing rows
        for row in self.rows:
            if not F.is_zero(row[pc]):
                F.axpy(row, v, row[pc])
        self.rows.append(v)
        self.pivot_cols.append(pc)
        self.pivot_cols.sort()
        self._col_to_row = {}
        order = sorted(range(len(self.rows)), key=self._row_pivot)
        self.rows = [self.rows[i] for i in order]
        for idx, row in enumerate(self.rows):
            self._col_to_row[self._pivot_of(row)] = idx
        return pc

    def _pivot_of(self, row) -> int:
        F = self.field
        for c in range(self.width):
            if not F.is_zero(row[c]):
                return c
        raise ExactLinError("zero row in echelon")

    def _row_pivot(self, i: int) -> int:
        return self._pivot_of(self.rows[i])

    def contains(self, vec: list) -> bool:
        F = self.field
        return all(F.is_zero(x) for x in self.reduce(vec))

    def coordinates(self, vec: list) -> list | None:
        """Coordinates of vec in the row basis, or None if outside the span."""
        F = self.field
        v = vec[:]
        coords = F.zeros(len(self.rows))
        for c in self.pivot_cols:
            if not F.is_zero(v[c]):
                r = self._col_to_row[c]
                coords[r] = v[c]
                F.axpy(v, self.rows[r], v[c])
        if any(not F.is_zero(x) for x in v):
            return None
        return coords
