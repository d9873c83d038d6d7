"""Minimal projective resolutions, Ext groups, and the Ext quiver.

Resolutions are stored in copy-major projective-sum coordinates: each term
is a ProjSum and each differential is recorded by the lift vectors of the
syzygy generators, which makes Hom(P_i, N) a direct sum of graded pieces of
N and Ext a matter of two ranks.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EngineError, UndecidedError
from .exactlin import Echelon, Matrix, kernel_basis, rref
from .presentation import Algebra
from .repcat import (Module, ProjSum, SubmoduleWitness, _witness_tops_in_psum,
                     cover_matrix, projective_cover_data, standard_objects,
                     submodule, unit_vector, dualize, opposite_of)

DEFAULT_CAP = 64


@dataclass
class ProjDim:
    """Finite(n) or AtLeast(cap); never silently conflated."""

    finite: bool
    value: int

    def __repr__(self):
        return f"Finite({self.value})" if self.finite else f"AtLeast({self.value})"


class Resolution:
    """A minimal projective resolution ... -> P_1 -> P_0 -> M -> 0.

    terms[i] is a ProjSum; diffs[i] (i >= 1) lists, per copy of terms[i],
    the lift vector of its generator inside terms[i-1]; cover_targets lists,
    per copy of terms[0], the generator image inside M.
    """

    def __init__(self, target: Module):
        self.target = target
        self.terms: list[ProjSum] = []
        self.diffs: list[list[tuple[int, list]]] = []
        self.cover_targets: list[list] = []
        self.complete = False       # zero syzygy reached
        self.truncated_at: int | None = None
        self.pending_kernel: list[list] = []

    @property
    def length(self) -> int:
        return len(self.terms) - 1

    def term_dims(self) -> list[list[int]]:
        out = []
        for psum in self.terms:
            counts = [0] * self.target.algebra.nvert
            for lam in psum.copies:
                counts[lam] += 1
            out.append(counts)
        return out


def _extend_resolution(res: Resolution, kernel_vectors: list[list]) -> list[list]:
    """Add one term covering the current kernel; return the next kernel."""
    prev = res.terms[-1]
    a = prev.algebra
    F = a.field
    tops = _witness_tops_in_psum(prev, kernel_vectors)
    psum = ProjSum(a, [lam for lam, _ in tops])
    res.terms.append(psum)
    res.diffs.append(tops)
    if not tops:
        return []
    cols = []
    for (lam, v), lst in zip(tops, psum.index_lists):
        for i in lst:
            mat = prev.act_matrix({i: F.one})
            cols.append(mat.apply(v))
    cov = Matrix(F, [[cols[c][r] for c in range(len(cols))]
                     for r in range(prev.total)])
    return kernel_basis(cov)


def min_proj_resolution(M: Module, cap: int = DEFAULT_CAP) -> Resolution:
    """Minimal resolution, stopping at the zero syzygy or at cap terms.

    Truncated resolutions are cached with their pending kernel and resumed
    incrementally when a later call asks for a higher cap.
    """
    res = M.cache.get("resolution")
    if res is not None and (res.complete or (res.truncated_at or 0) >= cap):
        return res
    if res is None:
        res = Resolution(M)
        M.cache["resolution"] = res
        if M.total == 0:
            res.complete = True
            res.terms.append(ProjSum(M.algebra, []))
            return res
        psum0, targets, cov = projective_cover_data(M)
        res.terms.append(psum0)
        res.cover_targets = targets
        kernel = kernel_basis(cov)
        ech = Echelon(M.algebra.field, psum0.total)
        kernel = [v for v in kernel if ech.insert(v) is not None]
        res.pending_kernel = [row[:] for row in ech.rows]
    degree = len(res.terms) - 1
    while res.pending_kernel:
        if degree >= cap:
            res.truncated_at = degree
            return res
        res.pending_kernel = _extend_resolution(res, res.pending_kernel)
        degree += 1
    if not res.diffs or res.diffs[-1]:
        # append the zero term so exactness at the last stage is explicit
        res.terms.append(ProjSum(M.algebra, []))
        res.diffs.append([])
    res.complete = True
    res.truncated_at = None
    return res


def proj_dim(M: Module, cap: int = DEFAULT_CAP) -> ProjDim:
    res = min_proj_resolution(M, cap)
    if not res.complete:
        return ProjDim(False, cap)
    length = len(res.terms) - 1
    while length > 0 and not res.terms[length].copies:
        length -= 1
    return ProjDim(True, length)


def inj_dim(M: Module, cap: int = DEFAULT_CAP) -> ProjDim:
    """Injective dimension as projective dimension over the opposite."""
    return proj_dim(dualize(M), cap)


def _hom_complex_dims(res: Resolution, N: Module, upto: int) -> list[int]:
    return [sum(N.dims[lam] for lam in res.terms[i].copies)
            for i in range(min(upto + 1, len(res.terms)))]


def _hom_complex_diff(res: Resolution, N: Module, i: int) -> Matrix:
    """Matrix of Hom(P_{i-1}, N) -> Hom(P_i, N), precomposition with d_i."""
    a = res.target.algebra
    F = a.field
    prev = res.terms[i - 1]
    cur = res.terms[i]
    rows_dim = sum(N.dims[lam] for lam in cur.copies)
    cols_dim = sum(N.dims[lam] for lam in prev.copies)
    out = Matrix.zeros(F, rows_dim, cols_dim)
    # unknown phi: per copy c' of prev, a vector in N's lam-graded piece
    col_slots = []
    off = 0
    for lam in prev.copies:
        idxs = N.indices_of_grade(lam)
        col_slots.append((idxs, off))
        off += len(idxs)
    row_off = 0
    for c, lam_c in enumerate(cur.copies):
        lift = res.diffs[i - 1][c][1]
        elements = prev.split_elements(lift)
        row_idxs = N.indices_of_grade(lam_c)
        for (idxs, off_c), elem in zip(col_slots, elements):
            if not elem:
                continue
            mat = N.act_vec(elem)
            for j, k in enumerate(idxs):
                col_vec = mat.apply(unit_vector(F, N.total, k))
                for r, kr in enumerate(row_idxs):
                    out.data[row_off + r][off_c + j] = col_vec[kr]
        row_off += len(row_idxs)
    return out


def ext_dim(M: Module, N: Module, i: int, cap: int = DEFAULT_CAP) -> int:
    """dim Ext^i(M, N), from the resolution of M taken out to degree i+1."""
    if i < 0:
        raise EngineError("negative Ext degree")
    if cap < i + 1:
        raise UndecidedError(
            f"resolution cap {cap} cannot certify Ext degree {i}: insufficient cap")
    res = min_proj_resolution(M, i + 1)
    if not res.complete and len(res.terms) <= i + 1:
        raise UndecidedError(
            f"resolution truncated before degree {i + 1}: insufficient cap")
    if i >= len(res.terms) or not res.terms[i].copies:
        return 0
    dims = _hom_complex_dims(res, N, i + 1)
    rank_in = 0
    if i >= 1:
        rank_in = rref(_hom_complex_diff(res, N, i))[2]
    rank_out = 0
    if i + 1 < len(res.terms) and res.terms[i + 1].copies:
        rank_out = rref(_hom_complex_diff(res, N, i + 1))[2]
    return dims[i] - rank_in - rank_out


def ext_vanishes_above(M: Module, N: Module, start: int, cap: int = DEFAULT_CAP) -> bool:
    """True iff Ext^i(M,N) = 0 for all i >= start (needs a finite resolution)."""
    res = min_proj_resolution(M, cap)
    if not res.complete:
        raise UndecidedError("cannot certify Ext vanishing: resolution truncated")
    top = len(res.terms) - 1
    return all(ext_dim(M, N, i, cap) == 0 for i in range(start, top + 1))


def ext_quiver(a: Algebra, cap: int = DEFAULT_CAP) -> list[list[int]]:
    """Matrix (lambda, mu) -> dim Ext^1(L(lambda), L(mu))."""
    objs = standard_objects(a)
    L = objs["L"]
    n = a.nvert
    return [[ext_dim(L[lam], L[mu], 1, cap) for mu in range(n)]
            for lam in range(n)]


# -- cocycle realization for universal extensions ----------------------------


def syzygy_data(M: Module) -> tuple[Module, Module, "ModuleMapLike", list[list]]:
    """First syzygy as a module: (P0 as Module, Omega, inclusion, cover targets).

    Returns the cover term as an actual Module in copy-major coordinates so
    extensions can be built by quotients of direct sums.
    """
    cached = M.cache.get("syzygy_data")
    if cached is not None:
        return cached
    a = M.algebra
    F = a.field
    psum0, targets, cov = projective_cover_data(M)
    P0 = psum0.as_module()
    kernel = kernel_basis(cov)
    w = SubmoduleWitness(P0, kernel)
    omega, incl = submodule(P0, w, label=f"Omega({M.label})")
    out = (P0, omega, incl, targets)
    M.cache["syzygy_data"] = out
    return out


def ext1_cocycles(M: Module, X: Module) -> list:
    """A basis of Ext^1(M, X) as maps from the first syzygy of M into X.

    Each class is represented by a ModuleMap Omega -> X; the list is empty
    iff Ext^1(M, X) = 0.
    """
    from .repcat import ModuleMap, hom_space

    a = M.algebra
    F = a.field
    P0, omega, incl, _ = syzygy_data(M)
    if omega.total == 0:
        return []
    homs = hom_space(omega, X)
    if not homs:
        return []
    restr = [f.compose(incl) for f in hom_space(P0, X)]
    width = X.total * omega.total
    ech = Echelon(F, width)
    for f in restr:
        ech.insert([f.matrix.data[r][c] for r in range(X.total)
                    for c in range(omega.total)])
    out = []
    for f in homs:
        flat = [f.matrix.data[r][c] for r in range(X.total)
                for c in range(omega.total)]
        if ech.insert(flat) is not None:
            out.append(f)
    return out
