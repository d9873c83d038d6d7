"""The module category: simples, projectives, injectives, homs, and duality.

Modules are finite-dimensional left modules, stored with an explicit action
matrix for every algebra basis element, plus a grade (idempotent index) per
basis vector.  An arrow-like generator in e_mu * A * e_lambda maps the
lambda-graded part into the mu-graded part.

Hom spaces are computed through a cached projective presentation of the
source: Hom(P(lambda), N) is just the lambda-graded piece of N, so a general
Hom(M, N) is the kernel of one small dense map.
"""

from __future__ import annotations

import random

from .errors import EngineError, InputError, NonSplitError, UndecidedError
from .exactlin import Echelon, Field, Matrix, kernel_basis, rref, solve
from .presentation import Algebra


class Module:
    """A left module: a grade per basis vector, one action matrix per algebra
    basis element."""

    def __init__(self, algebra: Algebra, grades: list[int], act: list[Matrix],
                 label: str = ""):
        self.algebra = algebra
        self.grades = list(grades)
        self.total = len(grades)
        self.dims = [0] * algebra.nvert
        for g in grades:
            self.dims[g] += 1
        self.act = act
        self.label = label
        self.cache: dict = {}
        # when this module is a direct sum of P(lambda) in their regular
        # coordinates: list of (lambda, [algebra basis indices]), copy-major
        self.proj_info = None

    def grade_of(self, index: int) -> int:
        return self.grades[index]

    def indices_of_grade(self, lam: int) -> list[int]:
        key = ("grade_idx", lam)
        out = self.cache.get(key)
        if out is None:
            out = [k for k, g in enumerate(self.grades) if g == lam]
            self.cache[key] = out
        return out

    def act_vec(self, coeffs: dict) -> Matrix:
        """Action matrix of an arbitrary algebra element (sparse coords)."""
        F = self.algebra.field
        out = Matrix.zeros(F, self.total, self.total)
        for i, c in coeffs.items():
            mat = self.act[i]
            for r in range(self.total):
                F.axpy(out.data[r], mat.data[r], F.neg(c))
        return out

    def apply_algebra_vec(self, coeffs: dict, vec: list) -> list:
        F = self.algebra.field
        out = F.zeros(self.total)
        for i, c in coeffs.items():
            F.axpy(out, self.act[i].apply(vec), F.neg(c))
        return out

    def dim_vector(self) -> tuple[int, ...]:
        return tuple(self.dims)

    def is_zero(self) -> bool:
        return self.total == 0

    def verify(self) -> None:
        """Idempotent projections and structure constants on the action."""
        a = self.algebra
        F = a.field
        for lam, e in enumerate(a.idempotents):
            mat = self.act_vec(e)
            for r in range(self.total):
                for c in range(self.total):
                    want = F.one if (r == c and self.grades[r] == lam) else F.zero
                    if mat.data[r][c] != want:
                        raise EngineError("idempotent does not act as the grade projector")
        for i in range(a.dim):
            for j in range(a.dim):
                left = self.act[i].mul(self.act[j])
                right = self.act_vec(a.mult[i][j])
                if left.data != right.data:
                    raise EngineError("action does not respect structure constants")

    def __repr__(self):
        name = self.label or "Module"
        return f"{name}(dims={self.dims})"


class ModuleMap:
    """A homomorphism, stored as one total matrix."""

    def __init__(self, source: Module, target: Module, matrix: Matrix):
        if matrix.rows != target.total or matrix.cols != source.total:
            raise InputError("module map has wrong shape")
        self.source = source
        self.target = target
        self.matrix = matrix

    def apply(self, vec: list) -> list:
        return self.matrix.apply(vec)

    def compose(self, earlier: "ModuleMap") -> "ModuleMap":
        """self after earlier (earlier runs first)."""
        return ModuleMap(earlier.source, self.target, self.matrix.mul(earlier.matrix))

    def rank(self) -> int:
        return rref(self.matrix)[2]

    def is_injective(self) -> bool:
        return self.rank() == self.source.total

    def is_surjective(self) -> bool:
        return self.rank() == self.target.total

    def is_isomorphism(self) -> bool:
        return self.source.total == self.target.total and self.rank() == self.source.total

    def verify(self) -> None:
        """Check the map commutes with every generator's action."""
        for vec, _, _ in _action_generators(self.source.algebra):
            left = self.matrix.mul(self.source.act_vec(vec))
            right = self.target.act_vec(vec).mul(self.matrix)
            if left.data != right.data:
                raise EngineError("map does not commute with the algebra action")


class SubmoduleWitness:
    """A subspace given by spanning vectors, echelonized grade-homogeneously."""

    def __init__(self, parent: Module, vectors: list[list]):
        F = parent.algebra.field
        self.parent = parent
        ech = Echelon(F, parent.total)
        for v in vectors:
            by_grade: dict[int, list] = {}
            for k, x in enumerate(v):
                if not F.is_zero(x):
                    by_grade.setdefault(parent.grades[k], None)
            if len(by_grade) <= 1:
                if by_grade:
                    ech.insert(v)
                continue
            for lam in by_grade:
                comp = F.zeros(parent.total)
                for k in parent.indices_of_grade(lam):
                    comp[k] = v[k]
                ech.insert(comp)
        self.echelon = ech
        self.vectors = [row[:] for row in ech.rows]

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def dims_by_grade(self) -> list[int]:
        F = self.parent.algebra.field
        counts = [0] * len(self.parent.dims)
        for v in self.vectors:
            counts[self.parent.grades[_lead_index(F, v)]] += 1
        return counts

    def contains(self, vec: list) -> bool:
        return self.echelon.contains(vec)

    def is_action_stable(self) -> bool:
        for vec, _, _ in _action_generators(self.parent.algebra):
            mat = self.parent.act_vec(vec)
            for v in self.vectors:
                if not self.echelon.contains(mat.apply(v)):
                    return False
        return True


def _action_generators(a: Algebra):
    """Idempotents plus homogeneous radical generators: enough to pin maps."""
    gens = a.cache.get("action_gens")
    if gens is None:
        gens = [(dict(e), lam, lam) for lam, e in enumerate(a.idempotents)]
        gens += [(dict(v), s, t) for (v, s, t) in a.gens]
        a.cache["action_gens"] = gens
    return gens


def _lead_index(F: Field, v: list) -> int:
    for k, x in enumerate(v):
        if not F.is_zero(x):
            return k
    raise EngineError("zero vector in span basis")


def unit_vector(F: Field, n: int, k: int) -> list:
    v = F.zeros(n)
    v[k] = F.one
    return v


# ---------------------------------------------------------------------------
# basic constructions
# ---------------------------------------------------------------------------


def regular_module(a: Algebra) -> Module:
    """The algebra as a left module over itself, in its own basis order."""
    cached = a.cache.get("regular_module")
    if cached is not None:
        return cached
    F = a.field
    act = []
    for i in range(a.dim):
        m = Matrix.zeros(F, a.dim, a.dim)
        for j in range(a.dim):
            for k, c in a.mult[i][j].items():
                m.data[k][j] = c
        act.append(m)
    mod = Module(a, list(a.basis_tgt), act, label="A")
    mod.proj_info = None  # regular module is P-sum but with interleaved copies
    a.cache["regular_module"] = mod
    return mod


def projective_module(a: Algebra, lam: int) -> Module:
    """P(lambda) = A e_lambda: the span of source-lambda basis elements."""
    key = ("projective", lam)
    cached = a.cache.get(key)
    if cached is not None:
        return cached
    F = a.field
    indices = sorted((i for i in range(a.dim) if a.basis_src[i] == lam),
                     key=lambda i: (a.basis_tgt[i], i))
    pos = {b: k for k, b in enumerate(indices)}
    act = []
    for i in range(a.dim):
        m = Matrix.zeros(F, len(indices), len(indices))
        for j in indices:
            col = pos[j]
            for k, c in a.mult[i][j].items():
                if k in pos:
                    m.data[pos[k]][col] = c
                elif not F.is_zero(c):
                    raise EngineError("P(lambda) is not closed under the action")
        act.append(m)
    mod = Module(a, [a.basis_tgt[i] for i in indices], act,
                 label=f"P({a.vertex_labels[lam]})")
    mod.proj_info = [(lam, indices)]
    a.cache[key] = mod
    return mod


def zero_module(a: Algebra) -> Module:
    return Module(a, [], [Matrix.zeros(a.field, 0, 0)] * a.dim, label="0")


def direct_sum(mods: list[Module], label: str = "") -> tuple[Module, list[ModuleMap], list[ModuleMap]]:
    """Block-diagonal direct sum with inclusions and projections."""
    if not mods:
        raise InputError("direct_sum of an empty list; use zero_module")
    a = mods[0].algebra
    F = a.field
    grades = [g for m in mods for g in m.grades]
    total = len(grades)
    starts = []
    cursor = 0
    for m in mods:
        starts.append(cursor)
        cursor += m.total
    act = []
    for i in range(a.dim):
        big = Matrix.zeros(F, total, total)
        for m, s in zip(mods, starts):
            mat = m.act[i]
            for r in range(m.total):
                row = big.data[s + r]
                mrow = mat.data[r]
                for c in range(m.total):
                    if not F.is_zero(mrow[c]):
                        row[s + c] = mrow[c]
        act.append(big)
    out = Module(a, grades, act,
                 label=label or "(+)".join(m.label or "?" for m in mods))
    incls, projs = [], []
    for m, s in zip(mods, starts):
        inc = Matrix.zeros(F, total, m.total)
        prj = Matrix.zeros(F, m.total, total)
        for k in range(m.total):
            inc.data[s + k][k] = F.one
            prj.data[k][s + k] = F.one
        incls.append(ModuleMap(m, out, inc))
        projs.append(ModuleMap(out, m, prj))
    if all(m.proj_info is not None for m in mods):
        out.proj_info = [entry for m in mods for entry in m.proj_info]
    return out, incls, projs


def submodule(M: Module, witness: SubmoduleWitness, label: str = "") -> tuple[Module, ModuleMap]:
    """The submodule spanned by an action-stable witness, with its inclusion."""
    a = M.algebra
    F = a.field
    basis = witness.vectors
    grades = [M.grades[_lead_index(F, v)] for v in basis]
    ech = witness.echelon
    act = []
    for i in range(a.dim):
        mat = Matrix.zeros(F, len(basis), len(basis))
        big = M.act[i]
        for c, v in enumerate(basis):
            coords = ech.coordinates(big.apply(v))
            if coords is None:
                raise InputError("span is not action-stable")
            for r, x in enumerate(coords):
                mat.data[r][c] = x
        act.append(mat)
    sub = Module(a, grades, act, label=label)
    inc = Matrix(F, [[basis[c][r] for c in range(len(basis))] for r in range(M.total)])
    return sub, ModuleMap(sub, M, inc)


def quotient_module(M: Module, witness: SubmoduleWitness, label: str = "") -> tuple[Module, ModuleMap]:
    """The quotient by an action-stable witness, with its projection."""
    a = M.algebra
    F = a.field
    ech = witness.echelon
    pivot_cols = set(ech.pivot_cols)
    kept = [k for k in range(M.total) if k not in pivot_cols]
    kept_pos = {k: r for r, k in enumerate(kept)}
    grades = [M.grades[k] for k in kept]
    act = []
    for i in range(a.dim):
        big = M.act[i]
        mat = Matrix.zeros(F, len(kept), len(kept))
        for c, k in enumerate(kept):
            img = ech.reduce([big.data[r][k] for r in range(M.total)])
            for r, k2 in enumerate(kept):
                mat.data[r][c] = img[k2]
        act.append(mat)
    quo = Module(a, grades, act, label=label)
    proj = Matrix.zeros(F, len(kept), M.total)
    for col in range(M.total):
        img = ech.reduce(unit_vector(F, M.total, col))
        for r, k2 in enumerate(kept):
            proj.data[r][col] = img[k2]
    return quo, ModuleMap(M, quo, proj)


def kernel_witness(f: ModuleMap) -> SubmoduleWitness:
    return SubmoduleWitness(f.source, kernel_basis(f.matrix))


def image_witness(f: ModuleMap) -> SubmoduleWitness:
    cols = [[f.matrix.data[r][c] for r in range(f.matrix.rows)]
            for c in range(f.matrix.cols)]
    return SubmoduleWitness(f.target, cols)


# ---------------------------------------------------------------------------
# radical, socle, tops, composition data
# ---------------------------------------------------------------------------


def radical_span(M: Module) -> SubmoduleWitness:
    """rad(A) * M as a witness."""
    a = M.algebra
    vecs = []
    for rv in a.radical:
        mat = M.act_vec(rv)
        for c in range(M.total):
            vecs.append([mat.data[r][c] for r in range(M.total)])
    return SubmoduleWitness(M, vecs)


def radical_series(M: Module) -> list[SubmoduleWitness]:
    """Witnesses for rad^1 M > rad^2 M > ... (zero term omitted)."""
    cached = M.cache.get("radical_series")
    if cached is not None:
        return cached
    a = M.algebra
    chain = []
    current = [unit_vector(a.field, M.total, k) for k in range(M.total)]
    while True:
        vecs = []
        for rv in a.radical:
            mat = M.act_vec(rv)
            for v in current:
                vecs.append(mat.apply(v))
        w = SubmoduleWitness(M, vecs)
        if w.dim == 0:
            break
        chain.append(w)
        current = w.vectors
    M.cache["radical_series"] = chain
    return chain


def layer_profile(M: Module) -> list[list[str]]:
    """Radical layers top to bottom; each layer lists simple labels sorted."""
    a = M.algebra
    chain = radical_series(M)
    layers = []
    prev = list(M.dims)
    for w in chain:
        cur = w.dims_by_grade()
        layers.append(_layer_labels(a, [prev[i] - cur[i] for i in range(a.nvert)]))
        prev = cur
    if M.total > 0:
        layers.append(_layer_labels(a, prev))
    return layers


def _layer_labels(a: Algebra, counts: list[int]) -> list[str]:
    out = []
    for lam in sorted(range(a.nvert), key=lambda k: a.vertex_labels[k]):
        out.extend([a.vertex_labels[lam]] * counts[lam])
    return out


def socle_witness(M: Module) -> SubmoduleWitness:
    """Largest semisimple submodule: joint kernel of the radical action."""
    a = M.algebra
    F = a.field
    rows = []
    for rv in a.radical:
        rows.extend(M.act_vec(rv).data)
    if not rows:
        rows = [F.zeros(M.total)]
    return SubmoduleWitness(M, kernel_basis(Matrix(F, rows)))


def socle_series_profile(M: Module) -> list[list[str]]:
    """Socle layers bottom to top, by simple labels."""
    a = M.algebra
    profiles = []
    current = M
    while current.total > 0:
        w = socle_witness(current)
        profiles.append(_layer_labels(a, w.dims_by_grade()))
        current, _ = quotient_module(current, w)
    return profiles


def top_data(M: Module) -> tuple[list[int], list[tuple[int, list]]]:
    """Graded dims of M/rad M plus lifted generator vectors in M."""
    a = M.algebra
    F = a.field
    rad = radical_span(M)
    counts = [0] * a.nvert
    lifts = []
    ech = Echelon(F, M.total)
    for row in rad.vectors:
        ech.insert(row)
    for lam in range(a.nvert):
        for k in M.indices_of_grade(lam):
            v = unit_vector(F, M.total, k)
            if ech.insert(v) is not None:
                counts[lam] += 1
                lifts.append((lam, v))
    return counts, lifts


def composition_counts(M: Module) -> dict[str, int]:
    """Multiset of composition factors; valid because simples are split."""
    a = M.algebra
    return {a.vertex_labels[lam]: M.dims[lam] for lam in range(a.nvert)}


# ---------------------------------------------------------------------------
# projective sums in copy-major coordinates, presentations, hom spaces
# ---------------------------------------------------------------------------


class ProjSum:
    """Copy-major coordinates on a direct sum of projectives P(lambda).

    Basis: for each copy c of type lambda_c, the algebra basis elements with
    source lambda_c (sorted as in projective_module).  Not a Module; just the
    bookkeeping needed by covers, syzygies, and hom fast paths.
    """

    def __init__(self, a: Algebra, copies: list[int]):
        self.algebra = a
        self.copies = list(copies)
        self.index_lists = [projective_module(a, lam).proj_info[0][1] for lam in copies]
        self.starts = []
        cursor = 0
        for lst in self.index_lists:
            self.starts.append(cursor)
            cursor += len(lst)
        self.total = cursor
        self.grades = [a.basis_tgt[i] for lst in self.index_lists for i in lst]

    def act_matrix(self, coeffs: dict) -> Matrix:
        a = self.algebra
        F = a.field
        out = Matrix.zeros(F, self.total, self.total)
        for c, lam in enumerate(self.copies):
            block = projective_module(a, lam).act_vec(coeffs)
            s = self.starts[c]
            for r in range(block.rows):
                row = out.data[s + r]
                brow = block.data[r]
                for k in range(block.cols):
                    if not F.is_zero(brow[k]):
                        row[s + k] = brow[k]
        return out

    def split_elements(self, vec: list) -> list[dict]:
        """One sparse algebra element per copy."""
        F = self.algebra.field
        out = []
        for c, lst in enumerate(self.index_lists):
            s = self.starts[c]
            elem = {}
            for k, i in enumerate(lst):
                if not F.is_zero(vec[s + k]):
                    elem[i] = vec[s + k]
            out.append(elem)
        return out

    def as_module(self) -> Module:
        mods = [projective_module(self.algebra, lam) for lam in self.copies]
        if not mods:
            return zero_module(self.algebra)
        if len(mods) == 1:
            return mods[0]
        return direct_sum(mods)[0]


class _PresData:
    __slots__ = ("psum0", "cover", "section", "syzygy_tops")

    def __init__(self, psum0, cover, section, syzygy_tops):
        self.psum0 = psum0              # ProjSum
        self.cover = cover              # Matrix: psum0.total -> M.total
        self.section = section         # Matrix: M.total -> psum0.total
        self.syzygy_tops = syzygy_tops  # list of (lambda, vector in psum0 coords)


def cover_matrix(psum: ProjSum, targets: list[list], M: Module) -> Matrix:
    """Matrix of (x e_lam in copy c) -> x * v_c on copy-major coordinates."""
    a = psum.algebra
    F = a.field
    cols = []
    for lst, v in zip(psum.index_lists, targets):
        for i in lst:
            cols.append(M.apply_algebra_vec({i: F.one}, v))
    if not cols:
        return Matrix.zeros(F, M.total, 0)
    return Matrix(F, [[cols[c][r] for c in range(len(cols))] for r in range(M.total)])


def projective_cover_data(M: Module) -> tuple[ProjSum, list[list], Matrix]:
    """Minimal cover: P-sum, generator target vectors, and the cover matrix."""
    counts, lifts = top_data(M)
    psum = ProjSum(M.algebra, [lam for lam, _ in lifts])
    targets = [v for _, v in lifts]
    cov = cover_matrix(psum, targets, M)
    return psum, targets, cov


def _witness_tops_in_psum(psum: ProjSum, vectors: list[list]) -> list[tuple[int, list]]:
    """Module generators (tops) of the submodule of a P-sum spanned by vectors."""
    a = psum.algebra
    F = a.field
    ech = Echelon(F, psum.total)
    for rv in a.radical:
        mat = psum.act_matrix(rv)
        for v in vectors:
            ech.insert(mat.apply(v))
    lifts = []
    for v in vectors:
        if ech.insert(v) is not None:
            lifts.append((psum.grades[_lead_index(F, v)], v))
    return lifts


def projective_presentation(M: Module) -> _PresData:
    cached = M.cache.get("presentation")
    if cached is not None:
        return cached
    a = M.algebra
    F = a.field
    psum0, targets, cov = projective_cover_data(M)
    red, pivots, _ = rref(Matrix(F, [cov.data[r][:] + [F.one if r == k else F.zero
                                                       for k in range(M.total)]
                                     for r in range(M.total)]))
    if len([p for p in pivots if p < cov.cols]) != M.total:
        raise EngineError("projective cover is not surjective")
    section = Matrix.zeros(F, cov.cols, M.total)
    for r, pc in enumerate(pivots):
        if pc < cov.cols:
            for k in range(M.total):
                section.data[pc][k] = red.data[r][cov.cols + k]
    syz = kernel_basis(cov)
    syz_ech = Echelon(F, psum0.total)
    syz_vectors = []
    for v in syz:
        if syz_ech.insert(v) is not None:
            syz_vectors.append(v)
    tops = _witness_tops_in_psum(psum0, [row[:] for row in syz_ech.rows])
    pres = _PresData(psum0, cov, section, tops)
    M.cache["presentation"] = pres
    return pres


def hom_space(M: Module, N: Module) -> list[ModuleMap]:
    """Deterministic basis of Hom_A(M, N)."""
    if M.algebra.mult is not N.algebra.mult:
        raise InputError("hom_space needs modules over the same algebra")
    for key, val in M.cache.get("hom", []):
        if key is N:
            return val
    a = M.algebra
    F = a.field
    if M.total == 0 or N.total == 0:
        maps: list[ModuleMap] = []
    elif M.proj_info is not None:
        maps = _hom_from_proj(M, N)
    else:
        maps = _hom_general(M, N)
    M.cache.setdefault("hom", []).append((N, maps))
    return maps


def _hom_from_proj(M: Module, N: Module) -> list[ModuleMap]:
    """Hom from a copy-major projective sum: evaluate at copy generators."""
    a = M.algebra
    F = a.field
    maps = []
    start = 0
    all_starts = []
    for (lam, indices) in M.proj_info:
        all_starts.append(start)
        start += len(indices)
    for (lam, indices), s in zip(M.proj_info, all_starts):
        for k in N.indices_of_grade(lam):
            target = unit_vector(F, N.total, k)
            mat = Matrix.zeros(F, N.total, M.total)
            for off, i in enumerate(indices):
                col = N.apply_algebra_vec({i: F.one}, target)
                for r in range(N.total):
                    mat.data[r][s + off] = col[r]
            maps.append(ModuleMap(M, N, mat))
    return maps


def _hom_general(M: Module, N: Module) -> list[ModuleMap]:
    a = M.algebra
    F = a.field
    pres = projective_presentation(M)
    psum0 = pres.psum0
    # unknowns: per copy c of type lam, a vector in the lam-graded piece of N
    copy_slots = []
    offset = 0
    for lam in psum0.copies:
        idxs = N.indices_of_grade(lam)
        copy_slots.append((lam, idxs, offset))
        offset += len(idxs)
    nunk = offset
    rows = []
    for lam_top, syzvec in pres.syzygy_tops:
        elements = psum0.split_elements(syzvec)
        cols_per_copy = []
        for (lam, idxs, off), elem in zip(copy_slots, elements):
            if elem:
                mat = N.act_vec(elem)
                cols = [mat.apply(unit_vector(F, N.total, k)) for k in idxs]
            else:
                cols = [F.zeros(N.total) for _ in idxs]
            cols_per_copy.append(cols)
        for out_row in range(N.total):
            row = []
            for cols in cols_per_copy:
                row.extend(col[out_row] for col in cols)
            rows.append(row)
    if rows:
        ker = kernel_basis(Matrix(F, rows))
    else:
        ker = [unit_vector(F, nunk, k) for k in range(nunk)]
    maps = []
    for kv in ker:
        cols = []
        for (lam, idxs, off), lst in zip(copy_slots, psum0.index_lists):
            v = F.zeros(N.total)
            for j, k in enumerate(idxs):
                if not F.is_zero(kv[off + j]):
                    v[k] = kv[off + j]
            for i in lst:
                cols.append(N.apply_algebra_vec({i: F.one}, v))
        phi0 = Matrix(F, [[cols[c][r] for c in range(len(cols))]
                          for r in range(N.total)])
        maps.append(ModuleMap(M, N, phi0.mul(pres.section)))
    return maps


def hom_dim(M: Module, N: Module) -> int:
    return len(hom_space(M, N))


# ---------------------------------------------------------------------------
# trace, duality, simple objects
# ---------------------------------------------------------------------------


def submodule_generated(N: Module, vectors: list[list]) -> SubmoduleWitness:
    """The submodule generated by the given vectors."""
    a = N.algebra
    F = a.field
    vecs = []
    for v in vectors:
        for i in range(a.dim):
            vecs.append(N.act[i].apply(v))
        vecs.append(v)
    return SubmoduleWitness(N, vecs)


def trace(M: Module | list[Module], N: Module) -> SubmoduleWitness:
    """Sum of images of all homomorphisms from M (or a list of M's) into N."""
    mods = M if isinstance(M, list) else [M]
    F = N.algebra.field
    vecs = []
    for m in mods:
        if m.total == 0:
            continue
        if m.proj_info is not None:
            # the trace of P(lambda) is generated by the lambda-graded piece
            gen = []
            for (lam, _) in m.proj_info:
                for k in N.indices_of_grade(lam):
                    gen.append(unit_vector(F, N.total, k))
            w = submodule_generated(N, gen)
            vecs.extend(w.vectors)
            continue
        for f in hom_space(m, N):
            for c in range(m.total):
                vecs.append([f.matrix.data[r][c] for r in range(N.total)])
    return SubmoduleWitness(N, vecs)


def dualize(M: Module) -> Module:
    """D(M) = Hom_k(M, k) as a module over the opposite algebra."""
    from .presentation import opposite_algebra
    a = M.algebra
    opp = a.cache.get("opposite")
    if opp is None:
        opp = opposite_algebra(a)
        a.cache["opposite"] = opp
        opp.cache["opposite"] = a
    act = [m.transpose() for m in M.act]
    return Module(opp, list(M.grades), act, label=f"D({M.label})" if M.label else "")


def opposite_of(a: Algebra) -> Algebra:
    from .presentation import opposite_algebra
    opp = a.cache.get("opposite")
    if opp is None:
        opp = opposite_algebra(a)
        a.cache["opposite"] = opp
        opp.cache["opposite"] = a
    return opp


def standard_objects(a: Algebra) -> dict:
    """Simples, projectives, and injectives, indexed by vertex position."""
    cached = a.cache.get("standard_objects")
    if cached is not None:
        return cached
    P = [projective_module(a, lam) for lam in range(a.nvert)]
    L = []
    for lam in range(a.nvert):
        rad = radical_span(P[lam])
        top, _ = quotient_module(P[lam], rad, label=f"L({a.vertex_labels[lam]})")
        if top.total != 1 or top.dims[lam] != 1:
            raise NonSplitError(
                f"top of P({a.vertex_labels[lam]}) is not one-dimensional "
                f"(non-split simple: change field)")
        L.append(top)
    opp = opposite_of(a)
    I = []
    for lam in range(a.nvert):
        inj = dualize(projective_module(opp, lam))
        inj.label = f"I({a.vertex_labels[lam]})"
        I.append(inj)
    out = {"P": P, "L": L, "I": I}
    a.cache["standard_objects"] = out
    return out


# ---------------------------------------------------------------------------
# isomorphism testing and decomposition
# ---------------------------------------------------------------------------


def _iso_invariants(M: Module) -> tuple:
    cached = M.cache.get("iso_invariants")
    if cached is None:
        cached = (tuple(M.dims),
                  tuple(tuple(layer) for layer in layer_profile(M)),
                  tuple(tuple(layer) for layer in socle_series_profile(M)),
                  len(hom_space(M, M)))
        M.cache["iso_invariants"] = cached
    return cached


def _combine(maps: list[ModuleMap], coeffs: list) -> ModuleMap:
    F = maps[0].source.algebra.field
    out = Matrix.zeros(F, maps[0].target.total, maps[0].source.total)
    for f, c in zip(maps, coeffs):
        if F.is_zero(c):
            continue
        for r in range(out.rows):
            F.axpy(out.data[r], f.matrix.data[r], F.neg(c))
    return ModuleMap(maps[0].source, maps[0].target, out)


def _search_invertible(maps: list[ModuleMap], seed: int = 0):
    """Deterministic search for an invertible combination of the given maps."""
    if not maps or maps[0].source.total != maps[0].target.total:
        return None
    for f in maps:
        if f.is_isomorphism():
            return f
    rng = random.Random(7991 + seed)
    for _ in range(32):
        coeffs = [rng.randint(-4, 4) for _ in maps]
        F = maps[0].source.algebra.field
        cand = _combine(maps, [F.of(c) for c in coeffs])
        if cand.is_isomorphism():
            return cand
    if len(maps) <= 12:
        F = maps[0].source.algebra.field
        for pattern in range(1, 2 ** len(maps)):
            coeffs = [F.one if (pattern >> i) & 1 else F.zero
                      for i in range(len(maps))]
            cand = _combine(maps, coeffs)
            if cand.is_isomorphism():
                return cand
    return None


def is_isomorphic(M: Module, N: Module, seed: int = 0) -> bool:
    """True iff some hom is invertible; never a silent false negative."""
    if M is N:
        return True
    if M.total != N.total or tuple(M.dims) != tuple(N.dims):
        return False
    if M.total == 0:
        return True
    if _iso_invariants(M) != _iso_invariants(N):
        return False
    if len(hom_space(M, N)) != len(hom_space(N, M)):
        return False
    if _search_invertible(hom_space(M, N), seed=seed) is not None:
        return True
    raise UndecidedError(
        "isomorphism search exhausted with all invariants equal",
        diagnostics={"dims": M.dims, "hom_dim": len(hom_space(M, N))})


def iso_witness(M: Module, N: Module, seed: int = 0) -> ModuleMap | None:
    if M.total != N.total or tuple(M.dims) != tuple(N.dims):
        return None
    if M.total == 0:
        return ModuleMap(M, N, Matrix.zeros(M.algebra.field, 0, 0))
    return _search_invertible(hom_space(M, N), seed=seed)


# -- minimal polynomial and factoring ---------------------------------------


def _minpoly(F: Field, mat: Matrix) -> list:
    """Minimal polynomial (ascending coefficients, monic) via Krylov spans."""
    n = mat.rows
    if n == 0:
        return [F.one]
    poly = [F.one]
    covered = Echelon(F, n)
    for start in range(n):
        v = unit_vector(F, n, start)
        if covered.contains(v):
            continue
        krylov = Echelon(F, n)
        seq = [v]
        krylov.insert(v)
        cur = v
        while True:
            cur = mat.apply(cur)
            if krylov.insert(cur) is None:
                break
            seq.append(cur)
        cols = Matrix(F, [[seq[j][r] for j in range(len(seq))] for r in range(n)])
        coeffs = solve(cols, cur)
        local = [F.neg(c) for c in coeffs] + [F.one]
        poly = _poly_lcm(F, poly, local)
        for s in seq:
            covered.insert(s)
    return poly


def _poly_mul(F: Field, a: list, b: list) -> list:
    out = [F.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if F.is_zero(x):
            continue
        for j, y in enumerate(b):
            out[i + j] = F.add(out[i + j], F.mul(x, y))
    return out


def _poly_divmod(F: Field, a: list, b: list) -> tuple[list, list]:
    a = a[:]
    db = len(b) - 1
    inv = F.inv(b[-1])
    q = [F.zero] * max(len(a) - db, 1)
    for k in range(len(a) - db - 1, -1, -1):
        c = F.mul(a[db + k], inv)
        q[k] = c
        if not F.is_zero(c):
            for j in range(db + 1):
                a[k + j] = F.sub(a[k + j], F.mul(c, b[j]))
    while len(a) > 1 and F.is_zero(a[-1]):
        a.pop()
    return q, a


def _is_zero_poly(F: Field, p: list) -> bool:
    return all(F.is_zero(c) for c in p)


def _poly_gcd(F: Field, a: list, b: list) -> list:
    a, b = a[:], b[:]
    while not _is_zero_poly(F, b):
        _, r = _poly_divmod(F, a, b)
        a, b = b, r
    inv = F.inv(a[-1])
    return [F.mul(inv, c) for c in a]


def _poly_lcm(F: Field, a: list, b: list) -> list:
    if a == [F.one]:
        return b[:]
    if b == [F.one]:
        return a[:]
    g = _poly_gcd(F, a, b)
    q, _ = _poly_divmod(F, _poly_mul(F, a, b), g)
    inv = F.inv(q[-1])
    return [F.mul(inv, c) for c in q]


def _factor_poly(F: Field, coeffs: list) -> list[tuple[list, int]]:
    """Factor a monic polynomial into irreducibles over F via sympy."""
    import sympy

    x = sympy.Symbol("x")
    if F.kind == "Q":
        expr = sum(sympy.Rational(str(c)) * x**i for i, c in enumerate(coeffs))
        _, factors = sympy.factor_list(sympy.Poly(expr, x, domain="QQ"))
    else:
        expr = sum(int(c) * x**i for i, c in enumerate(coeffs))
        _, factors = sympy.factor_list(sympy.Poly(expr, x, modulus=F.p,
                                                  symmetric=False))
    out = []
    for poly, mult in factors:
        cs = sympy.Poly(poly, x).all_coeffs()[::-1]
        if F.kind == "Q":
            lead = sympy.Rational(cs[-1])
            fc = [F.of(str(sympy.Rational(c) / lead)) for c in cs]
        else:
            lead_inv = F.inv(F.of(int(cs[-1])))
            fc = [F.mul(F.of(int(c)), lead_inv) for c in cs]
        out.append((fc, int(mult)))
    return out


def _poly_eval_matrix(F: Field, coeffs: list, mat: Matrix) -> Matrix:
    n = mat.rows
    out = Matrix.zeros(F, n, n)
    power = Matrix.identity(F, n)
    for i, c in enumerate(coeffs):
        if not F.is_zero(c):
            for r in range(n):
                F.axpy(out.data[r], power.data[r], F.neg(c))
        if i + 1 < len(coeffs):
            power = mat.mul(power)
    return out


# -- decomposition -----------------------------------------------------------


def decompose(M: Module, seed: int = 0) -> list[tuple[Module, int]]:
    """Indecomposable summands with multiplicities, deterministic order."""
    pieces = _decompose_rec(M, seed)
    groups: list[list[Module]] = []
    for piece in pieces:
        for g in groups:
            if is_isomorphic(g[0], piece, seed=seed):
                g.append(piece)
                break
        else:
            groups.append([piece])
    groups.sort(key=lambda g: (g[0].total, g[0].dim_vector(),
                               tuple(tuple(x) for x in layer_profile(g[0]))))
    return [(g[0], len(g)) for g in groups]


def _decompose_rec(M: Module, seed: int) -> list[Module]:
    if M.total == 0:
        return []
    F = M.algebra.field
    ends = hom_space(M, M)
    if len(ends) == 1:
        return [M]
    candidates = [f.matrix for f in ends]
    if len(ends) <= 8:
        for i in range(len(ends)):
            for j in range(len(ends)):
                if i != j:
                    candidates.append(ends[i].matrix.mul(ends[j].matrix))
    rng = random.Random(4241 + seed)
    for _ in range(min(24, 4 * len(ends))):
        coeffs = [F.of(rng.randint(-3, 3)) for _ in ends]
        candidates.append(_combine(ends, coeffs).matrix)
    nonsplit_evidence = False
    for mat in candidates:
        mp = _minpoly(F, mat)
        factors = _factor_poly(F, mp)
        if len(factors) >= 2:
            pieces = []
            for fc, mult in factors:
                power = fc
                for _ in range(mult - 1):
                    power = _poly_mul(F, power, fc)
                ker = kernel_basis(_poly_eval_matrix(F, power, mat))
                pieces.append(SubmoduleWitness(M, ker))
            if sum(w.dim for w in pieces) != M.total:
                raise EngineError("Fitting decomposition dimensions do not add up")
            out = []
            for w in pieces:
                piece, _ = submodule(M, w)
                out.extend(_decompose_rec(piece, seed))
            return out
        fc, _ = factors[0]
        if len(fc) > 2:
            nonsplit_evidence = True
    if nonsplit_evidence:
        raise NonSplitError("endomorphism quotient contains a nontrivial "
                            "division algebra: enlarge field")
    _certify_local(M, ends)
    return [M]


def end_is_local(M: Module) -> bool:
    ends = hom_space(M, M)
    if len(ends) == 1:
        return True
    try:
        _certify_local(M, ends)
        return True
    except (NonSplitError, UndecidedError):
        return False


def local_scalar(F: Field, mat: Matrix):
    """The unique eigenvalue of a scalar-plus-nilpotent matrix, or None."""
    mp = _minpoly(F, mat)
    g = _squarefree_part(F, mp)
    if len(g) != 2:
        return None
    return F.neg(F.mul(g[0], F.inv(g[1])))


def _squarefree_part(F: Field, poly: list) -> list:
    deriv = [F.mul(F.of(i), poly[i]) for i in range(1, len(poly))]
    while len(deriv) > 1 and F.is_zero(deriv[-1]):
        deriv.pop()
    if not deriv or _is_zero_poly(F, deriv):
        # inseparable (char p): fall back to full factorization
        out = [F.one]
        for fc, _ in _factor_poly(F, poly):
            out = _poly_mul(F, out, fc)
        return out
    g = _poly_gcd(F, poly, deriv)
    q, _ = _poly_divmod(F, poly, g)
    inv = F.inv(q[-1])
    return [F.mul(inv, c) for c in q]


def _certify_local(M: Module, ends: list[ModuleMap]) -> None:
    """Verify End(M) = k * id + nilpotent ideal; raise otherwise."""
    F = M.algebra.field
    n = M.total
    ech = Echelon(F, n * n)
    mats = []
    for f in ends:
        c = local_scalar(F, f.matrix)
        if c is None:
            raise NonSplitError("endomorphism with irreducible minimal factor: "
                                "enlarge field")
        shifted = Matrix(F, [[F.sub(f.matrix.data[r][k],
                                    c if r == k else F.zero)
                              for k in range(n)] for r in range(n)])
        flat = [shifted.data[r][k] for r in range(n) for k in range(n)]
        if ech.insert(flat) is not None:
            mats.append(shifted)
    if ech.rank != len(ends) - 1:
        raise UndecidedError("endomorphism ring not certified local",
                             diagnostics={"end_dim": len(ends),
                                          "rad_rank": ech.rank})
    for x in mats:
        for y in mats:
            prod = x.mul(y)
            flat = [prod.data[r][k] for r in range(n) for k in range(n)]
            if not ech.contains(flat):
                raise UndecidedError("candidate radical is not an ideal")
    span = mats
    for _ in range(len(ends) + 1):
        nxt = []
        step = Echelon(F, n * n)
        for x in span:
            for y in mats:
                prod = x.mul(y)
                flat = [prod.data[r][k] for r in range(n) for k in range(n)]
                if step.insert(flat) is not None:
                    nxt.append(prod)
        if not nxt:
            return
        span = nxt
    raise UndecidedError("candidate radical is not nilpotent")


# ---------------------------------------------------------------------------
# tensor products of modules
# ---------------------------------------------------------------------------


def tensor_module(MA: Module, MB: Module, D: Algebra, label: str = "") -> Module:
    """M (x) V as a module over the tensor algebra D = A (x) B."""
    A, B = MA.algebra, MB.algebra
    F = A.field

    def pair_vertex(la: int, lb: int) -> int:
        return la if B.nvert == 1 else la * B.nvert + lb

    grades = [pair_vertex(MA.grades[i], MB.grades[j])
              for i in range(MA.total) for j in range(MB.total)]

    def pos(i: int, j: int) -> int:
        return i * MB.total + j

    act = []
    for i in range(A.dim):
        ma = MA.act[i]
        for j in range(B.dim):
            mb = MB.act[j]
            big = Matrix.zeros(F, len(grades), len(grades))
            for r1 in range(MA.total):
                for c1 in range(MA.total):
                    x = ma.data[r1][c1]
                    if F.is_zero(x):
                        continue
                    for r2 in range(MB.total):
                        row = big.data[pos(r1, r2)]
                        for c2 in range(MB.total):
                            y = mb.data[r2][c2]
                            if not F.is_zero(y):
                                row[pos(c1, c2)] = F.mul(x, y)
            act.append(big)
    return Module(D, grades, act, label=label or f"{MA.label}(x){MB.label}")
