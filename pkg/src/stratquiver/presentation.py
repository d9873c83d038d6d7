"""Quivers, path-algebra quotients, and algebra constructions.

An Algebra is stored by structure constants over a homogeneous basis: every
basis element b satisfies b = e_tgt * b * e_src for a single pair of
idempotents, which keeps module gradings and hom-space computations block
structured.  Path words everywhere are traversal sequences: the tuple
("gamma", "beta") is the path that traverses gamma and then beta, and its
value in the algebra is the product beta_lift * gamma_lift taken in the
algebra's own multiplication.  That uniform rule makes path algebras (where
x*y is "y then x") and endomorphism algebras (where x*y is "x then y")
interoperate without case analysis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

from .errors import InputError
from .exactlin import Field

# ---------------------------------------------------------------------------
# sparse vectors: dict index -> field element, zero entries absent
# ---------------------------------------------------------------------------


def sv_axpy(F: Field, dst: dict, src: dict, c) -> dict:
    """dst -= c * src, in place; drops entries that become zero.

    Subtraction convention matches Field.axpy so elimination call sites
    read the same for dense and sparse vectors.
    """
    if F.is_zero(c):
        return dst
    for k, v in src.items():
        w = F.sub(dst.get(k, F.zero), F.mul(c, v))
        if F.is_zero(w):
            dst.pop(k, None)
        else:
            dst[k] = w
    return dst


def sv_scale(F: Field, vec: dict, c) -> dict:
    if F.is_zero(c):
        return {}
    return {k: F.mul(c, v) for k, v in vec.items()}


def sv_dense(F: Field, vec: dict, n: int) -> list:
    out = F.zeros(n)
    for k, v in vec.items():
        out[k] = v
    return out


def sv_sparse(F: Field, vec: list) -> dict:
    return {k: v for k, v in enumerate(vec) if not F.is_zero(v)}


class MonomialEchelon:
    """Reduced echelon of sparse vectors with pivots maximal in a key order.

    Used for relation-ideal closures where the coordinate set (paths) grows
    as the computation proceeds, so a fixed-width echelon will not do.
    """

    def __init__(self, F: Field, key):
        self.F = F
        self.key = key
        self.rows: dict[object, dict] = {}  # pivot monomial -> reduced vector

    def _leading(self, vec: dict):
        return max(vec, key=self.key)

    def reduce(self, vec: dict) -> dict:
        F = self.F
        v = dict(vec)
        while True:
            hits = [m for m in v if m in self.rows]
            if not hits:
                return v
            m = max(hits, key=self.key)
            sv_axpy(F, v, self.rows[m], v[m])

    def insert(self, vec: dict):
        """Insert; return the new pivot monomial or None if dependent."""
        F = self.F
        v = self.reduce(vec)
        if not v:
            return None
        m = self._leading(v)
        c = F.inv(v[m])
        if c != F.one:
            v = sv_scale(F, v, c)
        for row in self.rows.values():
            if m in row:
                sv_axpy(F, row, v, row[m])
        self.rows[m] = v
        return m

    def is_pivot(self, mono) -> bool:
        return mono in self.rows


# ---------------------------------------------------------------------------
# quivers and presentations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Arrow:
    name: str
    source: str
    target: str


class Quiver:
    """Directed multigraph with named vertices and arrows."""

    def __init__(self, vertices: list[str], arrows: list[Arrow]):
        if len(set(vertices)) != len(vertices):
            raise InputError("duplicate vertex labels")
        names = [a.name for a in arrows]
        if len(set(names)) != len(names):
            raise InputError("duplicate arrow names")
        vset = set(vertices)
        for a in arrows:
            if a.source not in vset or a.target not in vset:
                raise InputError(f"arrow {a.name} references unknown vertex")
        self.vertices = list(vertices)
        self.arrows = list(arrows)
        self.vertex_index = {v: i for i, v in enumerate(vertices)}
        self.arrow_index = {a.name: i for i, a in enumerate(arrows)}

    def arrows_from(self, vertex_idx: int) -> list[int]:
        return [i for i, a in enumerate(self.arrows)
                if self.vertex_index[a.source] == vertex_idx]


class Presentation:
    """A quiver with relations, a linear order on vertices, and a field.

    Relations are lists of terms (coefficient, path); each path is a tuple
    of arrow names in traversal order, every term in one relation runs
    between the same pair of vertices.
    """

    def __init__(self, quiver: Quiver, relations, order: list[str], field: Field,
                 max_path_length: int = 32):
        self.quiver = quiver
        self.field = field
        self.max_path_length = max_path_length
        if sorted(order) != sorted(quiver.vertices):
            raise InputError("order must list every vertex exactly once")
        self.order = list(order)
        self.relations = []
        for rel in relations:
            terms = []
            src = tgt = None
            for coeff, path in rel:
                if len(path) == 0:
                    raise InputError("relations may not contain trivial paths")
                idxs = []
                for name in path:
                    if name not in quiver.arrow_index:
                        raise InputError(f"unknown arrow {name!r} in relation")
                    idxs.append(quiver.arrow_index[name])
                for k in range(len(idxs) - 1):
                    if quiver.arrows[idxs[k]].target != quiver.arrows[idxs[k + 1]].source:
                        raise InputError(
                            f"path {'*'.join(path)} is not composable "
                            f"(target of {path[k]} is not source of {path[k+1]})")
                s = quiver.vertex_index[quiver.arrows[idxs[0]].source]
                t = quiver.vertex_index[quiver.arrows[idxs[-1]].target]
                if src is None:
                    src, tgt = s, t
                elif (s, t) != (src, tgt):
                    raise InputError("terms of one relation must be parallel paths")
                terms.append((field.of(coeff), tuple(idxs)))
            if terms:
                self.relations.append(terms)


# JSON interchange ----------------------------------------------------------


def presentation_from_json(text: str) -> Presentation:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    try:
        fdoc = doc["field"]
        if fdoc["kind"] == "Q":
            field = Field.rationals()
        elif fdoc["kind"] == "GF":
            field = Field.prime(int(fdoc["p"]))
        else:
            raise InputError(f"unknown field kind {fdoc['kind']!r}")
        arrows = [Arrow(a["name"], a["from"], a["to"]) for a in doc["arrows"]]
        quiver = Quiver(list(doc["vertices"]), arrows)
        relations = [[(term["coeff"], tuple(term["path"])) for term in rel]
                     for rel in doc.get("relations", [])]
        return Presentation(quiver, relations, list(doc["order"]), field,
                            int(doc.get("max_path_length", 32)))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed presentation document: {exc}") from exc


def presentation_to_json(pres: Presentation) -> str:
    quiver = pres.quiver
    doc = {
        "field": ({"kind": "Q"} if pres.field.kind == "Q"
                  else {"kind": "GF", "p": pres.field.p}),
        "vertices": quiver.vertices,
        "arrows": [{"name": a.name, "from": a.source, "to": a.target}
                   for a in quiver.arrows],
        "relations": [[{"coeff": pres.field.to_str(c),
                        "path": [quiver.arrows[i].name for i in path]}
                       for c, path in rel] for rel in pres.relations],
        "order": pres.order,
        "max_path_length": pres.max_path_length,
    }
    return json.dumps(doc, indent=1, sort_keys=True)


# ---------------------------------------------------------------------------
# Algebra
# ---------------------------------------------------------------------------


class Algebra:
    """Finite-dimensional algebra by structure constants over a graded basis.

    mult[i][j] holds the coordinates of b_i * b_j as a sparse vector.  The
    idempotents form a complete orthogonal primitive set indexed by the
    vertex labels; basis element k lives in the (basis_tgt[k], basis_src[k])
    block.
    """

    def __init__(self, field: Field, vertex_labels: list[str], order: list[str],
                 basis_labels: list[str], basis_src: list[int], basis_tgt: list[int],
                 mult, idempotents, radical, gens, origin: str):
        self.field = field
        self.vertex_labels = list(vertex_labels)
        self.order = list(order)
        self.order_pos = {v: i for i, v in enumerate(order)}
        self.basis_labels = list(basis_labels)
        self.basis_src = list(basis_src)
        self.basis_tgt = list(basis_tgt)
        self.mult = mult
        self.idempotents = idempotents
        self.radical = radical
        self.gens = gens
        self.origin = origin
        self.dim = len(basis_labels)
        self.nvert = len(vertex_labels)
        self.cache: dict = {}
        if sorted(order) != sorted(vertex_labels):
            raise InputError("order must be a permutation of the vertex labels")

    # λ indices sorted ascending in the order ≤
    def lambdas_ascending(self) -> list[int]:
        vi = {v: i for i, v in enumerate(self.vertex_labels)}
        return [vi[v] for v in self.order]

    def higher_than(self, lam: int) -> list[int]:
        pos = self.order_pos[self.vertex_labels[lam]]
        vi = {v: i for i, v in enumerate(self.vertex_labels)}
        return [vi[v] for v in self.order[pos + 1:]]

    def lower_than(self, lam: int) -> list[int]:
        pos = self.order_pos[self.vertex_labels[lam]]
        vi = {v: i for i, v in enumerate(self.vertex_labels)}
        return [vi[v] for v in self.order[:pos]]

    def mul_basis(self, i: int, j: int) -> dict:
        return self.mult[i][j]

    def mul_vec(self, x: dict, y: dict) -> dict:
        F = self.field
        out: dict = {}
        for i, ci in x.items():
            row = self.mult[i]
            for j, cj in y.items():
                prod = row[j]
                if prod:
                    sv_axpy(F, out, prod, F.neg(F.mul(ci, cj)))
        return out

    def unit(self) -> dict:
        F = self.field
        out: dict = {}
        for e in self.idempotents:
            sv_axpy(F, out, e, F.neg(F.one))
        return out

    def left_mult_matrix(self, vec: dict) -> list[list]:
        """Dense matrix of x -> vec * x on the algebra's own basis."""
        F = self.field
        cols = [self.mul_vec(vec, {j: F.one}) for j in range(self.dim)]
        return [[cols[j].get(i, F.zero) for j in range(self.dim)]
                for i in range(self.dim)]

    def verify(self, assoc: bool = True) -> None:
        """Check idempotent axioms, homogeneity, and (optionally) associativity."""
        F = self.field
        for li, e in enumerate(self.idempotents):
            for lj, f in enumerate(self.idempotents):
                prod = self.mul_vec(e, f)
                want = dict(e) if li == lj else {}
                if prod != want:
                    raise InputError("idempotents are not orthogonal")
        for k in range(self.dim):
            e_t = self.idempotents[self.basis_tgt[k]]
            e_s = self.idempotents[self.basis_src[k]]
            v = self.mul_vec(e_t, self.mul_vec({k: F.one}, e_s))
            if v != {k: F.one}:
                raise InputError(f"basis element {k} is not homogeneous")
        if assoc:
            for i in range(self.dim):
                for j in range(self.dim):
                    ij = self.mult[i][j]
                    for k in range(self.dim):
                        left = self.mul_vec(ij, {k: F.one})
                        right = self.mul_vec({i: F.one}, self.mult[j][k])
                        if left != right:
                            raise InputError(
                                f"associativity fails on basis triple ({i},{j},{k})")

    def cartan_matrix(self) -> list[list[int]]:
        """Entry (λ, μ): dimension of e_λ A e_μ, i.e. [P(μ) : L(λ)]."""
        C = [[0] * self.nvert for _ in range(self.nvert)]
        for k in range(self.dim):
            C[self.basis_tgt[k]][self.basis_src[k]] += 1
        return C

    def path_value(self, arrow_lifts: list[dict], path: tuple[int, ...]) -> dict:
        """Value of a traversal path, folding lifts right-to-left."""
        v = dict(arrow_lifts[path[0]])
        for a in path[1:]:
            v = self.mul_vec(arrow_lifts[a], v)
        return v

    def __repr__(self):
        return f"Algebra(dim={self.dim}, vertices={self.vertex_labels}, origin={self.origin})"


# ---------------------------------------------------------------------------
# build_algebra: path algebra modulo relations, with self-certification
# ---------------------------------------------------------------------------

# a path is (source_vertex_idx, tuple_of_arrow_idx); () is the trivial path


def _path_key(path):
    return (len(path[1]), path[1])


def _path_tgt(quiver: Quiver, path) -> int:
    src, arrows = path
    if not arrows:
        return src
    return quiver.vertex_index[quiver.arrows[arrows[-1]].target]


def _extend(quiver: Quiver, vec: dict, arrow: int, side: str) -> dict:
    """Append (side='right') or prepend (side='left') one arrow to every path."""
    out: dict = {}
    a = quiver.arrows[arrow]
    for (src, arrows), c in vec.items():
        if side == "right":
            tgt = _path_tgt(quiver, (src, arrows))
            if quiver.vertices[tgt] != a.source:
                continue
            out[(src, arrows + (arrow,))] = c
        else:
            if quiver.vertices[src] != a.target:
                continue
            out[(quiver.vertex_index[a.source], (arrow,) + arrows)] = c
    return out


def build_algebra(pres: Presentation, verify: bool = True) -> Algebra:
    """Construct the path algebra of the quiver modulo the relation ideal.

    The basis is the set of irreducible path residues found by a degreewise
    linear closure of the ideal.  The construction is certified afterwards:
    the arrow action matrices define an algebra homomorphism from the free
    path algebra, and checking that every relation acts as zero proves the
    quotient is exactly the presented algebra (neither too big nor too
    small).  If certification fails the closure is extended and retried.
    """
    quiver = pres.quiver
    F = pres.field
    rel_vectors = []
    for rel in pres.relations:
        vec: dict = {}
        for c, arrows in rel:
            src = quiver.vertex_index[quiver.arrows[arrows[0]].source]
            sv_axpy(F, vec, {(src, arrows): F.one}, F.neg(c))
        if vec:
            rel_vectors.append(vec)

    ideal = MonomialEchelon(F, _path_key)
    trivial = [(v, ()) for v in range(len(quiver.vertices))]
    frontier = list(trivial)
    seen: list = list(trivial)
    seen_set = set(trivial)
    pool_prev: list[dict] = []  # ideal vectors inserted at the previous stage

    max_rel_deg = max((len(p) for rel in pres.relations for _, p in rel), default=0)
    stage = 0
    deepen_left = 4
    while True:
        stage += 1
        if stage > pres.max_path_length:
            raise InputError(
                f"algebra dimension did not stabilize within max_path_length="
                f"{pres.max_path_length}: possibly not finite-dimensional")
        candidates_vecs: list[dict] = [v for v in rel_vectors
                                       if max(len(p[1]) for p in v) == stage]
        for v in pool_prev:
            for a in range(len(quiver.arrows)):
                for side in ("left", "right"):
                    ext = _extend(quiver, v, a, side)
                    if ext:
                        candidates_vecs.append(ext)
        pool_now: list[dict] = []
        for v in candidates_vecs:
            red = ideal.reduce(v)
            if red and ideal.insert(dict(red)) is not None:
                pool_now.append(red)
        # new irreducible paths of this length
        new_frontier = []
        for path in frontier:
            tgt = _path_tgt(quiver, path)
            for a in quiver.arrows_from(tgt):
                ext = (path[0], path[1] + (a,))
                if ext not in seen_set:
                    seen.append(ext)
                    seen_set.add(ext)
                if not ideal.is_pivot(ext):
                    new_frontier.append(ext)
        frontier = new_frontier
        pool_prev = pool_now
        if not frontier and stage >= max_rel_deg:
            built = _finalize_algebra(pres, ideal, seen, seen_set)
            if built is not None:
                return built
            # certification failed: the closure missed an S-polynomial style
            # consequence; deepen by another stage of pure ideal extension
            deepen_left -= 1
            if deepen_left < 0:
                raise InputError("relation ideal closure did not converge")


def _finalize_algebra(pres: Presentation, ideal, seen, seen_set) -> Algebra | None:
    """Saturate, certify, and assemble; None means the caller must deepen."""
    quiver = pres.quiver
    F = pres.field
    pivots_before = -1
    while True:
        basis, nf_table, defect = _saturate(quiver, F, ideal, seen, seen_set)
        if defect is None:
            break
        if len(ideal.rows) == pivots_before:
            raise InputError("internal: path-basis saturation stalled")
        pivots_before = len(ideal.rows)
        ideal.insert(defect)
    # certification: every relation must act as zero through the normal
    # forms, which pins the quotient to exactly kQ / (relations)
    index = {p: k for k, p in enumerate(basis)}
    for rel in pres.relations:
        src_v = quiver.vertex_index[quiver.arrows[rel[0][1][0]].source]
        for b in basis:
            if _path_tgt(quiver, b) != src_v:
                continue
            acc: dict = {}
            for c, arrows in rel:
                img = _fold(quiver, F, nf_table, index, b, arrows)
                sv_axpy(F, acc, img, F.neg(c))
            if acc:
                return None
    return _algebra_from_basis(pres, basis, nf_table)


def _saturate(quiver, F, ideal, seen, seen_set):
    """Compute the irreducible path basis and the one-arrow NF table.

    Returns (basis, nf_table, None) on success.  Any inconsistency (a
    non-pivot path with a reducible prefix appearing in a normal form) is
    returned as (None, None, defect) where defect is an honest ideal
    element whose insertion makes progress; the caller loops.
    """
    basis = []
    basis_set = set()
    for p in sorted(seen, key=_path_key):
        if ideal.is_pivot(p):
            continue
        src, arrows = p
        if arrows and (src, arrows[:-1]) not in basis_set:
            # some prefix is reducible, so p is reducible too; expose it
            return None, None, _derive_defect(quiver, F, ideal, p)
        basis.append(p)
        basis_set.add(p)
    nf_table: dict = {}
    for b in basis:
        tgt = _path_tgt(quiver, b)
        for a in quiver.arrows_from(tgt):
            ext = (b[0], b[1] + (a,))
            if ext not in seen_set:
                seen.append(ext)
                seen_set.add(ext)
            red = ideal.reduce({ext: F.one})
            if ext in red:
                if ext not in basis_set:
                    raise InputError("internal: irreducible extension missed by closure")
                nf_table[(b, a)] = {ext: F.one}
            else:
                # reduce() only subtracts ideal elements, so red is the
                # normal form of ext itself
                for q in red:
                    if q not in basis_set:
                        return None, None, _derive_defect(quiver, F, ideal, q)
                nf_table[(b, a)] = red
    return basis, nf_table, None


def _derive_defect(quiver, F, ideal, q):
    """Build an ideal element whose leading monomial is the stray path q."""
    src, arrows = q
    for cut in range(len(arrows) - 1, 0, -1):
        prefix = (src, arrows[:cut])
        if ideal.is_pivot(prefix):
            rest = arrows[cut:]
            vec = {prefix: F.one}
            for a in rest:
                vec = _extend(quiver, vec, a, "right")
            red_prefix = ideal.reduce({prefix: F.one})
            tail = red_prefix
            for a in rest:
                tail = _extend(quiver, tail, a, "right")
            out = dict(vec)
            sv_axpy(F, out, tail, F.one)
            # out = q - (NF(prefix) extended), an honest ideal element
            return out
    raise InputError("internal: stray path with no reducible prefix")


def _fold(quiver, F, nf_table, index, start_path, arrows) -> dict:
    """Normal form of start_path extended by a traversal, one arrow at a time.

    Returns a sparse vector over basis indices.
    """
    state = {start_path: F.one}
    for a in arrows:
        nxt: dict = {}
        for p, c in state.items():
            tgt = _path_tgt(quiver, p)
            if quiver.vertices[tgt] != quiver.arrows[a].source:
                continue
            sv_axpy(F, nxt, nf_table[(p, a)], F.neg(c))
        state = nxt
        if not state:
            break
    return {index[p]: c for p, c in state.items()}


def _algebra_from_basis(pres: Presentation, basis, nf_table) -> Algebra:
    quiver = pres.quiver
    F = pres.field
    index = {p: k for k, p in enumerate(basis)}
    labels = []
    for src, arrows in basis:
        if not arrows:
            labels.append(f"e_{quiver.vertices[src]}")
        else:
            labels.append("*".join(quiver.arrows[a].name for a in arrows))
    basis_src = [p[0] for p in basis]
    basis_tgt = [_path_tgt(quiver, p) for p in basis]
    mult = [[None] * len(basis) for _ in range(len(basis))]
    for i, bi in enumerate(basis):
        for j, bj in enumerate(basis):
            # product b_i * b_j is "traverse b_j, then b_i"
            if _path_tgt(quiver, bj) != bi[0]:
                mult[i][j] = {}
            else:
                mult[i][j] = _fold(quiver, F, nf_table, index, bj, bi[1])
    idempotents = []
    for v in range(len(quiver.vertices)):
        k = index[(v, ())]
        idempotents.append({k: F.one})
    radical = [{k: F.one} for k, p in enumerate(basis) if p[1]]
    gens = []
    for a, arrow in enumerate(quiver.arrows):
        src_v = quiver.vertex_index[arrow.source]
        vec = _fold(quiver, F, nf_table, index, (src_v, ()), (a,))
        if vec:
            gens.append((vec, src_v, quiver.vertex_index[arrow.target]))
    alg = Algebra(F, quiver.vertices, pres.order, labels, basis_src, basis_tgt,
                  mult, idempotents, radical, gens, origin="presentation")
    alg.cache["presentation"] = pres
    alg.cache["basis_paths"] = list(basis)
    alg.verify(assoc=True)
    return alg


# ---------------------------------------------------------------------------
# opposite and tensor algebras
# ---------------------------------------------------------------------------


def opposite_algebra(a: Algebra) -> Algebra:
    """Same basis, reversed multiplication; stratified with the same order."""
    mult = [[a.mult[j][i] for j in range(a.dim)] for i in range(a.dim)]
    opp = Algebra(a.field, a.vertex_labels, a.order, list(a.basis_labels),
                  list(a.basis_tgt), list(a.basis_src), mult,
                  [dict(e) for e in a.idempotents],
                  [dict(r) for r in a.radical],
                  [(dict(v), t, s) for (v, s, t) in a.gens],
                  origin="opposite")
    return opp


def tensor_algebra(a: Algebra, b: Algebra) -> Algebra:
    """Componentwise tensor product; idempotents e_lambda (x) e_nu.

    When b is local the vertex labels collapse to a's labels, matching the
    tensor construction for stratified algebras.
    """
    if a.field != b.field:
        raise InputError("tensor factors must share the field")
    F = a.field
    n_b = b.dim

    def pair(i: int, j: int) -> int:
        return i * n_b + j

    b_local = b.nvert == 1
    if b_local:
        vertex_labels = list(a.vertex_labels)
        order = list(a.order)
    else:
        vertex_labels = [f"{la}|{lb}" for la in a.vertex_labels for lb in b.vertex_labels]
        order = [f"{la}|{lb}" for la in a.order for lb in b.order]

    def pair_vertex(la: int, lb: int) -> int:
        return la if b_local else la * b.nvert + lb

    labels = [f"{a.basis_labels[i]}(x){b.basis_labels[j]}"
              for i in range(a.dim) for j in range(b.dim)]
    basis_src = [pair_vertex(a.basis_src[i], b.basis_src[j])
                 for i in range(a.dim) for j in range(b.dim)]
    basis_tgt = [pair_vertex(a.basis_tgt[i], b.basis_tgt[j])
                 for i in range(a.dim) for j in range(b.dim)]

    def outer(x: dict, y: dict) -> dict:
        return {pair(i, j): F.mul(ci, cj) for i, ci in x.items() for j, cj in y.items()}

    dim = a.dim * b.dim
    mult = [[None] * dim for _ in range(dim)]
    for i1 in range(a.dim):
        for j1 in range(b.dim):
            r = pair(i1, j1)
            for i2 in range(a.dim):
                pa = a.mult[i1][i2]
                for j2 in range(b.dim):
                    mult[r][pair(i2, j2)] = outer(pa, b.mult[j1][j2]) if pa else {}
    idempotents = []
    for la in range(a.nvert):
        for lb in range(b.nvert):
            idempotents.append(outer(a.idempotents[la], b.idempotents[lb]))
    # rad(A (x) B) = rad A (x) B + A (x) rad B; a spanning set suffices here
    radical = [outer(r, {j: F.one}) for r in a.radical for j in range(b.dim)]
    radical += [outer({i: F.one}, s) for i in range(a.dim) for s in b.radical]
    gens = []
    for (v, s, t) in a.gens:
        for lb in range(b.nvert):
            gens.append((outer(v, b.idempotents[lb]), pair_vertex(s, lb), pair_vertex(t, lb)))
    for (w, s, t) in b.gens:
        for la in range(a.nvert):
            gens.append((outer(a.idempotents[la], w), pair_vertex(la, s), pair_vertex(la, t)))
    return Algebra(F, vertex_labels, order, labels, basis_src, basis_tgt, mult,
                   idempotents, radical, gens, origin="tensor")


# ---------------------------------------------------------------------------
# recovering a quiver presentation from an abstract algebra
# ---------------------------------------------------------------------------


def _block_split(a: Algebra, vec: dict) -> dict[tuple[int, int], dict]:
    """Decompose an element into its e_t * x * e_s homogeneous components."""
    F = a.field
    out: dict[tuple[int, int], dict] = {}
    for k, c in vec.items():
        out.setdefault((a.basis_src[k], a.basis_tgt[k]), {})[k] = c
    return out


def _dense(F: Field, vec: dict, n: int) -> list:
    return sv_dense(F, vec, n)


def quiver_presentation_of(a: Algebra, with_lifts: bool = False):
    """Recover a quiver with relations presenting a basic algebra.

    Arrows per pair (s, t) are deterministic echelon lifts of a basis of
    e_t (rad/rad^2) e_s; relations are a minimal generating set of the
    kernel of the induced surjection from the path algebra, produced degree
    by degree.  Raises if the algebra is not basic ("condense first").
    """
    from .exactlin import Echelon, Matrix, solve as lin_solve

    F = a.field
    n = a.dim
    # radical span, block by block
    rad_blocks: dict[tuple[int, int], Echelon] = {}
    rad_vectors_by_block: dict[tuple[int, int], list[dict]] = {}
    total_rad = Echelon(F, n)
    for v in a.radical:
        for blk, comp in _block_split(a, v).items():
            dense = _dense(F, comp, n)
            ech = rad_blocks.setdefault(blk, Echelon(F, n))
            if ech.insert(dense) is not None:
                rad_vectors_by_block.setdefault(blk, []).append(comp)
            total_rad.insert(dense)
    # basic check: the semisimple quotient must be one k per vertex
    if total_rad.rank != n - a.nvert:
        raise InputError("algebra is not basic: condense first")
    for (s, t), ech in rad_blocks.items():
        block_dim = sum(1 for k in range(n)
                        if a.basis_src[k] == s and a.basis_tgt[k] == t)
        expected = block_dim - (1 if s == t else 0)
        if ech.rank != expected:
            raise InputError("algebra is not basic: condense first")
    # rad^2, block by block
    rad_sq: dict[tuple[int, int], Echelon] = {}
    all_rad = [comp for comps in rad_vectors_by_block.values() for comp in comps]
    for u in all_rad:
        for v in all_rad:
            prod = a.mul_vec(u, v)
            if not prod:
                continue
            for blk, comp in _block_split(a, prod).items():
                rad_sq.setdefault(blk, Echelon(F, n)).insert(_dense(F, comp, n))
    # arrows: lifts of rad/rad^2 per block
    arrows: list[Arrow] = []
    lifts: list[dict] = []
    counter = 0
    for s in range(a.nvert):
        for t in range(a.nvert):
            blk = (s, t)
            if blk not in rad_vectors_by_block:
                continue
            probe = Echelon(F, n)
            if blk in rad_sq:
                for row in rad_sq[blk].rows:
                    probe.insert(row[:])
            for comp in rad_vectors_by_block[blk]:
                if probe.insert(_dense(F, comp, n)) is not None:
                    arrows.append(Arrow(f"a{counter}", a.vertex_labels[s],
                                        a.vertex_labels[t]))
                    lifts.append(dict(comp))
                    counter += 1
    quiver = Quiver(list(a.vertex_labels), arrows)

    # relations: kernel of path evaluation, generated degree by degree
    ideal = MonomialEchelon(F, _path_key)
    pool_prev: list[dict] = []
    kept: list[tuple] = [(v, ()) for v in range(a.nvert)]
    kept_eval: list[list] = [_dense(F, a.idempotents[v], n) for v in range(a.nvert)]
    eval_cache: dict = {(v, ()): _dense(F, a.idempotents[v], n)
                        for v in range(a.nvert)}
    frontier = [(v, ()) for v in range(a.nvert)]
    relations_out: list[list[tuple]] = []
    degree = 0
    # once the frontier is empty no further kernel generators can appear:
    # every longer path extends a path that is already a recorded leading
    # monomial, so its kernel relation is a consequence
    while frontier:
        degree += 1
        if degree > n + 2:
            raise InputError("presentation recovery did not stabilize")
        # close the known relation ideal by one-arrow extensions
        pool_now: list[dict] = []
        for v in pool_prev:
            for arr in range(len(arrows)):
                for side in ("left", "right"):
                    ext = _extend(quiver, v, arr, side)
                    if ext:
                        red = ideal.reduce(ext)
                        if red and ideal.insert(dict(red)) is not None:
                            pool_now.append(red)
        new_frontier = []
        for path in frontier:
            tgt = _path_tgt(quiver, path)
            pvec = eval_cache[path]
            for arr in quiver.arrows_from(tgt):
                ext = (path[0], path[1] + (arr,))
                if ideal.is_pivot(ext):
                    continue
                w = [F.zero] * n
                lift = lifts[arr]
                # evaluate: appending the arrow multiplies by its lift
                sparse_p = {k: c for k, c in enumerate(pvec) if not F.is_zero(c)}
                val = a.mul_vec(lift, sparse_p)
                w = _dense(F, val, n)
                eval_cache[ext] = w
                cols = Matrix(F, [[kept_eval[j][r] for j in range(len(kept))]
                                  for r in range(n)])
                coords = lin_solve(cols, w)
                if coords is None:
                    kept.append(ext)
                    kept_eval.append(w)
                    new_frontier.append(ext)
                else:
                    relvec = {ext: F.one}
                    for j, c in enumerate(coords):
                        if not F.is_zero(c):
                            sv_axpy(F, relvec, {kept[j]: F.one}, c)
                    red = ideal.reduce(relvec)
                    if red:
                        relations_out.append(_relation_terms(F, quiver, dict(red)))
                        ideal.insert(dict(red))
                        pool_now.append(red)
        frontier = new_frontier
        pool_prev = pool_now
    if len(kept) != n:
        raise InputError("presentation recovery is incomplete (not basic?)")
    pres = Presentation(quiver,
                        relations_out,
                        list(a.order), F,
                        max_path_length=max(32, degree + 2))
    if with_lifts:
        return pres, lifts
    return pres


def _relation_terms(F: Field, quiver: Quiver, vec: dict) -> list[tuple]:
    # normalize so the leading (longest, lexicographically largest) term is 1
    lead = max(vec, key=_path_key)
    inv = F.inv(vec[lead])
    terms = []
    for path in sorted(vec, key=_path_key, reverse=True):
        coeff = F.mul(inv, vec[path])
        terms.append((F.to_str(coeff),
                      tuple(quiver.arrows[i].name for i in path[1])))
    return terms
