"""Stratification layer: standard and costandard families, classification,
and certified filtration search.

Every membership claim "M has a filtration by the family C" is backed by a
FiltrationCertificate: an explicit ascending chain of action-stable
subspaces with an isomorphism label per subquotient, re-checkable by an
independent validator.  Non-membership is only ever asserted on a sound
obstruction (graded-dimension infeasibility, verified Hom/Ext pairing
tables, or projective-family cover mismatch); everything else surfaces as
UndecidedError.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field

from .errors import EngineError, NonSplitError, TheoremViolation, UndecidedError
from .exactlin import Echelon, Matrix, solve
from .homology import ext_dim
from .presentation import Algebra
from .repcat import (Module, ModuleMap, SubmoduleWitness, _combine, dualize,
                     hom_space, is_isomorphic, local_scalar, opposite_of,
                     projective_module, quotient_module, standard_objects,
                     submodule, top_data, trace, unit_vector)

SEARCH_BUDGET = 10000


# ---------------------------------------------------------------------------
# standard / costandard families
# ---------------------------------------------------------------------------


class StratFamily:
    """Delta, proper Delta, nabla, proper nabla, plus the (SS)-kernels."""

    def __init__(self, a: Algebra):
        self.algebra = a
        objs = standard_objects(a)
        self.P = objs["P"]
        self.L = objs["L"]
        self.I = objs["I"]
        self.Delta, self.DeltaBar, self.kernels = _standard_side(a)
        opp = opposite_of(a)
        d_opp, dbar_opp, _ = _standard_side(opp)
        self.Nabla = []
        self.NablaBar = []
        for lam in range(a.nvert):
            nb = dualize(d_opp[lam])
            nb.label = f"Nabla({a.vertex_labels[lam]})"
            self.Nabla.append(nb)
            nbb = dualize(dbar_opp[lam])
            nbb.label = f"NablaBar({a.vertex_labels[lam]})"
            self.NablaBar.append(nbb)
        self.opp_Delta = d_opp
        self.opp_DeltaBar = dbar_opp
        _check_family_invariants(self)

    def all_modules(self) -> dict[str, list[Module]]:
        return {"P": self.P, "L": self.L, "I": self.I, "Delta": self.Delta,
                "DeltaBar": self.DeltaBar, "Nabla": self.Nabla,
                "NablaBar": self.NablaBar}


def _standard_side(a: Algebra):
    """Delta(lam) = P(lam)/Tr(higher P), DeltaBar(lam) = Delta mod radical endos."""
    objs = standard_objects(a)
    P = objs["P"]
    F = a.field
    deltas, dbars, kernels = [], [], []
    for lam in range(a.nvert):
        higher = [P[mu] for mu in a.higher_than(lam)]
        if higher:
            ker = trace(higher, P[lam])
        else:
            ker = SubmoduleWitness(P[lam], [])
        delta, _ = quotient_module(P[lam], ker,
                                   label=f"Delta({a.vertex_labels[lam]})")
        kernels.append(ker)
        deltas.append(delta)
        dbars.append(_proper_quotient(delta, f"DeltaBar({a.vertex_labels[lam]})"))
    return deltas, dbars, kernels


def _proper_quotient(delta: Module, label: str) -> Module:
    """Quotient by the images of all radical endomorphisms."""
    a = delta.algebra
    F = a.field
    ends = hom_space(delta, delta)
    vectors = []
    for f in ends:
        c = local_scalar(F, f.matrix)
        if c is None:
            raise NonSplitError("End(Delta) has an irreducible minimal factor: "
                                "change field")
        for col in range(delta.total):
            v = [F.sub(f.matrix.data[r][col],
                       c if r == col else F.zero) for r in range(delta.total)]
            vectors.append(v)
    w = SubmoduleWitness(delta, vectors)
    out, _ = quotient_module(delta, w, label=label)
    return out


def _check_family_invariants(fam: StratFamily) -> None:
    a = fam.algebra
    for lam in range(a.nvert):
        top_counts, _ = top_data(fam.Delta[lam])
        if top_counts[lam] != 1 or sum(top_counts) != 1:
            raise EngineError("Delta(lambda) does not have simple top L(lambda)")
        allowed = set(a.lower_than(lam)) | {lam}
        for mu in range(a.nvert):
            if mu not in allowed and fam.Delta[lam].dims[mu] != 0:
                raise EngineError("Delta(lambda) has a factor above lambda")


# ---------------------------------------------------------------------------
# filtration certificates
# ---------------------------------------------------------------------------


@dataclass
class FiltrationCertificate:
    """Chain 0 = M_0 < M_1 < ... < M_k = M with labelled subquotients."""

    module: Module
    family: list[Module]
    chain: list[SubmoduleWitness]          # M_1 ... M_k (the last spans M)
    labels: list[int]                      # family index of M_j / M_{j-1}

    @property
    def length(self) -> int:
        return len(self.chain)

    def layer_multiset(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for idx in self.labels:
            out[idx] = out.get(idx, 0) + 1
        return out

    def to_json(self) -> dict:
        F = self.module.algebra.field
        return {
            "module": self.module.label,
            "layers": [self.family[i].label for i in self.labels],
            "chain": [[[F.to_str(x) for x in v] for v in w.vectors]
                      for w in self.chain],
        }


def chain_subquotient(M: Module, lower: SubmoduleWitness | None,
                      upper: SubmoduleWitness) -> Module:
    """The module upper/lower inside M."""
    sub, _ = submodule(M, upper)
    if lower is None or lower.dim == 0:
        return sub
    coords = []
    for v in lower.vectors:
        c = upper.echelon.coordinates(v)
        if c is None:
            raise EngineError("certificate chain is not nested")
        coords.append(c)
    w = SubmoduleWitness(sub, coords)
    quo, _ = quotient_module(sub, w)
    return quo


def validate_certificate(cert: FiltrationCertificate, seed: int = 0) -> None:
    """Independent re-check: stability, nesting, and subquotient isos."""
    M = cert.module
    if len(cert.chain) != len(cert.labels):
        raise EngineError("certificate shape mismatch")
    if not cert.chain:
        if M.total != 0:
            raise EngineError("empty chain for a nonzero module")
        return
    prev = None
    prev_dim = 0
    for w in cert.chain:
        if not w.is_action_stable():
            raise EngineError("certificate step is not action-stable")
        if w.dim <= prev_dim:
            raise EngineError("certificate chain is not strictly increasing")
        if prev is not None:
            for v in prev.vectors:
                if not w.contains(v):
                    raise EngineError("certificate chain is not nested")
        prev, prev_dim = w, w.dim
    if cert.chain[-1].dim != M.total:
        raise EngineError("certificate chain does not end at the module")
    lower = None
    for w, idx in zip(cert.chain, cert.labels):
        layer = chain_subquotient(M, lower, w)
        if not is_isomorphic(layer, cert.family[idx], seed=seed):
            raise EngineError("certificate subquotient label fails")
        lower = w


# ---------------------------------------------------------------------------
# filtration search
# ---------------------------------------------------------------------------


def dimension_feasible(target: tuple[int, ...], blocks: list[tuple[int, ...]]) -> bool:
    """Is target a nonnegative integer combination of the block vectors?"""
    blocks = [b for b in blocks if any(b)]
    memo: dict[tuple[int, ...], bool] = {}

    def rec(rest: tuple[int, ...]) -> bool:
        if not any(rest):
            return True
        got = memo.get(rest)
        if got is not None:
            return got
        ok = False
        for b in blocks:
            if all(x >= y for x, y in zip(rest, b)):
                if rec(tuple(x - y for x, y in zip(rest, b))):
                    ok = True
                    break
        memo[rest] = ok
        return ok

    return rec(tuple(target))


class _Budget:
    def __init__(self, nodes: int):
        self.left = nodes

    def spend(self) -> bool:
        self.left -= 1
        return self.left >= 0


def _injection_candidates(C: Module, M: Module, seed: int):
    """Injective maps C -> M to try, deterministically ordered."""
    maps = hom_space(C, M)
    out = []
    seen_images: list[Echelon] = []
    F = C.algebra.field

    def keep(f: ModuleMap) -> bool:
        if f.rank() != C.total:
            return False
        img = Echelon(F, M.total)
        for c in range(C.total):
            img.insert([f.matrix.data[r][c] for r in range(M.total)])
        for known in seen_images:
            if all(known.contains(row) for row in img.rows):
                return False
        seen_images.append(img)
        return True

    for f in maps:
        if keep(f):
            out.append(f)
    rng = random.Random(3301 + seed)
    for _ in range(16):
        coeffs = [F.of(rng.randint(-3, 3)) for _ in maps]
        f = _combine(maps, coeffs)
        if keep(f):
            out.append(f)
    return out


def _surjection_candidates(M: Module, C: Module, seed: int):
    maps = hom_space(M, C)
    out = []
    kernels: list[Echelon] = []
    F = C.algebra.field

    def keep(f: ModuleMap) -> bool:
        if f.rank() != C.total:
            return False
        from .exactlin import kernel_basis
        ker = Echelon(F, M.total)
        for v in kernel_basis(f.matrix):
            ker.insert(v)
        for known in kernels:
            if all(known.contains(row) for row in ker.rows):
                return False
        kernels.append(ker)
        return True

    for f in maps:
        if keep(f):
            out.append(f)
    rng = random.Random(3307 + seed)
    for _ in range(16):
        coeffs = [F.of(rng.randint(-3, 3)) for _ in maps]
        f = _combine(maps, coeffs)
        if keep(f):
            out.append(f)
    return out


def find_filtration(M: Module, family: list[Module], direction: str = "top",
                    budget: int = SEARCH_BUDGET, seed: int = 0) -> FiltrationCertificate | None:
    """Search for a filtration certificate; None means budget-undecided.

    direction "top": peel quotients isomorphic to family members (standard
    side); "bottom": peel submodules (costandard side).
    """
    order = sorted(range(len(family)), key=lambda i: (-family[i].total, i))
    box = _Budget(budget)
    chain = _search_filtration(M, family, order, direction, box, seed)
    if chain is None:
        return None
    witnesses = [SubmoduleWitness(M, vecs) for vecs, _ in chain]
    labels = [idx for _, idx in chain]
    return FiltrationCertificate(M, family, witnesses, labels)


def _search_filtration(M: Module, family, order, direction, box, seed):
    """Returns ascending [(span vectors in M coords, family idx), ...] or None."""
    if M.total == 0:
        return []
    if not box.spend():
        return None
    if not dimension_feasible(tuple(M.dims),
                              [tuple(family[i].dims) for i in order]):
        return None
    F = M.algebra.field
    for idx in order:
        C = family[idx]
        if C.total == 0 or C.total > M.total:
            continue
        if direction == "bottom":
            for f in _injection_candidates(C, M, seed):
                img_vectors = [[f.matrix.data[r][c] for r in range(M.total)]
                               for c in range(C.total)]
                w = SubmoduleWitness(M, img_vectors)
                if w.dim != C.total or not w.is_action_stable():
                    continue
                quo, proj = quotient_module(M, w)
                rest = _search_filtration(quo, family, order, direction, box, seed)
                if rest is None:
                    continue
                chain = [(list(img_vectors), idx)]
                base = list(img_vectors)
                for vecs, lab in rest:
                    lifted = list(base)
                    for v in vecs:
                        x = solve(proj.matrix, v)
                        if x is None:
                            raise EngineError("projection preimage failed")
                        lifted.append(x)
                    chain.append((lifted, lab))
                    base = lifted
                return chain
        else:
            for f in _surjection_candidates(M, C, seed):
                from .exactlin import kernel_basis
                kvecs = kernel_basis(f.matrix)
                w = SubmoduleWitness(M, kvecs)
                sub, incl = submodule(M, w)
                rest = _search_filtration(sub, family, order, direction, box, seed)
                if rest is None:
                    continue
                chain = []
                for vecs, lab in rest:
                    mapped = [incl.matrix.apply(v) for v in vecs]
                    chain.append((mapped, lab))
                full = [unit_vector(F, M.total, k) for k in range(M.total)]
                chain.append((full, idx))
                return chain
    return None


# ---------------------------------------------------------------------------
# pairing tables and sound obstructions
# ---------------------------------------------------------------------------


def _pairing_verified(fam: StratFamily, kind: str) -> bool:
    """Verify Hom(Delta, X(mu)) = delta and Ext^1(Delta, X(mu)) = 0.

    kind "proper-costandard" pairs Delta against NablaBar (counts Delta
    layers); kind "costandard" pairs DeltaBar against Nabla.
    """
    a = fam.algebra
    key = ("pairing", kind)
    cached = a.cache.get(key)
    if cached is not None:
        return cached
    if kind == "proper-costandard":
        lefts, rights = fam.Delta, fam.NablaBar
    else:
        lefts, rights = fam.DeltaBar, fam.Nabla
    ok = True
    for lam in range(a.nvert):
        for mu in range(a.nvert):
            want = 1 if lam == mu else 0
            if len(hom_space(lefts[lam], rights[mu])) != want:
                ok = False
            elif ext_dim(lefts[lam], rights[mu], 1) != 0:
                ok = False
            if not ok:
                break
        if not ok:
            break
    a.cache[key] = ok
    return ok


def delta_filtration_decision(fam: StratFamily, M: Module,
                              allowed: list[int] | None = None,
                              budget: int = SEARCH_BUDGET,
                              seed: int = 0) -> tuple[str, FiltrationCertificate | None]:
    """Decide M in F({Delta(mu): mu in allowed}); returns (verdict, cert).

    verdict is "yes" (with certificate), "no" (sound obstruction), or
    "undecided".
    """
    a = fam.algebra
    if allowed is None:
        allowed = list(range(a.nvert))
    family = [fam.Delta[mu] for mu in allowed]
    if M.total == 0:
        return "yes", FiltrationCertificate(M, family, [], [])
    if not dimension_feasible(tuple(M.dims), [tuple(f.dims) for f in family]):
        return "no", None
    if all(_is_projective_delta(fam, mu) for mu in allowed):
        verdict = _projective_family_decision(fam, M, allowed)
        if verdict == "no":
            return "no", None
    cert = find_filtration(M, family, direction="top", budget=budget, seed=seed)
    if cert is not None:
        return "yes", cert
    if _pairing_verified(fam, "proper-costandard"):
        for mu in range(a.nvert):
            if ext_dim(M, fam.NablaBar[mu], 1) != 0:
                return "no", None
        counts = [len(hom_space(M, fam.NablaBar[mu])) for mu in range(a.nvert)]
        if any(counts[mu] and mu not in allowed for mu in range(a.nvert)):
            return "no", None
        if sum(counts[mu] * fam.Delta[mu].total for mu in range(a.nvert)) != M.total:
            return "no", None
    return "undecided", None


def _is_projective_delta(fam: StratFamily, mu: int) -> bool:
    return fam.Delta[mu].total == fam.P[mu].total


def _projective_family_decision(fam: StratFamily, M: Module, allowed: list[int]) -> str:
    """When every allowed Delta is projective, membership means M is their sum."""
    counts, _ = top_data(M)
    for lam in range(fam.algebra.nvert):
        if counts[lam] and lam not in allowed:
            return "no"
    want = sum(counts[lam] * fam.P[lam].total for lam in range(fam.algebra.nvert))
    return "yes" if want == M.total else "no"


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


@dataclass
class Classification:
    is_SSS: bool
    is_properly_stratified: bool
    is_quasi_hereditary: bool
    ss_certificates: dict[str, FiltrationCertificate | None] = dc_field(default_factory=dict)
    ps_certificates: dict[str, FiltrationCertificate | None] = dc_field(default_factory=dict)
    notes: list[str] = dc_field(default_factory=list)

    def to_json(self, with_certs: bool = False) -> dict:
        out = {
            "is_SSS": self.is_SSS,
            "is_properly_stratified": self.is_properly_stratified,
            "is_quasi_hereditary": self.is_quasi_hereditary,
            "notes": list(self.notes),
        }
        if with_certs:
            out["ss_certificates"] = {k: (v.to_json() if v else None)
                                      for k, v in self.ss_certificates.items()}
            out["ps_certificates"] = {k: (v.to_json() if v else None)
                                      for k, v in self.ps_certificates.items()}
        return out


def strat_family(a: Algebra) -> StratFamily:
    cached = a.cache.get("strat_family")
    if cached is None:
        cached = StratFamily(a)
        a.cache["strat_family"] = cached
    return cached


def classify(a: Algebra, budget: int = SEARCH_BUDGET, seed: int = 0) -> Classification:
    """(SS), (PS), (QH) with certificates; undecided raises, never guesses."""
    cached = a.cache.get("classification")
    if cached is not None:
        return cached
    fam = strat_family(a)
    ss_certs: dict[str, FiltrationCertificate | None] = {}
    is_sss = True
    for lam in range(a.nvert):
        label = a.vertex_labels[lam]
        higher = a.higher_than(lam)
        ker = fam.kernels[lam]
        kmod, _ = submodule(fam.P[lam], ker, label=f"K({label})")
        verdict, cert = delta_filtration_decision(fam, kmod, allowed=higher,
                                                  budget=budget, seed=seed)
        if verdict == "undecided":
            raise UndecidedError(
                f"(SS) undecided at lambda={label}",
                diagnostics={"kernel_dims": kmod.dims})
        ss_certs[label] = cert
        if verdict == "no":
            is_sss = False
    ps_certs: dict[str, FiltrationCertificate | None] = {}
    is_ps = is_sss
    is_qh = is_sss
    for lam in range(a.nvert):
        label = a.vertex_labels[lam]
        delta, dbar = fam.Delta[lam], fam.DeltaBar[lam]
        if delta.total != dbar.total:
            is_qh = False
    for lam in range(a.nvert):
        if not is_sss:
            break
        label = a.vertex_labels[lam]
        delta, dbar = fam.Delta[lam], fam.DeltaBar[lam]
        if delta.total == dbar.total:
            cert = FiltrationCertificate(
                delta, [dbar],
                [SubmoduleWitness(delta, [unit_vector(a.field, delta.total, k)
                                          for k in range(delta.total)])], [0])
            ps_certs[label] = cert
            continue
        verdict, cert = _proper_standard_decision(fam, lam, budget, seed)
        if verdict == "undecided":
            raise UndecidedError(f"(PS) undecided at lambda={label}")
        ps_certs[label] = cert
        if verdict == "no":
            is_ps = False
    out = Classification(is_sss, is_ps and is_sss, is_qh and is_sss,
                         ss_certs, ps_certs)
    if out.is_quasi_hereditary and not out.is_properly_stratified:
        raise TheoremViolation("QH implies properly stratified")
    a.cache["classification"] = out
    return out


def _proper_standard_decision(fam: StratFamily, lam: int, budget: int, seed: int):
    """Delta(lam) in F({DeltaBar(lam)})?"""
    a = fam.algebra
    delta, dbar = fam.Delta[lam], fam.DeltaBar[lam]
    if dbar.total == 0:
        return "no", None
    if delta.total % dbar.total != 0 or not dimension_feasible(
            tuple(delta.dims), [tuple(dbar.dims)]):
        return "no", None
    cert = find_filtration(delta, [dbar], direction="top", budget=budget, seed=seed)
    if cert is not None:
        return "yes", cert
    if _pairing_verified(fam, "costandard"):
        for mu in range(a.nvert):
            if ext_dim(delta, fam.Nabla[mu], 1) != 0:
                return "no", None
            want = len(hom_space(delta, fam.Nabla[mu]))
            if mu != lam and want != 0:
                return "no", None
    return "undecided", None
