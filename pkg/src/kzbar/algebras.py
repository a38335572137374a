"""Algebras over an operad, and free algebras with their coinvariant
arity parts.

An algebra is a carrier complex per sort plus structure constants
theta(x_1..x_n; c) on basis tuples.  Sign conventions put the operad
label last: theta is evaluated on x_1 (x) ... (x) x_n (x) c, and every
axiom's sign is the Koszul cost of reshuffling that tensor order.

Free algebras quotient X^{(x)n} (x) C(n) by the diagonal symmetric group
action.  The quotient is computed as a cokernel by exact elimination;
when the operad action is free and monomial an orbit walk gives the same
part cheaper, and both routes are exposed.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import product as iproduct

from kzbar.complexes import ChainComplex, ChainMap
from kzbar.fields import Scalar
from kzbar.linalg import Vec, echelon, vec_axpy, vec_scale
from kzbar.operads import CapExceeded, Operad, OperadElement, Sig


class AlgebraError(ValueError):
    pass


def koszul_sign_of_crossing(field, deg_a: int, deg_b: int) -> Scalar:
    return -field.one if (deg_a % 2 and deg_b % 2) else field.one


@dataclass
class AlgebraElement:
    algebra: "Algebra"
    sort: str
    vec: Vec

    def is_zero(self) -> bool:
        return not self.vec

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        if self.sort != other.sort:
            raise AlgebraError("cannot add elements of different sorts")
        return AlgebraElement(self.algebra, self.sort,
                              vec_axpy(self.vec, self.algebra.field.one, other.vec))

    def scale(self, s: Scalar) -> "AlgebraElement":
        return AlgebraElement(self.algebra, self.sort, vec_scale(self.vec, s))


class Algebra:
    """Operad algebra with basis-level structure constants.

    theta_rule(c_sig, c_name, xs) -> Vec over the output sort's carrier,
    xs a tuple of carrier basis names matching c's input sorts.
    """

    def __init__(self, operad: Operad, carrier: dict[str, ChainComplex],
                 theta_rule, name: str = "algebra") -> None:
        self.operad = operad
        self.field = operad.field
        self.carrier = dict(carrier)
        self._theta_rule = theta_rule
        self.name = name
        self._theta_memo: dict = {}
        for srt, comp in self.carrier.items():
            if comp.field != self.field:
                raise AlgebraError(f"carrier of sort {srt!r} over wrong field")

    def carrier_degree(self, sort: str, name) -> int:
        return self.carrier[sort].degrees[name]

    def element(self, sort: str, vec: Vec) -> AlgebraElement:
        return AlgebraElement(self, sort, dict(vec))

    def basis_element(self, sort: str, name) -> AlgebraElement:
        if name not in self.carrier[sort].degrees:
            raise AlgebraError(f"{name!r} is not a basis name of sort {sort!r}")
        return AlgebraElement(self, sort, {name: self.field.one})

    def theta_basis(self, c_sig: Sig, c_name, xs: tuple) -> Vec:
        ins, _ = c_sig
        if len(xs) != len(ins):
            raise AlgebraError(
                f"theta arity mismatch: {len(xs)} arguments for {c_sig}"
            )
        for x_name, srt in zip(xs, ins):
            if x_name not in self.carrier[srt].degrees:
                raise AlgebraError(
                    f"{x_name!r} is not a basis name of sort {srt!r}"
                )
        key = (c_sig, c_name, xs)
        hit = self._theta_memo.get(key)
        if hit is None:
            hit = self._theta_rule(c_sig, c_name, xs)
            self._theta_memo[key] = hit
        return hit

    def theta_eval(self, xs: list[AlgebraElement], c: OperadElement) -> AlgebraElement:
        ins, out = c.sig
        if len(xs) != len(ins):
            raise AlgebraError(f"theta arity mismatch: {len(xs)} arguments for {c.sig}")
        for x, srt in zip(xs, ins):
            if x.sort != srt:
                raise AlgebraError(f"sort mismatch: {x.sort!r} fed into {srt!r} slot")
        target: Vec = {}
        for c_name, cc in c.vec.items():
            for combo in iproduct(*(x.vec.items() for x in xs)):
                coeff = cc
                for _, cx in combo:
                    coeff = coeff * cx
                vec = self.theta_basis(c.sig, c_name, tuple(n for n, _ in combo))
                target = vec_axpy(target, coeff, vec)
        return AlgebraElement(self, out, target)


# ------------------------------------------------------------------ report


@dataclass
class AlgebraReport:
    algebra: str
    failures: list[str] = dc_field(default_factory=list)
    checks_run: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures


def _carrier_tuples(alg: Algebra, sorts: tuple[str, ...]):
    pools = [sorted(alg.carrier[s].basis(), key=str) for s in sorts]
    return iproduct(*pools)


def verify_algebra(alg: Algebra) -> AlgebraReport:
    """Exhaustive check of the action axioms on basis tuples in cap."""
    rep = AlgebraReport(algebra=alg.name)
    op = alg.operad
    F = alg.field

    # unit law
    for srt, comp in sorted(alg.carrier.items()):
        if srt not in op.unit_names:
            continue
        u = op.unit(srt)
        for name in comp.basis():
            got = alg.theta_eval([alg.basis_element(srt, name)], u)
            rep.checks_run += 1
            if got.vec != {name: F.one}:
                rep.failures.append(f"theta(x; 1) != x at sort {srt!r} {name!r}")

    # equivariance on adjacent transpositions
    for c_sig in op.signatures():
        ins, _ = c_sig
        n = len(ins)
        if n < 2:
            continue
        for c_name in op.components[c_sig].basis():
            for xs in _carrier_tuples(alg, ins):
                for k in range(1, n):
                    try:
                        ok = _check_action_equivariance(alg, c_sig, c_name, xs, k)
                    except CapExceeded:
                        continue
                    rep.checks_run += 1
                    if not ok:
                        rep.failures.append(
                            f"equivariance fails: c={c_sig}:{c_name!r} xs={list(xs)} s_{k}"
                        )

    # composition against gamma
    from kzbar.operads import _arity_tuples
    for c_sig in op.signatures():
        ins, _ = c_sig
        for c_name in op.components[c_sig].basis():
            for cs, _tot in _arity_tuples(op, op.cap, ins):
                flat_sorts = tuple(s for ci_sig, _ in cs for s in ci_sig[0])
                for xs in _carrier_tuples(alg, flat_sorts):
                    try:
                        ok = _check_action_composition(alg, c_sig, c_name, cs, xs)
                    except CapExceeded:
                        continue
                    rep.checks_run += 1
                    if not ok:
                        rep.failures.append(
                            f"composition fails: c={c_sig}:{c_name!r} "
                            f"cs={[n for _, n in cs]} xs={list(xs)}"
                        )

    # Leibniz
    for c_sig in op.signatures():
        ins, _ = c_sig
        for c_name in op.components[c_sig].basis():
            for xs in _carrier_tuples(alg, ins):
                try:
                    ok = _check_action_leibniz(alg, c_sig, c_name, xs)
                except CapExceeded:
                    continue
                rep.checks_run += 1
                if not ok:
                    rep.failures.append(
                        f"Leibniz fails: c={c_sig}:{c_name!r} xs={list(xs)}"
                    )
    return rep


def _check_action_equivariance(alg: Algebra, c_sig: Sig, c_name, xs, k: int) -> bool:
    op = alg.operad
    F = alg.field
    ins, _ = c_sig
    sc_sig, sc_vec = op.apply_transposition(c_sig, k, {c_name: F.one})
    swapped = list(xs)
    swapped[k - 1], swapped[k] = swapped[k], swapped[k - 1]
    lhs: Vec = {}
    for nm, cf in sc_vec.items():
        lhs = vec_axpy(lhs, cf, alg.theta_basis(sc_sig, nm, tuple(swapped)))
    da = alg.carrier_degree(ins[k - 1], xs[k - 1])
    db = alg.carrier_degree(ins[k], xs[k])
    sgn = koszul_sign_of_crossing(F, da, db)
    rhs_vec = alg.theta_basis(c_sig, c_name, tuple(xs))
    rhs = {n: sgn * c for n, c in rhs_vec.items()}
    return lhs == rhs


def _check_action_composition(alg: Algebra, c_sig: Sig, c_name, cs, xs) -> bool:
    op = alg.operad
    F = alg.field
    c = op.basis_element(c_sig, c_name)
    c_els = [op.basis_element(s, n) for s, n in cs]
    blocks = []
    pos = 0
    for ci_sig, _ in cs:
        w = len(ci_sig[0])
        blocks.append(xs[pos:pos + w])
        pos += w
    inner = [
        alg.element(ci_sig[1], alg.theta_basis(ci_sig, ci_name, tuple(blk)))
        for (ci_sig, ci_name), blk in zip(cs, blocks)
    ]
    lhs = alg.theta_eval(inner, c)
    try:
        comp = op.gamma(c_els, c)
    except CapExceeded:
        return True
    flat_sorts = tuple(s for ci_sig, _ in cs for s in ci_sig[0])
    flat_x = [alg.basis_element(s, n) for s, n in zip(flat_sorts, xs)]
    rhs = alg.theta_eval(flat_x, comp)
    # Koszul cost of pulling each c_i left past the later x blocks
    sgn = F.one
    block_degs = [
        sum(alg.carrier_degree(s, n) for s, n in zip(ci_sig[0], blk))
        for (ci_sig, _), blk in zip(cs, blocks)
    ]
    for i, (ci_sig, ci_name) in enumerate(cs):
        ci_deg = op.degree_of(ci_sig, ci_name)
        later = sum(block_degs[i + 1:])
        if ci_deg % 2 and later % 2:
            sgn = -sgn
    return lhs.vec == {n: sgn * c0 for n, c0 in rhs.vec.items()}


def _check_action_leibniz(alg: Algebra, c_sig: Sig, c_name, xs) -> bool:
    op = alg.operad
    F = alg.field
    ins, out = c_sig
    lhs = alg.carrier[out].apply_d(alg.theta_basis(c_sig, c_name, tuple(xs)))
    rhs: Vec = {}
    sgn = F.one
    for i, x_name in enumerate(xs):
        dx = alg.carrier[ins[i]].apply_d({x_name: F.one})
        for nm, cf in dx.items():
            terms = list(xs)
            terms[i] = nm
            rhs = vec_axpy(rhs, sgn * cf, alg.theta_basis(c_sig, c_name, tuple(terms)))
        if alg.carrier_degree(ins[i], x_name) % 2:
            sgn = -sgn
    dc = op.components[c_sig].apply_d({c_name: F.one})
    for nm, cf in dc.items():
        rhs = vec_axpy(rhs, sgn * cf, alg.theta_basis(c_sig, nm, tuple(xs)))
    return lhs == rhs


# ------------------------------------------------------------- free algebras


@dataclass
class FreePart:
    """One arity part of a free algebra: representative basis, projection
    from the un-quotiented space, and a section back into it."""

    arity: int
    out_sort: str
    complex: ChainComplex
    big_degrees: dict
    project: object  # Vec over big names -> Vec over representatives
    section: object  # representative name -> big name


class FreeAlgebra:
    """Free algebra on generator complexes, arity parts built on demand."""

    def __init__(self, generators: dict[str, ChainComplex], operad: Operad,
                 method: str = "auto") -> None:
        if method not in ("auto", "elimination", "orbit"):
            raise AlgebraError(f"unknown coinvariant method {method!r}")
        self.generators = dict(generators)
        self.operad = operad
        self.field = operad.field
        self.method = method
        self._parts: dict = {}
        for srt, comp in self.generators.items():
            if comp.field != self.field:
                raise AlgebraError(f"generators of sort {srt!r} over wrong field")

    def _resolved_method(self) -> str:
        if self.method != "auto":
            return self.method
        return "orbit" if self.operad.certificate == "free-module" else "elimination"

    def _big_basis(self, n: int, out_sort: str):
        """Basis of the pre-quotient space: (sig, generator word, c name)."""
        out = []
        for sig in self.operad.arity_signatures(n):
            if sig[1] != out_sort:
                continue
            ins = sig[0]
            if any(s not in self.generators for s in ins):
                continue
            pools = [sorted(self.generators[s].basis(), key=str) for s in ins]
            for xw in iproduct(*pools):
                for c_name in sorted(self.operad.components[sig].basis(), key=str):
                    out.append((sig, xw, c_name))
        return out

    def _big_degree(self, name) -> int:
        sig, xw, c_name = name
        d = self.operad.degree_of(sig, c_name)
        for s, x in zip(sig[0], xw):
            d += self.generators[s].degrees[x]
        return d

    def _diagonal_swap(self, name, k: int) -> Vec:
        """Image of a big basis element under s_k, with Koszul sign."""
        sig, xw, c_name = name
        F = self.field
        da = self.generators[sig[0][k - 1]].degrees[xw[k - 1]]
        db = self.generators[sig[0][k]].degrees[xw[k]]
        sgn = koszul_sign_of_crossing(F, da, db)
        xw2 = list(xw)
        xw2[k - 1], xw2[k] = xw2[k], xw2[k - 1]
        sig2, cvec = self.operad.apply_transposition(sig, k, {c_name: F.one})
        return {(sig2, tuple(xw2), nm): sgn * cf for nm, cf in cvec.items()}

    def part(self, n: int, out_sort: str = "*") -> FreePart:
        key = (n, out_sort)
        hit = self._parts.get(key)
        if hit is not None:
            return hit
        big = self._big_basis(n, out_sort)
        method = self._resolved_method()
        if method == "orbit":
            part = self._part_by_orbit(n, out_sort, big)
        else:
            part = self._part_by_elimination(n, out_sort, big)
        self._parts[key] = part
        return part

    def _induced_complex(self, n, out_sort, big_degs, reps, project, section):
        d_cols = {}
        for r in reps:
            sig, xw, c_name = section(r)
            db: Vec = {}
            # differential of the generator word, Koszul signs left to right
            sgn = self.field.one
            for i, (s, x) in enumerate(zip(sig[0], xw)):
                dx = self.generators[s].apply_d({x: self.field.one})
                for nm, cf in dx.items():
                    xw2 = list(xw)
                    xw2[i] = nm
                    db = vec_axpy(db, sgn * cf, {(sig, tuple(xw2), c_name): self.field.one})
                if self.generators[s].degrees[x] % 2:
                    sgn = -sgn
            dc = self.operad.components[sig].apply_d({c_name: self.field.one})
            for nm, cf in dc.items():
                db = vec_axpy(db, sgn * cf, {(sig, xw, nm): self.field.one})
            col = project(db)
            if col:
                d_cols[r] = col
        degs = {r: big_degs[section(r)] for r in reps}
        return ChainComplex(self.field, degs, d_cols)

    def _part_by_elimination(self, n: int, out_sort: str, big) -> FreePart:
        big_degs = {name: self._big_degree(name) for name in big}
        relations = []
        for name in big:
            one = self.field.one
            for k in range(1, n):
                img = self._diagonal_swap(name, k)
                rel = vec_axpy({name: one}, -one, img)
                if rel:
                    relations.append(rel)
        ech = echelon(relations, self.field)
        pivots = set(ech.pivots)
        reps = [name for name in sorted(big, key=str) if name not in pivots]

        def project(vec: Vec) -> Vec:
            rem, _ = ech.reduce(vec)
            return rem

        def section(r):
            return r

        comp = self._induced_complex(n, out_sort, big_degs, reps, project, section)
        return FreePart(n, out_sort, comp, big_degs, project, section)

    def _part_by_orbit(self, n: int, out_sort: str, big) -> FreePart:
        big_degs = {name: self._big_degree(name) for name in big}
        rep_of: dict = {}
        dead: set = set()
        for start in sorted(big, key=str):
            if start in rep_of or start in dead:
                continue
            orbit = {start: self.field.one}
            frontier = [start]
            torsion = False
            while frontier:
                cur = frontier.pop()
                csgn = orbit[cur]
                for k in range(1, n):
                    img = self._diagonal_swap(cur, k)
                    if len(img) != 1:
                        raise AlgebraError(
                            "orbit method needs a monomial operad action"
                        )
                    (nm, cf), = img.items()
                    nsgn = csgn * cf
                    prev = orbit.get(nm)
                    if prev is None:
                        orbit[nm] = nsgn
                        frontier.append(nm)
                    elif prev != nsgn:
                        torsion = True
            if torsion and self.field.characteristic != 2:
                dead.update(orbit)
                continue
            rep = min(orbit, key=str)
            base = orbit[rep]
            # [x] = base/orbit[x] . [rep]; store orbit[x]/base, invert on use
            for nm, sgn in orbit.items():
                rep_of[nm] = (rep, base.inv() * sgn)
        reps = sorted({r for r, _ in rep_of.values()}, key=str)

        def project(vec: Vec) -> Vec:
            out: Vec = {}
            for nm, cf in vec.items():
                hit = rep_of.get(nm)
                if hit is None:
                    continue
                rep, sgn = hit
                out = vec_axpy(out, sgn.inv() * cf, {rep: self.field.one})
            return out

        def section(r):
            return r

        comp = self._induced_complex(n, out_sort, big_degs, reps, project, section)
        return FreePart(n, out_sort, comp, big_degs, project, section)


def free(generators, operad: Operad, method: str = "auto") -> FreeAlgebra:
    """Free algebra on a complex (single-sorted) or dict of complexes."""
    if isinstance(generators, ChainComplex):
        generators = {"*": generators}
    return FreeAlgebra(generators, operad, method)


def free_map(f: dict[str, ChainMap] | ChainMap, src: FreeAlgebra, dst: FreeAlgebra,
             n: int, out_sort: str = "*") -> ChainMap:
    """Arity part of the map free(X) -> free(Y) induced by degree-0 f."""
    if isinstance(f, ChainMap):
        f = {"*": f}
    sp = src.part(n, out_sort)
    dp = dst.part(n, out_sort)
    entries = {}
    for r in sp.complex.basis():
        sig, xw, c_name = sp.section(r)
        # expand f letter by letter; degree-0 maps cross without signs
        acc: Vec = {(sig, (), c_name): src.field.one}
        for s, x in zip(sig[0], xw):
            fx = f[s].entries.get(x, {})
            nxt: Vec = {}
            for (sg, w, cn), cf in acc.items():
                for ynm, yc in fx.items():
                    nxt = vec_axpy(nxt, cf * yc, {(sg, w + (ynm,), cn): src.field.one})
            acc = nxt
        col = dp.project(acc)
        if col:
            entries[r] = col
    return ChainMap(sp.complex, dp.complex, entries)


def monad_theta(fa: FreeAlgebra, parts_cap: int):
    """Algebra structure on the arity parts of a free algebra, given by
    composing operad labels; raises CapExceeded past the window."""
    op = fa.operad

    def theta_rule(c_sig, c_name, xs):
        # xs are (arity, rep) names in the summed carrier
        ins, out = c_sig
        total = 0
        bigs = []
        for (ar, rep), srt in zip(xs, ins):
            p = fa.part(ar, srt)
            bigs.append(p.section(rep))
            total += ar
        if total > min(op.cap, parts_cap):
            raise CapExceeded(f"free-algebra theta lands in arity {total}")
        sgn = fa.field.one
        word_degs = []
        for sig, xw, _ in bigs:
            word_degs.append(sum(fa.generators[s].degrees[x]
                                 for s, x in zip(sig[0], xw)))
        out_vec: Vec = {}
        cs = [op.basis_element(sig, cn) for sig, _, cn in bigs]
        comp = op.gamma(cs, op.basis_element(c_sig, c_name))
        for i, (sig, _, cn) in enumerate(bigs):
            cdeg = op.degree_of(sig, cn)
            later = sum(word_degs[i + 1:])
            if cdeg % 2 and later % 2:
                sgn = -sgn
        xw_all = tuple(x for _, xw, _ in bigs for x in xw)
        target = fa.part(total, out)
        for nm, cf in comp.vec.items():
            big_name = (comp.sig, xw_all, nm)
            out_vec = vec_axpy(out_vec, sgn * cf,
                               target.project({big_name: fa.field.one}))
        return {(total, r): c for r, c in out_vec.items()}

    return theta_rule


def free_as_algebra(fa: FreeAlgebra, parts_cap: int | None = None,
                    name: str = "free-algebra") -> Algebra:
    """Bundle the arity parts up to the cap into a verifiable Algebra."""
    cap = fa.operad.cap if parts_cap is None else min(parts_cap, fa.operad.cap)
    carrier = {}
    for srt in fa.operad.sorts:
        degs = {}
        d: dict = {}
        for n in range(0, cap + 1):
            p = fa.part(n, srt)
            for r in p.complex.basis():
                degs[(n, r)] = p.complex.degrees[r]
                col = p.complex.d.get(r)
                if col:
                    d[(n, r)] = {(n, r2): c for r2, c in col.items()}
        if degs:
            carrier[srt] = ChainComplex(fa.field, degs, d)
    return Algebra(fa.operad, carrier, monad_theta(fa, cap), name=name)
