"""The augmented bar construction on labeled trees.

An element is spanned by (canonical tree, labels): leaves carry carrier
basis names, non-leaf vertices carry operad basis names for the
component matching their children.  The attached sign word is the full
ascending e-product over non-leaf vertices (root included) times f_i for
every odd-parity vertex; a basis term stores it with sign +1, and every
operation pushes its signs through the word calculus, so Koszul
reordering costs never need separate bookkeeping.

The differential has three summand families: contract an inner edge and
compose the two operad labels, contract a fully-leafed vertex into a new
leaf through the algebra action, or apply the internal differential at
one vertex.  The homotopy grafts a unit-labeled root on top.  Both are
certified by d.d = 0 and dh + hd = Id elementwise in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct

from kzbar.algebras import Algebra
from kzbar.complexes import ChainComplex, ChainMap, direct_sum
from kzbar.fields import Scalar
from kzbar.linalg import Vec
from kzbar.operads import CapExceeded, OperadElement
from kzbar.signs import SignWord, left_mul_f, multiply, partial_e, relabel, word
from kzbar.trees import (
    Tree,
    canonical_form,
    child_index,
    edge_contract,
    encode,
    enumerate_trees,
    graft,
    leaf_contract,
    validate,
)


class BarError(ValueError):
    pass


BarKey = tuple  # (Tree, labels tuple indexed by vertex)
BarVec = dict  # BarKey -> Scalar


def _is_bare(key: BarKey) -> bool:
    t, _ = key
    return t.n == 1 and 1 in t.L


def _key_order(key: BarKey):
    t, labels = key
    return (t.n, str(encode(t)), str(t.s), str(sorted(t.L)), str(labels))


@dataclass(frozen=True)
class BarTerm:
    """One basis element with its derived word, for display and checks."""

    tree: Tree
    labels: tuple
    word: SignWord
    degree: int


class BarComplex:
    """The augmented bar construction of an algebra over its operad."""

    def __init__(self, algebra: Algebra, name: str = "bar") -> None:
        self.algebra = algebra
        self.operad = algebra.operad
        self.field = algebra.field
        self.name = name

    # ----------------------------------------------------------- structure

    def _sort_of(self, t: Tree, v: int) -> str:
        return t.sort_of(v) if t.sorts is not None else "*"

    def _component_sig(self, t: Tree, v: int):
        ins = tuple(self._sort_of(t, c) for c in t.children(v))
        return (ins, self._sort_of(t, v))

    def label_degree(self, t: Tree, v: int, label) -> int:
        if t.is_leaf(v):
            return self.algebra.carrier[self._sort_of(t, v)].degrees[label]
        return self.operad.degree_of(self._component_sig(t, v), label)

    def degree_of(self, t: Tree, labels: tuple) -> int:
        total = len(t.non_leaves())
        for v in range(1, t.n + 1):
            total += self.label_degree(t, v, labels[v - 1])
        return total

    def basis_word(self, t: Tree, labels: tuple) -> SignWord:
        fs = tuple(
            v for v in range(1, t.n + 1)
            if self.label_degree(t, v, labels[v - 1]) % 2
        )
        return word(tuple(t.non_leaves()), fs)

    def term(self, t: Tree, labels: tuple) -> BarTerm:
        return BarTerm(t, labels, self.basis_word(t, labels),
                       self.degree_of(t, labels))

    def check_key(self, key: BarKey) -> None:
        """Validate the redundantly stored invariants on a basis key."""
        t, labels = key
        if len(labels) != t.n:
            raise BarError(f"label count {len(labels)} for a {t.n}-vertex tree")
        for v in range(1, t.n + 1):
            srt = self._sort_of(t, v)
            if t.is_leaf(v):
                carrier = self.algebra.carrier.get(srt)
                if carrier is None or labels[v - 1] not in carrier.degrees:
                    raise BarError(f"leaf {v} label {labels[v - 1]!r} unknown")
            else:
                sig = self._component_sig(t, v)
                comp = self.operad.component(sig)
                if comp is None or labels[v - 1] not in comp.degrees:
                    raise BarError(
                        f"vertex {v} label {labels[v - 1]!r} not in component {sig}"
                    )
        w = self.basis_word(t, labels)
        if set(w.es) != set(t.non_leaves()):
            raise BarError("e-support must cover exactly the non-leaf vertices")

    # ----------------------------------------------- transport, normal form

    def _monomial_perm(self, sig, pi: tuple, name):
        tgt_sig, vec = self.operad.perm_matrix(sig, pi)[name]
        del tgt_sig  # the destination vertex's children fix the signature
        if len(vec) != 1:
            raise BarError(
                "tree normalization needs a monomial symmetric action; "
                f"component {sig} acts non-monomially on {name!r}"
            )
        (nm, cf), = vec.items()
        return nm, cf

    def _transport(self, t_src: Tree, t_dst: Tree, sigma: tuple,
                   labels: tuple, w: SignWord, coeff: Scalar):
        """Carry (labels, word, coeff) through an intertwiner."""
        new_labels = [None] * t_dst.n
        for v in range(1, t_src.n + 1):
            lab = labels[v - 1]
            tv = sigma[v - 1]
            if t_src.is_leaf(v):
                new_labels[tv - 1] = lab
                continue
            cs = t_src.children(v)
            images = [sigma[c - 1] for c in cs]
            order = sorted(range(len(cs)), key=lambda i: images[i])
            pi = [0] * len(cs)
            for new_pos, old_pos in enumerate(order):
                pi[old_pos] = new_pos + 1
            if pi == list(range(1, len(cs) + 1)):
                new_labels[tv - 1] = lab
                continue
            nm, cf = self._monomial_perm(
                self._component_sig(t_src, v), tuple(pi), lab)
            coeff = coeff * cf
            new_labels[tv - 1] = nm
        w2 = relabel(w, lambda k: sigma[k - 1], target=t_dst)
        return tuple(new_labels), w2, coeff

    def _labeled_enc(self, t: Tree, labels: tuple, v: int):
        srt = self._sort_of(t, v)
        if t.is_leaf(v):
            return (0, srt, str(labels[v - 1]))
        kids = tuple(self._labeled_enc(t, labels, c) for c in t.children(v))
        return (1, srt, str(labels[v - 1]), kids)

    def _shape_enc(self, t: Tree, v: int):
        if t.is_leaf(v):
            return (0, self._sort_of(t, v))
        return (1, self._sort_of(t, v),
                tuple(self._shape_enc(t, c) for c in t.children(v)))

    def _subtree_sizes(self, t: Tree) -> list[int]:
        sizes = [1] * t.n
        for v in range(1, t.n + 1):
            if not t.is_leaf(v):
                sizes[v - 1] = 1 + sum(sizes[c - 1] for c in t.children(v))
        return sizes

    def _block_perm_at(self, t: Tree, v: int, order: list[int]) -> tuple:
        """The self-intertwiner moving v's child subtrees into the given
        order; order[i] names the old child position placed i-th.  Only
        equal-width blocks may move, which the callers guarantee."""
        sizes = self._subtree_sizes(t)
        cs = t.children(v)
        blocks = [(c - sizes[c - 1] + 1, c) for c in cs]
        sigma = list(range(1, t.n + 1))
        new_lo = blocks[0][0]
        for pos in order:
            lo, hi = blocks[pos]
            width = hi - lo + 1
            for off in range(width):
                sigma[lo - 1 + off] = new_lo + off
            new_lo += width
        return tuple(sigma)

    def normalize_term(self, t: Tree, w: SignWord, labels: tuple,
                       coeff: Scalar) -> BarVec:
        """Transport to the canonical labeled representative.

        The result does not depend on how the raw term was produced; a
        term fixed by a label-preserving symmetry of sign -1 is zero.
        """
        if w.sign == 0 or coeff.is_zero():
            return {}
        t_c, sigma1 = canonical_form(t)
        if t_c != t or sigma1 != tuple(range(1, t.n + 1)):
            labels, w, coeff = self._transport(t, t_c, sigma1, labels, w, coeff)
            t = t_c
            if w.sign == 0:
                return {}

        for v in range(1, t.n + 1):
            if t.is_leaf(v):
                continue
            cs = t.children(v)
            if len(cs) < 2:
                continue
            keys = [(self._shape_enc(t, c), self._labeled_enc(t, labels, c))
                    for c in cs]
            order = sorted(range(len(cs)), key=lambda i: keys[i])
            if order != list(range(len(cs))):
                sigma = self._block_perm_at(t, v, order)
                labels, w, coeff = self._transport(t, t, sigma, labels, w, coeff)
                if w.sign == 0:
                    return {}

            # minimize this vertex's label over swaps of equal siblings
            cs = t.children(v)
            encs = [self._labeled_enc(t, labels, c) for c in cs]
            gens = []
            for i in range(len(cs) - 1):
                if encs[i] == encs[i + 1]:
                    pi = list(range(1, len(cs) + 1))
                    pi[i], pi[i + 1] = pi[i + 1], pi[i]
                    swap = list(range(len(cs)))
                    swap[i], swap[i + 1] = swap[i + 1], swap[i]
                    sigma_g = self._block_perm_at(t, v, swap)
                    moved = relabel(w, lambda k: sigma_g[k - 1], target=t)
                    gens.append((tuple(pi), moved.sign * w.sign))
            if not gens:
                continue
            sig = self._component_sig(t, v)
            start = labels[v - 1]
            best_name, best_sign = start, self.field.one
            seen = {start: self.field.one}
            frontier = [(start, self.field.one)]
            while frontier:
                cur, csgn = frontier.pop()
                for pi, ws in gens:
                    nm, cf = self._monomial_perm(sig, pi, cur)
                    nsgn = csgn * cf * self.field.scalar(ws)
                    prev = seen.get(nm)
                    if prev is None:
                        seen[nm] = nsgn
                        frontier.append((nm, nsgn))
                        if str(nm) < str(best_name):
                            best_name, best_sign = nm, nsgn
                    elif prev != nsgn:
                        # one label reached with both signs: torsion, zero
                        return {}
            if best_name != labels[v - 1]:
                lab2 = list(labels)
                lab2[v - 1] = best_name
                labels = tuple(lab2)
                coeff = coeff * best_sign

        coeff = coeff * self.field.scalar(w.sign)
        base = self.basis_word(t, labels)
        if base.es != w.es or base.fs != w.fs:
            raise BarError(f"normalized word {w} disagrees with parities on {t}")
        if coeff.is_zero():
            return {}
        return {(t, labels): coeff}

    def normalize(self, t: Tree, w: SignWord, labels: tuple,
                  coeff: Scalar | None = None) -> BarVec:
        if coeff is None:
            coeff = self.field.one
        return self.normalize_term(t, w, labels, coeff)

    def basis_vector(self, t: Tree, labels: tuple) -> BarVec:
        return self.normalize_term(t, self.basis_word(t, labels), labels,
                                   self.field.one)

    # ------------------------------------------------------------ operations

    def _add_terms(self, acc: BarVec, terms: BarVec, scale: Scalar) -> None:
        for key, c in terms.items():
            coeff = scale * c
            cur = acc.get(key)
            coeff = coeff if cur is None else cur + coeff
            if coeff.is_zero():
                acc.pop(key, None)
            else:
                acc[key] = coeff

    def differential_key(self, key: BarKey) -> BarVec:
        t, labels = key
        w = self.basis_word(t, labels)
        out: BarVec = {}
        nl = set(t.non_leaves())

        # contract the edge above q, composing q into its parent's slot
        for q in sorted(nl):
            if q == t.n:
                continue
            parent = t.parent(q)
            wit = edge_contract(t, q)
            dw = partial_e(parent, w)
            dw = relabel(dw, lambda k: wit.rho[k - 1], target=wit.result)
            if dw.sign == 0:
                continue
            x_q = self.operad.basis_element(
                self._component_sig(t, q), labels[q - 1])
            x_p = self.operad.basis_element(
                self._component_sig(t, parent), labels[parent - 1])
            try:
                merged = self.operad.gamma_j(child_index(t, q), x_q, x_p)
            except CapExceeded:
                # the merged vertex needs a component beyond the cap, so the
                # target lies outside the materialised window; drop it like
                # any other out-of-window term
                continue
            lab2 = [labels[wit.tau[r - 1] - 1] for r in range(1, wit.result.n + 1)]
            spot = wit.rho[q - 1] - 1
            for nm, cf in sorted(merged.vec.items(), key=lambda kv: str(kv[0])):
                lab2[spot] = nm
                self._add_terms(out, self.normalize_term(
                    wit.result, dw, tuple(lab2), self.field.one), cf)

        # contract a fully-leafed vertex into a new leaf via the action
        for j in sorted(nl):
            cs = t.children(j)
            if any(c not in t.L for c in cs):
                continue
            i = j - len(cs)
            wit = leaf_contract(t, i, j)
            dw = partial_e(j, w)
            dw = relabel(dw, lambda k: wit.rho[k - 1], target=wit.result)
            if dw.sign == 0:
                continue
            c_el = self.operad.basis_element(
                self._component_sig(t, j), labels[j - 1])
            xs = [self.algebra.basis_element(self._sort_of(t, c), labels[c - 1])
                  for c in cs]
            merged = self.algebra.theta_eval(xs, c_el)
            lab2 = [labels[wit.tau[r - 1] - 1] for r in range(1, wit.result.n + 1)]
            for nm, cf in sorted(merged.vec.items(), key=lambda kv: str(kv[0])):
                lab2[i - 1] = nm
                self._add_terms(out, self.normalize_term(
                    wit.result, dw, tuple(lab2), self.field.one), cf)

        # internal differential at one vertex
        for v in range(1, t.n + 1):
            if t.is_leaf(v):
                dlab = self.algebra.carrier[self._sort_of(t, v)].apply_d(
                    {labels[v - 1]: self.field.one})
            else:
                dlab = self.operad.components[self._component_sig(t, v)].apply_d(
                    {labels[v - 1]: self.field.one})
            if not dlab:
                continue
            dw = left_mul_f(v, w)
            for nm, cf in sorted(dlab.items(), key=lambda kv: str(kv[0])):
                lab2 = list(labels)
                lab2[v - 1] = nm
                self._add_terms(out, self.normalize_term(
                    t, dw, tuple(lab2), self.field.one), cf)
        return out

    def differential(self, vec: BarVec) -> BarVec:
        out: BarVec = {}
        for key, c in sorted(vec.items(), key=lambda kv: _key_order(kv[0])):
            self._add_terms(out, self.differential_key(key), c)
        return out

    def differential_quotient(self, vec: BarVec) -> BarVec:
        """The differential with bare-carrier terms killed."""
        return {k: c for k, c in self.differential(vec).items()
                if not _is_bare(k)}

    def homotopy_key(self, key: BarKey) -> BarVec:
        t, labels = key
        w = self.basis_word(t, labels)
        t2 = graft(t)
        unit = self.operad.unit_names[self._sort_of(t, t.n)]
        w2 = multiply(word((t2.n,), ()), w)
        return self.normalize_term(t2, w2, labels + (unit,), self.field.one)

    def homotopy(self, vec: BarVec) -> BarVec:
        out: BarVec = {}
        for key, c in sorted(vec.items(), key=lambda kv: _key_order(kv[0])):
            self._add_terms(out, self.homotopy_key(key), c)
        return out

    # ------------------------------------------------------------- basis

    def enumerate_basis(self, n_max: int, deg_lo: int | None = None,
                        deg_hi: int | None = None) -> list[BarKey]:
        """All canonical labeled trees on at most n_max vertices, filtered
        to the (unshifted) degree window; deterministic order."""
        sorts = self.operad.sorts if len(self.operad.sorts) > 1 else None
        cap_val = self.operad.max_nonzero_arity()
        min_label = 0
        for comp in self.algebra.carrier.values():
            min_label = min([min_label, *comp.degrees.values()])
        for comp in self.operad.components.values():
            min_label = min([min_label, *comp.degrees.values()])
        seen: set = set()
        for n in range(1, n_max + 1):
            for t0 in enumerate_trees(n):
                # valences and the non-leaf count are intertwiner
                # invariants, so these shape prunes are sort-agnostic
                nl = t0.non_leaves()
                if any(t0.valence(v) > cap_val for v in nl):
                    continue
                if deg_hi is not None and min_label >= 0 and len(nl) > deg_hi:
                    continue
                if sorts is None:
                    cands = [t0] if canonical_form(t0)[0] == t0 else []
                else:
                    cands = [
                        st
                        for assignment in iproduct(sorts, repeat=n)
                        for st in (Tree(t0.n, t0.s, t0.L, assignment),)
                        if canonical_form(st)[0] == st
                    ]
                for t in cands:
                    pools = []
                    for v in range(1, n + 1):
                        if t.is_leaf(v):
                            comp = self.algebra.carrier.get(self._sort_of(t, v))
                        else:
                            comp = self.operad.component(
                                self._component_sig(t, v))
                        if comp is None or not comp.degrees:
                            pools = None
                            break
                        pools.append(sorted(comp.degrees, key=str))
                    if pools is None:
                        continue
                    for combo in iproduct(*pools):
                        deg = self.degree_of(t, combo)
                        if deg_lo is not None and deg < deg_lo:
                            continue
                        if deg_hi is not None and deg > deg_hi:
                            continue
                        for key in self.basis_vector(t, combo):
                            seen.add(key)
        return sorted(seen, key=_key_order)

    def stable_degrees(self, n_max: int) -> list[int]:
        """Quotient degrees whose homology the n_max window reports
        faithfully.

        Needs a true arity bound on the operad: with arities unbounded,
        bar degree 1 already sees arbitrarily wide bushes and no window
        is ever complete, so the stable set is empty.  A negative-degree
        label spoils the vertex-count bound the same way.
        """
        arity = self.operad.arity_bound
        min_deg = 0
        for comp in self.algebra.carrier.values():
            min_deg = min([min_deg, *comp.degrees.values()])
        for comp in self.operad.components.values():
            min_deg = min([min_deg, *comp.degrees.values()])
        if arity is None or arity == 0 or min_deg < 0:
            return []
        out = []
        d = 0
        # bar degree D only sees trees on at most 1 + D*arity vertices, so
        # quotient degree d is safe once bar degrees d+1 and d+2 both fit
        while 1 + (d + 2) * arity <= n_max:
            out.append(d)
            d += 1
        return out

    # ------------------------------------------------------------- quotient

    def bar_quotient(self, n_max: int, deg_lo: int | None = None,
                     deg_hi: int | None = None) -> ChainComplex:
        """B = (augmented bar / bare carrier)[-1] on a window.

        The degree window is in shifted degrees and is applied exactly;
        ask for one degree of margin when reading homology off the ends.
        The suspension only renumbers degrees: the differential is the
        induced one, kept sign-free so evaluation stays a chain map.
        """
        keys = [
            k for k in self.enumerate_basis(
                n_max,
                None if deg_lo is None else deg_lo + 1,
                None if deg_hi is None else deg_hi + 1,
            )
            if not _is_bare(k)
        ]
        keep = set(keys)
        degs = {k: self.degree_of(*k) - 1 for k in keys}
        d_cols = {}
        for k in keys:
            col = {k2: c for k2, c in self.differential_key(k).items()
                   if k2 in keep}
            if col:
                d_cols[k] = col
        return ChainComplex(self.field, degs, d_cols, check=False)

    # ------------------------------------------------------------- mu

    def mu_key(self, key: BarKey) -> Vec:
        """Evaluate one quotient basis term through the algebra action.

        Only trees with a single labeled vertex survive.  The degree sign
        makes the evaluation a chain map against the prefix f-convention
        of the internal differential.
        """
        t, labels = key
        if _is_bare(key):
            raise BarError("mu lives on the quotient; bare term given")
        if len(t.non_leaves()) != 1:
            return {}
        root = t.n
        c_el = self.operad.basis_element(
            self._component_sig(t, root), labels[root - 1])
        xs = [self.algebra.basis_element(self._sort_of(t, c), labels[c - 1])
              for c in t.children(root)]
        out = self.algebra.theta_eval(xs, c_el).vec
        if (self.degree_of(t, labels) - 1) % 2:
            out = {nm: -c for nm, c in out.items()}
        return out

    def mu(self, vec: BarVec) -> dict[str, Vec]:
        """Evaluate a quotient element; one component per carrier sort."""
        out: dict[str, Vec] = {}
        for key, c in sorted(vec.items(), key=lambda kv: _key_order(kv[0])):
            t, _ = key
            tgt = out.setdefault(self._sort_of(t, t.n), {})
            for nm, cf in self.mu_key(key).items():
                coeff = c * cf
                cur = tgt.get(nm)
                coeff = coeff if cur is None else cur + coeff
                if coeff.is_zero():
                    tgt.pop(nm, None)
                else:
                    tgt[nm] = coeff
        return {srt: v for srt, v in out.items() if v}

    def mu_chain_map(self, quotient: ChainComplex) -> "ChainMap":
        """Evaluation bundled as a verified chain map on a quotient window.

        The target is the direct sum of the carrier sorts, so the one map
        covers every root sort at once; constructing it re-certifies the
        chain-map law column by column.
        """
        target = direct_sum(dict(self.algebra.carrier))
        entries = {}
        for key in quotient.basis():
            vec = {}
            for srt, comp in self.mu({key: self.field.one}).items():
                for nm, c in comp.items():
                    vec[(srt, nm)] = c
            if vec:
                entries[key] = vec
        return ChainMap(quotient, target, entries)

    # ------------------------------------------------------------- action

    def bar_algebra_action(self, vs: list[BarVec], c: OperadElement,
                           n_cap: int | None = None) -> BarVec:
        """Join quotient elements under a new root composed through c."""
        if not isinstance(c, OperadElement):
            raise BarError("the joining label must be an operad element")
        out: BarVec = {}
        factor_terms = [sorted(v.items(), key=lambda kv: _key_order(kv[0]))
                        for v in vs]
        for combo in iproduct(*factor_terms):
            coeff = self.field.one
            for _, cf in combo:
                coeff = coeff * cf
            for c_name, cc in sorted(c.vec.items(), key=lambda kv: str(kv[0])):
                self._add_terms(
                    out,
                    self._action_basis([k for k, _ in combo], c.sig, c_name,
                                       n_cap),
                    coeff * cc,
                )
        return out

    def _action_basis(self, keys: list[BarKey], c_sig, c_name,
                      n_cap: int | None) -> BarVec:
        m = len(keys)
        for key in keys:
            if _is_bare(key):
                raise BarError("action factors must lie in the quotient")
        n_new = sum(t.n for t, _ in keys) - m + 1
        if n_cap is not None and n_new > n_cap:
            raise CapExceeded(f"joined tree has {n_new} vertices, cap {n_cap}")
        multi = len(self.operad.sorts) > 1
        s_new = [0] * max(n_new - 1, 0)
        sorts_new = [None] * n_new if multi else None
        big_L = set()
        maps = []
        root_labels = []
        offset = 0
        for t, labels in keys:
            mapping = {}
            for v in range(1, t.n):
                mapping[v] = v + offset
                par = t.parent(v)
                s_new[v + offset - 1] = par + offset if par != t.n else n_new
                if v in t.L:
                    big_L.add(v + offset)
                if multi:
                    sorts_new[v + offset - 1] = t.sort_of(v)
            mapping[t.n] = n_new
            maps.append(mapping)
            root_labels.append(self.operad.basis_element(
                self._component_sig(t, t.n), labels[t.n - 1]))
            offset += t.n - 1
        if multi:
            sorts_new[n_new - 1] = c_sig[1]
        t_new = validate(n_new, tuple(s_new), frozenset(big_L),
                         tuple(sorts_new) if multi else None)

        merged = self.operad.gamma(
            root_labels, self.operad.basis_element(c_sig, c_name))

        c_odd = self.operad.degree_of(c_sig, c_name) % 2 == 1
        w_acc = word((n_new,), (n_new,) if c_odd else ())
        for (t, labels), mapping in zip(keys, maps):
            wq = partial_e(t.n, self.basis_word(t, labels))
            wq = relabel(wq, lambda k: mapping[k])
            w_acc = multiply(w_acc, wq)
            if w_acc.sign == 0:
                return {}

        lab2 = [None] * n_new
        for (t, labels), mapping in zip(keys, maps):
            for v in range(1, t.n):
                lab2[mapping[v] - 1] = labels[v - 1]
        out: BarVec = {}
        for nm, cf in sorted(merged.vec.items(), key=lambda kv: str(kv[0])):
            lab2[n_new - 1] = nm
            self._add_terms(out, self.normalize_term(
                t_new, w_acc, tuple(lab2), self.field.one), cf)
        return out
