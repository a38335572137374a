"""Exact sparse Gaussian elimination over any FieldSpec.

Vectors are dicts mapping basis names (arbitrary hashable, deterministically
sortable via str) to nonzero Scalars. Never store a zero coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable

from kzbar.fields import FieldSpec, Scalar

Vec = dict


def vec_scale(v: Vec, s: Scalar) -> Vec:
    if s.is_zero():
        return {}
    return {k: c * s for k, c in v.items()}


def vec_axpy(u: Vec, s: Scalar, v: Vec) -> Vec:
    """u + s*v, dropping entries that cancel."""
    if s.is_zero():
        return dict(u)
    out = dict(u)
    for k, c in v.items():
        w = out.get(k)
        nc = c * s if w is None else w + c * s
        if nc.is_zero():
            out.pop(k, None)
        else:
            out[k] = nc
    return out


def vec_add(u: Vec, v: Vec) -> Vec:
    out = dict(u)
    for k, c in v.items():
        w = out.get(k)
        nc = c if w is None else w + c
        if nc.is_zero():
            out.pop(k, None)
        else:
            out[k] = nc
    return out


def vec_neg(v: Vec) -> Vec:
    return {k: -c for k, c in v.items()}


def vec_eq(u: Vec, v: Vec) -> bool:
    # zero coefficients are never stored, so dict equality is exact equality
    return u == v


def default_key(c: Hashable) -> str:
    return str(c)


@dataclass
class Echelon:
    """Reduced row echelon form with optional provenance tracking.

    rows[i] has pivot column pivots[i] with coefficient one, and that column
    is eliminated from every other row. combos[i] (when tracked) expresses
    rows[i] as a combination of the input vectors by index.
    """

    rows: list[Vec]
    pivots: list[Hashable]
    combos: list[Vec] | None
    field: FieldSpec

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, v: Vec) -> tuple[Vec, dict[int, Scalar]]:
        """Reduce v against the echelon; returns (remainder, row coefficients).

        v == remainder + sum coeffs[i] * rows[i], and remainder has no
        support on any pivot column.
        """
        rem = dict(v)
        coeffs: dict[int, Scalar] = {}
        for i, (p, row) in enumerate(zip(self.pivots, self.rows)):
            c = rem.get(p)
            if c is None:
                continue
            coeffs[i] = c
            rem = vec_axpy(rem, -c, row)
        return rem, coeffs

    def in_span(self, v: Vec) -> bool:
        rem, _ = self.reduce(v)
        return not rem

    def express(self, v: Vec) -> Vec | None:
        """Coordinates of v on the ORIGINAL input vectors, or None if outside.

        Requires tracking; when inputs were dependent an arbitrary valid
        expression is returned.
        """
        if self.combos is None:
            raise ValueError("echelon built without tracking")
        rem, coeffs = self.reduce(v)
        if rem:
            return None
        out: Vec = {}
        for i, c in coeffs.items():
            out = vec_axpy(out, c, self.combos[i])
        return out


def echelon(
    vectors: Iterable[Vec],
    field: FieldSpec,
    track: bool = False,
    key: Callable[[Any], str] = default_key,
) -> Echelon:
    """Gauss-Jordan elimination, columns in key order, sparsest-row pivoting."""
    work: list[tuple[Vec, Vec | None]] = []
    for i, v in enumerate(vectors):
        if v:
            work.append((dict(v), {i: field.one} if track else None))
    cols = sorted({c for v, _ in work for c in v}, key=key)
    done_rows: list[Vec] = []
    done_combos: list[Vec] = []
    pivots: list[Hashable] = []
    for col in cols:
        cand = [i for i, (v, _) in enumerate(work) if col in v]
        if not cand:
            continue
        # sparsity-count pivot choice; ties broken by input order
        pi = min(cand, key=lambda i: len(work[i][0]))
        pv, pcombo = work.pop(pi)
        s = pv[col].inv()
        pv = vec_scale(pv, s)
        if track:
            pcombo = vec_scale(pcombo, s)  # type: ignore[arg-type]
        for i, (v, combo) in enumerate(work):
            c = v.get(col)
            if c is None:
                continue
            nv = vec_axpy(v, -c, pv)
            ncombo = vec_axpy(combo, -c, pcombo) if track else None  # type: ignore[arg-type]
            work[i] = (nv, ncombo)
        for i in range(len(done_rows)):
            c = done_rows[i].get(col)
            if c is None:
                continue
            done_rows[i] = vec_axpy(done_rows[i], -c, pv)
            if track:
                done_combos[i] = vec_axpy(done_combos[i], -c, pcombo)  # type: ignore[arg-type]
        done_rows.append(pv)
        pivots.append(col)
        if track:
            done_combos.append(pcombo)  # type: ignore[arg-type]
        work = [(v, combo) for v, combo in work if v]
    return Echelon(done_rows, pivots, done_combos if track else None, field)


def rank(vectors: Iterable[Vec], field: FieldSpec) -> int:
    return echelon(vectors, field).rank


def kernel_of_map(
    columns: dict[Hashable, Vec],
    field: FieldSpec,
    var_key: Callable[[Any], str] = default_key,
) -> list[Vec]:
    """Kernel basis of the linear map sending name c to the vector columns[c].

    Returned vectors are supported on the column names; one per free
    variable, in var_key order.
    """
    rows_by_target: dict[Hashable, Vec] = {}
    for cname, v in columns.items():
        for r, s in v.items():
            rows_by_target.setdefault(r, {})[cname] = s
    E = echelon(list(rows_by_target.values()), field, key=var_key)
    pivot_set = set(E.pivots)
    out: list[Vec] = []
    for f in sorted(columns.keys(), key=var_key):
        if f in pivot_set:
            continue
        vec: Vec = {f: field.one}
        for p, row in zip(E.pivots, E.rows):
            c = row.get(f)
            if c is not None:
                vec[p] = -c
        out.append(vec)
    return out
