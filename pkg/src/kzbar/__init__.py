"""Exact verification engine for tree-indexed bar constructions."""

from kzbar.fields import GF, QQ, FieldSpec, Scalar

__all__ = ["FieldSpec", "Scalar", "QQ", "GF"]
