"""Symbolic verification of Lagrangian 2-form multiforms for ZM Lax systems and AKNS."""

from __future__ import annotations

from .params import GaussRat, ParamError, ParamScalar, PoleCollision
from .expr import MATRIX, SCALAR, Expr, ExprError, ShapeError, UnknownSymbol, Workspace, comm, equal, substitute_param, tr
from .varcalc import (
    Lagrangian2Form,
    delta_d_check,
    exterior_derivative,
    multiform_el_system,
    partial_jet,
    total_derivative,
    variational_derivative,
)
from .rewrite import RuleSet, prolong, reduce
from .numeric import NumericAssignment, is_zero_mod, numeric_eval

__version__ = "0.1.0"
