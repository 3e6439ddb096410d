"""The relational assertion language: AST, syntax, sorts and evaluation."""

from .ast import (
    Arith, BoolLit, Card, Closure, Compare, Expr, IntLit, Logic, Member, Nav, Not, NullLit,
    Quant, Root, SetOp, ValLit, Var, NULL_LIT, OLD_THIS, RESULT, THIS, is_formula,
)
from .batch import ERR, CorpusEvaluator
from .evaluator import EvalEnv, EvalTypeError, eval_chromosome, eval_formula, evaluate
from .metrics import complexity, is_mca
from .parser import DslSyntaxError, parse
from .printer import pretty
from .sorts import SortError, infer_sort, typecheck, well_sorted

__all__ = [
    "ERR", "Arith", "BoolLit", "Card", "Closure", "Compare", "CorpusEvaluator", "DslSyntaxError",
    "EvalEnv", "EvalTypeError", "Expr", "IntLit", "Logic", "Member", "NULL_LIT", "Nav", "Not",
    "NullLit", "OLD_THIS", "Quant", "RESULT", "Root", "SetOp", "SortError", "THIS", "ValLit",
    "Var", "complexity", "eval_chromosome", "eval_formula", "evaluate", "infer_sort",
    "is_formula", "is_mca", "parse", "pretty", "typecheck", "well_sorted",
]
