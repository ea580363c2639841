"""Quantifier elimination for valued Ore modules over F_q((T)) with Frobenius."""

from .coeff_field import (
    ExtensionCapError,
    FiniteField,
    additive_kernel,
    extend_until_kernel_full,
    get_field,
    parse_field_spec,
)
from .corpus import load_corpus
from .formula import PPFormula, QFFormula, parse_formula, parse_qf
from .model_checker import check_axioms, compare, solvable
from .ore_poly import OrePoly, generalized_right_divide, right_divide
from .qe_engine import InternalBreach, eliminate, eliminate_text, replay
from .series_field import SeriesElem, SeriesRing, default_ring
from .solve import divide_witness, factorize, roots_to_precision, solve_inhomogeneous
from .torsion_values import ann_value_set, div_value_set
from .value_geometry import INF, ValueProfile, upsilon, upsilon_inv

__all__ = [
    "INF",
    "ExtensionCapError",
    "FiniteField",
    "InternalBreach",
    "OrePoly",
    "PPFormula",
    "QFFormula",
    "SeriesElem",
    "SeriesRing",
    "ValueProfile",
    "additive_kernel",
    "ann_value_set",
    "check_axioms",
    "compare",
    "default_ring",
    "div_value_set",
    "divide_witness",
    "eliminate",
    "eliminate_text",
    "extend_until_kernel_full",
    "factorize",
    "generalized_right_divide",
    "get_field",
    "load_corpus",
    "parse_field_spec",
    "parse_formula",
    "parse_qf",
    "replay",
    "right_divide",
    "roots_to_precision",
    "solvable",
    "solve_inhomogeneous",
    "upsilon",
    "upsilon_inv",
]
