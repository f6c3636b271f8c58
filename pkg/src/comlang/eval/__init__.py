"""Dynamic semantics: the evaluator and its runtime values."""

from .evaluator import Evaluator, Hooks, RunResult, Trace, run_program, values_equal
from .values import UNIT, Builtin, Closure, Frame, IfcV, InstV, MethodV, RecordV, show_value

__all__ = ["Evaluator", "Hooks", "RunResult", "Trace", "run_program", "values_equal", "UNIT",
           "Builtin", "Closure", "Frame", "IfcV", "InstV", "MethodV", "RecordV", "show_value"]
