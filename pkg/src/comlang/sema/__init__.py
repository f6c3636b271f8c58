"""Signature elaboration, typechecking and IDL-expressibility."""

from .idl import (check_exportable, idl_expressible_interface, idl_expressible_type,
                  idl_expressible_value)
from .sigs import (ComponentSig, InterfaceSig, MatchReport, SigEnv, elaborate_sigs,
                   match_component, match_interface)
from .typecheck import ComponentInfo, TypedProgram, check_program, typecheck

__all__ = [
    "ComponentInfo", "ComponentSig", "InterfaceSig", "MatchReport", "SigEnv", "TypedProgram",
    "check_exportable", "check_program", "elaborate_sigs", "idl_expressible_interface",
    "idl_expressible_type", "idl_expressible_value", "match_component", "match_interface",
    "typecheck",
]
