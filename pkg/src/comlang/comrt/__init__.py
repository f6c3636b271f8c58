"""Simulated component kernel: identity, QueryInterface, reference counts, vtables."""

from .kernel import (ComponentClass, IdentityToken, InstanceHandle, InterfaceHandle, LeakEntry,
                     NotSupported, RefcountEvent, Runtime, render_leak_report)
from .vtable import RESERVED, Slot, VtableLayout, compute_vtable_layout, flattened_arity

__all__ = ["ComponentClass", "IdentityToken", "InstanceHandle", "InterfaceHandle", "LeakEntry",
           "NotSupported", "RefcountEvent", "Runtime", "render_leak_report", "RESERVED", "Slot",
           "VtableLayout", "compute_vtable_layout", "flattened_arity"]
