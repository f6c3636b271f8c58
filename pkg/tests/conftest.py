from __future__ import annotations

from pathlib import Path

import pytest

from comlang.comrt import Runtime
from comlang.eval import Trace, run_program
from comlang.interop import RegistryHooks
from comlang.sema import check_program
from comlang.syntax import parse_source

ROOT = Path(__file__).resolve().parent.parent
SAMPLES = ROOT / "samples"
DATA = Path(__file__).resolve().parent / "data"
GOLDEN = Path(__file__).resolve().parent / "golden"

FOO_SIGS = """
interface_sig X_SIG = {
  val fooX : unit -> unit
}

interface_sig Y_SIG = {
  val fooY : unit -> unit
}

component_sig FOO_SIG = {
  interface X : X_SIG
  interface Y : Y_SIG
}

component FooComp () : FOO_SIG = {
  interface X = {
    fun fooX () = print "fooX"
  }
  interface Y = {
    fun fooY () = print "fooY"
  }
}
"""


def typed(source: str, file: str = "<test>"):
    return check_program(parse_source(source, file))


def run_source(source: str, registry=None, program_path=None, runtime=None):
    """Typecheck and run ``source``; returns the RunResult."""
    tp = typed(source, str(program_path or "<test>"))
    hooks = RegistryHooks(registry, program_path) if registry is not None else None
    return run_program(tp, runtime or Runtime(), hooks, Trace())


@pytest.fixture
def registry(tmp_path):
    return tmp_path / "registry.json"
