"""Command-line driver: ``comlang check|run|emit-idl|export|registry-list|registry-remove|guid-new``.

Exit codes: 0 success, 1 static errors (and refused exports), 2 I/O or
manifest problems, 3 runtime faults, 4 a run that finished with leaks.
"""

from __future__ import annotations

import argparse
import sys
import uuid
from pathlib import Path
from typing import Optional, Sequence

from .comrt.kernel import Runtime, render_leak_report
from .errors import (ClsidCollision, ComlangError, ManifestError, NotExportable, NotExpressible,
                     RuntimeFault, StaticError)
from .eval.evaluator import Trace, run_program
from .interop.idlgen import emit_idl
from .interop.loader import RegistryHooks, export_component
from .interop.registry import default_registry_path, load_manifest, update_manifest
from .sema.typecheck import TypedProgram, check_program
from .syntax import parse_source
from .syntax.lexer import is_guid

EXIT_OK, EXIT_STATIC, EXIT_IO, EXIT_FAULT, EXIT_LEAK = 0, 1, 2, 3, 4


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load(path: str) -> TypedProgram:
    source = Path(path).read_text(encoding="utf-8")
    return check_program(parse_source(source, path))


def _registry(args) -> Path:
    return Path(args.registry) if args.registry else default_registry_path()


def cmd_check(args) -> int:
    _load(args.source)
    return EXIT_OK


def cmd_run(args) -> int:
    tp = _load(args.source)
    rt = Runtime()
    listeners = []
    if args.trace_rc:
        def show(ev):
            sys.stdout.flush()
            print(ev.render(), file=sys.stderr, flush=True)
        listeners.append(show)
        rt.listeners.append(show)
    hooks = RegistryHooks(_registry(args), args.source, force=args.force, listeners=listeners)
    result = run_program(tp, rt, hooks, Trace(echo=sys.stdout))
    if result.leaks:
        sys.stdout.flush()
        sys.stderr.write(render_leak_report(result.leaks))
        return EXIT_LEAK
    return EXIT_OK


def cmd_emit_idl(args) -> int:
    tp = _load(args.source)
    env = tp.env
    if args.component:
        info = tp.components.get(args.component)
        if info is None:
            _err(f"error: no component named {args.component}")
            return EXIT_STATIC
        sig = info.sig
    elif args.sig in env.components:
        sig = env.component(args.sig)
    elif args.sig in env.interfaces:
        sig = env.interface(args.sig)
    else:
        _err(f"error: no signature named {args.sig}")
        return EXIT_STATIC
    sys.stdout.write(emit_idl(sig, env))
    return EXIT_OK


def cmd_export(args) -> int:
    if not is_guid(args.clsid):
        _err(f"error: malformed clsid {args.clsid}")
        return EXIT_STATIC
    tp = _load(args.source)
    export_component(args.source, args.component, args.sig, args.clsid, _registry(args),
                     force=args.force, typed=tp)
    return EXIT_OK


def cmd_registry_list(args) -> int:
    for e in load_manifest(_registry(args)).entries:
        print(f"{e.clsid}  {e.kind}  {e.sig}")
    return EXIT_OK


def cmd_registry_remove(args) -> int:
    manifest = load_manifest(_registry(args))
    if manifest.find(args.clsid) is None:
        _err(f"error: clsid {args.clsid} is not registered")
        return EXIT_STATIC
    update_manifest(_registry(args), lambda m: m.without(args.clsid))
    return EXIT_OK


def cmd_guid_new(args) -> int:
    print(str(uuid.uuid4()).upper())
    return EXIT_OK


def _flags(suppress: bool) -> argparse.ArgumentParser:
    # flags are accepted before or after the subcommand; the subcommand copy
    # must not overwrite a value given before it
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--registry", help="registry manifest (default: $COMLANG_REGISTRY or ./registry.json)", **kw)
    p.add_argument("--trace-rc", action="store_true", help="log reference-count events on stderr", **kw)
    p.add_argument("--force", action="store_true", help="replace an existing registry entry", **kw)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _flags(suppress=True)
    p = argparse.ArgumentParser(prog="comlang", description="Component language toolchain.",
                                parents=[_flags(suppress=False)])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="parse and typecheck a program")
    s.add_argument("source")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("run", parents=[common], help="run a program")
    s.add_argument("source")
    s.set_defaults(fn=cmd_run)

    s = sub.add_parser("emit-idl", parents=[common], help="print IDL for a signature")
    s.add_argument("source")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--sig", help="interface or component signature name")
    g.add_argument("--component", help="component whose ascribed signature to emit")
    s.set_defaults(fn=cmd_emit_idl)

    s = sub.add_parser("export", parents=[common], help="register a component without running the program")
    s.add_argument("source")
    s.add_argument("--component", required=True)
    s.add_argument("--sig", required=True)
    s.add_argument("--clsid", required=True)
    s.set_defaults(fn=cmd_export)

    s = sub.add_parser("registry-list", parents=[common], help="list registry entries")
    s.set_defaults(fn=cmd_registry_list)

    s = sub.add_parser("registry-remove", parents=[common], help="remove a registry entry")
    s.add_argument("clsid")
    s.set_defaults(fn=cmd_registry_remove)

    s = sub.add_parser("guid-new", parents=[common], help="print a fresh random GUID")
    s.set_defaults(fn=cmd_guid_new)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except OSError as e:
        _err(f"error: {e.filename or ''}: {e.strerror}")
        return EXIT_IO
    except (NotExportable, ClsidCollision, NotExpressible) as e:
        _err(e.render())
        return EXIT_STATIC if args.command != "run" or isinstance(e, StaticError) else EXIT_FAULT
    except ManifestError as e:
        _err(e.render())
        return EXIT_FAULT if args.command == "run" else EXIT_IO
    except RuntimeFault as e:
        sys.stdout.flush()
        _err(e.render())
        return EXIT_FAULT
    except ComlangError as e:
        _err(e.render())
        return EXIT_STATIC


if __name__ == "__main__":
    sys.exit(main())
