"""The simulated environment: registry, import/export, marshaling, IDL and stubs."""

from .idlgen import emit_idl, emit_interface, idl_type
from .loader import (Bridge, RegistryHooks, SourceServer, check_against_server, export_component,
                     export_entry, load_typed)
from .marshal import decode, encode, marshal
from .registry import (AGENT_CHARACTER_IID, AGENT_IID, AGENT_SERVER_CLSID, BUILTIN_STUB,
                       FORMAT_VERSION, SOURCE_BACKED, InterfaceEntry, RegistryEntry,
                       RegistryManifest, agent_stub_entry, default_manifest, default_registry_path,
                       load_manifest, save_manifest, update_manifest)
from .stubs import AGENT_SOURCE, AgentStub, agent_sig_env

__all__ = [
    "emit_idl", "emit_interface", "idl_type", "Bridge", "RegistryHooks", "SourceServer",
    "check_against_server", "export_component", "export_entry", "load_typed", "decode", "encode",
    "marshal", "AGENT_CHARACTER_IID", "AGENT_IID", "AGENT_SERVER_CLSID", "BUILTIN_STUB",
    "FORMAT_VERSION", "SOURCE_BACKED", "InterfaceEntry", "RegistryEntry", "RegistryManifest",
    "agent_stub_entry", "default_manifest", "default_registry_path", "load_manifest",
    "save_manifest", "update_manifest", "AGENT_SOURCE", "AgentStub", "agent_sig_env",
]
