"""The file-backed component registry.

A manifest is a JSON file ``{"version": 1, "entries": [...]}``.  Reads take
a shared lock, updates an exclusive one, and writes go through a temporary
file renamed over the original so readers never see a partial manifest.
"""

from __future__ import annotations

import contextlib
import fcntl
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Optional

from ..errors import ClsidCollision, ManifestError
from ..syntax.lexer import is_guid, normalize_guid

FORMAT_VERSION = 1
SOURCE_BACKED = "source-backed"
BUILTIN_STUB = "builtin-stub"

AGENT_SERVER_CLSID = "A7B93C92-7B81-11D0-AC5F-00C04FD97575"
AGENT_IID = "A7B93C91-7B81-11D0-AC5F-00C04FD97575"
AGENT_CHARACTER_IID = "A7B93C8F-7B81-11D0-AC5F-00C04FD97575"


@dataclass(frozen=True)
class InterfaceEntry:
    sig: str
    iid: str


@dataclass(frozen=True)
class RegistryEntry:
    clsid: str
    kind: str
    interfaces: tuple[InterfaceEntry, ...]
    source: Optional[str] = None
    component: Optional[str] = None
    sig: Optional[str] = None
    stub: Optional[str] = None

    def to_json(self) -> dict:
        d: dict = {"clsid": self.clsid, "kind": self.kind}
        if self.kind == SOURCE_BACKED:
            d.update(source=self.source, component=self.component, sig=self.sig)
        else:
            d.update(stub=self.stub, sig=self.sig)
        d["interfaces"] = [{"sig": i.sig, "iid": i.iid} for i in self.interfaces]
        return d

    @staticmethod
    def from_json(d) -> "RegistryEntry":
        if not isinstance(d, dict):
            raise ManifestError("registry entry must be an object")
        clsid = d.get("clsid")
        if not isinstance(clsid, str) or not is_guid(clsid):
            raise ManifestError(f"malformed clsid {clsid!r}")
        kind = d.get("kind")
        if kind not in (SOURCE_BACKED, BUILTIN_STUB):
            raise ManifestError(f"entry {clsid}: unknown kind {kind!r}")
        raw = d.get("interfaces")
        if not isinstance(raw, list):
            raise ManifestError(f"entry {clsid}: interfaces must be a list")
        ifcs = []
        for i in raw:
            if not isinstance(i, dict) or not isinstance(i.get("sig"), str):
                raise ManifestError(f"entry {clsid}: malformed interface entry")
            iid = i.get("iid")
            if not isinstance(iid, str) or not is_guid(iid):
                raise ManifestError(f"entry {clsid}: interface {i['sig']} lacks a valid iid")
            ifcs.append(InterfaceEntry(i["sig"], normalize_guid(iid)))
        locators = ("source", "component", "sig") if kind == SOURCE_BACKED else ("stub",)
        for name in locators:
            if not isinstance(d.get(name), str) or not d[name]:
                raise ManifestError(f"entry {clsid}: {kind} entry needs '{name}'")
        return RegistryEntry(normalize_guid(clsid), kind, tuple(ifcs), d.get("source"),
                             d.get("component"), d.get("sig"), d.get("stub"))

    def iid_table(self) -> dict[str, str]:
        """iid -> sig name on the server side."""
        return {i.iid: i.sig for i in self.interfaces}


@dataclass
class RegistryManifest:
    entries: list[RegistryEntry] = field(default_factory=list)
    version: int = FORMAT_VERSION

    def find(self, clsid: str) -> Optional[RegistryEntry]:
        clsid = normalize_guid(clsid)
        for e in self.entries:
            if e.clsid == clsid:
                return e
        return None

    def with_entry(self, entry: RegistryEntry, force: bool = False) -> "RegistryManifest":
        old = self.find(entry.clsid)
        if old == entry:
            return self
        if old is not None and not force:
            raise ClsidCollision(f"clsid {entry.clsid} is already registered (use --force to replace it)")
        entries = [entry if e.clsid == entry.clsid else e for e in self.entries]
        if old is None:
            entries.append(entry)
        return RegistryManifest(entries, self.version)

    def without(self, clsid: str) -> "RegistryManifest":
        if self.find(clsid) is None:
            raise ManifestError(f"clsid {clsid} is not registered")
        clsid = normalize_guid(clsid)
        return RegistryManifest([e for e in self.entries if e.clsid != clsid], self.version)

    def to_json(self) -> dict:
        return {"version": self.version, "entries": [e.to_json() for e in self.entries]}

    @staticmethod
    def from_json(d) -> "RegistryManifest":
        if not isinstance(d, dict):
            raise ManifestError("manifest must be a JSON object")
        version = d.get("version")
        if version != FORMAT_VERSION:
            raise ManifestError(f"unsupported manifest version {version!r}")
        raw = d.get("entries")
        if not isinstance(raw, list):
            raise ManifestError("manifest entries must be a list")
        entries = [RegistryEntry.from_json(e) for e in raw]
        seen = set()
        for e in entries:
            if e.clsid in seen:
                raise ManifestError(f"duplicate clsid {e.clsid}")
            seen.add(e.clsid)
        return RegistryManifest(entries, version)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"

    @staticmethod
    def loads(text: str) -> "RegistryManifest":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ManifestError(f"manifest is not valid JSON: {e}") from e
        return RegistryManifest.from_json(data)


def agent_stub_entry() -> RegistryEntry:
    return RegistryEntry(AGENT_SERVER_CLSID, BUILTIN_STUB,
                         (InterfaceEntry("I_AGENT", AGENT_IID),), stub="agent", sig="AGENT_SERVER")


def default_manifest() -> RegistryManifest:
    """What a registry path that does not exist yet contains."""
    return RegistryManifest([agent_stub_entry()])


def default_registry_path() -> Path:
    return Path(os.environ.get("COMLANG_REGISTRY") or "registry.json")


@contextlib.contextmanager
def _locked(path: Path, exclusive: bool) -> Iterator[None]:
    lock_path = path.with_name(path.name + ".lock")
    lock_path.parent.mkdir(parents=True, exist_ok=True)
    with open(lock_path, "a") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX if exclusive else fcntl.LOCK_SH)
        try:
            yield
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def _read(path: Path) -> RegistryManifest:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        return default_manifest()
    return RegistryManifest.loads(text)


def load_manifest(path) -> RegistryManifest:
    path = Path(path)
    if not path.exists():
        return default_manifest()
    with _locked(path, exclusive=False):
        return _read(path)


def _write(path: Path, manifest: RegistryManifest) -> None:
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(manifest.dumps())
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def save_manifest(manifest: RegistryManifest, path) -> None:
    path = Path(path)
    with _locked(path, exclusive=True):
        _write(path, manifest)


def update_manifest(path, change: Callable[[RegistryManifest], RegistryManifest]) -> RegistryManifest:
    """Read-modify-write under one exclusive lock."""
    path = Path(path)
    with _locked(path, exclusive=True):
        new = change(_read(path))
        _write(path, new)
        return new
