"""Register-map configuration parsing and validation.

The configuration is a JSON document; the machine-readable schema lives in
``hilsim/data/map_config.schema.json``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

SCALAR_TYPES = {
    "u8": (1, 0, 0xFF),
    "u16": (2, 0, 0xFFFF),
    "u32": (4, 0, 0xFFFFFFFF),
    "u64": (8, 0, 0xFFFFFFFFFFFFFFFF),
    "i8": (1, -0x80, 0x7F),
    "i16": (2, -0x8000, 0x7FFF),
    "i32": (4, -0x80000000, 0x7FFFFFFF),
    "i64": (8, -0x8000000000000000, 0x7FFFFFFFFFFFFFFF),
}

ACCESS_LEVELS = ("read-only", "writable", "privileged")
KNOWN_FLAGS = ("init-trigger", "volatile", "user-shared")


class ConfigError(ValueError):
    """Schema violation in a register-map configuration."""


class ConfigSyntaxError(ConfigError):
    """Malformed configuration document (reports line and column)."""


@dataclass
class ParameterSpec:
    """One named parameter: a scalar, an array of scalars, or a record."""

    name: str
    type: str
    array_len: int = 1
    default: object = 0
    access: str = "writable"
    flags: tuple[str, ...] = ()
    description: str = ""
    members: tuple["ParameterSpec", ...] = ()

    @property
    def is_record(self) -> bool:
        return self.type == "record"

    def scalar_size(self) -> int:
        return SCALAR_TYPES[self.type][0]


@dataclass
class ModuleSpec:
    name: str
    description: str = ""
    parameters: tuple[ParameterSpec, ...] = ()


@dataclass
class MemoryMapSpec:
    name: str
    version: str
    modules: tuple[ModuleSpec, ...] = ()
    padded_total_size: int | None = None

    def version_tuple(self) -> tuple[int, int, int]:
        major, minor, patch = self.version.split(".")
        return int(major), int(minor), int(patch)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _check_default(param: ParameterSpec, qualname: str) -> None:
    lo, hi = SCALAR_TYPES[param.type][1:]
    values = param.default if isinstance(param.default, list) else [param.default]
    if isinstance(param.default, list):
        _require(
            len(values) <= param.array_len,
            f"{qualname}: default list longer than array_len",
        )
    for v in values:
        _require(isinstance(v, int), f"{qualname}: default must be an integer")
        _require(lo <= v <= hi, f"{qualname}: default {v} out of range for {param.type}")


def _parse_parameter(obj: dict, qualname: str, allow_record: bool = True) -> ParameterSpec:
    _require(isinstance(obj, dict), f"{qualname}: parameter must be an object")
    name = obj.get("name")
    _require(isinstance(name, str) and name.isidentifier(), f"{qualname}: bad parameter name {name!r}")
    ptype = obj.get("type", "u8")
    access = obj.get("access", "writable")
    _require(access in ACCESS_LEVELS, f"{qualname}: unknown access level {access!r}")
    flags = tuple(obj.get("flags", []))
    for f in flags:
        _require(f in KNOWN_FLAGS, f"{qualname}: unknown flag {f!r}")
    description = obj.get("description", "")
    _require(
        isinstance(description, str) and description.strip() != "",
        f"{qualname}: description must be non-empty",
    )

    if ptype == "record":
        _require(allow_record, f"{qualname}: nested records beyond one level not supported")
        raw_members = obj.get("members", [])
        _require(len(raw_members) >= 1, f"{qualname}: record needs at least one member")
        members = []
        seen = set()
        for m in raw_members:
            sub = _parse_parameter(m, f"{qualname}.{m.get('name', '?')}", allow_record=True)
            _require(sub.name not in seen, f"{qualname}.{sub.name}: duplicate member name")
            seen.add(sub.name)
            members.append(sub)
        return ParameterSpec(
            name=name,
            type="record",
            access=access,
            flags=flags,
            description=description,
            members=tuple(members),
        )

    _require(ptype in SCALAR_TYPES, f"{qualname}: unknown type {ptype!r}")
    array_len = obj.get("array_len", 1)
    _require(isinstance(array_len, int) and array_len >= 1, f"{qualname}: array_len must be >= 1")
    param = ParameterSpec(
        name=name,
        type=ptype,
        array_len=array_len,
        default=obj.get("default", 0),
        access=access,
        flags=flags,
        description=description,
    )
    _check_default(param, qualname)
    return param


def parse_config(text: str) -> MemoryMapSpec:
    """Parse and validate a register-map configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigSyntaxError(
            f"configuration syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc

    _require(isinstance(doc, dict), "top-level document must be an object")
    name = doc.get("name")
    _require(isinstance(name, str) and name.isidentifier(), f"bad map name {name!r}")
    version = doc.get("version")
    _require(isinstance(version, str), "version must be a string")
    parts = version.split(".")
    _require(
        len(parts) == 3 and all(p.isdigit() for p in parts),
        f"version {version!r} is not major.minor.patch",
    )
    padded = doc.get("padded_total_size")
    if padded is not None:
        _require(isinstance(padded, int) and padded >= 1, "padded_total_size must be a positive integer")

    modules = []
    qualnames: set[str] = set()
    module_names: set[str] = set()
    for mod in doc.get("modules", []):
        _require(isinstance(mod, dict), "module must be an object")
        mod_name = mod.get("name")
        _require(isinstance(mod_name, str) and mod_name.isidentifier(), f"bad module name {mod_name!r}")
        _require(mod_name not in module_names, f"duplicate module name {mod_name!r}")
        module_names.add(mod_name)
        params = []
        for p in mod.get("parameters", []):
            qual = f"{mod_name}.{p.get('name', '?')}"
            param = _parse_parameter(p, qual)
            _require(qual not in qualnames, f"duplicate parameter name {qual}")
            qualnames.add(qual)
            for sub in param.members:
                subqual = f"{qual}.{sub.name}"
                _require(subqual not in qualnames, f"duplicate parameter name {subqual}")
                qualnames.add(subqual)
            params.append(param)
        modules.append(
            ModuleSpec(name=mod_name, description=mod.get("description", ""), parameters=tuple(params))
        )

    return MemoryMapSpec(
        name=name,
        version=version,
        modules=tuple(modules),
        padded_total_size=padded,
    )


def parse_config_file(path) -> MemoryMapSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
