"""Environment sources: loading, naming and resolving script variables.

Three source kinds exist.  The process environment (spelled ``Java
Environment`` in scripts) yields the host variables; a map file yields static
``KEY=VALUE`` definitions; a plugin config (``GobyWebSource``) yields variables
derived from the plugin's ``config.xml`` plus platform values supplied at
invocation time.

Lookup order: lexical script variables shadow every source; among sources the
latest-loaded layer wins.  GString values stay lazy -- they are re-evaluated at
every use, so mutating a referenced variable changes later evaluations.
"""

from __future__ import annotations

import fnmatch
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Union
from xml.etree import ElementTree

from . import ast


class EnvironmentLoadError(Exception):
    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        where = ""
        if path is not None:
            where = f" ({path}" + (f":{line}" if line is not None else "") + ")"
        super().__init__(message + where)
        self.path = path
        self.line = line


class ResolutionError(Exception):
    def __init__(self, name: str, message: Optional[str] = None):
        super().__init__(message or f"variable {name} is not bound in scope or environment")
        self.name = name


class PatternError(Exception):
    pass


class _Unavailable:
    def __repr__(self):
        return "UNAVAILABLE"

    def __bool__(self):
        return False


#: Marker returned by list_design_time_names for runtime-only sources.
UNAVAILABLE = _Unavailable()


@dataclass(frozen=True, order=True)
class ScriptVariable:
    name: str
    value: str


# ---------------------------------------------------------------------------
# Resolved source specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProcessEnv:
    """The host process environment; ``env`` overrides it for harnesses."""

    env: Optional[Mapping] = None


@dataclass(frozen=True)
class MapFile:
    """A KEY=VALUE definitions file.  ``path`` may be a GString evaluated at
    load time (such paths are runtime-only for the design environment)."""

    path: Union[str, ast.GString]


@dataclass(frozen=True)
class PluginConfig:
    """Variables derived from a plugin directory's config.xml, overlaid with
    platform values supplied by the invoking system."""

    plugin_dir: str
    runtime_values: Optional[Mapping] = None


EnvironmentSource = Union[ProcessEnv, MapFile, PluginConfig]


# ---------------------------------------------------------------------------
# Map files
# ---------------------------------------------------------------------------

_MAP_LINE_RE = re.compile(r"(?:export\s+)?([A-Za-z_][A-Za-z0-9_]*)=(.*)$")


def parse_map_text(text: str, origin: str = "<map>") -> tuple:
    """Parse map-file content into a sorted variable set.

    Lines are ``KEY=VALUE`` or ``export KEY=VALUE``; ``#`` comments and blanks
    are ignored.  A value wrapped in one pair of matching quotes loses the
    quotes; nothing is expanded or executed.  Later lines win for a repeated
    key.
    """
    found = {}
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _MAP_LINE_RE.fullmatch(line)
        if not m:
            raise EnvironmentLoadError("malformed map-file line", path=origin, line=lineno)
        key, value = m.group(1), m.group(2).strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in ("'", '"'):
            value = value[1:-1]
        found[key] = value
    return tuple(ScriptVariable(k, v) for k, v in sorted(found.items()))


def parse_map_file(path: str) -> tuple:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise EnvironmentLoadError(f"cannot read map file: {exc.strerror}", path=str(path)) from exc
    return parse_map_text(text, origin=str(path))


# ---------------------------------------------------------------------------
# Plugin configs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PluginConfigModel:
    id: str
    kind: str
    options: tuple = ()  # (option_id, default_value)
    resources: tuple = ()  # (resource_id, ((field, value), ...))
    input_slots: tuple = ()
    output_slots: tuple = ()


def normalize_id(s: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", s).upper().strip("_")


def load_plugin_config(path) -> PluginConfigModel:
    """Read a plugin config.xml (or the directory containing one)."""
    p = Path(path)
    if p.is_dir():
        p = p / "config.xml"
    try:
        root = ElementTree.parse(p).getroot()
    except OSError as exc:
        raise EnvironmentLoadError(f"cannot read plugin config: {exc.strerror}", path=str(p)) from exc
    except ElementTree.ParseError as exc:
        raise EnvironmentLoadError(f"malformed plugin config: {exc}", path=str(p)) from exc
    plugin_id = normalize_id(root.findtext("id", default=""))
    kind = normalize_id(root.findtext("kind", default=""))
    if not plugin_id or kind not in ast.PLUGIN_KINDS:
        raise EnvironmentLoadError("plugin config needs an id and a valid kind", path=str(p))
    options = tuple(
        (normalize_id(el.get("id", "")), el.get("default", "")) for el in root.findall("option")
    )
    resources = []
    for el in root.findall("resource"):
        fields = tuple(
            (normalize_id(f.get("name", "")), (f.text or "").strip()) for f in el.findall("field")
        )
        resources.append((normalize_id(el.get("id", "")), fields))
    input_slots = tuple((el.text or "").strip() for el in root.findall("inputSlot"))
    output_slots = tuple((el.text or "").strip() for el in root.findall("outputSlot"))
    return PluginConfigModel(plugin_id, kind, options, tuple(resources), input_slots, output_slots)


def option_variable_name(kind: str, plugin_id: str, option_id: str) -> str:
    return f"PLUGINS_{kind}_{plugin_id}_{option_id}"


def resource_variable_name(resource_id: str, field: str) -> str:
    return f"RESOURCES_ARTIFACTS_{resource_id}_{field}"


def plugin_variables(model: PluginConfigModel, runtime_values: Optional[Mapping] = None) -> dict:
    values = {}
    for option_id, default in model.options:
        values[option_variable_name(model.kind, model.id, option_id)] = default
    for resource_id, fields in model.resources:
        for field, value in fields:
            values[resource_variable_name(resource_id, field)] = value
    if runtime_values:
        values.update({str(k): str(v) for k, v in runtime_values.items()})
    return values


def plugin_design_entries(model: PluginConfigModel, runtime_values: Optional[Mapping] = None):
    """Design-time (name, provenance) pairs contributed by a plugin config."""
    entries = []
    for option_id, _default in model.options:
        entries.append(
            (option_variable_name(model.kind, model.id, option_id), f"GobyWebSource option {option_id}")
        )
    for resource_id, fields in model.resources:
        for field, _value in fields:
            entries.append(
                (resource_variable_name(resource_id, field), f"GobyWebSource resource {resource_id}.{field}")
            )
    if runtime_values:
        for name in runtime_values:
            entries.append((str(name), "GobyWebSource platform"))
    for slot in model.input_slots:
        entries.append((slot, "GobyWebSource input slot"))
    for slot in model.output_slots:
        entries.append((slot, "GobyWebSource output slot"))
    return entries


# ---------------------------------------------------------------------------
# Runtime environment
# ---------------------------------------------------------------------------

class RuntimeEnvironment:
    """Ordered layers of loaded sources plus the exported-name set.

    Mutated only by load statements on the interpreting thread; command
    assembly takes immutable snapshots of the exported values.
    """

    def __init__(self, base_env: Optional[Mapping] = None):
        self.base_env = dict(os.environ if base_env is None else base_env)
        self.layers = []  # (source spec, {name: value})
        self.exported = set()

    def load(self, spec: EnvironmentSource, lexical_scope: Optional[Mapping] = None) -> tuple:
        variables = parse_at_run_time(spec, self, lexical_scope)
        mapping = {v.name: v.value for v in variables}
        self.layers.append((spec, mapping))
        if isinstance(spec, MapFile):
            self.exported.update(mapping)
        return variables

    def lookup(self, name: str) -> Optional[str]:
        for _spec, mapping in reversed(self.layers):
            if name in mapping:
                return mapping[name]
        return None

    def exported_values(self) -> dict:
        out = {}
        for name in sorted(self.exported):
            value = self.lookup(name)
            if value is not None:
                out[name] = value
        return out


def parse_at_run_time(
    spec: EnvironmentSource,
    current_env: Optional[RuntimeEnvironment] = None,
    lexical_scope: Optional[Mapping] = None,
) -> tuple:
    """Load a source now, returning its variables as a name-sorted tuple."""
    if isinstance(spec, ProcessEnv):
        env = spec.env
        if env is None:
            env = current_env.base_env if current_env is not None else os.environ
        return tuple(ScriptVariable(k, str(v)) for k, v in sorted(env.items()))
    if isinstance(spec, MapFile):
        path = spec.path
        if isinstance(path, ast.GString):
            path = eval_gstring(path, lexical_scope or {}, current_env)
        return parse_map_file(path)
    if isinstance(spec, PluginConfig):
        model = load_plugin_config(spec.plugin_dir)
        values = plugin_variables(model, spec.runtime_values)
        return tuple(ScriptVariable(k, v) for k, v in sorted(values.items()))
    raise TypeError(f"not an environment source: {spec!r}")


def list_design_time_names(spec: EnvironmentSource):
    """Names a source can enumerate at design time, or UNAVAILABLE."""
    if isinstance(spec, ProcessEnv):
        env = os.environ if spec.env is None else spec.env
        return sorted(env)
    if isinstance(spec, MapFile):
        path = spec.path
        if isinstance(path, ast.GString):
            norm = ast.normalize_gstring(path)
            if len(norm.components) == 1 and isinstance(norm.components[0], ast.Literal):
                path = norm.components[0].text
            else:
                return UNAVAILABLE
        try:
            return [v.name for v in parse_map_file(path)]
        except EnvironmentLoadError:
            return UNAVAILABLE
    if isinstance(spec, PluginConfig):
        try:
            model = load_plugin_config(spec.plugin_dir)
        except EnvironmentLoadError:
            return UNAVAILABLE
        return [name for name, _prov in plugin_design_entries(model, spec.runtime_values)]
    raise TypeError(f"not an environment source: {spec!r}")


# ---------------------------------------------------------------------------
# Resolution and GString evaluation
# ---------------------------------------------------------------------------

def _stringify(value, lexical_scope, runtime_env, active) -> str:
    if isinstance(value, ast.GString):
        return _eval_gstring(value, lexical_scope, runtime_env, active)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return str(value)


def _resolve(name, lexical_scope, runtime_env, active) -> str:
    if lexical_scope is not None and name in lexical_scope:
        if name in active:
            raise ResolutionError(name, f"circular reference through variable {name}")
        return _stringify(lexical_scope[name], lexical_scope, runtime_env, active | {name})
    if runtime_env is not None:
        value = runtime_env.lookup(name)
        if value is not None:
            return value
    raise ResolutionError(name)


def resolve(name: str, lexical_scope: Optional[Mapping], runtime_env: Optional[RuntimeEnvironment]) -> str:
    """Value of a name: lexical scope first, then latest-loaded source layer."""
    return _resolve(name, lexical_scope, runtime_env, frozenset())


def _eval_gstring(g: ast.GString, lexical_scope, runtime_env, active) -> str:
    if g.raw_text is not None:
        raise ResolutionError(
            "<staged>", "GString still holds unparsed raw text; apply an import intention first"
        )
    out = []
    for comp in g.components:
        if isinstance(comp, ast.Literal):
            out.append(comp.text)
        else:
            out.append(_resolve(comp.name, lexical_scope, runtime_env, active))
    return "".join(out)


def eval_gstring(
    g: ast.GString,
    lexical_scope: Optional[Mapping] = None,
    runtime_env: Optional[RuntimeEnvironment] = None,
) -> str:
    """Evaluate a GString now.  References read the current variable values,
    so re-evaluating after a change observes the new value."""
    return _eval_gstring(g, lexical_scope, runtime_env, frozenset())


# ---------------------------------------------------------------------------
# Path patterns
# ---------------------------------------------------------------------------

def _has_magic(s: str) -> bool:
    return any(c in s for c in "*?[")


def _display_join(prefix: str, name: str) -> str:
    if prefix == "":
        return name
    if prefix.endswith("/"):
        return prefix + name
    return prefix + "/" + name


def expand_path_pattern(pattern: str, base_dir: str = ".") -> list:
    """Expand a filename pattern against the filesystem, sorted.

    Wildcard form: ``*``, ``?`` and ``[...]`` per segment; hidden entries only
    match when the segment itself starts with a dot.  Regex form: an ``re:``
    prefix, with the final path component treated as a regular expression over
    entry names in the (literal) leading directory.  An empty match yields an
    empty list, never the literal pattern.
    """
    if not pattern:
        raise PatternError("empty pattern")
    if pattern.startswith("re:"):
        rest = pattern[3:]
        dirpart, _, namepart = rest.rpartition("/")
        try:
            rx = re.compile(namepart)
        except re.error as exc:
            raise PatternError(f"invalid regular expression {namepart!r}: {exc}") from exc
        directory = dirpart if dirpart else base_dir
        if dirpart and not os.path.isabs(dirpart):
            directory = os.path.join(base_dir, dirpart)
        try:
            entries = os.listdir(directory or "/")
        except OSError:
            return []
        out = []
        for name in entries:
            if rx.fullmatch(name):
                out.append(_display_join(dirpart, name) if dirpart else name)
        return sorted(out)

    if not _has_magic(pattern):
        probe = pattern if os.path.isabs(pattern) else os.path.join(base_dir, pattern)
        return [pattern] if os.path.lexists(probe) else []

    if os.path.isabs(pattern):
        states = [("/", "/")]
        segments = pattern.split("/")[1:]
    else:
        states = [("", base_dir)]
        segments = pattern.split("/")
    for seg in segments:
        if seg == "":
            continue
        next_states = []
        if _has_magic(seg):
            rx = re.compile(fnmatch.translate(seg))
            for disp, fs in states:
                try:
                    entries = sorted(os.listdir(fs or "."))
                except OSError:
                    continue
                for name in entries:
                    if name.startswith(".") and not seg.startswith("."):
                        continue
                    if rx.match(name):
                        next_states.append((_display_join(disp, name), os.path.join(fs, name)))
        else:
            for disp, fs in states:
                candidate = os.path.join(fs, seg)
                if os.path.lexists(candidate):
                    next_states.append((_display_join(disp, seg), candidate))
        states = next_states
    return sorted(disp for disp, _fs in states)
