"""Segmentation class registry.

Classes are defined in a versioned TOML file rather than code so deployments
can extend the taxonomy without a release. Lookup is tolerant of case,
whitespace, hyphens and underscores; clinical synonyms live in per-class
alias lists inside the data file.
"""

import importlib.resources
import re
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .errors import ConfigError, UnknownClass

GROUPS = ("anatomical", "phenotype", "lesion")
GRANULARITIES = ("coarse", "fine")


def normalize_name(name: str) -> str:
    """Collapse case, punctuation and whitespace for registry lookups."""
    return re.sub(r"[\s_\-]+", " ", name.strip().lower())


@dataclass(frozen=True)
class ClassDef:
    id: int
    name: str
    group: str
    granularity: str
    topological: bool
    color: tuple[int, int, int, int]
    aliases: tuple[str, ...] = ()


class Registry:
    """Immutable id/name-indexed view over a set of class definitions."""

    def __init__(self, version: str, classes: list[ClassDef]):
        self.version = version
        self._classes = tuple(sorted(classes, key=lambda c: c.id))
        self._by_id: dict[int, ClassDef] = {}
        self._by_name: dict[str, ClassDef] = {}
        for c in self._classes:
            if c.id in self._by_id:
                raise ConfigError(f"duplicate class id {c.id}")
            self._by_id[c.id] = c
            for key in (c.name, *c.aliases):
                norm = normalize_name(key)
                other = self._by_name.get(norm)
                if other is not None and other.id != c.id:
                    raise ConfigError(f"name {key!r} maps to both id {other.id} and {c.id}")
                self._by_name[norm] = c

    def __iter__(self):
        return iter(self._classes)

    def __len__(self) -> int:
        return len(self._classes)

    def by_id(self, class_id: int) -> ClassDef:
        try:
            return self._by_id[int(class_id)]
        except KeyError:
            raise UnknownClass(f"no class with id {class_id}") from None

    def by_name(self, name: str) -> ClassDef:
        try:
            return self._by_name[normalize_name(name)]
        except KeyError:
            raise UnknownClass(f"no class named {name!r}") from None

    def get(self, key) -> ClassDef:
        """Lookup by id or by (alias) name."""
        if isinstance(key, str) and not key.isdigit():
            return self.by_name(key)
        return self.by_id(int(key))

    def classes(self, group: str | None = None, granularity: str | None = None) -> list[ClassDef]:
        out = list(self._classes)
        if group is not None:
            if group not in GROUPS:
                raise UnknownClass(f"unknown group {group!r}")
            out = [c for c in out if c.group == group]
        if granularity is not None:
            if granularity not in GRANULARITIES:
                raise UnknownClass(f"unknown granularity {granularity!r}")
            out = [c for c in out if c.granularity == granularity]
        return out


def _parse_class(raw: dict) -> ClassDef:
    try:
        color = tuple(int(v) for v in raw["color"])
        cls = ClassDef(
            id=int(raw["id"]),
            name=str(raw["name"]),
            group=str(raw["group"]),
            granularity=str(raw.get("granularity", "coarse")),
            topological=bool(raw.get("topological", False)),
            color=color,  # type: ignore[arg-type]
            aliases=tuple(str(a) for a in raw.get("aliases", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed class entry: {exc}") from exc
    if cls.id <= 0:
        raise ConfigError(f"class id must be positive, got {cls.id}")
    if cls.group not in GROUPS:
        raise ConfigError(f"class {cls.name!r}: unknown group {cls.group!r}")
    if cls.granularity not in GRANULARITIES:
        raise ConfigError(f"class {cls.name!r}: unknown granularity {cls.granularity!r}")
    if len(color) != 4 or any(not (0 <= v <= 255) for v in color):
        raise ConfigError(f"class {cls.name!r}: color must be 4 channels in 0..255")
    return cls


def load_registry(path: str | Path | None = None) -> Registry:
    """Load a class registry from TOML; ``None`` loads the packaged default."""
    if path is None:
        source = importlib.resources.files("fundusquant").joinpath("data/classes.toml")
        text = source.read_bytes()
    else:
        text = Path(path).read_bytes()
    try:
        doc = tomllib.loads(text.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"registry parse failure: {exc}") from exc
    if "version" not in doc:
        raise ConfigError("registry missing version field")
    raw_classes = doc.get("classes")
    if not raw_classes:
        raise ConfigError("registry defines no classes")
    return Registry(str(doc["version"]), [_parse_class(r) for r in raw_classes])


_default: Registry | None = None


def default_registry() -> Registry:
    """Packaged registry, loaded once per process."""
    global _default
    if _default is None:
        _default = load_registry(None)
    return _default
