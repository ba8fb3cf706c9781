"""Run configuration: defaults, TOML overrides, canonical fingerprint.

Every tunable the pipeline honors lives here with its shipped default, so
a report can be reproduced from its config fingerprint alone. Overrides
come from a TOML file given explicitly or through the FUNDUSQUANT_CONFIG
environment variable; unknown keys are an error, not a warning, because a
silently ignored typo would change results without changing the fingerprint.
"""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError

ENV_VAR = "FUNDUSQUANT_CONFIG"


@dataclass(frozen=True)
class LateralityConfig:
    # which eye label the "disc right of fovea" arrangement maps to
    disc_right_of_fovea: str = "OD"


@dataclass(frozen=True)
class KnudtsonConfig:
    artery: float = 0.88
    vein: float = 0.95


@dataclass(frozen=True)
class VesselConfig:
    annulus: tuple[float, float] = (1.5, 2.0)
    knudtson: KnudtsonConfig = field(default_factory=KnudtsonConfig)
    min_branch_len_px: float = 10.0
    min_zone_samples: int = 5
    tortuosity_mode: str = "arc_chord"  # arc_chord | curvature


@dataclass(frozen=True)
class OpticConfig:
    ray_step_deg: float = 1.0
    sector_boundaries_deg: tuple[float, float, float, float] = (45.0, 135.0, 225.0, 315.0)


@dataclass(frozen=True)
class LesionConfig:
    size_mode: str = "disc_relative"  # disc_relative | absolute_px
    size_bins_frac_da: tuple[float, float] = (0.01, 0.05)
    size_bins_px: tuple[float, float] = (64.0, 320.0)
    severity_bins: tuple[float, float] = (0.005, 0.02)  # non-clinical defaults
    quadrant_mode: str = "diagonal"  # diagonal | axis_aligned


@dataclass(frozen=True)
class PhenotypeConfig:
    dispersion_weighting: str = "uniform"  # uniform | area


@dataclass(frozen=True)
class CurationConfigSection:
    threshold: float = 0.75
    min_largest_frac: float = 0.5
    min_component_area: int = 10
    max_components: int = 20
    spur_len: float = 10.0
    max_spurs: int = 30


@dataclass(frozen=True)
class QuantConfig:
    laterality: LateralityConfig = field(default_factory=LateralityConfig)
    vessel: VesselConfig = field(default_factory=VesselConfig)
    optic: OpticConfig = field(default_factory=OpticConfig)
    lesion: LesionConfig = field(default_factory=LesionConfig)
    phenotype: PhenotypeConfig = field(default_factory=PhenotypeConfig)
    curation: CurationConfigSection = field(default_factory=CurationConfigSection)

    def to_dict(self) -> dict:
        def clean(v):
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            if isinstance(v, tuple):
                return [clean(x) for x in v]
            return v
        return clean(asdict(self))

    @property
    def fingerprint(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _num(v, key: str) -> float:
    _check(isinstance(v, (int, float)) and not isinstance(v, bool), f"{key} must be a number")
    return float(v)


def _int(v, key: str) -> int:
    _check(isinstance(v, int) and not isinstance(v, bool), f"{key} must be an integer")
    return v


def _pair(v, key: str) -> tuple[float, float]:
    _check(isinstance(v, (list, tuple)) and len(v) == 2, f"{key} must hold two numbers")
    lo, hi = (_num(x, key) for x in v)
    _check(lo < hi, f"{key} must be ascending, got {v}")
    return lo, hi


def _choice(v, key: str, allowed: tuple[str, ...]) -> str:
    _check(isinstance(v, str) and v in allowed, f"{key} must be one of {list(allowed)}, got {v!r}")
    return v


def _take(section: dict, name: str) -> dict:
    sub = section.pop(name, {})
    _check(isinstance(sub, dict), f"[{name}] must be a table")
    return sub


def _reject_leftovers(d: dict, where: str) -> None:
    _check(not d, f"unknown config key(s) in {where}: {sorted(d)}")


def validate_config(raw: dict) -> QuantConfig:
    """Build a QuantConfig from a parsed TOML mapping, defaults filled in."""
    raw = {k: (dict(v) if isinstance(v, dict) else v) for k, v in dict(raw).items()}

    lat = _take(raw, "laterality")
    laterality = LateralityConfig(
        disc_right_of_fovea=_choice(
            lat.pop("disc_right_of_fovea", "OD"), "laterality.disc_right_of_fovea", ("OD", "OS")),
    )
    _reject_leftovers(lat, "[laterality]")

    ves = _take(raw, "vessel")
    knud = _take(ves, "knudtson")
    k_art = _num(knud.pop("artery", 0.88), "vessel.knudtson.artery")
    k_vei = _num(knud.pop("vein", 0.95), "vessel.knudtson.vein")
    _reject_leftovers(knud, "[vessel.knudtson]")
    _check(0.0 < k_art <= 1.0 and 0.0 < k_vei <= 1.0, "knudtson coefficients must lie in (0, 1]")
    annulus = _pair(ves.pop("annulus", (1.5, 2.0)), "vessel.annulus")
    _check(annulus[0] > 0, "vessel.annulus inner bound must be positive")
    vessel = VesselConfig(
        annulus=annulus,
        knudtson=KnudtsonConfig(k_art, k_vei),
        min_branch_len_px=_num(ves.pop("min_branch_len_px", 10.0), "vessel.min_branch_len_px"),
        min_zone_samples=_int(ves.pop("min_zone_samples", 5), "vessel.min_zone_samples"),
        tortuosity_mode=_choice(
            ves.pop("tortuosity_mode", "arc_chord"), "vessel.tortuosity_mode",
            ("arc_chord", "curvature")),
    )
    _check(vessel.min_branch_len_px > 0, "vessel.min_branch_len_px must be positive")
    _check(vessel.min_zone_samples >= 1, "vessel.min_zone_samples must be >= 1")
    _reject_leftovers(ves, "[vessel]")

    opt = _take(raw, "optic")
    step = _num(opt.pop("ray_step_deg", 1.0), "optic.ray_step_deg")
    _check(0.0 < step <= 90.0, "optic.ray_step_deg must lie in (0, 90]")
    bounds = opt.pop("sector_boundaries_deg", (45.0, 135.0, 225.0, 315.0))
    _check(isinstance(bounds, (list, tuple)) and len(bounds) == 4,
           "optic.sector_boundaries_deg must hold four angles")
    b = tuple(_num(x, "optic.sector_boundaries_deg") for x in bounds)
    _check(all(0.0 <= x < 360.0 for x in b) and list(b) == sorted(b),
           "optic.sector_boundaries_deg must be ascending within [0, 360)")
    optic = OpticConfig(ray_step_deg=step, sector_boundaries_deg=b)
    _reject_leftovers(opt, "[optic]")

    les = _take(raw, "lesion")
    sev = _pair(les.pop("severity_bins", (0.005, 0.02)), "lesion.severity_bins")
    _check(sev[0] > 0, "lesion.severity_bins must be positive")
    frac = _pair(les.pop("size_bins_frac_da", (0.01, 0.05)), "lesion.size_bins_frac_da")
    _check(frac[0] > 0, "lesion.size_bins_frac_da must be positive")
    px = _pair(les.pop("size_bins_px", (64.0, 320.0)), "lesion.size_bins_px")
    _check(px[0] > 0, "lesion.size_bins_px must be positive")
    lesion = LesionConfig(
        size_mode=_choice(les.pop("size_mode", "disc_relative"), "lesion.size_mode",
                          ("disc_relative", "absolute_px")),
        size_bins_frac_da=frac,
        size_bins_px=px,
        severity_bins=sev,
        quadrant_mode=_choice(les.pop("quadrant_mode", "diagonal"), "lesion.quadrant_mode",
                              ("diagonal", "axis_aligned")),
    )
    _reject_leftovers(les, "[lesion]")

    phe = _take(raw, "phenotype")
    phenotype = PhenotypeConfig(
        dispersion_weighting=_choice(
            phe.pop("dispersion_weighting", "uniform"), "phenotype.dispersion_weighting",
            ("uniform", "area")),
    )
    _reject_leftovers(phe, "[phenotype]")

    cur = _take(raw, "curation")
    curation = CurationConfigSection(
        threshold=_num(cur.pop("threshold", 0.75), "curation.threshold"),
        min_largest_frac=_num(cur.pop("min_largest_frac", 0.5), "curation.min_largest_frac"),
        min_component_area=_int(cur.pop("min_component_area", 10), "curation.min_component_area"),
        max_components=_int(cur.pop("max_components", 20), "curation.max_components"),
        spur_len=_num(cur.pop("spur_len", 10.0), "curation.spur_len"),
        max_spurs=_int(cur.pop("max_spurs", 30), "curation.max_spurs"),
    )
    _check(0.0 < curation.threshold < 1.0, "curation.threshold must lie in (0, 1)")
    _check(0.0 < curation.min_largest_frac <= 1.0, "curation.min_largest_frac must lie in (0, 1]")
    _check(curation.min_component_area >= 0, "curation.min_component_area must be >= 0")
    _check(curation.max_components >= 0, "curation.max_components must be >= 0")
    _check(curation.spur_len > 0, "curation.spur_len must be positive")
    _check(curation.max_spurs >= 0, "curation.max_spurs must be >= 0")
    _reject_leftovers(cur, "[curation]")

    _reject_leftovers(raw, "config root")
    return QuantConfig(laterality, vessel, optic, lesion, phenotype, curation)


def load_config(path: str | None = None) -> QuantConfig:
    """Read configuration from ``path``, the environment, or defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is None:
        return QuantConfig()
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config file {path} is not valid TOML: {e}")
    return validate_config(raw)
