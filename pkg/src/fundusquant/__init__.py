"""Deterministic retinal biomarkers from multi-class segmentation masks.

The package turns per-class fundus masks (vessels, optic disc/cup,
tessellation, atrophies, lesions) into a standardized report of scalar
biomarkers, scores predicted masks against references, and curates
pseudo-labels by confidence and topology.
"""

from ._version import __version__
from .config import QuantConfig, load_config, validate_config
from .context import FundusContext, build_context, determine_laterality
from .curation import (
    CurationConfig,
    CurationVerdict,
    RuleResult,
    count_spurs,
    curate,
    threshold_probmap,
    topology_filter,
)
from .errors import (
    AllUndefined,
    BadThreshold,
    ConfigError,
    DecodeError,
    DegenerateZone,
    EmptyMask,
    FoveaNotFound,
    FundusQuantError,
    InsufficientVessels,
    ManifestError,
    NoCup,
    NoDisc,
    NoFOV,
    NoVesselInZone,
    ShapeMismatch,
    UnknownClass,
)
from .graph import Branch, Node, SkeletonGraph, skeleton_graph
from .lesions import LesionStats, lesion_stats, quadrant_counts
from .manifest import ImageEntry, MetricPair, load_manifest, load_pairs
from .optic import DiscCupGeometry, RimProfile, cdr, disc_cup_geometry, isnt
from .phenotypes import (
    MyopiaStats,
    MyopiaTypeStats,
    TessellationStats,
    myopia_stats,
    tessellation_stats,
)
from .pipeline import quantify_image, run_batch
from .raster import (
    boundary_pixels,
    connected_components,
    convex_hull_mask,
    distance_transform,
    estimate_fov,
    hull_polygon_xy,
    otsu_threshold,
    skeletonize,
)
from .report import count_metrics, csv_rows, from_json, metric_leaves, to_json
from .segmetrics import (
    METRICS,
    AggregateResult,
    MetricResult,
    aggregate,
    cldice,
    compute_metric,
    dsc,
    hd95,
    jaccard,
    micro_average,
    precision,
)
from .taxonomy import ClassDef, Registry, default_registry, load_registry
from .vessels import (
    VesselMetrics,
    box_counting_fd,
    caliber_summary,
    knudtson_equivalent,
    measurement_annulus,
    sample_widths,
    tortuosity,
    vessel_graph,
    vessel_metrics,
)

__all__ = [
    "__version__",
    # configuration
    "QuantConfig", "load_config", "validate_config",
    # errors
    "FundusQuantError", "ConfigError", "ManifestError", "DecodeError",
    "ShapeMismatch", "UnknownClass", "EmptyMask",
    "AllUndefined", "BadThreshold", "NoFOV", "NoDisc", "NoCup",
    "NoVesselInZone", "InsufficientVessels", "FoveaNotFound",
    "DegenerateZone",
    # raster primitives
    "distance_transform", "skeletonize", "connected_components",
    "convex_hull_mask", "hull_polygon_xy", "boundary_pixels",
    "otsu_threshold", "estimate_fov",
    # skeleton graph
    "SkeletonGraph", "Node", "Branch", "skeleton_graph",
    # vessels
    "VesselMetrics", "vessel_graph", "sample_widths", "measurement_annulus",
    "knudtson_equivalent", "caliber_summary", "box_counting_fd",
    "tortuosity", "vessel_metrics",
    # optic nerve head
    "DiscCupGeometry", "RimProfile", "disc_cup_geometry", "cdr", "isnt",
    # lesions and phenotypes
    "LesionStats", "lesion_stats", "quadrant_counts",
    "TessellationStats", "MyopiaTypeStats", "MyopiaStats",
    "tessellation_stats", "myopia_stats",
    # anatomical context
    "FundusContext", "build_context", "determine_laterality",
    # segmentation quality metrics
    "MetricResult", "AggregateResult", "METRICS", "dsc", "jaccard",
    "precision", "hd95", "cldice", "compute_metric", "aggregate",
    "micro_average",
    # curation
    "CurationConfig", "RuleResult", "CurationVerdict", "threshold_probmap",
    "count_spurs", "topology_filter", "curate",
    # taxonomy
    "ClassDef", "Registry", "load_registry", "default_registry",
    # manifest and reports
    "ImageEntry", "MetricPair", "load_manifest", "load_pairs",
    "quantify_image", "run_batch",
    "to_json", "from_json", "csv_rows", "metric_leaves", "count_metrics",
]
