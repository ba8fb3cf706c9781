"""Typed error hierarchy.

Every error carries a short stable ``code`` used verbatim as the ``reason``
of undefined report fields and in CLI diagnostics.
"""


class FundusQuantError(Exception):
    """Base class; ``code`` defaults to the subclass name."""

    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


def _make(name: str, doc: str) -> type:
    cls = type(name, (FundusQuantError,), {"__doc__": doc, "code": name})
    return cls


UnknownClass = _make("UnknownClass", "Class id or name not present in the registry.")
ShapeMismatch = _make("ShapeMismatch", "Input rasters disagree in shape.")
EmptyMask = _make("EmptyMask", "Operation requires a non-empty mask.")
NotBinary = _make("NotBinary", "Raster is not a binary mask.")
NoFOV = _make("NoFOV", "Field of view could not be estimated.")
NoDisc = _make("NoDisc", "Optic disc absent and no geometry override given.")
NoCup = _make("NoCup", "Optic cup mask is empty.")
FoveaNotFound = _make("FoveaNotFound", "Fovea localization failed.")
NoContext = _make("NoContext", "Operation requires an image context.")
DegenerateZone = _make("DegenerateZone", "Measurement zone is empty or radius invalid.")
NoVesselInZone = _make("NoVesselInZone", "No centerline samples inside the zone.")
InsufficientVessels = _make("InsufficientVessels", "Too few vessel branches for the caliber summary.")
NoBranches = _make("NoBranches", "Skeleton graph has no branches.")
NotThin = _make("NotThin", "Raster is not a thin (single-pixel) skeleton.")
TooSmall = _make("TooSmall", "Raster too small for the requested analysis.")
BadBins = _make("BadBins", "Bin thresholds are not strictly increasing.")
BadThreshold = _make("BadThreshold", "Threshold outside the open interval (0, 1).")
AllUndefined = _make("AllUndefined", "Every value in the aggregate is undefined.")
DecodeError = _make("DecodeError", "File could not be decoded.")
ManifestError = _make("ManifestError", "Manifest is missing or malformed.")
ConfigError = _make("ConfigError", "Configuration is malformed or out of range.")
