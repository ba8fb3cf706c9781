"""PNG ingestion and emission for masks, label maps, probability maps, photos.

All image inputs are PNG files: per-class masks are 8-bit grayscale with any
nonzero value as foreground, label maps are palette-indexed with indices
equal to taxonomy class ids, probability maps are 16-bit grayscale scaled by
1/65535 (8-bit accepted, scaled by 1/255), and photos are RGB. Anything
unreadable raises DecodeError naming the offending path.
"""

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError
from .taxonomy import Registry


def _open(path: str) -> Image.Image:
    try:
        img = Image.open(path)
        img.load()
        return img
    except FileNotFoundError:
        raise DecodeError(f"file not found: {path}")
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as e:
        raise DecodeError(f"cannot decode {path}: {e}")


def read_mask(path: str) -> np.ndarray:
    """Binary mask from a grayscale or indexed PNG; foreground = value > 0."""
    img = _open(path)
    if img.mode not in ("1", "L", "LA", "P", "I", "I;16"):
        raise DecodeError(f"{path}: expected a grayscale mask, got mode {img.mode}")
    if img.mode == "LA":
        img = img.convert("L")
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise DecodeError(f"{path}: mask must be single-channel, got shape {arr.shape}")
    return arr > 0


def write_mask(path: str, mask: np.ndarray) -> None:
    arr = (np.asarray(mask, dtype=bool) * np.uint8(255))
    Image.fromarray(arr, mode="L").save(path, format="PNG")


def read_labelmap(path: str) -> np.ndarray:
    """Class-id raster from an indexed (or plain 8-bit) PNG."""
    img = _open(path)
    if img.mode not in ("P", "L"):
        raise DecodeError(f"{path}: expected an indexed label map, got mode {img.mode}")
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise DecodeError(f"{path}: label map must be single-channel, got shape {arr.shape}")
    return arr.astype(np.int32)


def write_labelmap(path: str, ids: np.ndarray, registry: Registry) -> None:
    """Palette-indexed PNG whose indices are taxonomy ids; index 0 is background."""
    arr = np.asarray(ids)
    if arr.ndim != 2:
        raise ValueError(f"label map must be 2D, got shape {arr.shape}")
    if arr.min() < 0 or arr.max() > 255:
        raise ValueError("label map ids must fit in one byte")
    palette = [0, 0, 0] * 256
    for cd in registry:
        r, g, b, _ = cd.color
        palette[3 * cd.id: 3 * cd.id + 3] = [r, g, b]
    img = Image.fromarray(arr.astype(np.uint8), mode="P")
    img.putpalette(palette)
    img.save(path, format="PNG")


def read_probmap(path: str) -> np.ndarray:
    """Probability raster in [0, 1] from 16-bit (or 8-bit) grayscale PNG."""
    img = _open(path)
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise DecodeError(f"{path}: probability map must be single-channel, got shape {arr.shape}")
    if img.mode in ("I", "I;16"):
        return arr.astype(np.float64) / 65535.0
    if img.mode == "L":
        return arr.astype(np.float64) / 255.0
    raise DecodeError(f"{path}: expected a grayscale probability map, got mode {img.mode}")


def write_probmap(path: str, prob: np.ndarray) -> None:
    p = np.asarray(prob, dtype=np.float64)
    if p.ndim != 2:
        raise ValueError(f"probability map must be 2D, got shape {p.shape}")
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    arr = np.round(p * 65535.0).astype(np.uint16)
    Image.fromarray(arr).save(path, format="PNG")  # uint16 maps to 16-bit gray


def read_photo_rgb(path: str) -> np.ndarray:
    """(H, W, 3) uint8 from any PNG Pillow can decode."""
    img = _open(path)
    return np.asarray(img.convert("RGB"))


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Rec. 601 luminance in [0, 1]."""
    rgb = np.asarray(rgb, dtype=np.float64)
    return (0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]) / 255.0


def read_photo_gray(path: str) -> np.ndarray:
    img = _open(path)
    if img.mode in ("I", "I;16"):
        return np.asarray(img).astype(np.float64) / 65535.0
    if img.mode in ("1", "L", "LA"):
        return np.asarray(img.convert("L")).astype(np.float64) / 255.0
    return rgb_to_gray(np.asarray(img.convert("RGB")))


def write_rgb(path: str, arr: np.ndarray) -> None:
    a = np.asarray(arr)
    if a.ndim != 3 or a.shape[2] != 3 or a.dtype != np.uint8:
        raise ValueError(f"expected (H, W, 3) uint8, got {a.shape} {a.dtype}")
    Image.fromarray(a, mode="RGB").save(path, format="PNG")
