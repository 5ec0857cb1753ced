"""Input data for the learning experiments: IDX files, PCA and synthetic features."""
from __future__ import annotations

import gzip
import struct
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import FormatError

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


def _read_bytes(path: Union[str, Path]) -> bytes:
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return data


def parse_idx(data: bytes, expect_magic: Optional[int] = None) -> np.ndarray:
    """Decode an unsigned-byte IDX payload into an array of its declared shape."""
    if len(data) < 4:
        raise FormatError("IDX payload shorter than its header")
    (magic,) = struct.unpack(">I", data[:4])
    if expect_magic is not None and magic != expect_magic:
        raise FormatError(f"bad IDX magic 0x{magic:08x}, expected 0x{expect_magic:08x}")
    if magic >> 16 != 0 or (magic >> 8) & 0xFF != 0x08:
        raise FormatError(f"unsupported IDX type in magic 0x{magic:08x} (only unsigned bytes)")
    ndim = magic & 0xFF
    if ndim == 0 or len(data) < 4 + 4 * ndim:
        raise FormatError("IDX header truncated")
    dims = struct.unpack(f">{ndim}I", data[4:4 + 4 * ndim])
    body = data[4 + 4 * ndim:]
    count = int(np.prod(dims))
    if len(body) != count:
        raise FormatError(f"IDX body has {len(body)} bytes, header declares {count}")
    return np.frombuffer(body, dtype=np.uint8).reshape(dims)


def write_idx(array: np.ndarray, path: Union[str, Path]) -> None:
    arr = np.asarray(array, dtype=np.uint8)
    header = struct.pack(">I", 0x0800 | arr.ndim) + struct.pack(f">{arr.ndim}I", *arr.shape)
    Path(path).write_bytes(header + arr.tobytes())


def load_idx_images(path) -> np.ndarray:
    arr = parse_idx(_read_bytes(path), IMAGE_MAGIC)
    if arr.ndim != 3:
        raise FormatError("image file must be 3-dimensional")
    return arr


def load_idx_labels(path) -> np.ndarray:
    arr = parse_idx(_read_bytes(path), LABEL_MAGIC)
    if arr.ndim != 1:
        raise FormatError("label file must be 1-dimensional")
    return arr


def pca(data: np.ndarray, k: int):
    """Top-``k`` principal axes of the rows of ``data``.

    Returns ``(components, variances, mean)``; ``components`` has shape
    ``(k, d)`` with variances in decreasing order.  Each axis is signed so
    that its largest-magnitude entry is positive.
    """
    x = np.asarray(data, dtype=float)
    if not 1 <= k <= x.shape[1]:
        raise FormatError(f"cannot take {k} components of {x.shape[1]}-dimensional data")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / max(len(x) - 1, 1)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1][:k]
    comps = vecs[:, order].T
    peak = comps[np.arange(k), np.argmax(np.abs(comps), axis=1)]
    comps *= np.sign(peak)[:, None]
    return comps, np.clip(vals[order], 0.0, None), mean


def scale_features(z: np.ndarray) -> np.ndarray:
    """Divide each column by its largest magnitude so values lie in ``[-1, 1]``."""
    peak = np.abs(z).max(axis=0)
    peak[peak == 0] = 1.0
    return z / peak


def pca_features(images: np.ndarray, n_components: int) -> np.ndarray:
    flat = images.reshape(len(images), -1).astype(float)
    comps, _, mean = pca(flat, n_components)
    return scale_features((flat - mean) @ comps.T)


def load_mnist_pca(image_file, label_file, n_components: int, classes: Optional[Sequence[int]] = None,
                   limit: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
    """Features in ``[-1, 1]`` from the top principal components of an IDX image set."""
    images = load_idx_images(image_file)
    labels = load_idx_labels(label_file)
    if len(images) != len(labels):
        raise FormatError("image and label counts differ")
    if classes is not None:
        keep = np.isin(labels, list(classes))
        images, labels = images[keep], labels[keep]
    if limit is not None:
        images, labels = images[:limit], labels[:limit]
    return pca_features(images, n_components), labels


def synthetic_inputs(n_samples: int, n_features: int, rng) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=(n_samples, n_features))
