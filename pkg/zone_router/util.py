import logging
import math
import re
from pathlib import Path

import numpy as np
import orjson

from zone_router.exceptions import MalformedInputError, MissingInputError

EARTH_RADIUS_M = 6_371_008.8

# X-N.MY, e.g. "A-1.2B"; X-N is the main zone
ZONE_ID_RE = re.compile(r"^(?P<x>[A-Za-z]+)-(?P<n>\d+)\.(?P<m>\d+)(?P<y>[A-Za-z]+)$")

# string literals are matched whole so that NaN inside them is left alone
_NAN_TOKEN_RE = re.compile(rb'"(?:[^"\\]|\\.)*"|\bNaN\b', re.DOTALL)

_warned_zone_ids = set()


def main_zone(zone_id):
    """(X, N) pair of a zone id or None if the id doesn't follow X-N.MY"""
    match = ZONE_ID_RE.match(zone_id)
    if match is None:
        if zone_id not in _warned_zone_ids:
            _warned_zone_ids.add(zone_id)
            logging.warning(f"Zone id {zone_id!r} is not of X-N.MY form, it is treated as its own main zone")
        return None
    return match["x"], int(match["n"])


def project(lat, lng, lat0, lng0):
    """Local equirectangular projection around (lat0, lng0), meters"""
    lat = np.asarray(lat, dtype=float)
    lng = np.asarray(lng, dtype=float)
    x = EARTH_RADIUS_M * np.radians(lng - lng0) * math.cos(math.radians(lat0))
    y = EARTH_RADIUS_M * np.radians(lat - lat0)
    return x, y


def unproject(x, y, lat0, lng0):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lat = lat0 + np.degrees(y / EARTH_RADIUS_M)
    lng = lng0 + np.degrees(x / (EARTH_RADIUS_M * math.cos(math.radians(lat0))))
    return lat, lng


def off_diagonal(matrix):
    matrix = np.asarray(matrix)
    return matrix[~np.eye(matrix.shape[0], dtype=bool)]


def minmax_normalize(matrix):
    """Min-max scaling of off-diagonal entries into [0, 1], constant input gives 0, diagonal is 0"""
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[-1]
    result = np.zeros_like(matrix)
    if n < 2:
        return result
    mask = ~np.eye(n, dtype=bool)
    values = matrix[..., mask]
    low = values.min(axis=-1, keepdims=True)
    span = values.max(axis=-1, keepdims=True) - low
    # per leading index, constant slices stay 0
    result[..., mask] = np.divide(values - low, span, out=np.zeros_like(values), where=span > 0)
    return result


def ratio_matrix(numerator, denominator):
    """r[i, j] = numerator[j] / denominator[i]

    Zero denominators are replaced by the largest finite ratio of the matrix (0 if there is none).
    """
    numerator = np.asarray(numerator, dtype=float)
    denominator = np.asarray(denominator, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = numerator[np.newaxis, :] / denominator[:, np.newaxis]
    finite = np.isfinite(ratio)
    fill = ratio[finite].max() if finite.any() else 0.0
    ratio[~finite] = fill
    return ratio


def _replace_bare_nan(raw):
    """Bare NaN values become null, returns the new buffer and the original offsets of replaced tokens"""
    offsets = []
    if b"NaN" not in raw:
        return raw, offsets

    def replace(match):
        if match.group() != b"NaN":
            return match.group()
        offsets.append(match.start())
        return b"null"

    return _NAN_TOKEN_RE.sub(replace, raw), offsets


def _original_offset(offset, nan_offsets):
    # each replacement grows the buffer by one byte
    shift = 0
    for k, start in enumerate(nan_offsets):
        if start + k + len(b"null") > offset:
            break
        shift += 1
    return offset - shift


def read_json(path):
    path = Path(path)
    try:
        raw = path.read_bytes()
    except FileNotFoundError as e:
        raise MissingInputError(f"Required input file {path} is not found") from e
    # Public challenge files contain bare NaN for absent values
    raw, nan_offsets = _replace_bare_nan(raw)
    try:
        return orjson.loads(raw)
    except orjson.JSONDecodeError as e:
        raise MalformedInputError(path, _original_offset(e.pos, nan_offsets), e.msg) from e


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(orjson.dumps(obj, option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY))
