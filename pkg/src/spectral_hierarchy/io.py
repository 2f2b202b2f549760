"""Input parsing, cached dataset fetching and deterministic CSV/JSON output."""

from __future__ import annotations

import gzip
import hashlib
import json
import math
import os
import re
import tempfile
import urllib.error
import urllib.request
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .core import SpectralSequence, validate_sequence
from .errors import EmptyPayload, InputError, NetworkError, NonMonotone, ParseError

CACHE_ENV = "SPECTRAL_CACHE_DIR"
_DECIMALS = re.compile(r"\.(\d+)")


def _text(data) -> str:
    if isinstance(data, (bytes, bytearray)):
        if data[:2] == b"\x1f\x8b":
            data = gzip.decompress(data)
        return data.decode("utf-8")
    return str(data)


def _numeric_lines(text):
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        yield lineno, s


def parse_zero_table(data, label="zeta zeros") -> SpectralSequence:
    """One value per line; ``#`` comments and blank lines are skipped.

    Accepts text, bytes or gzip-compressed bytes.  Errors report 1-based line
    numbers of the input.
    """
    values, lines = [], []
    for lineno, s in _numeric_lines(_text(data)):
        try:
            v = float(s)
        except ValueError:
            raise ParseError(lineno, s) from None
        if not math.isfinite(v):
            raise ParseError(lineno, s)
        values.append(v)
        lines.append(lineno)
    for i in range(1, len(values)):
        if values[i] <= values[i - 1]:
            raise NonMonotone(lines[i], f"value on line {lines[i]} does not increase")
    return validate_sequence(values, label)


def table_precision(data) -> int:
    """Largest number of decimals used by any value in a table."""
    best = 0
    for _, s in _numeric_lines(_text(data)):
        m = _DECIMALS.search(s)
        if m:
            best = max(best, len(m.group(1)))
    return best


def read_sequence_file(path, limit: Optional[int] = None, label=None) -> SpectralSequence:
    """Read a one-value-per-line table (optionally gzip) and keep the first ``limit`` values."""
    raw = Path(path).read_bytes()
    seq = parse_zero_table(raw, label or Path(path).name)
    if limit is not None and limit < len(seq):
        return validate_sequence(seq.values[:limit], seq.label)
    return seq


def read_graph_spec(path):
    from .graph import QuantumGraph

    try:
        spec = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    return QuantumGraph.from_dict(spec)


# --------------------------------------------------------------------------
# fetching


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "spectral_hierarchy"


def urllib_transport(url: str, timeout: float = 60.0) -> bytes:
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            return resp.read()
    except (urllib.error.URLError, OSError) as exc:
        raise NetworkError(f"cannot fetch {url}: {exc}") from exc


def cache_path(url: str, cache_dir=None) -> Path:
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    digest = hashlib.sha256(url.encode("utf-8")).hexdigest()[:24]
    name = re.sub(r"[^A-Za-z0-9._-]", "_", url.rstrip("/").rsplit("/", 1)[-1]) or "payload"
    return cache / f"{digest}-{name}"


def fetch_dataset(url: str, cache_dir=None, offline: bool = False,
                  transport: Optional[Callable[[str], bytes]] = None) -> Path:
    """Download ``url`` once into the cache and return the cached path.

    A non-empty cached copy is returned without touching the transport.
    """
    target = cache_path(url, cache_dir)
    if target.exists() and target.stat().st_size > 0:
        return target
    if offline:
        raise NetworkError(f"{url} is not cached and offline mode is on")
    payload = (transport or urllib_transport)(url)
    if not payload:
        raise EmptyPayload(f"{url} returned no data")
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".part-")
    with os.fdopen(fd, "wb") as fh:
        fh.write(payload)
    os.replace(tmp, target)
    return target


# --------------------------------------------------------------------------
# output


def fmt(x) -> str:
    """17 significant digits, '.' separator; strings pass through."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(path, header, columns):
    rows = zip(*columns)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def emit_level_csv(level, path):
    k = np.asarray(level.values)
    n = np.arange(1, k.size + 1)
    write_csv(path, ("n", "k", "delta"), (n, k, k - n))


def emit_staircase_samples(path, k, n_exact, n_expansion, n_average):
    write_csv(path, ("k", "N_exact", "N_expansion", "N_average"), (k, n_exact, n_expansion, n_average))


def emit_histogram_csv(h, path):
    e = h.bin_edges
    write_csv(path, ("bin_left", "bin_right", "count", "density"), (e[:-1], e[1:], h.counts, h.normalized_density))


def _json_value(v, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{pad}{json.dumps(str(key))}: {_json_value(v[key], indent, level + 1)}" for key in sorted(v)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        if len(v) == 0:
            return "[]"
        items = [pad + _json_value(x, indent, level + 1) for x in v]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(v).__name__}")


def dumps(obj, indent=2) -> str:
    """JSON with sorted keys and floats at 17 significant digits."""
    return _json_value(obj, indent, 0) + "\n"


def emit_report_json(report, path):
    data = report.to_dict() if hasattr(report, "to_dict") else report
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(dumps(data))
