"""Instance ingestion (edge lists, TSPLIB, CSV matrices) and seeded generators."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import GeneratorError, ParseError
from .linalg import SymMatrix
from .maxcut import Graph

# Creation attempts for the configuration model before giving up.
REGULAR_RETRY_CAP = 1000

# All randomness flows through numpy's default generator; the algorithm name
# is recorded in reports so experiments replicate across platforms.
RNG_ALGORITHM = "pcg64"

TSPLIB_GEO_RADIUS = 6378.388


def parse_edgelist(text: str, one_indexed: bool = True) -> Graph:
    """Parse lines "u v [w]" into a Graph; '#' starts a comment.

    Vertices are 1-indexed by default.  Duplicate edges, self-loops, bad
    indices, and malformed lines are rejected with the line number.
    """
    offset = 1 if one_indexed else 0
    edges = []
    seen = set()
    max_v = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"line {lineno}: expected 'u v [w]', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric field in {raw!r}") from None
        u -= offset
        v -= offset
        if u < 0 or v < 0:
            raise ParseError(f"line {lineno}: vertex index below {offset}")
        if u == v:
            raise ParseError(f"line {lineno}: self-loop at vertex {u + offset}")
        if w < 0:
            raise ParseError(f"line {lineno}: negative weight {w}")
        if u > v:
            u, v = v, u
        if (u, v) in seen:
            raise ParseError(f"line {lineno}: duplicate edge ({u + offset},{v + offset})")
        seen.add((u, v))
        edges.append((u, v, w))
        max_v = max(max_v, v)
    if max_v < 0:
        raise ParseError("no edges found")
    return Graph(n=max_v + 1, edges=tuple(edges))


def serialize_edgelist(G: Graph, one_indexed: bool = True) -> str:
    """Inverse of parse_edgelist; weights printed only when not 1."""
    offset = 1 if one_indexed else 0
    lines = []
    for u, v, w in G.edges:
        if w == 1.0:
            lines.append(f"{u + offset} {v + offset}")
        else:
            lines.append(f"{u + offset} {v + offset} {w!r}")
    return "\n".join(lines) + "\n"


def _tsplib_nint(x: float) -> int:
    return int(math.floor(x + 0.5))


def _geo_radians(x: float) -> float:
    # TSPLIB coordinates are DDD.MM (degrees and minutes)
    deg = int(x)
    minutes = x - deg
    return math.pi * (deg + 5.0 * minutes / 3.0) / 180.0


def _geo_distance(xi, yi, xj, yj) -> int:
    lat_i, lon_i = _geo_radians(xi), _geo_radians(yi)
    lat_j, lon_j = _geo_radians(xj), _geo_radians(yj)
    q1 = math.cos(lon_i - lon_j)
    q2 = math.cos(lat_i - lat_j)
    q3 = math.cos(lat_i + lat_j)
    return int(TSPLIB_GEO_RADIUS * math.acos(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)) + 1.0)


def parse_tsplib(text: str) -> Graph:
    """TSPLIB instance as a complete weighted graph.

    Supports EDGE_WEIGHT_TYPE EUC_2D (nearest-integer Euclidean, the TSPLIB
    rounding convention) and GEO, and EXPLICIT matrices in FULL_MATRIX,
    UPPER_ROW, or LOWER_DIAG_ROW format.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    spec: dict[str, str] = {}
    i = 0
    section = None
    while i < len(lines):
        ln = lines[i]
        if not ln or ln == "EOF":
            i += 1
            continue
        if ln.endswith("SECTION"):
            section = ln.split(":")[0].strip()
            i += 1
            break
        if ":" in ln:
            key, val = ln.split(":", 1)
            spec[key.strip()] = val.strip()
        i += 1

    try:
        n = int(spec["DIMENSION"])
    except (KeyError, ValueError):
        raise ParseError("missing or bad DIMENSION") from None
    ew_type = spec.get("EDGE_WEIGHT_TYPE", "")

    body_tokens: list[str] = []
    coords: dict[int, tuple[float, float]] = {}
    while i < len(lines):
        ln = lines[i]
        i += 1
        if not ln or ln == "EOF":
            continue
        if ln.endswith("SECTION"):
            # a second section (e.g. DISPLAY_DATA) ends the one we read
            break
        if section == "NODE_COORD_SECTION":
            parts = ln.split()
            if len(parts) != 3:
                raise ParseError(f"bad coordinate line: {ln!r}")
            coords[int(parts[0])] = (float(parts[1]), float(parts[2]))
        else:
            body_tokens.extend(ln.split())

    W = np.zeros((n, n))
    if section == "NODE_COORD_SECTION":
        if len(coords) != n:
            raise ParseError(f"expected {n} coordinates, got {len(coords)}")
        pts = [coords[k + 1] for k in range(n)]
        for a in range(n):
            for b in range(a + 1, n):
                if ew_type == "EUC_2D":
                    d = _tsplib_nint(math.hypot(pts[a][0] - pts[b][0],
                                                pts[a][1] - pts[b][1]))
                elif ew_type == "GEO":
                    d = _geo_distance(pts[a][0], pts[a][1], pts[b][0], pts[b][1])
                else:
                    raise ParseError(f"unsupported EDGE_WEIGHT_TYPE {ew_type!r}")
                W[a, b] = W[b, a] = d
    elif section == "EDGE_WEIGHT_SECTION":
        fmt = spec.get("EDGE_WEIGHT_FORMAT", "")
        vals = [float(t) for t in body_tokens]
        if fmt == "FULL_MATRIX":
            if len(vals) != n * n:
                raise ParseError(f"FULL_MATRIX needs {n * n} values, got {len(vals)}")
            W = np.array(vals).reshape(n, n)
        elif fmt == "UPPER_ROW":
            need = n * (n - 1) // 2
            if len(vals) != need:
                raise ParseError(f"UPPER_ROW needs {need} values, got {len(vals)}")
            it = iter(vals)
            for a in range(n):
                for b in range(a + 1, n):
                    W[a, b] = W[b, a] = next(it)
        elif fmt == "LOWER_DIAG_ROW":
            need = n * (n + 1) // 2
            if len(vals) != need:
                raise ParseError(f"LOWER_DIAG_ROW needs {need} values, got {len(vals)}")
            it = iter(vals)
            for a in range(n):
                for b in range(a + 1):
                    W[a, b] = W[b, a] = next(it)
        else:
            raise ParseError(f"unsupported EDGE_WEIGHT_FORMAT {fmt!r}")
    else:
        raise ParseError(f"no supported data section found (got {section!r})")

    if np.max(np.abs(np.asarray(W) - np.asarray(W).T)) > 0:
        raise ParseError("explicit matrix is not symmetric")
    edges = tuple((a, b, float(W[a, b])) for a in range(n) for b in range(a + 1, n))
    return Graph(n=n, edges=edges)


def parse_csv_matrix(text: str) -> SymMatrix:
    """Square numeric CSV, optional header row and row-label column."""
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty CSV")

    def is_number(tok: str) -> bool:
        try:
            float(tok)
            return True
        except ValueError:
            return False

    if not all(is_number(c) for c in rows[0][0:] if c.strip()):
        rows = rows[1:]  # header row
        if not rows:
            raise ParseError("CSV has a header but no data")
    data = []
    for r, row in enumerate(rows):
        cells = [c.strip() for c in row if c.strip() != ""]
        if cells and not is_number(cells[0]):
            cells = cells[1:]  # row label
        try:
            data.append([float(c) for c in cells])
        except ValueError as exc:
            raise ParseError(f"row {r + 1}: {exc}") from None
    n = len(data)
    if any(len(row) != n for row in data):
        raise ParseError(f"matrix is not square: {n} rows, "
                         f"widths {sorted({len(r) for r in data})}")
    return SymMatrix(np.array(data))


def gen_er(n: int, p: float, seed: int | None = None) -> Graph:
    """Erdos-Renyi G(n,p): each pair independently with probability p."""
    if not (0.0 < p < 1.0):
        raise GeneratorError(f"p must be in (0,1), got {p}")
    if n < 1:
        raise GeneratorError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    draws = rng.random((n, n))
    iu, ju = np.triu_indices(n, k=1)
    mask = draws[iu, ju] < p
    edges = tuple((int(a), int(b), 1.0) for a, b in zip(iu[mask], ju[mask]))
    return Graph(n=n, edges=edges)


def random_regular_edges(n: int, d: int, rng: np.random.Generator) -> set[tuple[int, int]]:
    """Edge set of a random d-regular graph via the configuration model.

    Stubs are paired uniformly; colliding stubs (loops, repeats) are pooled
    and re-paired, restarting when the pool cannot be completed.  Gives up
    after REGULAR_RETRY_CAP creation attempts.
    """
    if d == 0:
        return set()

    def suitable(edges, potential):
        if not potential:
            return True
        for s1 in potential:
            for s2 in potential:
                if s1 == s2:
                    break
                a, b = (s2, s1) if s1 > s2 else (s1, s2)
                if (a, b) not in edges:
                    return True
        return False

    def try_creation():
        edges: set[tuple[int, int]] = set()
        stubs = list(range(n)) * d
        while stubs:
            potential: dict[int, int] = defaultdict(int)
            arr = np.array(stubs)
            rng.shuffle(arr)
            it = iter(arr.tolist())
            for s1, s2 in zip(it, it):
                if s1 > s2:
                    s1, s2 = s2, s1
                if s1 != s2 and (s1, s2) not in edges:
                    edges.add((s1, s2))
                else:
                    potential[s1] += 1
                    potential[s2] += 1
            if not suitable(edges, potential):
                return None
            stubs = [v for v, c in potential.items() for _ in range(c)]
        return edges

    for _ in range(REGULAR_RETRY_CAP):
        edges = try_creation()
        if edges is not None:
            return edges
    raise GeneratorError(
        f"could not assemble a simple {d}-regular graph on {n} vertices "
        f"after {REGULAR_RETRY_CAP} attempts")


def gen_regular(n: int, d: int, seed: int | None = None) -> Graph:
    """Uniformly random simple d-regular graph on n vertices."""
    if not 0 <= d < n:
        raise GeneratorError(f"need 0 <= d < n, got d={d}, n={n}")
    if (n * d) % 2 != 0:
        raise GeneratorError(f"n*d = {n * d} must be even")
    rng = np.random.default_rng(seed)
    edges = random_regular_edges(n, d, rng)
    return Graph(n=n, edges=tuple((u, v, 1.0) for u, v in sorted(edges)))


_GENERATORS = {
    "er": (gen_er, {"n": int, "p": float}),
    "regular": (gen_regular, {"n": int, "d": int}),
    "planted": (None, {"n": int, "d": int, "l": int}),  # resolved lazily
}


@dataclass(frozen=True)
class InstanceSpec:
    """Where an instance comes from: a file or a seeded generator."""

    kind: str  # "file" or "generator"
    path: str | None = None
    fmt: str | None = None  # edgelist | tsplib | csv-matrix
    generator: str | None = None  # er | regular | planted
    params: dict = field(default_factory=dict)
    seed: int | None = None

    @classmethod
    def from_file(cls, path: str, fmt: str | None = None) -> "InstanceSpec":
        if fmt is None:
            lower = path.lower()
            if lower.endswith((".edges", ".edgelist", ".el", ".txt")):
                fmt = "edgelist"
            elif lower.endswith(".tsp"):
                fmt = "tsplib"
            elif lower.endswith(".csv"):
                fmt = "csv-matrix"
            else:
                raise ParseError(f"cannot infer format of {path!r}; pass one explicitly")
        if fmt not in ("edgelist", "tsplib", "csv-matrix"):
            raise ParseError(f"unknown format {fmt!r}")
        return cls(kind="file", path=path, fmt=fmt)

    @classmethod
    def from_genspec(cls, spec: str, seed: int | None = None) -> "InstanceSpec":
        """Parse the mini-language "er:n=50,p=0.25" etc."""
        if ":" not in spec:
            raise ParseError(f"generator spec needs 'name:key=value,...', got {spec!r}")
        name, _, rest = spec.partition(":")
        name = name.strip()
        if name not in _GENERATORS:
            raise ParseError(f"unknown generator {name!r}; "
                             f"choices: {sorted(_GENERATORS)}")
        _, schema = _GENERATORS[name]
        params = {}
        for item in rest.split(","):
            if "=" not in item:
                raise ParseError(f"bad generator parameter {item!r}")
            key, _, val = item.partition("=")
            key = key.strip()
            if key not in schema:
                raise ParseError(f"generator {name!r} does not take {key!r}")
            try:
                params[key] = schema[key](val.strip())
            except ValueError:
                raise ParseError(f"bad value for {key!r}: {val!r}") from None
        missing = set(schema) - set(params)
        if missing:
            raise ParseError(f"generator {name!r} missing parameters {sorted(missing)}")
        return cls(kind="generator", generator=name, params=params, seed=seed)

    def describe(self) -> str:
        if self.kind == "file":
            return f"file:{self.path}"
        kv = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.generator}:{kv}"

    def load_graph(self, seed: int | None = None) -> Graph:
        if self.kind == "file":
            with open(self.path) as fh:
                text = fh.read()
            if self.fmt == "edgelist":
                return parse_edgelist(text)
            if self.fmt == "tsplib":
                return parse_tsplib(text)
            raise ParseError(f"{self.fmt} files do not describe a graph")
        use_seed = seed if seed is not None else self.seed
        if self.generator == "er":
            return gen_er(self.params["n"], self.params["p"], use_seed)
        if self.generator == "regular":
            return gen_regular(self.params["n"], self.params["d"], use_seed)
        from .maxcut import planted_instance

        return planted_instance(self.params["n"], self.params["d"],
                                self.params["l"], use_seed)

    def load_matrix(self) -> SymMatrix:
        if self.kind != "file" or self.fmt != "csv-matrix":
            raise ParseError("matrix input requires a csv-matrix file")
        with open(self.path) as fh:
            return parse_csv_matrix(fh.read())
