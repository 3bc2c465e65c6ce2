"""
Reading and writing path documents.

A document is YAML (JSON is accepted too, being a subset)::

    label: my-loop            # optional
    segments:
      - {kind: meridian, fixed: 0.0, from: 0.0, to: 3.141592653589793}
      - {kind: parallel, fixed: 3.141592653589793, from: 0.0, to: 1.0}
      - {kind: custom, points: [[1.0, 0.0], [1.2, 0.3], [1.1, 0.7]]}

or a preset::

    preset: figure-8          # or orange-slice
    phi0: 0.0
    phi1: 1.5

All angles are radians given as plain numbers.  A ``custom`` segment is a
cubic spline through its ``(theta, phi)`` points, spaced uniformly in the
segment parameter.
"""

import math

import yaml

from .errors import InvalidInputError
from .paths import PathSegment, PathSpec, figure_eight, orange_slice, same_point

PRESETS = {"orange-slice": orange_slice, "figure-8": figure_eight}
_LINE = "__line__"


class PathDocumentError(InvalidInputError):
    """Malformed path document; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node, deep=False):
    mapping = yaml.SafeLoader.construct_mapping(loader, node, deep=deep)
    mapping[_LINE] = node.start_mark.line + 1
    return mapping


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def _number(value, name, line):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise PathDocumentError(f"{name} must be a number in radians, got {value!r}", line)
    value = float(value)
    if not math.isfinite(value):
        raise PathDocumentError(f"{name} must be finite", line)
    return value


def _theta(value, name, line):
    v = _number(value, name, line)
    if not -1e-12 <= v <= math.pi + 1e-12:
        raise PathDocumentError(f"{name}={v} is outside [0, pi]", line)
    return v


def _check_keys(entry, allowed, line, what):
    extra = sorted(set(entry) - set(allowed) - {_LINE})
    if extra:
        raise PathDocumentError(f"unknown field(s) in {what}: {', '.join(map(str, extra))}", line)


def _segment(entry, k):
    if not isinstance(entry, dict):
        raise PathDocumentError(f"segment {k} must be a mapping")
    line = entry.get(_LINE)
    kind = entry.get("kind")
    if kind in ("meridian", "parallel"):
        _check_keys(entry, ("kind", "fixed", "from", "to"), line, f"segment {k}")
        for key in ("fixed", "from", "to"):
            if key not in entry:
                raise PathDocumentError(f"segment {k} ({kind}) is missing '{key}'", line)
        if kind == "meridian":
            return PathSegment.meridian(_number(entry["fixed"], "fixed", line),
                                        _theta(entry["from"], "from", line),
                                        _theta(entry["to"], "to", line))
        return PathSegment.parallel(_theta(entry["fixed"], "fixed", line),
                                    _number(entry["from"], "from", line),
                                    _number(entry["to"], "to", line))
    if kind == "custom":
        _check_keys(entry, ("kind", "points"), line, f"segment {k}")
        pts = entry.get("points")
        if not isinstance(pts, list) or len(pts) < 2:
            raise PathDocumentError(f"segment {k} (custom) needs a list of at least two points", line)
        clean = []
        for j, pt in enumerate(pts):
            if not isinstance(pt, list) or len(pt) != 2:
                raise PathDocumentError(f"segment {k} point {j} must be [theta, phi]", line)
            clean.append((_theta(pt[0], f"point {j} theta", line),
                          _number(pt[1], f"point {j} phi", line)))
        return PathSegment.from_points(clean)
    raise PathDocumentError(f"segment {k}: kind must be meridian, parallel or custom, got {kind!r}", line)


def parse_path_file(text: str) -> PathSpec:
    """Parse and validate a path document; raises ``PathDocumentError``."""
    try:
        doc = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise PathDocumentError(f"not valid YAML/JSON: {getattr(exc, 'problem', exc)}",
                                mark.line + 1 if mark else None) from exc
    if not isinstance(doc, dict):
        raise PathDocumentError("document must be a mapping with 'segments' or 'preset'")
    line = doc.get(_LINE)
    if "preset" in doc:
        _check_keys(doc, ("preset", "phi0", "phi1", "label"), line, "preset document")
        name = doc["preset"]
        if name not in PRESETS:
            raise PathDocumentError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}", line)
        for key in ("phi0", "phi1"):
            if key not in doc:
                raise PathDocumentError(f"preset document is missing '{key}'", line)
        return PRESETS[name](_number(doc["phi0"], "phi0", line), _number(doc["phi1"], "phi1", line))
    _check_keys(doc, ("segments", "label"), line, "path document")
    segs = doc.get("segments")
    if not isinstance(segs, list) or not segs:
        raise PathDocumentError("'segments' must be a non-empty list", line)
    built = []
    for k, entry in enumerate(segs):
        seg = _segment(entry, k)
        if built:
            a = built[-1].endpoints()[1]
            b = seg.endpoints()[0]
            if not same_point(a, b):
                raise PathDocumentError(
                    f"segment {k} starts at (theta={b[0]:.6g}, phi={b[1]:.6g}) but segment "
                    f"{k - 1} ends at (theta={a[0]:.6g}, phi={a[1]:.6g})", entry.get(_LINE))
        built.append(seg)
    return PathSpec(tuple(built), str(doc.get("label", "path")))


def read_path_file(filename) -> PathSpec:
    try:
        with open(filename, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise PathDocumentError(f"cannot read {filename}: {exc.strerror}") from exc
    return parse_path_file(text)


def dump_path(spec: PathSpec) -> str:
    """Serialise a path so that ``parse_path_file(dump_path(p))`` reproduces it."""
    segs = []
    for k, seg in enumerate(spec.segments):
        if seg.kind == "custom":
            if seg.points is None:
                raise InvalidInputError(f"segment {k} is a custom function without sample points")
            segs.append({"kind": "custom", "points": [[float(t), float(p)] for t, p in seg.points]})
        else:
            segs.append({"kind": seg.kind, "fixed": seg.fixed, "from": seg.start, "to": seg.end})
    return yaml.safe_dump({"label": spec.label, "segments": segs}, sort_keys=False)
