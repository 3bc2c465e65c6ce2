"""
Piecewise-smooth curves on the sphere of magnetic-field directions.

A path is a sequence of segments in the ``(theta, phi)`` parameter plane.
Poles are treated as ordinary parameter points: a segment running along
``theta = 0`` with advancing ``phi`` is geometrically stationary but kept as
its own segment.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .errors import InvalidInputError

KINDS = ("meridian", "parallel", "custom")
ENDPOINT_TOL = 1e-9


def _at_pole(theta):
    return abs(theta) < ENDPOINT_TOL or abs(theta - math.pi) < ENDPOINT_TOL


def same_point(a, b, tol=ENDPOINT_TOL):
    """Whether two ``(theta, phi)`` pairs are the same point of the sphere."""
    if abs(a[0] - b[0]) > tol:
        return False
    if _at_pole(a[0]):
        return True
    d = (a[1] - b[1]) % (2 * math.pi)
    return min(d, 2 * math.pi - d) <= tol


@dataclass(frozen=True)
class PathSegment:
    """One smooth piece of a path.

    ``meridian``: ``phi = fixed``, ``theta`` runs ``start -> end``.
    ``parallel``: ``theta = fixed``, ``phi`` runs ``start -> end``.
    ``custom``: ``func(t) -> (theta, phi)`` for ``t`` in ``[0, 1]``;
    ``points`` keeps the knots when the segment came from a spline and
    ``deriv(t) -> (dtheta/dt, dphi/dt)`` is optional (finite differences
    are used without it).
    """

    kind: str
    fixed: float = 0.0
    start: float = 0.0
    end: float = 0.0
    func: Optional[Callable] = None
    points: Optional[Tuple[Tuple[float, float], ...]] = None
    deriv: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown segment kind {self.kind!r}")
        if self.kind == "custom" and self.func is None:
            raise InvalidInputError("custom segment needs a function or points")
        if self.kind == "meridian":
            self._check_theta(self.start, self.end)
        elif self.kind == "parallel":
            self._check_theta(self.fixed)

    @staticmethod
    def _check_theta(*values):
        for v in values:
            if not -1e-12 <= v <= math.pi + 1e-12:
                raise InvalidInputError(f"theta={v} outside [0, pi]")

    @classmethod
    def meridian(cls, phi, theta_from, theta_to):
        return cls("meridian", float(phi), float(theta_from), float(theta_to))

    @classmethod
    def parallel(cls, theta, phi_from, phi_to):
        return cls("parallel", float(theta), float(phi_from), float(phi_to))

    @classmethod
    def custom(cls, func, deriv=None):
        return cls("custom", func=func, deriv=deriv)

    @classmethod
    def from_points(cls, points):
        """Cubic spline through ``(theta, phi)`` knots spaced uniformly in ``t``."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise InvalidInputError("custom segment needs at least two (theta, phi) points")
        cls._check_theta(*pts[:, 0])
        knots = np.linspace(0.0, 1.0, len(pts))
        spline = CubicSpline(knots, pts, axis=0)
        dspline = spline.derivative()

        def func(t, _s=spline):
            v = _s(np.clip(t, 0.0, 1.0))
            return v[..., 0], v[..., 1]

        def deriv(t, _d=dspline):
            v = _d(np.clip(t, 0.0, 1.0))
            return v[..., 0], v[..., 1]

        return cls("custom", func=func, points=tuple(map(tuple, pts.tolist())), deriv=deriv)

    def evaluate(self, t):
        """``(theta, phi)`` arrays at segment parameters ``t`` in ``[0, 1]``."""
        t = np.asarray(t, dtype=float)
        if self.kind == "meridian":
            return self.start + (self.end - self.start) * t, np.full_like(t, self.fixed)
        if self.kind == "parallel":
            return np.full_like(t, self.fixed), self.start + (self.end - self.start) * t
        theta, phi = self.func(t)
        theta = np.broadcast_to(np.asarray(theta, dtype=float), t.shape).copy()
        phi = np.broadcast_to(np.asarray(phi, dtype=float), t.shape).copy()
        if theta.size and (theta.min() < -1e-12 or theta.max() > math.pi + 1e-12):
            raise InvalidInputError("custom segment leaves theta in [0, pi]")
        return np.clip(theta, 0.0, math.pi), phi

    def endpoints(self):
        th, ph = self.evaluate(np.array([0.0, 1.0]))
        return (float(th[0]), float(ph[0])), (float(th[1]), float(ph[1]))

    def reversed(self):
        if self.kind == "custom":
            if self.points is not None:
                return PathSegment.from_points(self.points[::-1])
            f, d = self.func, self.deriv

            def rd(t, _d=d):
                dt, dp = _d(1.0 - np.asarray(t))
                return -dt, -dp

            return PathSegment("custom", func=lambda t, _f=f: _f(1.0 - np.asarray(t)),
                               deriv=rd if d is not None else None)
        return PathSegment(self.kind, self.fixed, self.end, self.start)

    def loop_integral(self, rtol=1e-12):
        """``int (1 - cos theta) dphi`` along this segment.

        Closed form for meridians and parallels; adaptive quadrature for
        custom segments, using ``deriv`` when available and a five-point
        stencil otherwise.
        """
        if self.kind == "meridian":
            return 0.0
        if self.kind == "parallel":
            return 2.0 * math.sin(self.fixed / 2) ** 2 * (self.end - self.start)
        h = 1e-3

        def dphi(t):
            if self.deriv is not None:
                return float(np.asarray(self.deriv(np.array([t]))[1])[0])
            # shift the stencil inside [0, 1] near the ends
            c = min(max(t, 2 * h), 1 - 2 * h)
            _, ph = self.evaluate(c + h * np.array([-2.0, -1.0, 1.0, 2.0]))
            d1 = (ph[0] - 8 * ph[1] + 8 * ph[2] - ph[3]) / (12 * h)
            return d1

        def integrand(t):
            th, _ = self.evaluate(np.array([t]))
            return (1.0 - math.cos(th[0])) * dphi(t)

        value, err = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=rtol, limit=200)
        if not math.isfinite(value) or err > 1e-8 * max(1.0, abs(value)):
            raise InvalidInputError(f"custom segment integral did not converge (err={err:.2e})")
        return value


@dataclass(frozen=True)
class PathSpec:
    segments: Tuple[PathSegment, ...]
    label: str = "path"

    def __post_init__(self):
        if not self.segments:
            raise InvalidInputError("a path needs at least one segment")
        object.__setattr__(self, "segments", tuple(self.segments))
        for k in range(1, len(self.segments)):
            a = self.segments[k - 1].endpoints()[1]
            b = self.segments[k].endpoints()[0]
            if not same_point(a, b):
                raise InvalidInputError(
                    f"segments {k - 1} and {k} do not join: {a} vs {b}")

    @property
    def start(self):
        return self.segments[0].endpoints()[0]

    @property
    def end(self):
        return self.segments[-1].endpoints()[1]

    @property
    def closed(self) -> bool:
        return same_point(self.start, self.end)

    @property
    def degenerate(self) -> bool:
        """True when every segment is a single point of the sphere."""
        for seg in self.segments:
            a, b = seg.endpoints()
            if seg.kind == "meridian" and abs(a[0] - b[0]) > ENDPOINT_TOL:
                return False
            if seg.kind == "parallel" and not _at_pole(seg.fixed) and abs(a[1] - b[1]) > ENDPOINT_TOL:
                return False
            if seg.kind == "custom":
                th, ph = seg.evaluate(np.linspace(0, 1, 33))
                pts = list(zip(th, ph))
                if any(not same_point(pts[0], p) for p in pts[1:]):
                    return False
        return True

    def loop_integral(self):
        """``int (1 - cos theta) dphi`` over the whole path (quadrature oracle)."""
        return math.fsum(seg.loop_integral() for seg in self.segments)

    def reversed(self):
        return PathSpec(tuple(s.reversed() for s in reversed(self.segments)), self.label + "-reversed")

    def __add__(self, other):
        return PathSpec(self.segments + other.segments, f"{self.label}+{other.label}")


def orange_slice(phi0, phi1):
    """Pole-to-pole loop down the meridian ``phi0`` and back up ``phi1``."""
    segs = (
        PathSegment.meridian(phi0, 0.0, math.pi),
        PathSegment.parallel(math.pi, phi0, phi1),
        PathSegment.meridian(phi1, math.pi, 0.0),
        PathSegment.parallel(0.0, phi1, phi1 + math.pi),
    )
    return PathSpec(segs, "orange-slice")


def figure_eight(phi0, phi1):
    """Two orange slices of opposite orientation; zero net solid angle."""
    first = orange_slice(phi0, phi1).segments
    second = (
        PathSegment.meridian(phi1 + math.pi, 0.0, math.pi),
        PathSegment.parallel(math.pi, phi1 + math.pi, phi0 + math.pi),
        PathSegment.meridian(phi0 + math.pi, math.pi, 0.0),
        PathSegment.parallel(0.0, phi0 + math.pi, phi0),
    )
    return PathSpec(first + second, "figure-8")


def point_path(theta, phi):
    """A path that stays at one point."""
    seg = PathSegment.meridian(phi, theta, theta)
    return PathSpec((seg,), "point")


def _unit(theta, phi):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def geodesic(theta0, phi0, theta1, phi1):
    """Great-circle arc as a custom segment.

    Endpoints must be off the poles and the arc must not pass over a pole;
    ``phi`` then stays within ``pi`` of ``phi0`` and is continuous.
    """
    a, b = _unit(theta0, phi0), _unit(theta1, phi1)
    omega = math.acos(max(-1.0, min(1.0, float(a @ b))))
    if omega < 1e-14 or abs(omega - math.pi) < 1e-9:
        raise InvalidInputError("geodesic endpoints coincide or are antipodal")
    sin_om = math.sin(omega)

    def func(t):
        t = np.asarray(t, dtype=float)
        v = (np.sin((1 - t) * omega)[..., None] * a + np.sin(t * omega)[..., None] * b) / sin_om
        theta = np.arccos(np.clip(v[..., 2], -1.0, 1.0))
        rel = np.arctan2(v[..., 1], v[..., 0]) - phi0
        return theta, phi0 + np.mod(rel + math.pi, 2 * math.pi) - math.pi

    th, _ = func(np.linspace(0.0, 1.0, 257))
    if th.min() < 1e-3 or th.max() > math.pi - 1e-3:
        raise InvalidInputError("geodesic passes too close to a pole")
    def deriv(t):
        t = np.asarray(t, dtype=float)
        v = (np.sin((1 - t) * omega)[..., None] * a + np.sin(t * omega)[..., None] * b) / sin_om
        dv = omega * (-np.cos((1 - t) * omega)[..., None] * a
                      + np.cos(t * omega)[..., None] * b) / sin_om
        rho2 = v[..., 0] ** 2 + v[..., 1] ** 2
        dphi = (v[..., 0] * dv[..., 1] - v[..., 1] * dv[..., 0]) / rho2
        dtheta = -dv[..., 2] / np.sqrt(rho2)
        return dtheta, dphi

    return PathSegment.custom(func, deriv)


@dataclass(frozen=True)
class SampledPath:
    """Discretised path: nodes ``(t, theta, phi)`` plus step midpoints.

    ``mid_theta[k]``/``mid_phi[k]`` belong to the step from node ``k`` to
    ``k + 1`` (NaN on the last node of each segment).

    ``boundaries[k]`` is the node index where segment ``k`` starts; the
    last entry is the final node index.  Nodes on segment joints are stored
    twice (once per segment) so a coordinate jump at a pole never becomes a
    step.
    """

    t: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    boundaries: Tuple[int, ...]
    closed: bool
    mid_theta: np.ndarray
    mid_phi: np.ndarray

    def segment_slices(self):
        """``[(node_start, node_stop)]`` inclusive ranges of each segment."""
        b = self.boundaries
        return [(b[k], b[k + 1] - 1) for k in range(len(b) - 1)]

    @property
    def n_steps(self):
        return sum(stop - start for start, stop in self.segment_slices())


def sample(spec: PathSpec, n_per_segment: int = 2000, reparam=None) -> SampledPath:
    """Sample ``n_per_segment`` nodes per segment, uniform in the segment parameter.

    ``reparam`` optionally maps uniform ``u`` in ``[0, 1]`` to a monotone
    ``s(u)`` with ``s(0) = 0`` and ``s(1) = 1``; the geometric path is
    unchanged, only the node spacing moves.
    """
    n = int(n_per_segment)
    if n < 2:
        raise InvalidInputError("need at least two nodes per segment")
    nseg = len(spec.segments)
    ts, ths, phs, mth, mph, bounds = [], [], [], [], [], []
    u = np.linspace(0.0, 1.0, n)
    s = u if reparam is None else np.asarray(reparam(u), dtype=float)
    if reparam is not None:
        s[0], s[-1] = 0.0, 1.0
        if np.any(np.diff(s) <= 0):
            raise InvalidInputError("reparametrisation must be strictly increasing")
    s_mid = 0.5 * (s[1:] + s[:-1])
    count = 0
    for k, seg in enumerate(spec.segments):
        th, ph = seg.evaluate(s)
        mt, mp = seg.evaluate(s_mid)
        # align with nodes: entry k is the midpoint of step k -> k+1
        mt, mp = np.append(mt, np.nan), np.append(mp, np.nan)
        bounds.append(count)
        ts.append((k + s) / nseg)
        ths.append(th)
        phs.append(ph)
        mth.append(mt)
        mph.append(mp)
        count += n
    bounds.append(count)
    return SampledPath(
        np.concatenate(ts), np.concatenate(ths), np.concatenate(phs),
        tuple(bounds), spec.closed, np.concatenate(mth), np.concatenate(mph))


def solid_angle(path: SampledPath) -> float:
    """``oint (1 - cos theta) dphi`` by per-segment trapezoidal quadrature.

    Exact for meridians (``dphi = 0``) and parallels (constant ``theta``).
    """
    total = []
    for start, stop in path.segment_slices():
        f = 1.0 - np.cos(path.theta[start:stop + 1])
        dphi = np.diff(path.phi[start:stop + 1])
        total.append(float(np.sum(0.5 * (f[1:] + f[:-1]) * dphi)))
    return math.fsum(total)


def random_point(rng, margin=0.3):
    """Uniform-in-area point with ``theta`` kept ``margin`` away from the poles."""
    lo, hi = math.cos(math.pi - margin), math.cos(margin)
    return math.acos(rng.uniform(lo, hi)), rng.uniform(-math.pi, math.pi)


def random_geodesic_path(rng, n_segments=2, closed=False, margin=0.3, attempts=200):
    """Chain of great-circle arcs between random points.

    With ``closed=True`` the last arc returns to the first point, so
    ``n_segments >= 3`` gives a geodesic polygon.
    """
    if closed and n_segments < 3:
        raise InvalidInputError("a closed geodesic polygon needs at least three sides")
    for _ in range(attempts):
        pts = [random_point(rng, margin) for _ in range(n_segments if closed else n_segments + 1)]
        if closed:
            pts.append(pts[0])
        try:
            segs = tuple(geodesic(*a, *b) for a, b in zip(pts[:-1], pts[1:]))
        except InvalidInputError:
            continue
        return PathSpec(segs, "random-closed" if closed else "random-open")
    raise InvalidInputError("could not draw a pole-avoiding geodesic path")


def rebase_loop(spec: PathSpec, theta):
    """Same closed loop started at ``theta`` on its first segment, which must be a meridian."""
    first = spec.segments[0]
    if not spec.closed or first.kind != "meridian":
        raise InvalidInputError("rebase_loop needs a closed path starting with a meridian")
    lo, hi = sorted((first.start, first.end))
    if not lo < theta < hi:
        raise InvalidInputError(f"theta={theta} is not inside the first meridian")
    head = PathSegment.meridian(first.fixed, first.start, theta)
    tail = PathSegment.meridian(first.fixed, theta, first.end)
    return PathSpec((tail,) + spec.segments[1:] + (head,), spec.label + "-rebased")
