"""Geometry of the unit two-sphere.

Point configurations, the stereographic chart, rotations, pairwise cosines,
serialization, and the seeded random-stream contract shared by all samplers.

Stereographic convention: the plane origin maps to the south pole (0, 0, -1)
and the point at infinity to the north pole (0, 0, 1).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

#: Maximum deviation from unit norm accepted (and then projected away) on input.
NORM_TOLERANCE = 1e-6
ROTATION_TOLERANCE = 1e-10
RENORMALIZE_ABOVE = 1e-14


@dataclass(frozen=True)
class RngStream:
    """Deterministic random stream identified by ``(seed, stream_id)``.

    Streams are derived with a counter-based generator (Philox) keyed by a
    ``SeedSequence`` built from both integers, so replica ``k`` draws the same
    numbers no matter which worker runs it or in which order.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not (0 <= int(v) < 2**64):
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


@dataclass(frozen=True, eq=False)
class Configuration:
    """An ordered set of ``n >= 1`` points on the unit sphere.

    ``points`` is stored as a read-only ``(n, 3)`` float array. Inputs within
    ``NORM_TOLERANCE`` of the sphere are renormalized so every row has unit
    norm to rounding.
    """

    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim == 1 and pts.shape[0] == 3:
            pts = pts[None, :]
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must have shape (n, 3), got {pts.shape}")
        if pts.shape[0] < 1:
            raise ValueError("a configuration needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        norms = np.linalg.norm(pts, axis=1)
        bad = np.abs(norms - 1.0) > NORM_TOLERANCE
        if np.any(bad):
            i = int(np.argmax(bad))
            raise ValueError(f"point {i} has norm {norms[i]!r}, not on the unit sphere")
        # rows already unit to rounding are left bit-identical so serialization round-trips exactly
        fix = np.abs(norms - 1.0) > RENORMALIZE_ABOVE
        pts[fix] /= norms[fix, None]
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.points.shape == other.points.shape and np.array_equal(self.points, other.points)

    def __repr__(self):
        return f"Configuration(n={self.n})"

    # --- serialization -----------------------------------------------------

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "z"])
        for p in self.points:
            w.writerow([repr(float(v)) for v in p])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source: str | Path) -> "Configuration":
        """Read a configuration from a CSV file path or CSV text with header ``x,y,z``."""
        text = Path(source).read_text() if _looks_like_path(source) else str(source)
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [h.strip() for h in rows[0]] != ["x", "y", "z"]:
            raise ValueError("configuration CSV must start with header 'x,y,z'")
        pts = []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ValueError(f"line {lineno}: expected 3 columns, got {len(row)}")
            try:
                pts.append([float(c) for c in row])
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        return cls(np.array(pts, dtype=float).reshape(-1, 3))

    def to_json(self) -> str:
        return json.dumps(self.points.tolist())

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        return cls(np.array(json.loads(text), dtype=float))


def _looks_like_path(source) -> bool:
    if isinstance(source, Path):
        return True
    s = str(source)
    return "\n" not in s and Path(s).exists()


# --- stereographic chart ----------------------------------------------------

def inverse_stereographic(z) -> np.ndarray:
    """Map complex plane points to the unit sphere.

    ``z -> (2 Re z, 2 Im z, |z|^2 - 1) / (1 + |z|^2)``; infinite inputs map to
    the north pole. Returns an array of shape ``z.shape + (3,)``.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape + (3,))
    inf = ~np.isfinite(z)
    zf = np.where(inf, 0.0, z)
    with np.errstate(over="ignore", invalid="ignore"):
        # |z|^2 may overflow for |z| > 1e154; the limits below are then exact to rounding
        r2 = zf.real**2 + zf.imag**2
        denom = 1.0 + r2
        out[..., 0] = 2.0 * zf.real / denom
        out[..., 1] = 2.0 * zf.imag / denom
        # (r2 - 1)/(r2 + 1) loses accuracy near the pole for huge |z|; this form is stable
        out[..., 2] = np.where(r2 > 1.0, 1.0 - 2.0 / denom, (r2 - 1.0) / denom)
    out[inf] = (0.0, 0.0, 1.0)
    return out


def stereographic(p) -> np.ndarray:
    """Inverse of :func:`inverse_stereographic`.

    The north pole has no finite image and is returned as complex infinity
    (``inf + 0j``); use :func:`numpy.isfinite` to detect it.
    """
    p = np.asarray(p, dtype=float)
    x, y, zc = p[..., 0], p[..., 1], p[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        # for points near the north pole, 1 - z is inaccurate; x^2 + y^2 = (1 - z)(1 + z)
        one_minus = np.where(zc > 0.5, (x * x + y * y) / (1.0 + zc), 1.0 - zc)
        w = (x + 1j * y) / one_minus
    pole = one_minus == 0.0
    return np.where(pole, complex(np.inf, 0.0), w)


# --- pairwise geometry -------------------------------------------------------

def pairwise_cosines(c: Configuration) -> np.ndarray:
    """Symmetric matrix of inner products, clipped to [-1, 1], unit diagonal."""
    g = c.points @ c.points.T
    np.clip(g, -1.0, 1.0, out=g)
    g = 0.5 * (g + g.T)
    np.fill_diagonal(g, 1.0)
    return g


def pairwise_distances(c: Configuration) -> np.ndarray:
    """Chordal distances ``|x_i - x_j| = sqrt(2 - 2 <x_i, x_j>)``."""
    diff = c.points[:, None, :] - c.points[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def apply_rotation(c: Configuration, r) -> Configuration:
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise ValueError("rotation must be a 3x3 matrix")
    if not np.allclose(r.T @ r, np.eye(3), atol=ROTATION_TOLERANCE, rtol=0):
        raise ValueError("rotation matrix is not orthogonal")
    if abs(np.linalg.det(r) - 1.0) > ROTATION_TOLERANCE:
        raise ValueError("rotation matrix must have determinant +1")
    return Configuration(c.points @ r.T)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed rotation in SO(3) via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def rotation_about_axis(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for ``angle`` radians about ``axis``."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * kx + (1 - np.cos(angle)) * (kx @ kx)


def uniform_points(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. uniform points: z uniform on [-1, 1], azimuth uniform."""
    z = rng.uniform(-1.0, 1.0, n)
    phi = rng.uniform(0.0, 2 * np.pi, n)
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
