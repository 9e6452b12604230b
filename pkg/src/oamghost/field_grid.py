"""Complex-field rasters on square windows and orthonormal Laguerre-Gaussian modes.

All lengths are SI meters. Rasters hold dimensionless complex amplitudes sampled
at pixel centers, with row 0 at the top of the window (largest y). Discrete
inner products use the midpoint rule, so a mode that fits inside the window has
unit discrete norm.
"""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

OAMF_MAGIC = b"OAMF"
OAMF_VERSION = 1

__all__ = [
    "BeamSpec",
    "ComplexField",
    "GridSpec",
    "ModeClippedWarning",
    "ModeIndex",
    "default_grid",
    "inner_product",
    "intensity_and_phase",
    "iter_lg_rasters",
    "lg_amplitude",
    "read_field",
    "sample_lg",
    "write_field",
]


class ModeClippedWarning(UserWarning):
    """A sampled mode spills past the edge of its sampling window."""


@dataclass(frozen=True)
class GridSpec:
    """Square sampling window: ``side_points`` pixels spanning ``extent`` meters."""

    side_points: int
    extent: float

    def __post_init__(self):
        if int(self.side_points) != self.side_points or self.side_points < 2:
            raise ValueError(f"side_points must be an integer >= 2, got {self.side_points}")
        if not (self.extent > 0 and math.isfinite(self.extent)):
            raise ValueError(f"extent must be positive and finite, got {self.extent}")

    @property
    def pixel_pitch(self) -> float:
        return self.extent / self.side_points

    @property
    def pixel_area(self) -> float:
        return self.pixel_pitch ** 2

    def axis(self) -> np.ndarray:
        """Pixel-center x coordinates, ascending left to right."""
        n = self.side_points
        return (np.arange(n) + 0.5) * self.pixel_pitch - 0.5 * self.extent

    def grids(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, y) coordinate rasters; y decreases down the rows."""
        ax = self.axis()
        return np.meshgrid(ax, ax[::-1])

    def polar(self) -> tuple[np.ndarray, np.ndarray]:
        """(radius, azimuth) rasters; azimuth from atan2(y, x) in (-pi, pi]."""
        x, y = self.grids()
        return np.hypot(x, y), np.arctan2(y, x)


@dataclass(frozen=True)
class ComplexField:
    """Immutable complex raster tied to the window it was sampled on."""

    spec: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        n = self.spec.side_points
        arr = np.asarray(self.samples, dtype=np.complex128)
        if arr.shape != (n, n):
            raise ValueError(f"samples shape {arr.shape} does not match grid ({n}, {n})")
        if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
            raise ValueError("field samples must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def norm(self) -> float:
        """Discrete L2 norm sqrt(sum |f|^2 * pixel_area)."""
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.spec.pixel_area))


@dataclass(frozen=True)
class ModeIndex:
    """Azimuthal index l (signed) and radial index p (nonnegative)."""

    l: int
    p: int

    def __post_init__(self):
        if int(self.l) != self.l or int(self.p) != self.p:
            raise ValueError(f"mode indices must be integers, got (l={self.l}, p={self.p})")
        if self.p < 0:
            raise ValueError(f"radial index p must be >= 0, got {self.p}")


@dataclass(frozen=True)
class BeamSpec:
    """Gaussian beam waist (1/e^2 intensity radius at z = 0) and wavelength."""

    waist: float
    wavelength: float = 632.8e-9

    def __post_init__(self):
        if not (self.waist > 0 and math.isfinite(self.waist)):
            raise ValueError(f"waist must be positive and finite, got {self.waist}")
        if not (self.wavelength > 0 and math.isfinite(self.wavelength)):
            raise ValueError(f"wavelength must be positive and finite, got {self.wavelength}")

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.waist ** 2 / self.wavelength

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    def width(self, z: float) -> float:
        """Beam radius w(z) = w0 sqrt(1 + (z/zR)^2)."""
        return self.waist * math.sqrt(1.0 + (z / self.rayleigh_range) ** 2)


def _log_norm(l_abs: int, p: int) -> float:
    # sqrt(2 p! / (pi (p+|l|)!)) evaluated in log space; exact for small orders,
    # overflow-free for large ones.
    return 0.5 * (math.log(2.0) + gammaln(p + 1) - math.log(math.pi) - gammaln(p + l_abs + 1))


def lg_amplitude(mode: ModeIndex, beam: BeamSpec, radius, azimuth, z: float = 0.0):
    """Evaluate the normalized LG mode at polar points (radius, azimuth) in plane z.

    Includes the z-dependent beam radius, the wavefront-curvature phase
    exp(+i k rho^2 / 2 R(z)) with R(z) = z (1 + (zR/z)^2), the azimuthal phase
    exp(i l phi), and the Gouy phase exp(-i (2p + |l| + 1) arctan(z/zR)). The
    plane-wave factor exp(ikz) is a rho-independent per-plane phase and is
    omitted. With these signs,

        lg_amplitude(-l, p, rho, phi, z) == conj(lg_amplitude(l, p, rho, phi, -z))

    holds to floating-point roundoff. Normalization is per unit transverse
    area: the continuum self-overlap of every mode is 1.
    """
    r = np.asarray(radius, dtype=float)
    phi = np.asarray(azimuth, dtype=float)
    l_abs = abs(mode.l)
    p = mode.p
    zr = beam.rayleigh_range
    if z == 0.0:
        w = beam.waist
        curvature = 0.0
        gouy = 0.0
    else:
        w = beam.width(z)
        big_r = z * (1.0 + (zr / z) ** 2)
        curvature = beam.wavenumber / (2.0 * big_r)
        gouy = (2 * p + l_abs + 1) * math.atan2(z, zr)
    r2 = r * r
    radial = (
        math.exp(_log_norm(l_abs, p)) / w
        * (math.sqrt(2.0) * r / w) ** l_abs
        * eval_genlaguerre(p, l_abs, 2.0 * r2 / (w * w))
        * np.exp(-r2 / (w * w))
    )
    phase = mode.l * phi + curvature * r2 - gouy
    return radial * np.exp(1j * phase)


def sample_lg(mode: ModeIndex, beam: BeamSpec, spec: GridSpec, z: float = 0.0) -> ComplexField:
    """Rasterize an LG mode at every pixel center of the window.

    Warns with ModeClippedWarning when the mode's characteristic radius
    w(z) sqrt(|l|/2 + p) exceeds the window half-extent; the samples are still
    returned (clipping degrades discrete norms, it is not an error).
    """
    width = beam.width(z)
    mode_radius = width * math.sqrt(abs(mode.l) / 2.0 + mode.p)
    if mode_radius > 0.5 * spec.extent:
        warnings.warn(
            f"LG(l={mode.l}, p={mode.p}) at z={z:g} m has radius ~{mode_radius:.3g} m, "
            f"clipped by window half-extent {0.5 * spec.extent:.3g} m",
            ModeClippedWarning,
            stacklevel=2,
        )
    r, phi = spec.polar()
    return ComplexField(spec, lg_amplitude(mode, beam, r, phi, z))


def iter_lg_rasters(beam: BeamSpec, spec: GridSpec, z: float, modes):
    """Yield (mode, raster) for each requested mode, sharing common factors.

    Produces the same values as sample_lg to roundoff but amortizes the
    coordinate transforms, Gaussian envelope, curvature phase and azimuthal
    phase powers over the whole mode set. Emits a single aggregated
    ModeClippedWarning when some of the modes do not fit the window. Yielded
    rasters are freshly allocated and safe to keep.
    """
    modes = [m if isinstance(m, ModeIndex) else ModeIndex(*m) for m in modes]
    w = beam.width(z)
    clipped = [m for m in modes if w * math.sqrt(abs(m.l) / 2.0 + m.p) > 0.5 * spec.extent]
    if clipped:
        worst = max(clipped, key=lambda m: abs(m.l) / 2.0 + m.p)
        warnings.warn(
            f"{len(clipped)} of {len(modes)} modes clipped by the window "
            f"(largest: l={worst.l}, p={worst.p})",
            ModeClippedWarning,
            stacklevel=2,
        )

    r, phi = spec.polar()
    zr = beam.rayleigh_range
    if z == 0.0:
        plane = None
        psi = 0.0
    else:
        big_r = z * (1.0 + (zr / z) ** 2)
        plane = np.exp(1j * (beam.wavenumber / (2.0 * big_r)) * (r * r))
        psi = math.atan2(z, zr)
    r2 = r * r
    x = 2.0 * r2 / (w * w)
    gauss = np.exp(-r2 / (w * w))
    rad_unit = math.sqrt(2.0) * r / w
    eiphi = np.exp(1j * phi)
    azim_pow = [np.ones_like(eiphi)]

    def azimuthal(l: int) -> np.ndarray:
        l_abs = abs(l)
        while len(azim_pow) <= l_abs:
            azim_pow.append(azim_pow[-1] * eiphi)
        return azim_pow[l_abs] if l >= 0 else np.conj(azim_pow[l_abs])

    for mode in modes:
        l_abs = abs(mode.l)
        p = mode.p
        radial = (
            math.exp(_log_norm(l_abs, p)) / w
            * rad_unit ** l_abs
            * eval_genlaguerre(p, l_abs, x)
            * gauss
        )
        out = radial * azimuthal(mode.l)
        if plane is not None:
            out = out * plane
        if psi != 0.0:
            out = out * np.exp(-1j * (2 * p + l_abs + 1) * psi)
        yield mode, out


def inner_product(a: ComplexField, b: ComplexField) -> complex:
    """Midpoint-rule overlap <a|b> = sum conj(a) b * pixel_area.

    Both fields must share the same GridSpec (same side_points and extent).
    """
    if a.spec != b.spec:
        raise ValueError(f"grid mismatch: {a.spec} vs {b.spec}")
    return complex(np.vdot(a.samples, b.samples) * a.spec.pixel_area)


def intensity_and_phase(f: ComplexField) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel |f|^2 and arg(f) in (-pi, pi]; zero samples get phase 0."""
    return np.abs(f.samples) ** 2, np.angle(f.samples)


def default_grid(
    beam: BeamSpec,
    l_max: int = 0,
    p_max: int = 0,
    side_points: int = 512,
    z: float = 0.0,
    other_scale: float = 0.0,
) -> GridSpec:
    """Window sized to hold every mode up to (l_max, p_max) at plane z.

    The half-extent is the classical mode radius w(z) sqrt(2 p_max + l_max + 1)
    with a Gaussian-tail margin, never less than 4 beam radii (extent >= 8
    waists). ``other_scale`` (e.g. an object radius) widens the window to at
    least 4 times that scale.
    """
    w = beam.width(z)
    half = max(
        w * (1.25 * math.sqrt(2.0 * p_max + l_max + 1.0) + 2.0),
        4.0 * w,
        4.0 * other_scale,
    )
    return GridSpec(side_points, 2.0 * half)


def write_field(path, field: ComplexField) -> None:
    """Write a field in the OAMF binary format.

    Layout: magic "OAMF", u16 version (1), u32 side_points, f64 extent, then
    side^2 complex samples as little-endian (re, im) f64 pairs, row-major with
    the top row first.
    """
    header = struct.pack("<4sHId", OAMF_MAGIC, OAMF_VERSION, field.spec.side_points, field.spec.extent)
    data = np.ascontiguousarray(field.samples, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def read_field(path) -> ComplexField:
    """Read an OAMF binary field written by write_field."""
    with open(path, "rb") as fh:
        header = fh.read(18)
        if len(header) != 18:
            raise ValueError(f"{path}: truncated OAMF header")
        magic, version, side, extent = struct.unpack("<4sHId", header)
        if magic != OAMF_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != OAMF_VERSION:
            raise ValueError(f"{path}: unsupported OAMF version {version}")
        payload = fh.read()
    expected = side * side * 16
    if len(payload) != expected:
        raise ValueError(f"{path}: expected {expected} sample bytes, got {len(payload)}")
    samples = np.frombuffer(payload, dtype="<c16").reshape(side, side)
    return ComplexField(GridSpec(side, extent), samples.astype(np.complex128))
