"""Digital spiral decomposition of an object and thermal ghost-image synthesis.

The object sits at plane -z1 and is decomposed over LG modes there; the
thermal source filters each mode by its spiral amplitude and conjugates it,
and the image plane at +z2 receives a coherent "pure" term on top of an
object-weighted incoherent background. The total intensity is
background + |pure|^2 by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field_grid import (
    BeamSpec,
    ComplexField,
    GridSpec,
    ModeIndex,
    iter_lg_rasters,
)
from .thermal_source import SpiralSpectrum, SourceGeometry, build_spectrum

__all__ = [
    "GhostImageResult",
    "ModeCoefficients",
    "clover_object",
    "image_spectrum",
    "load_object",
    "object_spectrum",
    "read_pgm",
    "render_background",
    "render_pure_image",
    "render_total",
    "write_image_spectrum_csv",
    "write_pgm16",
]


@dataclass(frozen=True)
class ModeCoefficients:
    """Complex coefficient table over |l| <= l_max, 0 <= p <= p_max.

    `plane` records the z at which the table was defined (decomposition plane
    for object spectra, the balanced synthesis plane for image spectra); the
    render operations take their synthesis plane explicitly.
    """

    l_max: int
    p_max: int
    values: np.ndarray  # shape (2 l_max + 1, p_max + 1), row index l + l_max
    plane: float
    beam: BeamSpec

    def __post_init__(self):
        if self.l_max < 0 or self.p_max < 0:
            raise ValueError("l_max and p_max must be nonnegative")
        arr = np.asarray(self.values, dtype=complex)
        shape = (2 * self.l_max + 1, self.p_max + 1)
        if arr.shape != shape:
            raise ValueError(f"coefficient table shape {arr.shape}, expected {shape}")
        if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
            raise ValueError("coefficients must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def value(self, l: int, p: int) -> complex:
        if abs(l) > self.l_max or not 0 <= p <= self.p_max:
            raise ValueError(f"mode (l={l}, p={p}) outside truncation "
                             f"(l_max={self.l_max}, p_max={self.p_max})")
        return complex(self.values[l + self.l_max, p])

    def power(self) -> float:
        """Sum of |coefficient|^2 over the truncation."""
        return float(np.sum(np.abs(self.values) ** 2))


@dataclass(frozen=True)
class GhostImageResult:
    """Rendered pure field, background raster, their combined intensity, and
    the object-dependent background weight."""

    pure_field: ComplexField
    background: np.ndarray
    total_intensity: np.ndarray
    background_weight: float


def load_object(intensity, phase, spec: GridSpec) -> ComplexField:
    """Amplitude-phase object from grayscale rasters.

    O = sqrt(I / max I) * exp(i theta). The phase raster's own value range is
    mapped linearly onto [-pi, pi); a missing phase raster means zero phase,
    and a constant one maps to zero as well.
    """
    inten = np.asarray(intensity, dtype=float)
    n = spec.side_points
    if inten.shape != (n, n):
        raise ValueError(f"intensity raster shape {inten.shape} does not match grid ({n}, {n})")
    if not np.all(np.isfinite(inten)) or np.any(inten < 0):
        raise ValueError("intensity raster must be finite and nonnegative")
    peak = float(inten.max())
    if peak <= 0.0:
        raise ValueError("object intensity is identically zero")
    amplitude = np.sqrt(inten / peak)
    if phase is None:
        return ComplexField(spec, amplitude.astype(complex))
    ph = np.asarray(phase, dtype=float)
    if ph.shape != (n, n):
        raise ValueError(f"phase raster shape {ph.shape} does not match grid ({n}, {n})")
    if not np.all(np.isfinite(ph)):
        raise ValueError("phase raster must be finite")
    lo = float(ph.min())
    hi = float(ph.max())
    if hi > lo:
        theta = -math.pi + 2.0 * math.pi * (ph - lo) / (hi - lo)
        theta = np.where(theta >= math.pi, -math.pi, theta)
    else:
        theta = np.zeros_like(ph)
    return ComplexField(spec, amplitude * np.exp(1j * theta))


def clover_object(spec: GridSpec, radius: float, phase_depth: float = math.pi / 2) -> ComplexField:
    """Built-in four-lobed amplitude-and-phase test target.

    amplitude(r, phi) = exp(-(r/radius)^2) * |cos(2 phi)|
    phase(r, phi)     = phase_depth * cos(2 phi)          (default depth pi/2)

    Lobes sit on the coordinate axes; opposite lobes share a phase sign while
    adjacent lobes are phase-reversed, so the target exercises intensity and
    phase imaging at once.
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    r, phi = spec.polar()
    c2 = np.cos(2.0 * phi)
    samples = np.exp(-((r / radius) ** 2)) * np.abs(c2) * np.exp(1j * phase_depth * c2)
    return ComplexField(spec, samples)


def object_spectrum(obj: ComplexField, beam: BeamSpec, z1: float, l_max: int, p_max: int) -> ModeCoefficients:
    """Overlap coefficients of the object against LG modes at plane -z1."""
    if l_max < 0 or p_max < 0:
        raise ValueError("l_max and p_max must be nonnegative")
    plane = -float(z1)
    values = np.zeros((2 * l_max + 1, p_max + 1), dtype=complex)
    area = obj.spec.pixel_area
    modes = [ModeIndex(l, p) for l in range(-l_max, l_max + 1) for p in range(p_max + 1)]
    for mode, raster in iter_lg_rasters(beam, obj.spec, plane, modes):
        values[mode.l + l_max, mode.p] = np.vdot(raster, obj.samples) * area
    return ModeCoefficients(l_max, p_max, values, plane, beam)


def image_spectrum(coeffs: ModeCoefficients, spectrum: SpiralSpectrum) -> ModeCoefficients:
    """Image coefficients: mode (-l, p) carries P[l, p] * conj(A[l, p]).

    Since the spectrum is even in l this is the spectrum table times the
    l-flipped conjugated object table. The recorded plane is the balanced
    synthesis plane -A.plane; render_pure_image takes its plane explicitly.
    """
    if (coeffs.l_max, coeffs.p_max) != (spectrum.l_max, spectrum.p_max):
        raise ValueError(
            f"truncation mismatch: coefficients ({coeffs.l_max}, {coeffs.p_max}) "
            f"vs spectrum ({spectrum.l_max}, {spectrum.p_max})"
        )
    values = spectrum.amplitudes * np.conj(coeffs.values[::-1, :])
    return ModeCoefficients(coeffs.l_max, coeffs.p_max, values, -coeffs.plane, coeffs.beam)


def render_pure_image(coeffs: ModeCoefficients, spec: GridSpec, z2: float) -> ComplexField:
    """Coherent sum of coefficient-weighted LG modes at plane +z2."""
    acc = np.zeros((spec.side_points, spec.side_points), dtype=complex)
    live = [
        ModeIndex(l, p)
        for l in range(-coeffs.l_max, coeffs.l_max + 1)
        for p in range(coeffs.p_max + 1)
        if coeffs.values[l + coeffs.l_max, p] != 0
    ]
    for mode, raster in iter_lg_rasters(coeffs.beam, spec, float(z2), live):
        acc += coeffs.values[mode.l + coeffs.l_max, mode.p] * raster
    return ComplexField(spec, acc)


def render_background(
    coeffs: ModeCoefficients,
    spectrum: SpiralSpectrum,
    spec: GridSpec,
    z2: float,
) -> tuple[np.ndarray, float]:
    """Incoherent background raster and its object-dependent weight.

    weight = sum P |A|^2 over the truncation; the raster is
    weight * sum_{l', p'} P_{l', p'} |LG_{l', p'}(rho, z2)|^2, azimuthally
    symmetric because every |LG|^2 is.
    """
    if (coeffs.l_max, coeffs.p_max) != (spectrum.l_max, spectrum.p_max):
        raise ValueError(
            f"truncation mismatch: coefficients ({coeffs.l_max}, {coeffs.p_max}) "
            f"vs spectrum ({spectrum.l_max}, {spectrum.p_max})"
        )
    weight = float(np.sum(spectrum.amplitudes * np.abs(coeffs.values) ** 2))
    mix = np.zeros((spec.side_points, spec.side_points))
    live = [
        ModeIndex(l, p)
        for l in range(-spectrum.l_max, spectrum.l_max + 1)
        for p in range(spectrum.p_max + 1)
        if spectrum.amplitudes[l + spectrum.l_max, p] != 0
    ]
    for mode, raster in iter_lg_rasters(coeffs.beam, spec, float(z2), live):
        mix += spectrum.amplitudes[mode.l + spectrum.l_max, mode.p] * (
            raster.real ** 2 + raster.imag ** 2
        )
    return weight * mix, weight


def render_total(
    obj: ComplexField,
    geometry: SourceGeometry,
    z1: float,
    z2: float,
    l_max: int,
    p_max: int,
    spec: GridSpec,
    wavelength: float = 632.8e-9,
) -> GhostImageResult:
    """Full two-term ghost image of the object.

    Decomposes the object at -z1 with the matched-waist beam, filters by the
    thermal spiral spectrum, and synthesizes both terms at +z2 in a single
    pass over the mode set. The object is decomposed on its own grid; the
    output rasters live on `spec` (usually the same grid).
    """
    beam = BeamSpec(geometry.matched_waist, wavelength)
    spectrum = build_spectrum(geometry, l_max, p_max)
    coeffs = object_spectrum(obj, beam, z1, l_max, p_max)
    image = image_spectrum(coeffs, spectrum)
    weight = float(np.sum(spectrum.amplitudes * np.abs(coeffs.values) ** 2))

    pure = np.zeros((spec.side_points, spec.side_points), dtype=complex)
    mix = np.zeros((spec.side_points, spec.side_points))
    modes = [ModeIndex(l, p) for l in range(-l_max, l_max + 1) for p in range(p_max + 1)]
    for mode, raster in iter_lg_rasters(beam, spec, float(z2), modes):
        b = image.values[mode.l + l_max, mode.p]
        if b != 0:
            pure += b * raster
        a = spectrum.amplitudes[mode.l + l_max, mode.p]
        if a != 0:
            mix += a * (raster.real ** 2 + raster.imag ** 2)

    background = weight * mix
    total = background + pure.real ** 2 + pure.imag ** 2
    return GhostImageResult(ComplexField(spec, pure), background, total, weight)


def write_image_spectrum_csv(path, object_coeffs: ModeCoefficients, image_coeffs: ModeCoefficients) -> None:
    """CSV with header l,p,re_A,im_A,re_B,im_B, rows sorted by (|l|, l, p)."""
    if (object_coeffs.l_max, object_coeffs.p_max) != (image_coeffs.l_max, image_coeffs.p_max):
        raise ValueError("object and image tables have different truncations")
    lines = ["l,p,re_A,im_A,re_B,im_B"]
    for l in sorted(range(-object_coeffs.l_max, object_coeffs.l_max + 1), key=lambda v: (abs(v), v)):
        for p in range(object_coeffs.p_max + 1):
            a = object_coeffs.value(l, p)
            b = image_coeffs.value(l, p)
            lines.append(
                f"{l},{p},{a.real:.17g},{a.imag:.17g},{b.real:.17g},{b.imag:.17g}"
            )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_pgm16(path, data, lo: float | None = None, hi: float | None = None) -> tuple[float, float]:
    """Write a real raster as 16-bit binary PGM with linear min-max scaling.

    Returns the (lo, hi) values that map to 0 and 65535; record them in a
    sidecar to keep the file quantitative.
    """
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d raster, got shape {arr.shape}")
    if lo is None:
        lo = float(arr.min())
    if hi is None:
        hi = float(arr.max())
    if hi > lo:
        pix = np.rint(65535.0 * np.clip((arr - lo) / (hi - lo), 0.0, 1.0)).astype(">u2")
    else:
        pix = np.zeros(arr.shape, dtype=">u2")
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n65535\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(pix.tobytes())
    return lo, hi


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM, 8- or 16-bit, as a float array of raw values."""
    with open(path, "rb") as fh:
        blob = fh.read()
    tokens = []
    i = 0
    while len(tokens) < 4:
        while i < len(blob) and blob[i : i + 1].isspace():
            i += 1
        if i < len(blob) and blob[i : i + 1] == b"#":
            while i < len(blob) and blob[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < len(blob) and not blob[i : i + 1].isspace():
            i += 1
        if start == i:
            raise ValueError(f"{path}: truncated PGM header")
        tokens.append(blob[start:i])
    i += 1  # single whitespace byte after maxval
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    width, height, maxval = (int(t) for t in tokens[1:])
    dtype = ">u2" if maxval > 255 else "u1"
    count = width * height
    data = np.frombuffer(blob, dtype=dtype, count=count, offset=i)
    if data.size != count:
        raise ValueError(f"{path}: expected {count} pixels, got {data.size}")
    return data.reshape(height, width).astype(float)
