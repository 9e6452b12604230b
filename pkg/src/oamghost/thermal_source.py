"""Gaussian-Schell thermal source: spiral mode spectrum, cross-spectral density,
and a quadrature cross-check of the mode-decomposition law.

The source is fixed by two scales: an intensity width sigma_s and a transverse
coherence width sigma_g (sigma_g = inf is the fully coherent limit). Its
correlations diagonalize on the LG basis with a matched waist, a geometric
amplitude decay t per unit of |l| + 2p, and perfect anticorrelation of the
azimuthal indices.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .field_grid import BeamSpec, GridSpec, ModeIndex, iter_lg_rasters

__all__ = [
    "CsdTensor",
    "SourceGeometry",
    "SpiralSpectrum",
    "build_spectrum",
    "csd_mode_decompose",
    "csd_value",
    "flat_spectrum",
    "full_lattice_sums",
    "oracle_grid",
    "schmidt_number",
    "source_geometry",
    "spectrum_amplitude",
    "write_marginal_csv",
    "write_spectrum_csv",
]


@dataclass(frozen=True)
class SourceGeometry:
    """Source widths plus the derived mode-decomposition constants.

    beta satisfies tan(beta) = 2 sigma_s / sigma_g; t = tan^2(beta/2) is the
    geometric decay ratio of the spiral spectrum; matched_waist
    w = 2 sigma_s sqrt(cos beta) is the LG waist that diagonalizes the source
    correlations.
    """

    sigma_s: float
    sigma_g: float
    beta: float
    t: float
    matched_waist: float


def source_geometry(sigma_s: float, sigma_g: float = math.inf) -> SourceGeometry:
    """Build the derived geometry for the given source widths."""
    if not (sigma_s > 0 and math.isfinite(sigma_s)):
        raise ValueError(f"sigma_s must be positive and finite, got {sigma_s}")
    if not sigma_g > 0:
        raise ValueError(f"sigma_g must be positive (inf allowed), got {sigma_g}")
    ratio = 0.0 if math.isinf(sigma_g) else 2.0 * sigma_s / sigma_g
    beta = math.atan(ratio)
    t = math.tan(0.5 * beta) ** 2
    waist = 2.0 * sigma_s * math.sqrt(math.cos(beta))
    return SourceGeometry(sigma_s, sigma_g, beta, t, waist)


@dataclass(frozen=True)
class SpiralSpectrum:
    """Real nonnegative amplitude table P[l, p] for |l| <= l_max, 0 <= p <= p_max.

    Thermal tables built by build_spectrum are geometric in |l| + 2p; the
    container itself only enforces shape and nonnegativity, so flat test
    tables (flat_spectrum) are representable too.
    """

    l_max: int
    p_max: int
    amplitudes: np.ndarray  # shape (2 l_max + 1, p_max + 1), row index l + l_max
    geometry: SourceGeometry | None = None

    def __post_init__(self):
        if self.l_max < 0 or self.p_max < 0:
            raise ValueError("l_max and p_max must be nonnegative")
        arr = np.asarray(self.amplitudes, dtype=float)
        shape = (2 * self.l_max + 1, self.p_max + 1)
        if arr.shape != shape:
            raise ValueError(f"amplitude table shape {arr.shape}, expected {shape}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("amplitudes must be finite and nonnegative")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "amplitudes", arr)

    @property
    def d(self) -> int:
        """Dimension (2 l_max + 1)(p_max + 1) of the truncated single-photon space."""
        return (2 * self.l_max + 1) * (self.p_max + 1)

    def amplitude(self, l: int, p: int) -> float:
        if abs(l) > self.l_max or not 0 <= p <= self.p_max:
            raise ValueError(f"mode (l={l}, p={p}) outside truncation "
                             f"(l_max={self.l_max}, p_max={self.p_max})")
        return float(self.amplitudes[l + self.l_max, p])

    def sum_amplitudes(self) -> float:
        return float(self.amplitudes.sum())

    def sum_squares(self) -> float:
        return float((self.amplitudes ** 2).sum())

    def sum_fourth(self) -> float:
        return float((self.amplitudes ** 4).sum())

    def oam_marginal(self) -> np.ndarray:
        """Pure OAM weights: for each l (index l + l_max), the sum over p of P^2."""
        return (self.amplitudes ** 2).sum(axis=1)

    def schmidt_probabilities(self) -> np.ndarray:
        """P^2 / sum(P^2), flattened over (l, p)."""
        sq = (self.amplitudes ** 2).ravel()
        total = sq.sum()
        if total <= 0:
            raise ValueError("spectrum has no power")
        return sq / total


def spectrum_amplitude(mode: ModeIndex, geometry: SourceGeometry) -> float:
    """Thermal mode amplitude (1 - t^2) t^(|l| + 2p).

    In the coherent limit t = 0 only (0, 0) is occupied (with amplitude 1).
    """
    t = geometry.t
    return (1.0 - t * t) * t ** (abs(mode.l) + 2 * mode.p)


def build_spectrum(geometry: SourceGeometry, l_max: int, p_max: int) -> SpiralSpectrum:
    """Tabulate spectrum_amplitude over the truncated (l, p) lattice."""
    if l_max < 0 or p_max < 0:
        raise ValueError("l_max and p_max must be nonnegative")
    ls = np.abs(np.arange(-l_max, l_max + 1))
    ps = np.arange(p_max + 1)
    t = geometry.t
    amps = (1.0 - t * t) * np.power(t, ls[:, None] + 2 * ps[None, :])
    return SpiralSpectrum(l_max, p_max, amps, geometry)


def flat_spectrum(l_max: int, p_max: int, value: float = 1.0) -> SpiralSpectrum:
    """Constant-amplitude table (maximally entangled stand-in; no geometry)."""
    return SpiralSpectrum(l_max, p_max, np.full((2 * l_max + 1, p_max + 1), float(value)))


def full_lattice_sums(geometry: SourceGeometry) -> tuple[float, float, float]:
    """Closed forms of (sum P, sum P^2, sum P^4) over the untruncated lattice.

    sum P = (1+t)/(1-t), sum P^2 = 1 exactly, sum P^4 = ((1-t^2)/(1+t^2))^2.
    """
    t = geometry.t
    return (1.0 + t) / (1.0 - t), 1.0, ((1.0 - t * t) / (1.0 + t * t)) ** 2


def schmidt_number(spectrum: SpiralSpectrum) -> float:
    """Effective mode count 1 / sum(s^2) over the Schmidt probabilities s."""
    s = spectrum.schmidt_probabilities()
    return float(1.0 / np.sum(s ** 2))


def csd_value(rho1, rho2, geometry: SourceGeometry):
    """Gaussian-Schell cross-spectral density W(rho1, rho2), with W(0, 0) = 1.

    rho1 and rho2 are transverse points (arrays with a trailing axis of length
    2); broadcasting over leading axes is supported.
    """
    r1 = np.asarray(rho1, dtype=float)
    r2 = np.asarray(rho2, dtype=float)
    q1 = np.sum(r1 * r1, axis=-1)
    q2 = np.sum(r2 * r2, axis=-1)
    envelope = np.exp(-(q1 + q2) / (4.0 * geometry.sigma_s ** 2))
    if math.isinf(geometry.sigma_g):
        return envelope
    dq = np.sum((r1 - r2) ** 2, axis=-1)
    return envelope * np.exp(-dq / (2.0 * geometry.sigma_g ** 2))


@dataclass(frozen=True)
class CsdTensor:
    """Mode-decomposition coefficients f[l, l', p, p'] of the source correlations."""

    l_max: int
    p_max: int
    coefficients: np.ndarray  # shape (2L+1, 2L+1, P+1, P+1), index (l+L, l'+L, p, p')

    def __post_init__(self):
        arr = np.asarray(self.coefficients, dtype=complex)
        nl = 2 * self.l_max + 1
        np_ = self.p_max + 1
        if arr.shape != (nl, nl, np_, np_):
            raise ValueError(f"coefficient shape {arr.shape}, expected {(nl, nl, np_, np_)}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "coefficients", arr)

    def coefficient(self, l: int, l_prime: int, p: int, p_prime: int) -> complex:
        if max(abs(l), abs(l_prime)) > self.l_max or not (0 <= p <= self.p_max and 0 <= p_prime <= self.p_max):
            raise ValueError(f"indices ({l}, {l_prime}, {p}, {p_prime}) outside truncation")
        return complex(self.coefficients[l + self.l_max, l_prime + self.l_max, p, p_prime])


def oracle_grid(geometry: SourceGeometry, l_max: int, p_max: int, side_points: int = 128) -> GridSpec:
    """Window for csd_mode_decompose: contains the highest requested mode with margin."""
    w = geometry.matched_waist
    half = w * (1.3 * math.sqrt(2.0 * p_max + l_max + 1.0) + 2.0)
    return GridSpec(side_points, 2.0 * half)


def csd_mode_decompose(
    geometry: SourceGeometry,
    l_max: int,
    p_max: int,
    spec: GridSpec,
    wavelength: float = 632.8e-9,
    allow_large: bool = False,
) -> CsdTensor:
    """Project the cross-spectral density onto LG mode pairs by nested quadrature.

    Computes, at z = 0 with the matched waist,

        f[l, l', p, p'] = iint iint W(rho1, rho2) LG*_{l,p}(rho1) LG*_{l',p'}(rho2)
                          d^2 rho1 d^2 rho2

    as a nested projection: first the per-pixel partial projection
    g_{l,p}(rho2) = int W LG* d^2 rho1, then the rho2 projection against every
    second mode. The Gaussian coherence coupling factorizes over x and y, so
    the rho1 integral for each mode reduces to two side_points^2 matrix
    products; the quadrature sums are the plain midpoint-rule ones.

    This is a cross-check oracle, not a production path: truncations or grids
    beyond the default runtime budget are refused unless allow_large is set.
    """
    if l_max < 0 or p_max < 0:
        raise ValueError("l_max and p_max must be nonnegative")
    n_modes = (2 * l_max + 1) * (p_max + 1)
    if not allow_large and (l_max > 6 or p_max > 6 or spec.side_points > 256):
        raise ValueError(
            f"decomposition over {n_modes} modes on a {spec.side_points}^2 grid exceeds the "
            "default runtime budget (l_max <= 6, p_max <= 6, side_points <= 256); "
            "pass allow_large=True to force"
        )
    if math.isfinite(geometry.sigma_g) and spec.pixel_pitch > geometry.sigma_g:
        warnings.warn(
            f"pixel pitch {spec.pixel_pitch:.3g} m does not resolve the coherence width "
            f"{geometry.sigma_g:.3g} m; the quadrature may be inaccurate",
            stacklevel=2,
        )

    beam = BeamSpec(geometry.matched_waist, wavelength)
    modes = [ModeIndex(l, p) for l in range(-l_max, l_max + 1) for p in range(p_max + 1)]
    x, y = spec.grids()
    envelope = np.exp(-(x * x + y * y) / (4.0 * geometry.sigma_s ** 2))
    area = spec.pixel_area

    coherent = math.isinf(geometry.sigma_g)
    if not coherent:
        ax = spec.axis()
        ay = ax[::-1]
        kx = np.exp(-((ax[:, None] - ax[None, :]) ** 2) / (2.0 * geometry.sigma_g ** 2))
        ky = np.exp(-((ay[:, None] - ay[None, :]) ** 2) / (2.0 * geometry.sigma_g ** 2))

    partials = np.empty((n_modes, spec.side_points ** 2), dtype=complex)
    raster_conj = np.empty_like(partials)
    for i, (mode, raster) in enumerate(iter_lg_rasters(beam, spec, 0.0, modes)):
        f1 = envelope * np.conj(raster)
        if coherent:
            g = np.full_like(f1, f1.sum())
        else:
            g = ky.T @ f1 @ kx
        partials[i] = (envelope * g * area).ravel()
        raster_conj[i] = np.conj(raster).ravel()

    flat = partials @ raster_conj.T * area  # [i, j] = sum_rho2 g_i conj(LG_j) dA
    nl = 2 * l_max + 1
    np_ = p_max + 1
    coeffs = flat.reshape(nl, np_, nl, np_).transpose(0, 2, 1, 3)
    return CsdTensor(l_max, p_max, coeffs)


def _sorted_l_range(l_max: int):
    return sorted(range(-l_max, l_max + 1), key=lambda v: (abs(v), v))


def write_spectrum_csv(path, spectrum: SpiralSpectrum) -> None:
    """CSV with header l,p,P,P_squared, rows sorted by (|l|, l, p)."""
    lines = ["l,p,P,P_squared"]
    for l in _sorted_l_range(spectrum.l_max):
        for p in range(spectrum.p_max + 1):
            a = spectrum.amplitude(l, p)
            lines.append(f"{l},{p},{a:.17g},{a * a:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_marginal_csv(path, spectrum: SpiralSpectrum) -> None:
    """CSV with header l,P_l where P_l = sum_p P^2, rows with l ascending."""
    marginal = spectrum.oam_marginal()
    lines = ["l,P_l"]
    for l in range(-spectrum.l_max, spectrum.l_max + 1):
        lines.append(f"{l},{marginal[l + spectrum.l_max]:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
