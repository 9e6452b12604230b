import math

import numpy as np
import pytest

from oamghost.field_grid import (
    BeamSpec,
    ComplexField,
    GridSpec,
    ModeClippedWarning,
    ModeIndex,
    default_grid,
    inner_product,
    intensity_and_phase,
    iter_lg_rasters,
    lg_amplitude,
    read_field,
    sample_lg,
    write_field,
)

WAIST = 1e-3
BEAM = BeamSpec(WAIST)


def test_grid_spec_axis_and_pitch():
    spec = GridSpec(4, 8.0)
    assert spec.pixel_pitch == 2.0
    assert spec.pixel_area == 4.0
    np.testing.assert_allclose(spec.axis(), [-3.0, -1.0, 1.0, 3.0])
    x, y = spec.grids()
    assert x[0, 0] == -3.0 and x[0, -1] == 3.0
    # row 0 is the top of the window
    assert y[0, 0] == 3.0 and y[-1, 0] == -3.0


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(1, 1.0)
    with pytest.raises(ValueError):
        GridSpec(16, -1.0)


def test_polar_matches_cartesian():
    spec = GridSpec(8, 2.0)
    x, y = spec.grids()
    r, phi = spec.polar()
    np.testing.assert_allclose(r, np.hypot(x, y))
    np.testing.assert_allclose(phi, np.arctan2(y, x))


def test_complex_field_immutable_and_norm():
    spec = GridSpec(8, 2.0)
    f = ComplexField(spec, np.ones((8, 8)))
    with pytest.raises(ValueError):
        f.samples[0, 0] = 0.0
    # 64 unit pixels of area (2/8)^2
    np.testing.assert_allclose(f.norm(), math.sqrt(64 * 0.25 ** 2))
    with pytest.raises(ValueError):
        ComplexField(spec, np.ones((4, 4)))
    with pytest.raises(ValueError):
        ComplexField(spec, np.full((8, 8), np.nan))


def test_mode_index_validation():
    ModeIndex(-3, 0)
    with pytest.raises(ValueError):
        ModeIndex(0, -1)


def test_beam_spec_derived_quantities():
    assert BEAM.rayleigh_range == pytest.approx(math.pi * WAIST ** 2 / 632.8e-9)
    assert BEAM.wavenumber == pytest.approx(2.0 * math.pi / 632.8e-9)
    assert BEAM.width(0.0) == WAIST
    assert BEAM.width(BEAM.rayleigh_range) == pytest.approx(WAIST * math.sqrt(2.0))


def test_fundamental_peak_value():
    # |LG_00(0, 0)| = sqrt(2/pi) / w
    got = lg_amplitude(ModeIndex(0, 0), BEAM, 0.0, 0.0)
    assert got == pytest.approx(math.sqrt(2.0 / math.pi) / WAIST, rel=1e-12)
    assert got.imag == 0.0


def test_vortex_null_on_axis():
    for l in (1, -1, 2, 5):
        assert lg_amplitude(ModeIndex(l, 0), BEAM, 0.0, 0.0) == 0.0


def test_ring_radius_of_pure_vortex():
    # |LG_{l,0}| peaks at r = w sqrt(l/2); locate it by dense radial sweep.
    r = np.linspace(1e-6, 3.0 * WAIST, 200000)
    for l in (1, 3):
        prof = np.abs(lg_amplitude(ModeIndex(l, 0), BEAM, r, 0.0))
        r_peak = r[np.argmax(prof)]
        assert r_peak == pytest.approx(WAIST * math.sqrt(l / 2.0), rel=1e-4)


def test_gouy_phase_between_mode_orders():
    # At z = z_R the accumulated Gouy phase is (2p + |l| + 1) * pi/4, so
    # (0,1) lags (0,0) by pi/2 on axis.
    z = BEAM.rayleigh_range
    f00 = lg_amplitude(ModeIndex(0, 0), BEAM, 0.0, 0.0, z)
    f01 = lg_amplitude(ModeIndex(0, 1), BEAM, 0.0, 0.0, z)
    rel = np.angle(f01 / f00)
    assert rel == pytest.approx(-math.pi / 2.0, abs=1e-12)


def test_width_scaling_at_rayleigh_range():
    # w(z_R) = w sqrt(2): amplitudes obey |u(sqrt(2) r, z_R)| = |u(r, 0)| / sqrt(2).
    r = np.linspace(0.0, 2.0 * WAIST, 64)
    for mode in (ModeIndex(0, 0), ModeIndex(2, 1)):
        at_focus = np.abs(lg_amplitude(mode, BEAM, r, 0.3, 0.0))
        at_zr = np.abs(lg_amplitude(mode, BEAM, math.sqrt(2.0) * r, 0.3, BEAM.rayleigh_range))
        np.testing.assert_allclose(at_zr, at_focus / math.sqrt(2.0), atol=1e-9)


def test_conjugation_identity_random_points():
    rng = np.random.default_rng(7)
    zr = BEAM.rayleigh_range
    for _ in range(100):
        l = int(rng.integers(-8, 9))
        p = int(rng.integers(0, 5))
        r = float(rng.uniform(0.0, 3.0 * WAIST))
        phi = float(rng.uniform(-math.pi, math.pi))
        z = float(rng.uniform(-1.5, 1.5)) * zr
        a = lg_amplitude(ModeIndex(-l, p), BEAM, r, phi, z)
        b = np.conj(lg_amplitude(ModeIndex(l, p), BEAM, r, phi, -z))
        assert abs(a - b) <= 1e-13 * max(abs(a), 1e-300)


def test_winding_number():
    phi = np.linspace(-math.pi, math.pi, 512, endpoint=False)
    f = lg_amplitude(ModeIndex(2, 0), BEAM, WAIST, phi)
    total = np.unwrap(np.angle(f))
    # phase advances by 2 * 2pi around one loop
    assert total[-1] - total[0] == pytest.approx(2.0 * 2.0 * math.pi * (511 / 512), rel=1e-9)


def test_sampled_mode_norm():
    spec = default_grid(BEAM, l_max=4, p_max=3)
    for mode in (ModeIndex(0, 0), ModeIndex(4, 3), ModeIndex(-3, 1)):
        f = sample_lg(mode, BEAM, spec)
        assert f.norm() == pytest.approx(1.0, abs=1e-6)


def test_norm_preserved_off_focus():
    z = 0.4 * BEAM.rayleigh_range
    spec = default_grid(BEAM, l_max=2, p_max=2, z=z)
    f = sample_lg(ModeIndex(2, 2), BEAM, spec, z)
    assert f.norm() == pytest.approx(1.0, abs=1e-3)


def test_clip_warning_on_small_window():
    spec = GridSpec(64, 2.0 * WAIST)
    with pytest.warns(ModeClippedWarning):
        sample_lg(ModeIndex(8, 3), BEAM, spec)


def test_inner_product_orthonormality_and_symmetry():
    spec = default_grid(BEAM, l_max=1, p_max=1)
    f00 = sample_lg(ModeIndex(0, 0), BEAM, spec)
    f01 = sample_lg(ModeIndex(0, 1), BEAM, spec)
    f11 = sample_lg(ModeIndex(1, 1), BEAM, spec)
    assert inner_product(f00, f00) == pytest.approx(1.0, abs=1e-9)
    assert abs(inner_product(f00, f01)) < 1e-9
    assert abs(inner_product(f00, f11)) < 1e-9
    a = inner_product(f01, f11)
    b = inner_product(f11, f01)
    assert a == pytest.approx(np.conj(b), abs=1e-15)


def test_inner_product_grid_mismatch():
    f1 = ComplexField(GridSpec(16, 1.0), np.ones((16, 16)))
    f2 = ComplexField(GridSpec(16, 2.0), np.ones((16, 16)))
    with pytest.raises(ValueError):
        inner_product(f1, f2)


def test_intensity_and_phase_of_vortex():
    spec = GridSpec(64, 6.0 * WAIST)
    f = sample_lg(ModeIndex(1, 0), BEAM, spec)
    inten, phase = intensity_and_phase(f)
    np.testing.assert_allclose(inten, np.abs(f.samples) ** 2)
    _, phi = spec.polar()
    np.testing.assert_allclose(phase, phi, atol=1e-9)


def test_iter_matches_sample():
    spec = GridSpec(96, 8.0 * WAIST)
    z = 0.7 * BEAM.rayleigh_range
    modes = [ModeIndex(l, p) for l in (-2, 0, 3) for p in (0, 2)]
    bulk = dict(iter_lg_rasters(BEAM, spec, z, modes))
    for mode in modes:
        single = sample_lg(mode, BEAM, spec, z)
        np.testing.assert_allclose(bulk[mode], single.samples, atol=1e-12)


def test_default_grid_is_at_least_eight_waists():
    for l, p in ((0, 0), (4, 2), (10, 5)):
        spec = default_grid(BEAM, l_max=l, p_max=p, side_points=128)
        assert spec.extent >= 8.0 * WAIST - 1e-12
    # window grows with the mode order so high modes are not clipped
    big = default_grid(BEAM, l_max=10, p_max=5, side_points=128)
    f = sample_lg(ModeIndex(10, 5), BEAM, big)
    assert f.norm() == pytest.approx(1.0, abs=1e-6)


def test_default_grid_other_scale():
    spec = default_grid(BEAM, side_points=64, other_scale=5e-3)
    assert spec.extent >= 8.0 * 5e-3 - 1e-12


def test_field_file_roundtrip(tmp_path):
    spec = GridSpec(32, 3.0 * WAIST)
    f = sample_lg(ModeIndex(2, 1), BEAM, spec)
    path = tmp_path / "mode.oamf"
    write_field(path, f)
    g = read_field(path)
    assert g.spec == spec
    np.testing.assert_array_equal(g.samples, f.samples)


def test_field_file_header(tmp_path):
    spec = GridSpec(4, 1.0)
    path = tmp_path / "f.oamf"
    write_field(path, ComplexField(spec, np.zeros((4, 4))))
    blob = path.read_bytes()
    assert blob[:4] == b"OAMF"
    assert len(blob) == 18 + 4 * 4 * 16


def test_field_file_errors(tmp_path):
    spec = GridSpec(4, 1.0)
    path = tmp_path / "f.oamf"
    write_field(path, ComplexField(spec, np.zeros((4, 4))))
    blob = path.read_bytes()
    bad_magic = tmp_path / "bad_magic.oamf"
    bad_magic.write_bytes(b"XXXX" + blob[4:])
    with pytest.raises(ValueError):
        read_field(bad_magic)
    truncated = tmp_path / "short.oamf"
    truncated.write_bytes(blob[:-8])
    with pytest.raises(ValueError):
        read_field(truncated)
