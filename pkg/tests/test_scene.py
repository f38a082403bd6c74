import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chipradar.constants import C_LIGHT
from chipradar.scene import (
    BUNDLED_SCENES,
    CrosstalkSpec,
    Scatterer,
    TurntableScene,
    bundled_scene,
    delay_sum,
    fractional_delay,
    inject_crosstalk,
    load_scatterers_csv,
    resolve_scene_source,
    rotated_positions,
    scatterer_delay,
    scene_delays,
    scene_gains,
    synthesize_echo,
)
from chipradar.waveform import RealSignal


def bandlimited(n, rng, keep=0.4):
    spec = rng.normal(size=n // 2 + 1) + 1j * rng.normal(size=n // 2 + 1)
    spec[int(keep * len(spec)):] = 0.0
    spec[0] = 0.0
    return np.fft.irfft(spec, n)


# ---------------------------------------------------------------- geometry


def test_centre_scatterer_delay():
    scene = TurntableScene((Scatterer(0.0, 0.0),), standoff=1.5)
    for t in (0.0, 0.1, 0.37):
        assert scene_delays(scene, t)[0] == pytest.approx(3.0 / C_LIGHT)


def test_rotation_moves_range_sinusoidally():
    s = Scatterer(0.1, 0.0)
    scene = TurntableScene((s,), rotation_rate=2 * np.pi, standoff=1.0)
    # a quarter turn puts the scatterer on the cross-range axis
    assert scatterer_delay(s, scene, 0.0) == pytest.approx(2 * 1.1 / C_LIGHT)
    assert scatterer_delay(s, scene, 0.25) == pytest.approx(2 * 1.0 / C_LIGHT, abs=1e-18)
    assert scatterer_delay(s, scene, 0.5) == pytest.approx(2 * 0.9 / C_LIGHT)
    assert scatterer_delay(s, scene, 1.0) == pytest.approx(scatterer_delay(s, scene, 0.0))


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-0.2, 0.2), y=st.floats(-0.2, 0.2), ang=st.floats(-np.pi, np.pi))
def test_rotation_preserves_radius(x, y, ang):
    scene = TurntableScene((Scatterer(x, y),))
    r, c = rotated_positions(scene, ang)
    assert np.hypot(r[0], c[0]) == pytest.approx(np.hypot(x, y), abs=1e-12)


def test_exact_geometry_close_to_plane_wave_for_small_targets():
    scene = TurntableScene((Scatterer(0.05, 0.1),), standoff=10.0)
    plane = scene_delays(scene, 0.0)[0]
    exact = scene_delays(scene, 0.0, exact=True)[0]
    # second-order term y²/(2R)
    assert exact - plane == pytest.approx(2 * 0.1**2 / (2 * 10.05) / C_LIGHT, rel=1e-3)


def test_path_loss_gains():
    scene = TurntableScene((Scatterer(0.0, 0.0, 2.0), Scatterer(0.1, 0.0, 1.0)), standoff=1.0)
    assert np.allclose(scene_gains(scene, 0.0), [2.0, 1.0])
    g = scene_gains(scene, 0.0, path_loss=True)
    assert g[0] == pytest.approx(2.0)
    assert g[1] == pytest.approx(1.0 / 1.1**2)


def test_scene_validation():
    with pytest.raises(ValueError):
        TurntableScene((Scatterer(0.5, 0.0),), standoff=0.4)
    with pytest.raises(ValueError):
        Scatterer(0.0, 0.0, -1.0)
    a = TurntableScene((Scatterer(0, 0),))
    assert len(a.union(TurntableScene((Scatterer(0.1, 0),))).scatterers) == 2


# ---------------------------------------------------------------- delays


def test_integer_delay_is_circular_shift(rng):
    x = rng.normal(size=1000)
    y = fractional_delay(RealSignal(x, 1.0), 7.0)
    assert np.allclose(y.samples, np.roll(x, 7), atol=1e-12)


def test_fractional_delay_of_bin_centred_tone():
    n, fs = 1000, 1e3
    t = np.arange(n) / fs
    x = np.cos(2 * np.pi * 37.0 * t)
    y = fractional_delay(RealSignal(x, fs), 0.3e-3)
    assert np.allclose(y.samples, np.cos(2 * np.pi * 37.0 * (t - 0.3e-3)), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(delay=st.floats(-50.0, 50.0), seed=st.integers(0, 2**31))
def test_fractional_delay_preserves_energy(delay, seed):
    x = RealSignal(bandlimited(2048, np.random.default_rng(seed)), 1.0)
    y = fractional_delay(x, delay)
    assert abs(y.energy() - x.energy()) <= 1e-9 * x.energy()


def test_delay_sum_is_linear(rng):
    x = RealSignal(bandlimited(512, rng), 1.0)
    both = delay_sum(x, [1.5, 4.25], [0.7, 0.2])
    a = fractional_delay(x, 1.5)
    b = fractional_delay(x, 4.25)
    assert np.allclose(both.samples, 0.7 * a.samples + 0.2 * b.samples, atol=1e-12)
    assert not delay_sum(x, [], []).samples.any()


def test_synthesize_echo_uses_scene_delays(rng):
    fs = 1e9
    x = RealSignal(bandlimited(4096, rng), fs)
    scene = TurntableScene((Scatterer(0.0, 0.0),), standoff=0.3)
    echo = synthesize_echo(x, scene, extra_delay=1e-9)
    ref = fractional_delay(x, 0.6 / C_LIGHT + 1e-9)
    assert np.allclose(echo.samples, ref.samples, atol=1e-12)


def test_crosstalk_injection(rng):
    x = RealSignal(bandlimited(1024, rng), 1.0)
    spec = CrosstalkSpec(-6.0, 2.5)
    assert spec.gain == pytest.approx(10 ** (-6 / 20))
    out = inject_crosstalk(x, x, spec, main_delay=1.0)
    ref = x.samples + spec.gain * fractional_delay(x, 3.5).samples
    assert np.allclose(out.samples, ref, atol=1e-12)
    assert inject_crosstalk(x, x, CrosstalkSpec()) is x
    with pytest.raises(ValueError):
        CrosstalkSpec(3.0)
    with pytest.raises(ValueError):
        inject_crosstalk(x, RealSignal(x.samples[:-1], 1.0), spec)


# ---------------------------------------------------------------- scene files


def test_bundled_scenes():
    assert set(BUNDLED_SCENES) == {"two_targets", "a_shape", "airplane"}
    two = bundled_scene("two_targets")
    assert len(two) == 2
    assert abs(two[0].x - two[1].x) == pytest.approx(0.03)
    assert abs(two[0].y - two[1].y) == pytest.approx(0.10)
    assert len(bundled_scene("a_shape")) == 6
    plane = bundled_scene("airplane")
    assert 15 <= len(plane) <= 25
    xs = [s.x for s in plane]
    ys = [s.y for s in plane]
    assert max(xs) - min(xs) == pytest.approx(0.28)  # body
    assert max(ys) - min(ys) == pytest.approx(0.32)  # wingspan
    with pytest.raises(ValueError):
        bundled_scene("nope")


def test_csv_round_trip(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("x_m,y_m,amplitude\n0.01,-0.02,0.5\n0,0,1\n", encoding="utf-8")
    sc = load_scatterers_csv(p)
    assert sc == [Scatterer(0.01, -0.02, 0.5), Scatterer(0.0, 0.0, 1.0)]
    assert resolve_scene_source(p) == sc


def test_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,y\n1,2\n", encoding="utf-8")
    with pytest.raises(ValueError, match="expected columns"):
        load_scatterers_csv(p)
    p.write_text("x_m,y_m,amplitude\n1,abc,1\n", encoding="utf-8")
    with pytest.raises(ValueError, match=":2:"):
        load_scatterers_csv(p)
