import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parapam import torus
from parapam.torus import GridSpec


def brute_dft(f):
    """Direct O(n^4) double sum: c(k) = n^-2 sum_x f(x) exp(-i k.x)."""
    n = f.shape[0]
    x = np.arange(n) * 2 * np.pi / n
    k = np.fft.fftfreq(n) * n
    out = np.zeros((n, n), dtype=complex)
    for a, k1 in enumerate(k):
        for b, k2 in enumerate(k):
            phase = np.exp(-1j * (k1 * x[:, None] + k2 * x[None, :]))
            out[a, b] = np.sum(f * phase) / n**2
    return out


def brute_heat(f, t):
    """sum_k exp(-t|k|^2) fhat(k) exp(ik.x), summed mode by mode."""
    n = f.shape[0]
    c = brute_dft(f)
    x = np.arange(n) * 2 * np.pi / n
    k = np.fft.fftfreq(n) * n
    out = np.zeros((n, n), dtype=complex)
    for a, k1 in enumerate(k):
        for b, k2 in enumerate(k):
            out += np.exp(-t * (k1**2 + k2**2)) * c[a, b] * np.exp(1j * (k1 * x[:, None] + k2 * x[None, :]))
    return out.real


@pytest.mark.parametrize("n", [4, 12, 7, 0])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ValueError):
        GridSpec(n)


def test_grid_spacing():
    g = GridSpec(64)
    assert g.h == pytest.approx(2 * np.pi / 64)
    assert g.length == pytest.approx(2 * np.pi)


def test_constant_transform():
    c = torus.forward_transform(np.full((16, 16), 3.5))
    assert c[0, 0] == pytest.approx(3.5)
    c[0, 0] = 0
    assert np.abs(c).max() < 1e-14


def test_cosine_transform():
    x1, _ = torus.grid_for(16).points
    c = torus.forward_transform(np.cos(x1))
    assert c[1, 0] == pytest.approx(0.5)
    assert c[-1, 0] == pytest.approx(0.5)
    c[1, 0] = c[-1, 0] = 0
    assert np.abs(c).max() < 1e-14


def test_transform_matches_brute_force(rng):
    f = rng.standard_normal((8, 8))
    np.testing.assert_allclose(torus.forward_transform(f), brute_dft(f), atol=1e-13)


@pytest.mark.parametrize("n", [8, 64, 512])
def test_round_trip(rng, n):
    f = rng.standard_normal((n, n))
    back = torus.inverse_transform(torus.forward_transform(f))
    assert np.abs(back - f).max() <= 1e-12 * np.abs(f).max()


def test_heat_identity_and_eigenfunction(rng):
    f = rng.standard_normal((32, 32))
    assert np.abs(torus.heat(f, 0.0) - f).max() < 1e-13
    x1, _ = torus.grid_for(32).points
    t = 0.37
    np.testing.assert_allclose(torus.heat(np.cos(x1), t), np.exp(-t) * np.cos(x1), atol=1e-14)


def test_heat_matches_brute_force(rng):
    f = rng.standard_normal((8, 8))
    np.testing.assert_allclose(torus.heat(f, 0.05), brute_heat(f, 0.05), atol=1e-12)


def test_multiplier_rejects_undefined_symbol(rng):
    f = rng.standard_normal((16, 16))
    with np.errstate(divide="ignore"), pytest.raises(ValueError, match="undefined"):
        torus.apply_multiplier(lambda g: 1.0 / g.ksq, f)


def test_inverse_laplacian_cases(rng):
    x1, _ = torus.grid_for(64).points
    np.testing.assert_allclose(torus.inv_neg_laplacian_zero_mean(np.cos(x1)), np.cos(x1), atol=1e-13)
    assert np.abs(torus.inv_neg_laplacian_zero_mean(np.full((64, 64), 2.0))).max() < 1e-14


def test_inverse_laplacian_on_white_noise():
    from parapam.noise import sample_white_noise
    xi = sample_white_noise(3, 64).xi
    X = torus.inv_neg_laplacian_zero_mean(xi)
    resid = -torus.laplacian(X) - (xi - xi.mean())
    assert np.abs(resid).max() <= 1e-10 * np.abs(xi).max()
    assert abs(X.mean()) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0, 0.5), s=st.floats(0, 0.5))
def test_heat_semigroup_law(seed, t, s):
    f = np.random.default_rng(seed).standard_normal((32, 32))
    lhs = torus.heat(torus.heat(f, t), s)
    assert np.abs(lhs - torus.heat(f, t + s)).max() <= 1e-12 * np.abs(f).max()


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_multiplier_output_is_real(seed):
    f = np.random.default_rng(seed).standard_normal((16, 16))
    full = np.fft.ifft2(np.fft.fft2(f) * np.exp(-0.1 * np.add.outer(
        (np.fft.fftfreq(16) * 16) ** 2, (np.fft.fftfreq(16) * 16) ** 2)))
    assert np.abs(full.imag).max() <= 1e-12 * np.abs(f).max()
    assert np.abs(torus.heat(f, 0.1) - full.real).max() < 1e-13


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.sampled_from([8, 16, 64]))
def test_parseval(seed, n):
    f = np.random.default_rng(seed).standard_normal((n, n))
    coeffs = torus.forward_transform(f)
    assert np.mean(f**2) == pytest.approx(np.sum(np.abs(coeffs) ** 2), rel=1e-12)
    assert torus.parseval_energy(f) == pytest.approx(np.mean(f**2), rel=1e-12)


def test_product_is_dealiased(rng):
    f = rng.standard_normal((32, 32))
    p = torus.product(f, f)
    c = torus.forward_transform(p)
    k1, k2 = torus.wavenumbers(32)
    dropped = (np.abs(k1) >= 32 / 3) | (np.abs(k2) >= 32 / 3)
    assert np.abs(c[dropped]).max() < 1e-14


def test_pfld_round_trip(tmp_path, rng):
    f = rng.standard_normal((16, 16))
    path = tmp_path / "f.pfld"
    torus.write_pfld(path, f)
    raw = path.read_bytes()
    assert raw[:4] == b"PFLD"
    assert int.from_bytes(raw[4:8], "little") == 16
    assert int.from_bytes(raw[8:12], "little") == 0
    assert len(raw) == 16 + 8 * 256
    assert np.array_equal(torus.read_pfld(path), f)


def test_pfld_rejects_garbage(tmp_path):
    path = tmp_path / "bad.pfld"
    path.write_bytes(b"NOPE" + bytes(12))
    with pytest.raises(ValueError, match="PFLD"):
        torus.read_pfld(path)


def test_check_field_rejects_nan():
    f = np.zeros((8, 8))
    f[2, 3] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        torus.check_field(f)
