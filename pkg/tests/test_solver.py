import numpy as np
import pytest

from parapam import noise, solver, torus
from parapam.noise import EnhancedNoise
from parapam.solver import BlowUpError, ModelCoefficients, SolverConfig


def _zero_noise(n):
    return EnhancedNoise.from_forcing(np.zeros((n, n)))


def _sup_diff(a, b):
    return float(np.abs(a.values - b.values).max())


# -- counterterm ---------------------------------------------------------------------

def test_counterterm_constant_coefficients():
    u = np.linspace(-3, 3, 64).reshape(8, 8)
    assert np.all(solver.counterterm(u, solver.constant_model(2.0, 3.0), 1.7) == 0.0)


def test_counterterm_linear_g():
    coeffs = ModelCoefficients("lin", lambda u: np.ones_like(u), lambda u: np.zeros_like(u),
                               lambda u: u, lambda u: np.ones_like(u), 1.0, 1.0)
    u = np.linspace(-3, 3, 16)
    np.testing.assert_allclose(solver.counterterm(u, coeffs, 0.4), 0.4 * u, rtol=1e-15)


def test_counterterm_sin_cos_at_zero():
    assert solver.counterterm(np.zeros(1), solver.sin_cos_model(), 2.0)[0] == pytest.approx(-0.5)


@pytest.mark.parametrize("name", sorted(solver.MODELS))
def test_registry_models_consistent(name):
    solver.model(name).check()


def test_model_check_catches_wrong_derivative():
    bad = ModelCoefficients("bad", lambda u: 2 + np.sin(u), np.sin, np.cos, lambda u: -np.sin(u), 1.0, 3.0)
    with pytest.raises(ValueError, match="a'"):
        bad.check()


def test_unknown_model():
    with pytest.raises(ValueError, match="unknown coefficient model"):
        solver.model("cubic")


# -- config --------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(n=32, T=0.1, dt=0.0).validate()
    with pytest.raises(ValueError):
        SolverConfig(n=32, T=-1, dt=0.1).validate()
    with pytest.raises(ValueError, match="scheme"):
        SolverConfig(n=32, T=0.1, dt=0.01, scheme="euler").validate()
    with pytest.raises(ValueError, match="explicit-rk4"):
        SolverConfig(n=32, T=0.1, dt=0.01, scheme="explicit-rk4").validate(solver.sin_cos_model())


def test_T_not_multiple_of_dt():
    cfg = SolverConfig(n=16, T=0.1, dt=0.03)
    with pytest.raises(ValueError, match="whole number"):
        solver.integrate(np.zeros((16, 16)), _zero_noise(16), solver.sin_cos_model(), cfg)


def test_default_dt():
    h = 2 * np.pi / 256
    assert solver.default_dt(2.0**-4, 256, 3.0) == pytest.approx(0.9 * h * h / 12)
    assert solver.default_dt(1e-6, 256, 3.0) == pytest.approx(1e-6 / 8)


# -- integrate -------------------------------------------------------------------------

def test_constant_solution_is_exact():
    cfg = SolverConfig(n=32, T=0.1, dt=0.01)
    u = solver.integrate(np.full((32, 32), 0.7), _zero_noise(32), solver.sin_cos_model(), cfg)
    assert np.all(u.values == 0.7)
    assert len(u) == 11 and u.times[-1] == pytest.approx(0.1)


def test_snapshot_stride():
    cfg = SolverConfig(n=16, T=0.1, dt=0.01, stride=5)
    u = solver.integrate(np.zeros((16, 16)), _zero_noise(16), solver.sin_cos_model(), cfg)
    np.testing.assert_allclose(u.times, [0.0, 0.05, 0.1])


def test_duhamel_linear_case():
    n, T = 32, 0.5
    x1, x2 = torus.grid_for(n).points
    u0 = np.cos(x2) + 0.5 * np.sin(2 * x1)
    zeta = np.cos(x1)
    exact = torus.heat(u0, T) + (1 - np.exp(-T)) * zeta
    errs = []
    for dt in (0.05, 0.025, 0.0125):
        u = solver.integrate(u0, EnhancedNoise.from_forcing(zeta), solver.constant_model(), SolverConfig(n, T, dt))
        errs.append(np.abs(u.values[-1] - exact).max())
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 1.8) & (ratios < 2.2))


def _manufactured_error(dt, n=32, T=0.5):
    x1, _ = torus.grid_for(n).points
    coeffs = solver.sin_cos_model()

    def exact(t):
        return np.exp(-t) * np.cos(x1)

    def source(t):
        u = exact(t)
        # d/dt u* = -u*, Lap u* = -u*
        return -u + coeffs.a(u) * u

    cfg = SolverConfig(n, T, dt)
    u = solver.integrate(exact(0.0), _zero_noise(n), coeffs, cfg, source=source)
    return max(np.abs(snap - exact(t)).max() for t, snap in zip(u.times, u.values))


def test_manufactured_solution_order():
    dts = [0.02, 0.01, 0.005]
    errs = [_manufactured_error(dt) for dt in dts]
    order = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert order >= 0.9


def test_reproducible():
    en = noise.enhanced_noise(3, 32, 2.0**-4)
    x1, _ = torus.grid_for(32).points
    cfg = SolverConfig(32, 0.01, 0.001)
    a = solver.integrate(np.cos(x1), en, solver.sin_cos_model(), cfg)
    b = solver.integrate(np.cos(x1), en, solver.sin_cos_model(), cfg)
    assert np.array_equal(a.values, b.values)


def test_renormalize_flag_changes_solution():
    en = noise.enhanced_noise(3, 32, 2.0**-4)
    x1, _ = torus.grid_for(32).points
    on = solver.integrate(np.cos(x1), en, solver.sin_cos_model(), SolverConfig(32, 0.01, 0.001))
    off = solver.integrate(np.cos(x1), en, solver.sin_cos_model(), SolverConfig(32, 0.01, 0.001, renormalize=False))
    assert _sup_diff(on, off) > 0


def test_maximum_principle_envelope():
    x1, x2 = torus.grid_for(32).points
    u0 = np.cos(x1) + 0.5 * np.cos(x2)
    u = solver.integrate(u0, _zero_noise(32), solver.sin_cos_model(), SolverConfig(32, 0.5, 0.005))
    sup = np.abs(u.values).max(axis=(1, 2))
    assert np.all(np.diff(sup) <= 1e-8)


def test_rk4_agrees_with_imex():
    n, T = 32, 0.1
    x1, x2 = torus.grid_for(n).points
    u0 = np.cos(x1) + 0.3 * np.sin(x2)
    zeta = np.sin(x1 + x2)
    en = EnhancedNoise.from_forcing(zeta)
    coeffs = solver.sin_cos_model()
    ref = solver.integrate(u0, en, coeffs, SolverConfig(n, T, 0.0025, scheme="explicit-rk4"))
    errs = [np.abs(solver.integrate(u0, en, coeffs, SolverConfig(n, T, dt)).values[-1] - ref.values[-1]).max()
            for dt in (0.01, 0.005)]
    assert errs[1] < errs[0] < 0.05
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.25)


def test_blow_up_reports_last_time():
    n = 16
    def source(t):
        return np.full((n, n), np.inf if t >= 0.05 else 0.0)
    with pytest.raises(BlowUpError) as info:
        solver.integrate(np.zeros((n, n)), _zero_noise(n), solver.sin_cos_model(),
                         SolverConfig(n, 0.1, 0.01), source=source)
    assert info.value.last_time == pytest.approx(0.05)


# -- transformed equation ----------------------------------------------------------------

def test_transform_identity():
    tr = solver.transform_tables(solver.constant_model())
    u = np.linspace(-5, 5, 21)
    np.testing.assert_array_equal(tr.A(u), u)
    np.testing.assert_array_equal(tr.b(u), u)
    coeffs = solver.constant_model(1.0, 2.5)
    np.testing.assert_allclose(solver.transform_tables(coeffs).f(u), 2.5)


def test_transform_tabulated_constant_two():
    # same a = 2 but without the constant shortcut, so the tables are exercised
    two = ModelCoefficients("two", lambda u: np.full(np.shape(u), 2.0), lambda u: np.zeros(np.shape(u)),
                            np.cos, lambda u: -np.sin(u), 2.0, 2.0)
    tr = solver.transform_tables(two)
    u = np.linspace(-5, 5, 101)
    np.testing.assert_allclose(tr.A(u), u / 2, atol=1e-12)
    np.testing.assert_allclose(tr.b(u), 2 * u, atol=1e-12)


def test_transform_round_trip():
    tr = solver.transform_tables(solver.sin_cos_model())
    u = np.linspace(-5, 5, 2001)
    assert np.abs(tr.b(tr.A(u)) - u).max() <= 1e-10
    assert np.all(np.diff(tr.A(u)) > 0)


def test_transform_out_of_range():
    tr = solver.transform_tables(solver.sin_cos_model(), u_range=2.0)
    with pytest.raises(ValueError, match="outside tabulated range"):
        tr.A(np.array([3.0]))


def test_transformed_counterterm():
    coeffs = solver.sin_cos_model()
    tr = solver.transform_tables(coeffs)
    u = np.linspace(-2, 2, 9)
    v = tr.A(u)
    np.testing.assert_allclose(tr.transformed_counterterm(v, 0.3),
                               solver.counterterm(u, coeffs, 0.3) / coeffs.a(u), atol=1e-12)


def test_transformed_identical_when_a_is_one():
    en = noise.enhanced_noise(1, 32, 2.0**-4)
    x1, _ = torus.grid_for(32).points
    coeffs = solver.constant_model(1.0, 1.0)
    cfg = SolverConfig(32, 0.02, 0.001)
    direct = solver.integrate(np.cos(x1), en, coeffs, cfg)
    trans = solver.integrate_transformed(np.cos(x1), en, coeffs, cfg)
    assert _sup_diff(direct, trans) <= 1e-13


def test_cross_solver_smooth_forcing():
    n, T = 32, 0.2
    x1, x2 = torus.grid_for(n).points
    en = EnhancedNoise.from_forcing(np.sin(x1) * np.cos(x2))
    coeffs = solver.sin_cos_model()
    tr = solver.transform_tables(coeffs)
    gaps = []
    for dt in (0.01, 0.005, 0.0025):
        cfg = SolverConfig(n, T, dt, renormalize=False)
        gaps.append(_sup_diff(solver.integrate(np.cos(x1), en, coeffs, cfg),
                              solver.integrate_transformed(np.cos(x1), en, coeffs, cfg, transform=tr)))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[1] / gaps[2] == pytest.approx(2.0, rel=0.25)


def test_cross_solver_zero_noise():
    n, T = 32, 0.2
    x1, _ = torus.grid_for(n).points
    coeffs = solver.rational_model()
    gaps = []
    for dt in (0.01, 0.005):
        cfg = SolverConfig(n, T, dt)
        gaps.append(_sup_diff(solver.integrate(np.cos(x1), _zero_noise(n), coeffs, cfg),
                              solver.integrate_transformed(np.cos(x1), _zero_noise(n), coeffs, cfg)))
    assert gaps[1] < gaps[0] < 0.05
