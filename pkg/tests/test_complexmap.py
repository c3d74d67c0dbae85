import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from pointvortex.complexmap import (
    Composed,
    DiskAutomorphism,
    Identity,
    Inverse,
    Inversion,
    Polynomial,
    boundary_normal,
    cauchy_riemann_residual,
    map_deriv,
    map_forward,
    map_from_config,
    map_sanity_report,
    map_second_deriv,
    psi_correction,
    pullback_gradient,
)
from pointvortex.domain import DomainModel
from pointvortex.errors import DomainViolationError, MapRejectedError, ParameterError

CATALOGUE = [
    Identity(),
    DiskAutomorphism(0.3 - 0.2j, 0.7),
    Polynomial.perturbation(0.25),
    Polynomial.perturbation(-0.4j),
    Inversion(),
    Composed(DiskAutomorphism(0.2, 0.0), Polynomial.perturbation(0.1)),
]


def interior(map_, n, seed=0):
    rng = np.random.default_rng(seed)
    z, n_in = map_.closure_samples(4 * n, rng)
    z = z[:n_in]
    return z[map_.contains(z)][:n]


def test_forward_examples():
    assert map_forward(Identity(), 0.3 + 0.4j) == pytest.approx(0.3 + 0.4j)
    assert map_forward(Inversion(), 2.0) == pytest.approx(0.5)
    assert abs(map_forward(DiskAutomorphism(0.3), 0.3)) < 1e-15


def test_forward_accepts_pairs():
    assert map_forward(Identity(), [0.3, 0.4]) == pytest.approx(0.3 + 0.4j)


def test_domain_violation():
    with pytest.raises(DomainViolationError):
        map_forward(Inversion(), 0.5)
    with pytest.raises(DomainViolationError):
        map_deriv(Polynomial.perturbation(0.25), 1.5)


def test_automorphism_needs_interior_parameter():
    with pytest.raises(ParameterError):
        DiskAutomorphism(1.2)


@pytest.mark.parametrize("m", CATALOGUE, ids=lambda m: m.kind)
def test_derivatives_match_finite_differences(m):
    z = interior(m, 200)
    h = 1e-6
    fd1 = (m.forward(z + h) - m.forward(z - h)) / (2 * h)
    assert np.max(np.abs(fd1 - m.deriv(z)) / (1 + np.abs(fd1))) < 1e-7
    fd2 = (m.deriv(z + h) - m.deriv(z - h)) / (2 * h)
    assert np.max(np.abs(fd2 - m.second_deriv(z)) / (1 + np.abs(fd2))) < 1e-6


@pytest.mark.parametrize("m", CATALOGUE, ids=lambda m: m.kind)
def test_conformality(m):
    z = interior(m, 1000)
    assert np.max(cauchy_riemann_residual(m, z)) < 1e-6


@pytest.mark.parametrize("m", CATALOGUE, ids=lambda m: m.kind)
def test_inverse_roundtrip(m):
    z = interior(m, 300)
    assert np.max(np.abs(m.forward(m.inverse(m.forward(z))) - m.forward(z))) < 1e-10


def test_pullback_examples():
    assert pullback_gradient(Identity(), 0.1 + 0.2j, [1.0, 2.0]) == pytest.approx(1 + 2j)
    assert pullback_gradient(Inversion(), 2.0, [1.0, 0.0]) == pytest.approx(-0.25)
    rot = Polynomial.affine(1j)
    assert pullback_gradient(rot, 0.3, [1.0, 0.0]) == pytest.approx(-1j)


@pytest.mark.parametrize("m", CATALOGUE, ids=lambda m: m.kind)
def test_pullback_chain_rule(m):
    # f(w) = |w|^2 has gradient 2w
    z = interior(m, 100, seed=3)
    h = 1e-6

    def f(u):
        return np.abs(m.forward(u)) ** 2

    fd = (f(z + h) - f(z - h) + 1j * (f(z + 1j * h) - f(z - 1j * h))) / (2 * h)
    g = pullback_gradient(m, z, 2 * m.forward(z))
    assert np.max(np.abs(fd - g) / (1 + np.abs(g))) < 1e-6


def test_psi_examples():
    assert psi_correction(Polynomial.affine(2 - 1j, 0.5), 0.3j) == pytest.approx(0)
    assert psi_correction(Polynomial.perturbation(0.25), 0.0) == pytest.approx(0.5j / (2 * np.pi), abs=1e-15)
    assert abs(psi_correction(Polynomial.perturbation(0.25), 0.0).imag - 0.0795775) < 1e-7


def test_psi_against_symbolic_componentwise_formula():
    x, y = sp.symbols("x y", real=True)
    z = x + sp.I * y
    T = sp.expand(z + sp.Rational(1, 4) * z**2)
    T1, T2 = sp.re(T), sp.im(T)
    a, b = sp.diff(T1, x), sp.diff(T2, x)
    A, B = sp.diff(T1, x, 2), sp.diff(T2, x, 2)
    psi1 = (-2 * a * b * A + (a**2 - b**2) * B) / (2 * sp.pi)
    psi2 = ((a**2 - b**2) * A + 2 * a * b * B) / (2 * sp.pi)
    m = Polynomial.perturbation(0.25)
    for yy in (-0.9, -0.4, 0.2, 0.7):
        got = psi_correction(m, 1j * yy)
        want = complex(sp.N(psi1.subs({x: 0, y: yy}))) + 1j * complex(sp.N(psi2.subs({x: 0, y: yy})))
        assert got == pytest.approx(want, abs=1e-14)


def test_boundary_normal_examples():
    D = DomainModel.disk()
    assert boundary_normal(D, 1.0) == pytest.approx(1.0)
    assert boundary_normal(D, 0.5) == pytest.approx(0.5)
    assert boundary_normal(DomainModel.exterior_disk(), 1.0) == pytest.approx(-1.0)
    n, flag = boundary_normal(D, 0.0, with_flag=True)
    assert n == 0 and flag


def test_boundary_normal_on_mapped_boundary():
    U = DomainModel.image_of_disk(Polynomial.perturbation(0.25))
    th = np.linspace(0, 2 * np.pi, 360, endpoint=False)
    x = U.boundary_curve(th)
    n = boundary_normal(U, x)
    assert np.max(np.abs(np.abs(n) - 1)) < 1e-8
    h = 1e-6
    tangent = (U.boundary_curve(th + h) - U.boundary_curve(th - h)) / (2 * h)
    cos = np.real(n * np.conj(tangent)) / np.abs(tangent)
    assert np.max(np.abs(cos)) < 1e-6


def test_sanity_report_examples():
    r = map_sanity_report(Identity())
    assert r.m_lower == pytest.approx(1) and r.deriv_max == pytest.approx(1)
    assert r.cr_residual_max < 1e-8 and r.accepted
    r = map_sanity_report(Polynomial.perturbation(0.25))
    assert r.m_lower >= 0.5 - 1e-12 and r.deriv_max <= 1.5 + 1e-12
    assert r.injectivity_violations == 0
    with pytest.raises(MapRejectedError) as exc:
        map_sanity_report(Polynomial.perturbation(0.75))
    assert exc.value.report.injectivity_violations > 0


def test_sanity_report_deterministic():
    m = DiskAutomorphism(0.4j, 1.0)
    assert map_sanity_report(m, 500, seed=7) == map_sanity_report(m, 500, seed=7)


def test_map_config_roundtrip():
    for m in CATALOGUE + [Inverse(Polynomial.perturbation(0.2))]:
        again = map_from_config(m.to_config())
        z = interior(m, 20)
        assert np.allclose(again.forward(z), m.forward(z))


@settings(max_examples=60, deadline=None)
@given(
    st.floats(-0.8, 0.8),
    st.floats(-0.8, 0.8),
    st.floats(0, 2 * np.pi),
    st.floats(-0.5, 0.5),
    st.floats(-0.5, 0.5),
)
def test_automorphism_inverse_and_derivative_identity(ar, ai, theta, zr, zi):
    # hypothesis: T' = (1 - |T|^2) / (1 - |z|^2) in modulus for disk automorphisms
    a = complex(ar, ai)
    if abs(a) >= 0.95:
        return
    m = DiskAutomorphism(a, theta)
    z = complex(zr, zi)
    w = m.forward(z)
    assert abs(m.inverse(w) - z) < 1e-12
    assert abs(abs(m.deriv(z)) - (1 - abs(w) ** 2) / (1 - abs(z) ** 2)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_second_derivative_accessor(zr, zi):
    z = complex(zr, zi)
    if abs(z) > 1:
        return
    m = Polynomial.perturbation(0.25)
    assert map_second_deriv(m, z) == pytest.approx(0.5)
