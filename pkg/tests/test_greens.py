import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointvortex.complexmap import DiskAutomorphism, Identity, Polynomial
from pointvortex.errors import CoincidentPointsError, DomainViolationError, NoSuchHoleError, ParameterError
from pointvortex.greens import (
    DomainModel,
    boundary_distance,
    coupling,
    gamma,
    grad_gamma,
    grad_green,
    grad_robin,
    green,
    harmonic_field,
    harmonic_measure,
    robin,
)
from pointvortex.measure import sample_points, verify_greens

TWO_PI = 2 * np.pi

DOMAINS = {
    "disk": DomainModel.disk(),
    "annulus": DomainModel.annulus(0.5),
    "thin_annulus": DomainModel.annulus(0.8),
    "exterior": DomainModel.exterior_disk(),
    "mapped": DomainModel.image_of_disk(Polynomial.perturbation(0.25)),
    "mapped_exterior": DomainModel.mapped_exterior(Polynomial.affine(2.0)),
}


def samples(domain, n, seed=0, margin=0.02):
    rng = np.random.default_rng(seed)
    z = sample_points(domain, 4 * n, rng)
    return z[domain.boundary_distance(z) > margin][:n]


# closed forms written out independently of the package kernels
def disk_green(x, y):
    ystar = y / abs(y) ** 2
    return (np.log(abs(x - y)) - np.log(abs(x - ystar) * abs(y))) / TWO_PI


def disk_robin(x):
    return -np.log(1 - abs(x) ** 2) / TWO_PI


def test_disk_examples():
    D = DOMAINS["disk"]
    assert green(D, 0.5, -0.5) == pytest.approx(-np.log(1.25) / TWO_PI, rel=1e-14)
    assert green(D, 0.5, -0.5) == pytest.approx(-0.0355144, abs=1e-7)
    assert green(D, 1.0, 0.3) == 0.0
    g = grad_green(D, 0.5, -0.5)
    assert g == pytest.approx(0.0954930, abs=1e-7)
    assert grad_green(D, 0.5j, -0.5j) == pytest.approx(0.0954930j, abs=1e-7)
    assert gamma(D, 0.0, 0.0) == 0.0
    assert gamma(D, 0.5, -0.5) == pytest.approx(green(D, 0.5, -0.5), abs=1e-15)
    assert robin(D, 0.0) == 0.0
    assert robin(D, 0.5) == pytest.approx(-np.log(0.75) / TWO_PI, rel=1e-14)
    assert grad_robin(D, 0.0) == 0.0
    assert grad_robin(D, 0.5) == pytest.approx(0.2122066, abs=1e-7)


def test_gradient_accessor():
    D = DOMAINS["disk"]
    kv = green(D, 0.5, -0.5, with_gradient=True)
    assert kv.value == pytest.approx(green(D, 0.5, -0.5))
    assert kv.gradient_x == pytest.approx(grad_green(D, 0.5, -0.5))
    kv = robin(D, 0.5, with_gradient=True)
    assert kv.gradient_x == pytest.approx(grad_robin(D, 0.5))


def test_pairs_input():
    D = DOMAINS["disk"]
    assert green(D, [0.5, 0.0], [-0.5, 0.0]) == pytest.approx(green(D, 0.5, -0.5))


def test_disk_against_independent_closed_form():
    D = DOMAINS["disk"]
    x, y = samples(D, 300, 1), samples(D, 300, 2)
    want = np.array([disk_green(a, b) for a, b in zip(x, y)])
    assert np.max(np.abs(green(D, x, y) - want)) < 1e-12
    assert np.max(np.abs(robin(D, x) - np.array([disk_robin(a) for a in x]))) < 1e-12


def test_errors():
    D = DOMAINS["disk"]
    with pytest.raises(CoincidentPointsError):
        green(D, 0.2, 0.2)
    with pytest.raises(DomainViolationError):
        green(D, 1.5, 0.2)
    with pytest.raises(DomainViolationError):
        robin(DOMAINS["annulus"], 0.1)
    with pytest.raises(NoSuchHoleError):
        harmonic_measure(D, 1, 0.3)
    with pytest.raises(NoSuchHoleError):
        harmonic_measure(DOMAINS["annulus"], 2, 0.7)
    with pytest.raises(ParameterError):
        DomainModel.annulus(1.5)


def test_mobius_invariance_via_mapped_domain():
    D = DOMAINS["disk"]
    M = DomainModel.mapped(DiskAutomorphism(0.3))
    x, y = samples(D, 100, 3), samples(D, 100, 4)
    assert np.max(np.abs(green(M, x, y) - green(D, x, y))) < 1e-12


def test_identity_map_transport():
    M = DomainModel.mapped(Identity())
    x = samples(DOMAINS["disk"], 50)
    assert np.max(np.abs(robin(M, x) - robin(DOMAINS["disk"], x))) < 1e-15


def test_robin_transport_formula():
    T = Polynomial.perturbation(0.25)
    U = DOMAINS["mapped"]
    x = samples(U, 200, 5)
    to_disk = U.map
    want = robin(DOMAINS["disk"], to_disk.forward(x)) + np.log(np.abs(to_disk.deriv(x))) / TWO_PI
    assert np.max(np.abs(robin(U, x) - want)) < 1e-12
    assert T.kind == "polynomial"


@pytest.mark.parametrize("name", DOMAINS)
def test_symmetry(name):
    dom = DOMAINS[name]
    x, y = samples(dom, 200, 6), samples(dom, 200, 7)
    assert np.max(np.abs(green(dom, x, y) - green(dom, y, x))) < 1e-12
    assert np.max(np.abs(gamma(dom, x, y) - gamma(dom, y, x))) < 1e-12


@pytest.mark.parametrize("name", DOMAINS)
def test_finite_difference_gradients(name):
    dom = DOMAINS[name]
    x, y = samples(dom, 200, 8, 0.05), samples(dom, 200, 9, 0.05)
    keep = np.abs(x - y) > 0.05
    x, y = x[keep], y[keep]
    h = 1e-6
    k = dom.kernels
    fd = (k.G(x + h, y) - k.G(x - h, y) + 1j * (k.G(x + 1j * h, y) - k.G(x - 1j * h, y))) / (2 * h)
    assert np.max(np.abs(fd - grad_green(dom, x, y))) < 1e-6
    fd = (k.robin(x + h) - k.robin(x - h) + 1j * (k.robin(x + 1j * h) - k.robin(x - 1j * h))) / (2 * h)
    assert np.max(np.abs(fd - grad_robin(dom, x))) < 1e-6
    fd = (k.gamma(x + h, y) - k.gamma(x - h, y) + 1j * (k.gamma(x + 1j * h, y) - k.gamma(x - 1j * h, y))) / (2 * h)
    assert np.max(np.abs(fd - grad_gamma(dom, x, y))) < 1e-6


@pytest.mark.parametrize("name", DOMAINS)
def test_boundary_vanishing_near_boundary(name):
    dom = DOMAINS[name]
    th = np.linspace(0, TWO_PI, 360, endpoint=False)
    y = samples(dom, 50, 10, 0.05)[0]
    comps = range(dom.boundary_components)
    for c in comps:
        x = dom.near_boundary_points(th, 1e-6, c)
        assert np.max(np.abs(green(dom, x, y))) < 1e-4


@pytest.mark.parametrize("name", DOMAINS)
def test_invariant_report(name):
    rep = verify_greens(DOMAINS[name], sample_count=150, seed=1)
    assert rep.passed, rep.failures


def test_annulus_harmonic_measure_examples():
    A = DOMAINS["annulus"]
    assert harmonic_measure(A, 1, np.sqrt(0.5)) == pytest.approx(0.5, abs=1e-15)
    assert harmonic_measure(A, 1, 1.0) == 0.0
    assert harmonic_measure(A, 1, 0.5) == pytest.approx(1.0)
    assert harmonic_field(A, 1, 0.75) == pytest.approx(1j / (0.75 * np.log(0.5)), abs=1e-14)


def test_coupling_examples():
    D = DOMAINS["disk"]
    assert abs(coupling(D, 0.5, -0.5)) < 1e-15
    g, r = grad_green(D, 0.5, 0.5j), grad_robin(D, 0.5)
    want = g.real * (-r.imag) + g.imag * r.real
    assert coupling(D, 0.5, 0.5j) == pytest.approx(want, abs=1e-12)


def test_coupling_transport_identity():
    U = DomainModel.mapped(Polynomial.perturbation(0.25, radius=2.0), check=False)
    T = U.map
    rng = np.random.default_rng(11)
    w = 0.95 * np.sqrt(rng.uniform(size=(2, 100))) * np.exp(1j * rng.uniform(0, TWO_PI, (2, 100)))
    x, y = T.inverse(w[0]), T.inverse(w[1])
    Dk = DOMAINS["disk"].kernels
    d1 = T.deriv(x)
    gD = Dk.grad_G(T.forward(x), T.forward(y))
    rD = Dk.grad_robin(T.forward(x))
    dotD = np.real(gD * np.conj(1j * rD))
    psi = (1j / TWO_PI) * np.conj(np.conj(d1) ** 2 * T.second_deriv(x))
    rhs = np.abs(d1) ** 2 * dotD + np.real(gD * np.conj(psi)) / np.abs(d1) ** 2
    lhs = U.kernels
    left = np.real(lhs.grad_G(x, y) * np.conj(1j * lhs.grad_robin(x)))
    assert np.max(np.abs(left - rhs)) < 1e-8


def test_boundary_distance():
    assert boundary_distance(DOMAINS["annulus"], 0.75) == pytest.approx(0.25)
    U = DOMAINS["mapped"]
    x = samples(U, 5, 12)
    curve = U.boundary_curve(np.linspace(0, TWO_PI, 400001))
    brute = np.array([np.min(np.abs(p - curve)) for p in x])
    assert np.max(np.abs(boundary_distance(U, x) - brute)) < 1e-6


def test_robin_blows_up_towards_boundary():
    for dom in (DOMAINS["disk"], DOMAINS["annulus"], DOMAINS["mapped"]):
        x = dom.near_boundary_points(np.full(6, 0.4), 10.0 ** -np.arange(1, 7))
        assert np.all(np.diff(robin(dom, x)) > 0)


def test_annulus_domain_monotonicity():
    A = DOMAINS["annulus"]
    outer = DOMAINS["disk"]
    hole = DomainModel.mapped_exterior(Polynomial.affine(2.0), check=False)
    x, y = samples(A, 300, 13), samples(A, 300, 14)
    assert np.all(gamma(A, x, y) >= gamma(outer, x, y) - 1e-13)
    assert np.all(gamma(A, x, y) >= gamma(hole, x, y) - 1e-13)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 0.999), st.floats(0.0, 2 * np.pi), st.floats(0.0, 0.999), st.floats(0.0, 2 * np.pi))
def test_disk_green_nonpositive_and_symmetric(r1, t1, r2, t2):
    D = DOMAINS["disk"]
    x, y = r1 * np.exp(1j * t1), r2 * np.exp(1j * t2)
    if x == y:
        return
    g = green(D, x, y)
    assert g <= 1e-15
    assert g == pytest.approx(green(D, y, x), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.51, 0.999), st.floats(0.0, 2 * np.pi))
def test_annulus_robin_sandwich(r, t):
    A = DOMAINS["annulus"]
    x = r * np.exp(1j * t)
    assert np.log(A.boundary_distance(x)) <= -TWO_PI * robin(A, x) + 1e-12
