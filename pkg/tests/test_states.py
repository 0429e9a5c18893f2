"""State bundles: densities, trig states, functionals, Cauchy-Schwarz."""

import numpy as np
import pytest

import fiberdyn as fd
from support import l0, rand_densities, rand_matrix_section, rand_trig_section


def test_canonical_trace(space2):
    tr = fd.StateBundle.canonical_trace(space2, 3)
    e00 = fd.matrix_unit_section(space2, 3, 0, 0)
    vals = fd.state_eval(tr, e00).values
    assert np.allclose(vals, [1 / 3, 1 / 3], atol=1e-15)
    unit = fd.unit_section(space2, fd.FiberKind.matrix(3))
    assert np.allclose(fd.state_eval(tr, unit).values, [1.0, 1.0], atol=1e-15)


def test_density_validation_names_atom(space2):
    rng = np.random.default_rng(0)
    rho = rand_densities(rng, space2, 3)
    with pytest.raises(fd.ConstructionError, match="atom 'w0'.*trace"):
        fd.StateBundle.from_densities(space2, [rho[0] * 1.4, rho[1]])
    bad = rho[1].copy()
    bad[0, 1] += 0.2
    with pytest.raises(fd.ConstructionError, match="atom 'w1'.*Hermitian"):
        fd.StateBundle.from_densities(space2, [rho[0], bad])
    w, v = np.linalg.eigh(rho[0])
    w[0] = -0.1
    nd = (v * w) @ v.conj().T
    nd /= np.trace(nd).real
    with pytest.raises(fd.ConstructionError, match="positive semidefinite"):
        fd.StateBundle.from_densities(space2, [nd, rho[1]])


def test_lebesgue_kills_nonzero_modes(space2):
    leb = fd.StateBundle.lebesgue(space2, 4)
    kind = fd.FiberKind.trigpoly(4)
    for k in (1, -1, 3):
        mk = fd.constant_section(space2, kind, fd.TrigPolyFiberElement.mode(k))
        assert np.array_equal(fd.state_eval(leb, mk).values, [0.0, 0.0])
    unit = fd.unit_section(space2, kind)
    assert np.array_equal(fd.state_eval(leb, unit).values, [1.0, 1.0])


def test_point_mass_evaluates_at_the_point(space2):
    pm = fd.StateBundle.point_masses(space2, [0.25, 0.0], 4)
    m1 = fd.constant_section(space2, fd.FiberKind.trigpoly(4),
                             fd.TrigPolyFiberElement.mode(1))
    vals = fd.state_eval(pm, m1).values
    assert abs(vals[0] - 1j) <= 1e-15
    assert abs(vals[1] - 1.0) <= 1e-15


def test_states_are_unital_and_positive_on_random_data(space3):
    rng = np.random.default_rng(1)
    phi = fd.StateBundle.from_densities(space3, rand_densities(rng, space3, 3))
    unit = fd.unit_section(space3, fd.FiberKind.matrix(3))
    assert fd.ess_sup(fd.state_eval(phi, unit) - fd.L0Element.one(space3)) <= 1e-12
    for _ in range(20):
        x = rand_matrix_section(rng, space3, 3)
        vals = fd.state_eval(phi, x.adjoint() * x).values
        assert np.all(vals.real >= -1e-12)
        assert np.all(np.abs(vals.imag) <= 1e-12)


def test_functional_norm_of_state_is_one(space2):
    tr = fd.StateBundle.canonical_trace(space2, 3)
    assert np.allclose(fd.functional_norm(fd.state_functional(tr)).values,
                       [1.0, 1.0], atol=1e-12)


def test_functional_scale_add(space2):
    rng = np.random.default_rng(2)
    phi = fd.StateBundle.from_densities(space2, rand_densities(rng, space2, 2))
    psi = fd.StateBundle.canonical_trace(space2, 2)
    f = fd.state_functional(phi)
    g = fd.state_functional(psi)
    h = f.scale_add(0.25, g, 0.75)
    x = rand_matrix_section(rng, space2, 2)
    lhs = h.eval(x).values
    rhs = (0.25 * f.eval(x) + 0.75 * g.eval(x)).values
    assert np.allclose(lhs, rhs, atol=1e-14)


def test_positive_functional_suite_report(space2):
    rng = np.random.default_rng(3)
    phi = fd.StateBundle.canonical_trace(space2, 3)
    psi = fd.StateBundle.from_densities(space2, rand_densities(rng, space2, 3))
    alpha = l0(space2, [0.3, 0.7])
    beta = l0(space2, [0.7, 0.3])
    rep = fd.positive_functional_suite(phi, psi, alpha, beta, seed=1, trials=50)
    assert rep.chain_residual <= 1e-10
    assert rep.norm_at_unit_residual <= 1e-10
    assert rep.additivity_residual <= 1e-10
    assert rep.combination_is_state is True
    # weights that do not sum to one: no state claim is made either way
    rep2 = fd.positive_functional_suite(phi, psi, alpha, alpha, seed=1, trials=5)
    assert rep2.combination_is_state is None


def test_cauchy_schwarz_zero_at_equal_arguments(space3):
    rng = np.random.default_rng(4)
    phi = fd.StateBundle.from_densities(space3, rand_densities(rng, space3, 4))
    a = rand_matrix_section(rng, space3, 4)
    res = fd.cauchy_schwarz_residual(phi, a, a)
    assert np.array_equal(res.values, [0.0, 0.0, 0.0])


def test_cauchy_schwarz_random_triples(space3):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        phi = fd.StateBundle.from_densities(space3, rand_densities(rng, space3, 3))
        a = rand_matrix_section(rng, space3, 3)
        b = rand_matrix_section(rng, space3, 3)
        worst = max(worst, fd.ess_sup(fd.cauchy_schwarz_residual(phi, a, b)))
    assert worst <= 1e-10


def test_cauchy_schwarz_trig_side(space2):
    rng = np.random.default_rng(6)
    leb = fd.StateBundle.lebesgue(space2, 8)
    for _ in range(20):
        a = rand_trig_section(rng, space2, 4, budget=8)
        b = rand_trig_section(rng, space2, 4, budget=8)
        assert fd.ess_sup(fd.cauchy_schwarz_residual(leb, a, b)) <= 1e-10


def test_invariance_residual_values(space2):
    rot = fd.MarkovBundle.rotation(space2, [0.5, 0.25], 4)
    leb = fd.StateBundle.lebesgue(space2, 4)
    assert np.array_equal(fd.invariance_residual(leb, rot).values, [0.0, 0.0])
    # a point mass moves under rotation: residual 2 at mode 1, |i(w-1)| = 2
    pm = fd.StateBundle.point_masses(space2, [0.25, 0.0], 4)
    vals = fd.invariance_residual(pm, rot).values
    assert np.all(vals.real >= 0.1)


def test_invariance_routes_agree_matrix_only(space2):
    rng = np.random.default_rng(7)
    kraus = [[m / np.sqrt(2) for m in (np.eye(2), np.array([[0, 1], [1, 0]]))]
             for _ in range(2)]
    t = fd.MarkovBundle.from_kraus(space2, kraus)
    tr = fd.StateBundle.canonical_trace(space2, 2)
    r1, r2 = fd.invariance_residual_routes(tr, t)
    assert fd.ess_sup(r1) <= 1e-12
    assert fd.ess_sup(r2) <= 1e-12
    rot = fd.MarkovBundle.rotation(space2, [0.5, 0.25], 4)
    leb = fd.StateBundle.lebesgue(space2, 4)
    with pytest.raises(fd.KindMismatchError):
        fd.invariance_residual_routes(leb, rot)


def test_trig_state_tag_validation():
    with pytest.raises(ValueError, match="tag"):
        fd.TrigState(tag="nonsense", t0=None, weights=None, points=None)
