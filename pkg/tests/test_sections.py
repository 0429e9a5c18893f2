"""Sections: bundle arithmetic, norms, decomposition, vector pairing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fiberdyn as fd
from support import l0, rand_matrix, rand_matrix_section, rand_trig_section


def test_section_arithmetic_and_norm(space2):
    x = fd.matrix_unit_section(space2, 2, 0, 1)
    y = fd.matrix_unit_section(space2, 2, 1, 0)
    s = x + y
    assert np.array_equal(fd.section_norm(s).values, [1.0, 1.0])
    assert np.array_equal(fd.section_norm(x - x).values, [0.0, 0.0])
    prod = s * s  # (E01+E10)^2 = I
    assert fd.fib_equal(prod.elems[0], fd.MatrixFiberElement(np.eye(2, dtype=complex)))


def test_section_mismatch_guards(space2, space3):
    x = fd.matrix_unit_section(space2, 2, 0, 0)
    with pytest.raises(fd.SpaceMismatchError):
        x + fd.matrix_unit_section(space3, 2, 0, 0)
    with pytest.raises(fd.KindMismatchError):
        x + fd.matrix_unit_section(space2, 3, 0, 0)
    with pytest.raises(fd.KindMismatchError):
        x + fd.unit_section(space2, fd.FiberKind.trigpoly(1))
    with pytest.raises(ValueError):
        fd.Section(space2, fd.FiberKind.matrix(2), (fd.MatrixFiberElement(np.eye(2)),))


def test_scale_by_l0_acts_per_atom(space2):
    x = fd.unit_section(space2, fd.FiberKind.matrix(2))
    lam = l0(space2, [2.0, -1j])
    y = x.scale(lam)
    assert y.elems[0].entries[0, 0] == 2.0
    assert y.elems[1].entries[1, 1] == -1j
    assert np.array_equal(fd.section_norm(y).values, [2.0, 1.0])


def test_adjoint_distributes_over_atoms(space3):
    rng = np.random.default_rng(0)
    x = rand_matrix_section(rng, space3, 3)
    adj = x.adjoint()
    for i in range(3):
        assert np.array_equal(adj.elems[i].entries, x.elems[i].entries.conj().T)


def test_section_norm_cstar_identity(space3):
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = rand_matrix_section(rng, space3, 4)
        lhs = fd.section_norm(x.adjoint() * x)
        rhs = fd.section_norm(x) * fd.section_norm(x)
        assert fd.ess_sup(lhs - rhs) <= 1e-10


# ------------------------------------------------------- decomposition

def _disjoint_split(space, nrm, mask_bits):
    mask = l0(space, [1.0 if b else 0.0 for b in mask_bits])
    comask = l0(space, [0.0 if b else 1.0 for b in mask_bits])
    return nrm * mask, nrm * comask


def test_d_decompose_roundtrip(space3):
    rng = np.random.default_rng(2)
    x = rand_matrix_section(rng, space3, 3)
    nrm = fd.section_norm(x)
    e1, e2 = _disjoint_split(space3, nrm, [True, False, True])
    x1, x2 = fd.d_decompose(x, e1, e2)
    assert np.array_equal(fd.section_norm(x1).values, e1.values)
    assert np.array_equal(fd.section_norm(x2).values, e2.values)
    back = x1 + x2
    for i in range(3):
        assert np.array_equal(back.elems[i].entries, x.elems[i].entries)


def test_d_decompose_preconditions(space2):
    rng = np.random.default_rng(3)
    x = rand_matrix_section(rng, space2, 2)
    nrm = fd.section_norm(x)
    with pytest.raises(ValueError, match="disjoint"):
        fd.d_decompose(x, nrm, nrm)
    with pytest.raises(ValueError, match="equal the section norm"):
        fd.d_decompose(x, nrm * l0(space2, [1.0, 0.0]) * 0.5,
                       nrm * l0(space2, [0.0, 1.0]))
    with pytest.raises(ValueError, match="real"):
        fd.d_decompose(x, nrm * l0(space2, [1j, 0.0]), nrm * l0(space2, [0.0, 1.0]))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.booleans(), min_size=4, max_size=4), st.integers(0, 2**32 - 1))
def test_d_decompose_exact_for_any_mask(mask_bits, seed):
    sp = fd.AtomicMeasureSpace.uniform(4)
    rng = np.random.default_rng(seed)
    x = rand_matrix_section(rng, sp, 2)
    e1, e2 = _disjoint_split(sp, fd.section_norm(x), mask_bits)
    x1, x2 = fd.d_decompose(x, e1, e2)
    assert np.array_equal(fd.section_norm(x1).values, e1.values)
    assert np.array_equal(fd.section_norm(x2).values, e2.values)


def test_bo_limit_check(space2):
    kind = fd.FiberKind.matrix(2)
    target = fd.unit_section(space2, kind)
    seq = [target.scale(1.0 + 2.0 ** (-n)) for n in range(1, 6)]
    assert fd.bo_limit_check(seq, target, tol=0.1)
    assert not fd.bo_limit_check(seq, target, tol=0.01)
    with pytest.raises(ValueError):
        fd.bo_limit_check([], target)


# ------------------------------------------------------- vector sections

def test_vector_pairing_linear_in_first_argument(space2):
    v = fd.VectorSection(space2, 2, (np.array([1.0, 0.0]), np.array([0.0, 1j])))
    w = fd.VectorSection(space2, 2, (np.array([0.0, 1.0]), np.array([0.0, 2.0])))
    ip = fd.inner_product(v, w)
    assert np.array_equal(ip.values, [0.0, 2j])
    # conjugate symmetry
    assert np.array_equal(fd.inner_product(w, v).values, ip.conj().values)
    assert np.array_equal(fd.vector_norm(v).values, [1.0, 1.0])


def test_vector_guards(space2):
    with pytest.raises(ValueError):
        fd.VectorSection(space2, 2, (np.array([1.0, 0.0]),))
    with pytest.raises(ValueError):
        fd.VectorSection(space2, 2, (np.array([1.0]), np.array([0.0, 1.0])))
    v = fd.VectorSection(space2, 2, (np.array([1.0, 0.0]), np.array([0.0, 1.0])))
    w3 = fd.VectorSection(space2, 3, (np.zeros(3), np.zeros(3)))
    with pytest.raises(fd.KindMismatchError):
        fd.inner_product(v, w3)
    trig = fd.unit_section(space2, fd.FiberKind.trigpoly(1))
    with pytest.raises(fd.KindMismatchError):
        fd.apply_operator(trig, v)


def test_operator_adjoint_matches_conjugate_transpose(space3):
    rng = np.random.default_rng(7)
    t = rand_matrix_section(rng, space3, 3)
    adj = fd.operator_adjoint(t, rng=rng)
    for i in range(3):
        assert np.allclose(adj.elems[i].entries, t.elems[i].entries.conj().T,
                           atol=1e-12)


def test_apply_operator_pairing_identity(space3):
    # <T x, y> == <x, T* y> at every atom, for random data
    rng = np.random.default_rng(8)
    t = rand_matrix_section(rng, space3, 3)
    adj = fd.operator_adjoint(t, rng=rng)
    for _ in range(10):
        x = fd.VectorSection(space3, 3, tuple(
            rng.standard_normal(3) + 1j * rng.standard_normal(3) for _ in range(3)))
        y = fd.VectorSection(space3, 3, tuple(
            rng.standard_normal(3) + 1j * rng.standard_normal(3) for _ in range(3)))
        lhs = fd.inner_product(fd.apply_operator(t, x), y)
        rhs = fd.inner_product(x, fd.apply_operator(adj, y))
        assert fd.ess_sup(lhs - rhs) <= 1e-10


def test_builders(space2):
    z = fd.zero_section(space2, fd.FiberKind.matrix(2))
    assert np.array_equal(fd.section_norm(z).values, [0.0, 0.0])
    c = fd.constant_section(space2, fd.FiberKind.trigpoly(3),
                            fd.TrigPolyFiberElement.mode(2))
    assert all(e.coeff(2) == 1.0 for e in c.elems)
    e01 = fd.matrix_unit_section(space2, 2, 0, 1)
    assert e01.elems[1].entries[0, 1] == 1.0
    assert e01.elems[1].entries.sum() == 1.0
