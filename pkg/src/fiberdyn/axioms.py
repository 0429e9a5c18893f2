"""Seeded structural property suites.

Each property draws its own inputs from a child of the given seed, measures
a worst-case residual, and compares it against the property's tolerance.
`run_all` returns the full list; `report_text` renders the deterministic
report the CLI prints (same seed, same bytes).

Residual conventions: exact-by-construction identities use tolerance 0.0
and must report exactly 0.0; sampled float identities use 1e-12 after
normalization; spectral/randomized bounds use their documented tolerances
(1e-10 for positivity-flavored checks, 1e-9 for contractivity and the
two-route invariance agreement).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dynamics import (
    DynamicalSystemBundle,
    build_rotation_system,
    cesaro_average,
    fixed_space_distance,
    uniform_ue_deviation,
    unique_ergodicity_deviation,
)
from .fibers import (
    FiberKind,
    MatrixFiberElement,
    TrigPolyFiberElement,
    conditional_expectation,
    c_star_identity_residual,
    fib_add,
    fib_adjoint,
    fib_mul,
    fib_norm,
    fib_scale,
    is_positive,
    tensor,
    trig_norm_error_bound,
)
from .markov import (
    MarkovBundle,
    invariance_residual_routes,
    markov_localize,
    markov_norm_estimate,
    matrix_unit_probes,
    state_localize,
)
from .measure import AtomicMeasureSpace, L0Element, ess_sup, o_limit_check, support_split
from .sections import (
    Section,
    VectorSection,
    apply_operator,
    d_decompose,
    inner_product,
    operator_adjoint,
    section_norm,
    unit_section,
)
from .states import (
    StateBundle,
    cauchy_schwarz_residual,
    positive_functional_suite,
    state_eval,
)

__all__ = ["PropertyResult", "run_all", "report_text", "PROPERTY_NAMES"]


@dataclass(frozen=True)
class PropertyResult:
    name: str
    residual: float
    tolerance: float
    passed: bool
    detail: str


def _result(name: str, residual: float, tolerance: float, detail: str) -> PropertyResult:
    return PropertyResult(name, float(residual), float(tolerance),
                          bool(residual <= tolerance), detail)


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1000, tag)))


def _int_lattice_l0(space: AtomicMeasureSpace, rng: np.random.Generator) -> L0Element:
    re = rng.integers(-8, 9, size=len(space)).astype(float)
    im = rng.integers(-8, 9, size=len(space)).astype(float)
    return L0Element(space, re + 1j * im)


def _rand_matrix(rng: np.random.Generator, d: int) -> MatrixFiberElement:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return MatrixFiberElement(g)

def _rand_matrix_section(rng: np.random.Generator, space: AtomicMeasureSpace, d: int) -> Section:
    return Section(space, FiberKind.matrix(d),
                   tuple(_rand_matrix(rng, d) for _ in range(len(space))))


def _rand_trig(rng: np.random.Generator, K: int) -> TrigPolyFiberElement:
    c = rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1)
    return TrigPolyFiberElement(c)


def _rand_density(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T + 1e-3 * np.eye(d)
    return rho / np.trace(rho).real


def _rand_unital_kraus(rng: np.random.Generator, d: int, m: int) -> list[np.ndarray]:
    ops = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(m)]
    s = sum(k @ k.conj().T for k in ops)
    ev, u = np.linalg.eigh(s)
    s_inv_half = u @ np.diag(1.0 / np.sqrt(ev)) @ u.conj().T
    return [s_inv_half @ k for k in ops]


# -- individual properties -----------------------------------------------------


def _p_scalar_star_laws(seed: int) -> PropertyResult:
    rng = _rng(seed, 1)
    space = AtomicMeasureSpace.uniform(6)
    worst = 0.0
    for _ in range(50):
        f, g, h = (_int_lattice_l0(space, rng) for _ in range(3))
        lhs = ((f * g).conj() - g.conj() * f.conj()).values
        dist = ((f + g) * h - (f * h + g * h)).values
        asc = ((f * g) * h - f * (g * h)).values
        worst = max(worst, float(np.max(np.abs(lhs))), float(np.max(np.abs(dist))),
                    float(np.max(np.abs(asc))))
    return _result(
        "scalar_star_laws_exact", worst, 0.0,
        "involution, distributivity, associativity on integer-lattice values",
    )


def _p_esssup_axioms(seed: int) -> PropertyResult:
    rng = _rng(seed, 2)
    space = AtomicMeasureSpace.uniform(9)
    worst = 0.0
    for _ in range(50):
        f = L0Element(space, rng.standard_normal(9) + 1j * rng.standard_normal(9))
        g = L0Element(space, rng.standard_normal(9) + 1j * rng.standard_normal(9))
        lam = complex(rng.standard_normal(), rng.standard_normal())
        scale = max(1.0, ess_sup(f), ess_sup(g))
        tri = (ess_sup(f + g) - (ess_sup(f) + ess_sup(g))) / scale
        hom = abs(ess_sup(f * lam) - abs(lam) * ess_sup(f)) / scale
        worst = max(worst, tri, hom)
        if ess_sup(f) == 0.0 and np.any(f.values != 0):
            worst = max(worst, 1.0)
    return _result("esssup_norm_axioms", max(worst, 0.0), 1e-12,
                   "triangle inequality and absolute homogeneity, normalized")


def _p_order_limit_window(seed: int) -> PropertyResult:
    rng = _rng(seed, 3)
    space = AtomicMeasureSpace.uniform(4)
    target = L0Element.zero(space)
    good = [L0Element(space, np.full(4, 0.5 ** k)) for k in range(1, 40)]
    stalled = list(good)
    stalled[-1] = L0Element(space, np.array([0.5 ** 39, 1.0, 0.5 ** 39, 0.5 ** 39]))
    bad_tail = list(good)
    bad_tail[-3] = L0Element(space, np.full(4, 1.0))
    perm = rng.permutation(4)
    permuted = [L0Element(space, f.values[perm]) for f in good]
    ok = (
        o_limit_check(good, target, 1e-6)
        and not o_limit_check(stalled, target, 1e-6)
        and not o_limit_check(bad_tail, target, 1e-6)
        and o_limit_check(permuted, target, 1e-6) == o_limit_check(good, target, 1e-6)
    )
    return _result("order_limit_tail_window", 0.0 if ok else 1.0, 0.0,
                   "accepts decay, rejects stalled tails, atom-permutation invariant")


def _p_support_partition(seed: int) -> PropertyResult:
    rng = _rng(seed, 4)
    space = AtomicMeasureSpace.uniform(12)
    worst = 0.0
    for _ in range(25):
        vals = rng.integers(0, 4, size=12).astype(float)
        e = L0Element(space, vals)
        e1, e2 = support_split(e)
        if not np.array_equal((e1 + e2).values, np.ones(12)):
            worst = 1.0
        if np.any((e1 * e2).values != 0.0):
            worst = 1.0
        if not np.array_equal((e * e1).values, e.values):
            worst = 1.0
    return _result("support_partition_exact", worst, 0.0,
                   "support indicators partition the unit and absorb the element")


def _p_matrix_cstar(seed: int) -> PropertyResult:
    rng = _rng(seed, 5)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 6))
        a = _rand_matrix(rng, d)
        worst = max(worst, c_star_identity_residual(a) / max(1.0, fib_norm(a) ** 2))
    return _result("matrix_cstar_identity", worst, 1e-10,
                   "| ||a||^2 - ||a* a|| | / max(1, ||a||^2) over random matrices")


def _p_trig_cstar(seed: int) -> PropertyResult:
    rng = _rng(seed, 6)
    worst_ratio = 0.0
    for _ in range(50):
        K = int(rng.integers(1, 9))
        a = _rand_trig(rng, K)
        resid = c_star_identity_residual(a)
        allowance = 2.0 * trig_norm_error_bound(2 * K) * fib_norm(a) ** 2
        worst_ratio = max(worst_ratio, resid / allowance)
    return _result("trig_cstar_identity_within_grid_bound", worst_ratio, 1.0,
                   "residual vs twice the documented sup-norm grid bound (ratio)")


def _p_submultiplicative(seed: int) -> PropertyResult:
    rng = _rng(seed, 7)
    worst = 0.0
    for _ in range(60):
        d = int(rng.integers(1, 6))
        a, b = _rand_matrix(rng, d), _rand_matrix(rng, d)
        excess = fib_norm(fib_mul(a, b)) / (fib_norm(a) * fib_norm(b)) - 1.0
        worst = max(worst, excess)
    for _ in range(40):
        K = int(rng.integers(1, 5))
        a, b = _rand_trig(rng, K), _rand_trig(rng, K)
        bound = trig_norm_error_bound(2 * K)
        grid_slack = 2.0 * bound / (1.0 - bound)
        excess = fib_norm(fib_mul(a, b, max_degree=2 * K)) / (
            fib_norm(a) * fib_norm(b)) - 1.0 - grid_slack
        worst = max(worst, excess)
    return _result("norm_submultiplicative", max(worst, 0.0), 1e-12,
                   "||ab|| <= ||a|| ||b|| (trig side slackened by the grid bound)")


def _p_expectation_projects(seed: int) -> PropertyResult:
    rng = _rng(seed, 8)
    worst = 0.0
    for _ in range(40):
        d = int(rng.integers(1, 5))
        a, b = _rand_matrix(rng, d), _rand_matrix(rng, d)
        e_ab = conditional_expectation(tensor(a, b))
        want = fib_scale(a, complex(np.trace(b.entries)) / d)
        worst = max(worst, fib_norm(fib_add(e_ab, fib_scale(want, -1.0))) /
                    max(1.0, fib_norm(want)))
        big = tensor(a, b)
        once = conditional_expectation(big)
        twice = conditional_expectation(tensor(once, MatrixFiberElement(np.eye(d))))
        worst = max(worst, fib_norm(fib_add(twice, fib_scale(once, -1.0))) /
                    max(1.0, fib_norm(once)))
        ident = tensor(MatrixFiberElement(np.eye(d)), MatrixFiberElement(np.eye(d)))
        worst = max(worst, fib_norm(fib_add(conditional_expectation(ident),
                                            MatrixFiberElement(-np.eye(d)))))
        h = _rand_matrix(rng, d * d)
        psd = MatrixFiberElement(h.entries @ h.entries.conj().T)
        if not is_positive(conditional_expectation(psd), tol=1e-9):
            worst = max(worst, 1.0)
    return _result("tensor_expectation_projects", worst, 1e-12,
                   "E(a (x) b) = (tr b / d) a, idempotence, unitality, positivity")


def _p_gram_psd(seed: int) -> PropertyResult:
    rng = _rng(seed, 9)
    worst = 0.0
    for _ in range(40):
        d = int(rng.integers(2, 5))
        m = int(rng.integers(2, 5))
        els = [_rand_matrix(rng, d) for _ in range(m)]
        lam = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        acc = np.zeros((d, d), dtype=np.complex128)
        for i in range(m):
            for j in range(m):
                acc += np.conj(lam[i]) * lam[j] * (
                    els[i].entries.conj().T @ els[j].entries)
        mineig = float(np.min(np.linalg.eigvalsh((acc + acc.conj().T) / 2)))
        scale = max(1.0, float(np.linalg.norm(acc, 2)))
        worst = max(worst, -mineig / scale)
    return _result("gram_combinations_psd", max(worst, 0.0), 1e-10,
                   "sum conj(l_i) l_j a_i* a_j stays positive semidefinite")


def _p_section_norm_cstar(seed: int) -> PropertyResult:
    rng = _rng(seed, 10)
    space = AtomicMeasureSpace.uniform(5)
    worst = 0.0
    for _ in range(30):
        d = int(rng.integers(1, 5))
        x = _rand_matrix_section(rng, space, d)
        n1 = section_norm(x).values.real
        n2 = section_norm(x.adjoint() * x).values.real
        worst = max(worst, float(np.max(np.abs(n1 * n1 - n2))) /
                    max(1.0, float(np.max(n1 * n1))))
    return _result("section_norm_cstar", worst, 1e-10,
                   "per-atom ||x||^2 == ||x* x|| at the section level")


def _p_disjoint_decomposition(seed: int) -> PropertyResult:
    rng = _rng(seed, 11)
    space = AtomicMeasureSpace.uniform(10)
    worst = 0.0
    for _ in range(25):
        d = 3
        elems = [_rand_matrix(rng, d) for _ in range(10)]
        for i in range(10):
            if rng.integers(0, 3) == 0:
                elems[i] = MatrixFiberElement.zero(d)
        x = Section(space, FiberKind.matrix(d), tuple(elems))
        nrm = section_norm(x)
        mask = rng.integers(0, 2, size=10).astype(float)
        e1 = L0Element(space, nrm.values * mask)
        e2 = L0Element(space, nrm.values * (1.0 - mask))
        x1, x2 = d_decompose(x, e1, e2)
        if not (x1 + x2).equal(x):
            worst = 1.0
        if not np.array_equal(section_norm(x1).values, e1.values):
            worst = 1.0
        on_other_support = section_norm(x1).values.real * (e2.values.real > 0)
        if np.any(on_other_support != 0.0):
            worst = 1.0
    return _result("disjoint_support_decomposition", worst, 0.0,
                   "norm split recombines bitwise; each part vanishes off-support")


def _p_adjoint_pairing(seed: int) -> PropertyResult:
    rng = _rng(seed, 12)
    space = AtomicMeasureSpace.uniform(4)
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 5))
        t = _rand_matrix_section(rng, space, d)
        ts = operator_adjoint(t, rng=rng)
        xv = VectorSection(space, d, tuple(
            rng.standard_normal(d) + 1j * rng.standard_normal(d) for _ in range(4)))
        yv = VectorSection(space, d, tuple(
            rng.standard_normal(d) + 1j * rng.standard_normal(d) for _ in range(4)))
        lhs = inner_product(apply_operator(t, xv), yv)
        rhs = inner_product(xv, apply_operator(ts, yv))
        scale = max(1.0, float(np.max(np.abs(lhs.values))))
        worst = max(worst, float(np.max(np.abs(lhs.values - rhs.values))) / scale)
    return _result("vector_adjoint_pairing", worst, 1e-10,
                   "<T x, y> == <x, T* y> for the conjugate-transpose section")


def _p_cauchy_schwarz(seed: int) -> PropertyResult:
    rng = _rng(seed, 13)
    space = AtomicMeasureSpace.uniform(6)
    worst = 0.0
    for _ in range(60):
        d = 3
        phi = StateBundle.from_densities(space, [_rand_density(rng, d) for _ in range(6)])
        a = _rand_matrix_section(rng, space, d)
        b = _rand_matrix_section(rng, space, d)
        scale = max(1.0, float(np.max(np.abs(state_eval(phi, a.adjoint() * a).values))) ** 2)
        worst = max(worst, ess_sup(cauchy_schwarz_residual(phi, a, b)) / scale)
        equal_case = cauchy_schwarz_residual(phi, a, a)
        if np.any(equal_case.values != 0.0):
            worst = max(worst, 1.0)
    return _result("cauchy_schwarz_clamped", worst, 1e-12,
                   "clamped |phi(a* b)|^2 - phi(a* a) phi(b* b); exactly 0 at a == b")


def _p_functional_suite(seed: int) -> PropertyResult:
    rng = _rng(seed, 14)
    space = AtomicMeasureSpace.uniform(5)
    d = 3
    phi = StateBundle.from_densities(space, [_rand_density(rng, d) for _ in range(5)])
    psi = StateBundle.from_densities(space, [_rand_density(rng, d) for _ in range(5)])
    w = rng.uniform(0.2, 0.8, size=5)
    alpha = L0Element(space, w)
    beta = L0Element(space, 1.0 - w)
    rep = positive_functional_suite(phi, psi, alpha, beta, seed=seed, trials=60)
    resid = rep.max_residual
    if rep.combination_is_state is not True:
        resid = max(resid, 1.0)
    return _result("functional_chain_and_additivity", resid, 1e-10,
                   "two-sided chain, ||f|| == f(e), positive-cone norm additivity")


def _p_states_unital_positive(seed: int) -> PropertyResult:
    rng = _rng(seed, 15)
    space = AtomicMeasureSpace.uniform(5)
    worst = 0.0
    d = 3
    phi = StateBundle.from_densities(space, [_rand_density(rng, d) for _ in range(5)])
    unit_m = unit_section(space, FiberKind.matrix(d))
    worst = max(worst, ess_sup(state_eval(phi, unit_m) - 1.0))
    for _ in range(30):
        a = _rand_matrix_section(rng, space, d)
        vals = state_eval(phi, a.adjoint() * a).values
        worst = max(worst, float(np.max(np.abs(vals.imag))) / max(1.0, float(np.max(np.abs(vals)))))
        worst = max(worst, float(np.max(-vals.real)) / max(1.0, float(np.max(np.abs(vals)))))
    K = 6
    leb = StateBundle.lebesgue(space, 2 * K)
    unit_t = unit_section(space, FiberKind.trigpoly(2 * K))
    worst = max(worst, ess_sup(state_eval(leb, unit_t) - 1.0))
    for _ in range(20):
        # natural degree K, so x* x fits the declared budget 2K
        x = Section(space, FiberKind.trigpoly(2 * K),
                    tuple(_rand_trig(rng, K) for _ in range(5)))
        vals = state_eval(leb, x.adjoint() * x).values
        worst = max(worst, float(np.max(-vals.real)) / max(1.0, float(np.max(np.abs(vals)))))
    return _result("states_unital_positive", max(worst, 0.0), 1e-12,
                   "phi(e) = 1 and phi(x* x) >= 0 for matrix and circle states")


def _p_state_localization(seed: int) -> PropertyResult:
    rng = _rng(seed, 16)
    worst = 0.0
    for _ in range(5):
        n = int(rng.integers(2, 7))
        d = int(rng.integers(2, 5))
        space = AtomicMeasureSpace.uniform(n)
        phi = StateBundle.from_densities(space, [_rand_density(rng, d) for _ in range(n)])
        probes = matrix_unit_probes(space, d)
        rec = state_localize(lambda s: state_eval(phi, s), probes)
        worst = max(worst, max(
            float(np.max(np.abs(a - b))) for a, b in zip(rec.densities, phi.densities)))
    return _result("state_localization_round_trip", worst, 1e-12,
                   "densities recovered entrywise from matrix-unit probe values")


def _p_markov_localization(seed: int) -> PropertyResult:
    rng = _rng(seed, 17)
    worst = 0.0
    for _ in range(4):
        n = int(rng.integers(2, 5))
        d = int(rng.integers(2, 4))
        space = AtomicMeasureSpace.uniform(n)
        t = MarkovBundle.from_kraus(
            space, [_rand_unital_kraus(rng, d, 3) for _ in range(n)])
        rec = markov_localize(lambda s: t.apply(s), space, d, check_samples=50)
        worst = max(worst, max(
            float(np.max(np.abs(a.superoperator() - b.superoperator())))
            for a, b in zip(rec.maps, t.maps)))
    return _result("markov_localization_round_trip", worst, 1e-12,
                   "superoperators recovered from matrix-unit probe images")


def _p_certified_contractivity(seed: int) -> PropertyResult:
    rng = _rng(seed, 18)
    worst = 0.0
    for _ in range(3):
        n = int(rng.integers(2, 5))
        d = int(rng.integers(2, 4))
        space = AtomicMeasureSpace.uniform(n)
        t = MarkovBundle.from_kraus(
            space, [_rand_unital_kraus(rng, d, 2) for _ in range(n)])
        est = markov_norm_estimate(t, samples=48, seed=seed)
        worst = max(worst, float(np.max(est.sampled.values.real)) - 1.0)
    return _result("certified_maps_contract", max(worst, 0.0), 1e-9,
                   "sampled sup ||T x|| / ||x|| stays within 1 for certified bundles")


def _p_invariance_routes(seed: int) -> PropertyResult:
    rng = _rng(seed, 19)
    worst = 0.0
    for _ in range(5):
        n = int(rng.integers(2, 6))
        d = int(rng.integers(2, 4))
        space = AtomicMeasureSpace.uniform(n)
        t = MarkovBundle.from_kraus(
            space, [_rand_unital_kraus(rng, d, 2) for _ in range(n)])
        phi = StateBundle.from_densities(space, [_rand_density(rng, d) for _ in range(n)])
        probe, dual = invariance_residual_routes(phi, t)
        worst = max(worst, float(np.max(np.abs(probe.values - dual.values))))
    return _result("invariance_route_agreement", worst, 1e-9,
                   "probe-matrix trace norm vs transported-density trace norm")


def _p_cesaro_additive(seed: int) -> PropertyResult:
    rng = _rng(seed, 20)
    space = AtomicMeasureSpace.uniform(3)
    sysr = build_rotation_system(space, [0.381966011250105, 0.7548776662466927, 0.1], 8)
    worst = 0.0
    for _ in range(10):
        x = Section(space, FiberKind.trigpoly(8),
                    tuple(_rand_trig(rng, 8) for _ in range(3)))
        y = Section(space, FiberKind.trigpoly(8),
                    tuple(_rand_trig(rng, 8) for _ in range(3)))
        n = int(rng.integers(2, 40))
        joint = cesaro_average(sysr.markov, x + y, n)
        split = cesaro_average(sysr.markov, x, n) + cesaro_average(sysr.markov, y, n)
        scale = max(1.0, ess_sup(section_norm(joint)))
        worst = max(worst, ess_sup(section_norm(joint - split)) / scale)
    return _result("cesaro_additive", worst, 1e-12,
                   "averaging commutes with section addition (same float path scale)")


def _p_blockwise_fixed(seed: int) -> PropertyResult:
    rng = _rng(seed, 21)
    space = AtomicMeasureSpace.uniform(2)
    d = 4
    proj = [np.diag([1.0, 1.0, 0.0, 0.0]), np.diag([0.0, 0.0, 1.0, 1.0])]
    t = MarkovBundle.from_kraus(space, [proj, proj])
    blocks = np.zeros((d, d), dtype=np.complex128)
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    blocks[:2, :2] = g
    blocks[2:, 2:] = g.conj().T
    fixed = Section(space, FiberKind.matrix(d),
                    (MatrixFiberElement(blocks), MatrixFiberElement(blocks)))
    off = np.zeros((d, d), dtype=np.complex128)
    off[0, 2] = 1.0
    unfixed = Section(space, FiberKind.matrix(d),
                      (MatrixFiberElement(off), MatrixFiberElement(off)))
    worst = 0.0
    if not t.apply(fixed).equal(fixed):
        worst = 1.0
    d_fixed = fixed_space_distance(t, fixed)
    d_unfixed = fixed_space_distance(t, unfixed)
    worst = max(worst, float(np.max(d_fixed.values.real)))
    worst = max(worst, float(np.max(np.abs(d_unfixed.values.real - 1.0))))
    mixed = Section(space, FiberKind.matrix(d),
                    (MatrixFiberElement(blocks), MatrixFiberElement(off)))
    d_mixed = fixed_space_distance(t, mixed).values.real
    if not (d_mixed[0] <= 1e-10 < d_mixed[1]):
        worst = max(worst, 1.0)
    return _result("blockwise_fixed_sections", worst, 1e-10,
                   "pinching fixes exactly the block sections, atom by atom")


def _p_uniform_deviation(seed: int) -> PropertyResult:
    rng = _rng(seed, 22)
    space = AtomicMeasureSpace.uniform(4)
    sysr = build_rotation_system(
        space, [float(a) for a in rng.uniform(0.05, 0.95, size=4)], 6)
    worst = 0.0
    for _ in range(8):
        x = Section(space, FiberKind.trigpoly(6),
                    tuple(_rand_trig(rng, 6) for _ in range(4)))
        n = int(rng.integers(1, 60))
        sup = uniform_ue_deviation(sysr, x, n)
        per_atom = unique_ergodicity_deviation(sysr, x, n)
        worst = max(worst, abs(sup - float(np.max(per_atom.values.real))))
    return _result("uniform_deviation_equals_worst_atom", worst, 1e-12,
                   "global L^inf deviation equals the max over atoms")


_PROPERTIES: tuple[Callable[[int], PropertyResult], ...] = (
    _p_scalar_star_laws,
    _p_esssup_axioms,
    _p_order_limit_window,
    _p_support_partition,
    _p_matrix_cstar,
    _p_trig_cstar,
    _p_submultiplicative,
    _p_expectation_projects,
    _p_gram_psd,
    _p_section_norm_cstar,
    _p_disjoint_decomposition,
    _p_adjoint_pairing,
    _p_cauchy_schwarz,
    _p_functional_suite,
    _p_states_unital_positive,
    _p_state_localization,
    _p_markov_localization,
    _p_certified_contractivity,
    _p_invariance_routes,
    _p_cesaro_additive,
    _p_blockwise_fixed,
    _p_uniform_deviation,
)

PROPERTY_NAMES = (
    "scalar_star_laws_exact",
    "esssup_norm_axioms",
    "order_limit_tail_window",
    "support_partition_exact",
    "matrix_cstar_identity",
    "trig_cstar_identity_within_grid_bound",
    "norm_submultiplicative",
    "tensor_expectation_projects",
    "gram_combinations_psd",
    "section_norm_cstar",
    "disjoint_support_decomposition",
    "vector_adjoint_pairing",
    "cauchy_schwarz_clamped",
    "functional_chain_and_additivity",
    "states_unital_positive",
    "state_localization_round_trip",
    "markov_localization_round_trip",
    "certified_maps_contract",
    "invariance_route_agreement",
    "cesaro_additive",
    "blockwise_fixed_sections",
    "uniform_deviation_equals_worst_atom",
)


def run_all(seed: int = 0) -> tuple[PropertyResult, ...]:
    """Run every property suite with children of ``seed``; deterministic."""
    return tuple(p(seed) for p in _PROPERTIES)


def report_text(results, header: dict) -> str:
    """Render the deterministic check-axioms report."""
    lines = [f"# {k} = {header[k]}" for k in sorted(header)]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(
            f"{status} {r.name}: residual={r.residual!r} tolerance={r.tolerance!r}"
            f" ({r.detail})"
        )
    n_fail = sum(1 for r in results if not r.passed)
    lines.append(f"# properties = {len(results)}, failures = {n_fail}")
    return "\n".join(lines) + "\n"
