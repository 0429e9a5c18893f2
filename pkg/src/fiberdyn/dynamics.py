"""Cesaro averaging, ergodicity deviation metrics, fixed points, and the
two worked systems.

The central objects are `DynamicalSystemBundle` (a state bundle paired with
a Markov bundle that preserves it, checked at construction) and the
deviation metrics:

* `ergodicity_deviation`: correlation decay
  ``|(1/n) sum_k phi(y T^k x) - phi(y) phi(x)|`` per atom;
* `unique_ergodicity_deviation`: Cesaro convergence
  ``||(1/n) sum_k T^k x - phi(x) e||`` per atom;
* `uniform_ue_deviation`: the worst atom, checked against the global
  essential-sup formulation (they coincide over an atomic space).

Two system constructors are provided.  `build_dilation_channel_system`
pairs the normalized trace on M_2 with the channel obtained by compressing
a two-site Hermitian interaction: V = sqrt(2/(1+cosh(2 beta))) exp(beta H)
with H the 4x4 swap-block generator, T(x) = E(V (e (x) x) V*).  The channel
is assembled directly in Kraus form (a reshape of V), which makes its
positivity structural, and its unitality is numerically identical to the
compression identity E(V V*) = e checked per atom.
`build_rotation_system` pairs normalized integration over the circle with
the rotation by alpha acting on trigonometric polynomials.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ConstructionError, KindMismatchError
from .fibers import (
    FiberElement,
    FiberKind,
    MatrixFiberElement,
    TrigPolyFiberElement,
    conditional_expectation,
    fib_norm,
    matrix_exp,
    tensor,
)
from .measure import AtomicMeasureSpace, L0Element, ess_sup
from .markov import (
    CoefficientMultiplierMap,
    KrausMap,
    MapBundle,
    MarkovBundle,
    RotationMap,
    SuperoperatorMap,
    invariance_residual,
    unvec,
)
from .sections import Section, section_norm, unit_section
from .states import StateBundle, state_eval

__all__ = [
    "DynamicalSystemBundle",
    "cesaro_average",
    "ergodicity_deviation",
    "unique_ergodicity_deviation",
    "uniform_ue_deviation",
    "fixed_point_space",
    "fixed_point_dims",
    "fixed_space_distance",
    "is_uniquely_ergodic",
    "spectral_gap",
    "deviation_prediction",
    "dilation_hamiltonian",
    "dilation_operator",
    "dilation_kraus",
    "dilation_side_condition_residual",
    "build_dilation_channel_system",
    "build_rotation_system",
    "rotation_mode_average",
    "rotation_mode_deviation_bound",
    "ConvergenceReport",
    "run_convergence_sweep",
    "DEFAULT_N_GRID",
]

DEFAULT_N_GRID = (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000)


@dataclass(frozen=True, eq=False)
class DynamicalSystemBundle:
    """A state bundle and a Markov bundle with the invariance phi o T = phi.

    The invariance residual is computed at construction; any atom exceeding
    ``invariance_tol`` raises `ConstructionError`.
    """

    label: str
    state: StateBundle
    markov: MarkovBundle
    invariance_tol: float = 1e-10
    residual: L0Element = field(init=False)

    def __post_init__(self) -> None:
        res = invariance_residual(self.state, self.markov)
        for (atom_id, _), r in zip(self.state.space.atoms, res.values):
            if abs(r) > self.invariance_tol:
                raise ConstructionError(
                    f"atom {atom_id!r}: state not invariant under the map "
                    f"(residual {abs(r):.3e} > {self.invariance_tol:.0e})"
                )
        object.__setattr__(self, "residual", res)

    @property
    def space(self) -> AtomicMeasureSpace:
        return self.state.space

    @property
    def kind(self) -> FiberKind:
        return self.state.kind


def cesaro_average(t: MapBundle, x: Section, n: int) -> Section:
    """(1/n) sum_{k=0}^{n-1} T^k x by iterated application and running sum."""
    if n < 1:
        raise ValueError("n must be >= 1")
    y = x
    acc = x
    for _ in range(n - 1):
        y = t.apply(y)
        acc = acc + y
    return acc.scale(1.0 / n)


def ergodicity_deviation(
    sys: DynamicalSystemBundle, x: Section, y: Section, n: int
) -> L0Element:
    """Per-atom |(1/n) sum_{k<n} phi(y T^k x) - phi(y) phi(x)|.

    The mean is taken over the per-term differences, so a system that fixes
    x termwise (e.g. x = unit section under a rotation) reports exactly 0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    phi = sys.state
    base = state_eval(phi, y) * state_eval(phi, x)
    z = x
    acc = state_eval(phi, y * z) - base
    for _ in range(n - 1):
        z = sys.markov.apply(z)
        acc = acc + (state_eval(phi, y * z) - base)
    return abs(acc * (1.0 / n))


def unique_ergodicity_deviation(
    sys: DynamicalSystemBundle, x: Section, n: int
) -> L0Element:
    """Per-atom ||(1/n) sum_{k<n} T^k x - phi(x) e||."""
    avg = cesaro_average(sys.markov, x, n)
    target = unit_section(sys.space, sys.kind).scale(state_eval(sys.state, x))
    return section_norm(avg - target)


def uniform_ue_deviation(sys: DynamicalSystemBundle, x: Section, n: int) -> float:
    """Worst-atom Cesaro deviation; equals the global L^inf deviation.

    Asserts the inequality "sup over atoms <= essential sup of the global
    deviation" with slack 1e-12 (they are the same number over an atomic
    space; the two code paths are kept separate on purpose).
    """
    dev = unique_ergodicity_deviation(sys, x, n)
    sup_atoms = float(np.max(dev.values.real))
    linf = ess_sup(dev)
    if sup_atoms > linf + 1e-12:
        raise ArithmeticError(
            f"per-atom sup {sup_atoms!r} exceeds global L^inf deviation {linf!r}"
        )
    return sup_atoms


# -- fixed points --------------------------------------------------------------


def _matrix_fixed_basis(m: np.ndarray, d: int, tol: float) -> tuple[MatrixFiberElement, ...]:
    _, s, vh = np.linalg.svd(m - np.eye(d * d))
    basis = [MatrixFiberElement(unvec(vh[i].conj(), d)) for i in range(len(s)) if s[i] <= tol]
    return tuple(basis)


def fixed_point_space(
    t: MapBundle, tol: float = 1e-10
) -> tuple[tuple[FiberElement, ...], ...]:
    """Per-atom orthonormal basis of the eigenspace of T at eigenvalue 1.

    Matrix kind: null space of (M - id) via SVD with singular-value
    threshold ``tol`` (basis orthonormal in the Hilbert-Schmidt inner
    product).  Structured trig maps: the modes whose multiplier is within
    ``tol`` of 1 (orthonormal for the L^2 inner product on the circle); for
    an irrational rotation that is exactly the constants.
    """
    out = []
    for m in t.maps:
        if isinstance(m, (SuperoperatorMap, KrausMap)):
            out.append(_matrix_fixed_basis(m.superoperator(), m.dim, tol))
        else:
            K = t.kind.max_degree
            modes = []
            for k in range(-K, K + 1):  # type: ignore[arg-type, operator]
                if abs(m.mode_multiplier(k) - 1.0) <= tol:
                    modes.append(TrigPolyFiberElement.mode(k))
            out.append(tuple(modes))
    return tuple(out)


def fixed_point_dims(t: MapBundle, tol: float = 1e-10) -> tuple[int, ...]:
    return tuple(len(b) for b in fixed_point_space(t, tol))


def is_uniquely_ergodic(t: MapBundle, tol: float = 1e-10) -> tuple[bool, ...]:
    """Per-atom flag: the fixed space is one-dimensional (the constants)."""
    return tuple(d == 1 for d in fixed_point_dims(t, tol))


def fixed_space_distance(t: MapBundle, x: Section, tol: float = 1e-10) -> L0Element:
    """Per-atom distance from x to the fixed space of T.

    Matrix kind: Hilbert-Schmidt distance to the span of the fixed basis.
    Trig kind: L^2 mass of the non-fixed modes.  A section is a global
    fixed point exactly when this vanishes at every atom.
    """
    vals = np.zeros(len(t.space))
    if t.kind.is_matrix:
        bases = fixed_point_space(t, tol)
        for w, (basis, el) in enumerate(zip(bases, x.elems)):
            v = el.entries.reshape(-1)  # type: ignore[union-attr]
            resid = v.copy()
            for b in basis:
                bv = b.entries.reshape(-1)  # type: ignore[union-attr]
                resid = resid - np.vdot(bv, v) * bv
            vals[w] = np.linalg.norm(resid)
    else:
        K = t.kind.max_degree
        for w, (m, el) in enumerate(zip(t.maps, x.elems)):
            padded = el.padded(K)  # type: ignore[union-attr, arg-type]
            mass = 0.0
            for k in range(-K, K + 1):  # type: ignore[arg-type, operator]
                if abs(m.mode_multiplier(k) - 1.0) > tol:
                    mass += abs(padded.coeff(k)) ** 2
            vals[w] = np.sqrt(mass)
    return L0Element(t.space, vals)


def spectral_gap(t: MapBundle) -> np.ndarray:
    """Per-atom 1 - |second eigenvalue| of the superoperator (matrix kind).

    One eigenvalue nearest 1 is removed (the fixed direction); the gap is 1
    minus the largest remaining modulus.  Can be <= 0 for maps with
    peripheral spectrum.
    """
    if not t.kind.is_matrix:
        raise KindMismatchError("spectral gap via eigenvalues is matrix-kind only")
    gaps = np.zeros(len(t.space))
    for i, m in enumerate(t.maps):
        ev = np.linalg.eigvals(m.superoperator())  # type: ignore[union-attr]
        idx = int(np.argmin(np.abs(ev - 1.0)))
        rest = np.delete(ev, idx)
        gaps[i] = 1.0 if rest.size == 0 else 1.0 - float(np.max(np.abs(rest)))
    return gaps


def deviation_prediction(sys: DynamicalSystemBundle, x: Section, n: int) -> L0Element:
    """Gap-based Cesaro deviation estimate: 2 ||x - phi(x) e|| / (n * gap).

    A geometric-decay bound shape, not a theorem: the measured spectral gap
    controls (1/n) sum_k (1-gap)^k <= 1/(n*gap), and the leading factor 2
    absorbs mild non-normality.  Used to calibrate "is the decay as fast as
    the gap says it should be" checks.
    """
    gaps = spectral_gap(sys.markov)
    target = unit_section(sys.space, sys.kind).scale(state_eval(sys.state, x))
    x0 = section_norm(x - target).values.real
    with np.errstate(divide="ignore"):
        vals = np.where(gaps > 1e-12, 2.0 * x0 / (n * gaps), np.inf)
    return L0Element(sys.space, vals)


# -- the dilation channel ------------------------------------------------------


def dilation_hamiltonian() -> MatrixFiberElement:
    """The 4x4 two-site generator: ones where the middle basis vectors swap."""
    h = np.zeros((4, 4))
    h[1, 2] = h[2, 1] = 1.0
    return MatrixFiberElement(h)


def dilation_operator(beta: float) -> MatrixFiberElement:
    """V = sqrt(2 / (1 + cosh(2 beta))) * exp(beta H) on the doubled space."""
    w = matrix_exp(dilation_hamiltonian(), float(beta))
    c = np.sqrt(2.0 / (1.0 + np.cosh(2.0 * float(beta))))
    return MatrixFiberElement(c * w.entries)


def dilation_side_condition_residual(beta: float) -> float:
    """||E(V V*) - e||, the compression identity that makes the channel
    unital."""
    v = dilation_operator(beta)
    vv = MatrixFiberElement(v.entries @ v.entries.conj().T)
    return fib_norm(
        MatrixFiberElement(conditional_expectation(vv).entries - np.eye(2))
    )


def dilation_kraus(beta: float) -> list[np.ndarray]:
    """Kraus operators of x -> E(V (e (x) x) V*).

    Unrolling the compression gives four 2x2 operators
    ``K^{(k,a)}[i, b] = V[(i,k), (a,b)] / sqrt(2)``; their completeness sum
    ``sum K K*`` equals ``E(V V*)``, so unitality of the channel IS the side
    condition.
    """
    v = dilation_operator(beta).entries.reshape(2, 2, 2, 2)  # [(i,k),(a,b)]
    return [v[:, k, a, :] / np.sqrt(2.0) for k in range(2) for a in range(2)]


def build_dilation_channel_system(
    space: AtomicMeasureSpace,
    betas: Union[L0Element, Sequence[float], float],
    *,
    side_tol: float = 1e-10,
    invariance_tol: float = 1e-10,
) -> DynamicalSystemBundle:
    """The normalized trace on M_2 paired with the dilation channel, one
    inverse temperature per atom.

    Raises `ConstructionError` naming the atom and residual if the side
    condition E(V V*) = e fails there (it cannot, up to roundoff, for finite
    beta, but the check is what certifies the construction).
    """
    if isinstance(betas, L0Element):
        if not betas.is_real:
            raise ValueError("betas must be real")
        arr = betas.values.real
    else:
        arr = np.broadcast_to(np.asarray(betas, dtype=float), (len(space),))
    if arr.shape != (len(space),):
        raise ValueError("need one beta per atom")
    ops_per_atom = []
    for (atom_id, _), b in zip(space.atoms, arr):
        resid = dilation_side_condition_residual(float(b))
        if resid > side_tol:
            raise ConstructionError(
                f"atom {atom_id!r}: side condition E(V V*) = e fails "
                f"(residual {resid:.3e} > {side_tol:.0e})"
            )
        ops_per_atom.append(dilation_kraus(float(b)))
    markov = MarkovBundle.from_kraus(space, ops_per_atom)
    state = StateBundle.canonical_trace(space, 2)
    return DynamicalSystemBundle(
        label="dilation_channel", state=state, markov=markov,
        invariance_tol=invariance_tol,
    )


# -- the circle rotation -------------------------------------------------------


def build_rotation_system(
    space: AtomicMeasureSpace,
    alphas: Union[L0Element, Sequence[float], float],
    degree_budget: int,
    *,
    invariance_tol: float = 1e-10,
) -> DynamicalSystemBundle:
    """Normalized integration over the circle paired with rotation by alpha
    (one angle per atom), on trig polynomials up to ``degree_budget``."""
    if isinstance(alphas, L0Element):
        if not alphas.is_real:
            raise ValueError("alphas must be real")
        arr = alphas.values.real
    else:
        arr = np.broadcast_to(np.asarray(alphas, dtype=float), (len(space),))
    if arr.shape != (len(space),):
        raise ValueError("need one alpha per atom")
    markov = MarkovBundle.rotation(space, [float(a) for a in arr], degree_budget)
    state = StateBundle.lebesgue(space, degree_budget)
    return DynamicalSystemBundle(
        label="torus_rotation", state=state, markov=markov,
        invariance_tol=invariance_tol,
    )


def rotation_mode_average(alpha: float, k: int, n: int) -> complex:
    """Closed form for the Cesaro average of mode k under rotation by alpha:
    ``(1/n) (1 - w^n) / (1 - w)`` with ``w = exp(2 pi i k alpha)``.

    Uses the identical float multiplier as `RotationMap.apply`, so the
    iterated route matches this to roundoff.  Near resonance
    (|1 - w| < 1e-8) the ratio is ill-conditioned and the average is summed
    directly instead.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    w = RotationMap(alpha).mode_multiplier(k)
    if abs(1.0 - w) < 1e-8:
        acc = 0.0 + 0.0j
        term = 1.0 + 0.0j
        for _ in range(n):
            acc += term
            term *= w
        return acc / n
    return (1.0 - w ** n) / (n * (1.0 - w))


def rotation_mode_deviation_bound(alpha: float, k: int, n: int) -> float:
    """The geometric-sum bound 2 / (n |1 - w|) for the mode-k Cesaro
    deviation; infinite at resonance (w = 1)."""
    w = RotationMap(alpha).mode_multiplier(k)
    denom = n * abs(1.0 - w)
    return float("inf") if denom == 0.0 else 2.0 / denom


# -- convergence reports -------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceReport:
    """Deviation sweep over an n-grid, one row per (n, atom) in the CSV.

    ``deviations[i][w]`` is the per-atom deviation at ``n_grid[i]``;
    ``sup_track[i]`` the worst atom at that n; ``closed_form`` (optional)
    carries a reference value per (n, atom); ``metadata`` is emitted as
    '#'-prefixed header lines, sorted by key.
    """

    example_id: str
    atom_ids: tuple[str, ...]
    n_grid: tuple[int, ...]
    deviations: tuple[tuple[float, ...], ...]
    sup_track: tuple[float, ...]
    closed_form: Optional[tuple[tuple[float, ...], ...]]
    metadata: dict

    def __post_init__(self) -> None:
        if len(self.deviations) != len(self.n_grid) or len(self.sup_track) != len(self.n_grid):
            raise ValueError("one deviation row and sup value per grid point")
        for row in self.deviations:
            if len(row) != len(self.atom_ids):
                raise ValueError("one deviation per atom")
            if any(d < 0 for d in row):
                raise ValueError("deviations must be nonnegative")

    def to_csv(self) -> str:
        lines = []
        for key in sorted(self.metadata):
            lines.append(f"# {key} = {self.metadata[key]}")
        lines.append("n,atom_id,deviation,sup_deviation,closed_form_if_any")
        for i, n in enumerate(self.n_grid):
            for w, atom_id in enumerate(self.atom_ids):
                cf = "" if self.closed_form is None else repr(self.closed_form[i][w])
                lines.append(
                    f"{n},{atom_id},{self.deviations[i][w]!r},{self.sup_track[i]!r},{cf}"
                )
        return "\n".join(lines) + "\n"


def run_convergence_sweep(
    sys: DynamicalSystemBundle,
    x: Section,
    n_grid: Sequence[int] = DEFAULT_N_GRID,
    *,
    closed_form: Optional[Callable[[int], np.ndarray]] = None,
    metadata: Optional[dict] = None,
) -> ConvergenceReport:
    """Sweep the Cesaro deviation of ``x`` over ``n_grid`` incrementally.

    One pass of iterated applications up to max(n); snapshots at the grid
    values reproduce `unique_ergodicity_deviation` bitwise.  ``closed_form``
    maps n to a per-atom reference deviation recorded alongside.
    """
    grid = [int(n) for n in n_grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise ValueError("n_grid must be strictly increasing, starting >= 1")
    target = unit_section(sys.space, sys.kind).scale(state_eval(sys.state, x))
    grid_set = set(grid)
    devs = {}
    y = x
    acc = x
    for n in range(1, grid[-1] + 1):
        if n > 1:
            y = sys.markov.apply(y)
            acc = acc + y
        if n in grid_set:
            devs[n] = section_norm(acc.scale(1.0 / n) - target).values.real.copy()
    deviations = tuple(tuple(float(v) for v in devs[n]) for n in grid)
    sup_track = tuple(float(np.max(devs[n])) for n in grid)
    for i, n in enumerate(grid):
        linf = float(np.max(np.abs(devs[n])))
        if sup_track[i] > linf + 1e-12:
            raise ArithmeticError("per-atom sup exceeded the global deviation")
    cf = None
    if closed_form is not None:
        cf = tuple(
            tuple(float(v) for v in np.asarray(closed_form(n), dtype=float))
            for n in grid
        )
    return ConvergenceReport(
        example_id=sys.label,
        atom_ids=sys.space.atom_ids,
        n_grid=tuple(grid),
        deviations=deviations,
        sup_track=sup_track,
        closed_form=cf,
        metadata=dict(metadata or {}),
    )
