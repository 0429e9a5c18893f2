"""State bundles and L0-valued functionals on fiber bundles.

A `StateBundle` assigns a state (positive, unit on the identity) to each
atom.  Matrix fibers use density matrices; trig-poly fibers use one of
three structured functionals (normalized Lebesgue integration, point
evaluation, or a finite convex mixture of point evaluations).

`L0Functional` is the general bounded-functional bundle on matrix fibers:
one representing matrix per atom, evaluation ``x -> trace(A x)``.  Its norm
(as a functional on the spectral-norm fiber) is the trace norm of the
representing matrix, computed per atom.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConstructionError, KindMismatchError, SpaceMismatchError
from .fibers import (
    FiberKind,
    MatrixFiberElement,
    TrigPolyFiberElement,
    fib_norm,
)
from .measure import AtomicMeasureSpace, L0Element
from .sections import Section, section_norm, unit_section

__all__ = [
    "TrigState",
    "StateBundle",
    "L0Functional",
    "state_eval",
    "functional_norm",
    "state_functional",
    "cauchy_schwarz_residual",
    "FunctionalSuiteReport",
    "positive_functional_suite",
]

_STATE_TOL = 1e-12


@dataclass(frozen=True)
class TrigState:
    """Structured state on trig polynomials.

    ``tag``: ``"lebesgue"`` (p -> c_0, i.e. the normalized integral over
    [0,1)), ``"point_mass"`` (evaluation at ``t0``), or ``"mixture"``
    (convex combination of point evaluations).
    """

    tag: str
    t0: Optional[float] = None
    weights: Optional[tuple[float, ...]] = None
    points: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if self.tag == "lebesgue":
            if self.t0 is not None or self.weights is not None or self.points is not None:
                raise ValueError("lebesgue state takes no parameters")
        elif self.tag == "point_mass":
            if self.t0 is None or not (0.0 <= float(self.t0) < 1.0):
                raise ValueError("point mass needs t0 in [0, 1)")
        elif self.tag == "mixture":
            if self.weights is None or self.points is None:
                raise ValueError("mixture needs weights and points")
            w = np.asarray(self.weights, dtype=float)
            p = np.asarray(self.points, dtype=float)
            if w.shape != p.shape or w.ndim != 1 or w.size == 0:
                raise ValueError("weights and points must be equal-length nonempty")
            if np.any(w < 0.0) or abs(float(np.sum(w)) - 1.0) > _STATE_TOL:
                raise ValueError("mixture weights must be >= 0 and sum to 1")
            if np.any(p < 0.0) or np.any(p >= 1.0):
                raise ValueError("mixture points must lie in [0, 1)")
        else:
            raise ValueError(f"unknown trig state tag {self.tag!r}")

    def eval(self, p: TrigPolyFiberElement) -> complex:
        K = p.degree
        ks = np.arange(-K, K + 1)
        if self.tag == "lebesgue":
            return complex(p.coeffs[K])
        if self.tag == "point_mass":
            return complex(np.sum(p.coeffs * np.exp(2j * np.pi * ks * self.t0)))
        total = 0.0 + 0.0j
        for w, t in zip(self.weights, self.points):  # type: ignore[arg-type]
            total += w * np.sum(p.coeffs * np.exp(2j * np.pi * ks * t))
        return complex(total)


def _validate_density(rho: np.ndarray, atom_id: str, tol: float = _STATE_TOL) -> np.ndarray:
    arr = np.array(np.asarray(rho, dtype=np.complex128))
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ConstructionError(f"atom {atom_id!r}: density must be a square matrix")
    herm = float(np.max(np.abs(arr - arr.conj().T)))
    if herm > tol:
        raise ConstructionError(
            f"atom {atom_id!r}: density not Hermitian (defect {herm:.2e} > {tol:.0e})"
        )
    sym = 0.5 * (arr + arr.conj().T)
    mineig = float(np.min(np.linalg.eigvalsh(sym)))
    if mineig < -tol:
        raise ConstructionError(
            f"atom {atom_id!r}: density not positive semidefinite "
            f"(min eigenvalue {mineig:.2e} < -{tol:.0e})"
        )
    tr = complex(np.trace(arr))
    if abs(tr - 1.0) > tol:
        raise ConstructionError(
            f"atom {atom_id!r}: density trace {tr!r} differs from 1 by more than {tol:.0e}"
        )
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateBundle:
    """One state per atom.  Matrix kind: density matrices (Hermitian within
    1e-12, PSD within 1e-12, trace within 1e-12 of 1; violations raise
    `ConstructionError` naming the atom).  Trig kind: `TrigState` tags."""

    space: AtomicMeasureSpace
    kind: FiberKind
    densities: Optional[tuple[np.ndarray, ...]] = None
    trig_states: Optional[tuple[TrigState, ...]] = None

    def __post_init__(self) -> None:
        if self.kind.is_matrix:
            if self.densities is None or self.trig_states is not None:
                raise ValueError("matrix-kind state bundle needs densities only")
            if len(self.densities) != len(self.space):
                raise ValueError("need one density per atom")
            checked = tuple(
                _validate_density(rho, atom_id)
                for (atom_id, _), rho in zip(self.space.atoms, self.densities)
            )
            for rho in checked:
                if rho.shape != (self.kind.dim, self.kind.dim):
                    raise ConstructionError(
                        f"density shape {rho.shape} does not match kind dim {self.kind.dim}"
                    )
            object.__setattr__(self, "densities", checked)
        else:
            if self.trig_states is None or self.densities is not None:
                raise ValueError("trigpoly-kind state bundle needs trig states only")
            if len(self.trig_states) != len(self.space):
                raise ValueError("need one state per atom")

    # -- constructors ------------------------------------------------------

    @classmethod
    def canonical_trace(cls, space: AtomicMeasureSpace, dim: int) -> "StateBundle":
        """The normalized trace on M_dim at every atom (density e/dim)."""
        rho = np.eye(dim) / dim
        return cls(space, FiberKind.matrix(dim), densities=tuple(rho for _ in range(len(space))))

    @classmethod
    def from_densities(cls, space: AtomicMeasureSpace, mats: Sequence[np.ndarray]) -> "StateBundle":
        mats = [np.asarray(m, dtype=np.complex128) for m in mats]
        dim = mats[0].shape[0]
        return cls(space, FiberKind.matrix(dim), densities=tuple(mats))

    @classmethod
    def lebesgue(cls, space: AtomicMeasureSpace, max_degree: int) -> "StateBundle":
        """Normalized integration over [0,1) at every atom."""
        st = TrigState("lebesgue")
        return cls(space, FiberKind.trigpoly(max_degree), trig_states=tuple(st for _ in range(len(space))))

    @classmethod
    def point_masses(
        cls, space: AtomicMeasureSpace, t0s: Sequence[float], max_degree: int
    ) -> "StateBundle":
        if len(t0s) != len(space):
            raise ValueError("need one evaluation point per atom")
        return cls(
            space, FiberKind.trigpoly(max_degree),
            trig_states=tuple(TrigState("point_mass", t0=float(t)) for t in t0s),
        )


def state_eval(phi: StateBundle, x: Section) -> L0Element:
    """Evaluate the state bundle on a section, atom by atom."""
    if phi.space != x.space:
        raise SpaceMismatchError("state and section live over different spaces")
    if phi.kind.is_matrix:
        if not x.kind.is_matrix or x.kind.dim != phi.kind.dim:
            raise KindMismatchError("section kind does not match the state bundle")
        vals = np.array([
            np.trace(rho @ el.entries)  # type: ignore[union-attr]
            for rho, el in zip(phi.densities, x.elems)  # type: ignore[arg-type]
        ])
    else:
        if not x.kind.is_trigpoly:
            raise KindMismatchError("section kind does not match the state bundle")
        vals = np.array([st.eval(el) for st, el in zip(phi.trig_states, x.elems)])  # type: ignore[arg-type, union-attr]
    return L0Element(x.space, vals)


@dataclass(frozen=True, eq=False)
class L0Functional:
    """A bounded-functional bundle on matrix fibers: x -> trace(A x) per atom."""

    space: AtomicMeasureSpace
    dim: int
    duals: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.duals) != len(self.space):
            raise ValueError("need one representing matrix per atom")
        mats = []
        for a in self.duals:
            arr = np.array(np.asarray(a, dtype=np.complex128))
            if arr.shape != (self.dim, self.dim):
                raise ValueError(f"representing matrix shape {arr.shape} != dim {self.dim}")
            arr.setflags(write=False)
            mats.append(arr)
        object.__setattr__(self, "duals", tuple(mats))

    def eval(self, x: Section) -> L0Element:
        if x.space != self.space:
            raise SpaceMismatchError("mixed spaces")
        if not x.kind.is_matrix or x.kind.dim != self.dim:
            raise KindMismatchError("section kind does not match functional")
        vals = np.array([
            np.trace(a @ el.entries) for a, el in zip(self.duals, x.elems)  # type: ignore[union-attr]
        ])
        return L0Element(self.space, vals)

    def scale_add(self, alpha: complex, other: "L0Functional", beta: complex) -> "L0Functional":
        """alpha * self + beta * other."""
        if other.space != self.space or other.dim != self.dim:
            raise SpaceMismatchError("functionals incompatible")
        return L0Functional(
            self.space, self.dim,
            tuple(alpha * a + beta * b for a, b in zip(self.duals, other.duals)),
        )


def state_functional(phi: StateBundle) -> L0Functional:
    """View a matrix-kind state bundle as an L0Functional."""
    if not phi.kind.is_matrix:
        raise KindMismatchError("only matrix-kind states have representing matrices")
    return L0Functional(phi.space, phi.kind.dim, phi.densities)  # type: ignore[arg-type]


def functional_norm(f: L0Functional) -> L0Element:
    """Per-atom norm of the functional on the spectral-norm fiber.

    The dual of the spectral norm is the trace norm, so this is the sum of
    singular values of the representing matrix at each atom.
    """
    vals = np.array([float(np.sum(np.linalg.svd(a, compute_uv=False))) for a in f.duals])
    return L0Element(f.space, vals)


def cauchy_schwarz_residual(
    phi: StateBundle, a: Section, b: Section, tol: float = 1e-10
) -> L0Element:
    """Per-atom violation of the state Cauchy-Schwarz inequality.

    Returns ``max(0, |phi(a* b)|^2 - phi(a* a) * phi(b* b))`` per atom;
    zero when the inequality holds.  The right-hand side is formed from the
    moduli of the (mathematically nonnegative) diagonal values, which makes
    the equality case ``a == b`` come out exactly 0: both sides are then the
    same float product.  Also checks the conjugate-symmetry identity
    ``phi(a* b) == conj(phi(b* a))`` within ``tol`` and raises
    ArithmeticError on violation.
    """
    ab = state_eval(phi, a.adjoint() * b)
    ba = state_eval(phi, b.adjoint() * a)
    sym_defect = float(np.max(np.abs(ab.values - np.conj(ba.values))))
    scale = max(1.0, float(np.max(np.abs(ab.values))))
    if sym_defect > tol * scale:
        raise ArithmeticError(
            f"phi(a* b) != conj(phi(b* a)): defect {sym_defect:.2e}"
        )
    aa = state_eval(phi, a.adjoint() * a)
    bb = state_eval(phi, b.adjoint() * b)
    m = np.abs(ab.values)
    lhs = m * m
    rhs = np.abs(aa.values) * np.abs(bb.values)
    return L0Element(phi.space, np.maximum(0.0, lhs - rhs))


@dataclass(frozen=True)
class FunctionalSuiteReport:
    """Residuals from the positive-functional property suite.

    All residual fields are worst cases over trials and atoms, measured as
    violations (0 means the property held everywhere).
    """

    seed: int
    trials: int
    chain_residual: float          # |phi(x)|^2 <= phi(e) phi(x*x) <= phi(e)^2 ||x||^2
    norm_at_unit_residual: float   # for PSD duals: functional norm == value at unit
    additivity_residual: float     # ||a phi + b psi|| == a ||phi|| + b ||psi||
    combination_is_state: Optional[bool]  # set when the weights are convex per atom

    @property
    def max_residual(self) -> float:
        return max(self.chain_residual, self.norm_at_unit_residual, self.additivity_residual)


def positive_functional_suite(
    phi: StateBundle,
    psi: StateBundle,
    alpha: L0Element,
    beta: L0Element,
    *,
    seed: int = 0,
    trials: int = 100,
) -> FunctionalSuiteReport:
    """Exercise the structural properties of positive functional bundles.

    For the given state pair and nonnegative real L0 weights, measures:

    * the two-sided chain ``|phi(x)|^2 <= phi(e) phi(x* x)`` and
      ``phi(e) phi(x* x) <= phi(e)^2 ||x||^2`` per atom on ``trials`` random
      sections x (worst violation reported);
    * for positive functionals (random PSD duals, not normalized) the
      identity ``||f|| == f(e)``: the trace norm of a PSD matrix equals its
      trace;
    * norm additivity on the positive cone:
      ``||alpha phi + beta psi|| == alpha ||phi|| + beta ||psi||`` per atom;
    * when ``alpha + beta == 1`` per atom (within 1e-12), that the combined
      functional is again a valid state bundle.
    """
    if not phi.kind.is_matrix or phi.kind != psi.kind or phi.space != psi.space:
        raise KindMismatchError("suite needs two matrix-kind state bundles on one space")
    for name, w in (("alpha", alpha), ("beta", beta)):
        if not w.is_real or np.any(w.values.real < 0.0):
            raise ValueError(f"{name} must be real with values >= 0")
    rng = np.random.default_rng(seed)
    dim = phi.kind.dim
    n = len(phi.space)
    kind = phi.kind
    e = unit_section(phi.space, kind)

    chain = 0.0
    unitnorm = 0.0
    for _ in range(trials):
        x = Section(phi.space, kind, tuple(
            MatrixFiberElement(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
            for _ in range(n)
        ))
        fx = np.abs(state_eval(phi, x).values)
        fe = np.abs(state_eval(phi, e).values)
        fxx = np.abs(state_eval(phi, x.adjoint() * x).values)
        nx = section_norm(x).values.real
        chain = max(chain, float(np.max(fx * fx - fe * fxx)))
        chain = max(chain, float(np.max(fe * fxx - (fe * fe) * (nx * nx))))

        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        psd = g @ g.conj().T
        f = L0Functional(phi.space, dim, tuple(psd for _ in range(n)))
        unitnorm = max(unitnorm, float(np.max(np.abs(
            functional_norm(f).values.real - f.eval(e).values.real
        ))))

    fphi = state_functional(phi)
    fpsi = state_functional(psi)
    a = alpha.values.real
    b = beta.values.real
    combined = L0Functional(phi.space, dim, tuple(
        av * r + bv * s for av, bv, r, s in zip(a, b, fphi.duals, fpsi.duals)
    ))
    combined_norm = functional_norm(combined).values.real
    phin = functional_norm(fphi).values.real
    psin = functional_norm(fpsi).values.real
    additivity = float(np.max(np.abs(combined_norm - (a * phin + b * psin))))

    combination_is_state: Optional[bool] = None
    if np.all(np.abs(a + b - 1.0) <= _STATE_TOL):
        try:
            StateBundle.from_densities(phi.space, list(combined.duals))
            combination_is_state = True
        except ConstructionError:
            combination_is_state = False

    return FunctionalSuiteReport(
        seed=seed,
        trials=trials,
        chain_residual=chain,
        norm_at_unit_residual=unitnorm,
        additivity_residual=additivity,
        combination_is_state=combination_is_state,
    )
