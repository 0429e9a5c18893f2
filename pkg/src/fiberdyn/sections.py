"""Sections of fiber-algebra bundles and their vector-valued norms.

A `Section` assigns one fiber element to each atom.  Its norm is not a
number but an `L0Element`: the per-atom fiber norm.  That vector-valued
norm satisfies the usual norm axioms atom by atom, the C*-identity
``||x* x|| = ||x||^2`` per atom, and is decomposable: whenever the norm
splits as an exact sum of two disjointly supported nonnegative scalars, the
section itself splits accordingly (`d_decompose`).

`VectorSection` carries one C^d vector per atom; together with
`inner_product` it realizes the inner-product module the operator bundles
act on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import KindMismatchError, SpaceMismatchError
from .fibers import (
    FiberElement,
    FiberKind,
    MatrixFiberElement,
    TrigPolyFiberElement,
    fib_add,
    fib_adjoint,
    fib_equal,
    fib_mul,
    fib_norm,
    fib_scale,
    fib_sub,
    fib_unit,
    fib_zero,
)
from .measure import DEFAULT_TOL, AtomicMeasureSpace, L0Element, o_limit_check

__all__ = [
    "Section",
    "unit_section",
    "zero_section",
    "constant_section",
    "section_norm",
    "d_decompose",
    "bo_limit_check",
    "VectorSection",
    "inner_product",
    "vector_norm",
    "apply_operator",
    "operator_adjoint",
]


def _check_space(a, b) -> None:
    if a.space != b.space:
        raise SpaceMismatchError("operands live over different spaces")


@dataclass(frozen=True, eq=False)
class Section:
    """One fiber element per atom, all conforming to a declared kind."""

    space: AtomicMeasureSpace
    kind: FiberKind
    elems: tuple[FiberElement, ...]

    def __post_init__(self) -> None:
        elems = tuple(self.elems)
        object.__setattr__(self, "elems", elems)
        if len(elems) != len(self.space):
            raise ValueError(
                f"need one fiber element per atom: {len(elems)} given, "
                f"{len(self.space)} atoms"
            )
        for (atom_id, _), el in zip(self.space.atoms, elems):
            if not el.conforms(self.kind):
                raise KindMismatchError(
                    f"atom {atom_id!r}: element {el!r} does not conform to {self.kind}"
                )

    # -- algebra ---------------------------------------------------------

    def _binop(self, other: "Section", op) -> "Section":
        _check_space(self, other)
        if self.kind != other.kind:
            raise KindMismatchError(f"kinds differ: {self.kind} vs {other.kind}")
        return Section(self.space, self.kind, tuple(op(a, b) for a, b in zip(self.elems, other.elems)))

    def __add__(self, other: "Section") -> "Section":
        return self._binop(other, fib_add)

    def __sub__(self, other: "Section") -> "Section":
        return self._binop(other, fib_sub)

    def __mul__(self, other: "Section") -> "Section":
        """Fiberwise product; trig products respect the kind's degree budget."""
        budget = self.kind.max_degree if self.kind.is_trigpoly else None
        return self._binop(other, lambda a, b: fib_mul(a, b, max_degree=budget))

    def adjoint(self) -> "Section":
        return Section(self.space, self.kind, tuple(fib_adjoint(a) for a in self.elems))

    def scale(self, lam: Union[complex, float, int, L0Element]) -> "Section":
        """Scale by a constant or by an L0 scalar (one factor per atom)."""
        if isinstance(lam, L0Element):
            _check_space(self, lam)
            factors = lam.values
        else:
            factors = np.full(len(self.space), complex(lam), dtype=np.complex128)
        return Section(
            self.space, self.kind,
            tuple(fib_scale(a, complex(c)) for a, c in zip(self.elems, factors)),
        )

    def __neg__(self) -> "Section":
        return self.scale(-1.0)

    def norm(self) -> L0Element:
        return section_norm(self)

    def equal(self, other: "Section", tol: float = 0.0) -> bool:
        _check_space(self, other)
        return all(fib_equal(a, b, tol) for a, b in zip(self.elems, other.elems))

    def __repr__(self) -> str:
        return f"Section(kind={self.kind}, atoms={len(self.space)})"


def constant_section(space: AtomicMeasureSpace, kind: FiberKind, elem: FiberElement) -> Section:
    return Section(space, kind, tuple(elem for _ in range(len(space))))


def unit_section(space: AtomicMeasureSpace, kind: FiberKind) -> Section:
    return constant_section(space, kind, fib_unit(kind))


def zero_section(space: AtomicMeasureSpace, kind: FiberKind) -> Section:
    return constant_section(space, kind, fib_zero(kind))


def section_norm(x: Section) -> L0Element:
    """The vector-valued norm: per-atom fiber norm, as an L0 scalar."""
    return L0Element(x.space, np.array([fib_norm(a) for a in x.elems]))


def d_decompose(x: Section, e1: L0Element, e2: L0Element) -> tuple[Section, Section]:
    """Split ``x`` along an exact disjoint split of its norm.

    Preconditions (violations raise ValueError): ``e1`` and ``e2`` are real
    and nonnegative, have disjoint supports, and satisfy
    ``e1 + e2 == section_norm(x)`` exactly (bitwise: the split must come
    from the norm itself, e.g. via `support_split`).

    Returns ``(x1, x2)`` with ``x1 + x2 == x``, ``norm(x1) == e1`` and
    ``norm(x2) == e2`` exactly: each part is ``x`` multiplied by the exact
    {0,1} indicator of the corresponding support.
    """
    _check_space(x, e1)
    _check_space(x, e2)
    for name, e in (("e1", e1), ("e2", e2)):
        v = e.values
        if np.any(v.imag != 0.0) or np.any(v.real < 0.0):
            raise ValueError(f"{name} must be real with values >= 0")
    if np.any(np.minimum(e1.values.real, e2.values.real) != 0.0):
        raise ValueError("e1 and e2 must have disjoint supports")
    nrm = section_norm(x)
    if not np.array_equal(e1.values + e2.values, nrm.values):
        raise ValueError("e1 + e2 must equal the section norm exactly")
    ind1 = (e1.values.real > 0.0).astype(np.complex128)
    ind2 = (e2.values.real > 0.0).astype(np.complex128)
    x1 = x.scale(L0Element(x.space, ind1))
    x2 = x.scale(L0Element(x.space, ind2))
    # By construction these hold exactly; kept as hard checks because the
    # decomposability property is the point of the operation.
    if not np.array_equal(section_norm(x1).values, e1.values):
        raise AssertionError("norm of first part does not reproduce e1")
    if not np.array_equal(section_norm(x2).values, e2.values):
        raise AssertionError("norm of second part does not reproduce e2")
    if not (x1 + x2).equal(x):
        raise AssertionError("parts do not sum back to x")
    return x1, x2


def bo_limit_check(
    seq: Sequence[Section], target: Section, tol: float = DEFAULT_TOL
) -> bool:
    """Norm-order convergence: o-convergence of ``||x_n - target||`` to 0."""
    if len(seq) == 0:
        raise ValueError("empty sequence")
    diffs = [section_norm(x - target) for x in seq]
    return o_limit_check(diffs, L0Element.zero(target.space), tol)


# -- inner-product module ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class VectorSection:
    """One C^dim vector per atom."""

    space: AtomicMeasureSpace
    dim: int
    vectors: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        vecs = []
        if len(self.vectors) != len(self.space):
            raise ValueError("need one vector per atom")
        for v in self.vectors:
            arr = np.array(np.asarray(v, dtype=np.complex128))
            if arr.shape != (self.dim,):
                raise ValueError(f"expected vectors of shape ({self.dim},), got {arr.shape}")
            arr.setflags(write=False)
            vecs.append(arr)
        object.__setattr__(self, "vectors", tuple(vecs))

    def __add__(self, other: "VectorSection") -> "VectorSection":
        _check_space(self, other)
        return VectorSection(self.space, self.dim, tuple(a + b for a, b in zip(self.vectors, other.vectors)))

    def __sub__(self, other: "VectorSection") -> "VectorSection":
        _check_space(self, other)
        return VectorSection(self.space, self.dim, tuple(a - b for a, b in zip(self.vectors, other.vectors)))

    def scale(self, lam: Union[complex, L0Element]) -> "VectorSection":
        if isinstance(lam, L0Element):
            _check_space(self, lam)
            factors = lam.values
        else:
            factors = np.full(len(self.space), complex(lam))
        return VectorSection(self.space, self.dim, tuple(v * c for v, c in zip(self.vectors, factors)))


def inner_product(x: VectorSection, y: VectorSection) -> L0Element:
    """L0-valued inner product, linear in the first slot:
    ``<x, y>(w) = sum_i x_i(w) * conj(y_i(w))``."""
    _check_space(x, y)
    if x.dim != y.dim:
        raise KindMismatchError("vector dimensions differ")
    vals = np.array([np.dot(a, np.conj(b)) for a, b in zip(x.vectors, y.vectors)])
    return L0Element(x.space, vals)


def vector_norm(x: VectorSection) -> L0Element:
    """``sqrt(<x, x>)`` per atom (real and nonnegative)."""
    vals = np.array([np.linalg.norm(v) for v in x.vectors])
    return L0Element(x.space, vals)


def apply_operator(t: Section, x: VectorSection) -> VectorSection:
    """Apply a matrix-kind section fiberwise to a vector section."""
    if not t.kind.is_matrix:
        raise KindMismatchError("operator sections must be matrix kind")
    if t.kind.dim != x.dim:
        raise KindMismatchError("operator and vector dimensions differ")
    _check_space(t, x)
    return VectorSection(
        x.space, x.dim,
        tuple(a.entries @ v for a, v in zip(t.elems, x.vectors)),  # type: ignore[union-attr]
    )


def operator_adjoint(
    t: Section,
    *,
    tol: float = DEFAULT_TOL,
    trials: int = 5,
    rng: Optional[np.random.Generator] = None,
) -> Section:
    """Adjoint of a matrix-kind section acting on vector sections.

    Returns the fiberwise conjugate transpose and verifies, on ``trials``
    random vector pairs, that ``<t x, y> == <x, t* y>`` within ``tol`` at
    every atom, and that ``||t* t|| == ||t||^2`` per atom (the C*-identity
    for the operator norm).  Violations raise ArithmeticError; for a true
    conjugate transpose they cannot occur beyond roundoff, so this is a
    guard against a corrupted section.
    """
    if not t.kind.is_matrix:
        raise KindMismatchError("operator sections must be matrix kind")
    ts = t.adjoint()
    if rng is None:
        rng = np.random.default_rng(0)
    d = t.kind.dim
    n = len(t.space)
    for _ in range(trials):
        xv = VectorSection(t.space, d, tuple(rng.normal(size=d) + 1j * rng.normal(size=d) for _ in range(n)))
        yv = VectorSection(t.space, d, tuple(rng.normal(size=d) + 1j * rng.normal(size=d) for _ in range(n)))
        lhs = inner_product(apply_operator(t, xv), yv)
        rhs = inner_product(xv, apply_operator(ts, yv))
        resid = float(np.max(np.abs(lhs.values - rhs.values)))
        if resid > tol * max(1.0, float(np.max(np.abs(lhs.values)))):
            raise ArithmeticError(f"adjoint identity violated: residual {resid:.2e}")
    nt = section_norm(t).values.real
    ntt = section_norm(ts * t).values.real
    defect = float(np.max(np.abs(ntt - nt * nt)))
    if defect > tol * max(1.0, float(np.max(nt * nt))):
        raise ArithmeticError(f"||t* t|| != ||t||^2 (defect {defect:.2e})")
    return ts
