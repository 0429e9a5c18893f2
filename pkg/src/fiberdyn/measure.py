"""Finite atomic measure spaces and the scalars that live over them.

Everything in this package is fibered over a finite set of weighted atoms.
Measurable functions modulo null sets then collapse to tuples indexed by the
atoms: one complex value per atom.  Order convergence of such tuples is plain
per-atom convergence, the lifting (choice of representative) is the identity,
and the essential supremum is a maximum over atoms.  `L0Element` is that
tuple type, with pointwise algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import SpaceMismatchError

__all__ = [
    "DEFAULT_TOL",
    "AtomicMeasureSpace",
    "L0Element",
    "ess_sup",
    "o_limit_check",
    "lifting_apply",
    "support_split",
]

DEFAULT_TOL = 1e-10

ScalarLike = Union[int, float, complex]


@dataclass(frozen=True)
class AtomicMeasureSpace:
    """A finite measure space: named atoms with strictly positive weights."""

    atoms: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        if not self.atoms:
            raise ValueError("measure space needs at least one atom")
        ids = [a for a, _ in self.atoms]
        if len(set(ids)) != len(ids):
            raise ValueError("atom ids must be distinct")
        for atom_id, weight in self.atoms:
            if not isinstance(atom_id, str) or not atom_id:
                raise ValueError("atom ids must be nonempty strings")
            w = float(weight)
            if not np.isfinite(w) or w <= 0.0:
                raise ValueError(
                    f"atom {atom_id!r}: weight must be finite and > 0, got {weight!r}"
                )

    @classmethod
    def uniform(cls, n: int, prefix: str = "w") -> "AtomicMeasureSpace":
        """Space with atoms ``w0..w{n-1}``, each of weight 1/n."""
        if n < 1:
            raise ValueError("need at least one atom")
        return cls(tuple((f"{prefix}{i}", 1.0 / n) for i in range(n)))

    @property
    def atom_ids(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.atoms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms], dtype=float)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def __len__(self) -> int:
        return len(self.atoms)

    def index_of(self, atom_id: str) -> int:
        for i, (a, _) in enumerate(self.atoms):
            if a == atom_id:
                return i
        raise KeyError(atom_id)


def _as_values(space: AtomicMeasureSpace, values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    if arr.shape != (len(space),):
        raise ValueError(
            f"expected {len(space)} values (one per atom), got shape {arr.shape}"
        )
    out = np.array(arr, dtype=np.complex128)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class L0Element:
    """A measurable scalar function: one complex value per atom.

    All algebra is pointwise.  Mixed-space arithmetic raises
    `SpaceMismatchError`; scalars broadcast.
    """

    space: AtomicMeasureSpace
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _as_values(self.space, self.values))

    @classmethod
    def const(cls, space: AtomicMeasureSpace, value: ScalarLike) -> "L0Element":
        return cls(space, np.full(len(space), value, dtype=np.complex128))

    @classmethod
    def zero(cls, space: AtomicMeasureSpace) -> "L0Element":
        return cls.const(space, 0.0)

    @classmethod
    def one(cls, space: AtomicMeasureSpace) -> "L0Element":
        return cls.const(space, 1.0)

    def _coerce(self, other) -> "L0Element":
        if isinstance(other, L0Element):
            if other.space is not self.space and other.space != self.space:
                raise SpaceMismatchError("operands live over different spaces")
            return other
        if isinstance(other, (int, float, complex, np.integer, np.floating, np.complexfloating)):
            return L0Element.const(self.space, complex(other))
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other) -> "L0Element":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return L0Element(self.space, self.values + o.values)

    __radd__ = __add__

    def __sub__(self, other) -> "L0Element":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return L0Element(self.space, self.values - o.values)

    def __rsub__(self, other) -> "L0Element":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return L0Element(self.space, o.values - self.values)

    def __mul__(self, other) -> "L0Element":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return L0Element(self.space, self.values * o.values)

    __rmul__ = __mul__

    def __neg__(self) -> "L0Element":
        return L0Element(self.space, -self.values)

    def conj(self) -> "L0Element":
        return L0Element(self.space, np.conj(self.values))

    def __abs__(self) -> "L0Element":
        return L0Element(self.space, np.abs(self.values))

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0.0))

    def leq(self, other, tol: float = 0.0) -> bool:
        """Pointwise order ``self <= other`` for real-valued elements."""
        o = self._coerce(other)
        if not self.is_real or not o.is_real:
            raise ValueError("order is defined for real-valued elements only")
        return bool(np.all(self.values.real <= o.values.real + tol))

    def __eq__(self, other) -> bool:
        if not isinstance(other, L0Element):
            return NotImplemented
        return self.space == other.space and bool(np.array_equal(self.values, other.values))

    def __repr__(self) -> str:
        return f"L0Element({list(self.values)})"


def ess_sup(f: L0Element) -> float:
    """Essential supremum of |f|: the max of |f| over atoms.

    Every atom has positive weight, so no value is negligible.
    """
    return float(np.max(np.abs(f.values)))


def o_limit_check(
    seq: Sequence[L0Element], target: L0Element, tol: float = DEFAULT_TOL
) -> bool:
    """Decide whether a finite real sequence has order-converged to ``target``.

    Over an atomic space, order convergence is per-atom convergence.  The
    finite-sequence proxy used everywhere in this package: the last element
    must be within ``tol`` of the target at every atom, and the per-atom max
    over the final quarter of the sequence must be within ``2 * tol``.  The
    verdict is invariant under permuting the atoms (everything is per-atom).
    """
    if len(seq) == 0:
        raise ValueError("empty sequence")
    if not target.is_real:
        raise ValueError("o-limit check is defined for real-valued sequences")
    diffs = []
    for f in seq:
        if f.space != target.space:
            raise SpaceMismatchError("sequence element over a different space")
        if not f.is_real:
            raise ValueError("o-limit check is defined for real-valued sequences")
        diffs.append(np.abs(f.values.real - target.values.real))
    arr = np.stack(diffs)  # shape (len(seq), n_atoms)
    if np.any(arr[-1] > tol):
        return False
    tail = arr[-max(1, len(seq) // 4):]
    return bool(np.all(np.max(tail, axis=0) <= 2.0 * tol))


def lifting_apply(f: L0Element) -> L0Element:
    """The lifting: pick a representative of the class of ``f``.

    On an atomic space the identity map is a lifting (there are no nontrivial
    null sets), so this returns ``f`` itself after checking all values are
    finite.  Kept as an explicit operation so code that conceptually passes
    through the lifting says so.
    """
    if not np.all(np.isfinite(f.values.real)) or not np.all(np.isfinite(f.values.imag)):
        raise ValueError("lifting requires finite values at every atom")
    return f


def support_split(e: L0Element) -> tuple[L0Element, L0Element]:
    """Split off the support of a nonnegative element.

    Returns ``(ind, ind_c)``: the {0,1}-valued indicator of ``{e > 0}`` and of
    its complement.  Exact: indicators are exactly 0.0 or 1.0, they sum to the
    constant 1, and ``ind * e == e`` bitwise.
    """
    v = e.values
    if np.any(v.imag != 0.0) or np.any(v.real < 0.0):
        raise ValueError("support split requires a real element with values >= 0")
    ind = (v.real > 0.0).astype(np.complex128)
    return L0Element(e.space, ind), L0Element(e.space, 1.0 - ind)
