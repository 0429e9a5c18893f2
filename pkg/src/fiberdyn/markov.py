"""Unital map bundles, Markov (positive unital) bundles, and their checks.

A `MapBundle` assigns a unital linear map to each atom; a `MarkovBundle` is
the positivity-certified subtype.  The split matters because the norm
criterion ("a unital map is positive exactly when its operator norm is 1")
must be testable on *non*-positive unital maps: those are constructed as
plain MapBundles and fed to `positivity_criterion_check`.

Matrix-kind maps are stored as d^2 x d^2 superoperators in the
column-stacking convention (``vec`` stacks columns, so entry ``x[i, j]``
lands at vec index ``i + j*d``) or as Kraus operator lists.  Trig-poly maps
are structured: rotation by alpha (``c_k -> exp(2 pi i k alpha) c_k``) or a
coefficient multiplier ``c_k -> m_k c_k``.

Positivity certification at construction:

* Kraus form: structural (sums K x K* of positives are positive).
* Rotation: structural (composition with a point map).
* Coefficient multiplier: the Toeplitz window ``[m_{j-l}]_{j,l=0..K}`` must
  be PSD.  This is exactly positivity on the budgeted algebra: every
  nonnegative trig polynomial of degree <= K factors as |q|^2 with q
  analytic of degree <= K, and evaluating T(|q|^2) at a point t0 gives the
  quadratic form of that Toeplitz matrix twisted by a diagonal unitary.
* Raw superoperator: randomized; T(x* x) must test positive for a seeded
  batch of random x per atom (dense draws mixed with rank-one draws; the
  rank-one ones catch trace-like non-positive maps that dense Wishart
  inputs almost never expose).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ConstructionError, KindMismatchError, SpaceMismatchError
from .fibers import (
    FiberElement,
    FiberKind,
    MatrixFiberElement,
    TrigPolyFiberElement,
    fib_norm,
    fib_sub,
    fib_unit,
    is_positive,
)
from .measure import AtomicMeasureSpace, L0Element
from .sections import Section, constant_section
from .states import StateBundle, state_eval

__all__ = [
    "vec",
    "unvec",
    "kraus_to_superoperator",
    "SuperoperatorMap",
    "KrausMap",
    "RotationMap",
    "CoefficientMultiplierMap",
    "AtomMap",
    "PositivityCertificate",
    "MapBundle",
    "MarkovBundle",
    "markov_apply",
    "dual_apply",
    "NormEstimate",
    "markov_norm_estimate",
    "CriterionReport",
    "positivity_criterion_check",
    "matrix_unit_section",
    "matrix_unit_probes",
    "state_localize",
    "markov_localize",
    "invariance_residual",
    "invariance_residual_routes",
]

_UNITAL_TOL = 1e-10


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization: x[i, j] -> v[i + j*d]."""
    return np.asarray(m).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape((d, d), order="F")


def kraus_to_superoperator(ops: Sequence[np.ndarray]) -> np.ndarray:
    """Superoperator of ``x -> sum_i K_i x K_i*`` in column stacking.

    Uses ``vec(A x B) = (B^T kron A) vec(x)``, so each term contributes
    ``kron(conj(K), K)``.
    """
    total = None
    for k in ops:
        term = np.kron(np.conj(k), k)
        total = term if total is None else total + term
    if total is None:
        raise ValueError("need at least one Kraus operator")
    return total


@dataclass(frozen=True, eq=False)
class SuperoperatorMap:
    """A linear map on M_d stored as its d^2 x d^2 matrix (column stacking)."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(np.asarray(self.matrix, dtype=np.complex128))
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("superoperator must be square")
        d = int(round(np.sqrt(arr.shape[0])))
        if d * d != arr.shape[0]:
            raise ValueError(f"superoperator side {arr.shape[0]} is not a perfect square")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, x: MatrixFiberElement) -> MatrixFiberElement:
        return MatrixFiberElement(unvec(self.matrix @ vec(x.entries), self.dim))

    def superoperator(self) -> np.ndarray:
        return self.matrix

    def dual(self, rho: np.ndarray) -> np.ndarray:
        # For Hermitian rho, tr(rho T(x)) = tr(sigma x) with
        # sigma = (unvec(M† vec(rho)))†; the outer adjoint matters only for
        # maps that do not preserve Hermiticity.
        return unvec(self.matrix.conj().T @ vec(rho), self.dim).conj().T


@dataclass(frozen=True, eq=False)
class KrausMap:
    """x -> sum_i K_i x K_i* (completely positive by construction)."""

    ops: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if not self.ops:
            raise ValueError("need at least one Kraus operator")
        mats = []
        d = None
        for k in self.ops:
            arr = np.array(np.asarray(k, dtype=np.complex128))
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValueError("Kraus operators must be square")
            if d is None:
                d = arr.shape[0]
            elif arr.shape[0] != d:
                raise ValueError("Kraus operators must share one dimension")
            arr.setflags(write=False)
            mats.append(arr)
        object.__setattr__(self, "ops", tuple(mats))

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def apply(self, x: MatrixFiberElement) -> MatrixFiberElement:
        acc = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for k in self.ops:
            acc += k @ x.entries @ k.conj().T
        return MatrixFiberElement(acc)

    def superoperator(self) -> np.ndarray:
        return kraus_to_superoperator(self.ops)

    def dual(self, rho: np.ndarray) -> np.ndarray:
        acc = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for k in self.ops:
            acc += k.conj().T @ rho @ k
        return acc


@dataclass(frozen=True)
class RotationMap:
    """Composition with the torus rotation t -> t + alpha (mod 1):
    ``c_k -> exp(2 pi i k alpha) c_k``."""

    alpha: float

    def __post_init__(self) -> None:
        if not np.isfinite(float(self.alpha)):
            raise ValueError("alpha must be finite")

    def apply(self, x: TrigPolyFiberElement) -> TrigPolyFiberElement:
        K = x.degree
        ks = np.arange(-K, K + 1)
        # One shared base so iterated application and closed forms use the
        # identical float phase per mode.
        base = 2j * np.pi * self.alpha
        return TrigPolyFiberElement(x.coeffs * np.exp(base * ks))

    def mode_multiplier(self, k: int) -> complex:
        return complex(np.exp((2j * np.pi * self.alpha) * k))


@dataclass(frozen=True, eq=False)
class CoefficientMultiplierMap:
    """c_k -> m_k c_k, with multipliers given for k = -K..K."""

    multipliers: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(np.asarray(self.multipliers, dtype=np.complex128))
        if arr.ndim != 1 or arr.size % 2 != 1:
            raise ValueError("multipliers must be an odd-length vector m_-K..m_K")
        arr.setflags(write=False)
        object.__setattr__(self, "multipliers", arr)

    @property
    def degree(self) -> int:
        return (self.multipliers.size - 1) // 2

    def apply(self, x: TrigPolyFiberElement) -> TrigPolyFiberElement:
        K = x.degree
        if K > self.degree:
            raise KindMismatchError(
                f"multiplier map covers degree {self.degree}, input has degree {K}"
            )
        off = self.degree - K
        window = self.multipliers[off:off + 2 * K + 1]
        return TrigPolyFiberElement(x.coeffs * window)

    def mode_multiplier(self, k: int) -> complex:
        if abs(k) > self.degree:
            raise KindMismatchError(f"mode {k} outside multiplier range {self.degree}")
        return complex(self.multipliers[k + self.degree])

    def toeplitz_window(self) -> np.ndarray:
        """The matrix [m_{j-l}]_{j,l=0..K}; PSD iff the map is positive on
        the degree-K algebra."""
        K = self.degree
        return np.array([[self.multipliers[(j - l) + K] for l in range(K + 1)] for j in range(K + 1)])


AtomMap = Union[SuperoperatorMap, KrausMap, RotationMap, CoefficientMultiplierMap]

_MATRIX_FORMS = (SuperoperatorMap, KrausMap)
_TRIG_FORMS = (RotationMap, CoefficientMultiplierMap)


def _apply_atom_map(m: AtomMap, el: FiberElement) -> FiberElement:
    return m.apply(el)  # type: ignore[arg-type]


@dataclass(frozen=True)
class PositivityCertificate:
    """How positivity of an atom's map was established.

    ``method`` is ``"kraus"``, ``"rotation"``, ``"toeplitz"`` (structural)
    or ``"randomized"`` (with the seed and sample count used).
    """

    method: str
    seed: Optional[int] = None
    samples: Optional[int] = None


@dataclass(frozen=True, eq=False)
class MapBundle:
    """One unital linear map per atom.  Unitality (map(unit) == unit within
    1e-10 in fiber norm) is enforced at construction; positivity is NOT:
    see `MarkovBundle` for the certified subtype."""

    space: AtomicMeasureSpace
    kind: FiberKind
    maps: tuple[AtomMap, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "maps", tuple(self.maps))
        if len(self.maps) != len(self.space):
            raise ValueError("need one map per atom")
        u = fib_unit(self.kind)
        for (atom_id, _), m in zip(self.space.atoms, self.maps):
            if self.kind.is_matrix:
                if not isinstance(m, _MATRIX_FORMS):
                    raise KindMismatchError(f"atom {atom_id!r}: map form does not fit matrix kind")
                if m.dim != self.kind.dim:
                    raise KindMismatchError(
                        f"atom {atom_id!r}: map dim {m.dim} != kind dim {self.kind.dim}"
                    )
            else:
                if not isinstance(m, _TRIG_FORMS):
                    raise KindMismatchError(f"atom {atom_id!r}: map form does not fit trigpoly kind")
                if isinstance(m, CoefficientMultiplierMap) and m.degree < self.kind.max_degree:  # type: ignore[operator]
                    raise KindMismatchError(
                        f"atom {atom_id!r}: multiplier range {m.degree} below budget "
                        f"{self.kind.max_degree}"
                    )
            resid = fib_norm(fib_sub(_apply_atom_map(m, u), u))
            if resid > _UNITAL_TOL:
                raise ConstructionError(
                    f"atom {atom_id!r}: map is not unital (||T(e) - e|| = {resid:.3e} "
                    f"> {_UNITAL_TOL:.0e})"
                )

    def apply(self, x: Section) -> Section:
        if x.space != self.space:
            raise SpaceMismatchError("section over a different space")
        if x.kind != self.kind:
            raise KindMismatchError(f"section kind {x.kind} != bundle kind {self.kind}")
        return Section(self.space, self.kind, tuple(
            _apply_atom_map(m, el) for m, el in zip(self.maps, x.elems)
        ))

    @property
    def certified_positive(self) -> bool:
        return False

    def atom_norm_upper_bound(self, i: int) -> Optional[float]:
        """A certified upper bound for the map's operator norm at atom i,
        when the stored form provides one (positive unital => exactly 1)."""
        m = self.maps[i]
        if isinstance(m, (KrausMap, RotationMap)):
            return 1.0
        if isinstance(m, CoefficientMultiplierMap):
            w = m.toeplitz_window()
            if float(np.min(np.linalg.eigvalsh(0.5 * (w + w.conj().T)))) >= -1e-12 and \
                    float(np.max(np.abs(w - w.conj().T))) <= 1e-12:
                return 1.0
        return None

    @classmethod
    def from_superoperators(
        cls, space: AtomicMeasureSpace, dim: int, mats: Sequence[np.ndarray]
    ) -> "MapBundle":
        return cls(space, FiberKind.matrix(dim), tuple(SuperoperatorMap(m) for m in mats))

    @classmethod
    def identity(cls, space: AtomicMeasureSpace, kind: FiberKind) -> "MapBundle":
        if kind.is_matrix:
            d = kind.dim
            return cls(space, kind, tuple(SuperoperatorMap(np.eye(d * d)) for _ in range(len(space))))
        return cls(space, kind, tuple(RotationMap(0.0) for _ in range(len(space))))


def _random_positivity_probe(rng: np.random.Generator, d: int, idx: int) -> np.ndarray:
    # Every fourth probe is rank one: maps like x -> 2 tau(x) e - x stay
    # positive on well-conditioned Wishart inputs and only fail on
    # rank-deficient ones.
    if idx % 4 == 3:
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        return np.outer(v, v.conj())
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def _randomized_positivity_ok(
    m: AtomMap, d: int, rng: np.random.Generator, samples: int, tol: float = 1e-9
) -> tuple[bool, Optional[np.ndarray]]:
    """Check T(x* x) >= 0 for `samples` random x; returns (ok, witness)."""
    for idx in range(samples):
        g = _random_positivity_probe(rng, d, idx)
        scale = np.linalg.norm(g, 2)
        if scale > 0:
            g = g / scale
        x = MatrixFiberElement(g.conj().T @ g)
        out = _apply_atom_map(m, x)
        if not is_positive(out, tol=tol):
            return False, g
    return True, None


@dataclass(frozen=True, eq=False)
class MarkovBundle(MapBundle):
    """A MapBundle whose positivity is certified at construction.

    Structured forms (Kraus, rotation, PSD-Toeplitz multipliers) are
    certified structurally; raw superoperators get a seeded randomized
    check of T(x* x) >= 0 (`check_samples` draws per atom).  Certification
    failures raise `ConstructionError` naming the atom.
    """

    check_seed: int = 0
    check_samples: int = 200
    certificates: tuple[PositivityCertificate, ...] = field(init=False)

    def __post_init__(self) -> None:
        super().__post_init__()
        certs = []
        for i, ((atom_id, _), m) in enumerate(zip(self.space.atoms, self.maps)):
            if isinstance(m, KrausMap):
                certs.append(PositivityCertificate("kraus"))
            elif isinstance(m, RotationMap):
                certs.append(PositivityCertificate("rotation"))
            elif isinstance(m, CoefficientMultiplierMap):
                w = m.toeplitz_window()
                herm = float(np.max(np.abs(w - w.conj().T)))
                mineig = float(np.min(np.linalg.eigvalsh(0.5 * (w + w.conj().T))))
                if herm > 1e-12 or mineig < -1e-10:
                    raise ConstructionError(
                        f"atom {atom_id!r}: multiplier Toeplitz window not PSD "
                        f"(hermitian defect {herm:.2e}, min eigenvalue {mineig:.3e})"
                    )
                certs.append(PositivityCertificate("toeplitz"))
            else:
                rng = np.random.default_rng(np.random.SeedSequence(
                    entropy=self.check_seed, spawn_key=(i,)
                ))
                ok, witness = _randomized_positivity_ok(
                    m, self.kind.dim, rng, self.check_samples  # type: ignore[arg-type]
                )
                if not ok:
                    raise ConstructionError(
                        f"atom {atom_id!r}: randomized positivity check failed "
                        f"(T(x* x) has a negative eigenvalue for a sampled x; "
                        f"seed {self.check_seed}, {self.check_samples} samples)"
                    )
                certs.append(PositivityCertificate(
                    "randomized", seed=self.check_seed, samples=self.check_samples
                ))
        object.__setattr__(self, "certificates", tuple(certs))

    @property
    def certified_positive(self) -> bool:
        return True

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_kraus(
        cls, space: AtomicMeasureSpace, ops_per_atom: Sequence[Sequence[np.ndarray]]
    ) -> "MarkovBundle":
        maps = tuple(KrausMap(tuple(ops)) for ops in ops_per_atom)
        dim = maps[0].dim
        return cls(space, FiberKind.matrix(dim), maps)

    @classmethod
    def from_superoperators(
        cls,
        space: AtomicMeasureSpace,
        dim: int,
        mats: Sequence[np.ndarray],
        *,
        check_seed: int = 0,
        check_samples: int = 200,
    ) -> "MarkovBundle":
        return cls(
            space, FiberKind.matrix(dim), tuple(SuperoperatorMap(m) for m in mats),
            check_seed=check_seed, check_samples=check_samples,
        )

    @classmethod
    def rotation(
        cls, space: AtomicMeasureSpace, alphas: Sequence[float], max_degree: int
    ) -> "MarkovBundle":
        if len(alphas) != len(space):
            raise ValueError("need one rotation angle per atom")
        return cls(space, FiberKind.trigpoly(max_degree),
                   tuple(RotationMap(float(a)) for a in alphas))

    @classmethod
    def coefficient_multiplier(
        cls, space: AtomicMeasureSpace, multipliers: Sequence[np.ndarray], max_degree: int
    ) -> "MarkovBundle":
        return cls(space, FiberKind.trigpoly(max_degree),
                   tuple(CoefficientMultiplierMap(m) for m in multipliers))


def markov_apply(t: MapBundle, x: Section) -> Section:
    """Apply the bundle fiberwise: (T x)(w) = T_w(x(w))."""
    return t.apply(x)


def dual_apply(t: MapBundle, densities: Sequence[np.ndarray]) -> tuple[np.ndarray, ...]:
    """Trace dual per atom: returns sigma_w with tr(sigma_w x) = tr(rho_w T_w(x))."""
    if not t.kind.is_matrix:
        raise KindMismatchError("trace dual is defined for matrix kind")
    if len(densities) != len(t.space):
        raise ValueError("need one density per atom")
    return tuple(
        m.dual(np.asarray(rho, dtype=np.complex128))  # type: ignore[union-attr]
        for m, rho in zip(t.maps, densities)
    )


@dataclass(frozen=True)
class NormEstimate:
    """Operator-norm report for a unital map bundle.

    ``values`` is the reported per-atom norm: exactly 1 when the bundle is
    positivity-certified (positive unital maps have norm exactly 1),
    otherwise the sampled lower estimate.  ``sampled`` always carries the
    raw sampled supremum for diagnostics.  The seed and sample count are
    recorded so the report is reproducible.
    """

    values: L0Element
    sampled: L0Element
    exact_one: bool
    seed: int
    samples: int


def _norm_sample_set(
    rng: np.random.Generator, d: int, samples: int
) -> list[MatrixFiberElement]:
    out = [MatrixFiberElement.identity(d)]
    n_sau = max(1, samples // 3)
    for _ in range(n_sau):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        q, r = np.linalg.qr(g)
        q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
        signs = np.where(rng.uniform(size=d) < 0.5, -1.0, 1.0)
        out.append(MatrixFiberElement(q @ np.diag(signs) @ q.conj().T))
    while len(out) < samples:
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        nrm = np.linalg.norm(g, 2)
        if nrm > 0:
            out.append(MatrixFiberElement(g / nrm))
    return out


def markov_norm_estimate(
    t: MapBundle,
    samples: int = 64,
    *,
    seed: int = 0,
    include: Sequence[Section] = (),
) -> NormEstimate:
    """Per-atom operator-norm estimate over the unit ball.

    Samples ``fib_norm(T_w x)`` over random unit-norm elements (always
    including the unit and random self-adjoint unitaries) plus any caller
    witnesses in ``include``.  The sampled value is a lower estimate; for a
    certified positive unital bundle the reported value is exactly 1 with
    ``exact_one`` set.
    """
    if not t.kind.is_matrix:
        raise KindMismatchError("norm estimate implemented for matrix kind")
    d = t.kind.dim
    raw = np.zeros(len(t.space))
    for i, m in enumerate(t.maps):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        best = 0.0
        for x in _norm_sample_set(rng, d, samples):  # type: ignore[arg-type]
            nx = fib_norm(x)
            if nx <= 0:
                continue
            best = max(best, fib_norm(_apply_atom_map(m, x)) / nx)
        for sec in include:
            el = sec.elems[i]
            nx = fib_norm(el)
            if nx <= 0:
                continue
            best = max(best, fib_norm(_apply_atom_map(m, el)) / nx)
        raw[i] = best
    sampled = L0Element(t.space, raw)
    if t.certified_positive:
        return NormEstimate(
            values=L0Element.one(t.space), sampled=sampled,
            exact_one=True, seed=seed, samples=samples,
        )
    return NormEstimate(values=sampled, sampled=sampled, exact_one=False, seed=seed, samples=samples)


@dataclass(frozen=True)
class CriterionReport:
    """Per-atom cross-check of "positive unital <=> operator norm 1".

    ``verdicts`` holds "consistent" or "violated" per atom.  A violation
    means the two sides disagreed: positivity passed but the sampled norm
    exceeded 1 + tol, or positivity failed while a certified norm-1 upper
    bound exists.
    """

    verdicts: tuple[str, ...]
    positivity_ok: tuple[bool, ...]
    norm_estimates: L0Element
    upper_bounds: tuple[Optional[float], ...]
    seed: int
    positivity_samples: int
    norm_samples: int

    @property
    def all_consistent(self) -> bool:
        return all(v == "consistent" for v in self.verdicts)


def positivity_criterion_check(
    t: MapBundle,
    tol: float = 1e-9,
    *,
    seed: int = 0,
    positivity_samples: int = 200,
    norm_samples: int = 64,
    include: Sequence[Section] = (),
) -> CriterionReport:
    """Check both directions of the norm criterion for unital maps.

    Runs the randomized positivity test and the sampled norm estimate, and
    reports "violated" at an atom only when they genuinely disagree:
    positive but sampled norm > 1 + tol, or not positive while a certified
    upper bound says the norm is 1.  Everything else is "consistent" (a
    sampled estimate below 1 cannot refute anything; it is only a lower
    bound).
    """
    if not t.kind.is_matrix:
        raise KindMismatchError("criterion check implemented for matrix kind")
    d = t.kind.dim
    pos_ok = []
    for i, m in enumerate(t.maps):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i, 1)))
        ok, _ = _randomized_positivity_ok(m, d, rng, positivity_samples)  # type: ignore[arg-type]
        pos_ok.append(ok)
    est = markov_norm_estimate(t, norm_samples, seed=seed, include=include)
    uppers = [t.atom_norm_upper_bound(i) for i in range(len(t.space))]
    if t.certified_positive:
        uppers = [1.0 for _ in uppers]
    verdicts = []
    for i in range(len(t.space)):
        sampled_val = float(est.sampled.values[i].real)
        if pos_ok[i] and sampled_val > 1.0 + tol:
            verdicts.append("violated")
        elif not pos_ok[i] and sampled_val <= 1.0 + tol and uppers[i] is not None:
            verdicts.append("violated")
        else:
            verdicts.append("consistent")
    return CriterionReport(
        verdicts=tuple(verdicts),
        positivity_ok=tuple(pos_ok),
        norm_estimates=est.sampled,
        upper_bounds=tuple(uppers),
        seed=seed,
        positivity_samples=positivity_samples,
        norm_samples=norm_samples,
    )


# -- localization -------------------------------------------------------------


def matrix_unit_section(space: AtomicMeasureSpace, dim: int, i: int, j: int) -> Section:
    m = np.zeros((dim, dim))
    m[i, j] = 1.0
    return constant_section(space, FiberKind.matrix(dim), MatrixFiberElement(m))


def matrix_unit_probes(space: AtomicMeasureSpace, dim: int) -> list[Section]:
    """All d^2 matrix-unit sections, row-major in (i, j)."""
    return [matrix_unit_section(space, dim, i, j) for i in range(dim) for j in range(dim)]


def _find_matrix_units(probes: Sequence[Section]) -> tuple[AtomicMeasureSpace, int, dict]:
    if not probes:
        raise ValueError("need at least one probe section")
    space = probes[0].space
    kind = probes[0].kind
    if not kind.is_matrix:
        raise KindMismatchError("localization probes must be matrix kind")
    d = kind.dim
    units = {}
    for p in probes:
        if p.space != space or p.kind != kind:
            raise SpaceMismatchError("probes must share one space and kind")
        first = p.elems[0].entries  # type: ignore[union-attr]
        nz = np.argwhere(first != 0)
        if len(nz) == 1 and first[tuple(nz[0])] == 1.0:
            i, j = map(int, nz[0])
            if all(np.array_equal(el.entries, first) for el in p.elems):  # type: ignore[union-attr]
                units[(i, j)] = p
    missing = [(i, j) for i in range(d) for j in range(d) if (i, j) not in units]
    if missing:
        raise ValueError(f"probes must contain all matrix-unit sections; missing {missing}")
    return space, d, units


def _check_l0_linearity(
    global_values: Callable[[Section], L0Element],
    probes: Sequence[Section],
    rng: np.random.Generator,
    tol: float,
) -> None:
    """The localization hypothesis: the global map commutes with multiplying
    a probe by an indicator (so its values at different atoms do not mix)."""
    for p in probes[: min(3, len(probes))]:
        mask = (rng.uniform(size=len(p.space)) < 0.5).astype(np.complex128)
        chi = L0Element(p.space, mask)
        lhs = global_values(p.scale(chi)).values
        rhs = (global_values(p) * chi).values
        defect = float(np.max(np.abs(lhs - rhs)))
        if defect > tol:
            raise ValueError(
                f"global functional is not L0-linear on probes "
                f"(indicator test defect {defect:.2e} > {tol:.0e})"
            )


def state_localize(
    global_values: Callable[[Section], L0Element],
    probes: Sequence[Section],
    *,
    tol: float = 1e-12,
    check_linearity: bool = True,
    seed: int = 0,
) -> StateBundle:
    """Reconstruct a per-atom state bundle from a global functional.

    ``probes`` must contain all matrix-unit sections E_ij; the density at
    each atom is read off as ``rho[j, i] = global(E_ij)`` at that atom.
    The reconstruction must be a genuine state bundle (Hermitian/PSD/trace-1
    within construction tolerances); failures raise `ConstructionError`
    naming the offending atom.  Postcondition: re-evaluating the bundle on
    every probe reproduces the global values within ``tol`` (exactly on the
    matrix units).
    """
    space, d, units = _find_matrix_units(probes)
    if check_linearity:
        _check_l0_linearity(global_values, probes, np.random.default_rng(seed), max(tol, 1e-12))
    n = len(space)
    rhos = [np.zeros((d, d), dtype=np.complex128) for _ in range(n)]
    for (i, j), p in units.items():
        vals = global_values(p).values
        for w in range(n):
            rhos[w][j, i] = vals[w]
    bundle = StateBundle.from_densities(space, rhos)
    for p in probes:
        got = state_eval(bundle, p).values
        want = global_values(p).values
        defect = float(np.max(np.abs(got - want)))
        if defect > tol:
            raise ArithmeticError(
                f"localized state does not reproduce a probe value (defect {defect:.2e})"
            )
    return bundle


def markov_localize(
    global_map: Callable[[Section], Section],
    space: AtomicMeasureSpace,
    dim: int,
    *,
    tol: float = 1e-12,
    check_linearity: bool = True,
    seed: int = 0,
    check_samples: int = 200,
) -> MarkovBundle:
    """Reconstruct a per-atom Markov bundle from a global map on sections.

    The superoperator column for input E_ij at each atom is the vectorized
    image ``vec(global(E_ij)(w))``.  Unitality and positivity are certified
    by the MarkovBundle constructor (randomized, seeded); failures raise
    `ConstructionError` naming the atom.  Round-trip on the probes is
    asserted within ``tol``.
    """
    probes = matrix_unit_probes(space, dim)
    n = len(space)
    mats = [np.zeros((dim * dim, dim * dim), dtype=np.complex128) for _ in range(n)]
    images = {}
    for i in range(dim):
        for j in range(dim):
            img = global_map(probes[i * dim + j])
            if img.space != space or not img.kind.is_matrix or img.kind.dim != dim:
                raise KindMismatchError("global map image has wrong space or kind")
            images[(i, j)] = img
            col = i + j * dim
            for w in range(n):
                mats[w][:, col] = vec(img.elems[w].entries)  # type: ignore[union-attr]
    if check_linearity:
        rng = np.random.default_rng(seed)
        for p in probes[: min(3, len(probes))]:
            mask = (rng.uniform(size=n) < 0.5).astype(np.complex128)
            chi = L0Element(space, mask)
            lhs = global_map(p.scale(chi))
            rhs = global_map(p).scale(chi)
            if not lhs.equal(rhs, tol=max(tol, 1e-12)):
                raise ValueError("global map is not L0-linear on probes (indicator test)")
    bundle = MarkovBundle.from_superoperators(
        space, dim, mats, check_seed=seed, check_samples=check_samples
    )
    for (i, j), img in images.items():
        back = bundle.apply(probes[i * dim + j])
        if not back.equal(img, tol=tol):
            raise ArithmeticError(
                f"localized bundle does not reproduce the image of probe ({i},{j})"
            )
    return bundle


# -- invariance ---------------------------------------------------------------


def _trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def invariance_residual_routes(
    phi: StateBundle, t: MapBundle
) -> tuple[L0Element, L0Element]:
    """Matrix kind only: the invariance defect of (phi, T) computed two ways.

    Probe route: reconstruct the representing matrix of x -> phi(Tx) - phi(x)
    from its values on matrix-unit probes, and take its trace norm, the
    exact supremum of |phi(Tx) - phi(x)| over the unit ball of sections.
    Dual route: trace norm of (T† rho - rho) via the superoperator adjoint.
    """
    if not phi.kind.is_matrix:
        raise KindMismatchError("two-route residual is matrix-kind only")
    if phi.space != t.space or phi.kind != t.kind:
        raise SpaceMismatchError("state and map bundles do not match")
    d = phi.kind.dim
    n = len(phi.space)
    deltas = [np.zeros((d, d), dtype=np.complex128) for _ in range(n)]
    for i in range(d):
        for j in range(d):
            p = matrix_unit_section(phi.space, d, i, j)
            diff = (state_eval(phi, t.apply(p)) - state_eval(phi, p)).values
            for w in range(n):
                deltas[w][j, i] = diff[w]
    probe_vals = np.array([_trace_norm(m) for m in deltas])
    duals = dual_apply(t, phi.densities)  # type: ignore[arg-type]
    dual_vals = np.array([
        _trace_norm(sig - rho) for sig, rho in zip(duals, phi.densities)  # type: ignore[arg-type]
    ])
    cross = float(np.max(np.abs(probe_vals - dual_vals)))
    if cross > 1e-9:
        raise ArithmeticError(
            f"invariance residual routes disagree by {cross:.2e} (> 1e-9)"
        )
    return L0Element(phi.space, probe_vals), L0Element(phi.space, dual_vals)


def invariance_residual(phi: StateBundle, t: MapBundle) -> L0Element:
    """Per-atom size of phi∘T - phi.

    Matrix kind: the trace norm of the transported-density deviation (equal
    to the sup of |phi(Tx) - phi(x)| over the unit ball), cross-checked
    against the matrix-unit probe reconstruction within 1e-9.

    Trig kind: max over the mode probes k = -K..K of |phi(T m_k) - phi(m_k)|
    per atom (the modes span the budgeted algebra).
    """
    if phi.space != t.space or phi.kind != t.kind:
        raise SpaceMismatchError("state and map bundles do not match")
    if phi.kind.is_matrix:
        probe_vals, _ = invariance_residual_routes(phi, t)
        return probe_vals
    K = phi.kind.max_degree
    worst = np.zeros(len(phi.space))
    for k in range(-K, K + 1):  # type: ignore[arg-type, operator]
        p = constant_section(phi.space, phi.kind, TrigPolyFiberElement.mode(k))
        diff = np.abs((state_eval(phi, t.apply(p)) - state_eval(phi, p)).values)
        worst = np.maximum(worst, diff)
    return L0Element(phi.space, worst)
