"""Fiber algebras: full matrix algebras and trigonometric polynomials.

Two concrete *-algebras are supported as fibers:

* ``M_d(C)`` with the operator (spectral) norm, adjoint = conjugate
  transpose.
* Trigonometric polynomials on the unit circle, stored as coefficient
  vectors ``c_{-K} .. c_K`` for ``p(t) = sum_k c_k exp(2 pi i k t)`` with
  ``t in [0, 1)``.  Product is coefficient convolution (degrees add; an
  over-budget product raises `DegreeBudgetError` rather than truncating),
  adjoint is ``c_k -> conj(c_{-k})``, and the sup norm is evaluated on a
  uniform grid of ``M = 64 * (2K + 1)`` points.  By the Bernstein
  derivative inequality the grid max undershoots the true sup by a relative
  factor of at most ``pi * (2K + 1) / M = pi / 64`` (about 4.9%); see
  `trig_norm_error_bound`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DegreeBudgetError, KindMismatchError

__all__ = [
    "GRID_FACTOR",
    "FiberKind",
    "MatrixFiberElement",
    "TrigPolyFiberElement",
    "FiberElement",
    "fib_add",
    "fib_sub",
    "fib_scale",
    "fib_mul",
    "fib_adjoint",
    "fib_unit",
    "fib_zero",
    "fib_norm",
    "fib_equal",
    "trig_values",
    "trig_norm_error_bound",
    "c_star_identity_residual",
    "is_positive",
    "tensor",
    "conditional_expectation",
    "matrix_exp",
]

# Grid points per coefficient used by the trig sup-norm evaluation.
GRID_FACTOR = 64

_HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class FiberKind:
    """Declares which fiber algebra a bundle lives in.

    ``tag`` is ``"matrix"`` (with ``dim``) or ``"trigpoly"`` (with
    ``max_degree``, the degree budget that products may not exceed).
    """

    tag: str
    dim: Optional[int] = None
    max_degree: Optional[int] = None

    def __post_init__(self) -> None:
        if self.tag == "matrix":
            if not isinstance(self.dim, int) or self.dim < 1:
                raise ValueError("matrix kind needs dim >= 1")
            if self.max_degree is not None:
                raise ValueError("matrix kind takes no degree budget")
        elif self.tag == "trigpoly":
            if not isinstance(self.max_degree, int) or self.max_degree < 0:
                raise ValueError("trigpoly kind needs max_degree >= 0")
            if self.dim is not None:
                raise ValueError("trigpoly kind takes no dim")
        else:
            raise ValueError(f"unknown fiber kind tag {self.tag!r}")

    @classmethod
    def matrix(cls, dim: int) -> "FiberKind":
        return cls(tag="matrix", dim=dim)

    @classmethod
    def trigpoly(cls, max_degree: int) -> "FiberKind":
        return cls(tag="trigpoly", max_degree=max_degree)

    @property
    def is_matrix(self) -> bool:
        return self.tag == "matrix"

    @property
    def is_trigpoly(self) -> bool:
        return self.tag == "trigpoly"


def _ro(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.complex128)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class MatrixFiberElement:
    """An element of M_d(C)."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.entries, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {arr.shape}")
        object.__setattr__(self, "entries", _ro(arr))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "MatrixFiberElement":
        return cls(np.eye(dim))

    @classmethod
    def zero(cls, dim: int) -> "MatrixFiberElement":
        return cls(np.zeros((dim, dim)))

    def conforms(self, kind: FiberKind) -> bool:
        return kind.is_matrix and self.dim == kind.dim

    def __repr__(self) -> str:
        return f"MatrixFiberElement(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class TrigPolyFiberElement:
    """A trig polynomial, coefficients ``c_{-K} .. c_K`` in index order."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.coeffs, dtype=np.complex128)
        if arr.ndim != 1 or arr.size % 2 != 1:
            raise ValueError(
                f"expected an odd-length coefficient vector c_-K..c_K, got shape {arr.shape}"
            )
        object.__setattr__(self, "coeffs", _ro(arr))

    @property
    def degree(self) -> int:
        return (self.coeffs.size - 1) // 2

    def coeff(self, k: int) -> complex:
        """Coefficient of exp(2 pi i k t); zero beyond the stored degree."""
        if abs(k) > self.degree:
            return 0.0 + 0.0j
        return complex(self.coeffs[k + self.degree])

    @classmethod
    def mode(cls, k: int, amplitude: complex = 1.0) -> "TrigPolyFiberElement":
        """The single mode ``amplitude * exp(2 pi i k t)``."""
        K = abs(k)
        c = np.zeros(2 * K + 1, dtype=np.complex128)
        c[k + K] = amplitude
        return cls(c)

    @classmethod
    def constant(cls, value: complex) -> "TrigPolyFiberElement":
        return cls(np.array([value], dtype=np.complex128))

    @classmethod
    def zero(cls, degree: int = 0) -> "TrigPolyFiberElement":
        return cls(np.zeros(2 * degree + 1, dtype=np.complex128))

    def padded(self, degree: int) -> "TrigPolyFiberElement":
        """Same polynomial stored with degree ``degree`` (>= current)."""
        if degree < self.degree:
            raise ValueError("cannot pad to a smaller degree")
        if degree == self.degree:
            return self
        pad = degree - self.degree
        return TrigPolyFiberElement(np.pad(self.coeffs, (pad, pad)))

    def conforms(self, kind: FiberKind) -> bool:
        return kind.is_trigpoly and self.degree <= kind.max_degree  # type: ignore[operator]

    def __repr__(self) -> str:
        return f"TrigPolyFiberElement(degree={self.degree})"


FiberElement = Union[MatrixFiberElement, TrigPolyFiberElement]


def _check_same_flavor(a: FiberElement, b: FiberElement) -> None:
    if isinstance(a, MatrixFiberElement) and isinstance(b, MatrixFiberElement):
        if a.dim != b.dim:
            raise KindMismatchError(f"matrix sizes differ: {a.dim} vs {b.dim}")
        return
    if isinstance(a, TrigPolyFiberElement) and isinstance(b, TrigPolyFiberElement):
        return
    raise KindMismatchError(f"incompatible fiber elements: {type(a).__name__} vs {type(b).__name__}")


def fib_add(a: FiberElement, b: FiberElement) -> FiberElement:
    _check_same_flavor(a, b)
    if isinstance(a, MatrixFiberElement):
        return MatrixFiberElement(a.entries + b.entries)  # type: ignore[union-attr]
    K = max(a.degree, b.degree)  # type: ignore[union-attr]
    return TrigPolyFiberElement(a.padded(K).coeffs + b.padded(K).coeffs)  # type: ignore[union-attr]


def fib_sub(a: FiberElement, b: FiberElement) -> FiberElement:
    return fib_add(a, fib_scale(b, -1.0))


def fib_scale(a: FiberElement, lam: complex) -> FiberElement:
    if isinstance(a, MatrixFiberElement):
        return MatrixFiberElement(a.entries * lam)
    return TrigPolyFiberElement(a.coeffs * lam)


def fib_mul(
    a: FiberElement, b: FiberElement, max_degree: Optional[int] = None
) -> FiberElement:
    """Fiber product.  For trig polys, degrees add: ``deg(ab) = deg a + deg b``.

    If ``max_degree`` is given and the product degree would exceed it, raises
    `DegreeBudgetError`; no silent truncation.
    """
    _check_same_flavor(a, b)
    if isinstance(a, MatrixFiberElement):
        return MatrixFiberElement(a.entries @ b.entries)  # type: ignore[union-attr]
    out_degree = a.degree + b.degree  # type: ignore[union-attr]
    if max_degree is not None and out_degree > max_degree:
        raise DegreeBudgetError(
            f"product degree {out_degree} exceeds budget {max_degree} "
            f"({a.degree} + {b.degree})"  # type: ignore[union-attr]
        )
    return TrigPolyFiberElement(np.convolve(a.coeffs, b.coeffs))  # type: ignore[union-attr]


def fib_adjoint(a: FiberElement) -> FiberElement:
    if isinstance(a, MatrixFiberElement):
        return MatrixFiberElement(a.entries.conj().T)
    return TrigPolyFiberElement(np.conj(a.coeffs[::-1]))


def fib_unit(kind: FiberKind) -> FiberElement:
    if kind.is_matrix:
        return MatrixFiberElement.identity(kind.dim)  # type: ignore[arg-type]
    return TrigPolyFiberElement.constant(1.0)


def fib_zero(kind: FiberKind) -> FiberElement:
    if kind.is_matrix:
        return MatrixFiberElement.zero(kind.dim)  # type: ignore[arg-type]
    return TrigPolyFiberElement.zero(0)


def fib_equal(a: FiberElement, b: FiberElement, tol: float = 0.0) -> bool:
    """Entrywise/coefficientwise equality within ``tol`` (default exact)."""
    _check_same_flavor(a, b)
    if isinstance(a, MatrixFiberElement):
        return bool(np.all(np.abs(a.entries - b.entries) <= tol))  # type: ignore[union-attr]
    K = max(a.degree, b.degree)  # type: ignore[union-attr]
    return bool(np.all(np.abs(a.padded(K).coeffs - b.padded(K).coeffs) <= tol))  # type: ignore[union-attr]


def trig_grid_size(degree: int) -> int:
    return GRID_FACTOR * (2 * degree + 1)


def trig_values(a: TrigPolyFiberElement, n_points: Optional[int] = None) -> np.ndarray:
    """Values of ``a`` at the uniform grid ``t_j = j / M``, ``j = 0..M-1``.

    Computed by placing the coefficients into a length-M spectrum and running
    one inverse FFT; identical (to the last ulp pattern of the FFT) to the
    naive evaluation of sum_k c_k exp(2 pi i k t_j).
    """
    M = trig_grid_size(a.degree) if n_points is None else int(n_points)
    if M < 2 * a.degree + 1:
        raise ValueError("grid too coarse to represent the polynomial")
    K = a.degree
    spec = np.zeros(M, dtype=np.complex128)
    for k in range(-K, K + 1):
        spec[k % M] += a.coeffs[k + K]
    return np.fft.ifft(spec) * M


def trig_norm_error_bound(degree: int) -> float:
    """Relative undershoot bound for the grid sup norm.

    For a trig polynomial of degree K sampled at M uniform points, Bernstein's
    inequality ``sup |p'| <= 2 pi K sup |p|`` gives
    ``grid max >= (1 - pi K / M) * sup |p|``; with the package grid
    ``M = 64 (2K + 1)`` the relative gap is at most ``pi (2K+1) / M = pi/64``.
    Returned as that constant (independent of the degree for the default
    grid), so ``sup |p| <= grid_max / (1 - bound)``.
    """
    M = trig_grid_size(degree)
    return float(np.pi * (2 * degree + 1) / M)


def fib_norm(a: FiberElement) -> float:
    """Fiber norm: largest singular value (matrix) or grid sup norm (trig)."""
    if isinstance(a, MatrixFiberElement):
        if a.dim == 1:
            return float(np.abs(a.entries[0, 0]))
        return float(np.linalg.norm(a.entries, 2))
    return float(np.max(np.abs(trig_values(a))))


def c_star_identity_residual(a: FiberElement, max_degree: Optional[int] = None) -> float:
    """| ||a* a|| - ||a||^2 |, the defect in the C*-identity."""
    n = fib_norm(a)
    m = fib_norm(fib_mul(fib_adjoint(a), a, max_degree=max_degree))
    return abs(m - n * n)


def is_positive(a: FiberElement, tol: float = 1e-10) -> bool:
    """Positivity in the fiber algebra, up to ``tol``.

    Matrix: Hermitian within ``tol`` and min eigenvalue >= -tol.
    Trig poly: real-valued within ``tol`` (c_{-k} = conj(c_k)) and grid
    min of the real part >= -tol.
    """
    if isinstance(a, MatrixFiberElement):
        herm_defect = float(np.max(np.abs(a.entries - a.entries.conj().T))) if a.dim else 0.0
        if herm_defect > tol:
            return False
        sym = 0.5 * (a.entries + a.entries.conj().T)
        return bool(np.min(np.linalg.eigvalsh(sym)) >= -tol)
    real_defect = float(np.max(np.abs(a.coeffs - np.conj(a.coeffs[::-1]))))
    if real_defect > tol:
        return False
    return bool(np.min(trig_values(a).real) >= -tol)


def tensor(a: MatrixFiberElement, b: MatrixFiberElement) -> MatrixFiberElement:
    """Kronecker product; both factors must have the same dimension d,
    giving an element of M_{d^2}.  Index convention is row-major:
    entry ((i,k),(j,l)) of the product sits at (i*d + k, j*d + l)."""
    if not isinstance(a, MatrixFiberElement) or not isinstance(b, MatrixFiberElement):
        raise KindMismatchError("tensor is defined for matrix fibers")
    if a.dim != b.dim:
        raise KindMismatchError(f"tensor factors must have equal dims, got {a.dim}, {b.dim}")
    return MatrixFiberElement(np.kron(a.entries, b.entries))


def conditional_expectation(x: MatrixFiberElement) -> MatrixFiberElement:
    """Normalized partial trace over the second tensor factor.

    For ``x`` in M_{d^2} = M_d (x) M_d,
    ``E(x)[i, j] = (1/d) sum_k x[(i,k), (j,k)]``.  It is unital, positive,
    and satisfies ``E(a (x) b) = (tr(b)/d) a``.
    """
    D = x.dim
    d = int(round(np.sqrt(D)))
    if d * d != D:
        raise ValueError(f"dimension {D} is not a perfect square")
    blocks = x.entries.reshape(d, d, d, d)  # [i, k, j, l]
    out = np.einsum("ikjk->ij", blocks) / d
    return MatrixFiberElement(out)


def matrix_exp(h: MatrixFiberElement, beta: float = 1.0) -> MatrixFiberElement:
    """``exp(beta * h)`` for Hermitian ``h``, via eigendecomposition.

    Rejects non-Hermitian input (defect above 1e-12) and |beta| > 300
    (exp would overflow well before 709 once results get squared downstream).
    The result is explicitly re-symmetrized so it is Hermitian to the last
    bit.
    """
    defect = float(np.max(np.abs(h.entries - h.entries.conj().T)))
    if defect > _HERMITIAN_TOL:
        raise ValueError(f"matrix_exp requires a Hermitian matrix (defect {defect:.2e})")
    if not np.isfinite(beta) or abs(beta) > 300.0:
        raise ValueError(f"|beta| must be <= 300 to avoid overflow, got {beta!r}")
    w, u = np.linalg.eigh(0.5 * (h.entries + h.entries.conj().T))
    m = (u * np.exp(beta * w)) @ u.conj().T
    return MatrixFiberElement(0.5 * (m + m.conj().T))
