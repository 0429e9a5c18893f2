"""Self-describing JSON documents for sections, state bundles, Markov
bundles, and the probe-value files consumed by the localization CLI.

Conventions shared by every schema:

* a ``schema`` tag ("fiberdyn/section", "fiberdyn/state_bundle",
  "fiberdyn/markov_bundle", "fiberdyn/global_state_values",
  "fiberdyn/global_markov_values");
* a ``space`` block with atom ids and weights;
* complex data as ``[re, im]`` pairs; matrices flattened row-major;
* trig coefficient vectors listed c_{-K} .. c_K.

Serialization is deterministic (sorted keys, two-space indent) and floats
round-trip exactly, so dump -> load -> dump is byte-stable and load -> dump
of a golden file reproduces it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import ConfigError
from .fibers import FiberKind, MatrixFiberElement, TrigPolyFiberElement
from .measure import AtomicMeasureSpace, L0Element
from .markov import (
    CoefficientMultiplierMap,
    KrausMap,
    MarkovBundle,
    RotationMap,
    SuperoperatorMap,
    matrix_unit_probes,
)
from .sections import Section
from .states import StateBundle, TrigState

__all__ = [
    "dumps",
    "loads",
    "section_to_dict",
    "section_from_dict",
    "state_bundle_to_dict",
    "state_bundle_from_dict",
    "markov_bundle_to_dict",
    "markov_bundle_from_dict",
    "GlobalStateValues",
    "GlobalMarkovValues",
    "global_state_values_to_dict",
    "global_markov_values_to_dict",
]


def _fail(msg: str) -> ConfigError:
    # Malformed documents are usage errors (CLI exit 2); invariant
    # violations inside well-formed documents surface as ConstructionError
    # from the bundle constructors instead (CLI exit 1).
    return ConfigError(f"document: {msg}")


# -- primitives ------------------------------------------------------------


def _space_to(space: AtomicMeasureSpace) -> dict:
    return {
        "atom_ids": list(space.atom_ids),
        "weights": [float(w) for w in space.weights],
    }


def _space_from(doc: dict) -> AtomicMeasureSpace:
    try:
        ids = doc["atom_ids"]
        weights = doc["weights"]
    except (KeyError, TypeError):
        raise _fail("space block needs 'atom_ids' and 'weights'") from None
    if len(ids) != len(weights):
        raise _fail("space block has mismatched atom_ids/weights lengths")
    return AtomicMeasureSpace(tuple((str(i), float(w)) for i, w in zip(ids, weights)))


def _kind_to(kind: FiberKind) -> dict:
    if kind.is_matrix:
        return {"kind": "matrix", "dim": kind.dim}
    return {"kind": "trigpoly", "max_degree": kind.max_degree}


def _kind_from(doc: dict) -> FiberKind:
    tag = doc.get("kind")
    if tag == "matrix":
        return FiberKind.matrix(int(doc["dim"]))
    if tag == "trigpoly":
        return FiberKind.trigpoly(int(doc["max_degree"]))
    raise _fail(f"unknown fiber kind {tag!r}")


def _cvec_to(values: np.ndarray) -> list:
    flat = np.asarray(values, dtype=np.complex128).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _cvec_from(pairs: list, expected: int, what: str) -> np.ndarray:
    if len(pairs) != expected:
        raise _fail(f"{what}: expected {expected} complex entries, got {len(pairs)}")
    out = np.empty(expected, dtype=np.complex128)
    for i, p in enumerate(pairs):
        if not isinstance(p, (list, tuple)) or len(p) != 2:
            raise _fail(f"{what}: entry {i} is not an [re, im] pair")
        out[i] = complex(float(p[0]), float(p[1]))
    return out


def _mat_to(m: np.ndarray) -> list:
    return _cvec_to(np.asarray(m).reshape(-1))


def _mat_from(pairs: list, d: int, what: str) -> np.ndarray:
    return _cvec_from(pairs, d * d, what).reshape(d, d)


# -- sections --------------------------------------------------------------


def section_to_dict(s: Section) -> dict:
    if s.kind.is_matrix:
        elems = [_mat_to(el.entries) for el in s.elems]  # type: ignore[union-attr]
    else:
        K = s.kind.max_degree
        elems = [_cvec_to(el.padded(K).coeffs) for el in s.elems]  # type: ignore[union-attr, arg-type]
    return {
        "schema": "fiberdyn/section",
        "space": _space_to(s.space),
        "fiber": _kind_to(s.kind),
        "elements": elems,
    }


def section_from_dict(doc: dict) -> Section:
    if doc.get("schema") != "fiberdyn/section":
        raise _fail("not a fiberdyn/section document")
    space = _space_from(doc["space"])
    kind = _kind_from(doc["fiber"])
    rows = doc.get("elements")
    if not isinstance(rows, list) or len(rows) != len(space):
        raise _fail("'elements' must list one entry per atom")
    if kind.is_matrix:
        elems = tuple(
            MatrixFiberElement(_mat_from(r, kind.dim, f"element {i}"))
            for i, r in enumerate(rows)
        )
    else:
        n = 2 * kind.max_degree + 1  # type: ignore[operator]
        elems = tuple(
            TrigPolyFiberElement(_cvec_from(r, n, f"element {i}"))
            for i, r in enumerate(rows)
        )
    return Section(space, kind, elems)


# -- state bundles ----------------------------------------------------------


def _trig_state_to(st: TrigState) -> dict:
    if st.tag == "lebesgue":
        return {"form": "lebesgue"}
    if st.tag == "point_mass":
        return {"form": "point_mass", "t0": float(st.t0)}  # type: ignore[arg-type]
    return {
        "form": "mixture",
        "weights": [float(w) for w in st.weights],  # type: ignore[union-attr]
        "points": [float(t) for t in st.points],  # type: ignore[union-attr]
    }


def _trig_state_from(doc: dict) -> TrigState:
    form = doc.get("form")
    if form == "lebesgue":
        return TrigState("lebesgue")
    if form == "point_mass":
        return TrigState("point_mass", t0=float(doc["t0"]))
    if form == "mixture":
        return TrigState(
            "mixture",
            weights=tuple(float(w) for w in doc["weights"]),
            points=tuple(float(t) for t in doc["points"]),
        )
    raise _fail(f"unknown trig state form {form!r}")


def state_bundle_to_dict(phi: StateBundle) -> dict:
    doc = {
        "schema": "fiberdyn/state_bundle",
        "space": _space_to(phi.space),
        "fiber": _kind_to(phi.kind),
    }
    if phi.kind.is_matrix:
        doc["densities"] = [_mat_to(rho) for rho in phi.densities]  # type: ignore[union-attr]
    else:
        doc["states"] = [_trig_state_to(st) for st in phi.trig_states]  # type: ignore[union-attr]
    return doc


def state_bundle_from_dict(doc: dict) -> StateBundle:
    if doc.get("schema") != "fiberdyn/state_bundle":
        raise _fail("not a fiberdyn/state_bundle document")
    space = _space_from(doc["space"])
    kind = _kind_from(doc["fiber"])
    if kind.is_matrix:
        rows = doc.get("densities")
        if not isinstance(rows, list) or len(rows) != len(space):
            raise _fail("'densities' must list one matrix per atom")
        mats = tuple(
            _mat_from(r, kind.dim, f"density {i}") for i, r in enumerate(rows)
        )
        return StateBundle(space, kind, densities=mats)
    rows = doc.get("states")
    if not isinstance(rows, list) or len(rows) != len(space):
        raise _fail("'states' must list one state per atom")
    return StateBundle(
        space, kind, trig_states=tuple(_trig_state_from(r) for r in rows)
    )


# -- markov bundles ----------------------------------------------------------


def markov_bundle_to_dict(t: MarkovBundle) -> dict:
    doc = {
        "schema": "fiberdyn/markov_bundle",
        "space": _space_to(t.space),
        "fiber": _kind_to(t.kind),
    }
    m0 = t.maps[0]
    if isinstance(m0, KrausMap):
        doc["form"] = "kraus"
        doc["operators"] = [[_mat_to(k) for k in m.ops] for m in t.maps]  # type: ignore[union-attr]
    elif isinstance(m0, SuperoperatorMap):
        doc["form"] = "superoperator"
        doc["matrices"] = [_mat_to(m.matrix) for m in t.maps]  # type: ignore[union-attr]
    elif isinstance(m0, RotationMap):
        doc["form"] = "rotation"
        doc["alphas"] = [float(m.alpha) for m in t.maps]  # type: ignore[union-attr]
    elif isinstance(m0, CoefficientMultiplierMap):
        doc["form"] = "coefficient_multiplier"
        doc["multipliers"] = [_cvec_to(m.multipliers) for m in t.maps]  # type: ignore[union-attr]
    else:
        raise _fail(f"cannot serialize map type {type(m0).__name__}")
    return doc


def markov_bundle_from_dict(doc: dict) -> MarkovBundle:
    """Rebuild a Markov bundle; unitality and positivity certification run
    as part of construction, so a corrupted document raises
    `ConstructionError` naming the offending atom."""
    if doc.get("schema") != "fiberdyn/markov_bundle":
        raise _fail("not a fiberdyn/markov_bundle document")
    space = _space_from(doc["space"])
    kind = _kind_from(doc["fiber"])
    form = doc.get("form")
    if form == "kraus":
        if not kind.is_matrix:
            raise _fail("kraus form requires a matrix fiber")
        rows = doc["operators"]
        if len(rows) != len(space):
            raise _fail("'operators' must list one Kraus family per atom")
        ops = [
            [_mat_from(k, kind.dim, f"kraus op {i}.{j}") for j, k in enumerate(fam)]
            for i, fam in enumerate(rows)
        ]
        return MarkovBundle.from_kraus(space, ops)
    if form == "superoperator":
        if not kind.is_matrix:
            raise _fail("superoperator form requires a matrix fiber")
        rows = doc["matrices"]
        if len(rows) != len(space):
            raise _fail("'matrices' must list one superoperator per atom")
        d2 = kind.dim * kind.dim  # type: ignore[operator]
        mats = [_mat_from(r, d2, f"superoperator {i}") for i, r in enumerate(rows)]
        return MarkovBundle.from_superoperators(space, kind.dim, mats)  # type: ignore[arg-type]
    if form == "rotation":
        if not kind.is_trigpoly:
            raise _fail("rotation form requires a trigpoly fiber")
        alphas = [float(a) for a in doc["alphas"]]
        if len(alphas) != len(space):
            raise _fail("'alphas' must list one angle per atom")
        return MarkovBundle.rotation(space, alphas, kind.max_degree)  # type: ignore[arg-type]
    if form == "coefficient_multiplier":
        if not kind.is_trigpoly:
            raise _fail("coefficient_multiplier form requires a trigpoly fiber")
        rows = doc["multipliers"]
        if len(rows) != len(space):
            raise _fail("'multipliers' must list one vector per atom")
        n = 2 * kind.max_degree + 1  # type: ignore[operator]
        mults = [_cvec_from(r, n, f"multipliers {i}") for i, r in enumerate(rows)]
        return MarkovBundle.coefficient_multiplier(space, mults, kind.max_degree)  # type: ignore[arg-type]
    raise _fail(f"unknown markov bundle form {form!r}")


# -- probe-value documents (localization inputs) ------------------------------


@dataclass(frozen=True)
class GlobalStateValues:
    """Values of a global functional on the matrix-unit probes: one complex
    value per (probe, atom), probes in row-major (i, j) order.

    `as_callable` returns the L0-linear functional these values induce,
    suitable for `state_localize` together with `probes`.
    """

    space: AtomicMeasureSpace
    dim: int
    values: np.ndarray  # shape (dim*dim, len(space)), complex

    def __post_init__(self) -> None:
        arr = np.array(np.asarray(self.values, dtype=np.complex128))
        if arr.shape != (self.dim * self.dim, len(self.space)):
            raise _fail("global state values have the wrong shape")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def probes(self) -> list[Section]:
        return matrix_unit_probes(self.space, self.dim)

    def as_callable(self) -> Callable[[Section], L0Element]:
        d = self.dim

        def phi(s: Section) -> L0Element:
            out = np.zeros(len(self.space), dtype=np.complex128)
            for w, el in enumerate(s.elems):
                ent = el.entries  # type: ignore[union-attr]
                for i in range(d):
                    for j in range(d):
                        out[w] += ent[i, j] * self.values[i * d + j, w]
            return L0Element(self.space, out)

        return phi


@dataclass(frozen=True)
class GlobalMarkovValues:
    """Images of the matrix-unit probes under a global map: one matrix per
    (probe, atom), probes row-major.  `as_callable` induces the L0-linear
    global map for `markov_localize`."""

    space: AtomicMeasureSpace
    dim: int
    images: np.ndarray  # shape (dim*dim, len(space), dim, dim), complex

    def __post_init__(self) -> None:
        arr = np.array(np.asarray(self.images, dtype=np.complex128))
        d = self.dim
        if arr.shape != (d * d, len(self.space), d, d):
            raise _fail("global markov values have the wrong shape")
        arr.setflags(write=False)
        object.__setattr__(self, "images", arr)

    def as_callable(self) -> Callable[[Section], Section]:
        d = self.dim
        kind = FiberKind.matrix(d)

        def tmap(s: Section) -> Section:
            elems = []
            for w, el in enumerate(s.elems):
                ent = el.entries  # type: ignore[union-attr]
                acc = np.zeros((d, d), dtype=np.complex128)
                for i in range(d):
                    for j in range(d):
                        acc += ent[i, j] * self.images[i * d + j, w]
                elems.append(MatrixFiberElement(acc))
            return Section(self.space, kind, tuple(elems))

        return tmap


def global_state_values_to_dict(g: GlobalStateValues) -> dict:
    return {
        "schema": "fiberdyn/global_state_values",
        "space": _space_to(g.space),
        "dim": g.dim,
        "values": [_cvec_to(row) for row in g.values],
    }


def _global_state_values_from(doc: dict) -> GlobalStateValues:
    space = _space_from(doc["space"])
    d = int(doc["dim"])
    rows = doc.get("values")
    if not isinstance(rows, list) or len(rows) != d * d:
        raise _fail("'values' must list one row per matrix-unit probe (d*d rows)")
    vals = np.stack([
        _cvec_from(r, len(space), f"probe row {i}") for i, r in enumerate(rows)
    ])
    return GlobalStateValues(space, d, vals)


def global_markov_values_to_dict(g: GlobalMarkovValues) -> dict:
    return {
        "schema": "fiberdyn/global_markov_values",
        "space": _space_to(g.space),
        "dim": g.dim,
        "images": [
            [_mat_to(g.images[p, w]) for w in range(len(g.space))]
            for p in range(g.dim * g.dim)
        ],
    }


def _global_markov_values_from(doc: dict) -> GlobalMarkovValues:
    space = _space_from(doc["space"])
    d = int(doc["dim"])
    rows = doc.get("images")
    if not isinstance(rows, list) or len(rows) != d * d:
        raise _fail("'images' must list one row per matrix-unit probe (d*d rows)")
    imgs = np.zeros((d * d, len(space), d, d), dtype=np.complex128)
    for p, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != len(space):
            raise _fail(f"probe row {p} must list one matrix per atom")
        for w, m in enumerate(row):
            imgs[p, w] = _mat_from(m, d, f"image {p}.{w}")
    return GlobalMarkovValues(space, d, imgs)


# -- document-level API --------------------------------------------------------

Document = Union[
    Section, StateBundle, MarkovBundle, GlobalStateValues, GlobalMarkovValues
]

_WRITERS = {
    Section: section_to_dict,
    StateBundle: state_bundle_to_dict,
    MarkovBundle: markov_bundle_to_dict,
    GlobalStateValues: global_state_values_to_dict,
    GlobalMarkovValues: global_markov_values_to_dict,
}

_READERS = {
    "fiberdyn/section": section_from_dict,
    "fiberdyn/state_bundle": state_bundle_from_dict,
    "fiberdyn/markov_bundle": markov_bundle_from_dict,
    "fiberdyn/global_state_values": _global_state_values_from,
    "fiberdyn/global_markov_values": _global_markov_values_from,
}


def dumps(obj: Document) -> str:
    """Deterministic JSON text (sorted keys, indented, trailing newline)."""
    for cls, writer in _WRITERS.items():
        if isinstance(obj, cls):
            return json.dumps(writer(obj), sort_keys=True, indent=2) + "\n"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def loads(text: str) -> Document:
    """Parse any fiberdyn document, dispatching on its 'schema' tag."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _fail(f"invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise _fail("top level must be an object")
    reader = _READERS.get(doc.get("schema"))
    if reader is None:
        raise _fail(f"unknown schema {doc.get('schema')!r}")
    return reader(doc)
