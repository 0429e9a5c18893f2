"""Experiment configuration: a small TOML surface mapped onto frozen
dataclasses, plus the system builder the CLI and scripts share.

Layout (all tables optional unless a selector requires a key):

    [space]
    atoms = 3                 # count, ids generated as w0, w1, ...
    # atom_ids = ["a", "b"]   # or explicit ids
    # weights = [1.0, 2.0]    # default: 1.0 each
    # (ignored for custom experiments: serialized bundles carry their space)

    [experiment]
    id = "example1"            # example1 | example2 | custom
    betas = [0.0, 0.5, 1.0]    # example1: one per atom (or one, broadcast)
    # alphas = [0.618...]      # example2
    # degree_budget = 16       # example2
    # state_file = "phi.json"  # custom: serialized bundles, paths relative
    # markov_file = "t.json"   # to the config file

    [run]
    n_grid = [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000]
    seed = 0

    [tolerances]
    invariance = 1e-10
    side_condition = 1e-10
    fixed_point = 1e-10
    closed_form = 1e-12

    [output]
    dir = "out"

Unknown keys are rejected and every validation message names the offending
field; the CLI maps `ConfigError` to exit code 2.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

try:
    import tomllib as _toml  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as _toml

from .dynamics import (
    DEFAULT_N_GRID,
    DynamicalSystemBundle,
    build_dilation_channel_system,
    build_rotation_system,
)
from .errors import ConfigError
from .fibers import FiberKind, MatrixFiberElement, TrigPolyFiberElement
from .markov import MarkovBundle
from .measure import AtomicMeasureSpace
from .sections import Section
from .states import StateBundle

__all__ = [
    "DEFAULTS",
    "Tolerances",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "build_system",
    "seeded_observable",
    "config_metadata",
]

DEFAULTS = {
    "space.atoms": 3,
    "experiment.degree_budget": 16,
    "run.n_grid": DEFAULT_N_GRID,
    "run.seed": 0,
    "tolerances.invariance": 1e-10,
    "tolerances.side_condition": 1e-10,
    "tolerances.fixed_point": 1e-10,
    "tolerances.closed_form": 1e-12,
    "output.dir": "out",
}


@dataclass(frozen=True)
class Tolerances:
    invariance: float = DEFAULTS["tolerances.invariance"]
    side_condition: float = DEFAULTS["tolerances.side_condition"]
    fixed_point: float = DEFAULTS["tolerances.fixed_point"]
    closed_form: float = DEFAULTS["tolerances.closed_form"]

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and v > 0 and np.isfinite(v)):
                raise ConfigError(f"tolerances.{f.name} must be a positive number")


@dataclass(frozen=True)
class ExperimentConfig:
    space: AtomicMeasureSpace
    example: str
    betas: Optional[tuple[float, ...]] = None
    alphas: Optional[tuple[float, ...]] = None
    degree_budget: int = DEFAULTS["experiment.degree_budget"]
    state_file: Optional[Path] = None
    markov_file: Optional[Path] = None
    n_grid: tuple[int, ...] = DEFAULTS["run.n_grid"]
    seed: int = DEFAULTS["run.seed"]
    tolerances: Tolerances = Tolerances()
    out_dir: Path = Path(DEFAULTS["output.dir"])

    def __post_init__(self) -> None:
        if self.example not in ("example1", "example2", "custom"):
            raise ConfigError(
                f"experiment.id must be example1, example2, or custom"
                f" (got {self.example!r})"
            )
        grid = self.n_grid
        if not grid or grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("run.n_grid must be strictly increasing, starting >= 1")
        if self.example == "example1" and self.betas is None:
            raise ConfigError("experiment.betas is required for example1")
        if self.example == "example2" and self.alphas is None:
            raise ConfigError("experiment.alphas is required for example2")
        if self.example == "custom":
            if self.state_file is None or self.markov_file is None:
                raise ConfigError(
                    "experiment.state_file and experiment.markov_file are "
                    "required for custom experiments"
                )
        if self.degree_budget < 1:
            raise ConfigError("experiment.degree_budget must be >= 1")


def _reject_unknown(table: dict, name: str, allowed: set) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {name}.{key}")


def _per_atom(values, count: int, field: str) -> tuple[float, ...]:
    try:
        vals = [float(v) for v in values]
    except (TypeError, ValueError):
        raise ConfigError(f"{field} must be a list of numbers") from None
    if len(vals) == 1:
        vals = vals * count
    if len(vals) != count:
        raise ConfigError(
            f"{field} must have one entry per atom ({count}) or a single entry"
        )
    if not all(np.isfinite(v) for v in vals):
        raise ConfigError(f"{field} entries must be finite")
    return tuple(vals)


def _parse_space(table: dict) -> AtomicMeasureSpace:
    _reject_unknown(table, "space", {"atoms", "atom_ids", "weights"})
    ids = table.get("atom_ids")
    if ids is not None:
        if not isinstance(ids, list) or not ids or not all(isinstance(i, str) for i in ids):
            raise ConfigError("space.atom_ids must be a nonempty list of strings")
        ids = [str(i) for i in ids]
        if "atoms" in table and int(table["atoms"]) != len(ids):
            raise ConfigError("space.atoms disagrees with len(space.atom_ids)")
    else:
        count = table.get("atoms", DEFAULTS["space.atoms"])
        if not isinstance(count, int) or count < 1:
            raise ConfigError("space.atoms must be a positive integer")
        ids = [f"w{i}" for i in range(count)]
    weights = table.get("weights")
    if weights is None:
        weights = [1.0] * len(ids)
    if not isinstance(weights, list) or len(weights) != len(ids):
        raise ConfigError("space.weights must list one weight per atom")
    try:
        weights = [float(w) for w in weights]
    except (TypeError, ValueError):
        raise ConfigError("space.weights must be numbers") from None
    if any(not np.isfinite(w) or w <= 0 for w in weights):
        raise ConfigError("space.weights must be positive and finite")
    return AtomicMeasureSpace(tuple(zip(ids, weights)))


def parse_config(text: str, base_dir: Union[str, Path] = ".") -> ExperimentConfig:
    """Parse TOML text into an `ExperimentConfig`.

    ``base_dir`` anchors relative bundle paths (the CLI passes the config
    file's directory).  Raises `ConfigError` naming the offending field.
    """
    base = Path(base_dir)
    try:
        doc = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from None
    _reject_unknown(doc, "config", {"space", "experiment", "run", "tolerances", "output"})
    for key in ("space", "experiment", "run", "tolerances", "output"):
        if key in doc and not isinstance(doc[key], dict):
            raise ConfigError(f"{key} must be a table")

    space = _parse_space(doc.get("space", {}))

    exp = doc.get("experiment", {})
    _reject_unknown(
        exp, "experiment",
        {"id", "betas", "alphas", "degree_budget", "state_file", "markov_file"},
    )
    example = exp.get("id")
    if not isinstance(example, str):
        raise ConfigError("experiment.id is required (example1, example2, or custom)")
    betas = alphas = None
    if "betas" in exp:
        betas = _per_atom(exp["betas"], len(space), "experiment.betas")
    if "alphas" in exp:
        alphas = _per_atom(exp["alphas"], len(space), "experiment.alphas")
    budget = exp.get("degree_budget", DEFAULTS["experiment.degree_budget"])
    if not isinstance(budget, int):
        raise ConfigError("experiment.degree_budget must be an integer")
    state_file = markov_file = None
    if "state_file" in exp:
        state_file = base / str(exp["state_file"])
    if "markov_file" in exp:
        markov_file = base / str(exp["markov_file"])

    run = doc.get("run", {})
    _reject_unknown(run, "run", {"n_grid", "seed"})
    n_grid = run.get("n_grid", DEFAULTS["run.n_grid"])
    if not isinstance(n_grid, (list, tuple)) or not all(isinstance(n, int) for n in n_grid):
        raise ConfigError("run.n_grid must be a list of integers")
    seed = run.get("seed", DEFAULTS["run.seed"])
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("run.seed must be a nonnegative integer")

    tols = doc.get("tolerances", {})
    _reject_unknown(
        tols, "tolerances",
        {"invariance", "side_condition", "fixed_point", "closed_form"},
    )
    tolerances = Tolerances(**{k: v for k, v in tols.items()})

    out = doc.get("output", {})
    _reject_unknown(out, "output", {"dir"})
    out_dir = Path(str(out.get("dir", DEFAULTS["output.dir"])))

    return ExperimentConfig(
        space=space, example=example, betas=betas, alphas=alphas,
        degree_budget=budget, state_file=state_file, markov_file=markov_file,
        n_grid=tuple(int(n) for n in n_grid), seed=seed,
        tolerances=tolerances, out_dir=out_dir,
    )


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_config(text, base_dir=p.parent)


def build_system(cfg: ExperimentConfig) -> DynamicalSystemBundle:
    """Construct the configured system.  Malformed documents raise
    `ConfigError`; invariant violations in well-formed inputs raise
    `ConstructionError` (the CLI exits 2 vs 1 accordingly)."""
    if cfg.example == "example1":
        return build_dilation_channel_system(
            cfg.space, list(cfg.betas),  # type: ignore[arg-type]
            side_tol=cfg.tolerances.side_condition,
            invariance_tol=cfg.tolerances.invariance,
        )
    if cfg.example == "example2":
        return build_rotation_system(
            cfg.space, list(cfg.alphas), cfg.degree_budget,  # type: ignore[arg-type]
            invariance_tol=cfg.tolerances.invariance,
        )
    from . import serialize

    def _load(path: Path, want: type, what: str):
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read experiment.{what} {path}: {exc}") from None
        obj = serialize.loads(text)
        if not isinstance(obj, want):
            raise ConfigError(
                f"experiment.{what} {path} holds a "
                f"{type(obj).__name__}, expected {want.__name__}"
            )
        return obj

    state = _load(cfg.state_file, StateBundle, "state_file")
    markov = _load(cfg.markov_file, MarkovBundle, "markov_file")
    if state.space != markov.space:
        raise ConfigError(
            "experiment.state_file and experiment.markov_file disagree on the space"
        )
    if state.kind != markov.kind:
        raise ConfigError(
            "experiment.state_file and experiment.markov_file disagree on the fiber kind"
        )
    return DynamicalSystemBundle(
        label="custom", state=state, markov=markov,
        invariance_tol=cfg.tolerances.invariance,
    )


def seeded_observable(space: AtomicMeasureSpace, kind: FiberKind, seed: int) -> Section:
    """A deterministic self-adjoint observable to sweep: per-atom seeded
    Hermitian matrix, or a self-adjoint trig polynomial of degree <= 8."""
    elems = []
    for i in range(len(space)):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i, 2)))
        if kind.is_matrix:
            d = kind.dim
            g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            elems.append(MatrixFiberElement((g + g.conj().T) / 2.0))
        else:
            m = min(8, kind.max_degree)  # type: ignore[type-var]
            c = np.zeros(2 * m + 1, dtype=np.complex128)
            c[m] = rng.standard_normal()
            for k in range(1, m + 1):
                z = (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2.0 * m)
                c[m + k] = z
                c[m - k] = np.conj(z)
            elems.append(TrigPolyFiberElement(c))
    return Section(space, kind, tuple(elems))


def config_metadata(cfg: ExperimentConfig) -> dict:
    """Provenance headers for reports: the effective numeric settings."""
    meta = {
        "example": cfg.example,
        "atoms": ",".join(cfg.space.atom_ids),
        "weights": ",".join(repr(float(w)) for w in cfg.space.weights),
        "n_grid": ",".join(str(n) for n in cfg.n_grid),
        "seed": str(cfg.seed),
        "tol_invariance": repr(cfg.tolerances.invariance),
        "tol_side_condition": repr(cfg.tolerances.side_condition),
        "tol_fixed_point": repr(cfg.tolerances.fixed_point),
        "tol_closed_form": repr(cfg.tolerances.closed_form),
    }
    if cfg.betas is not None:
        meta["betas"] = ",".join(repr(b) for b in cfg.betas)
    if cfg.alphas is not None:
        meta["alphas"] = ",".join(repr(a) for a in cfg.alphas)
    if cfg.example == "example2":
        meta["degree_budget"] = str(cfg.degree_budget)
    return meta
