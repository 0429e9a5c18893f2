"""Shared random generators for the test suite.

Kept deliberately dumb: every function takes an explicit Generator so
tests stay reproducible without global seeding.
"""

import numpy as np

import fiberdyn as fd


def rand_matrix(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def rand_herm(rng, d):
    g = rand_matrix(rng, d)
    return 0.5 * (g + g.conj().T)


def rand_matrix_section(rng, space, d):
    elems = tuple(fd.MatrixFiberElement(rand_matrix(rng, d)) for _ in space.atoms)
    return fd.Section(space, fd.FiberKind.matrix(d), elems)


def rand_herm_section(rng, space, d):
    elems = tuple(fd.MatrixFiberElement(rand_herm(rng, d)) for _ in space.atoms)
    return fd.Section(space, fd.FiberKind.matrix(d), elems)


def rand_trig(rng, k):
    c = rng.standard_normal(2 * k + 1) + 1j * rng.standard_normal(2 * k + 1)
    return fd.TrigPolyFiberElement(c)


def rand_trig_section(rng, space, k, budget=None):
    kind = fd.FiberKind.trigpoly(budget if budget is not None else k)
    elems = tuple(rand_trig(rng, k) for _ in space.atoms)
    return fd.Section(space, kind, elems)


def rand_density(rng, d):
    g = rand_matrix(rng, d)
    rho = g @ g.conj().T + 1e-3 * np.eye(d)
    return rho / np.trace(rho).real


def rand_densities(rng, space, d):
    return [rand_density(rng, d) for _ in space.atoms]


def rand_unital_kraus(rng, d, m):
    """m Kraus operators normalized so sum K K^dagger = identity."""
    ks = [rand_matrix(rng, d) for _ in range(m)]
    s = sum(k @ k.conj().T for k in ks)
    w, v = np.linalg.eigh(s)
    s_inv_half = (v * (1.0 / np.sqrt(w))) @ v.conj().T
    return [s_inv_half @ k for k in ks]


def rand_unitary(rng, d):
    q, r = np.linalg.qr(rand_matrix(rng, d))
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def l0(space, values):
    return fd.L0Element(space, np.asarray(values, dtype=complex))
