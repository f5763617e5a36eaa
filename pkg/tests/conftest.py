"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest

from dmasense import build_grid, synthesize_model
from dmasense.mnt import load_vector


@pytest.fixture(scope="session")
def grid_coarse():
    return build_grid(30.0, 30.0)


@pytest.fixture(scope="session")
def model_coarse(grid_coarse):
    return synthesize_model(12, grid_coarse, coupling_strength=0.6, seed=7)


def block_oracle_channel(model, v):
    """Channel via the full loaded-network block system, independently of the
    resolvent formula.

    Unknowns are the waves at the virtual ports, u = [a_S; b_S]: the loads
    impose a_S = Phi b_S and the static network imposes b_S = b + Gamma a_S
    for unit feed excitation.  Solving the stacked 2 N_M system and radiating
    b_R = h0 + A a_S gives the channel.
    """
    n = model.b.size
    r = load_vector(v, model)
    M = np.block([
        [np.eye(n), -np.diag(r)],
        [-model.Gamma, np.eye(n)],
    ])
    rhs = np.concatenate([np.zeros(n), model.b])
    u = np.linalg.solve(M, rhs)
    return model.h0 + model.A @ u[:n]


def affine_channel_no_coupling(model, v):
    """Channel for Gamma = 0: h = h0 + A (r * b), no linear solve."""
    r = load_vector(v, model)
    return model.h0 + model.A @ (r * model.b)


def sherman_morrison_flip(model, v, i):
    """Channel after flipping bit i of v, via a rank-1 resolvent update.

    Starts from the solve at v and applies the Sherman-Morrison correction
    for the one modified diagonal entry of Phi.
    """
    n = model.b.size
    r = load_vector(v, model)
    M = np.eye(n) - np.diag(r) @ model.Gamma
    delta = (model.beta - model.alpha) * (1.0 if v[i] == 0 else -1.0)
    e = np.zeros(n, dtype=complex)
    e[i] = 1.0
    rhs_new = r * model.b + delta * model.b[i] * e
    p = np.linalg.solve(M, e)
    q = np.linalg.solve(M, rhs_new)
    w = delta * model.Gamma[i, :]
    x_new = q + p * (w @ q) / (1.0 - w @ p)
    return model.h0 + model.A @ x_new


def complex_population_sd(samples):
    """sqrt of mean squared deviation from the complex mean, along axis 0."""
    samples = np.asarray(samples)
    return np.sqrt(np.mean(np.abs(samples - samples.mean(axis=0)) ** 2, axis=0))
