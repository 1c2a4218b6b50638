"""
Linearized soft-max negative log likelihood.

For each sample the loss max_j h_j - h_y stays within log J of the soft-max
NLL, and max_j h_j is modeled by a variable omega with omega >= h_j.
Pairwise diversification rows keep the outputs of a sample at least eps apart.
"""

import logging
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from formulations.errors import FormulationError
from formulations.index import VarIndex, var_name
from mip.ir import ModelIR

logger = logging.getLogger(__name__)


def class_labels(Y: np.ndarray) -> np.ndarray:
    """
    Class index of each one-hot row.

    Raises:
        FormulationError: If any row is not one-hot
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[1] < 2:
        raise FormulationError(f"labels must be an N x J matrix with J >= 2, got shape {Y.shape}")
    valid = np.all((Y == 0.0) | (Y == 1.0), axis=1) & (Y.sum(axis=1) == 1.0)
    if not np.all(valid):
        row = int(np.flatnonzero(~valid)[0])
        raise FormulationError(f"label row {row} is not one-hot: {Y[row].tolist()}")
    return np.argmax(Y, axis=1)


def attach_nll_objective(model: ModelIR, index: VarIndex, Y: np.ndarray, eps: float, big_m: float,
                         out_layer: int) -> None:
    """
    Add the omega rows, the diversification disjunctions and the objective.

    Args:
        model: Model holding h[n][j][out_layer] and omega[n]
        index: Its variable index; the r[n][j][jp] binaries are added here
        Y: One-hot labels, N x J
        eps: Minimum separation between two outputs of a sample
        big_m: Relaxation constant of the diversification rows
        out_layer: Layer index of the output units

    Raises:
        FormulationError: If Y is not one-hot
    """
    labels = class_labels(Y)
    N, J = Y.shape

    for n in range(N):
        for j in range(J):
            for jp in range(j + 1, J):
                index.add(model, "r", (n, j, jp), kind="binary")

    for n in range(N):
        omega = index.id("omega", n)
        for j in range(J):
            model.add_row([(omega, 1.0), (index.id("h", n, j, out_layer), -1.0)], ">=", 0.0,
                          name=var_name("omega_max", n, j))

    for n in range(N):
        for j in range(J):
            for jp in range(j + 1, J):
                h_j = index.id("h", n, j, out_layer)
                h_jp = index.id("h", n, jp, out_layer)
                r = index.id("r", n, j, jp)
                model.add_row([(h_jp, 1.0), (h_j, -1.0), (r, -big_m)], "<=", -eps,
                              name=var_name("div_lo", n, j, jp))
                model.add_row([(h_jp, 1.0), (h_j, -1.0), (r, -big_m)], ">=", eps - big_m,
                              name=var_name("div_hi", n, j, jp))

    terms = []
    for n in range(N):
        terms.append((index.id("omega", n), 1.0))
        terms.append((index.id("h", n, int(labels[n]), out_layer), -1.0))
    model.set_objective(terms)
    logger.debug(f"attached NLL objective over {N} samples and {J} classes")


def linearized_nll_value(H: np.ndarray, Y: np.ndarray) -> float:
    """Sum over samples of max_j H[n, j] - H[n, y_n]."""
    H = np.asarray(H, dtype=float)
    labels = class_labels(Y)
    return float(np.sum(H.max(axis=1) - H[np.arange(len(labels)), labels]))


def softmax_nll_value(H: np.ndarray, Y: np.ndarray) -> float:
    """True soft-max negative log likelihood, summed over samples."""
    H = np.asarray(H, dtype=float)
    labels = class_labels(Y)
    return float(np.sum(logsumexp(H, axis=1) - H[np.arange(len(labels)), labels]))


def mccormick_envelope(alpha, h, a_lo, a_hi, h_hi, h_lo: Optional[float] = 0.0):
    """
    Under- and over-estimator of alpha * h over [a_lo, a_hi] x [h_lo, h_hi].

    Returns:
        (lower, upper) arrays broadcast from the inputs
    """
    alpha, h = np.asarray(alpha, dtype=float), np.asarray(h, dtype=float)
    lower = np.maximum(a_lo * h + alpha * h_lo - a_lo * h_lo, a_hi * h + alpha * h_hi - a_hi * h_hi)
    upper = np.minimum(a_hi * h + alpha * h_lo - a_hi * h_lo, a_lo * h + alpha * h_hi - a_lo * h_hi)
    return lower, upper
