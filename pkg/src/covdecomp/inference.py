"""Gaussian belief propagation in information form, walk-summability,
and exact-moment references.

Messages are parametrized as precision/potential corrections
(dJ[i, j], dh[i, j]) from node i to node j, updated synchronously from
zero initialization. The cavity precision for the i -> j message is the
node-i belief precision minus j's own incoming message; a nonpositive
cavity precision means the recursion left the Gaussian family and the
run records itself as diverged.
"""

from dataclasses import dataclass

import numpy as np

from .errors import MessagePrecisionNonpositive, NonPositiveDiagonal, NotPositiveDefinite
from .symmat import SymmetricMatrix

MESSAGE_NORM_LIMIT = 1e12


@dataclass(frozen=True)
class InfoModel:
    """Information-form Gaussian: density proportional to
    exp(-x' J x / 2 + h' x)."""

    j: SymmetricMatrix
    h: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.j, dtype=float)
        h = np.asarray(self.h, dtype=float).reshape(-1)
        if h.shape[0] != j.shape[0]:
            raise ValueError(
                "h has length %d but j is %dx%d" % (h.shape[0], *j.shape)
            )
        try:
            np.linalg.cholesky(j)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite("information matrix must be positive definite")
        object.__setattr__(self, "j", SymmetricMatrix(j))
        object.__setattr__(self, "h", h.copy())

    @property
    def dim(self):
        return self.j.dim


@dataclass
class LbpTrace:
    """Per-iteration error trace of one belief propagation run."""

    mean_errors: np.ndarray
    var_errors: np.ndarray
    converged: bool
    iterations_run: int


def exact_moments(m):
    """Exact mean vector and marginal variances (dense solve)."""
    j = np.asarray(m.j, dtype=float)
    try:
        np.linalg.cholesky(j)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("information matrix must be positive definite")
    mean = np.linalg.solve(j, m.h)
    cov = np.linalg.inv(j)
    return mean, np.diag(cov).copy()


def walk_summability(j):
    """Spectral norm of the entrywise-absolute partial-correlation matrix.

    Values below 1 certify that loopy propagation of the means converges
    to the exact means. The quantity is invariant under positive
    diagonal rescaling of j.
    """
    a = np.asarray(j, dtype=float)
    d = np.diag(a)
    if np.any(d <= 0):
        raise NonPositiveDiagonal("information matrix diagonal must be positive")
    scale = np.sqrt(np.outer(d, d))
    r_bar = np.abs(a) / scale
    np.fill_diagonal(r_bar, 0.0)
    return float(np.abs(np.linalg.eigvalsh(r_bar)).max())


def _require_positive_cavities(cavity_j, mask):
    if np.any(cavity_j[mask] <= 0):
        raise MessagePrecisionNonpositive(
            "nonpositive cavity precision on an active edge"
        )


def _belief_errors(j_diag, h, d_j, d_h, exact_mean, exact_var):
    belief_j = j_diag + d_j.sum(axis=0)
    if np.any(belief_j <= 0):
        return np.inf, np.inf
    belief_h = h + d_h.sum(axis=0)
    means = belief_h / belief_j
    variances = 1.0 / belief_j
    return (
        float(np.abs(means - exact_mean).mean()),
        float(np.abs(variances - exact_var).mean()),
    )


def lbp_run(m, max_iter, tol, damping=0.0):
    """Synchronous loopy belief propagation with error tracing.

    Each iteration updates every directed message once, then records the
    average absolute mean and variance errors of the node beliefs
    against ``exact_moments``. ``converged`` becomes true when the
    largest message change drops below ``tol``; a nonpositive cavity
    precision or a message norm beyond 1e12 halts the run as diverged.
    ``damping`` in [0, 1) blends each new message with the previous one
    (0 disables blending).
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if not 0 <= damping < 1:
        raise ValueError("damping must lie in [0, 1)")
    j = np.asarray(m.j, dtype=float)
    h = np.asarray(m.h, dtype=float)
    p = j.shape[0]
    exact_mean, exact_var = exact_moments(m)
    j_diag = np.diag(j).copy()
    mask = (j != 0.0) & ~np.eye(p, dtype=bool)
    d_j = np.zeros((p, p))
    d_h = np.zeros((p, p))
    mean_errors = []
    var_errors = []
    converged = False
    for _ in range(max_iter):
        belief_j = j_diag + d_j.sum(axis=0)
        belief_h = h + d_h.sum(axis=0)
        # cavity[i, j]: belief at i with j's incoming message removed
        cavity_j = belief_j[:, None] - d_j.T
        cavity_h = belief_h[:, None] - d_h.T
        try:
            _require_positive_cavities(cavity_j, mask)
        except MessagePrecisionNonpositive:
            break
        new_j = np.where(mask, -j * j / np.where(mask, cavity_j, 1.0), 0.0)
        new_h = np.where(mask, -j * cavity_h / np.where(mask, cavity_j, 1.0), 0.0)
        if damping > 0:
            new_j = (1.0 - damping) * new_j + damping * d_j
            new_h = (1.0 - damping) * new_h + damping * d_h
        delta = max(np.abs(new_j - d_j).max(), np.abs(new_h - d_h).max())
        d_j, d_h = new_j, new_h
        me, ve = _belief_errors(j_diag, h, d_j, d_h, exact_mean, exact_var)
        mean_errors.append(me)
        var_errors.append(ve)
        if max(np.abs(d_j).max(), np.abs(d_h).max()) > MESSAGE_NORM_LIMIT:
            break
        if delta < tol:
            converged = True
            break
    return LbpTrace(
        mean_errors=np.asarray(mean_errors),
        var_errors=np.asarray(var_errors),
        converged=converged,
        iterations_run=len(mean_errors),
    )
