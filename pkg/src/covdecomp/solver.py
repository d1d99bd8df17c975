"""ADMM solver for the l1+linf penalized log-det program, KKT-based
residual extraction, duality-gap certification, the soft-threshold
limiting estimator, and the support-constrained witness program.

The primal program solved here is

    min_{J > 0}  <Sigma_hat, J> - log det J + gamma ||J||_{1,off}
    subject to   ||J||_{inf,off} <= lambda_off   (and a diagonal cap
                 lambda_on when finite).

Consensus splitting J = Z gives closed-form proximal steps: the J-update
is an eigendecomposition, the Z-update is entrywise soft-thresholding
followed by clamping to the box.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleConstraints, NotPositiveDefinite, PreconditionViolated
from .symmat import SymmetricMatrix, logdet_pd

logger = logging.getLogger(__name__)

# scalar telemetry of every solve, consumed by the acceptance suite's
# certification check; entries are small dicts, never matrices
solve_log = []


def clear_solve_log():
    del solve_log[:]


@dataclass(frozen=True)
class SolverConfig:
    """Regularization levels, ADMM controls, and tolerances.

    ``lambda_off`` is the off-diagonal linf cap (may be +inf, which
    removes the box); ``lambda_on`` caps the diagonal and defaults to
    +inf. ``eps_tie`` is the clip-detection band |J_ij| >= lambda_off -
    eps_tie; when None it resolves to 1e-4 * lambda_off. ``over_relax``
    is the standard ADMM over-relaxation factor (1.0 disables it).
    """

    gamma: float
    lambda_off: float
    lambda_on: float = math.inf
    rho_admm: float = 1.0
    max_iter: int = 5000
    eps_abs: float = 1e-8
    eps_rel: float = 1e-6
    eps_tie: float = None
    over_relax: float = 1.0

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if not self.lambda_off > 0:
            raise ValueError("lambda_off must be positive (possibly +inf)")
        if not self.lambda_on > 0:
            raise ValueError("lambda_on must be positive (possibly +inf)")
        if self.rho_admm <= 0 or self.max_iter < 1:
            raise ValueError("rho_admm must be > 0 and max_iter >= 1")
        if self.eps_abs <= 0 or self.eps_rel <= 0:
            raise ValueError("eps_abs and eps_rel must be positive")
        if self.eps_tie is not None:
            if self.eps_tie <= 0:
                raise ValueError("eps_tie must be positive")
            if np.isfinite(self.lambda_off) and self.eps_tie >= self.lambda_off:
                raise ValueError("eps_tie must be smaller than lambda_off")
        if not 0 < self.over_relax < 2:
            raise ValueError("over_relax must lie in (0, 2)")

    def resolved_eps_tie(self):
        if self.eps_tie is not None:
            return self.eps_tie
        return 1e-4 * self.lambda_off if np.isfinite(self.lambda_off) else 0.0


@dataclass
class SolveResult:
    """Solver output: estimates, certificates, and diagnostics.

    ``j_hat`` is the PD precision estimate; ``sigma_r_hat`` has an
    exactly zero diagonal and support inside the clip set. ``u_scaled``
    and ``rho_final`` let a subsequent solve warm-start from this one.
    """

    j_hat: SymmetricMatrix
    sigma_m_hat: SymmetricMatrix
    sigma_r_hat: SymmetricMatrix
    z_gamma: SymmetricMatrix
    kkt_residual: float
    duality_gap: float
    iterations: int
    converged: bool
    overall_pd: bool
    min_eig_overall: float
    rho_final: float = 1.0
    u_scaled: np.ndarray = None
    sign_conflicts: tuple = ()


def _prox_logdet(rhs, rho):
    # argmin <Sigma,J> - logdet J + rho/2 |J - (Z-U)|^2 via eigenvalue map
    d, q = np.linalg.eigh(rhs)
    theta = (d + np.sqrt(d * d + 4.0 * rho)) / (2.0 * rho)
    j = (q * theta) @ q.T
    return 0.5 * (j + j.T)


def _admm_loop(sigma, cfg, z_prox, z0, u0, rho0, infeasibility_guard=False):
    p = sigma.shape[0]
    z = z0.copy()
    u = u0.copy()
    rho = rho0
    relax = cfg.over_relax
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        j = _prox_logdet(rho * (z - u) - sigma, rho)
        z_old = z
        j_relaxed = relax * j + (1.0 - relax) * z_old
        z = z_prox(j_relaxed + u, rho)
        u = u + (j_relaxed - z)
        if infeasibility_guard:
            u_max = np.abs(u).max()
            if not np.isfinite(u_max) or u_max > 1e8:
                raise InfeasibleConstraints(
                    "support-constrained program diverged (|U|_inf = %.3e)" % u_max
                )
        r_pri = np.abs(j - z).max()
        r_dual = rho * np.abs(z - z_old).max()
        eps_pri = cfg.eps_abs + cfg.eps_rel * max(np.abs(j).max(), np.abs(z).max())
        eps_dual = cfg.eps_abs + cfg.eps_rel * rho * np.abs(u).max()
        if r_pri <= eps_pri and r_dual <= eps_dual:
            converged = True
            break
        if it % 10 == 0:
            if r_pri > 10.0 * r_dual and rho < 1e3:
                rho *= 2.0
                u /= 2.0
            elif r_dual > 10.0 * r_pri and rho > 1e-3:
                rho /= 2.0
                u *= 2.0
    if infeasibility_guard and not converged:
        # when the equality pattern has no PD completion the scaled dual
        # grows linearly while the primal residual stalls at a constant;
        # a bounded dual merely means the run was cut short
        scale = max(np.abs(j).max(), np.abs(z).max(), 1.0)
        if np.abs(u).max() > 100.0 * scale:
            raise InfeasibleConstraints(
                "support-constrained program diverged "
                "(|U|_inf = %.3e after %d iterations)" % (np.abs(u).max(), it)
            )
    return j, z, u, rho, it, converged


def _pd_or_none(a):
    try:
        np.linalg.cholesky(a)
        return a
    except np.linalg.LinAlgError:
        return None


def _subgradient_certificate(j_hat, j_inv, sigma, gamma):
    # sign(J_ij) off the zero set; on exact zeros the stationarity system
    # implies the interior value (J^-1 - Sigma)_ij / gamma, clipped to the
    # unit interval. Without the interior term the KKT residual would
    # artificially read ~gamma on every zeroed entry.
    zg = np.where(np.abs(j_hat) > 1e-8, np.sign(j_hat), 0.0)
    if gamma > 0:
        interior = np.clip((j_inv - sigma) / gamma, -1.0, 1.0)
        zg = np.where(np.abs(j_hat) > 1e-8, zg, interior)
    np.fill_diagonal(zg, 0.0)
    return 0.5 * (zg + zg.T)


def _clip_mask(j_hat, cfg):
    p = j_hat.shape[0]
    if not np.isfinite(cfg.lambda_off):
        return np.zeros((p, p), dtype=bool)
    mask = np.abs(j_hat) >= cfg.lambda_off - cfg.resolved_eps_tie()
    mask &= ~np.eye(p, dtype=bool)
    return mask


def _extract(j_hat, j_inv, sigma, z_gamma, cfg, clip_mask):
    vals = j_inv - sigma - cfg.gamma * z_gamma
    r = np.where(clip_mask, vals, 0.0)
    np.fill_diagonal(r, 0.0)
    r = 0.5 * (r + r.T)
    # multipliers are nonnegative, so a residual whose sign fights the
    # precision entry is boundary noise; zero it and report the pair
    conflict = (r != 0.0) & (r * np.sign(j_hat) < -1e-8)
    conflicts = tuple(
        (int(i), int(j)) for i, j in zip(*np.nonzero(np.triu(conflict)))
    )
    r[conflict] = 0.0
    return r, conflicts


def extract_residual(j_hat, sigma_hat, z_gamma, cfg, clip_pairs=None):
    """Recover the residual covariance from the stationarity identity.

    Entries are ``(J^-1 - Sigma_hat - gamma z_gamma)_ij`` on the clip
    set {|j_hat_ij| >= lambda_off - eps_tie, i != j} and zero elsewhere;
    sign conflicts with j_hat beyond 1e-8 are zeroed (and logged).
    ``clip_pairs`` overrides the detected clip set (the witness program
    extracts on its fixed S_R).
    """
    j = np.asarray(j_hat, dtype=float)
    sigma = np.asarray(sigma_hat, dtype=float)
    zg = np.asarray(z_gamma, dtype=float)
    j_inv = np.linalg.inv(j)
    j_inv = 0.5 * (j_inv + j_inv.T)
    if clip_pairs is None:
        mask = _clip_mask(j, cfg)
    else:
        mask = np.zeros(j.shape, dtype=bool)
        for a, b in clip_pairs:
            mask[a, b] = mask[b, a] = a != b
    r, conflicts = _extract(j, j_inv, sigma, zg, cfg, mask)
    if conflicts:
        logger.warning("zeroed %d sign-conflicting residual entries", len(conflicts))
    return SymmetricMatrix(r)


def soft_threshold_covariance(sigma_hat, gamma):
    """Negative soft-threshold estimator, the lambda -> 0 limit.

    Returns
    -------
    sigma_estimate : SymmetricMatrix
        Diagonal of Sigma_hat with soft-thresholded off-diagonals.
    sigma_r : SymmetricMatrix
        Off-diagonal entries sign(-x)(|x| - gamma)_+ of Sigma_hat,
        zero diagonal; satisfies sigma_estimate_off == -sigma_r_off.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    s = np.asarray(sigma_hat, dtype=float)
    shrunk = np.sign(s) * np.maximum(np.abs(s) - gamma, 0.0)
    r = -shrunk
    np.fill_diagonal(r, 0.0)
    est = shrunk.copy()
    np.fill_diagonal(est, np.diag(s))
    return SymmetricMatrix(est), SymmetricMatrix(r)


def _objective_gap(j_hat, sigma, sigma_m, sigma_r, cfg):
    p = sigma.shape[0]
    off = ~np.eye(p, dtype=bool)
    primal = (
        float(np.sum(sigma * j_hat))
        - logdet_pd(j_hat)
        + cfg.gamma * float(np.abs(j_hat[off]).sum())
    )
    r_l1 = float(np.abs(sigma_r[off]).sum())
    lam_term = cfg.lambda_off * r_l1 if r_l1 > 0 else 0.0
    dual = logdet_pd(sigma_m) - lam_term
    if np.isfinite(cfg.lambda_on):
        # diagonal-cap multipliers: (J^-1 - Sigma)_ii on clipped diagonal
        # entries; interior entries are stationary and contribute nothing
        clipped = ~_kkt_diag_mask(j_hat, cfg)
        d_l1 = float(np.abs((np.diag(sigma_m) - np.diag(sigma))[clipped]).sum())
        dual -= cfg.lambda_on * d_l1
    return primal - dual - p


def duality_gap(result, sigma_hat, cfg):
    """Primal minus dual objective with the analytic +p shift.

    The shift comes from substituting the stationarity identity
    <Sigma_hat, J> = p - lambda ||Sigma_R||_{1,off} - gamma ||J||_{1,off}
    into the dual; at the optimum the gap is zero. A finite diagonal cap
    adds its own multiplier term -lambda_on ||(J^-1 - Sigma)_d||_1 over
    the clipped diagonal, which vanishes in the default +inf regime.
    """
    return _objective_gap(
        np.asarray(result.j_hat), np.asarray(sigma_hat, dtype=float),
        np.asarray(result.sigma_m_hat), np.asarray(result.sigma_r_hat), cfg,
    )


def post_check_overall_pd(result):
    """Spectral check of the overall covariance estimate.

    Computes lambda_min(sigma_m_hat - sigma_r_hat), stores both fields
    on the result, and returns ``(pd, min_eig)``.
    """
    overall = np.asarray(result.sigma_m_hat) - np.asarray(result.sigma_r_hat)
    min_eig = float(np.linalg.eigvalsh(0.5 * (overall + overall.T)).min())
    result.min_eig_overall = min_eig
    result.overall_pd = bool(min_eig > 0)
    return result.overall_pd, result.min_eig_overall


def _kkt_diag_mask(j_hat, cfg):
    # diagonal stationarity (Sigma_M)_d = (Sigma_hat)_d applies wherever
    # the diagonal cap is inactive; clipped diagonal entries carry the
    # experimental structured-noise multipliers instead
    d = np.abs(np.diag(j_hat))
    if not np.isfinite(cfg.lambda_on):
        return np.ones(j_hat.shape[0], dtype=bool)
    return d < cfg.lambda_on - cfg.resolved_eps_tie()


def _finalize(j_cand, z_cand, u, rho, iterations, converged, sigma, cfg,
              clip_mask=None, kkt_mask=None, record_gap=True):
    # the Z iterate carries the exact zeros and exact clips produced by
    # the prox; report it whenever it is PD, else fall back to J
    j_hat = _pd_or_none(z_cand)
    if j_hat is None:
        j_hat = j_cand
    j_inv = np.linalg.inv(j_hat)
    j_inv = 0.5 * (j_inv + j_inv.T)
    zg = _subgradient_certificate(j_hat, j_inv, sigma, cfg.gamma)
    mask = _clip_mask(j_hat, cfg) if clip_mask is None else clip_mask
    r, conflicts = _extract(j_hat, j_inv, sigma, zg, cfg, mask)
    if conflicts:
        logger.warning("zeroed %d sign-conflicting residual entries", len(conflicts))
    stationarity = sigma - j_inv + r + cfg.gamma * zg
    p = sigma.shape[0]
    keep = np.ones((p, p), dtype=bool) if kkt_mask is None else kkt_mask.copy()
    keep[np.eye(p, dtype=bool)] = _kkt_diag_mask(j_hat, cfg)
    kkt = float(np.abs(stationarity[keep]).max()) if keep.any() else 0.0
    gap = _objective_gap(j_hat, sigma, j_inv, r, cfg)
    result = SolveResult(
        j_hat=SymmetricMatrix(j_hat),
        sigma_m_hat=SymmetricMatrix(j_inv),
        sigma_r_hat=SymmetricMatrix(r),
        z_gamma=SymmetricMatrix(zg),
        kkt_residual=kkt,
        duality_gap=gap,
        iterations=iterations,
        converged=converged,
        overall_pd=False,
        min_eig_overall=0.0,
        rho_final=rho,
        u_scaled=u,
        sign_conflicts=conflicts,
    )
    post_check_overall_pd(result)
    solve_log.append(
        {
            "kkt": kkt,
            "gap": gap if record_gap else None,
            "converged": converged,
            "iterations": iterations,
        }
    )
    return result


def admm_solve(sigma_hat, cfg, warm_start=None):
    """Solve the penalized program for a sample covariance.

    Parameters
    ----------
    sigma_hat : SymmetricMatrix or ndarray
        Symmetric input with strictly positive diagonal.
    cfg : SolverConfig
    warm_start : SolveResult, optional
        Restart from a previous solution; a re-solve from an optimum
        converges within a few iterations.

    Returns
    -------
    SolveResult
        ``converged`` is False when max_iter is exhausted (the best
        iterate is still returned and a warning logged).
    """
    sigma = np.asarray(sigma_hat, dtype=float)
    if np.any(np.diag(sigma) <= 0):
        raise NotPositiveDefinite("sigma_hat needs a strictly positive diagonal")

    def z_prox(m, rho):
        a = np.sign(m) * np.maximum(np.abs(m) - cfg.gamma / rho, 0.0)
        if np.isfinite(cfg.lambda_off):
            a = np.clip(a, -cfg.lambda_off, cfg.lambda_off)
        d = np.diag(m)
        if np.isfinite(cfg.lambda_on):
            d = np.clip(d, -cfg.lambda_on, cfg.lambda_on)
        np.fill_diagonal(a, d)
        return a

    if warm_start is not None:
        z0 = np.array(warm_start.j_hat, dtype=float)
        u0 = np.array(warm_start.u_scaled, dtype=float)
        rho0 = warm_start.rho_final
    else:
        z0 = np.diag(1.0 / np.diag(sigma))
        u0 = np.zeros_like(sigma)
        rho0 = cfg.rho_admm
    j, z, u, rho, it, converged = _admm_loop(sigma, cfg, z_prox, z0, u0, rho0)
    if not converged:
        logger.warning("admm_solve hit max_iter=%d without converging", cfg.max_iter)
    return _finalize(j, z, u, rho, it, converged, sigma, cfg)


def witness_solve(sigma_hat, s_m, s_r, signs_on_sr, cfg):
    """Solve the support-constrained companion program.

    Off-diagonal entries outside ``s_m`` are fixed to zero, entries on
    ``s_r`` are fixed to ``lambda_off * sign``, and the free entries
    (s_m minus s_r, off-diagonal) carry the l1 penalty with no box. The
    residual is extracted on ``s_r`` from the equality-constraint
    multipliers, and the KKT residual is evaluated on the free set only.

    Raises
    ------
    InfeasibleConstraints
        When the fixed pattern drives the dual variable to divergence.
    PreconditionViolated
        If lambda_off is infinite, s_r is not inside s_m, or the
        diagonal is not inside s_m.
    """
    sigma = np.asarray(sigma_hat, dtype=float)
    if np.any(np.diag(sigma) <= 0):
        raise NotPositiveDefinite("sigma_hat needs a strictly positive diagonal")
    if not np.isfinite(cfg.lambda_off):
        raise PreconditionViolated("witness program needs a finite lambda_off")
    p = sigma.shape[0]
    mask_m = np.zeros((p, p), dtype=bool)
    for a, b in s_m:
        mask_m[a, b] = mask_m[b, a] = True
    mask_r = np.zeros((p, p), dtype=bool)
    for a, b in s_r:
        mask_r[a, b] = mask_r[b, a] = True
    if not np.all(np.diag(mask_m)):
        raise PreconditionViolated("s_m must contain the diagonal")
    if np.any(mask_r & ~mask_m) or np.any(np.diag(mask_r)):
        raise PreconditionViolated("s_r must be off-diagonal and inside s_m")
    signs = np.sign(np.asarray(signs_on_sr, dtype=float))
    if np.any(signs[mask_r] == 0):
        raise PreconditionViolated("signs_on_sr must be nonzero on every s_r pair")
    fixed_r = np.where(mask_r, cfg.lambda_off * signs, 0.0)
    eye = np.eye(p, dtype=bool)
    free_off = mask_m & ~mask_r & ~eye

    def z_prox(m, rho):
        a = np.where(
            free_off, np.sign(m) * np.maximum(np.abs(m) - cfg.gamma / rho, 0.0), 0.0
        )
        a = np.where(mask_r, fixed_r, a)
        d = np.diag(m)
        if np.isfinite(cfg.lambda_on):
            d = np.clip(d, -cfg.lambda_on, cfg.lambda_on)
        np.fill_diagonal(a, d)
        return a

    z0 = np.diag(1.0 / np.diag(sigma))
    u0 = np.zeros_like(sigma)
    j, z, u, rho, it, converged = _admm_loop(
        sigma, cfg, z_prox, z0, u0, cfg.rho_admm, infeasibility_guard=True
    )
    if not converged:
        logger.warning("witness_solve hit max_iter=%d without converging", cfg.max_iter)
    kkt_mask = free_off.copy()
    kkt_mask[eye] = True
    return _finalize(
        j, z, u, rho, it, converged, sigma, cfg,
        clip_mask=mask_r, kkt_mask=kkt_mask, record_gap=False,
    )


def diagonal_residual(result, sigma_hat, cfg):
    """Experimental: diagonal residual multipliers of the structured-noise
    variant (finite lambda_on).

    Mirrors the off-diagonal rule on the diagonal clip set
    {|j_hat_ii| >= lambda_on - eps_tie}: entries are
    ``(J^-1 - Sigma_hat)_ii`` there and zero elsewhere. Returned
    separately so sigma_r_hat keeps its exactly-zero diagonal.
    """
    j = np.asarray(result.j_hat)
    sigma = np.asarray(sigma_hat, dtype=float)
    diff = np.diag(np.asarray(result.sigma_m_hat) - sigma)
    if not np.isfinite(cfg.lambda_on):
        return np.zeros(j.shape[0])
    tie = cfg.eps_tie if cfg.eps_tie is not None else 1e-4 * cfg.lambda_on
    active = np.abs(np.diag(j)) >= cfg.lambda_on - tie
    return np.where(active, diff, 0.0)
