"""SINR-constrained transmit power minimization through its SDP relaxation.

For fixed effective channels f_k the relaxation reads

    min  sum_k tr(P_k)
    s.t. f_k^H P_k f_k / gamma_k - sum_{l != k} f_k^H P_l f_k >= sigma^2,
         P_k PSD,

with dual variables lambda_k >= 0 and slack matrices
Z_k = I - (lambda_k / gamma_k) f_k f_k^H + sum_{l != k} lambda_l f_l f_l^H.
The solver below is an infeasible-start primal-dual path-following method
(HKM search direction) specialised to K Hermitian blocks of size M.
"""

from dataclasses import dataclass, field
import logging

import numpy as np

from .exceptions import InfeasibleError, RankError, SolverError
from .validation import check_complex_array, check_real_array

logger = logging.getLogger(__name__)

RANK_TOL = 1e-4
PSD_TOL = 1e-9


@dataclass
class SdpSolution:
    """Primal-dual pair of the relaxation, in physical units.

    ``P_blocks`` (K, M, M) are covariance matrices in watts, ``duals`` are
    the multipliers lambda_k (1/W), ``slacks`` the dual slack matrices Z_k.
    """

    P_blocks: np.ndarray
    duals: np.ndarray
    slacks: np.ndarray
    primal_obj: float
    dual_obj: float
    iterations: int = 0
    trace: list = field(default_factory=list, repr=False)

    @property
    def gap(self):
        return abs(self.primal_obj - self.dual_obj) / max(abs(self.primal_obj), 1e-300)


@dataclass
class KktReport:
    """Outcome of the post-solve optimality checks, one flag per condition."""

    primal_feasible: bool
    reconstruction: bool
    complementary: bool
    null_rank: bool
    duality_gap: bool
    residuals: dict

    @property
    def ok(self):
        return not self.violations

    @property
    def violations(self):
        names = ("primal_feasible", "reconstruction", "complementary", "null_rank",
                 "duality_gap")
        return [n for n in names if not getattr(self, n)]


def _herm(A):
    return 0.5 * (A + A.conj().swapaxes(-1, -2))


def _coeffs(gammas):
    K = gammas.size
    c = -np.ones((K, K))
    np.fill_diagonal(c, 1.0 / gammas)
    return c


def _max_step(X, dX):
    """Largest alpha with X + alpha dX PSD, for a batch of Hermitian PD blocks."""
    L = np.linalg.cholesky(X)
    Linv = np.linalg.inv(L)
    S = _herm(Linv @ dX @ Linv.conj().swapaxes(-1, -2))
    lam = np.linalg.eigvalsh(S).min()
    return np.inf if lam >= 0 else -1.0 / lam


def _check_inputs(f, gammas, noise_power):
    f = check_complex_array(f, ndim=2, name="f")
    gammas = check_real_array(np.broadcast_to(gammas, (f.shape[0],)), ndim=1, name="gammas")
    if np.any(gammas <= 0):
        raise ValueError("SINR targets must be positive")
    if not noise_power > 0:
        raise ValueError("noise power must be positive")
    if np.any(np.linalg.norm(f, axis=1) == 0):
        raise ValueError("every effective channel must be nonzero")
    return f, gammas


def solve_sdp(f, gammas, noise_power, tol=1e-10, sigma=0.3, step_frac=0.98,
              max_iters=200, infeas_bound=1e12):
    """Solve the relaxation for effective channels ``f`` (K x M).

    The problem is scaled internally so that the channel vectors are
    expressed in units of the noise amplitude and the optimal power is O(1).
    Iteration stops once relative gap, primal and dual residuals all drop
    below ``tol``.

    Raises
    ------
    InfeasibleError
        The scaled dual objective passes ``infeas_bound`` while the primal
        residual stalls: no precoder reaches the SINR targets.
    SolverError
        The iteration limit was hit without convergence or certificate.
    """
    f, gammas = _check_inputs(f, gammas, noise_power)
    K, M = f.shape

    a = f / np.sqrt(noise_power)
    scale = float(np.sum(gammas / np.sum(np.abs(a) ** 2, axis=1)))
    B = np.sqrt(scale) * a.T  # M x K, column k is b_k
    C = _coeffs(gammas)
    Bb = np.einsum("mk,nk->kmn", B, B.conj())  # b_k b_k^H
    eye = np.broadcast_to(np.eye(M, dtype=complex), (K, M, M))

    def A_op(X):
        # A(X)_k = sum_l c[k, l] b_k^H X_l b_k
        q = np.real(np.einsum("mk,lmn,nk->kl", B.conj(), X, B))
        return np.sum(C * q, axis=1)

    def A_adj(y):
        # A*_l(y) = sum_k y_k c[k, l] b_k b_k^H
        return np.einsum("k,kl,kmn->lmn", y, C, Bb)

    X = eye.copy()
    Z = eye.copy()
    y = np.ones(K)
    s = np.ones(K)
    n_cone = K * M + K
    trace = []

    for it in range(1, max_iters + 1):
        r_p = 1.0 - A_op(X) + s
        R_d = eye - A_adj(y) - Z
        pobj = float(np.real(np.trace(X, axis1=1, axis2=2)).sum())
        dobj = float(y.sum())
        mu = (float(np.real(np.einsum("kmn,knm->", X, Z))) + s @ y) / n_cone
        p_inf = np.linalg.norm(r_p) / (1.0 + np.sqrt(K))
        d_inf = max(np.linalg.norm(R_d[l]) for l in range(K)) / (1.0 + np.sqrt(M))
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        trace.append({"iter": it, "pobj": pobj * scale, "dobj": dobj * scale,
                      "gap": gap, "p_inf": p_inf, "d_inf": d_inf, "mu": mu})
        if gap < tol and p_inf < tol and d_inf < tol:
            break
        if dobj > infeas_bound and p_inf > 1e-3:
            raise InfeasibleError(
                "SINR targets are infeasible: dual objective diverges",
                dual_objective=dobj * scale * noise_power, trace=trace)

        Zinv = np.linalg.inv(Z)
        target = sigma * mu
        H = target * Zinv - X - X @ R_d @ Zinv
        U = np.einsum("mi,lmn,nj->lij", B.conj(), X, B)
        W = np.einsum("mi,lmn,nj->lij", B.conj(), Zinv, B)
        schur = np.einsum("il,jl,lij->ij", C, C, np.real(U * W.swapaxes(1, 2)))
        schur += np.diag(s / y)
        schur = 0.5 * (schur + schur.T)
        rhs = r_p - A_op(_herm(H)) + target / y - s
        try:
            dy = np.linalg.solve(schur, rhs)
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular Schur complement", trace=trace) from exc
        dZ = R_d - A_adj(dy)
        dX = _herm(target * Zinv - X - X @ dZ @ Zinv)
        ds = (target - s * y - s * dy) / y

        ap = min(_max_step(X, dX), _ratio_step(s, ds))
        ad = min(_max_step(Z, dZ), _ratio_step(y, dy))
        ap = min(1.0, step_frac * ap)
        ad = min(1.0, step_frac * ad)
        X = _herm(X + ap * dX)
        s = s + ap * ds
        Z = _herm(Z + ad * dZ)
        y = y + ad * dy
    else:
        if trace[-1]["p_inf"] > 1e-6 and trace[-1]["dobj"] / scale > 1e6:
            raise InfeasibleError("SINR targets appear infeasible (no convergence)",
                                  dual_objective=trace[-1]["dobj"] * noise_power,
                                  trace=trace)
        raise SolverError(f"interior-point method did not converge in {max_iters} "
                          "iterations", trace=trace)

    return SdpSolution(
        P_blocks=X * scale,
        duals=y * scale / noise_power,
        slacks=Z,
        primal_obj=pobj * scale,
        dual_obj=dobj * scale,
        iterations=it,
        trace=trace,
    )


def _ratio_step(v, dv):
    neg = dv < 0
    if not neg.any():
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def verify_kkt(sol, f, gammas, noise_power, tol=1e-6):
    """Check the optimality conditions that make the relaxation tight.

    (a) primal feasibility of every SINR constraint, (b) Z_k agrees with its
    closed form in the multipliers, (c) Z_k P_k = 0, (d) rank(Z_k) = M - 1
    and (e) zero duality gap, each at relative tolerance ``tol``.
    """
    f, gammas = _check_inputs(f, gammas, noise_power)
    K, M = f.shape
    P, Z, lam = sol.P_blocks, sol.slacks, sol.duals
    FF = np.einsum("km,kn->kmn", f, f.conj())
    res = {}

    q = np.real(np.einsum("km,lmn,kn->kl", f.conj(), P, f))
    slack = np.diag(q) / gammas - (q.sum(axis=1) - np.diag(q)) - noise_power
    res["primal"] = float(np.min(slack) / noise_power)
    primal_ok = res["primal"] >= -tol

    recon = np.empty(K)
    comp = np.empty(K)
    ranks = np.empty(K, dtype=int)
    total = np.einsum("l,lmn->mn", lam, FF)
    for k in range(K):
        Zk = np.eye(M) - (lam[k] / gammas[k]) * FF[k] + (total - lam[k] * FF[k])
        recon[k] = np.linalg.norm(Z[k] - Zk) / max(np.linalg.norm(Z[k]), 1e-300)
        comp[k] = np.linalg.norm(Z[k] @ P[k]) / max(np.linalg.norm(P[k]), 1e-300)
        ev = np.linalg.eigvalsh(_herm(Z[k]))
        ranks[k] = int(np.sum(ev > tol * ev.max()))
    res["reconstruction"] = recon
    res["complementary"] = comp
    res["rank_Z"] = ranks
    res["gap"] = sol.gap
    min_eig_P = min(np.linalg.eigvalsh(_herm(P[k])).min() / max(np.trace(P[k]).real, 1e-300)
                    for k in range(K))
    min_eig_Z = min(np.linalg.eigvalsh(_herm(Z[k])).min() for k in range(K))
    res["min_eig_P"] = float(min_eig_P)
    res["min_eig_Z"] = float(min_eig_Z)

    return KktReport(
        primal_feasible=bool(primal_ok and min_eig_P >= -PSD_TOL and np.all(lam >= 0)),
        reconstruction=bool(np.all(recon <= tol)),
        complementary=bool(np.all(comp <= tol)),
        null_rank=bool(np.all(ranks == M - 1) and min_eig_Z >= -tol),
        duality_gap=bool(sol.gap <= tol),
        residuals=res,
    )


def extract_rank1(sol, f, gammas, noise_power, rank_tol=RANK_TOL):
    """Factor every P_k as p_k p_k^H using its principal eigenpair.

    Each p_k is rotated so that f_k^H p_k is real and nonnegative. Returns
    the M x K precoder matrix.

    Raises
    ------
    RankError
        Some block has sigma_2 / sigma_1 above ``rank_tol``.
    """
    f, gammas = _check_inputs(f, gammas, noise_power)
    K, M = f.shape
    P = np.empty((M, K), dtype=complex)
    for k in range(K):
        w, V = np.linalg.eigh(_herm(sol.P_blocks[k]))
        ratio = w[-2] / w[-1] if M > 1 else 0.0
        if w[-1] <= 0 or ratio > rank_tol:
            raise RankError(f"block {k} is not rank one (sigma2/sigma1 = {ratio:.3e})")
        p = np.sqrt(w[-1]) * V[:, -1]
        inner = np.vdot(f[k], p)
        if abs(inner) > 0:
            p = p * (np.conj(inner) / abs(inner))
        P[:, k] = p
    return P


def rank_ratios(sol):
    """sigma_2 / sigma_1 of every block (0 when M = 1)."""
    out = []
    for Pk in sol.P_blocks:
        w = np.linalg.eigvalsh(_herm(Pk))
        out.append(w[-2] / w[-1] if w.size > 1 else 0.0)
    return np.array(out)


def solve_active(f, gammas, noise_power, check=True, **solver_opts):
    """Minimum-power precoder meeting the SINR targets for channels ``f``.

    Returns ``(P, power)`` with ``P`` of shape M x K and ``power`` in watts.
    With ``check`` the KKT certificate is verified before extraction and a
    failure raises :class:`SolverError` carrying the report.
    """
    sol = solve_sdp(f, gammas, noise_power, **solver_opts)
    if check:
        report = verify_kkt(sol, f, gammas, noise_power)
        if not report.ok:
            raise SolverError(f"KKT certificate failed: {report.violations}",
                              trace=sol.trace, report=report)
    P = extract_rank1(sol, f, gammas, noise_power)
    return P, float(np.sum(np.abs(P) ** 2))


def uplink_fixed_point(f, gammas, noise_power, tol=1e-13, max_iters=100000):
    """Reference solution through the virtual uplink (test oracle).

    With a_k = f_k / sqrt(noise_power), iterates
    lambda_k = 1 / ((1 + 1/gamma_k) a_k^H (I + sum_l lambda_l a_l a_l^H)^-1 a_k)
    and returns the optimal total power sum_k lambda_k in watts.
    """
    f, gammas = _check_inputs(f, gammas, noise_power)
    K, M = f.shape
    a = f / np.sqrt(noise_power)
    lam = np.zeros(K)
    for _ in range(max_iters):
        S = np.eye(M) + (a.T * lam) @ a.conj()
        Sinv_a = np.linalg.solve(S, a.T)
        quad = np.real(np.sum(a.conj().T * Sinv_a, axis=0))
        new = 1.0 / ((1.0 + 1.0 / gammas) * quad)
        if np.max(np.abs(new - lam)) <= tol * np.max(new):
            lam = new
            break
        lam = new
    else:
        raise SolverError("uplink fixed point did not converge")
    return float(lam.sum())
