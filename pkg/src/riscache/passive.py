"""RIS phase design for a fixed precoder by penalty-based block coordinate descent.

The SINR constraints are split through auxiliary variables
x_hat[k, j] = (h_d,k^H + h_r,k^H diag(x) G) p_j, and the equalities are moved
into the objective with weight 1 / (2 rho). The method then alternates an
exact projection of the auxiliary variables onto the SINR-feasible set (one
bisection per user) with a manifold CG step on the phases.

Amplitudes inside this module are measured in units of the noise amplitude
sqrt(noise_power), so costs are O(1) regardless of the path loss.
"""

from dataclasses import dataclass, field
import logging

import numpy as np

from .manifold import CGOptions, CostFunction, cg_minimize
from .scenario import compute_sinr, effective_channel

logger = logging.getLogger(__name__)


@dataclass
class BCDOptions:
    rho_shrink: float = 0.3
    max_rounds: int = 12
    max_inner: int = 50
    violation_tol: float = 1e-5
    delta: float = 1e-4
    sinr_slack: float = 1e-4
    stall_ratio: float = 0.99
    cg: CGOptions = field(default_factory=lambda: CGOptions(max_iters=100))


@dataclass
class PenaltyState:
    """Final penalty coefficient and equality violation of a BCD run.

    ``violation`` is the root-sum-square of x_bar - x_hat in units of the
    noise amplitude; it bounds every individual equality residual.
    """

    rho: float
    violation: float
    rounds: int = 0
    inner_iterations: int = 0
    converged: bool = False
    sinr_met: bool = False
    rho_history: list = field(default_factory=list)
    violation_history: list = field(default_factory=list)
    objective_traces: list = field(default_factory=list)


def theta_from_x(x):
    """Phases in [0, 2 pi) from unit-modulus reflection coefficients."""
    th = np.mod(np.angle(x), 2 * np.pi)
    th[th >= 2 * np.pi] = 0.0
    return th


def x_from_theta(theta):
    return np.exp(1j * np.asarray(theta, dtype=float))


def cascaded_terms(ch, P):
    """Split x_bar into a constant and a part linear in the phases.

    Returns ``(const, A)`` with const[k, j] = h_d,k^H p_j and
    A[k, j, n] = conj(h_r,k[n]) * (G p_j)[n], so that
    x_bar[k, j] = const[k, j] + A[k, j] @ x.
    """
    const = ch.h_d.conj() @ P
    g = ch.G @ P  # column j is g_j
    A = ch.h_r.conj()[:, None, :] * g.T[None, :, :]
    return const, A


def penalty_objective(ch, P, x, aux, rho):
    """Transmit power plus (1 / 2 rho) times the squared equality residuals."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    f = effective_channel(ch, x)
    x_bar = f.conj() @ P
    return float(np.sum(np.abs(P) ** 2) + np.sum(np.abs(x_bar - aux) ** 2) / (2 * rho))


def f_lambda(lam, xbar_row, k, gamma0, noise_power):
    """Root function of the dual variable for user ``k``'s projection.

    Strictly increasing on (0, 1) with a pole at 1.
    """
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    xbar_row = np.asarray(xbar_row)
    s = abs(xbar_row[k]) ** 2
    i = np.sum(np.abs(xbar_row) ** 2) - s
    return s / (1 - lam) ** 2 - gamma0 * i / (1 + lam * gamma0) ** 2 - gamma0 * noise_power


def _sinr_ok(row, k, gamma0, noise_power):
    s = abs(row[k]) ** 2
    i = np.sum(np.abs(row) ** 2) - s
    return s >= gamma0 * (i + noise_power)


def solve_aux_user(xbar_row, k, gamma0, noise_power, max_iters=200, return_lambda=False):
    """Project one row of x_bar onto {x : |x_k|^2 >= gamma0 (sum_{l!=k} |x_l|^2 + noise)}.

    Feasible rows are returned unchanged. Otherwise the multiplier is found
    by bisection on (0, 1); the upper end of the final bracket is used so the
    output is never on the infeasible side. A row with x_bar[k] = 0 has no
    interior root; its projection keeps the interference shrink 1/(1+gamma0)
    and places x_k on the positive real axis at the boundary.
    """
    row = np.asarray(xbar_row, dtype=complex)
    if _sinr_ok(row, k, gamma0, noise_power):
        out = row.copy()
        return (out, 0.0) if return_lambda else out
    mask = np.arange(row.size) != k
    if row[k] == 0:
        out = row.copy()
        out[mask] = row[mask] / (1 + gamma0)
        out[k] = np.sqrt(gamma0 * (np.sum(np.abs(out[mask]) ** 2) + noise_power))
        return (out, 1.0) if return_lambda else out

    s = abs(row[k]) ** 2
    i_vals = np.abs(row[mask]) ** 2

    def fl(lam):
        return s / (1 - lam) ** 2 - gamma0 * np.sum(i_vals) / (1 + lam * gamma0) ** 2 \
            - gamma0 * noise_power

    # f(0) < 0 for an infeasible row; at hi the first term alone already
    # reaches gamma0 * (interference + noise), so f(hi) >= 0
    lo = 0.0
    hi = 1.0 - np.sqrt(s / (gamma0 * (np.sum(i_vals) + noise_power)))
    for _ in range(max_iters):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fl(mid) >= 0:
            hi = mid
        else:
            lo = mid
    lam = hi
    out = np.empty_like(row)
    out[k] = row[k] / (1 - lam)
    out[mask] = row[mask] / (1 + lam * gamma0)
    return (out, lam) if return_lambda else out


def solve_aux(ch, P, x, gammas, noise_power):
    """Row-wise projection of x_bar(x) onto the SINR-feasible set (K x K)."""
    gammas = np.broadcast_to(np.asarray(gammas, dtype=float), (ch.K,))
    x_bar = effective_channel(ch, x).conj() @ P
    return project_rows(x_bar, gammas, noise_power)


def project_rows(x_bar, gammas, noise_power):
    aux = np.empty_like(x_bar)
    for k in range(x_bar.shape[0]):
        aux[k] = solve_aux_user(x_bar[k], k, gammas[k], noise_power)
    return aux


def _quadratic_phase_cost(A2, t):
    A2H = A2.conj().T

    def evaluate(x):
        r = A2 @ x - t
        return float(np.real(np.vdot(r, r)))

    def grad(x):
        return 2.0 * (A2H @ (A2 @ x - t))

    return CostFunction(evaluate, grad)


def phase_cost(ch, P, aux, scale=1.0):
    """CostFunction of the phases: sum_kj |h_r,k^H diag(x) g_j - (aux_kj - h_d,k^H p_j)|^2.

    The direct-link products are folded into the targets. Amplitudes are
    divided by ``scale`` before squaring. The gradient 2 A^H (A x - t) is the
    real-metric gradient of the cost (twice the conjugate Wirtinger form).
    """
    const, A = cascaded_terms(ch, P)
    K = ch.K
    A2 = A.reshape(K * K, ch.N) / scale
    t = (np.asarray(aux) - const).reshape(K * K) / scale
    return _quadratic_phase_cost(A2, t)


def bcd_solve(ch, P, theta0, gammas, noise_power, opts=None, rho0=None):
    """Search RIS phases making the precoder ``P`` meet every SINR target.

    Outer loop: penalty rounds with rho shrinking geometrically. Inner loop:
    alternate the auxiliary projection and a manifold CG run until the
    relative decrease of the penalised objective falls below ``delta``. The
    loop stops once the equality violation is below ``violation_tol`` or
    when a round fails to shrink the violation by ``stall_ratio``.

    Returns ``(theta, state)``; ``state.sinr_met`` reports whether the SINRs
    at ``P`` reach gamma_k (1 - sinr_slack).
    """
    opts = opts or BCDOptions()
    gammas = np.broadcast_to(np.asarray(gammas, dtype=float), (ch.K,))
    amp = np.sqrt(noise_power)
    const, A = cascaded_terms(ch, P)
    const = const / amp
    A = A / amp
    K = ch.K
    A2 = A.reshape(K * K, ch.N)
    power = float(np.sum(np.abs(P) ** 2))

    x = x_from_theta(theta0)

    def xbar_of(x):
        return const + (A2 @ x).reshape(K, K)

    x_bar = xbar_of(x)
    aux = project_rows(x_bar, gammas, 1.0)
    res = float(np.sum(np.abs(x_bar - aux) ** 2))
    violation = float(np.linalg.norm(x_bar - aux))
    # power is in watts, residuals in noise units; rho0 makes both terms equal
    rho = rho0 if rho0 is not None else (res / (2 * power) if res > 0 else 1.0)
    state = PenaltyState(rho=rho, violation=violation)
    state.violation_history.append(violation)

    def objective(x_bar, aux, rho):
        return power + float(np.sum(np.abs(x_bar - aux) ** 2)) / (2 * rho)

    for rnd in range(opts.max_rounds):
        if violation <= opts.violation_tol:
            state.converged = True
            break
        state.rounds = rnd + 1
        state.rho_history.append(rho)
        obj_trace = [objective(x_bar, aux, rho)]
        for _ in range(opts.max_inner):
            state.inner_iterations += 1
            # phase block: aux fixed
            cost = _quadratic_phase_cost(A2, (aux - const).reshape(K * K))
            x, _ = cg_minimize(cost, x, opts.cg)
            x_bar = xbar_of(x)
            obj_trace.append(objective(x_bar, aux, rho))
            # aux block: phases fixed
            aux = project_rows(x_bar, gammas, 1.0)
            obj_trace.append(objective(x_bar, aux, rho))
            prev, cur = obj_trace[-3], obj_trace[-1]
            if prev - cur <= opts.delta * abs(prev):
                break
        state.objective_traces.append(obj_trace)
        new_violation = float(np.linalg.norm(x_bar - aux))
        stalled = new_violation > opts.stall_ratio * violation
        violation = new_violation
        state.violation_history.append(violation)
        rho *= opts.rho_shrink
        if violation <= opts.violation_tol:
            state.converged = True
            break
        if stalled:
            break

    state.rho = rho
    state.violation = violation
    sinr = compute_sinr(effective_channel(ch, x), P, noise_power)
    state.sinr_met = bool(np.all(sinr >= gammas * (1 - opts.sinr_slack)))
    return theta_from_x(x), state
