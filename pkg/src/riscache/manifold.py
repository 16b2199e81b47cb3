"""Complex circle manifold and a Riemannian conjugate-gradient minimizer.

Points are unit-modulus vectors in C^N, tangent vectors z at x satisfy
Re(z * conj(x)) = 0, and the metric is <u, v> = Re(sum conj(u) v).
Euclidean gradients follow the same real inner product, i.e. they satisfy
f(x + t v) = f(x) + t <grad, v> + O(t^2).
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import SolverError, StepTooLargeError
from .validation import check_unit_modulus


@dataclass(frozen=True)
class CostFunction:
    """A smooth cost on C^N with its Euclidean (real-metric) gradient."""

    evaluate: object
    euclidean_gradient: object

    def __call__(self, x):
        return self.evaluate(x)


@dataclass
class CGOptions:
    max_iters: int = 500
    grad_tol: float = 1e-6
    goldstein_c: float = 0.1
    max_ls_iters: int = 60
    restart_every: int = None  # defaults to 2N


@dataclass
class CGTrace:
    costs: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    message: str = ""


def inner(u, v):
    """Real part of the Hermitian product."""
    return float(np.real(np.vdot(u, v)))


def project_tangent(x, v):
    """Orthogonal projection of ``v`` onto the tangent space at ``x``."""
    return v - np.real(v * np.conj(x)) * x


def retract(x, d, alpha):
    """Step along ``alpha * d`` and renormalise every component."""
    y = x + alpha * d
    mag = np.abs(y)
    if np.any(mag == 0):
        raise StepTooLargeError("retraction hit a zero-magnitude component")
    return y / mag


def transport(d, x_next):
    """Move a tangent vector to the tangent space at ``x_next``."""
    return d - np.real(d * np.conj(x_next)) * x_next


def riemannian_gradient(cost, x):
    return project_tangent(x, cost.euclidean_gradient(x))


def _goldstein(cost, x, fx, d, slope, alpha, c, max_iters):
    """Goldstein step along ``d`` from ``x``; returns (alpha, x_new, f_new).

    Accepts alpha when f(x) + (1 - c) alpha slope <= f_new <= f(x) + c alpha slope.
    Shrinks by 2 when the decrease is insufficient and grows by 2 when the
    step is too short, bisecting once both bounds are known. Returns the
    best sufficient-decrease step seen if the band is never hit, or None.
    """
    lo, hi = 0.0, np.inf
    best = None
    for _ in range(max_iters):
        try:
            x_new = retract(x, d, alpha)
        except StepTooLargeError:
            hi = alpha
            alpha = 0.5 * (lo + hi)
            continue
        f_new = cost.evaluate(x_new)
        if not np.isfinite(f_new):
            hi = alpha
        elif f_new > fx + c * alpha * slope:
            hi = alpha
        elif f_new < fx + (1 - c) * alpha * slope:
            best = (alpha, x_new, f_new)
            lo = alpha
        else:
            return alpha, x_new, f_new
        alpha = 2.0 * alpha if np.isinf(hi) else 0.5 * (lo + hi)
    return best


def cg_minimize(cost, x0, opts=None, **kwargs):
    """Fletcher-Reeves conjugate gradient on the complex circle manifold.

    Each iteration picks a Goldstein step, retracts, transports the previous
    gradient and direction to the new point and sets
    beta = ||g_new||^2 / ||transported g_old||^2. The direction is reset to
    the negative gradient every 2N iterations or whenever it fails to be a
    descent direction. The first line search starts at alpha = 1, later ones
    at the previously accepted step.

    Returns ``(x, trace)``.
    """
    opts = opts or CGOptions(**kwargs)
    x = check_unit_modulus(x0, tol=1e-10)
    x = x / np.abs(x)
    n = x.size
    restart = opts.restart_every or 2 * n
    trace = CGTrace()

    fx = cost.evaluate(x)
    g = riemannian_gradient(cost, x)
    _check_finite(fx, g, x)
    gnorm = np.sqrt(inner(g, g))
    trace.costs.append(float(fx))
    trace.grad_norms.append(float(gnorm))
    d = -g
    alpha = 1.0
    since_restart = 0

    for it in range(opts.max_iters):
        if gnorm <= opts.grad_tol:
            trace.converged = True
            trace.message = "gradient tolerance reached"
            break
        slope = inner(g, d)
        if slope >= 0:
            d = -g
            slope = -gnorm ** 2
        step = _goldstein(cost, x, fx, d, slope, alpha, opts.goldstein_c, opts.max_ls_iters)
        if step is None:
            trace.message = "line search failed to decrease the cost"
            break
        alpha, x_new, f_new = step
        g_new = riemannian_gradient(cost, x_new)
        _check_finite(f_new, g_new, x_new)

        g_bar = transport(g, x_new)
        d_bar = transport(d, x_new)
        denom = inner(g_bar, g_bar)
        beta = inner(g_new, g_new) / denom if denom > 0 else 0.0
        since_restart += 1
        if since_restart >= restart:
            beta = 0.0
            since_restart = 0
        d = -g_new + beta * d_bar
        if inner(g_new, d) >= 0:
            d = -g_new
            beta = 0.0
            since_restart = 0

        x, fx, g = x_new, f_new, g_new
        gnorm = np.sqrt(inner(g, g))
        trace.costs.append(float(fx))
        trace.grad_norms.append(float(gnorm))
        trace.betas.append(float(beta))
        trace.steps.append(float(alpha))
        trace.iterations = it + 1
    else:
        trace.converged = gnorm <= opts.grad_tol
        trace.message = "iteration limit reached"
    return x, trace


def _check_finite(fx, g, x):
    if not np.isfinite(fx) or not np.all(np.isfinite(g)):
        raise SolverError(f"non-finite cost or gradient at iterate {x!r}")


def quadratic_cost(A, t):
    """Cost ||A x - t||^2 with gradient 2 A^H (A x - t)."""
    A = np.asarray(A, dtype=complex)
    t = np.asarray(t, dtype=complex)
    AH = A.conj().T

    def evaluate(x):
        r = A @ x - t
        return float(np.real(np.vdot(r, r)))

    def grad(x):
        return 2.0 * (AH @ (A @ x - t))

    return CostFunction(evaluate, grad)


def random_point(n, rng):
    return np.exp(2j * np.pi * rng.random(n))
