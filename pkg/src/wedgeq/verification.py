"""Signal-dependent selective verification and its congestion equilibrium.

Each AI draft arrives with a signal s ~ Beta(alpha, beta) and a perceived
error risk pi(s) (logistic in s).  Given a shadow price theta on reviewer
attention, the optimal policy reviews a draft only when its risk clears
the threshold pi_star = theta / (kappa*K*(1-p_inf)) and spends

    r*(s) = max(0, log(pi(s)/pi_star)) / kappa

attention-hours on it, which clips the residual escape probability to
min(pi(s), pi_star).  Averaging over the signal density gives the
policy-level route moments; feeding those into the marginal congestion
cost Phi closes the loop, and an equilibrium is a fixed point
theta = Phi(theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import betaln

from .errors import (
    InfeasibleError,
    NoRootError,
    QuadratureError,
    StabilityError,
    ValidationError,
    WedgeqError,
)
from .queueing import EPS_RHO, QueueInputs, wq_pk
from .service_model import ReworkModel, RouteMoments, _require_finite

# Default quadrature and scan resolutions.
DEFAULT_NODES = 256
DEFAULT_GRID = 512

# Relative agreement required between n-node and 2n-node quadrature.
_QUAD_RTOL = 1e-8

# Residual tolerance guaranteed for reported fixed points.
_ROOT_RTOL = 1e-8


@dataclass(frozen=True)
class RiskMap:
    """Perceived error risk as a logistic function of the signal.

    pi(s) = a + b / (1 + exp(-g*(s - s0))) on s in [0, 1]; monotone
    nondecreasing, with values required to stay inside [0, 1].
    """

    a: float
    b: float
    g: float
    s0: float

    def __post_init__(self):
        for field in ("a", "b", "g", "s0"):
            _require_finite(getattr(self, field), field)
        if self.a < 0.0:
            raise ValidationError(f"a must be >= 0, got {self.a}", field="a")
        if self.b < 0.0:
            raise ValidationError(f"b must be >= 0, got {self.b}", field="b")
        if self.g <= 0.0:
            raise ValidationError(f"g must be > 0, got {self.g}", field="g")
        if self.value(1.0) > 1.0:
            raise ValidationError(
                f"risk map exceeds 1 on [0, 1]: pi(1) = {self.value(1.0):.6g}", field="b"
            )

    def value(self, s):
        """pi(s); accepts scalars or arrays."""
        out = self.a + self.b / (1.0 + np.exp(-self.g * (np.asarray(s, dtype=float) - self.s0)))
        if np.ndim(s) == 0:
            return float(out)
        return out


@dataclass(frozen=True)
class SignalEnvironment:
    """Signal distribution, risk perception, and the cost parameters.

    K is the loss per escaped error, kappa the reviewer's verification
    skill (log-risk removed per attention-hour), c_w the waiting cost per
    task per calendar hour, and p_inf the irreducible share of errors no
    review can catch.
    """

    risk_map: RiskMap
    signal_alpha: float
    signal_beta: float
    K: float
    kappa: float
    c_w: float
    p_inf: float = 0.0

    def __post_init__(self):
        for field in ("signal_alpha", "signal_beta", "K", "kappa", "c_w", "p_inf"):
            _require_finite(getattr(self, field), field)
        if self.signal_alpha <= 0.0:
            raise ValidationError(
                f"signal_alpha must be > 0, got {self.signal_alpha}", field="signal_alpha"
            )
        if self.signal_beta <= 0.0:
            raise ValidationError(
                f"signal_beta must be > 0, got {self.signal_beta}", field="signal_beta"
            )
        if self.K <= 0.0:
            raise ValidationError(f"K must be > 0, got {self.K}", field="K")
        if self.kappa <= 0.0:
            raise ValidationError(f"kappa must be > 0, got {self.kappa}", field="kappa")
        if self.c_w < 0.0:
            # c_w == 0 is admitted so the no-congestion-cost boundary case
            # can be represented; solve_equilibrium reports it degenerate.
            raise ValidationError(f"c_w must be >= 0, got {self.c_w}", field="c_w")
        if not 0.0 <= self.p_inf < 1.0:
            raise ValidationError(f"p_inf must lie in [0, 1), got {self.p_inf}", field="p_inf")
        total = _integrate_unit(lambda s: self.signal_pdf(s), DEFAULT_NODES)
        if abs(total - 1.0) > 1e-10:
            raise ValidationError(
                "signal density does not integrate to 1 within 1e-10 "
                f"(got {total!r}); shapes with endpoint singularities "
                "(alpha < 1 or beta < 1) are not resolvable by this quadrature",
                field="signal_alpha",
            )

    def signal_pdf(self, s):
        """Beta(alpha, beta) density, evaluated on interior points of (0, 1)."""
        s = np.asarray(s, dtype=float)
        log_pdf = (
            (self.signal_alpha - 1.0) * np.log(s)
            + (self.signal_beta - 1.0) * np.log1p(-s)
            - betaln(self.signal_alpha, self.signal_beta)
        )
        return np.exp(log_pdf)

    @property
    def review_scale(self) -> float:
        """kappa * K * (1 - p_inf): converts theta into a risk threshold."""
        return self.kappa * self.K * (1.0 - self.p_inf)


@dataclass(frozen=True)
class ReviewPolicy:
    """A shadow price on reviewer time and its induced review threshold."""

    theta: float
    pi_star: float


@dataclass(frozen=True)
class Equilibrium:
    """One fixed point theta = Phi(theta) and the quantities it induces."""

    theta_star: float
    pi_star: float
    tau_A: float
    q_A: float
    rho: float
    wq: float
    residual: float
    root_index: int
    degenerate: bool = False


@dataclass(frozen=True)
class EquilibriumSolution:
    """All fixed points found on the feasible domain, smallest first."""

    primary: Equilibrium
    roots: tuple[Equilibrium, ...]
    theta_lo: float
    theta_hi: float


@lru_cache(maxsize=64)
def _gauss_nodes(n: int):
    return np.polynomial.legendre.leggauss(n)


def _panel_eval(f, lo: float, hi: float, n: int) -> float:
    nodes, weights = _gauss_nodes(n)
    half = 0.5 * (hi - lo)
    s = lo + half * (nodes + 1.0)
    return half * float(np.dot(weights, f(s)))


def _integrate_unit(f, n: int) -> float:
    # Two panels so mild endpoint curvature does not dominate the error.
    return _panel_eval(f, 0.0, 0.5, n) + _panel_eval(f, 0.5, 1.0, n)


def pi_star(env: SignalEnvironment, theta: float) -> float:
    """Review threshold: drafts with pi(s) <= pi_star are waved through."""
    if not (math.isfinite(theta) and theta > 0.0):
        raise ValidationError(f"theta must be > 0, got {theta}", field="theta")
    return theta / env.review_scale


def threshold_policy(env: SignalEnvironment, theta: float) -> ReviewPolicy:
    return ReviewPolicy(theta=theta, pi_star=pi_star(env, theta))


def effort_for_risk(env: SignalEnvironment, theta: float, pi):
    """Optimal review effort for a draft of perceived risk pi.

    r* = max(0, log(pi / pi_star)) / kappa; zero at or below threshold.
    Accepts scalar or array pi.
    """
    star = pi_star(env, theta)
    pi_arr = np.asarray(pi, dtype=float)
    if np.any(pi_arr < 0.0) or np.any(pi_arr > 1.0):
        raise ValidationError("risk pi must lie in [0, 1]", field="pi")
    ratio = np.maximum(pi_arr / star, 1.0)
    out = np.log(ratio) / env.kappa
    if np.ndim(pi) == 0:
        return float(out)
    return out


def review_effort(env: SignalEnvironment, theta: float, s):
    """Optimal review effort for signal(s) s in [0, 1]."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0.0) or np.any(s_arr > 1.0):
        raise ValidationError("signal s must lie in [0, 1]", field="s")
    out = effort_for_risk(env, theta, env.risk_map.value(s_arr))
    if np.ndim(s) == 0:
        return float(out)
    return out


def residual_risk(env: SignalEnvironment, theta: float, s):
    """Escape probability left after optimal review: min(pi(s), pi_star).

    Equal to pi(s) * exp(-kappa * r*(s)) pointwise; the clipped form is
    exact and avoids the round trip through exp(log(...)).
    """
    star = pi_star(env, theta)
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0.0) or np.any(s_arr > 1.0):
        raise ValidationError("signal s must lie in [0, 1]", field="s")
    out = np.minimum(env.risk_map.value(s_arr), star)
    if np.ndim(s) == 0:
        return float(out)
    return out


def threshold_signal(env: SignalEnvironment, theta: float) -> float:
    """Smallest signal whose risk reaches the review threshold.

    Exact logistic inversion; returns 0 when everything is reviewed and 1
    when nothing is.  This is where r*(s) has its kink, so quadrature
    panels split here.
    """
    star = pi_star(env, theta)
    rm = env.risk_map
    if rm.value(0.0) >= star:
        return 0.0
    if rm.value(1.0) <= star:
        return 1.0
    # Here a < star < pi(1) <= a + b, so the logistic argument is valid.
    s = rm.s0 - math.log(rm.b / (star - rm.a) - 1.0) / rm.g
    return min(1.0, max(0.0, s))


def _policy_moments_raw(
    env: SignalEnvironment, theta: float, rework: ReworkModel, n_nodes: int
) -> tuple[float, float]:
    """Signal-averaged (tau_A, q_A) by split Gauss-Legendre quadrature."""
    star = pi_star(env, theta)
    split = threshold_signal(env, theta)
    panels = []
    if split > 0.0:
        panels.append((0.0, split))
    if split < 1.0:
        panels.append((split, 1.0))
    per_panel = n_nodes if len(panels) == 1 else max(8, n_nodes // 2)

    tau = 0.0
    q = 0.0
    for lo, hi in panels:
        nodes, weights = _gauss_nodes(per_panel)
        half = 0.5 * (hi - lo)
        s = lo + half * (nodes + 1.0)
        pi_s = env.risk_map.value(s)
        effort = np.log(np.maximum(pi_s / star, 1.0)) / env.kappa
        resid = np.minimum(pi_s, star)
        weight = (half * weights) * env.signal_pdf(s)
        tau += float(np.dot(weight, effort + rework.mu_R * resid))
        q += float(
            np.dot(
                weight,
                effort**2 + (2.0 * rework.mu_R) * effort * resid + rework.mu_R2 * resid,
            )
        )
    return tau, q


def policy_route_moments(
    env: SignalEnvironment,
    theta: float,
    rework: ReworkModel,
    n_nodes: int = DEFAULT_NODES,
) -> RouteMoments:
    """AI-route moments under the optimal review policy at price theta.

    tau_A = E_s[r*] + mu_R * E_s[min(pi, pi_star)]
    q_A   = E_s[r*^2 + 2 r* mu_R min(pi, pi_star) + mu_R2 min(pi, pi_star)]

    Doubling the node count must agree to 1e-8 relative or the result is
    rejected with the achieved error estimate.
    """
    if n_nodes < 8:
        raise ValidationError(f"n_nodes must be >= 8, got {n_nodes}", field="n_nodes")
    coarse = _policy_moments_raw(env, theta, rework, n_nodes)
    fine = _policy_moments_raw(env, theta, rework, 2 * n_nodes)
    err = max(
        abs(fine[0] - coarse[0]) / max(1.0, abs(fine[0])),
        abs(fine[1] - coarse[1]) / max(1.0, abs(fine[1])),
    )
    if err > _QUAD_RTOL:
        raise QuadratureError(
            f"policy-moment quadrature did not converge at {n_nodes} nodes: "
            f"doubling changed the result by {err:.3e} (tolerance {_QUAD_RTOL:.0e})",
            error_estimate=err,
        )
    return RouteMoments(mean=coarse[0], m2=coarse[1])


def irreducible_escape_rate(env: SignalEnvironment) -> float:
    """Policy-independent escape stream p_inf * E_s[pi(s)].

    This share of errors is uncatchable by review and is reported
    separately; it does not enter the policy route moments.
    """
    mean_risk = _integrate_unit(
        lambda s: env.risk_map.value(s) * env.signal_pdf(s), DEFAULT_NODES
    )
    return env.p_inf * mean_risk


def phi(
    env: SignalEnvironment,
    theta: float,
    rework: ReworkModel,
    lam: float,
    capacity: float,
    n_nodes: int = DEFAULT_NODES,
) -> float:
    """Marginal waiting cost of one more unit of mean review demand.

    Phi(theta) = c_w * lam^3 * q_A(theta) / (2 C (C - lam tau_A(theta))^2),
    the sensitivity of the delay cost to tau_A with q_A held fixed.
    """
    moments = policy_route_moments(env, theta, rework, n_nodes=n_nodes)
    rho = lam * moments.mean / capacity
    if rho >= 1.0 - EPS_RHO:
        raise StabilityError(
            f"queue unstable at theta={theta:.6g}: rho={rho:.6g}", rho=rho
        )
    return _phi_value(env.c_w, lam, capacity, moments.mean, moments.m2)


def _phi_value(c_w: float, lam: float, capacity: float, tau: float, q: float) -> float:
    return c_w * lam**3 * q / (2.0 * capacity * (capacity - lam * tau) ** 2)


def _degenerate_equilibrium(theta_hi: float, zero_demand: bool) -> EquilibriumSolution:
    if zero_demand:
        # pi == 0 everywhere: nothing is reviewed and nothing escapes.
        eq = Equilibrium(
            theta_star=0.0, pi_star=0.0, tau_A=0.0, q_A=0.0, rho=0.0, wq=0.0,
            residual=0.0, root_index=0, degenerate=True,
        )
    else:
        # c_w == 0: Phi vanishes identically and theta* collapses to the
        # boundary, where review effort diverges; route quantities are
        # undefined and reported as NaN.
        nan = float("nan")
        eq = Equilibrium(
            theta_star=0.0, pi_star=0.0, tau_A=nan, q_A=nan, rho=nan, wq=nan,
            residual=0.0, root_index=0, degenerate=True,
        )
    return EquilibriumSolution(primary=eq, roots=(eq,), theta_lo=0.0, theta_hi=theta_hi)


def solve_equilibrium(
    env: SignalEnvironment,
    rework: ReworkModel,
    lam: float,
    capacity: float,
    n_grid: int = DEFAULT_GRID,
    n_nodes: int = DEFAULT_NODES,
) -> EquilibriumSolution:
    """Find all fixed points of theta = Phi(theta) on the feasible domain.

    Scans g(theta) = theta - Phi(theta) on a geometric grid over
    [theta_lo, theta_hi], refines every sign change by bisection, and adds
    the analytic tail root above theta_hi (where no draft is reviewed and
    Phi is constant) when g is still negative there.  theta_lo is the
    smallest price at which the queue is stable: below it review effort
    inflates tau_A past capacity.  The smallest root is primary.
    """
    if not (math.isfinite(lam) and lam > 0.0):
        raise ValidationError(f"lam must be > 0, got {lam}", field="lam")
    if not (math.isfinite(capacity) and capacity > 0.0):
        raise ValidationError(f"capacity must be > 0, got {capacity}", field="capacity")
    if n_grid < 16:
        raise ValidationError(f"n_grid must be >= 16, got {n_grid}", field="n_grid")

    theta_hi = env.review_scale * env.risk_map.value(1.0)
    if theta_hi <= 0.0:
        return _degenerate_equilibrium(theta_hi=0.0, zero_demand=True)
    if env.c_w == 0.0:
        return _degenerate_equilibrium(theta_hi=theta_hi, zero_demand=False)

    def tau_at(theta: float) -> float:
        return _policy_moments_raw(env, theta, rework, n_nodes)[0]

    def stable(theta: float) -> bool:
        return lam * tau_at(theta) < capacity * (1.0 - EPS_RHO)

    def g_at(theta: float) -> float:
        tau, q = _policy_moments_raw(env, theta, rework, n_nodes)
        if lam * tau >= capacity * (1.0 - EPS_RHO):
            return math.nan
        return theta - _phi_value(env.c_w, lam, capacity, tau, q)

    # --- feasible interval -------------------------------------------------
    theta_tiny = theta_hi * 1e-12
    if stable(theta_tiny):
        theta_lo = theta_tiny
    else:
        anchor = None
        if stable(theta_hi):
            anchor = theta_hi
        else:
            for candidate in np.geomspace(theta_tiny, theta_hi, 64):
                if stable(candidate):
                    anchor = float(candidate)
                    break
        if anchor is None:
            tau_hi = tau_at(theta_hi)
            raise InfeasibleError(
                "no review price stabilizes the queue: even with no review "
                f"(theta >= {theta_hi:.6g}) the load is "
                f"rho = {lam * tau_hi / capacity:.6g}"
            )
        low, high = theta_tiny, anchor
        for _ in range(200):
            mid = math.sqrt(low * high)
            if high - low <= 1e-12 * high:
                break
            if stable(mid):
                high = mid
            else:
                low = mid
        theta_lo = high * (1.0 + 1e-6)
    theta_lo = min(theta_lo, theta_hi * (1.0 - 1e-9))

    # --- scan and bisect ---------------------------------------------------
    grid = np.geomspace(theta_lo, theta_hi, n_grid)
    g_values = np.array([g_at(t) for t in grid])

    def refine(lo: float, hi: float, g_lo: float) -> float | None:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if hi - lo <= 1e-13 * max(1.0, mid):
                break
            g_mid = g_at(mid)
            if math.isnan(g_mid):
                return None
            if (g_mid < 0.0) == (g_lo < 0.0):
                lo, g_lo = mid, g_mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    candidates: list[float] = []
    for i in range(n_grid - 1):
        g0, g1 = g_values[i], g_values[i + 1]
        if math.isnan(g0) or math.isnan(g1):
            continue
        if g0 == 0.0:
            candidates.append(float(grid[i]))
        elif g0 * g1 < 0.0:
            root = refine(float(grid[i]), float(grid[i + 1]), g0)
            if root is not None:
                candidates.append(root)
    if not math.isnan(g_values[-1]):
        if g_values[-1] == 0.0:
            candidates.append(float(grid[-1]))
        elif g_values[-1] < 0.0:
            # Above theta_hi the policy reviews nothing, so Phi is constant
            # at Phi(theta_hi) and the remaining root is exact.
            candidates.append(float(grid[-1] - g_values[-1]))

    if not candidates:
        raise NoRootError(
            "theta - Phi(theta) has no sign change on the feasible domain "
            f"[{theta_lo:.6g}, {theta_hi:.6g}]",
            thetas=grid,
            residuals=g_values,
        )

    roots: list[float] = []
    for theta in sorted(candidates):
        if not roots or theta - roots[-1] > 1e-9 * max(1.0, theta):
            roots.append(theta)

    # --- package -----------------------------------------------------------
    equilibria = []
    for index, theta in enumerate(roots):
        moments = policy_route_moments(env, theta, rework, n_nodes=n_nodes)
        rho = lam * moments.mean / capacity
        wq = wq_pk(QueueInputs(lam=lam, capacity=capacity, service=moments)).wq
        residual = abs(
            theta - _phi_value(env.c_w, lam, capacity, moments.mean, moments.m2)
        )
        if residual > _ROOT_RTOL * max(1.0, theta):
            raise WedgeqError(
                f"fixed-point residual {residual:.3e} at theta={theta!r} exceeds "
                f"the solver guarantee {_ROOT_RTOL:.0e}"
            )
        equilibria.append(
            Equilibrium(
                theta_star=theta,
                pi_star=pi_star(env, theta),
                tau_A=moments.mean,
                q_A=moments.m2,
                rho=rho,
                wq=wq,
                residual=residual,
                root_index=index,
            )
        )
    return EquilibriumSolution(
        primary=equilibria[0],
        roots=tuple(equilibria),
        theta_lo=float(theta_lo),
        theta_hi=float(theta_hi),
    )
