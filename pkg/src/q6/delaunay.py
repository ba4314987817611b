"""Periodic Delaunay orbits of the radial sixth-order ODE.

Orbits are even about their neck (the minimum, placed at t = 0) and about
their bulge at t = tau = T/2.  The half orbit [0, tau] is found by multiple
shooting; the other half is its mirror image under the reversor.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from q6.constants import DimensionalConstants
from q6.profiles import REVERSOR, hamiltonian_radial, ode_rhs, signed_power

log = logging.getLogger(__name__)

ODD = [1, 3, 5]


class StepFailure(RuntimeError):
    """The integrator could not advance (step size underflow)."""


class BlowUp(RuntimeError):
    """|v| exceeded the configured ceiling; the trajectory is unbounded."""


class NoConvergence(RuntimeError):
    pass


class EventNotFound(RuntimeError):
    pass


@dataclass
class Tolerances:
    ode: float = 1e-12
    newton: float = 1e-10
    event: float = 1e-12
    segment_length: float = 0.35
    max_newton: int = 30


def _fd_derivative(f, t, h):
    return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)


class SegmentedProfile:
    """Dense radial profile stitched from ODE solver segments.

    With ``reflect=True`` the segments cover the half orbit [0, tau] and the
    profile is the even 2*tau-periodic extension.
    """

    def __init__(self, c: DimensionalConstants, segments, reflect: bool = False):
        self.c = c
        self.segments = list(segments)
        self.breaks = np.array([s.t_min for s in self.segments] + [self.segments[-1].t_max])
        self.reflect = reflect
        if reflect:
            self.tau = float(self.breaks[-1])
            self.period = 2 * self.tau
            self.span = (0.0, self.period)
        else:
            self.period = None
            self.span = (float(self.breaks[0]), float(self.breaks[-1]))

    def _eval_forward(self, t: np.ndarray) -> np.ndarray:
        out = np.empty((6, t.size))
        idx = np.clip(np.searchsorted(self.breaks, t, side="right") - 1, 0, len(self.segments) - 1)
        for k in np.unique(idx):
            mask = idx == k
            out[:, mask] = self.segments[k](t[mask])
        return out

    def evaluate(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if not self.reflect:
            return self._eval_forward(t)
        s = np.mod(t, self.period)
        back = s > self.tau
        s_eval = np.where(back, self.period - s, s)
        y = self._eval_forward(s_eval)
        y[:, back] *= REVERSOR[:, None]
        return y

    def sixth_derivative(self, t, h: float = 2e-3) -> np.ndarray:
        """v'''''' from a 4th-order difference of the dense v''''' (a posteriori)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if not self.reflect:
            t0, t1 = self.span
            if np.any(t - 2 * h < t0) or np.any(t + 2 * h > t1):
                # one-sided near the ends: fall back to the vector field
                inner = (t - 2 * h >= t0) & (t + 2 * h <= t1)
                out = ode_rhs(self.c, self.evaluate(t))[5]
                if inner.any():
                    out[inner] = _fd_derivative(lambda s: self.evaluate(s)[5], t[inner], h)
                return out
        return _fd_derivative(lambda s: self.evaluate(s)[5], t, h)

    def sample(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        t0, t1 = self.span
        if self.period is not None:
            t = t0 + self.period * np.arange(m) / m
        else:
            t = np.linspace(t0, t1, m)
        return t, self.evaluate(t)


class TaylorProfile:
    """Profile from the multiprecision Taylor integrator (mpmath.odefun)."""

    def __init__(self, c, sol, span):
        self.c = c
        self._sol = sol
        self.span = (float(span[0]), float(span[1]))
        self.period = None

    def evaluate(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        t0 = self.span[0]
        return np.array([[float(x) for x in self._sol(ti - t0)] for ti in t]).T

    def sample(self, m: int):
        t = np.linspace(*self.span, m)
        return t, self.evaluate(t)

    def sixth_derivative(self, t) -> np.ndarray:
        return ode_rhs(self.c, self.evaluate(t))[5]


def _integrate_taylor(c, y0, span, dps):
    import mpmath

    if span[1] < span[0]:
        raise ValueError("taylor-mp integrates forward only")
    ctx = mpmath.mp.clone()
    ctx.dps = dps
    ex = c.exact
    K4, K2, K0, cn = (ctx.mpf(ex[k].numerator) / ex[k].denominator for k in ("K4", "K2", "K0", "cn"))
    q = ctx.mpf(c.n + 6) / (c.n - 6)

    def f(t, y):
        v = y[0]
        nl = cn * ctx.sign(v) * abs(v) ** q
        return [y[1], y[2], y[3], y[4], y[5], K4 * y[4] - K2 * y[2] + K0 * v - nl]

    sol = ctx.odefun(f, 0, [ctx.mpf(float(x)) for x in y0])
    return TaylorProfile(c, sol, span)


class _ConstantSolution:
    """Dense-output stand-in for a constant trajectory."""

    def __init__(self, y0, span):
        self.y0 = np.asarray(y0, dtype=float)
        self.t_min, self.t_max = min(span), max(span)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.repeat(self.y0[:, None], t.size, axis=1) if t.ndim else self.y0.copy()


def _is_equilibrium(c, y0) -> bool:
    if np.any(y0[1:] != 0):
        return False
    v = y0[0]
    return v == 0 or abs(c.K0 * v - c.cn * abs(v) ** c.q) <= 1e-12 * c.K0 * abs(v)


def integrate(
    c: DimensionalConstants,
    init,
    span,
    tol: float = 1e-12,
    ceiling: float = 1e3,
    method: str = "DOP853",
    dps: int = 40,
):
    """Adaptive integration of the radial ODE with dense output.

    ``method="taylor-mp"`` switches to a multiprecision Taylor integrator
    (``dps`` digits), needed to follow trajectories near the homoclinic
    orbit over long spans where double precision errors grow like e^{6t}.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    y0 = np.asarray(init, dtype=float)
    if y0.shape != (6,) or not np.all(np.isfinite(y0)):
        raise ValueError("init must be a finite 6-vector")
    if _is_equilibrium(c, y0):
        # the cylinder is hyperbolic: the rounding residual of the float
        # equilibrium would otherwise grow like exp(5.7 t) for n=10
        prof = SegmentedProfile(c, [_ConstantSolution(y0, span)])
        prof.hamiltonian_drift = 0.0
        return prof
    if method == "taylor-mp":
        prof = _integrate_taylor(c, y0, span, dps)
        t, y = prof.sample(21)
        if np.any(np.abs(y[0]) > ceiling):
            raise BlowUp(f"|v| exceeded {ceiling:g}")
        h = hamiltonian_radial(c, y)
        prof.hamiltonian_drift = float(np.max(np.abs(h - h[0])))
        return prof

    def blow(t, y):
        return ceiling - abs(y[0])

    blow.terminal = True

    def rhs(t, y):
        if not np.all(np.isfinite(y)):
            return np.full(6, np.nan)
        return ode_rhs(c, y)

    sol = solve_ivp(rhs, span, y0, method=method, rtol=tol, atol=tol, dense_output=True, events=blow)
    if sol.status == 1:
        raise BlowUp(f"|v| exceeded {ceiling:g} at t={sol.t_events[0][0]:.6g}")
    if sol.status != 0 or not np.all(np.isfinite(sol.y[:, -1])):
        raise StepFailure(sol.message)
    prof = SegmentedProfile(c, [sol.sol])
    h = hamiltonian_radial(c, sol.y)
    prof.hamiltonian_drift = float(np.max(np.abs(h - h[0])))
    return prof


def _variational_rhs(c: DimensionalConstants):
    def rhs(t, z):
        y = z[:6]
        phi = z[6:].reshape(6, 6)
        dy = ode_rhs(c, y)
        # d(phi)/dt = N phi; only the last row of N is non-trivial
        dphi = np.empty((6, 6))
        dphi[:5] = phi[1:]
        dfdv = c.K0 - c.cn * c.q * np.abs(y[0]) ** (c.q - 1)
        dphi[5] = dfdv * phi[0] - c.K2 * phi[2] + c.K4 * phi[4]
        return np.concatenate([dy, dphi.ravel()])

    return rhs


def _flow(c, y0, dt, tol, with_stm=True, dense=False):
    if with_stm:
        z0 = np.concatenate([y0, np.eye(6).ravel()])
        sol = solve_ivp(_variational_rhs(c), (0.0, dt), z0, method="DOP853", rtol=tol, atol=tol)
        if sol.status != 0 or not np.all(np.isfinite(sol.y[:, -1])):
            raise StepFailure(sol.message)
        z = sol.y[:, -1]
        return z[:6], z[6:].reshape(6, 6)
    sol = solve_ivp(lambda t, y: ode_rhs(c, y), (0.0, dt), y0, method="DOP853", rtol=tol, atol=tol,
                    dense_output=dense)
    if sol.status != 0:
        raise StepFailure(sol.message)
    return sol


@dataclass
class DelaunayOrbit:
    epsilon: float
    eps2: float
    eps4: float
    period: float
    profile: SegmentedProfile
    hamiltonian: float
    defect_norm: float
    newton_iters: int
    nodes: np.ndarray = field(repr=False)  # (m, 6) node states at s = k/m of the half orbit
    flag: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def tau(self) -> float:
        return 0.5 * self.period

    def state_at_fraction(self, s) -> np.ndarray:
        """States at t = s * tau, s in [0, 1]."""
        return self.profile.evaluate(np.asarray(s) * self.tau)


def _unpack(x, mode, fixed, m):
    e2, e4, free = x[0], x[1], x[2]
    if mode == "epsilon":
        eps, tau = fixed, free
    else:
        eps, tau = free, fixed
    y0 = np.array([eps, 0.0, e2, 0.0, e4, 0.0])
    nodes = [y0] + [x[3 + 6 * k: 9 + 6 * k] for k in range(m - 1)]
    return eps, tau, nodes


def _residual_and_jacobian(c, x, mode, fixed, m, tol):
    eps, tau, nodes = _unpack(x, mode, fixed, m)
    dt = tau / m
    size = 3 + 6 * (m - 1)
    F = np.zeros(size)
    J = np.zeros((size, size))
    for k in range(m):
        yend, phi = _flow(c, nodes[k], dt, tol)
        fend = ode_rhs(c, yend)
        rows = slice(6 * k, 6 * k + 6) if k < m - 1 else slice(6 * k, 6 * k + 3)
        sel = slice(None) if k < m - 1 else ODD
        F[rows] = (yend - nodes[k + 1])[sel] if k < m - 1 else yend[ODD]
        # derivative w.r.t. the start state of the segment
        if k == 0:
            J[rows, 0] = phi[:, 2][sel]
            J[rows, 1] = phi[:, 4][sel]
            if mode == "period":
                J[rows, 2] += phi[:, 0][sel]
        else:
            col = 3 + 6 * (k - 1)
            J[rows, col:col + 6] = phi[sel] if k == m - 1 else phi
        if k < m - 1:
            col = 3 + 6 * k
            J[rows, col:col + 6] -= np.eye(6)
        if mode == "epsilon":
            J[rows, 2] += (fend / m)[sel]
    return F, J


def _newton(c, x, mode, fixed, m, tol: Tolerances):
    F, J = _residual_and_jacobian(c, x, mode, fixed, m, tol.ode)
    norm = np.max(np.abs(F))
    for it in range(1, tol.max_newton + 1):
        if norm <= tol.newton:
            return x, norm, it - 1
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular shooting Jacobian: {exc}") from exc
        lam = 1.0
        while True:
            xn = x + lam * dx
            ok = True
            try:
                _, taun, nodesn = _unpack(xn, mode, fixed, m)
                if taun <= 0 or (mode == "period" and xn[2] <= 0):
                    raise StepFailure("left the admissible region")
                Fn, Jn = _residual_and_jacobian(c, xn, mode, fixed, m, tol.ode)
                normn = np.max(np.abs(Fn))
                ok = np.isfinite(normn) and normn < max(norm, 1e-300) * (1 - 1e-4 * lam) or normn <= tol.newton
            except (StepFailure, FloatingPointError, ValueError):
                ok = False
            if ok:
                break
            lam *= 0.5
            if lam < 1e-4:
                raise NoConvergence(f"line search failed at iteration {it} (residual {norm:.3e})")
        x, F, J, norm = xn, Fn, Jn, normn
    if norm <= tol.newton:
        return x, norm, tol.max_newton
    raise NoConvergence(f"no convergence after {tol.max_newton} iterations (residual {norm:.3e})")


def _segment_count(tau, tol: Tolerances) -> int:
    return max(4, int(math.ceil(tau / tol.segment_length)))


def _pack(eps, e2, e4, tau, node_states, mode):
    free = tau if mode == "epsilon" else eps
    return np.concatenate([[e2, e4, free], np.ravel(node_states[1:])])


def _linear_guess(c: DimensionalConstants, eps: float, m: int):
    from q6.spectral import cylinder_indicial

    beta = cylinder_indicial(c, 0).beta_cyl
    a = c.eps_star - eps
    tau = math.pi / beta
    s = np.arange(m) / m
    t = s * tau
    nodes = np.empty((m, 6))
    for k in range(6):
        # derivatives of eps_star - a cos(beta t)
        nodes[:, k] = -a * beta**k * np.cos(beta * t + k * math.pi / 2)
    nodes[:, 0] += c.eps_star
    return tau, nodes


def _finish(c, x, mode, fixed, m, norm, iters, tol: Tolerances) -> DelaunayOrbit:
    eps, tau, nodes = _unpack(x, mode, fixed, m)
    dt = tau / m
    segs = []
    for k in range(m):
        sol = solve_ivp(lambda t, y: ode_rhs(c, y), (k * dt, (k + 1) * dt), nodes[k], method="DOP853",
                        rtol=tol.ode, atol=tol.ode, dense_output=True)
        segs.append(sol.sol)
    prof = SegmentedProfile(c, segs, reflect=True)
    ham = float(hamiltonian_radial(c, nodes[0]))
    orbit = DelaunayOrbit(
        epsilon=float(eps), eps2=float(nodes[0][2]), eps4=float(nodes[0][4]), period=2 * tau,
        profile=prof, hamiltonian=ham, defect_norm=float(norm), newton_iters=iters, nodes=np.array(nodes),
    )
    validate_orbit(c, orbit)
    return orbit


def validate_orbit(c: DimensionalConstants, orbit: DelaunayOrbit, m: int = 2001) -> None:
    """Fill ``orbit.diagnostics`` and ``orbit.flag`` from the orbit invariants."""
    t = np.linspace(0.0, orbit.tau, m)
    y = orbit.profile.evaluate(t)
    flags = []
    v, v1 = y[0], y[1]
    ham = hamiltonian_radial(c, y)
    d = orbit.diagnostics
    d["min_v"] = float(v.min())
    d["max_v"] = float(v.max())
    d["necksize_rel_err"] = abs(d["min_v"] - orbit.epsilon) / orbit.epsilon
    d["hamiltonian_drift"] = float(np.max(np.abs(ham - orbit.hamiltonian)))
    d["half_period_odd_defect"] = float(np.max(np.abs(y[ODD, -1])))
    # continuity at the stitched segment joints
    joints = orbit.profile.breaks[1:-1]
    jump = 0.0
    for tj, seg_l, seg_r in zip(joints, orbit.profile.segments[:-1], orbit.profile.segments[1:]):
        jump = max(jump, float(np.max(np.abs(seg_l(tj) - seg_r(tj)))))
    d["joint_jump"] = jump
    d["periodicity_defect"] = max(jump, d["half_period_odd_defect"])
    if orbit.eps2 <= 0:
        flags.append("neck-not-minimum")
    if np.any(v <= 0):
        flags.append("sign-change")
    interior = v1[1:-1]
    if np.any(interior <= 0):
        flags.append("non-monotone-rise")
    if not (c.hamiltonian_cyl < orbit.hamiltonian < 0):
        flags.append("energy-out-of-range")
    if not (0 < orbit.epsilon < c.eps_star):
        flags.append("necksize-out-of-range")
    orbit.flag = ";".join(flags)


def _solve(c, mode, fixed, guess_x, m, tol: Tolerances) -> DelaunayOrbit:
    x, norm, iters = _newton(c, guess_x, mode, fixed, m, tol)
    return _finish(c, x, mode, fixed, m, norm, iters, tol)


def _guess_from(c, mode, fixed, m, orbits, target):
    """Predictor: node states at fixed fractions of the half period, linearly
    extrapolated from the last one or two orbits in the continuation
    parameter (epsilon or period)."""
    s = np.arange(m) / m
    key = (lambda o: o.epsilon) if mode == "epsilon" else (lambda o: o.period)
    o1 = orbits[-1]
    y1 = o1.state_at_fraction(s).T
    p1 = np.array([o1.epsilon, o1.tau])
    if len(orbits) >= 2 and key(orbits[-2]) != key(o1):
        o2 = orbits[-2]
        w = (target - key(o1)) / (key(o1) - key(o2))
        y2 = o2.state_at_fraction(s).T
        ynodes = y1 + w * (y1 - y2)
        p = p1 + w * (p1 - np.array([o2.epsilon, o2.tau]))
    else:
        ynodes, p = y1, p1
    eps, tau = p
    if mode == "epsilon":
        eps = target
    else:
        tau = target / 2
    ynodes = ynodes.copy()
    ynodes[0] = [eps, 0.0, ynodes[0][2], 0.0, ynodes[0][4], 0.0]
    return _pack(eps, ynodes[0][2], ynodes[0][4], tau, ynodes, mode)


def shoot_delaunay(
    c: DimensionalConstants,
    epsilon: float,
    guess: tuple[float, float] | None = None,
    tol: Tolerances | None = None,
) -> DelaunayOrbit:
    """Delaunay orbit with neck value ``epsilon`` (0 < epsilon < eps_star).

    Without a warm start this continues from the small-amplitude regime near
    the cylinder down to ``epsilon``.  ``guess`` optionally seeds the neck
    data (v''(0), v''''(0)) and is used for a direct solve.
    """
    tol = tol or Tolerances()
    if not (0 < epsilon < c.eps_star):
        raise ValueError(f"epsilon must lie in (0, eps_star={c.eps_star:.6g}), got {epsilon}")
    if guess is not None:
        tau, nodes = _linear_guess(c, epsilon, 1)
        m = _segment_count(tau, tol)
        tau, nodes = _linear_guess(c, epsilon, m)
        nodes = np.asarray(nodes)
        y0 = np.array([epsilon, 0, guess[0], 0, guess[1], 0.0])
        # integrate the guessed neck data forward to seed the interior nodes
        try:
            sol = _flow(c, y0, tau, tol.ode, with_stm=False, dense=True)
            nodes = sol.sol(np.arange(m) / m * tau).T
        except StepFailure:
            pass
        x = _pack(epsilon, guess[0], guess[1], tau, nodes, "epsilon")
        return _solve(c, "epsilon", epsilon, x, m, tol)
    family = continue_family(c, _default_path(c, epsilon), tol=tol)
    if not family.orbits or family.orbits[-1].epsilon != epsilon:
        raise NoConvergence(f"continuation to epsilon={epsilon} failed: {family.failures}")
    return family.orbits[-1]


def _default_path(c, epsilon):
    start = max(epsilon, 0.99 * c.eps_star) if epsilon < 0.99 * c.eps_star else epsilon
    if start == epsilon:
        return [epsilon]
    k = max(2, int(math.ceil((start - epsilon) / (0.05 * c.eps_star))))
    return list(np.linspace(start, epsilon, k + 1))


@dataclass
class FamilyResult:
    orbits: list
    failures: list

    def __iter__(self):
        return iter(self.orbits)

    def __len__(self):
        return len(self.orbits)


def _continue(c, mode, targets, tol: Tolerances, seed=None, max_halvings=6):
    orbits = list(seed or [])
    failures = []
    for target in targets:
        pending = [target]
        halvings = 0
        while pending:
            tgt = pending[-1]
            try:
                if orbits:
                    tau_est = orbits[-1].tau if mode == "epsilon" else tgt / 2
                    m = _segment_count(max(tau_est, orbits[-1].tau), tol)
                    x0 = _guess_from(c, mode, tgt, m, orbits, tgt)
                else:
                    if mode != "epsilon":
                        raise ValueError("period continuation needs a seed orbit")
                    tau0, nodes = _linear_guess(c, tgt, 1)
                    m = _segment_count(tau0, tol)
                    tau0, nodes = _linear_guess(c, tgt, m)
                    x0 = _pack(tgt, nodes[0][2], nodes[0][4], tau0, nodes, mode)
                fixed = tgt if mode == "epsilon" else 0.5 * tgt
                orbit = _solve(c, mode, fixed, x0, m, tol)
                if orbit.flag:
                    raise NoConvergence(f"converged to a flagged orbit ({orbit.flag})")
                orbits.append(orbit)
                pending.pop()
            except (NoConvergence, StepFailure, EventNotFound) as exc:
                if not orbits or halvings >= max_halvings:
                    failures.append({"target": float(tgt), "error": str(exc)})
                    log.warning("continuation failed at %s=%g: %s", mode, tgt, exc)
                    pending.pop()
                    if tgt == target:
                        break
                    continue
                prev = orbits[-1].epsilon if mode == "epsilon" else orbits[-1].period
                pending.append(0.5 * (prev + tgt))
                halvings += 1
    return orbits, failures


def continue_family(c: DimensionalConstants, eps_grid, tol: Tolerances | None = None) -> FamilyResult:
    """Warm-started continuation along a decreasing necksize grid.

    Failed points are recorded in ``failures``; the sweep itself never aborts.
    Intermediate orbits created by step halving are not returned.
    """
    tol = tol or Tolerances()
    grid = [float(e) for e in eps_grid]
    if any(not (0 < e < c.eps_star) for e in grid):
        raise ValueError("eps_grid values must lie strictly inside (0, eps_star)")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("eps_grid must be strictly decreasing")
    orbits, failures = [], []
    for e in grid:
        got, fail = _continue(c, "epsilon", [e], tol, seed=orbits[-2:] if orbits else None)
        if got and got[-1].epsilon == e:
            orbits.append(got[-1])
        failures.extend(fail)
    return FamilyResult(orbits, failures)


def shoot_period(c: DimensionalConstants, period: float, seed_orbits, tol: Tolerances | None = None,
                 step: float = 0.25) -> DelaunayOrbit:
    """Orbit with prescribed fundamental period, by continuation in the period
    starting from ``seed_orbits``.

    The two seeds closest in period feed the predictor, so a target inside
    the range of a seed family is reached by interpolation.  A single seed
    near the cylinder is a poor start: there T(epsilon) is nearly flat.
    """
    tol = tol or Tolerances()
    seeds = sorted(seed_orbits, key=lambda o: abs(o.period - period))[:2][::-1]
    if not seeds:
        raise ValueError("need at least one seed orbit")
    if len(seeds) == 2 and seeds[0].period == seeds[1].period:
        seeds = seeds[1:]
    p0 = seeds[-1].period
    k = max(1, int(math.ceil(abs(period - p0) / step)))
    path = list(np.linspace(p0, period, k + 1)[1:])
    orbits, failures = _continue(c, "period", path, tol, seed=seeds)
    if failures or not orbits or orbits[-1].period != period:
        raise NoConvergence(f"period continuation to T={period} failed: {failures}")
    return orbits[-1]


def period_of(orbit: DelaunayOrbit) -> float:
    return orbit.period


def cross_check_period(c: DimensionalConstants, orbit: DelaunayOrbit, state_tol: float = 1e-6) -> dict:
    """Compare the symmetric-shooting period with the forward return time.

    ``checked`` is False when the forward trajectory loses the orbit before
    returning (state mismatch above ``state_tol``); the comparison is then
    not informative and is skipped rather than failed.
    """
    try:
        tr, mismatch = return_time(c, orbit)
    except (EventNotFound, StepFailure):
        return {"checked": False, "return_time": float("nan"), "mismatch": float("inf"), "rel_diff": float("nan")}
    rel = abs(tr - orbit.period) / orbit.period
    return {"checked": mismatch <= state_tol, "return_time": tr, "mismatch": mismatch, "rel_diff": rel}


def return_time(c: DimensionalConstants, orbit: DelaunayOrbit, tol: float = 1e-12):
    """Forward-integrate the full 6-d state from the neck and measure the time
    of the next neck (upward zero of v').  Returns (time, state mismatch).

    Only meaningful when the orbit is mildly hyperbolic; for thin necks the
    forward flow amplifies rounding by the largest Floquet multiplier and the
    mismatch says so.
    """

    def ev(t, y):
        return y[1]

    ev.direction = 1
    y0 = orbit.profile.evaluate(0.0)[:, 0]
    sol = solve_ivp(lambda t, y: ode_rhs(c, y), (0.0, 1.5 * orbit.period), y0, method="DOP853",
                    rtol=tol, atol=tol, events=ev, dense_output=True)
    times = [t for t in sol.t_events[0] if t > orbit.tau]
    if not times:
        raise EventNotFound("no return to the neck within 1.5 periods")
    tr = float(times[0])
    mismatch = float(np.max(np.abs(sol.sol(tr) - y0)))
    return tr, mismatch


def sphere_distance(c: DimensionalConstants, orbit: DelaunayOrbit, m: int = 401) -> float:
    """Max |v(tau + s) - cosh(s)^{(6-n)/2}| for |s| <= T/4: the orbit centred
    at its maximum against the spherical profile centred at 0."""
    s = np.linspace(-0.25 * orbit.period, 0.25 * orbit.period, m)
    v = orbit.profile.evaluate(orbit.tau + s)[0]
    return float(np.max(np.abs(v - np.cosh(s) ** (-c.gamma_n))))
