"""Numerical integration of the full slow-fast system and of reduced systems.

The integrator is the Dormand-Prince 5(4) pair with free interpolation;
stiff problems surface as :class:`StepSizeUnderflow` rather than being
handed to an implicit scheme.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from sympy.polys.fields import FracElement
from sympy.polys.rings import PolyElement

from .exact import to_fraction
from .model import Model, format_model


class StepSizeUnderflow(RuntimeError):
    pass


class DenominatorBlowup(RuntimeError):
    pass


class PositivityViolation(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Dormand-Prince tableau

_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
# dense output: y(t + th*h) = y + h * K^T (P @ [th, th^2, th^3, th^4])
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)


def _stages(f, t, y, h, k0):
    K = np.empty((7, y.size))
    K[0] = k0
    for i in range(1, 7):
        yi = y + h * (np.dot(_A[i], K[:i]) if i else 0)
        K[i] = f(t + _C[i] * h, yi)
    return K


def _interp(y, h, K, theta):
    powers = np.array([theta, theta**2, theta**3, theta**4])
    return y + h * (K.T @ (_P @ powers))


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    positivity_rejections: int = 0
    evaluations: int = 0


def dopri5(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: Sequence[float],
    t_eval: Sequence[float],
    tol: float = 1e-9,
    h0: float | None = None,
    max_steps: int = 2_000_000,
    positive: bool = False,
    monitor: Callable[[float, np.ndarray], None] | None = None,
    stats: StepStats | None = None,
) -> np.ndarray:
    """Adaptive integration; returns the states at the increasing times ``t_eval``.

    The mixed error test uses ``atol = rtol = tol``. With ``positive`` set,
    steps that produce a negative component are rejected and retried with a
    smaller step; a violation that persists down to the minimal step raises.
    """
    stats = stats if stats is not None else StepStats()
    y = np.array(y0, dtype=float)
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval.size and (np.any(np.diff(t_eval) < 0) or t_eval[0] < t0):
        raise ValueError("output times must be increasing and not before t0")
    out = np.empty((t_eval.size, y.size))
    t_end = float(t_eval[-1]) if t_eval.size else t0
    idx = 0
    while idx < t_eval.size and t_eval[idx] <= t0:
        out[idx] = y
        idx += 1
    k0 = np.asarray(f(t0, y), dtype=float)
    stats.evaluations += 1
    t = t0
    if h0 is None:
        scale = tol + tol * np.abs(y)
        d0 = np.sqrt(np.mean((y / scale) ** 2))
        d1 = np.sqrt(np.mean((k0 / scale) ** 2))
        h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
        h = min(h, t_end - t0) if t_end > t0 else h
    else:
        h = h0
    steps = 0
    while idx < t_eval.size:
        if steps >= max_steps:
            raise StepSizeUnderflow(f"step budget of {max_steps} exhausted at t = {t:.6g}")
        h = min(h, t_end - t)
        hmin = 1e-14 * max(1.0, abs(t))
        if h < hmin:
            raise StepSizeUnderflow(
                f"step size {h:.3e} fell below {hmin:.3e} at t = {t:.6g}; try a shorter horizon or a larger epsilon"
            )
        K = _stages(f, t, y, h, k0)
        stats.evaluations += 6
        y5 = y + h * (_B5 @ K)
        y4 = y + h * (_B4 @ K)
        scale = tol + tol * np.maximum(np.abs(y), np.abs(y5))
        err = float(np.sqrt(np.mean(((y5 - y4) / scale) ** 2)))
        steps += 1
        if not np.isfinite(err) or err > 1.0:
            stats.rejected += 1
            fac = 0.2 if not np.isfinite(err) else max(0.2, 0.9 * err ** -0.2)
            h *= fac
            continue
        if positive and np.any(y5 < 0):
            stats.positivity_rejections += 1
            if h * 0.5 < hmin:
                raise PositivityViolation(f"solution leaves the positive orthant at t = {t:.6g}")
            h *= 0.5
            continue
        t_new = t + h
        while idx < t_eval.size and t_eval[idx] <= t_new:
            theta = (t_eval[idx] - t) / h
            out[idx] = _interp(y, h, K, theta)
            idx += 1
        t, y, k0 = t_new, y5, K[6]
        stats.accepted += 1
        if monitor is not None:
            monitor(t, y)
        h *= min(5.0, max(0.2, 0.9 * err ** -0.2)) if err > 0 else 5.0
    return out


def rk_fixed(f, t0: float, y0: Sequence[float], t_end: float, steps: int, order: int = 4) -> np.ndarray:
    """Fixed-step propagation with the order-4 (default) or order-5 member of the pair."""
    weights = {4: _B4, 5: _B5}[order]
    y = np.array(y0, dtype=float)
    h = (t_end - t0) / steps
    t = t0
    for _ in range(steps):
        K = _stages(f, t, y, h, np.asarray(f(t, y), dtype=float))
        y = y + h * (weights @ K)
        t += h
    return y


# ---------------------------------------------------------------------------
# compiled polynomial maps


class PolyMap:
    """Vectorised evaluation of a list of polynomials with rational coefficients."""

    def __init__(self, polys: Sequence[PolyElement], nvars: int):
        exps, coeffs, owner = [], [], []
        for i, p in enumerate(polys):
            for monom, c in p.terms():
                exps.append(monom)
                coeffs.append(float(to_fraction(c)))
                owner.append(i)
        self.size = len(polys)
        self.E = np.array(exps, dtype=float).reshape(-1, nvars)
        self.C = np.array(coeffs, dtype=float)
        self.owner = np.array(owner, dtype=int)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if not self.C.size:
            return np.zeros(self.size)
        mon = np.prod(np.power(x[None, :], self.E), axis=1)
        return np.bincount(self.owner, weights=self.C * mon, minlength=self.size)


class RatMap:
    """Vectorised evaluation of rational functions; also reports denominators."""

    def __init__(self, fracs: Sequence[FracElement], nvars: int):
        self.num = PolyMap([f.numer for f in fracs], nvars)
        self.den = PolyMap([f.denom for f in fracs], nvars)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.num(v) / self.den(v)

    def denominators(self, v: np.ndarray) -> np.ndarray:
        return self.den(v)


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    scale: str  # "fast-t" or "slow-tau"
    eps: float | None
    settings: dict = field(default_factory=dict)
    model_hash: str = ""
    x: np.ndarray | None = None  # Phi(v) for reduced trajectories

    def __post_init__(self):
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.states.shape[0] != self.times.size:
            raise ValueError("one state row per time required")


def model_hash(model: Model) -> str:
    return hashlib.sha256(format_model(model).encode()).hexdigest()[:16]


def _fields(model):
    """(h0, h1, n, is_crn) for a Model or a PMuDecomposition-like object."""
    if isinstance(model, Model):
        return model.h0(), model.h1(), model.n, model.generic is None
    return model.h0, model.h1, model.n, model.split is not None


def integrate_full(
    model,
    eps: float,
    x0: Sequence[float],
    t_end_slow: float | None = None,
    tol: float = 1e-9,
    grid: Sequence[float] | None = None,
    t_end_fast: float | None = None,
    points: int = 201,
) -> Trajectory:
    """x' = h0(x) + eps h1(x) in fast time, sampled on a slow-time grid.

    With ``eps = 0`` the pure fast flow is integrated up to ``t_end_fast``
    and the trajectory is tagged with fast time.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    h0, h1, n, crn = _fields(model)
    x0 = np.array(x0, dtype=float)
    if x0.size != n:
        raise ValueError(f"x0 has {x0.size} entries, the model has {n} variables")
    if crn and np.any(x0 <= 0):
        raise ValueError("x0 must be positive for a reaction network")
    f0, f1 = PolyMap(h0, n), PolyMap(h1, n)

    def rhs(t, x):
        return f0(x) + eps * f1(x)

    if eps == 0:
        if t_end_fast is None:
            raise ValueError("eps = 0 needs t_end_fast")
        t_fast = np.linspace(0.0, t_end_fast, points) if grid is None else np.asarray(grid, dtype=float)
        scale, times = "fast-t", t_fast
    else:
        if grid is None:
            if t_end_slow is None:
                raise ValueError("t_end_slow or grid required")
            grid = np.linspace(0.0, t_end_slow, points)
        times = np.asarray(grid, dtype=float)
        t_fast = times / eps
        scale = "slow-tau"
    states = dopri5(rhs, 0.0, x0, t_fast, tol=tol, positive=crn)
    meta = {"method": "dopri5", "tol": tol}
    mh = model_hash(model) if isinstance(model, Model) else ""
    return Trajectory(times, states, scale, eps, meta, mh)


def integrate_reduced(
    rsys,
    v0: Sequence[float],
    tau_end: float | None = None,
    tol: float = 1e-10,
    grid: Sequence[float] | None = None,
    points: int = 201,
    pole_guard: float = 1e-8,
) -> Trajectory:
    """Integrate v' = rhs(v) in slow time and record x = Phi(v)."""
    s = rsys.s
    v0 = np.array(v0, dtype=float)
    if v0.size != s:
        raise ValueError(f"v0 has {v0.size} entries, expected {s}")
    if np.any(v0 <= 0):
        raise ValueError("v0 must be positive")
    F = RatMap(rsys.rhs, s)
    if grid is None:
        if tau_end is None:
            raise ValueError("tau_end or grid required")
        grid = np.linspace(0.0, tau_end, points)
    times = np.asarray(grid, dtype=float)
    d0 = np.abs(F.denominators(v0))
    if np.any(d0 == 0):
        raise DenominatorBlowup("initial value is a pole of the reduced right-hand side")

    last = [0.0, v0]

    def guard(t, v):
        last[:] = [t, v]
        d = np.abs(F.denominators(v))
        if np.any(d < pole_guard * d0) or not np.all(np.isfinite(d)):
            raise DenominatorBlowup(f"trajectory approaches a pole of the right-hand side at tau = {t:.6g}")

    if all(not f for f in rsys.rhs):
        states = np.repeat(v0[None, :], times.size, axis=0)
    else:
        try:
            states = dopri5(lambda t, v: F(v), 0.0, v0, times, tol=tol, positive=True, monitor=guard)
        except (StepSizeUnderflow, PositivityViolation) as exc:
            # steps collapse just before a pole; name the cause when a denominator has shrunk
            d = np.abs(F.denominators(last[1]))
            if np.any(d < 1e-3 * d0):
                raise DenominatorBlowup(f"trajectory approaches a pole of the right-hand side at tau = {last[0]:.6g}") from exc
            raise
    x = np.array([rsys.phi.evaluate_float(v) for v in states])
    return Trajectory(times, states, "slow-tau", None, {"method": "dopri5", "tol": tol}, "", x)


def manifold_residual(h0_polys: Sequence[PolyElement], xs: np.ndarray) -> np.ndarray:
    f = PolyMap(h0_polys, xs.shape[1])
    return np.array([float(np.max(np.abs(f(x)))) if f.size else 0.0 for x in xs])


# ---------------------------------------------------------------------------
# convergence


@dataclass
class ConvergenceResult:
    eps_ladder: list[float]
    errors: list[float]
    ratios: list[float]
    tau_window: tuple[float, float]
    full: list[Trajectory] = field(default_factory=list, repr=False)
    reduced: Trajectory | None = field(default=None, repr=False)

    @property
    def monotone(self) -> bool:
        return all(b < a for a, b in zip(self.errors, self.errors[1:]))

    def within(self, lo: float = 0.3, hi: float = 0.75) -> bool:
        return all(lo <= q <= hi for q in self.ratios)


def default_tau_min(eps: float) -> float:
    return 10 * eps * math.log(1 / eps)


def convergence_study(
    model,
    rsys,
    v0: Sequence[float],
    eps_ladder: Sequence[float] = (0.04, 0.02, 0.01, 0.005),
    tau_window: tuple[float, float] | None = None,
    tol: float = 1e-10,
    x0: Sequence[float] | None = None,
    points: int = 200,
    tau_max: float = 5.0,
) -> ConvergenceResult:
    """sup over the window of |x_full(tau; eps) - Phi(v(tau))|_inf for each eps."""
    ladder = [float(e) for e in eps_ladder]
    if not ladder or any(e <= 0 for e in ladder):
        raise ValueError("every epsilon must be positive")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("epsilon ladder must be strictly decreasing")
    if tau_window is None:
        tau_window = (max(default_tau_min(e) for e in ladder), tau_max)
    lo, hi = tau_window
    if not 0 < lo < hi:
        raise ValueError("tau window must satisfy 0 < tau_min < tau_max")
    grid = np.linspace(lo, hi, points)
    full_grid = np.concatenate([[0.0], grid])
    red = integrate_reduced(rsys, v0, grid=full_grid, tol=tol)
    start = np.array(x0, dtype=float) if x0 is not None else red.x[0]
    errors, trajs = [], []
    for e in ladder:
        tr = integrate_full(model, e, start, grid=full_grid, tol=tol)
        trajs.append(tr)
        errors.append(float(np.max(np.abs(tr.states[1:] - red.x[1:]))))
    ratios = [b / a if a > 0 else math.nan for a, b in zip(errors, errors[1:])]
    return ConvergenceResult(ladder, errors, ratios, (lo, hi), trajs, red)


# ---------------------------------------------------------------------------
# CSV


def write_csv(path, times: np.ndarray, v: np.ndarray, x: np.ndarray, residual: np.ndarray) -> None:
    """Columns tau, v1..vs, x1..xn, residual with 17 significant digits."""
    s, n = v.shape[1], x.shape[1]
    header = ["tau"] + [f"v{i + 1}" for i in range(s)] + [f"x{i + 1}" for i in range(n)] + ["residual"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k in range(times.size):
            row = [times[k], *v[k], *x[k], residual[k]]
            w.writerow(["%.17g" % float(a) for a in row])


__all__ = [
    "ConvergenceResult",
    "DenominatorBlowup",
    "PolyMap",
    "PositivityViolation",
    "RatMap",
    "StepSizeUnderflow",
    "StepStats",
    "Trajectory",
    "convergence_study",
    "default_tau_min",
    "dopri5",
    "integrate_full",
    "integrate_reduced",
    "manifold_residual",
    "rk_fixed",
    "write_csv",
]
