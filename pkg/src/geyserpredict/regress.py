"""Duration -> interval regression: linear, exponential and sigmoidal fits.

Model forms (x = eruption duration in minutes, y = following gap in minutes):

- linear:      y = a*x + b
- exponential: y = a*exp(b*x) + c
- sigmoidal:   y = y0 + L / (1 + exp(-k*(x - x0)))

The nonlinear families are fitted by multistart Levenberg-Marquardt on
standardized data (zero mean, unit variance in x and y); parameters are
mapped back to minutes before being returned.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from geyserpredict.errors import DegenerateDesign, NonConvergenceWarning
from geyserpredict.lm import levenberg_marquardt

KINDS = ("linear", "exponential", "sigmoidal")
PARAM_NAMES = {
    "linear": ("a", "b"),
    "exponential": ("a", "b", "c"),
    "sigmoidal": ("L", "k", "x0", "y0"),
}
MIN_SAMPLES = {"linear": 2, "exponential": 4, "sigmoidal": 5}
EXP_CLIP = 700.0


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 200
    relative_sse_tolerance: float = 1e-10
    parameter_tolerance: float = 1e-8
    multistart_count: int = 16

    def __post_init__(self):
        for name, value in vars(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class RegressionModel:
    kind: str
    params: tuple
    sse: float
    n: int
    converged: bool = True
    iterations: int = 0

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "sse", float(self.sse))
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if len(self.params) != len(PARAM_NAMES[self.kind]):
            raise ValueError(f"{self.kind} needs {len(PARAM_NAMES[self.kind])} parameters")
        if not all(math.isfinite(p) for p in self.params):
            raise ValueError("parameters must be finite")

    @property
    def named_params(self) -> dict:
        return dict(zip(PARAM_NAMES[self.kind], self.params))

    def to_text(self) -> str:
        """Plain key=value block, numbers to 12 significant digits."""
        lines = [f"kind={self.kind}"]
        lines += [f"{k}={v:.12g}" for k, v in self.named_params.items()]
        lines += [f"sse={self.sse:.12g}", f"n={self.n}", f"converged={str(self.converged).lower()}"]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RegressionModel":
        kv = dict(line.split("=", 1) for line in text.strip().splitlines() if "=" in line)
        kind = kv["kind"]
        params = tuple(float(kv[name]) for name in PARAM_NAMES[kind])
        return cls(
            kind,
            params,
            float(kv["sse"]),
            int(kv["n"]),
            converged=kv.get("converged", "true") == "true",
        )


def _curve(kind, params, x):
    x = np.asarray(x, dtype=float)
    if kind == "linear":
        a, b = params
        return a * x + b
    if kind == "exponential":
        a, b, c = params
        return a * np.exp(np.clip(b * x, -EXP_CLIP, EXP_CLIP)) + c
    L, k, x0, y0 = params
    return y0 + L * _logistic(k * (x - x0))


def _logistic(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def predict(model: RegressionModel, x_duration_min: float) -> float:
    """Predicted gap in minutes for one eruption duration."""
    return float(_curve(model.kind, model.params, x_duration_min))


def predict_many(model: RegressionModel, x) -> np.ndarray:
    return _curve(model.kind, model.params, x)


def sse_of(kind, params, x, y) -> float:
    r = _curve(kind, params, x) - np.asarray(y, dtype=float)
    return float(r @ r)


def _xy(pairs):
    x = np.array([p.x_duration_min for p in pairs], dtype=float)
    y = np.array([p.y_gap_min for p in pairs], dtype=float)
    return x, y


def ols_line(x, y):
    """Closed-form least-squares line; returns (slope, intercept)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise DegenerateDesign("need at least 2 points for a line")
    mx, my = x.mean(), y.mean()
    dx = x - mx
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise DegenerateDesign("all x values identical")
    slope = float(dx @ (y - my)) / sxx
    return slope, float(my - slope * mx)


def fit_linear(pairs) -> RegressionModel:
    x, y = _xy(pairs)
    a, b = ols_line(x, y)
    return RegressionModel("linear", (a, b), sse_of("linear", (a, b), x, y), len(x))


class _Standardizer:
    def __init__(self, x, y):
        self.mx, self.my = float(x.mean()), float(y.mean())
        sx, sy = float(x.std()), float(y.std())
        self.sx = sx if sx > 0 else 1.0
        self.sy = sy if sy > 0 else 1.0
        self.u = (x - self.mx) / self.sx
        self.v = (y - self.my) / self.sy


# Normalized-space exponential: v = A*exp(B*u) + C


def _exp_residual(u, v):
    def f(p):
        A, B, C = p
        return A * np.exp(np.clip(B * u, -EXP_CLIP, EXP_CLIP)) + C - v

    return f


def _exp_jacobian(u):
    def jac(p):
        A, B, _ = p
        e = np.exp(np.clip(B * u, -EXP_CLIP, EXP_CLIP))
        return np.column_stack([e, A * u * e, np.ones_like(u)])

    return jac


_EXP_RATES = (0.5, -0.5, 1.0, -1.0, 1.5, -1.5, 2.0, -2.0, 0.25, -0.25, 3.0, -3.0, 0.1, -0.1, 4.0, -4.0)


def exponential_seeds(st: _Standardizer, count: int):
    """Normalized-space starts whose slope at u=0 matches the linear fit."""
    slope = float(st.u @ st.v) / float(st.u @ st.u)
    seeds = []
    for i in range(count):
        B = _EXP_RATES[i % len(_EXP_RATES)] * (1 + i // len(_EXP_RATES))
        A = slope / B
        seeds.append(np.array([A, B, -A]))
    return seeds


def _exp_to_minutes(st: _Standardizer, p):
    A, B, C = p
    b = B / st.sx
    a = st.sy * A * math.exp(-B * st.mx / st.sx)
    c = st.my + st.sy * C
    return (a, b, c)


# Normalized-space sigmoid: v = Y0 + Ls / (1 + exp(-K*(u - U)))


def _sig_residual(u, v):
    def f(p):
        Ls, K, U, Y0 = p
        return Y0 + Ls * _logistic(K * (u - U)) - v

    return f


def _sig_jacobian(u):
    def jac(p):
        Ls, K, U, _ = p
        s = _logistic(K * (u - U))
        ds = s * (1.0 - s)
        return np.column_stack([s, Ls * ds * (u - U), -Ls * K * ds, np.ones_like(u)])

    return jac


def sigmoid_seeds(st: _Standardizer, count: int):
    """Starts with x0 at quantiles of the observed durations.

    Plateau seeds come from the 10th/90th percentiles of y; steepness seeds
    take both signs, the sign of the x/y correlation first.
    """
    lo, hi = np.quantile(st.v, [0.1, 0.9])
    L = hi - lo
    if L <= 0:
        L = float(st.v.max() - st.v.min()) or 1.0
    sign = 1.0 if float(st.u @ st.v) >= 0 else -1.0
    centers = np.quantile(st.u, [0.2, 0.4, 0.6, 0.8, 0.5, 0.3, 0.7, 0.1, 0.9])
    steep = (2.0 * sign, 8.0 * sign, -2.0 * sign, -8.0 * sign, 4.0 * sign, 16.0 * sign)
    seeds = []
    for K in steep:
        for U in centers[:4]:
            seeds.append(np.array([L, K, U, lo]))
    for K in steep:
        for U in centers[4:]:
            seeds.append(np.array([L, K, U, lo]))
    out = []
    i = 0
    while len(out) < count:
        out.append(seeds[i % len(seeds)])
        i += 1
    return out


def _sig_to_minutes(st: _Standardizer, p):
    Ls, K, U, Y0 = p
    L = st.sy * Ls
    k = K / st.sx
    x0 = st.mx + st.sx * U
    y0 = st.my + st.sy * Y0
    if L < 0:
        L, k, y0 = -L, -k, y0 + L
    return (L, k, x0, y0)


def _check_inputs(kind, x, y):
    need = MIN_SAMPLES[kind]
    if x.size < need:
        raise DegenerateDesign(f"{kind} fit needs at least {need} pairs, got {x.size}")
    if np.unique(x).size < 2:
        raise DegenerateDesign("all x values identical")


def _multistart(kind, residual, jacobian, seeds, opts: FitOptions):
    best = None
    any_converged = False
    total_iterations = 0
    for seed in seeds:
        res = levenberg_marquardt(
            residual,
            jacobian,
            seed,
            max_iterations=opts.max_iterations,
            relative_sse_tolerance=opts.relative_sse_tolerance,
            parameter_tolerance=opts.parameter_tolerance,
        )
        total_iterations += res.iterations
        any_converged |= res.converged
        if not np.isfinite(res.sse) or not np.all(np.isfinite(res.params)):
            continue
        if best is None or res.sse < best.sse:
            best = res
    if best is None:
        raise DegenerateDesign(f"{kind} fit produced no finite solution")
    if not any_converged:
        warnings.warn(
            f"{kind} fit hit the iteration cap on every start; returning best-so-far",
            NonConvergenceWarning,
            stacklevel=3,
        )
    return best, any_converged, total_iterations


def initial_models(kind: str, pairs, opts: FitOptions = FitOptions()):
    """The multistart initial points, mapped to minutes (for inspection)."""
    x, y = _xy(pairs)
    st = _Standardizer(x, y)
    if kind == "exponential":
        return [RegressionModel(kind, p, sse_of(kind, p, x, y), x.size)
                for p in (_exp_to_minutes(st, s) for s in exponential_seeds(st, opts.multistart_count))]
    if kind == "sigmoidal":
        return [RegressionModel(kind, p, sse_of(kind, p, x, y), x.size)
                for p in (_sig_to_minutes(st, s) for s in sigmoid_seeds(st, opts.multistart_count))]
    raise ValueError(f"{kind} has no multistart seeds")


def fit_exponential(pairs, opts: FitOptions = FitOptions()) -> RegressionModel:
    x, y = _xy(pairs)
    _check_inputs("exponential", x, y)
    st = _Standardizer(x, y)
    best, converged, iters = _multistart(
        "exponential",
        _exp_residual(st.u, st.v),
        _exp_jacobian(st.u),
        exponential_seeds(st, opts.multistart_count),
        opts,
    )
    params = _exp_to_minutes(st, best.params)
    if not all(math.isfinite(p) for p in params):
        raise DegenerateDesign("exponential fit diverged")
    return RegressionModel("exponential", params, sse_of("exponential", params, x, y), x.size, converged, iters)


def fit_sigmoid(pairs, opts: FitOptions = FitOptions()) -> RegressionModel:
    x, y = _xy(pairs)
    _check_inputs("sigmoidal", x, y)
    if np.unique(y).size < 2:
        raise DegenerateDesign("all y values identical; no sigmoid shape")
    st = _Standardizer(x, y)
    best, converged, iters = _multistart(
        "sigmoidal",
        _sig_residual(st.u, st.v),
        _sig_jacobian(st.u),
        sigmoid_seeds(st, opts.multistart_count),
        opts,
    )
    params = _sig_to_minutes(st, best.params)
    L, k = params[0], params[1]
    if not all(math.isfinite(p) for p in params) or L == 0 or k == 0:
        raise DegenerateDesign("sigmoid fit collapsed to a flat curve")
    return RegressionModel("sigmoidal", params, sse_of("sigmoidal", params, x, y), x.size, converged, iters)


def fit_all(pairs, opts: FitOptions = FitOptions()) -> dict:
    return {
        "linear": fit_linear(pairs),
        "exponential": fit_exponential(pairs, opts),
        "sigmoidal": fit_sigmoid(pairs, opts),
    }
