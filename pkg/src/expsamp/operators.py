"""Max-product and max-min Durrmeyer-type exponential sampling operators.

Both operators reconstruct a function h on an interval [a, b] of positive
reals from the kernel-weighted coefficients

    C_k(h) = n * int_a^b psi(e^{-k} v^n) h(v) dv/v,

with k running over the index set J_n = {ceil(n log a), ..., floor(n log b)}.
Writing Phi_k(w) = phi(e^{-k} w^n):

    max-product:  max_k Phi_k(w) C_k(h)  /  max_k Phi_k(w) C_k(1)
    max-min:      max_k [ C_k(h) /\\ Phi_k(w) / D(w) ],
                  D(w) = max_k Phi_k(w) C_k(1)

The coefficients do not depend on w, so a :class:`DurrmeyerEvaluator` caches
them per (config, h) pair; the denominator coefficients C_k(1) are shared by
every evaluation.  Cache fills are idempotent: concurrent readers racing on
the same key can only install identical arrays, never torn ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelDescriptor, compute_metrics
from .quadrature import QuadratureSpec, durrmeyer_coefficient

__all__ = [
    "OperatorConfig",
    "OperatorEvaluation",
    "PreconditionError",
    "PropertyReport",
    "DurrmeyerEvaluator",
    "index_set",
    "get_evaluator",
    "clear_evaluator_cache",
    "max_product_eval",
    "max_min_eval",
    "maxmin_algebra_checks",
    "denominator_lower_bound_check",
]

# Denominator magnitudes below this are reported as degenerate rather than
# divided through; reachable only at interval edges with compactly supported
# phi, and not at all for the shipped families.
_DENOMINATOR_FLOOR = 1e-300

# Integer-snap slack for the index-set bounds: n*log(a) is computed in
# floating point and must not drop/add an index when a is an exact power
# of e (e.g. log(e) == 1.0 but 17*log(0.8**...) may land 1 ulp off).
_SNAP = 1e-9


class PreconditionError(ValueError):
    """A stated precondition of a check failed; distinct from a property violation."""


def _snap(x: float) -> float:
    r = round(x)
    return float(r) if abs(x - r) <= _SNAP * max(1.0, abs(x)) else x


def index_set(n: int, a: float, b: float) -> list[int]:
    """Consecutive integers from ceil(n log a) to floor(n log b); may be empty."""
    if not (a > 0 and a < b):
        raise ValueError(f"need 0 < a < b, got a={a}, b={b}")
    lo = math.ceil(_snap(n * math.log(a)))
    hi = math.floor(_snap(n * math.log(b)))
    return list(range(lo, hi + 1))


@dataclass(frozen=True)
class OperatorConfig:
    """Kernel pair, order and interval defining one operator instance."""

    phi: KernelDescriptor
    psi: KernelDescriptor
    n: int
    a: float
    b: float
    quad: QuadratureSpec = QuadratureSpec()

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if not (self.a > 0 and math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"need 0 < a < b < inf, got a={self.a}, b={self.b}")
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        if not math.log(self.b / self.a) > 1.0 / self.n:
            raise ValueError(
                f"interval too short: need b/a > e^(1/n), got b/a = {self.b / self.a!r} "
                f"with n = {self.n}"
            )

    def indices(self) -> list[int]:
        return index_set(self.n, self.a, self.b)


@dataclass
class OperatorEvaluation:
    """Diagnostic decomposition of one operator evaluation.

    ``value = numerator / denominator`` whenever not skipped.  For the
    max-product operator ``active_index`` is the (smallest) k achieving the
    denominator maximum; for max-min it is the k achieving the outer maximum.
    """

    value: float
    numerator: float
    denominator: float
    active_index: int | None
    skipped: bool = False
    skip_reason: str | None = None
    warning: str | None = None


def _skipped(reason: str) -> OperatorEvaluation:
    return OperatorEvaluation(
        value=math.nan, numerator=math.nan, denominator=0.0,
        active_index=None, skipped=True, skip_reason=reason,
    )


class DurrmeyerEvaluator:
    """Coefficient cache plus vectorized evaluation for one config."""

    def __init__(self, cfg: OperatorConfig):
        self.cfg = cfg
        ks = cfg.indices()
        if not ks:
            raise ValueError("empty index set")
        self.ks = np.asarray(ks, dtype=float)
        self._coeffs: dict[object, np.ndarray] = {}
        self._range_flags: dict[object, str | None] = {}

    def coefficients(self, h) -> np.ndarray:
        """C_k(h) for every k in the index set; memoized per handle."""
        key = "one" if (h is None or (isinstance(h, str) and h == "one")) else h
        cached = self._coeffs.get(key)
        if cached is None:
            cfg = self.cfg
            cached = np.array([
                durrmeyer_coefficient(cfg.psi, int(k), cfg.n, cfg.a, cfg.b, h, cfg.quad)
                for k in self.ks
            ])
            self._coeffs[key] = cached
        return cached

    def phi_weights(self, w: float) -> np.ndarray:
        cfg = self.cfg
        return np.asarray(cfg.phi.eval_log(cfg.n * math.log(w) - self.ks))

    def _check_unit_range(self, h) -> str | None:
        """Flag handles leaving [0, 1]; the max-min guarantees assume that range."""
        key = h
        if key in self._range_flags:
            return self._range_flags[key]
        declared = getattr(h, "declared_range", None)
        if declared is not None:
            lo, hi = declared
        else:
            probe = np.exp(np.linspace(math.log(self.cfg.a), math.log(self.cfg.b), 257))
            vals = np.asarray(h(probe), dtype=float)
            lo, hi = float(vals.min()), float(vals.max())
        flag = None
        if lo < -1e-9 or hi > 1.0 + 1e-9:
            flag = f"outside guarantee range [0,1]: observed [{lo:.6g}, {hi:.6g}]"
        self._range_flags[key] = flag
        return flag

    def max_product(self, h, w: float) -> OperatorEvaluation:
        phiw = self.phi_weights(w)
        den_terms = phiw * self.coefficients("one")
        j = int(np.argmax(den_terms))
        den = float(den_terms[j])
        if den < _DENOMINATOR_FLOOR:
            return _skipped("degenerate denominator")
        num = float(np.max(phiw * self.coefficients(h)))
        return OperatorEvaluation(
            value=num / den, numerator=num, denominator=den,
            active_index=int(self.ks[j]),
        )

    def max_min(self, h, w: float) -> OperatorEvaluation:
        phiw = self.phi_weights(w)
        den_terms = phiw * self.coefficients("one")
        den = float(np.max(den_terms))
        if den < _DENOMINATOR_FLOOR:
            return _skipped("degenerate denominator")
        terms = np.minimum(self.coefficients(h), phiw / den)
        j = int(np.argmax(terms))
        value = float(terms[j])
        return OperatorEvaluation(
            value=value, numerator=value * den, denominator=den,
            active_index=int(self.ks[j]),
            warning=self._check_unit_range(h),
        )

    def eval_grid(self, kind: str, h, ws) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized evaluation over a grid; returns (values, skipped_mask)."""
        ws = np.asarray(ws, dtype=float)
        cfg = self.cfg
        X = cfg.n * np.log(ws)[:, None] - self.ks[None, :]
        phim = np.asarray(cfg.phi.eval_log(X))
        den_terms = phim * self.coefficients("one")[None, :]
        den = den_terms.max(axis=1)
        skipped = den < _DENOMINATOR_FLOOR
        safe_den = np.where(skipped, 1.0, den)
        if kind == "max_product":
            num = (phim * self.coefficients(h)[None, :]).max(axis=1)
            values = num / safe_den
        elif kind == "max_min":
            terms = np.minimum(self.coefficients(h)[None, :], phim / safe_den[:, None])
            values = terms.max(axis=1)
        else:
            raise ValueError(f"unknown operator kind {kind!r}")
        values = np.where(skipped, np.nan, values)
        return values, skipped


_EVALUATORS: dict[OperatorConfig, DurrmeyerEvaluator] = {}


def get_evaluator(cfg: OperatorConfig) -> DurrmeyerEvaluator:
    ev = _EVALUATORS.get(cfg)
    if ev is None:
        ev = DurrmeyerEvaluator(cfg)
        _EVALUATORS[cfg] = ev
    return ev


def clear_evaluator_cache() -> None:
    _EVALUATORS.clear()


def _check_point(cfg: OperatorConfig, w: float) -> None:
    # one-ulp grace: grids built as exp(linspace(log a, log b, .)) may land
    # a rounding error outside the interval
    grace = 1e-12
    if not (cfg.a * (1 - grace) <= w <= cfg.b * (1 + grace)):
        raise ValueError(f"evaluation point {w} outside [{cfg.a}, {cfg.b}]")


def max_product_eval(h, cfg: OperatorConfig, w: float) -> OperatorEvaluation:
    """Evaluate the max-product operator for ``h`` at ``w`` in [a, b]."""
    _check_point(cfg, w)
    return get_evaluator(cfg).max_product(h, w)


def max_min_eval(h, cfg: OperatorConfig, w: float) -> OperatorEvaluation:
    """Evaluate the max-min operator for ``h`` at ``w`` in [a, b].

    The convergence guarantees assume h maps into [0, 1]; handles observed
    outside that range are evaluated anyway and flagged via ``warning``.
    """
    _check_point(cfg, w)
    return get_evaluator(cfg).max_min(h, w)


# ---------------------------------------------------------------------------
# Lattice algebra checks
# ---------------------------------------------------------------------------

@dataclass
class PropertyReport:
    name: str
    cases: int
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def maxmin_algebra_checks(seed: int, cases: int) -> PropertyReport:
    """Randomized check of the four max/min lattice facts the operators rely on.

    1. max(d) - max(e) <= max|d - e| for finite sequences;
    2. |u /\\ v - u /\\ s| <= u /\\ |v - s| on [0, 1];
    3. u /\\ v + s /\\ v >= (u + s) /\\ v for nonnegative u, s, v;
    4. lam * max(d /\\ e) == max(lam d /\\ lam e) exactly, for [0,1] sequences.
    """
    if cases < 1:
        raise ValueError("cases must be >= 1")
    rng = np.random.default_rng(seed)
    report = PropertyReport(name="maxmin-algebra", cases=cases)

    for i in range(cases):
        m = int(rng.integers(1, 24))
        d = rng.normal(0.0, 10.0, m)
        e = rng.normal(0.0, 10.0, m)
        if d.max() - e.max() > np.abs(d - e).max():
            report.violations.append(("max-difference", i, d.copy(), e.copy()))

        mu, nu, s = rng.uniform(0.0, 1.0, 3)
        if abs(min(mu, nu) - min(mu, s)) > min(mu, abs(nu - s)):
            report.violations.append(("min-difference", i, (mu, nu, s)))

        mu2, s2, nu2 = np.abs(rng.normal(0.0, 5.0, 3))
        if min(mu2, nu2) + min(s2, nu2) < min(mu2 + s2, nu2):
            report.violations.append(("min-superadditivity", i, (mu2, s2, nu2)))

        m2 = int(rng.integers(1, 24))
        d2 = rng.uniform(0.0, 1.0, m2)
        e2 = rng.uniform(0.0, 1.0, m2)
        lam = float(rng.uniform(0.05, 20.0))
        lhs = lam * np.maximum.reduce(np.minimum(d2, e2))
        rhs = np.maximum.reduce(np.minimum(lam * d2, lam * e2))
        if lhs != rhs:
            report.violations.append(("scaling-identity", i, (lam, d2.copy(), e2.copy())))

    return report


def denominator_lower_bound_check(cfg: OperatorConfig, w_grid) -> PropertyReport:
    """Verify D(w) >= K * theta - 1e-8 on a grid of evaluation points.

    Preconditions (raised as :class:`PreconditionError`, not reported as
    violations): phi must have a strictly positive infimum over [1, e] and
    the interval must satisfy b/a > e^(1/n).
    """
    theta = compute_metrics(cfg.phi).theta
    if not theta > 0:
        raise PreconditionError(
            f"phi kernel {cfg.phi.name} has theta = {theta}; the bound requires theta > 0"
        )
    # OperatorConfig already enforces b/a > e^(1/n); re-check to keep this
    # entry point meaningful for duck-typed configs.
    if not math.log(cfg.b / cfg.a) > 1.0 / cfg.n:
        raise PreconditionError("need b/a > e^(1/n)")
    K = compute_metrics(cfg.psi).K
    bound = K * theta - 1e-8

    ev = get_evaluator(cfg)
    w_list = [float(w) for w in w_grid]
    report = PropertyReport(name="denominator-lower-bound", cases=len(w_list))
    for w in w_list:
        _check_point(cfg, w)
        den = float(np.max(ev.phi_weights(w) * ev.coefficients("one")))
        if den < bound:
            report.violations.append((float(w), den, bound))
    return report
