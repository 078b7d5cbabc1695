"""Convex gauge functions, Haar-measure modulars and Luxemburg norms.

The size of a function h on an interval of positive reals is measured by the
modular ``I[h] = int_a^b zeta(|h(w)|) dw/w`` for a convex gauge zeta, and by
the induced Luxemburg norm ``inf { l > 0 : I[h / l] <= 1 }``.

Three gauge families are provided:

* ``power(p)``         zeta(v) = v^p, p > 1; doubling constant 2^p.
* ``exp_power(alpha)`` zeta(v) = exp(v^alpha) - 1; fails the doubling
  condition (the ratio zeta(2v)/zeta(v) grows without bound).
* ``power_log(alpha, beta)`` zeta(v) = v^alpha log^beta(v + 1);
  doubling constant 2^(alpha+beta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .operators import OperatorConfig, get_evaluator
from .quadrature import QuadratureSpec, integrate_log

__all__ = [
    "PhiFunction",
    "PhiSpecError",
    "OrliczOverflowError",
    "UnboundedNormError",
    "ModularReport",
    "Delta2Report",
    "parse_phi_spec",
    "modular",
    "luxemburg_norm",
    "delta2_probe",
    "modular_convergence_series",
    "jensen_max_checks",
    "modular_domination_ratio",
]

_EXP_GUARD = 700.0


class PhiSpecError(ValueError):
    """Malformed gauge specification string."""


class OrliczOverflowError(OverflowError):
    """The exponential gauge blew past the float range; names the scaling."""


class UnboundedNormError(RuntimeError):
    """Luxemburg bracket growth exceeded 2**64."""


@dataclass(frozen=True)
class PhiFunction:
    """A convex gauge: zero at zero, positive, non-decreasing, convex, divergent."""

    family: str  # "power" | "exp_power" | "power_log"
    params: tuple[float, ...]

    @property
    def delta2(self) -> str:
        return "fails" if self.family == "exp_power" else "holds"

    @property
    def delta2_constant(self) -> float | None:
        if self.family == "power":
            return 2.0 ** self.params[0]
        if self.family == "power_log":
            return 2.0 ** (self.params[0] + self.params[1])
        return None

    @property
    def name(self) -> str:
        if self.family == "power":
            return f"power:{self.params[0]:g}"
        if self.family == "exp_power":
            return f"exppower:{self.params[0]:g}"
        return f"powerlog:{self.params[0]:g}:{self.params[1]:g}"

    def __call__(self, v) -> np.ndarray | float:
        arr = np.asarray(v, dtype=float)
        scalar = arr.ndim == 0
        if np.any(arr < 0):
            raise ValueError("gauge argument must be nonnegative")
        if self.family == "power":
            # overflow to inf is deliberate here; the quadrature engine
            # rejects non-finite integrands and callers treat that as an
            # above-one modular
            with np.errstate(over="ignore"):
                out = arr ** self.params[0]
        elif self.family == "exp_power":
            expo = arr ** self.params[0]
            if np.any(expo > _EXP_GUARD):
                raise OrliczOverflowError(
                    f"exp_power gauge overflow: exponent {float(np.max(expo)):.3g} > {_EXP_GUARD:g}"
                )
            out = np.expm1(expo)
        elif self.family == "power_log":
            alpha, beta = self.params
            out = arr ** alpha * np.log1p(arr) ** beta
        else:  # pragma: no cover
            raise ValueError(f"unknown gauge family {self.family!r}")
        return float(out) if scalar else out


def power_gauge(p: float) -> PhiFunction:
    if not p > 1:
        raise PhiSpecError(f"power gauge needs p > 1, got {p}")
    return PhiFunction("power", (float(p),))


def exp_power_gauge(alpha: float) -> PhiFunction:
    if not alpha > 0:
        raise PhiSpecError(f"exp_power gauge needs alpha > 0, got {alpha}")
    return PhiFunction("exp_power", (float(alpha),))


def power_log_gauge(alpha: float, beta: float) -> PhiFunction:
    if not (alpha >= 1 and beta > 0):
        raise PhiSpecError(f"power_log gauge needs alpha >= 1, beta > 0, got {alpha}, {beta}")
    return PhiFunction("power_log", (float(alpha), float(beta)))


def parse_phi_spec(text: str) -> PhiFunction:
    """Parse ``power:2``, ``exppower:1`` or ``powerlog:1:1`` (case-insensitive)."""
    parts = [p.strip() for p in str(text).strip().lower().split(":")]
    family = parts[0]
    try:
        nums = [float(p) for p in parts[1:]]
    except ValueError:
        raise PhiSpecError(f"invalid numeric parameter in gauge spec {text!r}") from None
    if family == "power" and len(nums) == 1:
        return power_gauge(nums[0])
    if family == "exppower" and len(nums) == 1:
        return exp_power_gauge(nums[0])
    if family == "powerlog" and len(nums) == 2:
        return power_log_gauge(nums[0], nums[1])
    raise PhiSpecError(f"unknown gauge spec {text!r}")


@dataclass
class ModularReport:
    modular_value: float
    lam: float
    interval: tuple[float, float]
    skipped_nodes: int = 0


def modular(
    phi: PhiFunction,
    h,
    a: float,
    b: float,
    lam: float = 1.0,
    spec: QuadratureSpec = QuadratureSpec(),
) -> ModularReport:
    """``int_a^b zeta(lam |h(w)|) dw/w``."""
    if not (a > 0 and b > a):
        raise ValueError(f"need 0 < a < b, got a={a}, b={b}")
    if not lam > 0:
        raise ValueError("lam must be positive")

    def g(u: np.ndarray) -> np.ndarray:
        return np.asarray(phi(lam * np.abs(np.asarray(h(np.exp(u)), dtype=float))))

    try:
        value = integrate_log(g, math.log(a), math.log(b), spec).value
    except OrliczOverflowError as exc:
        raise OrliczOverflowError(f"modular overflow at lambda={lam:g}: {exc}") from exc
    return ModularReport(modular_value=value, lam=lam, interval=(a, b))


def luxemburg_norm(phi: PhiFunction, h, a: float, b: float, tol: float = 1e-9) -> float:
    """Luxemburg norm by bisection on the scaling parameter.

    The bracket is grown geometrically from 1 until the modular crosses 1,
    then bisected to width ``tol``.  An overflow of the exponential gauge
    counts as "modular above 1".  Identically-zero handles (detected on a
    1001-point probe grid) have norm 0.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    probe = np.exp(np.linspace(math.log(a), math.log(b), 1001))
    if float(np.max(np.abs(np.asarray(h(probe), dtype=float)))) == 0.0:
        return 0.0

    spec = QuadratureSpec(abs_tol=min(1e-10, tol * 1e-3))

    def above_one(ell: float) -> bool:
        try:
            return modular(phi, h, a, b, lam=1.0 / ell, spec=spec).modular_value > 1.0
        except OrliczOverflowError:
            return True
        except ValueError:
            # gauge output overflowed to inf inside the quadrature; the
            # modular is certainly above 1
            return True

    hi = 1.0
    while above_one(hi):
        hi *= 2.0
        if hi > 2.0**64:
            raise UnboundedNormError("Luxemburg bracket exceeded 2**64")
    lo = hi / 2.0 if hi > 1.0 else 0.5
    while not above_one(lo):
        hi = lo
        lo /= 2.0
        if lo < 2.0**-64:
            # modular stays <= 1 for arbitrarily small scalings: norm is 0
            return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if above_one(mid):
            lo = mid
        else:
            hi = mid
    return hi


@dataclass
class Delta2Report:
    family: str
    sup_ratio: float
    at_v: float
    declared: str
    declared_constant: float | None
    within_declared: bool | None
    diverges: bool


def delta2_probe(phi: PhiFunction, v_grid) -> Delta2Report:
    """Report the doubling ratio zeta(2v)/zeta(v) over a grid.

    The grid must span at least [1e-3, 1e3].  For the power and power-log
    families the supremum is compared against the declared doubling constant;
    for the exponential family the report records divergence instead (the
    ratio increases monotonically along the upper grid and exceeds any fixed
    constant).
    """
    grid = np.asarray(sorted(float(v) for v in v_grid), dtype=float)
    if grid.size == 0 or grid.min() > 1e-3 or grid.max() < 1e3:
        raise ValueError("v_grid must span at least [1e-3, 1e3]")

    ratios = np.empty_like(grid)
    for i, v in enumerate(grid):
        try:
            ratios[i] = float(phi(2.0 * v)) / float(phi(v))
        except OrliczOverflowError:
            ratios[i] = math.inf
    sup = float(np.max(ratios))
    at = float(grid[int(np.argmax(ratios))])

    declared_m = phi.delta2_constant
    within = None
    if declared_m is not None:
        within = bool(sup <= declared_m * (1.0 + 1e-12))
    upper = ratios[grid >= 1.0]
    finite = upper[np.isfinite(upper)]
    increasing = finite.size < 2 or bool(np.all(np.diff(finite) >= 0))
    diverges = bool(increasing and sup > 1e6) if upper.size >= 2 else False
    return Delta2Report(
        family=phi.family, sup_ratio=sup, at_v=at, declared=phi.delta2,
        declared_constant=declared_m, within_declared=within, diverges=diverges,
    )


def modular_convergence_series(
    phi: PhiFunction,
    operator: str,
    h,
    cfg_template: OperatorConfig,
    n_list,
    lam: float = 1.0,
) -> list[ModularReport]:
    """Modular distance ``I[lam (D_n h - h)]`` along an increasing list of n.

    The integrand evaluates the operator at every quadrature node; nodes with
    a degenerate denominator are excluded from the integral and counted in
    the per-n report.
    """
    n_list = [int(n) for n in n_list]
    if any(n2 <= n1 for n1, n2 in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")
    out = []
    for n in n_list:
        cfg = replace(cfg_template, n=n)
        ev = get_evaluator(cfg)
        skipped_count = 0

        def g(u: np.ndarray) -> np.ndarray:
            nonlocal skipped_count
            ws = np.exp(u)
            vals, skipped = ev.eval_grid(operator, h, ws)
            skipped_count += int(skipped.sum())
            diff = np.where(skipped, 0.0, vals - np.asarray(h(ws), dtype=float))
            return np.asarray(phi(lam * np.abs(diff)))

        try:
            value = integrate_log(g, math.log(cfg.a), math.log(cfg.b), cfg.quad).value
        except OrliczOverflowError as exc:
            raise OrliczOverflowError(f"modular overflow at lambda={lam:g}: {exc}") from exc
        out.append(ModularReport(
            modular_value=value, lam=lam, interval=(cfg.a, cfg.b),
            skipped_nodes=skipped_count,
        ))
    return out


def jensen_max_checks(phi: PhiFunction, seed: int, cases: int):
    """Randomized check of the gauge/maximum exchange facts.

    For finite nonnegative sequences A: ``zeta(max A) <= max zeta(2A)`` and,
    because zeta is non-decreasing, the exact identity
    ``zeta(max A) == max zeta(A)``.
    """
    from .operators import PropertyReport

    if cases < 1:
        raise ValueError("cases must be >= 1")
    rng = np.random.default_rng(seed)
    report = PropertyReport(name=f"jensen-max[{phi.name}]", cases=cases)
    for i in range(cases):
        m = int(rng.integers(1, 24))
        A = rng.uniform(0.0, 4.0, m)
        zmax = float(phi(float(np.max(A))))
        zA = np.asarray(phi(A), dtype=float)
        z2A = np.asarray(phi(2.0 * A), dtype=float)
        if zmax > float(np.max(z2A)):
            report.violations.append(("doubled-bound", i, A.copy()))
        if zmax != float(np.max(zA)):
            report.violations.append(("max-identity", i, A.copy()))
    return report


def modular_domination_ratio(cfg: OperatorConfig) -> float:
    """Diagnostic ratio: (sum-moment of psi) * |phi|_1 / ((max-moment of phi) * |psi|_1).

    Both L1 norms are taken over the configured interval [a, b] against dw/w.
    The sum-type discrete moment of psi is ``sup_u sum_k psi(e^{u-k})`` and
    the max-type discrete moment of phi is ``sup_u max_k phi(e^{u-k})``, both
    reduced to ``u in [0, 1]`` by periodicity.  Reported as a diagnostic
    only; no inequality is asserted on it.
    """
    spec = QuadratureSpec(abs_tol=1e-9)
    lo, hi = math.log(cfg.a), math.log(cfg.b)
    phi_l1 = integrate_log(lambda x: np.abs(cfg.phi.eval_log(x)), lo, hi, spec).value
    psi_l1 = integrate_log(lambda x: np.abs(cfg.psi.eval_log(x)), lo, hi, spec).value

    u = np.linspace(0.0, 1.0, 2001)
    ks = np.arange(-50, 51, dtype=float)
    X = u[:, None] - ks[None, :]
    phi_disc = float(np.max(np.asarray(cfg.phi.eval_log(X))))
    psi_sum = float(np.max(np.sum(np.asarray(cfg.psi.eval_log(X)), axis=1)))
    if not (phi_disc > 0 and psi_l1 > 0):
        raise ValueError("degenerate kernels for the domination ratio")
    return psi_sum * phi_l1 / (phi_disc * psi_l1)
