"""Fast invariant checks behind ``paradigm-lab selftest``.

Each check returns ``(ok, info)``; ``run_selftest`` collects them the same
way for every entry in ``CHECKS``.
"""

from __future__ import annotations

import logging
from typing import Any, Callable, Dict, Tuple

import numpy as np

from .limits import flow_map, rk4
from .params import CROSS_FORM_RTOL, ModelParams, exponent_residuals, exponents_for, mu_forms, sigma_forms
from .rng import RngStream

logger = logging.getLogger(__name__)

DRAWS = 1000
IDENTITY_ATOL = 1e-12
FLOW_RTOL = 1e-8
SEMIGROUP_RTOL = 1e-12
FLOW_STEPS = 4000

CheckResult = Tuple[bool, str]


def _random_exponents(gen: np.random.Generator, n: int, alpha_high: float, gap_low: float, gap_high: float):
    alpha = gen.uniform(-5.0, alpha_high, n)
    # beta sits a fraction of the way from alpha to 1
    beta = alpha + (1.0 - alpha) * gen.uniform(gap_low, gap_high, n)
    return alpha, np.minimum(beta, 1.0)


def check_exponent_identities(seed: int = 0) -> CheckResult:
    gen = RngStream(seed, 1).generator()
    alpha, beta = _random_exponents(gen, DRAWS, 0.99, 0.01, 1.0)
    worst, worst_at = 0.0, None
    for a, b in zip(alpha, beta):
        gamma = exponents_for(a, b).gamma
        # rounding grows with gamma; the bound is IDENTITY_ATOL at unit scale
        scale = max(1.0, gamma)
        for name, r in exponent_residuals(a, b).items():
            if abs(r) / scale > worst:
                worst, worst_at = abs(r) / scale, (name, float(a), float(b))
    ok = worst <= IDENTITY_ATOL
    return ok, f"max scaled residual {worst:.3g} over {DRAWS} draws" + ("" if ok else f" at {worst_at}")


def check_ou_cross_forms(seed: int = 0) -> CheckResult:
    gen = RngStream(seed, 2).generator()
    alpha, beta = _random_exponents(gen, DRAWS, 0.9, 0.05, 0.95)
    c1 = np.exp(gen.uniform(np.log(0.1), np.log(10.0), DRAWS))
    c2 = np.exp(gen.uniform(np.log(0.1), np.log(10.0), DRAWS))
    worst = 0.0
    for a, b, x, y in zip(alpha, beta, c1, c2):
        params = ModelParams(float(x), float(y), float(a), float(b), 0.01, 0.01)
        for raw, simple in (mu_forms(params), sigma_forms(params)):
            worst = max(worst, abs(raw - simple) / max(abs(raw), abs(simple)))
    return worst <= CROSS_FORM_RTOL, f"max relative gap {worst:.3g} between printed forms of mu and sigma"


def check_flow_exactness(c1: float = 1.0) -> CheckResult:
    z0 = np.logspace(-1.0, 1.0, 10)
    alphas = np.linspace(-1.0, 0.5, 10)
    dts = np.linspace(0.0, 5.0, 10)
    grid = np.linspace(0.0, 1.0, FLOW_STEPS) ** 2
    y0 = np.repeat(z0[:, None], alphas.size, axis=1)
    worst = 0.0
    for dt in dts:
        exact = np.array([[flow_map(z, c1, a, dt) for a in alphas] for z in z0])
        if dt == 0:
            worst = max(worst, float(np.max(np.abs(exact - y0) / y0)))
            continue
        # graded grid: small steps where the flow from small z0 is steep
        numeric = rk4(lambda z: c1 * z ** alphas[None, :], y0, dt * grid)[-1]
        worst = max(worst, float(np.max(np.abs(numeric - exact) / exact)))

    semigroup = 0.0
    for z in z0:
        for a in alphas:
            for s, t in ((0.3, 1.7), (2.0, 3.0), (0.01, 4.99)):
                two = flow_map(flow_map(z, c1, a, s), c1, a, t)
                one = flow_map(z, c1, a, s + t)
                semigroup = max(semigroup, abs(two - one) / one)
    ok = worst <= FLOW_RTOL and semigroup <= SEMIGROUP_RTOL
    return ok, f"rk4 relative gap {worst:.3g}, semigroup gap {semigroup:.3g}"


CHECKS: Dict[str, Callable[[], CheckResult]] = {
    "exponent_identities": check_exponent_identities,
    "ou_cross_forms": check_ou_cross_forms,
    "flow_exactness": check_flow_exactness,
}


def run_selftest() -> Dict[str, Any]:
    details = []
    all_ok = True
    for name, fn in CHECKS.items():
        try:
            ok, info = fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, info = False, f"{type(exc).__name__}: {exc}"
        details.append({"check": name, "ok": ok, "info": info})
        all_ok = all_ok and ok
        log = logger.info if ok else logger.error
        log("selftest check=%s ok=%s %s", name, ok, info, extra={"check": name})
    return {"passed": all_ok, "details": details}
