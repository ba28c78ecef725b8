"""Closed-form thresholds and bounds for the coloring game on G(n,p) and B(n,p).

``log`` is the natural logarithm throughout; ``log_b x = log x / log b`` with
``b = 1/(1-p)``. Nothing here is clamped. Many of the lower-bound cut-offs are
negative or below 1 at any practical ``n``; that is reported through the
``valid`` flags, and integer consumers go through :func:`clamped_cutoffs`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

from .errors import ParameterError

DEFAULT_ETA = 0.01


def log_base_b(x: float, p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must lie in (0, 1), got {p!r}")
    if x < 1:
        raise ParameterError(f"log_b needs x >= 1, got {x!r}")
    return math.log(x) / -math.log1p(-p)


def _check(n: float, p: float, eps: float, alpha: float, eta: float) -> None:
    if n < 3:
        raise ParameterError("n must be >= 3 so that log log n is defined")
    if not (0.0 < p <= 1.0 - eta and p < 1.0):
        raise ParameterError(f"p must lie in (0, 1-eta] with eta={eta}, got {p!r}")
    if n * p <= 1.0:
        raise ParameterError("np must exceed 1 so that log_b(np) > 0")
    if not 0.0 < eps < 1.0:
        raise ParameterError(f"eps must lie in (0, 1), got {eps!r}")
    if not alpha > 2.0:
        raise ParameterError(f"alpha must exceed 2, got {alpha!r}")


@dataclass(frozen=True)
class ParameterSet:
    n: float
    p: float
    eps: float
    alpha: float
    b: float
    log_b_np: float
    # lower bound on G(n,p): Breaker's elimination cut-offs
    l1: float
    l2: float
    l2_prime: float
    l3: float
    l0: float
    a1: float
    b1: float
    b2: float
    # upper bound: Maker's greedy strategy
    k: float
    beta: float
    gamma: float
    d0: float
    r: int
    x: tuple[float, ...]
    d: tuple[float, ...]
    x_sum: float
    x_sum_bound: float
    cond_lhs: float
    cond_rhs: float
    # bipartite lower bound
    lambda0: float
    dead_threshold: float
    k_bip: float
    K_upper: float
    valid: dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["x"] = list(self.x)
        d["d"] = list(self.d)
        return d


def increments(p: float, gamma: float, n: float, r: int) -> list[float]:
    """x_i = 5 p gamma / 10^(i-1) + 10 log n for i = 0..r."""
    ln = math.log(n)
    return [5 * p * gamma / 10 ** (i - 1) + 10 * ln for i in range(r + 1)]


def derive_parameters(n: float, p: float, eps: float = 0.1, alpha: float = 3.0, eta: float = DEFAULT_ETA) -> ParameterSet:
    _check(n, p, eps, alpha, eta)
    ln = math.log(n)
    lb = -math.log1p(-p)  # log b
    b = 1.0 / (1.0 - p)
    L = math.log(n * p) / lb

    def logb(x: float) -> float:
        return math.log(x) / lb

    # log_b(log_b np) is undefined when log_b np < 1; keep the real-valued
    # formula via log of a positive number and flag below.
    l1 = logb(n) - math.log(L) / lb - 10 * math.log(ln) / lb
    l2 = eps * l1 / 20
    l2p = eps * l1 / 21
    l3 = eps**3 * l1 / (2 * 10**6)
    a1 = 2000 / eps**2
    l0 = l1 + 12 * l1 / (l3 * p) * a1 if l3 != 0 else math.nan
    b1 = 100 / eps * l1 * ln**2
    b2 = n / (l1 * ln**7) if l1 != 0 else math.nan

    k = alpha * n / L
    beta = k * (n * p) ** (-1 / alpha)
    gamma = 10 * n * ln / beta
    d0 = beta / 2
    # r + 1 <= log n keeps the (log n)-term of the increment sum within 10 log^2 n
    r = max(0, math.floor(ln) - 1)
    x = increments(p, gamma, n, r)
    d = [d0]
    for xi in x:
        d.append(d[-1] - xi)
    x_sum = math.fsum(x)
    x_sum_bound = 60 * p * gamma + 10 * ln**2
    cond_lhs = 600 * n * p * ln / beta + 10 * ln**2
    cond_rhs = beta / 4

    lam0 = logb(n) - math.log(ln) / lb - math.log(L) / lb - logb(3)
    dead = 6 * ln * L
    k_bip = n / (10 * ln * L)
    K_upper = max(2 * alpha / (alpha - 1), alpha / (alpha - 2))

    valid = {
        "log_b_np_ge_1": L >= 1,
        "l1_ge_1": l1 >= 1,
        "l2_ge_1": l2 >= 1,
        "l3_ge_1": l3 >= 1,
        "l2_prime_lt_l2_minus_l3": l2p < l2 - l3,
        "b2_ge_1": b2 >= 1 if not math.isnan(b2) else False,
        "cond": cond_lhs <= cond_rhs,
        "x_sum_le_d0_half": x_sum <= d0 / 2,
        "d0_gt_gamma": d0 > gamma,
        "upper_p_range": p >= ln**K_upper / n,
        "lambda0_ge_1": lam0 >= 1,
        "lambda0_lt_log_b_np": lam0 < L,
        "dead_threshold_lt_n": dead < n,
        "bipartite_p_range": p >= 2 / n,
    }
    return ParameterSet(
        n=n, p=p, eps=eps, alpha=alpha, b=b, log_b_np=L,
        l1=l1, l2=l2, l2_prime=l2p, l3=l3, l0=l0, a1=a1, b1=b1, b2=b2,
        k=k, beta=beta, gamma=gamma, d0=d0, r=r, x=tuple(x), d=tuple(d),
        x_sum=x_sum, x_sum_bound=x_sum_bound, cond_lhs=cond_lhs, cond_rhs=cond_rhs,
        lambda0=lam0, dead_threshold=dead, k_bip=k_bip, K_upper=K_upper, valid=valid,
    )


def lower_bound_p_range(n: float, eps: float, K: float) -> float:
    """Smallest p covered by the G(n,p) lower bound for a given constant K."""
    return math.log(n) ** (K / eps**3) / n


def clamped_cutoffs(ps: ParameterSet) -> dict[str, Any]:
    """Integer cut-offs for Breaker's elimination strategy.

    l1 -> max(1, round(l1)); l2, l3 -> max(1, floor(.)). Every adjustment is
    listed under ``clamps``.
    """
    out: dict[str, Any] = {"clamps": []}
    raw = {"l1": ps.l1, "l2": ps.l2, "l3": ps.l3}
    for name, val in raw.items():
        base = round(val) if name == "l1" else math.floor(val)
        v = max(1, int(base))
        if v != val:
            out["clamps"].append(f"{name}: {val:.6g} -> {v}")
        out[name] = v
    out["iteration_cap"] = math.ceil(ps.a1)
    return out


@dataclass(frozen=True)
class BoundsReport:
    lower: float
    upper: float
    bipartite_lower: float
    chromatic_estimate: float
    lower_over_chromatic: float
    upper_over_lower: float

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


def theorem_bounds(n: float, p: float, eps: float = 0.1, alpha: float = 3.0, eta: float = DEFAULT_ETA) -> BoundsReport:
    _check(n, p, eps, alpha, eta)
    L = log_base_b(n * p, p)
    lower = (1 - eps) * n / L
    upper = alpha * n / L
    chrom = n / (2 * L)
    return BoundsReport(
        lower=lower,
        upper=upper,
        bipartite_lower=n / (10 * math.log(n) * L),
        chromatic_estimate=chrom,
        lower_over_chromatic=lower / chrom,
        upper_over_lower=upper / lower,
    )


def phi(s: float, n: float, p: float) -> float:
    """Edge budget (5ps + log n) s for an s-subset."""
    return (5 * p * s + math.log(n)) * s


def chernoff_tail(kind: str, mean: float, arg: float) -> float:
    """Binomial tail bounds.

    ``lower``: P(X <= (1-eps) mean) <= exp(-eps^2 mean / 2)
    ``upper_small``: P(X >= (1+eps) mean) <= exp(-eps^2 mean / 3), eps <= 1
    ``upper_large``: P(X >= mu mean) <= (e/mu)^(mu mean), mu > 1
    """
    if mean <= 0:
        raise ParameterError("mean must be positive")
    if kind in ("lower", "upper_small"):
        if not 0.0 < arg <= 1.0:
            raise ParameterError("eps must lie in (0, 1]")
        return math.exp(-arg**2 * mean / (2 if kind == "lower" else 3))
    if kind == "upper_large":
        if not arg > 1.0:
            raise ParameterError("mu must exceed 1")
        return math.exp(arg * mean * (1 - math.log(arg)))
    raise ParameterError(f"unknown tail kind {kind!r}")
