"""Exact and finite-block-size entanglement cost accounting per tree edge.

The exact cost of an edge is the log of its cut rank.  When a small
construction error is allowed, the per-copy cost of many shared copies drops
below the exact rate; the block-size quantity behind both bounds is a
waterline threshold on the spectrum of the cut: raise the line t until the
mass of eigenvalues clipped to the line equals the allowed deficit, then pay
-log2(t) bits.  For many copies the spectrum is expanded exactly over type
classes in log space; when the class count explodes, a Gaussian two-term
expansion takes over and is labeled as such.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache, reduce
from math import comb, inf, lgamma, log, log2, sqrt, pi
from typing import Iterable

import numpy as np

from . import config
from .errors import (
    EnumerationCapExceeded,
    InvalidEpsilon,
    InvalidEta,
    InvalidGrid,
    ThresholdBudgetExceeded,
)
from .quantile import inverse_normal_cdf, normal_cdf
from .states import DensityOperator, PureState, schmidt_wrt_edge
from .tree import Edge, RootedTree

_LN2 = log(2.0)


@dataclass(frozen=True)
class Spectrum:
    """Distinct positive eigenvalues (descending) with multiplicities."""

    values: tuple[float, ...]
    multiplicities: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != len(self.multiplicities):
            raise ValueError("values and multiplicities differ in length")
        if not self.values:
            raise ValueError("empty spectrum")
        if any(v <= 0 for v in self.values):
            raise ValueError("spectrum values must be positive")
        if any(m < 1 for m in self.multiplicities):
            raise ValueError("multiplicities must be positive integers")
        if any(
            self.values[i] <= self.values[i + 1]
            for i in range(len(self.values) - 1)
        ):
            raise ValueError("spectrum values must be strictly descending")
        total = sum(v * m for v, m in zip(self.values, self.multiplicities))
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"spectrum mass {total} is not 1")

    @classmethod
    def from_eigenvalues(cls, eigs: Iterable[float]) -> "Spectrum":
        arr = np.sort(np.asarray(list(eigs), dtype=float))[::-1]
        if arr.size == 0 or arr[0] <= 0:
            raise ValueError("no positive eigenvalues")
        arr = arr[arr > config.SPECTRUM_DROP_RTOL * arr[0]]
        values: list[float] = []
        counts: list[int] = []
        for v in arr:
            if values and values[-1] - v <= config.SPECTRUM_MERGE_RTOL * arr[0]:
                total = values[-1] * counts[-1] + v
                counts[-1] += 1
                values[-1] = total / counts[-1]
            else:
                values.append(float(v))
                counts.append(1)
        mass = sum(v * m for v, m in zip(values, counts))
        values = [v / mass for v in values]
        return cls(values=tuple(values), multiplicities=tuple(counts))

    @classmethod
    def from_density(cls, rho: DensityOperator) -> "Spectrum":
        return cls.from_eigenvalues(rho.eigenvalues())

    @classmethod
    def from_edge(
        cls, s: PureState, t: RootedTree, e: Edge, rank_tol: float | None = None
    ) -> "Spectrum":
        sd = schmidt_wrt_edge(s, t, e, rank_tol)
        return cls.from_eigenvalues(sd.coefficients**2)

    @property
    def entropy(self) -> float:
        return -sum(
            m * v * log2(v) for v, m in zip(self.values, self.multiplicities)
        )

    @property
    def std_log(self) -> float:
        a = self.entropy
        second = sum(
            m * v * log2(v) ** 2
            for v, m in zip(self.values, self.multiplicities)
        )
        return sqrt(max(0.0, second - a * a))

    @property
    def support_size(self) -> int:
        return sum(self.multiplicities)


def _compositions(n: int, d: int) -> np.ndarray:
    """All ways to split n copies among d distinct eigenvalues."""
    if comb(n + d - 1, d - 1) > config.TYPE_CLASS_CAP:
        raise EnumerationCapExceeded(
            f"{comb(n + d - 1, d - 1)} type classes for n={n}, d={d} "
            f"exceed cap {config.TYPE_CLASS_CAP}"
        )
    if d == 1:
        return np.array([[n]], dtype=np.int64)
    if d == 2:
        k = np.arange(n + 1, dtype=np.int64)
        return np.stack([k, n - k], axis=1)
    rows = []
    for bars in itertools.combinations(range(n + d - 1), d - 1):
        prev = -1
        parts = []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(n + d - 2 - prev)
        rows.append(parts)
    return np.asarray(rows, dtype=np.int64)


class _SpectrumTable:
    """Merged level structure of the n-fold product spectrum, in log space.

    Levels are distinct product eigenvalues descending; for each prefix the
    table holds the linear cumulative mass and the log cumulative count, so
    the waterline for any deficit is a single monotone search.
    """

    def __init__(self, spectrum: Spectrum, n: int):
        comps = _compositions(n, len(spectrum.values))
        log_vals = np.log(np.asarray(spectrum.values))
        log_mults = np.log(np.asarray(spectrum.multiplicities, dtype=float))
        lg = np.array([lgamma(i + 1.0) for i in range(n + 1)])
        log_mu = comps @ log_vals
        log_cnt = lg[n] - lg[comps].sum(axis=1) + comps @ log_mults
        order = np.argsort(log_mu)[::-1]
        log_mu = log_mu[order]
        log_cnt = log_cnt[order]

        lv: list[float] = []
        lc: list[float] = []
        for mu, cnt in zip(log_mu, log_cnt):
            tol = config.SPECTRUM_MERGE_RTOL * max(1.0, abs(mu))
            if lv and lv[-1] - mu <= tol:
                lc[-1] = np.logaddexp(lc[-1], cnt)
            else:
                lv.append(float(mu))
                lc.append(float(cnt))
        self.log_mu = np.asarray(lv)
        self.log_cnt = np.asarray(lc)
        log_mass = self.log_cnt + self.log_mu
        total = reduce(np.logaddexp, log_mass)
        log_mass = log_mass - total
        self.log_mu = self.log_mu - total
        self.cum_mass = np.cumsum(np.exp(log_mass))
        self.log_cum_cnt = np.array(
            list(itertools.accumulate(self.log_cnt, np.logaddexp))
        )
        with np.errstate(divide="ignore"):
            mu_next = np.append(self.log_mu[1:], -np.inf)
        self.boundary = self.cum_mass - np.exp(self.log_cum_cnt + mu_next)

    def waterline_bits(self, deficit: float) -> float:
        """-log2 of the threshold t at which the clipped mass equals the
        deficit; the cost exponent of keeping the levels above t."""
        target = 1.0 - deficit
        k = int(np.searchsorted(self.boundary, target, side="left"))
        if k >= self.log_mu.size:
            k = self.log_mu.size - 1
        excess = self.cum_mass[k] - target
        if excess <= 0.0:
            return inf
        log_t = log(excess) - self.log_cum_cnt[k]
        return -log_t / _LN2

@lru_cache(maxsize=64)
def _table(spectrum: Spectrum, n: int) -> _SpectrumTable:
    return _SpectrumTable(spectrum, n)


def spectrum_entropy(spectrum: Spectrum, n: int, eps: float) -> float:
    """Waterline exponent of the n-fold product spectrum at mass deficit eps,
    in bits (total over the block, not per copy)."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"block size {n} must be a positive integer")
    if not 0.0 < eps < 1.0:
        raise InvalidEpsilon(f"deficit {eps} outside (0, 1)")
    return _table(spectrum, int(n)).waterline_bits(eps)


@dataclass(frozen=True)
class SecondOrderCoeffs:
    """Two-term expansion of the per-copy cost at error threshold eps:
    cost(n) is about a + b / sqrt(n)."""

    a: float
    s: float
    b: float


def second_order(spectrum: Spectrum, eps: float) -> SecondOrderCoeffs:
    """Entropy rate and Gaussian square-root coefficient of the spectrum at
    trace-distance threshold eps."""
    if not 0.0 < eps < 1.0:
        raise InvalidEpsilon(f"threshold {eps} outside (0, 1)")
    a = spectrum.entropy
    s = spectrum.std_log
    b = 0.0 if s == 0.0 else -s * inverse_normal_cdf(eps * eps / 4.0)
    return SecondOrderCoeffs(a=a, s=s, b=b)


def _block_bits(spectrum: Spectrum, n: int, deficit: float) -> tuple[float, str]:
    """Waterline bits for the n-fold spectrum, exact when the type classes
    fit, Gaussian otherwise."""
    try:
        return spectrum_entropy(spectrum, n, deficit), "type-class"
    except EnumerationCapExceeded:
        z = inverse_normal_cdf(deficit)
        return n * spectrum.entropy - sqrt(n) * spectrum.std_log * z, "gaussian"


@dataclass(frozen=True)
class EdgeCostRow:
    edge: int
    rank: int
    exact_bits: float
    threshold: float
    upper: float
    upper_method: str
    lower: float
    lower_eta: float
    lower_method: str


@dataclass(frozen=True)
class CostReport:
    n: int
    eps: float
    rows: tuple[EdgeCostRow, ...]
    exact_total: float
    upper_total: float
    lower_total: float


def exact_edge_cost(dec) -> dict[int, float]:
    """Bits per edge for an exact construction: log of the cut rank."""
    return {lab: float(log2(r)) for lab, r in sorted(dec.ranks.items())}


def _eta_grid(eps: float) -> np.ndarray:
    hi = 1.0 - eps * eps / 4.0
    return np.geomspace(1e-12, hi, 202)[1:-1]


def _edge_lower(
    spectrum: Spectrum, n: int, eps: float, delta: float, eta: float | None
) -> tuple[float, float, str]:
    deficit0 = eps * eps / 4.0
    candidates = list(_eta_grid(eps))
    if eta is not None:
        candidates.append(eta)
    best = -inf
    best_eta = candidates[0]
    method = "type-class"
    for h in candidates:
        bits, meth = _block_bits(spectrum, n, deficit0 + h)
        if bits == inf:
            continue
        cand = (bits - delta + log2(h)) / n
        if cand > best:
            best = cand
            best_eta = h
            method = meth
    return max(0.0, best), float(best_eta), method


def approx_bounds(
    s: PureState,
    t: RootedTree,
    n: int,
    eps: float,
    thresholds: dict[int, float] | None = None,
    delta: float = 1e-9,
    eta: float | None = None,
    rank_tol: float | None = None,
) -> CostReport:
    """Per-edge upper and lower bounds on the per-copy cost of building n
    copies within trace distance eps.

    Upper bounds spend each edge's share of the error budget on its own cut;
    lower bounds hold against any protocol with overall error eps and are
    maximized over the slack parameter on a log grid (plus the explicitly
    requested value, if any).
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"block size {n} must be a positive integer")
    if not 0.0 < eps < 1.0:
        raise InvalidEpsilon(f"error budget {eps} outside (0, 1)")
    if delta <= 0.0:
        raise ValueError(f"slack {delta} must be positive")
    if eta is not None and not 0.0 < eta < 1.0 - eps * eps / 4.0:
        raise InvalidEta(
            f"eta {eta} outside (0, {1.0 - eps * eps / 4.0})"
        )
    edges = t.edges
    labels = {e.label for e in edges}
    if thresholds is None:
        u = eps / sqrt(len(edges))
        thresholds = {e.label: u for e in edges}
    for lab, v in thresholds.items():
        if lab not in labels:
            raise ThresholdBudgetExceeded(f"threshold for unknown edge {lab}")
        if v < 0:
            raise InvalidEpsilon(f"threshold {v} at edge {lab} negative")
    budget = sqrt(sum(v * v for v in thresholds.values()))
    if budget > eps * (1.0 + 1e-12):
        raise ThresholdBudgetExceeded(
            f"thresholds spend {budget:.6g} of an {eps:.6g} budget"
        )

    rows = []
    for e in edges:
        sd = schmidt_wrt_edge(s, t, e, rank_tol)
        spectrum = Spectrum.from_eigenvalues(sd.coefficients**2)
        epse = float(thresholds.get(e.label, 0.0))
        if epse == 0.0:
            upper = float(log2(sd.rank))
            upper_method = "exact-rank"
        else:
            bits, upper_method = _block_bits(spectrum, n, epse * epse / 4.0)
            upper = bits / n
        lower, best_eta, lower_method = _edge_lower(spectrum, n, eps, delta, eta)
        rows.append(
            EdgeCostRow(
                edge=e.label,
                rank=sd.rank,
                exact_bits=float(log2(sd.rank)),
                threshold=epse,
                upper=float(upper),
                upper_method=upper_method,
                lower=float(lower),
                lower_eta=best_eta,
                lower_method=lower_method,
            )
        )
    return CostReport(
        n=int(n),
        eps=float(eps),
        rows=tuple(rows),
        exact_total=float(sum(r.exact_bits for r in rows)),
        upper_total=float(sum(r.upper for r in rows)),
        lower_total=float(sum(r.lower for r in rows)),
    )


def optimize_thresholds(
    s: PureState, t: RootedTree, eps: float, rank_tol: float | None = None
) -> dict[int, float]:
    """Split the error budget across edges to minimize the summed square-root
    cost coefficients.

    Edges with a flat cut spectrum gain nothing from smoothing and get a zero
    share; the rest equalize the marginal benefit, which has a closed-form
    inverse, and the budget is spent exactly.
    """
    if not 0.0 < eps < 1.0:
        raise InvalidEpsilon(f"error budget {eps} outside (0, 1)")
    stds: dict[int, float] = {}
    for e in t.edges:
        sd = schmidt_wrt_edge(s, t, e, rank_tol)
        stds[e.label] = Spectrum.from_eigenvalues(sd.coefficients**2).std_log
    out = {lab: 0.0 for lab in stds}
    active = {lab: sv for lab, sv in stds.items() if sv > 0.0}
    if not active:
        return out
    if len(active) == 1:
        lab = next(iter(active))
        out[lab] = eps
        return out

    def shares(mu: float) -> dict[int, float]:
        u = {}
        for lab, sv in active.items():
            base = sv * sqrt(2.0 * pi)
            if mu <= base:
                u[lab] = 2.0
            else:
                z = -sqrt(2.0 * log(mu / base))
                u[lab] = 4.0 * normal_cdf(z)
        return u

    budget = eps * eps
    lo = max(sv for sv in active.values()) * sqrt(2.0 * pi) * (1.0 + 1e-12)
    hi = lo
    while sum(shares(hi).values()) >= budget:
        hi *= 2.0
        if hi > 1e300:
            break
    for _ in range(200):
        mid = sqrt(lo * hi)
        if sum(shares(mid).values()) >= budget:
            lo = mid
        else:
            hi = mid
    u = shares(hi)
    total = sum(u.values())
    scale = budget / total
    for lab in u:
        out[lab] = sqrt(u[lab] * scale)
    return out


def figure_data(kind: str) -> tuple[list[str], list[tuple]]:
    """Rows behind the built-in summary charts."""
    spectrum = Spectrum(values=(0.75, 0.25), multiplicities=(1, 1))
    eps = 1.0 / 25.0
    if kind == "w-second-order":
        rows = []
        for n_parties in range(4, 81, 4):
            epse = eps / sqrt(n_parties - 1)
            so = second_order(spectrum, epse)
            rows.append((n_parties, so.a, so.b))
        return ["N", "a", "b"], rows
    if kind == "rate-comparison":
        a = spectrum.entropy
        b_uniform = second_order(spectrum, eps / sqrt(3.0)).b
        b_optimized = second_order(spectrum, eps / sqrt(2.0)).b
        b_lower = second_order(spectrum, eps).b
        ns = sorted({int(round(x)) for x in np.geomspace(10, 1e5, 50)})
        rows = [
            (
                n,
                a + b_uniform / sqrt(n),
                a + b_optimized / sqrt(n),
                a + b_lower / sqrt(n),
            )
            for n in ns
        ]
        return ["n", "rate_uniform", "rate_optimized", "rate_lower"], rows
    raise InvalidGrid(f"unknown figure kind {kind!r}")
