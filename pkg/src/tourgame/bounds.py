"""Closed-form certificate quantities for the reduced clique game, all in log2.

``n`` may be an int, a float or a :class:`Log2Real`.  The natural coupling
``n = k * 2**((k+9)/2)`` is irrational for even ``k``, so coupled
computations carry ``n`` as ``Log2Real`` throughout; :func:`coupled_n_int`
gives the rounded-down integer for callers that need a real board.

All logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .log2real import Log2Real, log2_comb
from .potential import Certificate, awwc_check

_LN2 = math.log(2.0)
LOG2_E = 1.0 / _LN2


def _lg(n) -> float:
    return Log2Real.of(n).log2


def _c2(m: int) -> int:
    return m * (m - 1) // 2


@dataclass(frozen=True)
class GameParameters:
    n: Log2Real
    k: int
    p: int = 4

    def __post_init__(self):
        if self.k < 2 or self.n < self.k:
            raise ValueError(f"need n >= k >= 2, got n={float(self.n)}, k={self.k}")


@dataclass(frozen=True)
class ClusterSignature:
    m1: int
    m2: int
    m3: int

    def __iter__(self):
        return iter((self.m1, self.m2, self.m3))

    def validate(self, k: int) -> None:
        if not all(3 <= m <= k for m in self):
            raise ValueError(f"cluster signature {tuple(self)} needs 3 <= m_i <= k={k}")


# ---------------------------------------------------------------------------
# Coupling of n and k
# ---------------------------------------------------------------------------


def coupled_n(k: int) -> Log2Real:
    """``k * 2**((k+9)/2)``."""
    return Log2Real(math.log2(k) + (k + 9) / 2)


def coupled_n_int(k: int) -> int:
    """Largest integer ``n`` with ``n <= k * 2**((k+9)/2)`` (exact)."""
    # n**2 <= k**2 * 2**(k+9)
    return math.isqrt(k * k << (k + 9))


def k_of_n(n: int) -> int:
    """Largest ``k`` with ``n >= k * 2**((k+9)/2)``, compared exactly as ``n**2 >= k**2 * 2**(k+9)``.

    Also checks ``k >= 2 log n - 2 log log n - 12``.
    """
    n = int(n)
    if n < 32:
        raise ValueError(f"k_of_n needs n >= 32, got {n}")
    k = 1
    while n * n >= (k + 1) ** 2 << (k + 10):
        k += 1
    lg = math.log2(n)
    floor = 2 * lg - 2 * math.log2(lg) - 12
    if k < floor:
        raise AssertionError(f"k_of_n({n}) = {k} is below 2 log n - 2 log log n - 12 = {floor}")
    return k


# ---------------------------------------------------------------------------
# Potentials of the reduced game
# ---------------------------------------------------------------------------


def T_F(n, k: int) -> Log2Real:
    """``(n/k)**k * 2**-C(k,2)``: potential of the transversal-clique family."""
    if k < 1 or _lg(n) < math.log2(k):
        raise ValueError(f"need n >= k >= 1, got n={float(Log2Real.of(n))}, k={k}")
    return Log2Real(k * (_lg(n) - math.log2(k)) - _c2(k))


def reduced_board_size(n, k: int) -> Log2Real:
    """``C(k,2) * (n/k)**2``."""
    if k < 2:
        raise ValueError("the reduced board needs k >= 2")
    return Log2Real(math.log2(_c2(k)) + 2 * (_lg(n) - math.log2(k)))


def sunflower_size(k: int) -> int:
    return 4 * _c2(k) - 9


def f_sunflower_bound(n, k: int) -> Log2Real:
    """``C(k,3) * (n/k)**(4k-9) * 2**(-4 C(k,2) + 9)``."""
    if k < 3:
        raise ValueError(f"sunflowers need k >= 3, got {k}")
    return Log2Real(log2_comb(k, 3) + (4 * k - 9) * (_lg(n) - math.log2(k)) - 4 * _c2(k) + 9)


def g_j(j: int, m: int, n, k: int) -> Log2Real:
    """``C(jk, m-3) * (k/n)**(m-3) * 2**(C(m,2) - 3)``."""
    if j not in (1, 2, 3):
        raise ValueError(f"j must be 1, 2 or 3, got {j}")
    if not 3 <= m <= k:
        raise ValueError(f"m must lie in [3, k={k}], got {m}")
    if m == 3:
        return Log2Real.one()
    return Log2Real(log2_comb(j * k, m - 3) + (m - 3) * (math.log2(k) - _lg(n)) + _c2(m) - 3)


def cluster_count_bound(sig: ClusterSignature, n, k: int) -> Log2Real:
    """``C(k,3) (n/k)**(4k) prod_j C(jk, m_j - 3) (k/n)**m_j``."""
    sig = sig if isinstance(sig, ClusterSignature) else ClusterSignature(*sig)
    sig.validate(k)
    lnk = _lg(n) - math.log2(k)
    total = log2_comb(k, 3) + 4 * k * lnk
    for j, m in enumerate(sig, start=1):
        total += log2_comb(j * k, m - 3) - m * lnk
    return Log2Real(total)


def cluster_min_size(sig: ClusterSignature, k: int) -> int:
    """``4 C(k,2) - sum C(m_i, 2)``."""
    sig = sig if isinstance(sig, ClusterSignature) else ClusterSignature(*sig)
    sig.validate(k)
    return 4 * _c2(k) - sum(_c2(m) for m in sig)


def _g_log2_row(j: int, k: int, lg_n: float) -> np.ndarray:
    """log2 g_j(m) for m = 3..k as a vector (m = 3 is exactly 0)."""
    m = np.arange(3, k + 1, dtype=np.float64)
    r = m - 3
    lcomb = (gammaln(j * k + 1) - gammaln(r + 1) - gammaln(j * k - r + 1)) / _LN2
    row = lcomb + r * (math.log2(k) - lg_n) + m * (m - 1) / 2 - 3
    row[0] = 0.0
    return row


def T_F24_upper(n, k: int, mode: str = "lemma") -> Log2Real:
    """Upper bound on the potential of the 4-clusters.

    ``lemma``: ``k**3 f(n,k)``, valid only once every ``g_j(m) <= 1``.
    ``triple_sum``: ``f(n,k) * prod_j sum_m g_j(m)``, valid for every ``k``.
    """
    f = f_sunflower_bound(n, k)
    if mode == "lemma":
        return f * Log2Real.of(k**3)
    if mode == "triple_sum":
        lg_n = _lg(n)
        total = f
        for j in (1, 2, 3):
            row = _g_log2_row(j, k, lg_n)
            top = row.max()
            total = total * Log2Real(top + math.log2(np.exp2(row - top).sum()))
        return total
    raise ValueError(f"unknown mode {mode!r}; use 'lemma' or 'triple_sum'")


def max_g(n, k: int) -> float:
    """log2 of ``max_{j, m} g_j(m)``."""
    lg_n = _lg(n)
    return max(float(_g_log2_row(j, k, lg_n).max()) for j in (1, 2, 3))


def corollary_ratio(n, k: int, mode: str = "lemma") -> Log2Real:
    """``16 |X| (T(F_2^4)**(1/4) + 1/4) / T(F)``; below 1 certifies a Maker win."""
    if k < 3:
        raise ValueError("the cluster bound needs k >= 3")
    t24 = T_F24_upper(n, k, mode)
    return Log2Real.of(16) * reduced_board_size(n, k) * (t24 ** 0.25 + Log2Real.of(0.25)) / T_F(n, k)


def maker_certificate(n, k: int, p: int = 4, mode: str = "lemma") -> Certificate:
    return awwc_check(reduced_board_size(n, k), T_F(n, k), p, T_F24_upper(n, k, mode))


# ---------------------------------------------------------------------------
# Scans at the coupling
# ---------------------------------------------------------------------------


@dataclass
class GScan:
    k_max: int
    max_log2: dict[int, float]
    K0: int | None

    def failing(self) -> list[int]:
        return [k for k, v in self.max_log2.items() if v > 0.0]


def g_scan(k_max: int = 500) -> GScan:
    """Smallest ``K0`` with ``g_j(m) <= 1`` for all ``j``, ``3 <= m <= k`` and ``K0 <= k <= k_max``."""
    worst = {k: max_g(coupled_n(k), k) for k in range(3, k_max + 1)}
    bad = [k for k, v in worst.items() if v > 0.0]
    K0 = (max(bad) + 1 if bad else 3) if not bad or max(bad) < k_max else None
    return GScan(k_max, worst, K0)


@dataclass
class CertificateScan:
    mode: str
    records: list[dict] = field(default_factory=list)
    k_star: int | None = None

    def ratio_log2(self) -> dict[int, float]:
        return {r["k"]: r["ratio_log2"] for r in self.records}

    def decreasing_from(self, k0: int) -> bool:
        vals = [r["ratio_log2"] for r in self.records if r["k"] >= k0]
        return all(b < a for a, b in zip(vals, vals[1:]))


def certificate_record(n, k: int, p: int = 4, mode: str = "lemma") -> dict:
    n = Log2Real.of(n)
    ratio = corollary_ratio(n, k, mode)
    cert = maker_certificate(n, k, p, mode)
    g_ok = max_g(n, k) <= 0.0
    return {
        "type": "certificate-point",
        "n_log2": n.log2,
        "k": k,
        "p": p,
        "mode": mode,
        "T_F_log2": T_F(n, k).log2,
        "X_log2": reduced_board_size(n, k).log2,
        "f_log2": f_sunflower_bound(n, k).log2,
        "T_F24_upper_log2": T_F24_upper(n, k, mode).log2,
        "ratio_log2": ratio.log2,
        "awwc": cert.verdict,
        "g_all_le_1": g_ok,
        # the lemma bound is only an upper bound once every g_j(m) <= 1
        "certified": bool(cert.verdict and (mode == "triple_sum" or g_ok)),
    }


def scan_certificate(k_max: int = 400, mode: str = "lemma", k_min: int = 3) -> CertificateScan:
    scan = CertificateScan(mode)
    for k in range(k_min, k_max + 1):
        rec = certificate_record(coupled_n(k), k, 4, mode)
        scan.records.append(rec)
        if scan.k_star is None and rec["ratio_log2"] < 0.0:
            scan.k_star = k
    return scan


# ---------------------------------------------------------------------------
# Known bounds and tournament counts
# ---------------------------------------------------------------------------


def known_bounds_report(n: int) -> dict:
    """Every bound on k_cl, k_t, k_o and k_u at this ``n``, o(1) terms dropped."""
    if n < 4:
        raise ValueError("the bounds need n >= 4")
    lg = math.log2(n)
    llg = math.log2(lg)
    k_cl = 2 * lg - 2 * llg + 2 * LOG2_E - 3
    k_t_lower = 2 * lg - 2 * llg - 12
    entries = {
        "k_cl": {
            "value": k_cl,
            "floor": math.floor(k_cl),
            "source": "clique game threshold (Beck): floor(2 log n - 2 log log n + 2 log e - 3 + o(1))",
            "approximate": True,
        },
        "k_t_lower": {
            "value": k_t_lower,
            "source": "tournament game: k_t >= 2 log n - 2 log log n - 12",
            "approximate": False,
        },
        "k_t_upper": {
            "value": k_cl,
            "source": "k_t <= k_cl",
            "approximate": True,
        },
        "k_t_lower_beck": {"value": 0.5 * lg, "source": "k_t >= (1/2 - o(1)) log n", "approximate": True},
        "k_t_lower_prior": {"value": lg, "source": "k_t >= (1 - o(1)) log n", "approximate": True},
        "k_o_lower": {
            "value": k_t_lower,
            "source": "k_o >= k_t >= 2 log n - 2 log log n - 12",
            "approximate": False,
        },
        "k_o_upper": {
            "value": 4 * lg + 2,
            "source": "OBreaker wins Or(T_k) for k >= 4 log n + 2 (n large)",
            "approximate": False,
        },
        "k_u_lower": {"value": 0.5 * lg, "source": "k_u >= (1/2 - o(1)) log n", "approximate": True},
        "k_u_upper": {"value": lg, "source": "k_u <= (1 + o(1)) log n", "approximate": True},
    }
    return {"type": "known-bounds", "n": n, "log2_n": lg, **entries}


def tournament_count_lower(k: int) -> tuple[Log2Real, Log2Real]:
    """``c(k) = 2**C(k,2) / k!`` and the weaker ``2**(C(k,2) - k log k)``."""
    if k < 1:
        raise ValueError("k must be positive")
    c = Log2Real(_c2(k) - math.log2(math.factorial(k)))
    weak = Log2Real(_c2(k) - k * math.log2(k))
    return c, weak
