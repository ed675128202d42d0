"""Modified Bessel kernels K0, K1 and the screened-interaction kernels built on them.

Evaluation regimes (vectorized over numpy arrays):

* r <= 2: ascending series, 30 terms.
* 2 < r <= 30: Steed/Temme continued fraction (order 0 and 1 together).
* r > 30: asymptotic expansion.

The combinations that cancel at small r (G~ and 1/r - K1) are summed in closed series
form so that no digits are lost near the origin.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from reconnect2d.core.errors import DomainError

EULER_GAMMA = 0.57721566490153286061
LOG2 = 0.69314718055994530942
SERIES_TERMS = 30
SERIES_MAX = 2.0
ASYMPTOTIC_MIN = 30.0
GTILDE_R0 = 1.0

_CF_EPS = 1e-16
_CF_MAXIT = 10000
_ASYMPTOTIC_TERMS = 14


@dataclass(frozen=True)
class RadialKernelTable:
    """Advertised validity of one kernel."""

    kernel: str
    r_min: float
    r_max: float
    rel_accuracy: float


KERNEL_TABLES = {
    "k0": RadialKernelTable("k0", 1e-6, 30.0, 1e-9),
    "k1": RadialKernelTable("k1", 1e-6, 30.0, 1e-9),
    "gtilde": RadialKernelTable("gtilde", 0.0, GTILDE_R0, 1e-12),
    "calK": RadialKernelTable("calK", 0.0, np.inf, 1e-9),
}


def _series_terms(x: np.ndarray):
    """Yield (k, q^k/(k!)^2, (x/2) q^k/(k!(k+1)!), H_k, psi(k+1)+psi(k+2)) with q = x^2/4."""
    q = 0.25 * x * x
    t0 = np.ones_like(x)
    t1 = 0.5 * x
    harmonic = 0.0
    for k in range(SERIES_TERMS):
        if k > 0:
            t0 = t0 * q / (k * k)
            t1 = t1 * q / (k * (k + 1))
            harmonic += 1.0 / k
        psi_pair = 2.0 * (harmonic - EULER_GAMMA) + 1.0 / (k + 1)
        yield k, t0, t1, harmonic, psi_pair


def _series_k0(x: np.ndarray) -> np.ndarray:
    lg = np.log(0.5 * x) + EULER_GAMMA
    i0 = np.zeros_like(x)
    tail = np.zeros_like(x)
    for _, t0, _, harmonic, _ in _series_terms(x):
        i0 += t0
        tail += harmonic * t0
    return -lg * i0 + tail


def _series_k1_regular(x: np.ndarray) -> np.ndarray:
    """1/x - K1(x) for small x."""
    i1 = np.zeros_like(x)
    tail = np.zeros_like(x)
    for _, _, t1, _, psi_pair in _series_terms(x):
        i1 += t1
        tail += psi_pair * t1
    return -np.log(0.5 * x) * i1 + 0.5 * tail


def _series_gtilde(x: np.ndarray) -> np.ndarray:
    """K0 + log x - log 2 + gamma, with G~(0) = 0."""
    out = np.zeros_like(x)
    pos = x > 0
    xp = x[pos]
    lg = np.log(0.5 * xp) + EULER_GAMMA
    i0_minus_1 = np.zeros_like(xp)
    tail = np.zeros_like(xp)
    for k, t0, _, harmonic, _ in _series_terms(xp):
        if k == 0:
            continue
        i0_minus_1 += t0
        tail += harmonic * t0
    out[pos] = -lg * i0_minus_1 + tail
    return out


def _steed_k0_k1(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _CF_MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels / s) < _CF_EPS):
            break
    k0 = np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) / s
    k1 = k0 * (x + 0.5 - a1 * h) / x
    return k0, k1


def _asymptotic(x: np.ndarray, order: int) -> np.ndarray:
    mu = 4.0 * order * order
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, _ASYMPTOTIC_TERMS):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        total = total + term
    return np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) * total


def _k0_k1(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k0 = np.empty_like(x)
    k1 = np.empty_like(x)
    small = x <= SERIES_MAX
    large = x > ASYMPTOTIC_MIN
    mid = ~small & ~large
    if np.any(small):
        xs = x[small]
        k0[small] = _series_k0(xs)
        k1[small] = 1.0 / xs - _series_k1_regular(xs)
    if np.any(mid):
        k0[mid], k1[mid] = _steed_k0_k1(x[mid])
    if np.any(large):
        k0[large] = _asymptotic(x[large], 0)
        k1[large] = _asymptotic(x[large], 1)
    return k0, k1


def _as_array(r) -> tuple[np.ndarray, bool]:
    arr = np.asarray(r, dtype=np.float64)
    return np.atleast_1d(arr).astype(np.float64, copy=True), arr.ndim == 0


def _finish(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


def _require_positive(x: np.ndarray, name: str) -> None:
    if np.any(~(x > 0)):
        raise DomainError(f"{name} requires r > 0")


def bessel_k0(r):
    x, scalar = _as_array(r)
    _require_positive(x, "bessel_k0")
    return _finish(_k0_k1(x)[0], scalar)


def bessel_k1(r):
    x, scalar = _as_array(r)
    _require_positive(x, "bessel_k1")
    return _finish(_k0_k1(x)[1], scalar)


def gtilde_any(r) -> np.ndarray:
    """G~(r) = K0(r) + log r - log 2 + gamma for every r >= 0."""
    x, scalar = _as_array(r)
    out = np.empty_like(x)
    small = x <= SERIES_MAX
    out[small] = _series_gtilde(x[small])
    if np.any(~small):
        xl = x[~small]
        out[~small] = _k0_k1(xl)[0] + np.log(xl) - LOG2 + EULER_GAMMA
    return _finish(out, scalar)


def gtilde(r):
    """G~ restricted to the small-scale regime 0 <= r < 1."""
    x, scalar = _as_array(r)
    if np.any(~(x >= 0)) or np.any(x >= GTILDE_R0):
        raise DomainError(f"gtilde requires 0 <= r < {GTILDE_R0}")
    return _finish(_series_gtilde(x), scalar)


def gbar(r):
    """G- = -K0(r) - log r."""
    x, scalar = _as_array(r)
    _require_positive(x, "gbar")
    return _finish(-_k0_k1(x)[0] - np.log(x), scalar)


def k1_regular(r) -> np.ndarray:
    """1/r - K1(r), continuous with value 0 at r = 0."""
    x, scalar = _as_array(r)
    if np.any(x < 0):
        raise DomainError("k1_regular requires r >= 0")
    out = np.zeros_like(x)
    small = (x > 0) & (x <= SERIES_MAX)
    out[small] = _series_k1_regular(x[small])
    big = x > SERIES_MAX
    if np.any(big):
        out[big] = 1.0 / x[big] - _k0_k1(x[big])[1]
    return _finish(out, scalar)


def kernel_calK(x) -> np.ndarray:
    """Real-space kernel of S: (1/2pi)(1/r - K1(r)) x_perp / r, zero at the origin.

    Accepts a single 2-vector or an array of shape (..., 2).
    """
    x = np.asarray(x, dtype=np.float64)
    r = np.hypot(x[..., 0], x[..., 1])
    mag = k1_regular(r.ravel()).reshape(r.shape) / (2.0 * np.pi)
    scale = np.divide(mag, r, out=np.zeros_like(r), where=r > 0)
    return np.stack((-x[..., 1] * scale, x[..., 0] * scale), axis=-1)


def series_k0_k1(r) -> tuple[np.ndarray, np.ndarray]:
    """Ascending-series K0 and K1 at any r > 0; loses digits to cancellation beyond r ~ 5."""
    x, _ = _as_array(r)
    _require_positive(x, "series_k0_k1")
    return _series_k0(x), 1.0 / x - _series_k1_regular(x)


@dataclass(frozen=True)
class KernelCheck:
    r: float
    k0: float
    k1: float
    gtilde: float
    k0_series: float
    k1_series: float

    @property
    def k0_rel_error(self) -> float:
        return abs(self.k0 - self.k0_series) / abs(self.k0_series)

    @property
    def k1_rel_error(self) -> float:
        return abs(self.k1 - self.k1_series) / abs(self.k1_series)


CHECK_RADII = (1e-6, 1e-3, 0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0)


def kernel_checks(radii=CHECK_RADII) -> list[KernelCheck]:
    """Regime-dispatched K0, K1 and G~ next to the ascending series at the same radii."""
    x, _ = _as_array(radii)
    k0, k1 = _k0_k1(x)
    s0, s1 = series_k0_k1(x)
    g = gtilde_any(x)
    return [KernelCheck(*(float(v) for v in row)) for row in zip(x, k0, k1, g, s0, s1)]
