"""Bernstein basis evaluation and the scalar machinery built on it.

Provides stable evaluation of the basis P_{n,k}(x) = C(n,k) x^k (1-x)^(n-k)
by the degree-raising (de Casteljau style) triangular recurrence, the rational
functions T_{n,k} that represent the action of Dtilde on the basis, their
derivatives and interior zeros, the closed-form central moments of the
Bernstein operator, and the tail sums

    lambda(n) = sum_{k>=n} 1/(k^2 (k+1)),
    theta(n)  = sum_{k>=n} 1/(k^2 (k+1)^2),

with a certified truncation bound.

Everything here is a pure function of its arguments; no shared mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation

__all__ = [
    "BasisVector",
    "TailSums",
    "bernstein_vector",
    "bernstein_matrix",
    "t_value",
    "t_value_centered",
    "t_prime",
    "t_double_prime",
    "t_values_all",
    "xi_zero",
    "moment",
    "tail_sums",
    "phi_big",
]

#: Below this distance from a singular endpoint the T functions refuse to
#: evaluate instead of returning huge or infinite values.
SINGULAR_EDGE = 1e-30


@dataclass(frozen=True)
class BasisVector:
    """All Bernstein basis values of one degree at one point.

    values[k] = P_{n,k}(x); the entries are nonnegative on [0,1], sum to 1 up
    to a few n machine epsilons, and vanish exactly in the endpoint
    degeneracies (x = 0 with k > 0, x = 1 with k < n).
    """

    n: int
    x: float
    values: np.ndarray


def bernstein_matrix(n: int, xs) -> np.ndarray:
    """Basis values at many points: out[i, k] = P_{n,k}(xs[i]).

    Computed by the degree-raising recurrence
    P_{j,k} = (1-x) P_{j-1,k} + x P_{j-1,k-1}, vectorized over the points.
    Never forms binomial coefficients, so there is no overflow for any n and
    no loss from huge intermediate products.
    """
    if n < 0:
        raise ValueError("degree must be >= 0")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if xs.size and (xs.min() < 0.0 or xs.max() > 1.0):
        raise ValueError("evaluation points must lie in [0, 1]")
    one_minus = 1.0 - xs
    b = np.ones((xs.size, 1))
    for j in range(1, n + 1):
        nxt = np.empty((xs.size, j + 1))
        nxt[:, 0] = one_minus * b[:, 0]
        nxt[:, j] = xs * b[:, j - 1]
        if j > 1:
            nxt[:, 1:j] = xs[:, None] * b[:, : j - 1] + one_minus[:, None] * b[:, 1:j]
        b = nxt
    return b


def bernstein_vector(n: int, x: float) -> BasisVector:
    """All P_{n,k}(x) for k = 0..n via the triangular recurrence."""
    values = bernstein_matrix(n, [x])[0]
    return BasisVector(n=n, x=float(x), values=values)


def _check_t_domain(n: int, k: int, x: float) -> None:
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= k <= n:
        raise ValueError(f"k={k} out of range 0..{n}")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    # The 1/x term is present only for k >= 2, the 1/(1-x) term only for
    # k <= n-2; where the numerator vanishes identically the endpoint is a
    # legitimate limit value.
    if k >= 2 and x < SINGULAR_EDGE:
        raise ValueError(f"T_{{{n},{k}}} is singular at x=0 (x={x!r})")
    if k <= n - 2 and 1.0 - x < SINGULAR_EDGE:
        raise ValueError(f"T_{{{n},{k}}} is singular at x=1 (x={x!r})")


def t_value(n: int, k: int, x: float) -> float:
    """T_{n,k}(x) = k(k-1)(1-x)/x - 2k(n-k) + (n-k)(n-k-1)x/(1-x).

    This is the eigen-factor of the Bernstein basis under Dtilde:
    Dtilde P_{n,k} = T_{n,k} P_{n,k}.
    """
    _check_t_domain(n, k, x)
    first = k * (k - 1) * (1.0 - x) / x if k >= 2 else 0.0
    last = (n - k) * (n - k - 1) * x / (1.0 - x) if k <= n - 2 else 0.0
    return first - 2.0 * k * (n - k) + last


def t_value_centered(n: int, k: int, x: float) -> float:
    """The centered-moment form of T_{n,k} (equivalent algebraic rewriting).

    n * [-1 - (1-2x)/phi * (k/n - x) + n/phi * (k/n - x)^2]; kept as a
    cross-check of the rational form, which is the one used everywhere.
    """
    _check_t_domain(n, k, x)
    if x <= 0.0 or x >= 1.0:
        raise ValueError("centered form requires 0 < x < 1")
    phi = x * (1.0 - x)
    u = k / n - x
    return n * (-1.0 - (1.0 - 2.0 * x) / phi * u + n / phi * u * u)


def t_prime(n: int, k: int, x: float) -> float:
    """T'_{n,k}(x) = -k(k-1)/x^2 + (n-k)(n-k-1)/(1-x)^2."""
    _check_t_domain(n, k, x)
    first = -k * (k - 1) / (x * x) if k >= 2 else 0.0
    last = (n - k) * (n - k - 1) / ((1.0 - x) * (1.0 - x)) if k <= n - 2 else 0.0
    return first + last


def t_double_prime(n: int, k: int, x: float) -> float:
    """T''_{n,k}(x) = 2k(k-1)/x^3 + 2(n-k)(n-k-1)/(1-x)^3, positive on (0,1)."""
    _check_t_domain(n, k, x)
    first = 2.0 * k * (k - 1) / x**3 if k >= 2 else 0.0
    last = 2.0 * (n - k) * (n - k - 1) / (1.0 - x) ** 3 if k <= n - 2 else 0.0
    return first + last


def _t_matrix(n: int, xs: np.ndarray) -> np.ndarray:
    """T_{n,k}(xs[i]) as an (len(xs), n+1) array; xs strictly interior."""
    k = np.arange(n + 1, dtype=float)
    return (
        np.outer((1.0 - xs) / xs, k * (k - 1))
        - 2.0 * k * (n - k)
        + np.outer(xs / (1.0 - xs), (n - k) * (n - k - 1))
    )


def t_values_all(n: int, x: float) -> np.ndarray:
    """T_{n,k}(x) for all k = 0..n at an interior point, vectorized."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < x < 1.0:
        raise ValueError("x must lie strictly inside (0, 1)")
    return _t_matrix(n, np.array([float(x)]))[0]


def xi_zero(n: int, k: int) -> float:
    """The unique interior zero of T'_{n,k} for 2 <= k <= n-2.

    xi_k = sqrt(C(k,2)) / (sqrt(C(k,2)) + sqrt(C(n-k,2))), which lies strictly
    between (k-1)/n and k/n.
    """
    if not 2 <= k <= n - 2:
        raise ValueError(f"k={k} must satisfy 2 <= k <= n-2 (n={n})")
    a = math.sqrt(math.comb(k, 2))
    b = math.sqrt(math.comb(n - k, 2))
    return a / (a + b)


def moment(n: int, i: int, x: float) -> float:
    """Closed form of the Bernstein central moment mu_{n,i}(x).

    mu_{n,i}(x) = sum_k (k/n - x)^i P_{n,k}(x); only orders 0..4 have closed
    forms housed here.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    phi = x * (1.0 - x)
    if i == 0:
        return 1.0
    if i == 1:
        return 0.0
    if i == 2:
        return phi / n
    if i == 3:
        return (1.0 - 2.0 * x) * phi / n**2
    if i == 4:
        return (3.0 * (n - 2) * phi * phi + phi) / n**3
    raise ValueError(f"no closed form for moment order {i} (supported: 0..4)")


@dataclass(frozen=True)
class TailSums:
    """lambda(n) and theta(n) with a guaranteed truncation bound.

    ``abs_err`` bounds the absolute error of both fields; it is tiny relative
    to lambda (<= 1e-14 * lam by construction).
    """

    n: int
    lam: float
    theta: float
    abs_err: float


def tail_sums(n: int) -> TailSums:
    """Compute lambda(n), theta(n) by direct summation plus a certified tail.

    Terms k = n .. K-1 are summed directly (compensated summation).  The
    remainder from K on is an enveloping asymptotic tail whose error is
    bounded by the first omitted term; as a self-validating certificate the
    correction is required to lie inside the telescoping brackets

        1/(2K(K+1))     < tail_lambda(K) < 1/(2K(K-1)),
        1/(3K(K+1)(K+2)) < tail_theta(K) < 1/(3(K-1)K(K+1)),

    the same brackets that prove 1/(2n^2) <= lambda(n) <= 1/n^2 and
    theta(n) <= 4/(9 n^3).
    """
    if n < 2:
        raise ValueError("tail sums are defined for n >= 2")
    K = max(n + 16, 100)

    lam_direct = math.fsum(1.0 / (k * k * (k + 1)) for k in range(n, K))
    theta_direct = math.fsum(1.0 / (k * k * (k + 1) * (k + 1)) for k in range(n, K))

    Kf = float(K)
    lam_tail = 1.0 / (2 * Kf**2) + 1.0 / (6 * Kf**3) - 1.0 / (30 * Kf**5) + 1.0 / (42 * Kf**7)
    lam_tail_err = 1.0 / (30 * Kf**9)
    theta_tail = 1.0 / (3 * Kf**3) - 1.0 / (15 * Kf**5) + 1.0 / (21 * Kf**7)
    theta_tail_err = 1.0 / (15 * Kf**9)

    if not 1.0 / (2 * Kf * (Kf + 1)) < lam_tail < 1.0 / (2 * Kf * (Kf - 1)):
        raise InvariantViolation(f"lambda tail correction escaped its bracket at K={K}")
    if not 1.0 / (3 * Kf * (Kf + 1) * (Kf + 2)) < theta_tail < 1.0 / (3 * (Kf - 1) * Kf * (Kf + 1)):
        raise InvariantViolation(f"theta tail correction escaped its bracket at K={K}")

    lam = lam_direct + lam_tail
    theta = theta_direct + theta_tail
    eps = float(np.finfo(float).eps)
    abs_err = max(lam_tail_err, theta_tail_err) + 4.0 * eps * lam
    return TailSums(n=n, lam=lam, theta=theta, abs_err=abs_err)


def phi_big(alpha: float, n: int, x):
    """Direct summation of Phi(alpha) = sum_k (alpha - T_{n,k}(x)/n)^2 P_{n,k}(x).

    Deliberately computed term by term; the closed form alpha^2 + 2 - 2/n is
    the independent oracle, not the implementation.  x may be a scalar or an
    array of strictly interior points.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    xs = np.asarray(x, dtype=float)
    pts = np.atleast_1d(xs)
    if pts.size == 0 or pts.min() <= 0.0 or pts.max() >= 1.0:
        raise ValueError("x must lie strictly inside (0, 1)")
    t = _t_matrix(n, pts)
    p = bernstein_matrix(n, pts)
    out = np.sum((alpha - t / n) ** 2 * p, axis=1)
    return float(out[0]) if xs.ndim == 0 else out.reshape(xs.shape)
