"""Floating-point application of U_n, Utilde_n, Dtilde and their iterates.

Operator outputs are closed-form polynomials held as BernsteinForm (degree-n
Bernstein coefficients, de Casteljau evaluation).  Dtilde acts as a closed
coefficient map degree n -> degree n, so Dtilde^2 and Dtilde^3 of operator
outputs never involve numerical differentiation.  For catalog functions the
powers of Dtilde are expanded symbolically into exact coefficient polynomials
against the analytic derivatives.

All transformations are pure; grid sweeps may run concurrently without
changing any result (fixed summation orders throughout).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .catalog import FunctionSpec
from .exactpoly import PHI, ExactBernsteinForm, RationalPoly, u_coefficients_exact
from .quadrature import u_coefficients_numeric

__all__ = [
    "DEFAULT_TOL",
    "BernsteinForm",
    "bernstein_form_from_poly",
    "dtilde_form",
    "dtilde_coefficient_map",
    "u_coefficient_matrix",
    "apply_U",
    "apply_Utilde",
    "apply_U_to_form",
    "apply_Utilde_to_form",
    "iterate_Utilde",
    "dtilde_power_terms",
    "dtilde_of_function",
]

DEFAULT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BernsteinForm:
    """A polynomial as float coefficients in the degree-n Bernstein basis.

    p(x) = sum_k coeffs[k] P_{n,k}(x).  Evaluation always goes through the
    de Casteljau recurrence (numerically stable convex combinations); the
    basis interpolates at the endpoints, so p(0) = coeffs[0] and
    p(1) = coeffs[n] exactly.
    """

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.n + 1,):
            raise ValueError(f"need {self.n + 1} coefficients for degree {self.n}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def eval(self, x):
        """De Casteljau evaluation at a scalar or an array of points."""
        xs = np.asarray(x, dtype=float)
        pts = np.atleast_1d(xs)
        b = np.broadcast_to(self.coeffs, (pts.size, self.n + 1)).copy()
        t = pts[:, None]
        s = 1.0 - t
        for level in range(self.n, 0, -1):
            b = s * b[:, :level] + t * b[:, 1:level + 1]
        out = b[:, 0]
        return float(out[0]) if xs.ndim == 0 else out.reshape(xs.shape)

    def __add__(self, other: "BernsteinForm") -> "BernsteinForm":
        if self.n != other.n:
            raise ValueError("degree mismatch")
        return BernsteinForm(self.n, self.coeffs + other.coeffs)

    def __sub__(self, other: "BernsteinForm") -> "BernsteinForm":
        if self.n != other.n:
            raise ValueError("degree mismatch")
        return BernsteinForm(self.n, self.coeffs - other.coeffs)

    def scale(self, s: float) -> "BernsteinForm":
        return BernsteinForm(self.n, float(s) * self.coeffs)

    def to_json_dict(self) -> dict:
        return {"degree": self.n, "coeffs": [float(c) for c in self.coeffs]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "BernsteinForm":
        return cls(int(data["degree"]), np.asarray(data["coeffs"], dtype=float))


def bernstein_form_from_poly(p: RationalPoly, n: int) -> BernsteinForm:
    """Exact Bernstein representation of a rational polynomial, then floats."""
    exact = ExactBernsteinForm.from_poly(p, n)
    return BernsteinForm(n, np.array([float(c) for c in exact.coeffs]))


def dtilde_coefficient_map(coeffs: np.ndarray) -> np.ndarray:
    """The action of Dtilde on degree-n Bernstein coefficients.

    Computes the second-difference representation of p'' in the degree-(n-2)
    basis scaled by n(n-1), then raises it back with
    phi P_{n-2,k} = ((k+1)(n-k-1) / ((n-1)n)) P_{n,k+1}.  Annihilates
    coefficient vectors that are affine in k.
    """
    c = np.asarray(coeffs, dtype=float)
    n = c.size - 1
    out = np.zeros_like(c)
    if n < 2:
        return out
    second = n * (n - 1) * np.diff(c, n=2)
    k = np.arange(n - 1, dtype=float)
    out[1:n] = second * ((k + 1) * (n - k - 1) / ((n - 1) * n))
    return out


def dtilde_form(p: BernsteinForm) -> BernsteinForm:
    """Dtilde p as a closed coefficient map (degree n -> degree n)."""
    return BernsteinForm(p.n, dtilde_coefficient_map(p.coeffs))


@lru_cache(maxsize=None)
def u_coefficient_matrix(n: int, operand_degree: int) -> np.ndarray:
    """Matrix taking degree-N Bernstein coefficients of p to u_{n,k}(p).

    Entries are the exact Beta-product integrals

        (n-1) * int P_{n-2,k-1} P_{N,j}
            = (n-1) C(n-2,k-1) C(N,j) / (C(n-2+N, k-1+j) * (n-1+N)),

    evaluated in exact rational arithmetic and rounded once to float.  The
    endpoint rows pick off p(0) and p(1).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    N = operand_degree
    A = np.zeros((n + 1, N + 1))
    A[0, 0] = 1.0
    A[n, N] = 1.0
    for k in range(1, n):
        for j in range(N + 1):
            val = Fraction(
                (n - 1) * math.comb(n - 2, k - 1) * math.comb(N, j),
                math.comb(n - 2 + N, k - 1 + j) * (n - 1 + N),
            )
            A[k, j] = float(val)
    A.setflags(write=False)
    return A


def apply_U_to_form(p: BernsteinForm, n: int) -> BernsteinForm:
    """U_n applied to a polynomial already in Bernstein form."""
    u = u_coefficient_matrix(n, p.n) @ p.coeffs
    return BernsteinForm(n, u)


def apply_Utilde_to_form(p: BernsteinForm, n: int) -> BernsteinForm:
    """Utilde_n applied to a polynomial already in Bernstein form."""
    out = apply_U_to_form(p, n)
    return out - dtilde_form(out).scale(1.0 / n)


def apply_U(f: FunctionSpec, n: int, tol: float = DEFAULT_TOL) -> BernsteinForm:
    """U_n f as a degree-n Bernstein form.

    Polynomial catalog entries take the exact coefficient path; everything
    else goes through adaptive quadrature at tolerance ``tol``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if f.poly is not None:
        u = np.array([float(c) for c in u_coefficients_exact(f.poly, n)])
    else:
        u = u_coefficients_numeric(f, n, tol)
    return BernsteinForm(n, u)


def apply_Utilde(f: FunctionSpec, n: int, tol: float = DEFAULT_TOL) -> BernsteinForm:
    """Utilde_n f = U_n f - (1/n) Dtilde U_n f as a degree-n Bernstein form."""
    p = apply_U(f, n, tol)
    return p - dtilde_form(p).scale(1.0 / n)


def iterate_Utilde(f: FunctionSpec, n: int, times: int, tol: float = DEFAULT_TOL) -> BernsteinForm:
    """Utilde_n applied ``times`` times.

    After the first application the operand is a known degree-n polynomial,
    so later rounds use the exact coefficient-integral matrix in float
    arithmetic instead of compounding quadrature error.
    """
    if times < 1:
        raise ValueError("times must be >= 1")
    p = apply_Utilde(f, n, tol)
    for _ in range(times - 1):
        p = apply_Utilde_to_form(p, n)
    return p


@lru_cache(maxsize=None)
def dtilde_power_terms(ell: int) -> tuple[tuple[int, RationalPoly], ...]:
    """Dtilde^ell as a differential expression sum_j c_j(x) d^j/dx^j.

    The coefficient functions c_j are exact polynomials built by iterating
    Dtilde(sum c_j f^(j)) = phi sum (c_j'' f^(j) + 2 c_j' f^(j+1) + c_j f^(j+2));
    orders up to 2*ell appear.
    """
    if ell < 0:
        raise ValueError("ell must be >= 0")
    terms: dict[int, RationalPoly] = {0: RationalPoly([1])}
    for _ in range(ell):
        nxt: dict[int, RationalPoly] = {}

        def add(order: int, poly: RationalPoly) -> None:
            nxt[order] = nxt.get(order, RationalPoly()) + poly

        for j, c in terms.items():
            add(j, PHI * c.derivative().derivative())
            add(j + 1, 2 * c.derivative() * PHI)
            add(j + 2, PHI * c)
        terms = {j: p for j, p in nxt.items() if not p.is_zero()}
    return tuple(sorted(terms.items()))


def dtilde_of_function(f: FunctionSpec, ell: int):
    """Dtilde^ell f as a vectorized callable built from analytic derivatives.

    Requires derivatives up to order 2*ell; callers must check the smoothness
    flags first when treating the result as an element of L_inf.
    """
    if 2 * ell > f.max_derivative_order:
        raise ValueError(
            f"Dtilde^{ell} of {f.name!r} needs derivative order {2 * ell}, "
            f"only {f.max_derivative_order} available"
        )
    terms = dtilde_power_terms(ell)

    def apply(x):
        xs = np.asarray(x, dtype=float)
        pts = np.atleast_1d(xs)
        acc = np.zeros_like(pts)
        for order, cpoly in terms:
            acc = acc + cpoly.eval_float(pts) * f.derivative(order, pts)
        return float(acc[0]) if xs.ndim == 0 else acc.reshape(xs.shape)

    return apply
