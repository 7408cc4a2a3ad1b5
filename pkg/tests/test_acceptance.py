"""Acceptance suite: every criterion at its stated tolerance.

Each criterion prints one PASS/FAIL line (run pytest with -s to see them all;
failures surface the line regardless).  Two sub-checks are expected red and
carry the full analysis in their messages: the stated window bound of the
cross term b_n fails from n = 37 on (a factor-2 slip in the window estimate;
the corrected bound 5n - 4 holds), and the stated slope windows at
ns = {4,...,64} are pre-asymptotic for exp and sinpi.
"""

import math
import time

import numpy as np
import pytest

from gsops.analysis import (
    BERNSTEIN_CONSTANT,
    CONVERSE_CONSTANT,
    CONVERSE_SCALE_FACTOR,
    PASS_ATOL,
    PASS_RTOL,
    SQRT3,
    bernstein_probe_max_ratio,
    check_bernstein_inequality,
    check_bn_decomposition,
    check_converse,
    check_jackson,
    check_voronovskaya,
    kfunctional_sandwich,
    lebesgue_bound,
    rate_fit,
    sup_norm,
)
from gsops.basis import bernstein_matrix, moment, phi_big, tail_sums
from gsops.catalog import CATALOG, get_function
from gsops.errors import PreconditionError
from gsops.exactpoly import (
    RationalPoly,
    apply_Utilde_exact,
    commute_check_exact,
    telescope_check_exact,
)
from gsops.operators import apply_Utilde

EXACT_POLYS = {
    "t2": RationalPoly([0, 0, 1]),
    "t3": RationalPoly([0, 0, 0, 1]),
    "t5mt2": RationalPoly([0, 0, -1, 0, 0, 1]),
}


def announce(tag: str, ok: bool, detail: str = "") -> None:
    line = f"ACCEPTANCE {tag}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" -- {detail}"
    print(line)


def within(lhs: float, rhs: float) -> bool:
    return lhs <= rhs * (1.0 + PASS_RTOL) + PASS_ATOL


# -- 1. exact identity suite ---------------------------------------------------


def test_criterion_1_exact_identities():
    start = time.perf_counter()
    for name, f in EXACT_POLYS.items():
        for n in range(2, 9):
            apply_Utilde_exact(f, n)  # route identity (two-way construction)
            for m in range(2, 9):
                report = commute_check_exact(f, n, m)
                assert all(v == 0 for v in report.values()), (name, n, m)
            assert telescope_check_exact(f, n) == 0, (name, n)
    elapsed = time.perf_counter() - start
    ok = elapsed < 30.0
    announce("1 exact identities", ok, f"all discrepancies exactly 0; {elapsed:.1f}s < 30s")
    assert ok


# -- 2. Phi identity -------------------------------------------------------------


def test_criterion_2_phi_identity():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for n in range(2, 201):
        xs = rng.uniform(1e-6, 1.0 - 1e-6, size=100)
        closed_minus_alpha2 = 2.0 - 2.0 / n
        for alpha in (-2.0, -1.0, 0.0, 1.0, 2.0, math.pi):
            dev = np.max(np.abs(phi_big(alpha, n, xs) - (alpha**2 + closed_minus_alpha2)))
            worst = max(worst, float(dev))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10.0
    announce("2 Phi identity", ok, f"max dev {worst:.2e} <= 1e-9; {elapsed:.1f}s < 10s")
    assert worst <= 1e-9
    assert elapsed < 10.0


# -- 3. eigen-relation and moments -----------------------------------------------


def test_criterion_3_eigen_and_moments():
    worst_eig = 0.0
    worst_mom = 0.0
    for n in range(2, 101):
        xs = np.linspace(0.017, 0.983, 21)
        B = bernstein_matrix(n, xs)
        B2 = bernstein_matrix(n - 2, xs)
        # brute-force moments against the closed forms
        k_over_n = np.arange(n + 1) / n
        for i in range(5):
            brute = np.sum(((k_over_n[None, :] - xs[:, None]) ** i) * B, axis=1)
            closed = np.array([moment(n, i, float(x)) for x in xs])
            worst_mom = max(worst_mom, float(np.max(np.abs(brute - closed))))
        # phi P'' (degree-lowered second difference) against T * P, relative
        # to the absolute-term magnitude of T times P
        k = np.arange(n + 1, dtype=float)
        for kk in range(n + 1):
            acc = np.zeros_like(xs)
            if kk >= 2:
                acc += B2[:, kk - 2]
            if 1 <= kk <= n - 1:
                acc -= 2 * B2[:, kk - 1]
            if kk <= n - 2:
                acc += B2[:, kk]
            lhs = xs * (1 - xs) * n * (n - 1) * acc
            t = (
                kk * (kk - 1) * (1 - xs) / xs
                - 2.0 * kk * (n - kk)
                + (n - kk) * (n - kk - 1) * xs / (1 - xs)
            )
            tbar = (
                kk * (kk - 1) * (1 - xs) / xs
                + 2.0 * kk * (n - kk)
                + (n - kk) * (n - kk - 1) * xs / (1 - xs)
            )
            mask = B[:, kk] > 1e-30
            dev = np.abs(lhs - t * B[:, kk])[mask] / (tbar * B[:, kk])[mask]
            if dev.size:
                worst_eig = max(worst_eig, float(np.max(dev)))
    ok = worst_eig <= 1e-10 and worst_mom <= 1e-12
    announce(
        "3 eigen-relation + moments", ok,
        f"eigen rel dev {worst_eig:.2e} <= 1e-10, moment abs dev {worst_mom:.2e} <= 1e-12",
    )
    assert ok


# -- 4. norm bound of the modified operator ---------------------------------------


def test_criterion_4_lebesgue_bound():
    worst_hi = -math.inf
    worst_lo = math.inf
    for n in range(2, 129):
        val = lebesgue_bound(n).value
        worst_hi = max(worst_hi, val - (math.sqrt(3.0 - 2.0 / n) + 1e-9))
        worst_lo = min(worst_lo, val - (1.0 - 1e-12))
    ok = worst_hi <= 0.0 and worst_lo >= 0.0
    announce(
        "4 norm bound", ok,
        f"sup Lebesgue function within [1, sqrt(3-2/n)] for n=2..128 "
        f"(max overshoot {worst_hi:.2e})",
    )
    assert ok


# -- 5. Jackson-type inequality ----------------------------------------------------


def test_criterion_5_jackson():
    eligible = [f for f in CATALOG.values() if f.smoothness.w20 and f.smoothness.dtilde_w2]
    assert {f.name for f in eligible} == {"one", "t", "t2", "t3", "t5mt2", "exp", "sinpi"}
    all_pass = True
    for f in eligible:
        for n in (2, 4, 8, 16, 32, 64):
            rep = check_jackson(f, n)
            all_pass &= rep.passed
            if f.name == "t2":
                assert abs(rep.lhs - 1.0 / (2 * n * (n + 1))) <= 1e-10
    announce("5 Jackson inequality", all_pass, "7 eligible functions x n in {2..64}; "
             "t2 error matches 1/(2n(n+1)) to 1e-10")
    assert all_pass


# -- 6. Voronovskaya-type inequality -------------------------------------------------


def test_criterion_6_voronovskaya():
    all_pass = True
    for name in ("t2", "t3", "exp"):
        for n in (2, 4, 8, 16, 32):
            all_pass &= check_voronovskaya(get_function(name), n).passed
    rep = check_voronovskaya(get_function("t2"), 2)
    lam2 = math.pi**2 / 6.0 - 1.5  # high-precision tail-sum oracle
    th2 = math.pi**2 / 3.0 - 3.25
    lhs_ok = abs(rep.lhs - abs(1.0 / 3.0 - 4.0 * lam2) / 4.0) <= 1e-9
    rhs_ok = abs(rep.rhs - 2.0 * th2) <= 1e-9
    ok = all_pass and lhs_ok and rhs_ok
    announce("6 Voronovskaya inequality", ok,
             f"t2/t3/exp x n in {{2..32}}; n=2 values lhs={rep.lhs:.6f}, rhs={rep.rhs:.6f}")
    assert ok


# -- 7. Bernstein-type inequality and its decomposition -------------------------------


def test_criterion_7a_bernstein_bound_catalog_and_probes():
    all_pass = True
    for f in CATALOG.values():
        for n in range(2, 65):
            all_pass &= check_bernstein_inequality(f, n).passed
    worst_ratio = 0.0
    probes_per_n = 159  # 159 * 63 = 10017 seeded probes
    for n in range(2, 65):
        rng = np.random.default_rng([20240801, n])
        worst_ratio = max(worst_ratio, bernstein_probe_max_ratio(n, probes_per_n, rng))
    probes_ok = worst_ratio <= BERNSTEIN_CONSTANT
    ok = all_pass and probes_ok
    announce("7a Bernstein bound (catalog + 10^4 probes)", ok,
             f"worst probe ratio {worst_ratio:.4f} <= {BERNSTEIN_CONSTANT:.4f}")
    assert ok


def test_criterion_7b_decomposition_a_c_plateau():
    all_pass = True
    for n in range(2, 65):
        reports = {r.name: r for r in check_bn_decomposition(n)}
        all_pass &= reports["a_n_identity"].passed
        all_pass &= reports["c_n_bound"].passed
        all_pass &= reports["b_n_plateau"].passed
    announce("7b decomposition a_n == 2(n-1), c_n <= sqrt(6) n, plateau", all_pass,
             "n in {2..64} on 2001-point grids")
    assert all_pass


def test_criterion_7c_decomposition_b_bound_as_stated():
    # Faithful check of the stated window bound b_n <= 4.5 n.  It genuinely
    # fails for n >= 37: inside a sign-change window the absolute sum equals
    # 4(n-1) + 2 s_k, not 4(n-1) + s_k (the source estimate drops a factor 2,
    # verified in exact rational arithmetic), so the sharp constant
    # approaches ~4.65; the corrected chain from the same window maxima,
    # b_n <= 5n - 4, does hold.  See the decisions ledger.
    failures = []
    corrected_ok = True
    for n in range(2, 65):
        rep = {r.name: r for r in check_bn_decomposition(n)}["b_n_bound"]
        if not rep.passed:
            failures.append((n, rep.lhs / n))
        corrected_ok &= rep.lhs <= 5 * n - 4
    ok = not failures
    detail = "b_n <= 4.5n holds for n in {2..36}"
    if failures:
        worst = max(r for _, r in failures)
        detail = (
            f"b_n <= 4.5n violated for n in {{{failures[0][0]}..{failures[-1][0]}}}, "
            f"max b_n/n = {worst:.4f} (corrected bound 5n-4 holds: {corrected_ok}); "
            "expected red: stated window estimate drops a factor 2, see decisions ledger"
        )
    announce("7c decomposition b_n <= 4.5n as stated", ok, detail)
    assert corrected_ok
    assert ok, detail


# -- 8. tail sums ----------------------------------------------------------------------


def test_criterion_8_tail_sums():
    strict = True
    for n in range(2, 10_001):
        ts = tail_sums(n)
        strict &= 1.0 / (2 * n * n) < ts.lam < 1.0 / (n * n)
        strict &= ts.theta < 4.0 / (9 * n**3)
    ts2 = tail_sums(2)
    lam_ok = abs(ts2.lam - (math.pi**2 / 6.0 - 1.5)) <= 1e-14 * ts2.lam
    th_ok = abs(ts2.theta - (math.pi**2 / 3.0 - 3.25)) <= 1e-14 * ts2.theta
    ok = strict and lam_ok and th_ok
    announce("8 tail sums", ok,
             "strict bounds for n=2..10^4; lambda(2), theta(2) at 1e-14 relative")
    assert ok


# -- 9. rate separation ------------------------------------------------------------------


NS_STATED = (4, 8, 16, 32, 64)


@pytest.fixture(scope="module")
def criterion_9_slopes():
    start = time.perf_counter()
    slopes = {}
    for name in ("t2", "exp", "sinpi"):
        f = get_function(name)
        slopes[name] = {
            "Utilde": rate_fit(f, NS_STATED, "Utilde")[0],
            "U": rate_fit(f, NS_STATED, "U")[0],
        }
    elapsed = time.perf_counter() - start
    return slopes, elapsed


def test_criterion_9a_rate_separation_attainable(criterion_9_slopes):
    slopes, elapsed = criterion_9_slopes
    ok = (
        -2.1 <= slopes["t2"]["Utilde"] <= -1.9
        and -1.1 <= slopes["t2"]["U"] <= -0.9
        and -1.1 <= slopes["exp"]["U"] <= -0.9
        and elapsed < 60.0
    )
    announce("9a rate windows (t2 both, exp U-side)", ok,
             f"t2: {slopes['t2']['Utilde']:.3f}/{slopes['t2']['U']:.3f}, "
             f"exp U: {slopes['exp']['U']:.3f}; {elapsed:.1f}s < 60s")
    assert ok
    # the criterion's titular separation holds for every function: the
    # modified operator is decisively n^-2 against n^-1
    for name in ("t2", "exp", "sinpi"):
        assert slopes[name]["Utilde"] < slopes[name]["U"] - 0.75


def test_criterion_9b_rate_windows_as_stated(criterion_9_slopes):
    # Faithful check of the stated windows at ns = {4,...,64}.  exp (Utilde
    # side) and sinpi (both sides) genuinely land outside: at n = 4 the
    # second-order term theta(n)||Dtilde^3 f|| of the expansion rivals the
    # main term lambda(n)||Dtilde^2 f|| (for sinpi it exceeds it), deflating
    # the first fit point.  Confirmed by 40-digit arithmetic; over
    # ns = {16..256} the slopes move to -1.96/-0.98 (exp) and -1.89/-0.96
    # (sinpi).  Expected red; see the decisions ledger.
    slopes, _ = criterion_9_slopes
    failures = []
    for name in ("t2", "exp", "sinpi"):
        if not -2.1 <= slopes[name]["Utilde"] <= -1.9:
            failures.append(f"{name} Utilde {slopes[name]['Utilde']:.4f}")
        if not -1.1 <= slopes[name]["U"] <= -0.9:
            failures.append(f"{name} U {slopes[name]['U']:.4f}")
    ok = not failures
    detail = "all six slopes inside the stated windows"
    if failures:
        detail = ("outside stated windows: " + ", ".join(failures)
                  + "; expected red (pre-asymptotic ns), see decisions ledger")
    announce("9b rate windows as stated", ok, detail)
    assert ok, detail


# -- 10. K-functional sandwich, direct and converse ----------------------------------------


def test_criterion_10_sandwich_direct_converse():
    all_ok = True
    worst = ""
    for name in sorted(CATALOG):
        f = get_function(name)
        for n in (2, 4, 8):
            sw = kfunctional_sandwich(f, n)
            err_n = sup_norm(lambda x, p=apply_Utilde(f, n): p.eval(x) - f.eval(x)).value
            sandwich_ok = within(sw.lower, sw.upper)
            direct_ok = within(err_n, (1.0 + SQRT3) * sw.upper)
            main, iterate = check_converse(f, n, 16 * n)
            if not (sandwich_ok and direct_ok and main.passed and iterate.passed):
                all_ok = False
                worst = f"{name} n={n}"
    # the scale threshold is enforced: ell = 15 n < ceil(L n) must be rejected
    with pytest.raises(PreconditionError):
        check_converse(get_function("t2"), 4, 15 * 4)
    assert math.ceil(CONVERSE_SCALE_FACTOR * 4) <= 64  # ell = 16n passes the gate
    assert CONVERSE_CONSTANT == pytest.approx(4.0 + SQRT3 + BERNSTEIN_CONSTANT**2)
    announce("10 sandwich + direct + converse", all_ok,
             "catalog x n in {2,4,8}, ell = 16n, C = 4+sqrt(3)+(6.5+sqrt(6))^2"
             + ("" if all_ok else f"; first failure {worst}"))
    assert all_ok
