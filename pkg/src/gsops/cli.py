"""Command-line front end: verification suites and convergence experiments.

Emits CSV (primary, plot-ready) or JSON tables.  Every output begins with a
header recording the package version, a hash of the effective configuration,
and the seed, so identical invocations produce byte-identical files.  Exit
codes: 0 all checks pass, 1 at least one inequality violated, 2 bad usage or
configuration.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .basis import bernstein_matrix, phi_big, tail_sums
from .catalog import CATALOG, FunctionSpec, catalog_names, get_function
from .errors import InvariantViolation, PreconditionError, ToleranceError
from .exactpoly import apply_Utilde_exact, commute_check_exact, telescope_check_exact
from .operators import BernsteinForm, apply_U, apply_Utilde
from .analysis import (
    BERNSTEIN_CONSTANT,
    InequalityReport,
    bernstein_probe_max_ratio,
    check_bernstein_inequality,
    check_bn_decomposition,
    check_contraction_U,
    check_converse,
    check_direct,
    check_jackson,
    check_voronovskaya,
    dtilde_sup_norm,
    kfunctional_sandwich,
    lebesgue_bound,
    rate_fit,
    sup_norm,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

_COLUMNS = ["name", "f", "n", "ell", "lhs", "rhs", "margin", "pass", "note"]
_VERIFY_COLUMNS = ["name", "f", "n", "lhs", "rhs", "margin", "pass"]


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation depends on; hashed into the output header."""

    command: str
    fns: tuple[str, ...]
    n_list: tuple[int, ...]
    ell_mult: int
    grid_size: int
    tol: float
    out: str
    fmt: str
    seed: int
    probes: int
    form_path: str = ""
    points: str = "grid:101"

    def digest(self) -> str:
        # the output path is not part of the computation; identical runs must
        # produce byte-identical files wherever they are written
        payload = {k: v for k, v in asdict(self).items() if k != "out"}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]


def parse_n_spec(spec: str) -> tuple[int, ...]:
    """Parse '--n' values: 'start:factor:count' geometric range or comma list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError("geometric range must be start:factor:count")
        start, factor, count = (int(p) for p in parts)
        if factor < 2:
            raise ValueError("geometric range factor must be >= 2")
        if count < 1:
            raise ValueError("geometric range count must be >= 1")
        return tuple(start * factor**i for i in range(count))
    return tuple(int(p) for p in spec.split(",") if p)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    if value is None:
        return ""
    return str(value)


def _row(name, f, n, ell, lhs, rhs, status, note="") -> dict:
    margin = rhs - lhs if isinstance(lhs, float) and isinstance(rhs, float) else None
    return {
        "name": name,
        "f": f,
        "n": n,
        "ell": ell,
        "lhs": lhs,
        "rhs": rhs,
        "margin": margin,
        "pass": status,
        "note": note,
    }


def _report_row(r: InequalityReport) -> dict:
    return _row(r.name, r.f, r.n, r.ell, r.lhs, r.rhs, "pass" if r.passed else "fail", r.note)


def _skip_row(name: str, f: str, n: int, reason: str, ell=None) -> dict:
    return _row(name, f, n, ell, None, None, "skip", reason)


def _fail_row(name: str, f: str, n: int, reason: str, ell=None) -> dict:
    return _row(name, f, n, ell, None, None, "fail", reason)


def _guarded(rows: list, name: str, f: str, n: int, thunk, ell=None) -> None:
    """Run one check; map precondition rejections to skips, errors to failures."""
    try:
        result = thunk()
    except PreconditionError as exc:
        rows.append(_skip_row(name, f, n, str(exc), ell))
        return
    except (ToleranceError, InvariantViolation, ValueError) as exc:
        rows.append(_fail_row(name, f, n, f"{type(exc).__name__}: {exc}", ell))
        return
    if isinstance(result, InequalityReport):
        rows.append(_report_row(result))
    else:
        rows.extend(_report_row(r) for r in result)


# ---------------------------------------------------------------------------
# verify: exact identities plus float identities
# ---------------------------------------------------------------------------


def _moment_bruteforce_dev(n: int, xs: np.ndarray) -> float:
    """Max deviation between closed-form moments and the defining sums."""
    from .basis import moment

    B = bernstein_matrix(n, xs)
    k_over_n = np.arange(n + 1) / n
    worst = 0.0
    for i in range(5):
        brute = np.sum(((k_over_n[None, :] - xs[:, None]) ** i) * B, axis=1)
        closed = np.array([moment(n, i, float(x)) for x in xs])
        worst = max(worst, float(np.max(np.abs(brute - closed))))
    return worst


def _eigen_relation_dev(n: int, xs: np.ndarray) -> float:
    """Max normalized deviation of phi P'' (degree-lowered form) from T * P.

    Normalized by the absolute-value sum of the three terms of T times P,
    the natural magnitude scale of the identity (T itself crosses zero).
    """
    B = bernstein_matrix(n, xs)
    B2 = bernstein_matrix(n - 2, xs)
    phi = xs * (1.0 - xs)
    k = np.arange(n + 1, dtype=float)
    second = np.zeros_like(B)
    for j in range(n + 1):
        acc = np.zeros_like(xs)
        if j >= 2:
            acc += B2[:, j - 2]
        if 1 <= j <= n - 1:
            acc -= 2.0 * B2[:, j - 1]
        if j <= n - 2:
            acc += B2[:, j]
        second[:, j] = n * (n - 1) * acc
    lhs = phi[:, None] * second
    T = np.outer(1.0 - xs, k * (k - 1)) / xs[:, None] - 2.0 * k * (n - k) + np.outer(
        xs, (n - k) * (n - k - 1)
    ) / (1.0 - xs)[:, None]
    Tbar = np.outer(1.0 - xs, k * (k - 1)) / xs[:, None] + 2.0 * k * (n - k) + np.outer(
        xs, (n - k) * (n - k - 1)
    ) / (1.0 - xs)[:, None]
    rhs = T * B
    mask = B > 1e-30
    dev = np.abs(lhs - rhs)[mask] / (Tbar * B + 1e-300)[mask]
    return float(np.max(dev))


def _verify_exact_rows(f: FunctionSpec, n: int) -> list[dict]:
    rows: list[dict] = []
    poly = f.poly

    def exact_row(name: str, thunk) -> None:
        try:
            thunk()
        except InvariantViolation as exc:
            rows.append(_fail_row(name, f.name, n, str(exc)))
        else:
            rows.append(_row(name, f.name, n, None, 0.0, 0.0, "pass"))

    exact_row("utilde_routes", lambda: apply_Utilde_exact(poly, n))
    exact_row("commute_identities", lambda: commute_check_exact(poly, n, n + 1))
    exact_row("telescope", lambda: telescope_check_exact(poly, n))
    return rows


def _verify_float_rows(cfg: RunConfig, n: int, rng: np.random.Generator) -> list[dict]:
    rows: list[dict] = []
    eps = float(np.finfo(float).eps)

    xs = np.linspace(0.0, 1.0, 1000)
    dev = float(np.max(np.abs(np.sum(bernstein_matrix(n, xs), axis=1) - 1.0)))
    rows.append(_row("partition_unity", "-", n, None, dev, 8 * n * eps, "pass" if dev <= 8 * n * eps else "fail"))

    interior = np.linspace(0.02, 0.98, 25)
    rows.append(
        _report_row(InequalityReport("moment_closed_forms", "-", n, _moment_bruteforce_dev(n, interior), 1e-12))
    )
    rows.append(
        _report_row(InequalityReport("eigen_relation", "-", n, _eigen_relation_dev(n, interior), 1e-10))
    )

    worst_phi = 0.0
    for alpha in (-2.0, -1.0, 0.0, 1.0, 2.0, math.pi):
        for x in rng.uniform(0.0, 1.0, size=20):
            x = min(max(float(x), 1e-6), 1.0 - 1e-6)
            worst_phi = max(worst_phi, abs(phi_big(alpha, n, x) - (alpha**2 + 2.0 - 2.0 / n)))
    rows.append(_report_row(InequalityReport("phi_identity", "-", n, worst_phi, 1e-9)))

    ts = tail_sums(n)
    rows.append(_report_row(InequalityReport("tail_lambda_lower", "-", n, 1.0 / (2 * n**2), ts.lam)))
    rows.append(_report_row(InequalityReport("tail_lambda_upper", "-", n, ts.lam, 1.0 / n**2)))
    rows.append(_report_row(InequalityReport("tail_theta_upper", "-", n, ts.theta, 4.0 / (9 * n**3))))

    leb = lebesgue_bound(n, cfg.grid_size)
    rows.append(
        _report_row(InequalityReport("lebesgue_bound", "-", n, leb.value, math.sqrt(3.0 - 2.0 / n) + 1e-9))
    )
    return rows


def _verify_function_rows(cfg: RunConfig, f: FunctionSpec, n: int) -> list[dict]:
    rows: list[dict] = []
    try:
        pu = apply_U(f, n, cfg.tol)
        put = apply_Utilde(f, n, cfg.tol)
    except ToleranceError as exc:
        rows.append(_fail_row("endpoint_interp", f.name, n, str(exc)))
        return rows
    dev = max(
        abs(pu.eval(0.0) - f.eval(0.0)),
        abs(pu.eval(1.0) - f.eval(1.0)),
        abs(put.eval(0.0) - f.eval(0.0)),
        abs(put.eval(1.0) - f.eval(1.0)),
    )
    rows.append(_report_row(InequalityReport("endpoint_interp", f.name, n, dev, 1e-12)))

    if f.polynomial_degree is not None and f.polynomial_degree <= 1:
        err = sup_norm(lambda t: put.eval(t) - f.eval(t), cfg.grid_size).value
        rows.append(_report_row(InequalityReport("linear_reproduction", f.name, n, err, 1e-12)))

    _guarded(rows, "contraction_U", f.name, n, lambda: check_contraction_U(f, n, cfg.grid_size, cfg.tol))
    _guarded(rows, "jackson", f.name, n, lambda: check_jackson(f, n, cfg.grid_size, cfg.tol))
    return rows


def cmd_verify(cfg: RunConfig) -> list[dict]:
    rows: list[dict] = []
    rng = np.random.default_rng(cfg.seed)
    polys = [get_function(name) for name in cfg.fns if CATALOG[name].poly is not None]
    for n in cfg.n_list:
        for f in polys:
            rows.extend(_verify_exact_rows(f, n))
        rows.extend(_verify_float_rows(cfg, n, rng))
        for name in cfg.fns:
            rows.extend(_verify_function_rows(cfg, get_function(name), n))
    return rows


# ---------------------------------------------------------------------------
# table / norms / kfunc / voronovskaya / converse
# ---------------------------------------------------------------------------

_TABLE_COLUMNS = ["f", "n", "err_U", "err_Utilde", "lambda_n", "bound_jackson", "ratio"]


def cmd_table(cfg: RunConfig) -> list[dict]:
    rows: list[dict] = []
    for name in cfg.fns:
        f = get_function(name)
        jackson_ok = f.smoothness.w20 and f.smoothness.dtilde_w2
        d2norm = dtilde_sup_norm(f, 2, cfg.grid_size) if jackson_ok else None
        for n in cfg.n_list:
            err_u = sup_norm(lambda t, p=apply_U(f, n, cfg.tol): p.eval(t) - f.eval(t), cfg.grid_size).value
            err_ut = sup_norm(lambda t, p=apply_Utilde(f, n, cfg.tol): p.eval(t) - f.eval(t), cfg.grid_size).value
            bound = d2norm / n**2 if d2norm is not None else None
            rows.append(
                {
                    "f": name,
                    "n": n,
                    "err_U": err_u,
                    "err_Utilde": err_ut,
                    "lambda_n": tail_sums(n).lam,
                    "bound_jackson": bound,
                    "ratio": (err_ut / bound) if bound else None,
                }
            )
        slopes = {}
        for op in ("U", "Utilde"):
            try:
                slopes[op], _ = rate_fit(f, cfg.n_list, op, cfg.grid_size, cfg.tol)
            except ValueError as exc:
                slopes[op] = f"rejected: {exc}"
        rows.append(
            {
                "f": name,
                "n": "slope",
                "err_U": slopes["U"],
                "err_Utilde": slopes["Utilde"],
                "lambda_n": None,
                "bound_jackson": None,
                "ratio": None,
            }
        )
    return rows


def cmd_norms(cfg: RunConfig) -> list[dict]:
    rows: list[dict] = []
    for n in cfg.n_list:
        leb = lebesgue_bound(n, cfg.grid_size)
        rows.append(
            _report_row(
                InequalityReport(
                    "lebesgue_bound", "-", n, leb.value, math.sqrt(3.0 - 2.0 / n) + 1e-9,
                    note=f"argmax={leb.argmax:.6f}",
                )
            )
        )
        for name in cfg.fns:
            _guarded(
                rows, "bernstein", name, n,
                lambda f=get_function(name), n=n: check_bernstein_inequality(f, n, cfg.grid_size, cfg.tol),
            )
        if cfg.probes > 0:
            rng = np.random.default_rng([cfg.seed, n])
            ratio = bernstein_probe_max_ratio(n, cfg.probes, rng, cfg.grid_size)
            rows.append(
                _report_row(
                    InequalityReport(
                        "bernstein_probes", "random", n, ratio * n, BERNSTEIN_CONSTANT * n,
                        note=f"trials={cfg.probes}",
                    )
                )
            )
        for rep in check_bn_decomposition(n, cfg.grid_size):
            rows.append(_report_row(rep))
    return rows


def cmd_kfunc(cfg: RunConfig) -> list[dict]:
    rows: list[dict] = []
    for name in cfg.fns:
        f = get_function(name)
        for n in cfg.n_list:
            try:
                sw = kfunctional_sandwich(f, n, None, cfg.grid_size, cfg.tol)
            except (ToleranceError, ValueError) as exc:
                rows.append(_fail_row("kf_sandwich", name, n, f"{type(exc).__name__}: {exc}"))
                continue
            status = "pass" if sw.lower <= sw.upper * (1 + 1e-9) + 1e-12 else "fail"
            rows.append(_row("kf_sandwich", name, n, None, sw.lower, sw.upper, status, sw.candidate_id))
            _guarded(rows, "direct", name, n, lambda f=f, n=n: check_direct(f, n, None, cfg.grid_size, cfg.tol))
    return rows


def cmd_voronovskaya(cfg: RunConfig) -> list[dict]:
    rows: list[dict] = []
    for name in cfg.fns:
        for n in cfg.n_list:
            _guarded(
                rows, "voronovskaya", name, n,
                lambda f=get_function(name), n=n: check_voronovskaya(f, n, cfg.grid_size, cfg.tol),
            )
    return rows


def cmd_converse(cfg: RunConfig) -> list[dict]:
    rows: list[dict] = []
    for name in cfg.fns:
        for n in cfg.n_list:
            ell = cfg.ell_mult * n
            _guarded(
                rows, "converse", name, n,
                lambda f=get_function(name), n=n, ell=ell: check_converse(f, n, ell, None, cfg.grid_size, cfg.tol),
                ell=ell,
            )
    return rows


_EVAL_COLUMNS = ["x", "value"]


def parse_points(spec: str) -> np.ndarray:
    """Evaluation points: a comma list of reals or 'grid:K' for K uniform points."""
    if spec.startswith("grid:"):
        count = int(spec.split(":", 1)[1])
        if count < 2:
            raise ValueError("grid point count must be >= 2")
        return np.linspace(0.0, 1.0, count)
    pts = np.array([float(p) for p in spec.split(",") if p])
    if pts.size == 0:
        raise ValueError("empty point list")
    if pts.min() < 0.0 or pts.max() > 1.0:
        raise ValueError("evaluation points must lie in [0, 1]")
    return pts


def cmd_eval(cfg: RunConfig) -> list[dict]:
    """Evaluate a serialized Bernstein form ({"degree": n, "coeffs": [...]})."""
    with open(cfg.form_path, encoding="utf-8") as fh:
        form = BernsteinForm.from_json_dict(json.load(fh))
    xs = parse_points(cfg.points)
    values = form.eval(xs)
    return [{"x": float(x), "value": float(v)} for x, v in zip(xs, values)]


_COMMANDS = {
    "verify": (cmd_verify, _VERIFY_COLUMNS),
    "table": (cmd_table, _TABLE_COLUMNS),
    "norms": (cmd_norms, _COLUMNS),
    "kfunc": (cmd_kfunc, _COLUMNS),
    "voronovskaya": (cmd_voronovskaya, _COLUMNS),
    "converse": (cmd_converse, _COLUMNS),
    "eval": (cmd_eval, _EVAL_COLUMNS),
}


def _sort_key(row: dict):
    return (
        str(row.get("name", "")),
        str(row.get("f", "")),
        str(row.get("n", "")).rjust(12, "0"),
        str(row.get("ell", "") or ""),
    )


def render(cfg: RunConfig, rows: list[dict], columns: list[str]) -> str:
    header = f"# gsops {__version__} config={cfg.digest()} seed={cfg.seed}"
    if cfg.fmt == "csv":
        lines = [header, ",".join(columns)]
        for row in rows:
            lines.append(",".join(_fmt(row.get(col)) for col in columns))
        return "\n".join(lines) + "\n"
    doc = {
        "version": __version__,
        "config_hash": cfg.digest(),
        "seed": cfg.seed,
        "command": cfg.command,
        "rows": [{col: row.get(col) for col in columns} for row in rows],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsops",
        description="Verification suites and convergence experiments for the "
        "genuine Bernstein-Durrmeyer operator and its O(n^-2) modification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in _COMMANDS:
        p = sub.add_parser(command)
        p.add_argument("--fns", default=",".join(catalog_names()),
                       help="comma-separated catalog function ids")
        p.add_argument("--n", dest="n_spec", default="2:2:5",
                       help="n values: comma list or start:factor:count")
        p.add_argument("--ell-mult", type=int, default=16,
                       help="second scale multiplier: ell = mult * n (converse)")
        p.add_argument("--grid", type=int, default=2001, help="sup-norm grid size")
        p.add_argument("--tol", type=float, default=1e-10, help="quadrature tolerance")
        p.add_argument("--out", default="-", help="output path ('-' = stdout)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=20240801, help="seed for randomized probes")
        p.add_argument("--probes", type=int, default=200,
                       help="random coefficient probes per n (norms)")
        if command == "eval":
            p.add_argument("--form", dest="form_path", required=True,
                           help="path to a serialized Bernstein form (JSON)")
            p.add_argument("--points", default="grid:101",
                           help="evaluation points: comma list or grid:K")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fns = tuple(s for s in args.fns.split(",") if s)
    n_list = parse_n_spec(args.n_spec)
    if args.command != "eval":
        if not fns:
            raise ValueError("empty function list")
        unknown = [s for s in fns if s not in CATALOG]
        if unknown:
            raise ValueError(f"unknown function ids: {', '.join(unknown)}")
        if not n_list:
            raise ValueError("empty n list")
        if min(n_list) < 2:
            raise ValueError("all n values must be >= 2")
    if args.grid < 64:
        raise ValueError("grid size must be >= 64")
    return RunConfig(
        command=args.command,
        fns=fns,
        n_list=n_list,
        ell_mult=args.ell_mult,
        grid_size=args.grid,
        tol=args.tol,
        out=args.out,
        fmt=args.fmt,
        seed=args.seed,
        probes=args.probes,
        form_path=getattr(args, "form_path", ""),
        points=getattr(args, "points", "grid:101"),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        print(f"gsops: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    runner, columns = _COMMANDS[cfg.command]
    try:
        rows = sorted(runner(cfg), key=_sort_key)
    except (OSError, ValueError, KeyError) as exc:
        print(f"gsops: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(cfg, rows, columns)
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)

    failed = [r for r in rows if r.get("pass") == "fail"]
    if failed:
        first = failed[0]
        print(f"gsops: {len(failed)} failed check(s); first: {first}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
