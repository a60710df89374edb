"""Command-line front end.

Reports are ``key=value`` lines; every rational is printed as ``num/den``.
Exit codes: 0 success, 1 other library error, 2 usage, 3 parse error,
4 precision/certification failure, 5 solver failure, 6 hypothesis gate,
7 example check mismatch.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .errors import (
    HypothesisError,
    NoRootError,
    ParseError,
    PrecisionExhausted,
    SolverError,
    TiltphiError,
)
from .phimod import fmt_q

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_PRECISION = 4
EXIT_SOLVER = 5
EXIT_HYPOTHESIS = 6
EXIT_CHECK = 7


class CertificationError(PrecisionExhausted):
    """A quantity changed when recomputed at doubled precision."""


class Report:
    def __init__(self):
        self.lines: list[str] = []

    def add(self, key, value):
        self.lines.append(f"{key}={_fmt(value)}")

    def text(self) -> str:
        return "".join(line + "\n" for line in self.lines)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return fmt_q(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def _fmt_vec(vec) -> str:
    from .tilt import format_element

    return "; ".join(format_element(x) for x in vec)


def _polygon_text(poly) -> str:
    return " ".join(f"({fmt_q(x)},{fmt_q(y)})" for x, y in poly.breakpoints)


def _parse_q(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


# -- analyze ----------------------------------------------------------------

def _analysis(M, alphas):
    from .fixpt import fp_kernel
    from .phimod import pm_hodge_polygon, pm_hodge_slopes, pm_slope_filtration, pm_total_slope

    out = {}
    out["total_slope"] = pm_total_slope(M) if M.r else Fraction(0)
    betas = pm_hodge_slopes(M)
    out["hodge_slopes"] = betas
    out["polygon"] = pm_hodge_polygon(betas)
    out["filtration"] = pm_slope_filtration(M) if M.r else None
    out["kernels"] = {a: fp_kernel(M, a) for a in alphas}
    return out


def cmd_analyze(args, out) -> int:
    from .fixpt import fp_verify
    from .specfile import read_spec

    spec = read_spec(args.file, precision=args.precision, denom=args.denom)
    M = spec.module
    cfg = M.config
    alphas = sorted(set(args.alpha or []))
    res = _analysis(M, alphas)
    rep = Report()
    rep.add("command", "analyze")
    if args.no_certify:
        rep.add("watermark", "UNCERTIFIED")
    rep.add("p", cfg.p)
    rep.add("m", cfg.field.m)
    rep.add("rank", M.r)
    rep.add("denom", cfg.D)
    rep.add("precision", cfg.P)
    rep.add("total_slope", res["total_slope"])
    rep.add("hodge_slopes", res["hodge_slopes"])
    rep.add("polygon", _polygon_text(res["polygon"]))
    filt = res["filtration"]
    if filt is not None:
        rep.add("filtration_slopes", list(filt.slopes))
        rep.add("filtration_sum", filt.total)
        rep.add("filtration_D", filt.config.D)
        rep.add("filtration_field_degree", filt.config.field.m)
        for i, row in enumerate(filt.basis):
            rep.add(f"filtration_basis[{i}]", _fmt_vec(row))
    for a, K in res["kernels"].items():
        key = f"kernel[{fmt_q(a)}]"
        rep.add(f"{key}.dim", K.dim)
        rep.add(f"{key}.certified_P", K.certified_P)
        rep.add(f"{key}.certified_D", K.certified_D)
        for i, vec in enumerate(K.basis):
            rep.add(f"{key}.basis[{i}]", _fmt_vec(vec))
            v = fp_verify(M, a, vec)
            rep.add(f"{key}.residual[{i}]", repr(v.residual))
    if not args.no_certify:
        M2 = M.with_config(cfg.replace(P=2 * cfg.P))
        res2 = _analysis(M2, alphas)
        checks = [
            ("total_slope", res["total_slope"], res2["total_slope"]),
            ("hodge_slopes", res["hodge_slopes"], res2["hodge_slopes"]),
        ]
        if filt is not None:
            checks.append(("filtration_sum", filt.total, res2["filtration"].total))
        for a in alphas:
            checks.append((f"kernel[{fmt_q(a)}].dim", res["kernels"][a].dim, res2["kernels"][a].dim))
        bad = [name for name, x, y in checks if x != y]
        rep.add("certification_precision", 2 * cfg.P)
        if bad:
            out.write(rep.text())
            raise CertificationError(f"changed at doubled precision: {', '.join(bad)}")
        rep.add("certification", "PASS")
    if args.polygon_tsv:
        with open(args.polygon_tsv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(res["polygon"].to_tsv())
        rep.add("polygon_tsv", args.polygon_tsv)
    out.write(rep.text())
    return EXIT_OK


# -- reference examples ---------------------------------------------------------

def example_slope(P=8):
    """Both filtrations of the rank-2 module [[d^2, 1], [0, d^{1/2}]] over F_2."""
    from .gf import ff_make
    from .phimod import PhiModule, SlopeFiltration, pm_base_change, pm_slope_filtration, \
        pm_total_slope, triangular_defect
    from .tilt import RingConfig, TiltElement

    cfg = RingConfig(ff_make(2, 1), 2, Fraction(P))
    M = PhiModule.from_strings(cfg, [["d^{2}", "1"], ["0", "d^{1/2}"]])
    one = TiltElement.one(cfg)
    d = TiltElement.monomial(cfg, 1, 1)
    # Hensel root of d x^2 + x + 1 = 0 with x = 1 mod d: iterate x <- -(1 + d x^2)
    x = one
    for _ in range(cfg.Pn + 1):
        x = -(one + d * x * x)
    C = [[x, TiltElement.zero(cfg)], [TiltElement.monomial(cfg, 1, Fraction(1, 2)), one]]
    B = pm_base_change(M, C)
    expected = [[d, x.invert_unit()], [TiltElement.zero(cfg), x * TiltElement.monomial(cfg, 1, Fraction(3, 2))]]
    # the matrix is already triangular in the standard basis
    standard = SlopeFiltration((Fraction(2), Fraction(1, 2)),
                               ((one, TiltElement.zero(cfg)), (TiltElement.zero(cfg), one)), cfg)
    alt = SlopeFiltration((Fraction(1), Fraction(3, 2)), tuple(tuple(r) for r in C), cfg)
    greedy = pm_slope_filtration(M)
    return {
        "module": M,
        "hensel_root": x,
        "root_check": (d * x * x + x + one).is_zero(),
        "total_slope": pm_total_slope(M),
        "reference_matrix": B.matrix == expected,
        "reference_filtration": alt,
        "reference_filtration_ok": not triangular_defect(M, alt),
        "standard_filtration": standard,
        "standard_filtration_ok": not triangular_defect(M, standard),
        "greedy": greedy,
        "greedy_ok": not triangular_defect(M, greedy),
    }


def example_fixedpoint(P=8):
    """Ker(phi - d) on [[0, d], [1, 0]] over F_4 against the closed form (a^2 d^{2/3}, a d^{1/3})."""
    from .fixpt import fp_kernel, fp_verify
    from .gf import ff_make
    from .linalg import rank_dense
    from .phimod import PhiModule, pm_total_slope
    from .tilt import RingConfig, TiltElement

    F = ff_make(2, 2)
    cfg = RingConfig(F, 1, Fraction(P))
    M = PhiModule.from_strings(cfg, [["0", "d"], ["1", "0"]])
    K = fp_kernel(M, 1)
    kc = K.config
    closed = []
    for a in F.elements():
        if a.code:
            closed.append([TiltElement.monomial(kc, a * a, Fraction(2, 3)),
                           TiltElement.monomial(kc, a, Fraction(1, 3))])
    span_ok = _same_span(K.basis, closed, kc)
    verify = [fp_verify(M, 1, v) for v in K.basis]
    return {
        "module": M,
        "total_slope": pm_total_slope(M),
        "kernel": K,
        "closed_form_span": span_ok,
        "closed_form_rank": rank_dense([_window_coords(v, kc) for v in closed], 2) if closed else 0,
        "verify": verify,
    }


def _window_coords(vec, cfg, top=Fraction(1)):
    """F_p coordinates of the coefficients below d^top (enough to separate kernel vectors)."""
    F = cfg.field
    out = []
    for v in vec:
        for k in range(cfg.floor_n, int(top * cfg.D)):
            code = v.terms.get(k, 0)
            out.extend(F.to_coeffs(code))
    return out


def _same_span(basis, other, cfg) -> bool:
    from .linalg import rank_dense

    p = cfg.p
    a = [_window_coords(v, cfg) for v in basis]
    b = [_window_coords(v, cfg) for v in other]
    ra = rank_dense(a, p) if a else 0
    rb = rank_dense(b, p) if b else 0
    rab = rank_dense(a + b, p) if a or b else 0
    return ra == rb == rab


def cmd_example(args, out) -> int:
    rep = Report()
    rep.add("command", "example")
    rep.add("example", args.name)
    ok = True
    if args.name == "slope":
        r = example_slope(args.precision or 8)
        g = r["greedy"]
        checks = [
            ("total_slope", r["total_slope"], Fraction(5, 2)),
            ("hensel_root_check", r["root_check"], True),
            ("reference_matrix_match", r["reference_matrix"], True),
            ("standard_filtration_slopes", list(r["standard_filtration"].slopes), None),
            ("standard_filtration_sum", r["standard_filtration"].total, Fraction(5, 2)),
            ("standard_filtration_triangular", r["standard_filtration_ok"], True),
            ("reference_filtration_slopes", list(r["reference_filtration"].slopes), None),
            ("reference_filtration_sum", r["reference_filtration"].total, Fraction(5, 2)),
            ("reference_filtration_triangular", r["reference_filtration_ok"], True),
            ("greedy_filtration_slopes", list(g.slopes), None),
            ("greedy_filtration_sum", g.total, Fraction(5, 2)),
            ("greedy_filtration_triangular", r["greedy_ok"], True),
        ]
        rep.add("p", 2)
        rep.add("precision", r["module"].config.P)
        rep.add("hensel_root", str(r["hensel_root"]))
    elif args.name == "fixedpoint":
        r = example_fixedpoint(args.precision or 8)
        K = r["kernel"]
        checks = [
            ("total_slope", r["total_slope"], Fraction(1)),
            ("kernel_dim", K.dim, 2),
            ("closed_form_span", r["closed_form_span"], True),
            ("all_verified", all(v.passed for v in r["verify"]), True),
        ]
        rep.add("p", 2)
        rep.add("certified_P", K.certified_P)
        rep.add("certified_D", K.certified_D)
        for i, vec in enumerate(K.basis):
            rep.add(f"basis[{i}]", _fmt_vec(vec))
    else:
        from .dieudonne import dd_margherita

        p = args.p or 2
        r = dd_margherita(p, args.precision or 8)
        checks = [
            ("max_slope", r.max_slope, r.expected_max_slope),
            ("filtration_triangular", r.triangular, True),
            ("max_slope_exceeds_2", r.max_slope > 2, p > 2),
        ]
        rep.add("p", p)
        rep.add("rank", r.rank)
        rep.add("expected_max_slope", r.expected_max_slope)
        rep.add("kernel_dim_alpha_2", r.kernel_dim)
        rep.add("gap", r.gap)
        rep.add("certified_P", r.certified_P)
        rep.add("certified_D", r.certified_D)
    for name, got, want in checks:
        rep.add(name, got)
        if want is not None:
            passed = got == want
            ok &= passed
            rep.add(f"{name}.check", "pass" if passed else "FAIL")
    rep.add("result", "pass" if ok else "FAIL")
    out.write(rep.text())
    return EXIT_OK if ok else EXIT_CHECK


# -- arithmetic layer -------------------------------------------------------

def cmd_cm(args, out) -> int:
    from .dieudonne import dd_cm_report

    r = dd_cm_report(args.delta, args.p)
    rep = Report()
    rep.add("command", "cm")
    rep.add("delta", args.delta)
    rep.add("p", args.p)
    rep.add("gamma", f"[[{r.spec.gamma[0][0]},{r.spec.gamma[0][1]}],[{r.spec.gamma[1][0]},{r.spec.gamma[1][1]}]]")
    rep.add("reduction", r.spec.reduction)
    rep.add("quotient_dim", r.quotient_dim)
    if r.spec.reduction == "Ordinary":
        rep.add("generator", r.generator)
    else:
        rep.add("integral_part_trivial", r.integral_trivial)
        rep.add("certificates", len(r.certificates))
        rep.add("complete", r.complete)
        rep.add("certificate_columns", "a\tb\tt\tcharpoly\tsplit\trule")
        for c in r.certificates:
            cp = f"X^2{-c.trace % args.p:+d}*X{c.det:+d}".replace("+-", "-")
            rep.add("certificate", f"{c.a}\t{c.b}\t{c.t}\t{cp}\t{c.split.value}\t{c.rule}")
    out.write(rep.text())
    return EXIT_OK


def cmd_brauer(args, out) -> int:
    from .dieudonne import dd_hom_brauer, dd_make

    Z = dd_make(args.left, args.p)
    W = dd_make(args.right, args.p)
    r = dd_hom_brauer(Z, W)
    rep = Report()
    rep.add("command", "brauer")
    rep.add("left", Z.kind.value)
    rep.add("right", W.kind.value)
    rep.add("p", args.p)
    rep.add("generic_dim", r.generic_dim)
    rep.add("integral_dim", r.integral_dim)
    rep.add("quotient_dim", r.quotient_dim)
    rep.add("h2_gap", r.gap_crosscheck)
    rep.add("consistent", r.consistent)
    for w in r.witnesses:
        rep.add("witness", w)
    out.write(rep.text())
    if not r.consistent:
        raise CertificationError("Hom count disagrees with the H^2 kernel gap")
    return EXIT_OK


def cmd_abelian(args, out) -> int:
    from .dieudonne import dd_prank_bound

    r = dd_prank_bound(args.g, args.e, args.p)
    rep = Report()
    rep.add("command", "abelian")
    rep.add("g", r.g)
    rep.add("e", r.e)
    rep.add("p", r.p)
    rep.add("realization", r.realization)
    rep.add("gap", r.gap)
    rep.add("bound", r.bound)
    rep.add("satisfied", r.satisfied)
    rep.add("attained", r.attained)
    out.write(rep.text())
    return EXIT_OK if r.satisfied else EXIT_CHECK


def cmd_kummer(args, out) -> int:
    from .dieudonne import dd_kummer_dim

    dim = dd_kummer_dim(args.gap, args.p)
    rep = Report()
    rep.add("command", "kummer")
    rep.add("p", args.p)
    rep.add("abelian_gap", args.gap)
    rep.add("kummer_gap", dim)
    out.write(rep.text())
    return EXIT_OK


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tiltphi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="slopes, polygons and kernels of a module file")
    a.add_argument("file")
    a.add_argument("--alpha", type=_parse_q, action="append", help="twist exponent (repeatable)")
    a.add_argument("--precision", type=_parse_q)
    a.add_argument("--denom", type=int)
    a.add_argument("--polygon-tsv", metavar="PATH")
    a.add_argument("--no-certify", action="store_true", help="skip the 2P re-run (output marked UNCERTIFIED)")
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("example", help="rebuild a worked example and check it")
    e.add_argument("name", choices=["slope", "fixedpoint", "margherita3"])
    e.add_argument("--p", type=int)
    e.add_argument("--precision", type=_parse_q)
    e.set_defaults(func=cmd_example)

    c = sub.add_parser("cm", help="CM elliptic curve: reduction type and Brauer quotient")
    c.add_argument("--delta", type=int, required=True)
    c.add_argument("--p", type=int, required=True)
    c.set_defaults(func=cmd_cm)

    b = sub.add_parser("brauer", help="Hom-space count for a product of two elliptic curves")
    b.add_argument("--left", required=True)
    b.add_argument("--right", required=True)
    b.add_argument("--p", type=int, required=True)
    b.set_defaults(func=cmd_brauer)

    ab = sub.add_parser("abelian", help="p-rank bound for a split abelian variety")
    ab.add_argument("--g", type=int, required=True)
    ab.add_argument("--e", type=int, required=True)
    ab.add_argument("--p", type=int, required=True)
    ab.set_defaults(func=cmd_abelian)

    k = sub.add_parser("kummer", help="transfer a gap to the Kummer variety")
    k.add_argument("--gap", type=int, required=True)
    k.add_argument("--p", type=int, required=True)
    k.set_defaults(func=cmd_kummer)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PrecisionExhausted as exc:
        print(f"precision error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (SolverError, NoRootError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except HypothesisError as exc:
        print(f"hypothesis error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TiltphiError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
