"""Command-line front end.

Exit status: 0 when every check passes, 1 on a verification failure, 2 on
usage or parse errors.  Input paths may name a shipped payload as ``@name``
(for example ``@journe_m`` or ``@journe_rank2``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import gallery
from .circle import ParseError, StepFunction, format_rational
from .diagnostics import (
    TAU_RANK,
    RealLineGrid,
    generators_from_product,
    gram_multiplicity,
    martingale_report,
    purity_test,
    scaling_product,
)
from .filterbank import (
    DEFAULT_TOL,
    DepthTooLarge,
    FilterMatrix,
    InsufficientDimensions,
    RankOutOfWindow,
    check_lowpass,
    synthesize,
    verify_filter_equation,
    verify_row_support,
    verify_superfilter,
    verify_support,
)
from .hilbert import (
    ModulatedStepVector,
    OperatorContext,
    apply_rho,
    apply_S_power,
    apply_S_star_power,
)
from .limit import LimitVector, check_gmra_axioms
from .multiplicity import (
    ConsistencyViolation,
    MultiplicityFunction,
    check_consistency_identity,
    check_consistency_inequality,
    complement,
    rank_window,
    support_sets,
)


class UsageError(Exception):
    pass


class Failure(Exception):
    """Verification failed; carries the report to print."""


# io -------------------------------------------------------------------------


def _load_json(path: str):
    if path.startswith("@"):
        try:
            return gallery.raw(path[1:])
        except FileNotFoundError:
            raise UsageError(f"no shipped payload named {path[1:]!r}") from None
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg} (line {exc.lineno})", "", path) from None


def _parse(path: str, loader):
    doc = _load_json(path)
    if isinstance(doc, dict):
        doc = {k: v for k, v in doc.items() if k != "name"}
    try:
        return loader(doc)
    except ParseError as exc:
        raise ParseError(exc.message, exc.pointer, path) from None
    except (ValueError, TypeError) as exc:
        raise ParseError(str(exc), "", path) from None


def load_multiplicity(path: str) -> MultiplicityFunction:
    return _parse(path, MultiplicityFunction.from_json)


def load_filter(path: str, m_path: str | None = None) -> FilterMatrix:
    m = load_multiplicity(m_path) if m_path else None
    return _parse(path, lambda d: FilterMatrix.from_json(d, m))


def load_vector(path: str, c: int | None = None) -> ModulatedStepVector:
    return _parse(path, lambda d: ModulatedStepVector.from_json(d, c))


def _emit(args, text: str, doc) -> None:
    if args.json:
        out = json.dumps(doc, indent=2, sort_keys=True)
    else:
        out = text
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True)


def _fmt_cells(cells) -> str:
    return " U ".join(f"[{lo}, {hi})" for lo, hi in cells) or "(empty)"


def _steps_table(f: StepFunction) -> str:
    return "\n".join(f"  [{lo}, {hi}): {v}" for (lo, hi), v in zip(f.partition.cells(), f.values))


# subcommands ----------------------------------------------------------------


def cmd_check(args) -> int:
    m = load_multiplicity(args.input)
    ineq = check_consistency_inequality(m)
    doc = {"inequality": ineq.to_json()}
    lines = [f"consistency inequality: {'holds' if ineq.holds else 'VIOLATED'}"]
    for lo, hi, a, b in ineq.violations:
        lines.append(f"  [{lo}, {hi}): m = {a} > fiber sum {b}")
    if ineq.holds:
        mt = complement(m)
        ident = check_consistency_identity(m, mt)
        doc["identity"] = ident.to_json()
        doc["complement"] = mt.to_json()
        lines.append(f"consistency identity with computed complement: "
                     f"{'holds' if ident.holds else 'FAILS'}")
        lines.append("complement:")
        lines.append(_steps_table(mt.m))
    _emit(args, "\n".join(lines), doc)
    return 0 if ineq.holds and doc["identity"]["holds"] else 1


def cmd_complement(args) -> int:
    m = load_multiplicity(args.input)
    mt = complement(m)
    if args.json or args.output:
        args.json = True
        _emit(args, "", mt.to_json())
    else:
        print("complement:\n" + _steps_table(mt.m))
    return 0


def cmd_rank_window(args) -> int:
    m = load_multiplicity(args.input)
    w = rank_window(m)
    text = (f"rank window: {w.ranks if not w.empty else 'EMPTY'}"
            f"  (m(0) = {w.m0}, complement(0) = {w.mt0}, radius {w.radius})")
    if w.reason:
        text += f"\n  {w.reason}"
    _emit(args, text, w.to_json())
    return 1 if w.empty else 0


def _verify(F: FilterMatrix, args, lowpass: int | None, depth: int) -> tuple[bool, str, dict]:
    tol = args.tol
    sup = verify_support(F)
    row = verify_row_support(F)
    eq = verify_filter_equation(F, tol)
    doc = {"support": sup.to_json(), "row_support": row.to_json(), "filter_equation": eq.to_json()}
    lines = [
        f"support (h_ij = 0 off sigma_j): {'pass' if sup.passed else 'FAIL'}",
        *[f"  h_{i}{j} nonzero on [{lo}, {hi})" for i, j, lo, hi in sup.failures[:20]],
        f"filter equation: {'pass' if eq.passed else 'FAIL'}  max deviation {eq.max_deviation:.3e}",
        *[f"  [{lo}, {hi}) entry ({i},{k}) off by {d:.3e}" for lo, hi, i, k, d in eq.failures[:20]],
        f"row support (h_ij != 0 => N zeta in sigma_i): {'pass' if row.passed else 'FAIL'}",
    ]
    ok = sup.passed and eq.passed and row.passed
    for n in range(2, depth + 1):
        r = verify_superfilter(F, n, tol)
        doc[f"superfilter_{n}"] = r.to_json()
        lines.append(f"superfilter n={n}: {'pass' if r.passed else 'FAIL'}  "
                     f"max deviation {r.max_deviation:.3e}")
        ok &= r.passed
    if lowpass is not None:
        cert = check_lowpass(F, lowpass, tol)
        doc["lowpass"] = cert.to_json()
        lines.append(f"low-pass rank {lowpass}: {'pass' if cert.valid else 'FAIL'}  "
                     f"radius {cert.radius}" + (f"  ({cert.reason})" if cert.reason else ""))
        ok &= cert.valid
    return ok, "\n".join(lines), doc


def cmd_synth(args) -> int:
    m = load_multiplicity(args.input)
    try:
        F = synthesize(m, args.rank)
    except RankOutOfWindow as exc:
        raise Failure(f"RankOutOfWindow: {exc}") from None
    ok, text, doc = _verify(F, args, args.rank, 1)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(_dump(F.to_json()) + "\n")
    if args.json:
        print(_dump({"filter": F.to_json(), "verification": doc}))
    else:
        print(f"synthesized rank-{args.rank} filter ({len(F.H.partition)} cells)")
        print(text)
    return 0 if ok else 1


def cmd_verify(args) -> int:
    F = load_filter(args.input, args.m)
    ok, text, doc = _verify(F, args, args.lowpass, args.superfilter_depth)
    _emit(args, text, {**doc, "passed": ok})
    return 0 if ok else 1


def _context(args) -> OperatorContext:
    F = load_filter(args.filter, getattr(args, "m", None))
    try:
        return OperatorContext(F, args.tol)
    except ValueError as exc:
        raise Failure(str(exc)) from None


def cmd_apply(args) -> int:
    ctx = _context(args)
    f = load_vector(args.vector, ctx.c)
    if args.op == "S":
        g = apply_S_power(ctx, f, args.power)
    elif args.op == "S*":
        g = apply_S_star_power(ctx, f, args.power)
    else:
        g = f
        for _ in range(args.power):
            g = apply_rho(args.gamma, g)
    doc = g.to_json()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(_dump(doc) + "\n")
    else:
        print(_dump(doc))
    return 0


def _default_vectors(ctx: OperatorContext) -> list[ModulatedStepVector]:
    from .hilbert import random_vector
    rng = np.random.default_rng(0)
    return [random_vector(ctx.F.m, rng) for _ in range(5)]


def cmd_purity(args) -> int:
    ctx = _context(args)
    vectors = [load_vector(p, ctx.c) for p in args.vector] or _default_vectors(ctx)
    rows, docs = [], []
    for k, f in enumerate(vectors):
        r = purity_test(ctx, f, args.max_n)
        docs.append(r.to_json())
        rows.append(f"vector {k}: min p_n = {r.minimum:.3e}  monotone: {r.monotone()}  "
                    f"p_n: " + " ".join(f"{p:.3g}" for p in r.norms[:: max(1, args.max_n // 8)]))
    _emit(args, "\n".join(rows), {"vectors": docs})
    return 0


def cmd_martingale(args) -> int:
    f = load_vector(args.vector)
    if len(f.terms) > 1:
        raise UsageError("martingale needs a single-frequency vector")
    r = martingale_report(f, args.N, args.max_n)
    lines = [f"target ||f||^2 = {r.target:.12g}; straddle constant C = {r.constant:.6g}"]
    lines += [f"  n={n + 1:2d}  max |X_n - ||f||^2| = {d:.3e}   bound C N^-n = {b:.3e}"
              for n, (d, b) in enumerate(zip(r.deviations, r.bounds))]
    _emit(args, "\n".join(lines), r.to_json())
    return 0 if r.within_bound else 1


def _grid(args) -> RealLineGrid:
    try:
        return RealLineGrid(Fraction(args.xmax), Fraction(args.grid))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad grid: {exc}") from None


def _scaling_csv(prod: RealLineGrid) -> str:
    c = prod.samples.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x"] + [f"{part}_{i + 1}{j + 1}" for i in range(c) for j in range(c)
                        for part in ("re", "im")])
    for k, s in zip(prod.indices(), prod.samples):
        x = format_rational(k * prod.step)
        w.writerow([x] + [repr(float(getattr(v, part))) for v in s.ravel()
                          for part in ("real", "imag")])
    return buf.getvalue()


def cmd_scaling(args) -> int:
    F = load_filter(args.filter, args.m)
    prod = scaling_product(F, args.depth, _grid(args), args.rank)
    text = _scaling_csv(prod)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _read_scaling_csv(path: str) -> RealLineGrid:
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = (len(header) - 1) // 2
    c = int(round(cols ** 0.5))
    xs = [Fraction(r[0]) for r in body]
    step = xs[1] - xs[0]
    vals = np.array([[complex(float(r[1 + 2 * k]), float(r[2 + 2 * k])) for k in range(cols)]
                     for r in body]).reshape(len(body), c, c)
    return RealLineGrid(xs[-1], step, vals)


def cmd_gram(args) -> int:
    if args.input.endswith(".csv"):
        prod = _read_scaling_csv(args.input)
    else:
        F = load_filter(args.input, args.m)
        prod = scaling_product(F, args.depth, _grid(args), args.rank)
    rep = gram_multiplicity(generators_from_product(prod), args.ktrunc, args.tau_rank)
    text = "\n".join(f"  [{lo}, {hi}): {r}" for lo, hi, r in rep.runs)
    _emit(args, "shift-invariant multiplicity (grid runs):\n" + text, rep.to_json())
    return 0


def cmd_gmra_axioms(args) -> int:
    ctx = _context(args)
    vectors = None
    if args.vectors:
        vectors = [LimitVector(k % (args.levels + 1), load_vector(p, ctx.c))
                   for k, p in enumerate(args.vectors)]
    rep = check_gmra_axioms(ctx, vectors, args.levels, args.tol)
    _emit(args, rep.table(), rep.to_json())
    return 0 if rep.all_passed else 1


# demos ----------------------------------------------------------------------


def demo_journe_m(args) -> tuple[bool, str]:
    m = gallery.journe_m()
    ineq = check_consistency_inequality(m)
    mt = complement(m)
    w = rank_window(m)
    lines = ["Journe multiplicity function (N = 2):", _steps_table(m.m),
             f"consistency inequality: {'holds' if ineq.holds else 'VIOLATED'}",
             "complement:", _steps_table(mt.m),
             f"rank window: {w.ranks}"]
    for i, cells in enumerate(support_sets(m), 1):
        lines.append(f"sigma_{i} = {_fmt_cells(cells)}")
    return ineq.holds and w.ranks == [1, 2], "\n".join(lines)


def _demo_filter(F: FilterMatrix, rank: int, args, depth: int = 3) -> tuple[bool, str]:
    ok, text, _ = _verify(F, args, rank, depth)
    return ok, text


def demo_journe_rank2(args) -> tuple[bool, str]:
    F = gallery.journe_rank2()
    lines = ["Journe rank-2 filter:"]
    for i in range(1, 3):
        for j in range(1, 3):
            lines.append(f" h_{i}{j}:\n" + _steps_table(F.entry(i, j)))
    ok, text = _demo_filter(F, 2, args)
    return ok, "\n".join(lines) + "\n" + text


def demo_journe_scaling(args) -> tuple[bool, str]:
    from .diagnostics import near_breakpoints, real_indicator
    F = gallery.journe_rank2()
    grid = RealLineGrid(8, Fraction(1, 2240))
    prod = scaling_product(F, 25, grid)
    x = grid.points()
    phi1 = [(Fraction(-4, 7), Fraction(-1, 2)), (Fraction(-2, 7), Fraction(2, 7)),
            (Fraction(1, 2), Fraction(4, 7))]
    phi2 = [(Fraction(-1, 7), Fraction(1, 7))]
    mask = near_breakpoints(grid.exact(), [b for iv in phi1 + phi2 for b in iv], grid.step)
    s = prod.samples
    bad1 = int(np.sum((np.abs(s[:, 0, 0] - real_indicator(phi1, x)) > 1e-12) & ~mask))
    bad2 = int(np.sum((np.abs(s[:, 1, 1] - real_indicator(phi2, x)) > 1e-12) & ~mask))
    off = float(np.abs(s[:, 0, 1]).max() + np.abs(s[:, 1, 0]).max())
    rep = gram_multiplicity(generators_from_product(prod), 8, args.tau_rank)
    lines = [f"truncated product, depth 25, step 1/2240, |x| <= 8: {grid.count} points",
             f"phi_1 mismatches away from breakpoints: {bad1}",
             f"phi_2 mismatches away from breakpoints: {bad2}",
             f"largest off-diagonal entry: {off:.3g}",
             "shift-invariant multiplicity m':"]
    lines += [f"  [{lo}, {hi}): {r}" for lo, hi, r in rep.runs]
    return bad1 == 0 and bad2 == 0 and off == 0.0, "\n".join(lines)


def demo_n2_family(args) -> tuple[bool, str]:
    m = gallery.example2_m()
    mt = complement(m)
    w = rank_window(m)
    lines = ["second family, n = 2 (c = 3):", _steps_table(m.m),
             "complement:", _steps_table(mt.m), f"rank window: {w.ranks}"]
    ok = w.ranks == [2, 3]
    for name, F in gallery.example2_filters().items():
        rank = gallery.STATED_RANKS[name]
        passed, text = _demo_filter(F, rank, args)
        lines += [f"-- {name} (stated rank {rank}): {'pass' if passed else 'FAIL'}", text]
        ok &= passed
    passed, text = _demo_filter(gallery.filter_matrix("example2_rank2b_fixed"), 2, args)
    lines += [f"-- example2_rank2b with h31 on +-[7/15, 1/2): {'pass' if passed else 'FAIL'}",
              text]
    for a in w.ranks:
        passed, text = _demo_filter(synthesize(m, a), a, args)
        lines += [f"-- synthesized rank {a}: {'pass' if passed else 'FAIL'}", text]
        ok &= passed
    return ok, "\n".join(lines)


def demo_haar(args) -> tuple[bool, str]:
    F = gallery.haar()
    ok, text = _demo_filter(F, 1, args)
    ctx = OperatorContext(F)
    one = ModulatedStepVector.single(1, StepFunction.constant([1 + 0j]))
    r = purity_test(ctx, one, 16)
    lines = ["low-pass filter sqrt(2) chi_[-1/4,1/4) for m = 1:", text,
             "purity p_n for f = e^{2 pi i x}: " + " ".join(f"{p:.3g}" for p in r.norms)]
    return ok and r.monotone(), "\n".join(lines)


DEMOS = {"journe-m": demo_journe_m, "journe-rank2": demo_journe_rank2,
         "journe-scaling": demo_journe_scaling, "n2-family": demo_n2_family, "haar": demo_haar}


def cmd_demo(args) -> int:
    ok, text = DEMOS[args.name](args)
    _emit(args, text, {"demo": args.name, "passed": ok, "report": text.splitlines()})
    return 0 if ok else 1


# parser ---------------------------------------------------------------------


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL,
                        help="value tolerance (default 1e-12)")
    common.add_argument("--tau-rank", type=_positive_float, default=TAU_RANK)
    common.add_argument("-o", "--output", help="write the result here instead of stdout")

    p = argparse.ArgumentParser(prog="gmra", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="consistency inequality and identity")
    s.add_argument("input")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("complement", parents=[common], help="complementary multiplicity")
    s.add_argument("input")
    s.set_defaults(func=cmd_complement)

    s = sub.add_parser("rank-window", parents=[common], help="admissible low-pass ranks")
    s.add_argument("input")
    s.set_defaults(func=cmd_rank_window)

    s = sub.add_parser("synth", parents=[common], help="synthesize a low-pass filter")
    s.add_argument("input")
    s.add_argument("--rank", type=int, required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("verify", parents=[common], help="verify a filter")
    s.add_argument("input")
    s.add_argument("--m", help="multiplicity JSON (overrides the filter's own)")
    s.add_argument("--superfilter-depth", type=int, default=1)
    s.add_argument("--lowpass", type=int)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("apply", parents=[common], help="apply S, S* or rho to a vector")
    s.add_argument("filter")
    s.add_argument("vector")
    s.add_argument("op", choices=["S", "S*", "rho"])
    s.add_argument("--power", type=int, default=1)
    s.add_argument("--gamma", type=int, default=1)
    s.add_argument("--m")
    s.set_defaults(func=cmd_apply)

    s = sub.add_parser("purity", parents=[common], help="decay of ||S^n S*^n f||")
    s.add_argument("filter")
    s.add_argument("--vector", action="append", default=[])
    s.add_argument("--max-n", type=int, default=64)
    s.add_argument("--m")
    s.set_defaults(func=cmd_purity)

    s = sub.add_parser("martingale", parents=[common], help="kernel averages X_n")
    s.add_argument("vector")
    s.add_argument("--N", type=int, default=2)
    s.add_argument("--max-n", type=int, default=12)
    s.set_defaults(func=cmd_martingale)

    for name, func, help_ in (("scaling", cmd_scaling, "truncated infinite product as CSV"),
                              ("gram", cmd_gram, "Gram-matrix multiplicity of the product")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("filter" if name == "scaling" else "input")
        s.add_argument("--m")
        s.add_argument("--depth", type=int, default=25)
        s.add_argument("--grid", default="1/2240")
        s.add_argument("--xmax", default="8")
        s.add_argument("--rank", type=int)
        if name == "gram":
            s.add_argument("--ktrunc", type=int, default=8)
        s.set_defaults(func=func)

    s = sub.add_parser("gmra-axioms", parents=[common], help="desk-scale GMRA axiom checks")
    s.add_argument("filter")
    s.add_argument("--vectors", nargs="*")
    s.add_argument("--levels", type=int, default=3)
    s.add_argument("--m")
    s.set_defaults(func=cmd_gmra_axioms, tol=1e-10)

    s = sub.add_parser("demo", parents=[common], help="reproduce the worked examples")
    s.add_argument("name", choices=sorted(DEMOS))
    s.set_defaults(func=cmd_demo)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ParseError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (Failure, ConsistencyViolation, DepthTooLarge, InsufficientDimensions) as exc:
        print(f"{type(exc).__name__}: {exc}" if not isinstance(exc, Failure) else str(exc))
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
