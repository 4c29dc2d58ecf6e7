"""Command-line front end.

Commands: order, structure, construct, verify, witness, bounds, scan.
Rationals in files and flags are written num/den, points as `x,y` or `inf`,
comments start with `#`.  Heights print as certified [lo,hi] intervals with
12 significant digits; identical configurations produce byte-identical
output.  Exit codes: 0 success (including "witness: none"), 1 domain errors,
2 parse errors.
"""

import argparse
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import bounds as bounds_mod
from . import ec_finite as ecf
from . import ec_rational as ecq
from . import heights, pseudolin, reduction
from .errors import ECPseudolinError, ParseError
from .nt import sieve_primes


def _fmt(v):
    return format(float(v), ".12g")


def _fmt_interval(iv):
    return f"[{_fmt(iv.lo)},{_fmt(iv.hi)}]"


def _fmt_point(p):
    if p.is_infinity:
        return "inf"
    def frac(f):
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
    return f"{frac(p.x)},{frac(p.y)}"


# ---------------------------------------------------------------------------
# Parsers


def parse_curve_spec(text):
    parts = text.split()
    if len(parts) != 5:
        raise ParseError(f"curve spec needs 5 integers, got {text!r}")
    try:
        coeffs = [int(t) for t in parts]
    except ValueError as exc:
        raise ParseError(f"bad curve coefficient in {text!r}") from exc
    return ecq.parse_curve(*coeffs)


def parse_point_spec(text):
    text = text.strip()
    if text == "inf":
        return ecq.INFINITY
    parts = text.split(",")
    if len(parts) != 2:
        raise ParseError(f"point must be `x,y` or `inf`, got {text!r}")
    try:
        x, y = (Fraction(t.strip()) for t in parts)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational in point {text!r}") from exc
    return ecq.PointQ(x, y)


def _content_lines(path):
    try:
        with open(path) as fh:
            raw = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    for line in raw.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield line


def load_subgroup(path, curve):
    """Subgroup file: optional `curve a1 a2 a3 a4 a6` line, then one line per
    generator: `free x,y` or `torsion x,y`."""
    free, torsion = [], []
    for line in _content_lines(path):
        tag, _, rest = line.partition(" ")
        if tag == "curve":
            file_curve = parse_curve_spec(rest)
            if file_curve != curve:
                raise ParseError(
                    f"subgroup file curve {file_curve} does not match --curve"
                )
        elif tag == "free":
            free.append(parse_point_spec(rest))
        elif tag == "torsion":
            torsion.append(parse_point_spec(rest))
        else:
            raise ParseError(f"unknown subgroup line tag {tag!r}")
    try:
        return reduction.make_subgroup(curve, free, torsion)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def load_basis(path):
    """Basis file: one point per line."""
    pts = [parse_point_spec(line) for line in _content_lines(path)]
    if not pts:
        raise ParseError(f"basis file {path} contains no points")
    return pts


def parse_grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise ParseError(f"grid must be a:b:step, got {text!r}")
    try:
        a, b, step = (float(t) for t in parts)
    except ValueError as exc:
        raise ParseError(f"bad grid number in {text!r}") from exc
    if step <= 0 or b < a:
        raise ParseError("grid needs a <= b and step > 0")
    out = []
    v = a
    while v <= b + 1e-9:
        out.append(round(v, 9))
        v += step
    return out


# ---------------------------------------------------------------------------
# Job configuration and dispatch


@dataclass
class JobConfig:
    command: str
    curve: object
    gamma: object
    basis: object
    xs: list
    eps: float
    coeff_bound: int
    pmax: int
    out: object
    fmt: str
    point: object


def _build_config(args):
    curve = parse_curve_spec(args.curve)
    gamma = None
    if getattr(args, "gamma", None) is not None:
        if args.gamma == "trivial":
            gamma = reduction.trivial_subgroup(curve)
        else:
            gamma = load_subgroup(args.gamma, curve)
    basis = load_basis(args.basis) if getattr(args, "basis", None) else None
    xs = []
    if getattr(args, "x", None) is not None:
        xs = [args.x]
    if getattr(args, "grid", None) is not None:
        xs = parse_grid(args.grid)
    if getattr(args, "x", None) is not None and args.x < 2:
        raise ParseError("--x must be at least 2")
    eps = getattr(args, "eps", heights.DEFAULT_EPS)
    if eps is not None and eps <= 0:
        raise ParseError("--eps must be positive")
    coeff_bound = getattr(args, "coeff_bound", 3)
    if coeff_bound is not None and coeff_bound < 1:
        raise ParseError("--coeff-bound must be at least 1")
    point = None
    if getattr(args, "point", None):
        point = parse_point_spec(args.point)
    return JobConfig(
        command=args.command,
        curve=curve,
        gamma=gamma,
        basis=basis,
        xs=xs,
        eps=eps if eps is not None else heights.DEFAULT_EPS,
        coeff_bound=coeff_bound if coeff_bound is not None else 3,
        pmax=getattr(args, "pmax", 10_000) or 10_000,
        out=getattr(args, "out", None),
        fmt=getattr(args, "format", "text") or "text",
        point=point,
    )


def _cmd_order(cfg, emit):
    if not cfg.xs:
        raise ParseError("order needs --x or --grid")
    limit = int(max(cfg.xs))
    rows = []
    for p in sieve_primes(limit):
        if not ecq.is_good_reduction(cfg.curve, p):
            continue
        rows.append((p, ecf.group_order(ecf.reduce_curve(cfg.curve, p)).n))
    if cfg.fmt == "csv":
        emit("p,N_p")
        for p, n in rows:
            emit(f"{p},{n}")
    else:
        for p, n in rows:
            emit(f"p={p} N_p={n}")


def _cmd_structure(cfg, emit):
    if not cfg.xs:
        raise ParseError("structure needs --x or --grid")
    limit = int(max(cfg.xs))
    rows = []
    for p in sieve_primes(limit):
        if not ecq.is_good_reduction(cfg.curve, p):
            continue
        cp = ecf.reduce_curve(cfg.curve, p)
        order = ecf.group_order(cp)
        st = ecf.group_structure(cp, order)
        rows.append((p, order.n, st.d1, st.d2))
    if cfg.fmt == "csv":
        emit("p,N_p,d1,d2")
        for p, n, d1, d2 in rows:
            emit(f"{p},{n},{d1},{d2}")
    else:
        for p, n, d1, d2 in rows:
            emit(f"p={p} N_p={n} structure=Z/{d1} x Z/{d2}")


def _require_construct_inputs(cfg):
    if cfg.gamma is None:
        raise ParseError("this command needs --gamma FILE|trivial")
    if cfg.basis is None:
        raise ParseError("this command needs --basis FILE")
    if not cfg.xs:
        raise ParseError("this command needs --x or --grid")


def _cmd_construct(cfg, emit):
    _require_construct_inputs(cfg)
    witness = pseudolin.construct_qmin(
        cfg.curve, cfg.gamma, cfg.xs[0], cfg.basis,
        coeff_bound=cfg.coeff_bound, eps=cfg.eps,
    )
    emit(f"R_min={_fmt_point(witness.r_min)}")
    emit(f"L_x={witness.l_x.value}")
    emit(f"rmin_height={_fmt_interval(witness.rmin_height)}")
    emit(f"log_qmin_height={_fmt_interval(witness.log_qmin_height)}")
    emit(f"symbolic={'yes' if witness.symbolic else 'no'}")


def _cmd_verify(cfg, emit):
    if cfg.gamma is None:
        raise ParseError("verify needs --gamma FILE|trivial")
    if not cfg.xs:
        raise ParseError("verify needs --x")
    x = cfg.xs[0]
    if cfg.point is not None:
        target = cfg.point
    else:
        _require_construct_inputs(cfg)
        target = pseudolin.construct_qmin(
            cfg.curve, cfg.gamma, x, cfg.basis,
            coeff_bound=cfg.coeff_bound, eps=cfg.eps,
        )
    report = pseudolin.verify_pseudolinear(cfg.curve, cfg.gamma, target, x, cfg.eps)
    if cfg.fmt == "csv":
        emit("p,N_p,T_p,member")
        for p, n, t, member in report.rows:
            emit(f"{p},{n},{t},{'yes' if member else 'no'}")
    else:
        for p, n, t, member in report.rows:
            emit(f"p={p} N_p={n} T_p={t} member={'yes' if member else 'no'}")
    emit(f"result={'pass' if report.passed else 'fail'} reason={report.reason}")


def _cmd_witness(cfg, emit):
    if cfg.gamma is None:
        raise ParseError("witness needs --gamma FILE|trivial")
    if cfg.point is None:
        raise ParseError("witness needs a POINT argument")
    search = pseudolin.find_witness_prime(cfg.curve, cfg.gamma, cfg.point, cfg.pmax)
    if search.prime is None:
        emit(f"witness: none <= {cfg.pmax}")
    else:
        emit(f"witness: {search.prime}")
    emit(f"scanned: {len(search.transcript)} good primes")


def _cmd_bounds(cfg, emit):
    _require_construct_inputs(cfg)
    report = bounds_mod.compare_report(
        cfg.curve, cfg.gamma, cfg.basis, cfg.xs,
        coeff_bound=cfg.coeff_bound, eps=cfg.eps,
    )
    for line in report.to_csv().splitlines():
        emit(line)
    if cfg.fmt == "text":
        for note in report.notes:
            emit(f"# {note}")


def _cmd_scan(cfg, emit):
    _require_construct_inputs(cfg)
    if cfg.fmt == "csv":
        emit("x,log_lx,log_qmin_lo,log_qmin_hi,verified")
    for x in sorted(cfg.xs):
        witness = pseudolin.construct_qmin(
            cfg.curve, cfg.gamma, x, cfg.basis,
            coeff_bound=cfg.coeff_bound, eps=cfg.eps,
        )
        report = pseudolin.verify_pseudolinear(cfg.curve, cfg.gamma, witness, x, cfg.eps)
        ok = "yes" if report.passed else "no"
        log_lx = witness.l_x.log_value.mid
        iv = witness.log_qmin_height
        if cfg.fmt == "csv":
            emit(f"{_fmt(x)},{_fmt(log_lx)},{_fmt(iv.lo)},{_fmt(iv.hi)},{ok}")
        else:
            emit(
                f"x={_fmt(x)} log_L={_fmt(log_lx)} "
                f"log_h_qmin={_fmt_interval(iv)} verified={ok}"
            )


_COMMANDS = {
    "order": _cmd_order,
    "structure": _cmd_structure,
    "construct": _cmd_construct,
    "verify": _cmd_verify,
    "witness": _cmd_witness,
    "bounds": _cmd_bounds,
    "scan": _cmd_scan,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ecpseudolin",
        description="pseudolinear dependence constructions on elliptic curves over Q",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--curve", required=True, help="a1 a2 a3 a4 a6")
        p.add_argument("--gamma", help="subgroup file or `trivial`")
        p.add_argument("--basis", help="file with one basis point per line")
        p.add_argument("--x", type=float)
        p.add_argument("--grid", help="a:b:step")
        p.add_argument("--eps", type=float, default=None)
        p.add_argument("--coeff-bound", dest="coeff_bound", type=int, default=None)
        p.add_argument("--pmax", type=int, default=None)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "text"), default="text")
        if name in ("verify", "witness"):
            p.add_argument("point", nargs="?", default=None)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    lines = []
    try:
        cfg = _build_config(args)
        _COMMANDS[cfg.command](cfg, lines.append)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ECPseudolinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = "\n".join(lines) + ("\n" if lines else "")
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def console_main():
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
