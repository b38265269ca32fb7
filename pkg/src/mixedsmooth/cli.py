"""Command-line front end.

Subcommands: ``verify-gnl``, ``check-embedding``, ``check-trace``,
``gallery``, ``norms``.  Exit codes: 0 PASS, 1 FAIL, 2 INCONCLUSIVE,
64 usage error, 74 I/O error.  Reports are deterministic for a fixed
config and seed; JSON output validates against the shipped schema before
being written.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

from ._parallel import run_tasks
from .counterexample import DEFAULT_RADII, counterexample_run
from .embedding import (
    check_holder_norm,
    check_p_to_1_limit,
    check_pointwise,
    check_trace,
)
from .errors import DomainError, EvalDomainError, ExprParseError
from .expr import free_arity, load_function_file, parse
from .gallery import GalleryFunction, embedding_gallery, gnl_gallery, random_boxes, resolve
from .geometry import IndexSubset, Rectangle, enumerate_subsets
from .gnl import gnl_verify
from .mollify import kernel_normalization, self_convergence
from .norms import PairSampler, c0_norm, holder_seminorm, lp_norm, s1p_norm, ws_norm
from .quadrature import DEFAULT_ORDER
from .report import (
    EXIT_IO,
    EXIT_USAGE,
    Entry,
    ReportEnvelope,
    counterexample_csv,
    entry_from_counterexample,
    entry_from_gnl,
    entry_from_inequality,
    entry_from_limit,
    entry_from_mollification,
    entry_from_norm,
    to_csv,
    to_human,
    to_json,
)

DEFAULT_EPSILONS = tuple(2.0 ** -k for k in range(3, 8))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 64, not argparse's default 2
        raise UsageError(message)


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"malformed number list {text!r}: {exc}") from None
    if not values:
        raise UsageError(f"empty number list {text!r}")
    return values


def build_parser() -> _Parser:
    parser = _Parser(prog="mixed-smooth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(p, with_function=True):
        if with_function:
            p.add_argument("--fn", help="gallery id (bump2d, ...) or inline expression")
            p.add_argument("--fn-file", help="path of a function file (optional 'arity: N' first line)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write the report to this path instead of stdout")
        p.add_argument("--format", choices=("json", "csv", "human"), default="human")

    g = sub.add_parser("verify-gnl", help="check the generalized identity on boxes")
    add_common(g)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--boxes", default="unit", help="'unit', 'random:K', or flat lo1,hi1,...")
    g.add_argument("--tol", type=float, default=1e-8)
    g.add_argument("--quad-tol", type=float, default=1e-10)
    g.add_argument("--order", type=int, default=DEFAULT_ORDER)
    g.add_argument("--max-level", type=int, default=6)

    e = sub.add_parser("check-embedding", help="pointwise and norm estimates")
    add_common(e)
    e.add_argument("--n", type=int, default=2)
    e.add_argument("--p", default="1,1.5,2,4", help="comma list of exponents >= 1")
    e.add_argument("--pairs", type=int, default=10000)
    e.add_argument("--box", help="support box as flat lo1,hi1,... (required for custom functions)")

    t = sub.add_parser("check-trace", help="trace inequality over all faces")
    add_common(t)
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--p", default="1,2,4")
    t.add_argument("--boxes", default="unit")
    t.add_argument("--quad-tol", type=float, default=1e-8)

    y = sub.add_parser("gallery", help="counterexample and mollification studies")
    add_common(y, with_function=False)
    y.add_argument("--radii", help="comma list of decreasing radii in (0, 1/2)")
    y.add_argument("--dim", type=int, choices=(1, 2), default=2)
    y.add_argument("--eps", help="comma list of mollification scales")

    m = sub.add_parser("norms", help="print requested norms with provenance")
    add_common(m)
    m.add_argument("--n", type=int)
    m.add_argument("--box", help="flat lo1,hi1,... (defaults to a gallery support box)")
    m.add_argument("--p", default="2")
    m.add_argument("--kinds", default="s1p", help="comma list from lp,s1p,ws,c0,holder")
    m.add_argument("--axis", type=int, default=1, help="axis for the ws norm")
    m.add_argument("--gamma", type=float, default=0.5, help="exponent for the holder seminorm")
    m.add_argument("--pairs", type=int, default=4096)

    return parser


def _load_function(args, n: int | None) -> tuple[GalleryFunction | None, str, int]:
    """Resolve --fn/--fn-file into (gallery member or None, text, arity)."""
    if getattr(args, "fn_file", None):
        text, declared = load_function_file(args.fn_file)
        arity = declared or n or free_arity(parse(text, 99))
        return None, text, arity
    if not getattr(args, "fn", None):
        raise UsageError("--fn or --fn-file is required")
    member = resolve(args.fn, n)
    if member is not None:
        return member, member.text, member.arity
    arity = n or free_arity(parse(args.fn, 99))
    return None, args.fn, arity


def _parse_fn(text: str, arity: int):
    try:
        return parse(text, arity)
    except ExprParseError as exc:
        raise UsageError(f"cannot parse function: {exc}") from None


def _boxes_from_spec(spec: str, n: int, seed: int) -> list[Rectangle]:
    if spec == "unit":
        return [Rectangle.unit(n)]
    if spec.startswith("random:"):
        try:
            count = int(spec.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"malformed box spec {spec!r}") from None
        return random_boxes(n, count, seed)
    flat = _float_list(spec)
    if len(flat) != 2 * n:
        raise UsageError(f"box spec needs {2 * n} numbers for n={n}, got {len(flat)}")
    try:
        return [Rectangle.from_flat(flat)]
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _write_output(envelope: ReportEnvelope, args, csv_override: str | None = None) -> None:
    if args.format == "json":
        payload = to_json(envelope)
    elif args.format == "csv":
        payload = csv_override if csv_override is not None else to_csv(envelope)
    else:
        payload = to_human(envelope)
    if args.out:
        try:
            Path(args.out).write_text(payload, encoding="utf-8")
        except OSError as exc:
            raise _IOFailure(str(exc)) from exc
    else:
        sys.stdout.write(payload)


class _IOFailure(Exception):
    pass


def cmd_verify_gnl(args) -> tuple[ReportEnvelope, str | None]:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    member, text, arity = _load_function(args, args.n)
    if arity > args.n:
        raise UsageError(f"function has arity {arity} but --n {args.n} was given")
    u = _parse_fn(text, args.n)
    boxes = _boxes_from_spec(args.boxes, args.n, args.seed)
    config = {
        "fn": text, "n": args.n, "boxes": args.boxes, "seed": args.seed,
        "tol": args.tol, "quad_tol": args.quad_tol, "order": args.order,
        "max_level": args.max_level,
    }
    rep = gnl_verify(
        u, boxes, args.tol, quad_tol=args.quad_tol,
        max_level=args.max_level, order=args.order,
    )
    env = ReportEnvelope(command="verify-gnl", config=config)
    env.entries.append(entry_from_gnl(rep, inputs={"fn": text, "n": args.n}))
    return env, None


def cmd_check_embedding(args) -> tuple[ReportEnvelope, str | None]:
    ps = _float_list(args.p)
    if any(p < 1.0 for p in ps):
        raise UsageError("p must be >= 1")
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.pairs < 1:
        raise UsageError("--pairs must be >= 1")
    sampler = PairSampler(count=args.pairs, seed=args.seed)
    if getattr(args, "fn", None) or getattr(args, "fn_file", None):
        member, text, arity = _load_function(args, args.n)
        if member is not None and member.support_box is not None:
            box = member.support_box
        elif args.box:
            box = Rectangle.from_flat(_float_list(args.box))
        else:
            raise UsageError("--box is required for functions without a support box")
        functions = [(text, _parse_fn(text, args.n), box)]
    else:
        functions = [
            (g.id, g.expr, g.support_box) for g in embedding_gallery(args.n)
        ]
    config = {
        "functions": [f[0] for f in functions], "n": args.n, "p": ps,
        "pairs": args.pairs, "seed": args.seed,
    }
    env = ReportEnvelope(command="check-embedding", config=config)

    def one(u, p, box):
        norm = s1p_norm(u, box, p)
        return (
            check_pointwise(u, p, sampler, box, norm=norm),
            check_holder_norm(u, p, box, sampler, norm=norm),
        )

    tasks = []
    labels = []
    for name, u, box in functions:
        for p in ps:
            tasks.append(lambda u=u, p=p, box=box: one(u, p, box))
            labels.append((name, p))
    results = run_tasks(tasks)
    for (name, p), (pw, hn) in zip(labels, results):
        env.entries.append(entry_from_inequality(pw, inputs={"fn": name}))
        env.entries.append(entry_from_inequality(hn, inputs={"fn": name}))
    limit = check_p_to_1_limit(args.n, 1.0, [1.5, 1.1, 1.01, 1.001, 1.0001])
    env.entries.append(entry_from_limit(limit))
    return env, None


def cmd_check_trace(args) -> tuple[ReportEnvelope, str | None]:
    if args.n < 2:
        raise UsageError(
            "trace checks need --n >= 2: a size-(n-1) face does not exist in one dimension"
        )
    ps = _float_list(args.p)
    if any(p < 1.0 for p in ps):
        raise UsageError("p must be >= 1")
    member, text, arity = _load_function(args, args.n)
    u = _parse_fn(text, args.n)
    boxes = _boxes_from_spec(args.boxes, args.n, args.seed)
    faces = [s for s in enumerate_subsets(args.n) if len(s) == args.n - 1]
    config = {
        "fn": text, "n": args.n, "p": ps, "boxes": args.boxes, "seed": args.seed,
        "quad_tol": args.quad_tol,
    }
    env = ReportEnvelope(command="check-trace", config=config)
    tasks = []
    meta = []
    for bi, P in enumerate(boxes):
        for face in faces:
            for p in ps:
                tasks.append(
                    lambda P=P, face=face, p=p: check_trace(
                        u, P, face, p, quad_tol=args.quad_tol
                    )
                )
                meta.append((bi, face, p))
    for (bi, face, p), rep in zip(meta, run_tasks(tasks)):
        env.entries.append(
            entry_from_inequality(rep, inputs={"fn": text, "box_index": bi})
        )
    return env, None


def cmd_gallery(args) -> tuple[ReportEnvelope, str | None]:
    radii = list(DEFAULT_RADII) if not args.radii else _float_list(args.radii)
    epsilons = list(DEFAULT_EPSILONS) if not args.eps else _float_list(args.eps)
    try:
        ce = counterexample_run(radii, dim=args.dim)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    config = {"radii": radii, "dim": args.dim, "eps": epsilons, "seed": args.seed}
    env = ReportEnvelope(command="gallery", config=config)
    env.entries.append(entry_from_counterexample(ce))
    if args.dim == 2:
        bump = resolve("bump2d")
        norm_c = kernel_normalization(2)
        study = self_convergence(
            bump.expr, Rectangle.cube(2, -2.5, 2.5), epsilons, 2
        )
        verdict = "PASS" if (study.orders and study.orders[-1] >= 1.8) else "FAIL"
        env.entries.append(
            entry_from_mollification(
                study, verdict, {"kernel_normalization_constant": norm_c}
            )
        )
    return env, counterexample_csv(ce)


def cmd_norms(args) -> tuple[ReportEnvelope, str | None]:
    ps = []
    for item in args.p.split(","):
        item = item.strip()
        if item in ("inf", "Inf", "INF"):
            ps.append(math.inf)
        elif item:
            try:
                ps.append(float(item))
            except ValueError:
                raise UsageError(f"malformed p value {item!r}") from None
    if not ps:
        raise UsageError("at least one p value is required")
    if any(p < 1.0 for p in ps):
        raise UsageError("p must be >= 1")
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    unknown = [k for k in kinds if k not in ("lp", "s1p", "ws", "c0", "holder")]
    if unknown:
        raise UsageError(f"unknown norm kinds: {', '.join(unknown)}")
    member, text, arity = _load_function(args, args.n)
    n = args.n or arity
    if n < 1:
        raise UsageError("could not infer the dimension; pass --n")
    u = _parse_fn(text, n)
    if args.box:
        flat = _float_list(args.box)
        if len(flat) != 2 * n:
            raise UsageError(f"box spec needs {2 * n} numbers for n={n}")
        box = Rectangle.from_flat(flat)
    elif member is not None and member.support_box is not None:
        box = member.support_box
    else:
        raise UsageError("--box is required for functions without a support box")
    config = {
        "fn": text, "n": n, "box": [v for pair in zip(box.lo, box.hi) for v in pair],
        "p": [repr(p) if math.isinf(p) else p for p in ps], "kinds": kinds,
        "axis": args.axis, "gamma": args.gamma, "pairs": args.pairs, "seed": args.seed,
    }
    env = ReportEnvelope(command="norms", config=config)
    sampler = PairSampler(count=args.pairs, seed=args.seed)
    for p in ps:
        for kind in kinds:
            if kind == "lp":
                env.entries.append(entry_from_norm(lp_norm(u, box, p), "norm_lp"))
            elif kind == "s1p":
                env.entries.append(entry_from_norm(s1p_norm(u, box, p), "norm_s1p"))
            elif kind == "ws":
                env.entries.append(
                    entry_from_norm(ws_norm(u, box, args.axis, p), "norm_ws")
                )
            elif kind == "c0":
                env.entries.append(entry_from_norm(c0_norm(u, box), "norm_c0"))
            elif kind == "holder":
                env.entries.append(
                    entry_from_norm(
                        holder_seminorm(u, box, args.gamma, sampler), "norm_holder_semi"
                    )
                )
    return env, None


_COMMANDS = {
    "verify-gnl": cmd_verify_gnl,
    "check-embedding": cmd_check_embedding,
    "check-trace": cmd_check_trace,
    "gallery": cmd_gallery,
    "norms": cmd_norms,
}


def main(argv=None) -> int:
    parser = build_parser()
    started = time.perf_counter()
    try:
        args = parser.parse_args(argv)
        envelope, csv_override = _COMMANDS[args.command](args)
        envelope.wall_time_s = time.perf_counter() - started
        _write_output(envelope, args, csv_override)
        return envelope.exit_code
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ExprParseError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _IOFailure as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FileNotFoundError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
