"""Command-line entry point.

Logs go to stderr.  On success a single ``RESULT key=value ...`` line goes
to stdout.  Exit status: 0 success, 1 domain or validation failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bounds
from .colorings import (
    Certificate,
    Coloring,
    assemble_certificate,
    block_of,
    longest_run,
    rabung_boundary_ok,
    rabung_coloring,
    read_certificate,
    write_certificate,
)
from .errors import DomainError, VdwError
from .numtheory import primitive_root
from .sweep import WorkUnit, format_result, merge_results, run_workunit
from .transforms import complete_certificate, product_certificate, xu_bound, zip_block
from .verifier import (
    ApWitness,
    brute_force_W,
    default_cap,
    find_mono_ap_cyclic,
    verify_certificate,
)

log = logging.getLogger("vdw")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def result(**fields) -> None:
    print("RESULT " + " ".join(f"{k}={v}" for k, v in fields.items()))


def _witness_text(w: ApWitness) -> str:
    return f"color={w.color} start={w.start} spacing={w.spacing} length={w.length}"


def _finish(cert: Certificate | ApWitness, out: str | None, **extra) -> int:
    if isinstance(cert, ApWitness):
        log.error("construction refuted by progression %s", _witness_text(cert))
        return 1
    if out:
        write_certificate(cert, out)
        log.info("wrote %s", out)
    result(bound=cert.bound, verified=cert.verified, n=cert.n, k=cert.k, r=cert.r, **extra)
    return 0


# ---------------------------------------------------------------- subcommands


def cmd_rabung(a) -> int:
    rho = a.root if a.root is not None else primitive_root(a.prime)
    block = rabung_coloring(a.prime, rho, a.colors)
    if (a.prime - 1) % a.colors:
        raise DomainError(f"--colors {a.colors} must divide p-1 = {a.prime - 1}")
    run, start = longest_run(block)
    if run >= a.k or not rabung_boundary_ok(block, a.k):
        log.error("shortcut rejects p=%d r=%d k=%d (longest run %d at %d)", a.prime, a.colors, a.k, run, start)
        return 1
    cert = assemble_certificate(block, a.k, provenance=f"p={a.prime} rho={rho}").with_status("shortcut")
    cap = a.cap if a.cap is not None else default_cap()
    if cert.n <= cap:
        cert = verify_certificate(cert, cap)
    else:
        log.info("length %d above cap %d: shortcut validation only", cert.n, cap)
    return _finish(cert, a.emit, p=a.prime, rho=rho, run=run)


def _zip_source(a) -> tuple[Coloring, int, int, int, str]:
    """(block, k, base prime, zips already applied, provenance) for the zip command."""
    if a.input:
        src = read_certificate(a.input)
        meta = src.meta()
        if "period" not in meta or "p" not in meta:
            raise DomainError("input certificate lacks period=/p= metadata; use --prime instead")
        period, p = int(meta["period"]), int(meta["p"])
        zips = int(meta.get("zips", 0))
        k = a.k or src.k
        return block_of(src, period, p), k, p, zips, f"p={p} rho={meta.get('rho', '?')}"
    if a.prime is None or a.colors is None or a.k is None:
        raise DomainError("zip needs --in FILE, or --prime, --colors and --k")
    rho = primitive_root(a.prime)
    return rabung_coloring(a.prime, rho, a.colors), a.k, a.prime, 0, f"p={a.prime} rho={rho}"


def cmd_zip(a) -> int:
    block, k, p, zips, prov = _zip_source(a)
    for _ in range(2 if a.twice else 1):
        block = zip_block(block)
        zips += 1
    cap = a.cap if a.cap is not None else default_cap()
    cert = complete_certificate(block, k, kind="zip", provenance=f"{prov} zips={zips}", cap=cap)
    return _finish(cert, a.out, p=p, zips=zips)


def _read_coloring(path: str | None, letters: str | None, **kw) -> Coloring:
    if letters:
        return Coloring.from_letters(letters, **kw)
    if path:
        c = read_certificate(path).coloring
        return Coloring(c.colors, c.r, **kw)
    raise DomainError("give either a file or a letter string")


def cmd_product(a) -> int:
    outer = _read_coloring(a.outer, a.outer_letters, topology="cyclic")
    inner = _read_coloring(a.inner, a.inner_letters)
    cert = product_certificate(outer, inner, a.k, permissive=a.permissive)
    cap = a.cap if a.cap is not None else default_cap()
    checked = verify_certificate(cert, cap) if cert.n <= cap else cert
    rec = xu_bound(len(outer), len(inner), a.k, outer.r, inner.r)
    return _finish(checked, a.out, formula=rec.bound)


def cmd_compose(a) -> int:
    if a.method != "blankenship":
        raise DomainError(f"unknown composition method {a.method!r}")
    value = bounds.bound_blankenship(a.p, a.inner_bound, a.k)
    inner_r = bounds.blankenship_inner_colors(a.colors, a.p)
    rec = bounds.BoundRecord(a.k, a.colors, value, f"{a.p}*W'({a.k},{inner_r})", "formula")
    result(bound=rec.bound, k=a.k, r=a.colors, inner_colors=inner_r)
    return 0


def cmd_verify(a) -> int:
    cert = read_certificate(a.cert)
    k = a.k or cert.k
    if a.cyclic:
        w = find_mono_ap_cyclic(cert.coloring.colors, k)
        if w is not None:
            log.error("cyclic progression found: %s", _witness_text(w))
            print("WITNESS " + _witness_text(w))
            return 1
        result(n=cert.n, k=k, r=cert.r, cyclic="free")
        return 0
    cert = Certificate(cert.coloring, k, cert.kind, cert.provenance)
    checked = verify_certificate(cert, a.cap)
    if isinstance(checked, ApWitness):
        print("WITNESS " + _witness_text(checked))
        return 1
    result(bound=checked.bound, verified=checked.verified, k=k, r=checked.r)
    return 0


def cmd_bruteforce(a) -> int:
    w = brute_force_W(a.k, a.colors, a.limit)
    if w is None:
        result(W="none", exceeds=a.limit, k=a.k, r=a.colors)
    else:
        result(W=w, k=a.k, r=a.colors)
    return 0


def cmd_sweep(a) -> int:
    unit = WorkUnit(a.lo, a.hi, tuple(a.colors), a.kmax, a.unit_id or "")
    res = run_workunit(unit, a.checkpoint, threads=a.threads)
    Path(a.out).write_text(format_result(res))
    log.info("%d primes in %.2fs", res.primes, res.elapsed)
    best = ",".join(f"W({k},{r})>{b}@{p}" for (k, r), (p, b) in sorted(res.best.items()))
    result(unit=res.unit_id, primes=res.primes, checksum=res.checksum, best=best or "none")
    return 0


def cmd_merge(a) -> int:
    table = merge_results(a.inputs)
    Path(a.out).write_text(bounds.emit_table(table, "tsv"))
    for warning in table.monotonicity_warnings():
        log.warning(warning)
    result(records=len(table), units=len(a.inputs))
    return 0


def cmd_bounds(a) -> int:
    fn = bounds.FORMULAS.get(a.formula)
    if fn is None:
        raise DomainError(f"unknown formula {a.formula!r}; choose from {', '.join(bounds.FORMULAS)}")
    try:
        value = fn(*a.args)
    except TypeError as exc:
        raise DomainError(f"wrong arguments for {a.formula}: {exc}") from None
    result(formula=a.formula, value=f"{value:.12g}" if isinstance(value, float) else value)
    return 0


def cmd_report(a) -> int:
    if a.table == "builtin":
        table = bounds.reference_table()
    else:
        table = bounds.parse_table(Path(a.table).read_text())
    print(bounds.emit_table(table, a.format), end="")
    fields = {"records": len(table)}
    if a.ratios:
        for r in sorted({r for _, r in table.records}):
            ratios = bounds.growth_ratios(table, r)
            if ratios:
                print(f"ratios r={r}: " + " ".join(f"{k}:{x:.4g}" for k, x in ratios))
    if a.soundness:
        bad = [c for c in bounds.soundness_chain() if not c.agrees]
        for c in bad:
            print(f"mismatch W({c.k},{c.r}) recipe {c.recipe}: {c.computed} vs published {c.published}")
        fields["recipe_mismatches"] = len(bad)
    result(**fields)
    return 0


# ---------------------------------------------------------------- parser


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    p = _Parser(prog="vdw", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    s = sub.add_parser("rabung", help="build and check a Rabung certificate")
    s.add_argument("--prime", type=int, required=True)
    s.add_argument("--root", type=int)
    s.add_argument("--colors", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--emit")
    s.add_argument("--cap", type=int)
    s.set_defaults(func=cmd_rabung)

    s = sub.add_parser("sweep", help="exhaustive Rabung sweep over a prime range")
    s.add_argument("--lo", type=int, required=True)
    s.add_argument("--hi", type=int, required=True)
    s.add_argument("--colors", type=_int_list, required=True)
    s.add_argument("--kmax", type=int, default=25)
    s.add_argument("--out", required=True)
    s.add_argument("--checkpoint")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--unit-id")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("zip", help="zip a Rabung block and complete the certificate")
    s.add_argument("--in", dest="input")
    s.add_argument("--prime", type=int)
    s.add_argument("--colors", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--twice", action="store_true")
    s.add_argument("--out")
    s.add_argument("--cap", type=int)
    s.set_defaults(func=cmd_zip)

    s = sub.add_parser("product", help="Xu product of a ring coloring and a certificate")
    s.add_argument("--outer")
    s.add_argument("--inner")
    s.add_argument("--outer-letters")
    s.add_argument("--inner-letters")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--permissive", action="store_true")
    s.add_argument("--out")
    s.add_argument("--cap", type=int)
    s.set_defaults(func=cmd_product)

    s = sub.add_parser("compose", help="compose bounds by a recurrence")
    s.add_argument("--method", required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--inner-bound", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--colors", type=int, required=True)
    s.set_defaults(func=cmd_compose)

    s = sub.add_parser("verify", help="check a certificate file directly")
    s.add_argument("--cert", required=True)
    s.add_argument("--k", type=int)
    s.add_argument("--cyclic", action="store_true")
    s.add_argument("--cap", type=int)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("bruteforce", help="exact W(k, r) by exhaustive search")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--colors", type=int, required=True)
    s.add_argument("--limit", type=int, required=True)
    s.set_defaults(func=cmd_bruteforce)

    s = sub.add_parser("merge", help="merge sweep result files into a bounds table")
    s.add_argument("--inputs", nargs="+", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_merge)

    s = sub.add_parser("bounds", help="evaluate a closed-form bound")
    s.add_argument("--formula", required=True)
    s.add_argument("--args", type=int, nargs="+", required=True)
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("report", help="render a bounds table")
    s.add_argument("--table", default="builtin")
    s.add_argument("--ratios", action="store_true")
    s.add_argument("--soundness", action="store_true")
    s.add_argument("--format", choices=("tsv", "markdown"), default="markdown")
    s.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if a.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return a.func(a)
    except VdwError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
