"""Command-line entry point: `cobarforge <subcommand> ...`."""
from __future__ import annotations

import argparse
import json
import sys
from typing import Callable, List, Optional, Tuple

from . import __version__, cobar, may, verify
from .cache import Cache, fingerprint
from .conventions import ConventionGap, ConventionTable, load
from .homology_ops import cup_k, e_op, q_op
from .milnor import STABLE, UNSTABLE, coproduct, format_mono, format_poly, parse_poly, term_key_last_first

OK, FAIL, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _parse(fn: Callable, text: str, production: str, *args):
    try:
        return fn(text, *args)
    except ValueError as e:
        raise UsageError(f"cannot parse {text!r} as {production}: {e}") from None


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _conventions_section(conv: ConventionTable) -> str:
    return f"conventions: {conv.name} {conv.hash}\n{json.dumps(conv.as_dict(), sort_keys=True)}\n"


def format_tensor_display(t) -> str:
    """Terms ordered by the last factor, as the coproduct formula is usually written."""
    terms = sorted(t, key=term_key_last_first)
    return " + ".join(" ⊗ ".join(format_mono(m) for m in term) for term in terms) or "0"


# subcommand bodies: each returns (output text, exit code)

def cmd_nabla(a, conv) -> Tuple[str, int]:
    x = _parse(parse_poly, a.expr, "polynomial in xi<i>^<e>", a.mode or UNSTABLE)
    t = coproduct(x, a.mode or UNSTABLE)
    if a.format == "json":
        return _dump({"input": a.expr, "mode": a.mode or UNSTABLE, "nabla": format_tensor_display(t)}), OK
    return format_tensor_display(t) + "\n", OK


def _poly_op(name, fn, a, conv) -> Tuple[str, int]:
    x = _parse(parse_poly, a.expr, "polynomial in xi<i>^<e>", UNSTABLE)
    out = format_poly(fn(a.i, x))
    if a.format == "json":
        return _dump({"op": name, "i": a.i, "input": a.expr, "value": out}), OK
    return out + "\n", OK


def cmd_eop(a, conv):
    return _poly_op("e", e_op, a, conv)


def cmd_qop(a, conv):
    return _poly_op("Q", q_op, a, conv)


def cmd_cupk(a, conv):
    x = _parse(parse_poly, a.x, "polynomial in xi<i>^<e>", UNSTABLE)
    y = _parse(parse_poly, a.y, "polynomial in xi<i>^<e>", UNSTABLE)
    out = format_poly(cup_k(a.i, x, y, conv))
    if a.format == "json":
        return _dump({"i": a.i, "x": a.x, "y": a.y, "value": out, "conventions": conv.hash}), OK
    return out + "\n", OK


def cmd_cobar_d(a, conv):
    mode = a.mode or STABLE
    w = _parse(cobar.parse_sum, a.word, "cobar word [m1|m2|...]", mode)
    out = cobar.format_sum(cobar.cobar_diff(w, mode=mode))
    if a.format == "json":
        return _dump({"input": a.word, "mode": mode, "d": out}), OK
    return out + "\n", OK


def cmd_cobar_cup(a, conv):
    mode = a.mode or STABLE
    u = _parse(cobar.parse_sum, a.u, "cobar word [m1|m2|...]", mode)
    v = _parse(cobar.parse_sum, a.v, "cobar word [m1|m2|...]", mode)
    out = cobar.format_sum(cobar.cobar_cup(a.i, u, v, mode, conv))
    if a.format == "json":
        return _dump({"i": a.i, "u": a.u, "v": a.v, "mode": mode, "value": out, "conventions": conv.hash}), OK
    return out + "\n", OK


def ext_chart(max_stem: int, max_filt: int, conv: ConventionTable) -> dict:
    cells = cobar.cobar_homology(max_stem + max_filt, max_filt, max_stem=max_stem)
    rows = sorted(cells.values(), key=lambda c: (c.stem, c.s))
    return {
        "window": {"max_stem": max_stem, "max_filt": max_filt},
        "page": 2,
        "cells": [{"stem": c.stem, "filt": c.s, "dim": c.dim, "gens": [cobar.format_sum(r) for r in c.reps]}
                  for c in rows if c.dim],
        "differentials": [],
        "conventions": conv.hash,
    }


def chart_text(chart: dict) -> str:
    lines = [f"page {chart['page']}  window stem<={chart['window']['max_stem']} "
             f"filt<={chart['window']['max_filt']}  conventions {chart['conventions']}"]
    for c in chart["cells"]:
        lines.append(f"({c['stem']},{c['filt']}) dim {c['dim']}: " + ", ".join(c["gens"]))
    for d in chart["differentials"]:
        lines.append(f"d{d['page']}: {d['source']} -> {d['target']}")
    return "\n".join(lines) + "\n"


def _position(text: str) -> Optional[Tuple[int, int]]:
    try:
        w = sorted(may.parse_ps(text), key=may.ps_key)[0]
    except (ValueError, IndexError):
        return None
    return may.stem_of(w), may.s_of(w)


def chart_svg(chart: dict, cell: int = 40, margin: int = 40) -> str:
    """SVG drawn from the chart JSON: stems across, filtration up, one dot per basis element."""
    ms, mf = chart["window"]["max_stem"], chart["window"]["max_filt"]
    width, height = margin * 2 + cell * (ms + 1), margin * 2 + cell * (mf + 1)

    def xy(stem, filt, k=0, n=1):
        off = (k - (n - 1) / 2) * 7
        return margin + cell * stem + cell / 2 + off, height - margin - cell * filt - cell / 2

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    for s in range(ms + 1):
        x = margin + cell * s + cell / 2
        out.append(f'<text x="{x:.1f}" y="{height - margin / 3:.1f}" font-size="10" text-anchor="middle">{s}</text>')
    for f in range(mf + 1):
        y = height - margin - cell * f - cell / 2
        out.append(f'<text x="{margin / 2:.1f}" y="{y + 3:.1f}" font-size="10" text-anchor="middle">{f}</text>')
    for c in chart["cells"]:
        for k in range(c["dim"]):
            x, y = xy(c["stem"], c["filt"], k, c["dim"])
            out.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3" fill="black"><title>{c["gens"][k]}</title></circle>')
    for d in chart["differentials"]:
        a, b = _position(d["source"]), _position(d["target"])
        if a is None or b is None:
            continue
        (x1, y1), (x2, y2) = xy(*a), xy(*b)
        out.append(f'<line x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" y2="{y2:.1f}" stroke="blue"/>')
        out.append(f'<text x="{(x1 + x2) / 2:.1f}" y="{(y1 + y2) / 2:.1f}" font-size="9" fill="blue">'
                   f'd{d["page"]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_ext_chart(a, conv):
    if a.max_stem < 0 or a.max_filt < 0:
        raise UsageError("window bounds must be non-negative: --max-stem and --max-filt")
    if a.may_page is not None:
        if a.may_page < 1:
            raise UsageError("--may-page must be at least 1")
        chart = may.page_as_dict(may.page_compute(a.may_page, a.max_stem, a.max_filt, conv))
    else:
        chart = ext_chart(a.max_stem, a.max_filt, conv)
    if a.format == "json":
        return _dump(chart), OK
    if a.format == "svg":
        return chart_svg(chart), OK
    return chart_text(chart), OK


def cmd_may_d(a, conv):
    x = _parse(may.parse_ps, a.expr, "PS expression (h<n>, g(<i>,<k>), hm1 joined by * and ^)")
    if a.max_jump is not None and a.max_jump < 1:
        raise UsageError("--max-jump must be at least 1")
    split = may.transfer_diff(x, a.max_jump, conv, quotient=not a.keep_hm1)
    payload = {"input": may.format_ps(x), "d": split.as_dict(), "truncated": may.format_ps(split.truncated),
               "conventions": conv.hash}
    if a.format == "json":
        return _dump(payload), OK
    lines = [f"d{r}: {v}" for r, v in payload["d"].items()] or ["0"]
    if split.truncated:
        lines.append(f"beyond max-jump: {payload['truncated']}")
    return "\n".join(lines) + "\n", OK


def _check_output(check: verify.Check, a, conv, echo: List[str] = ()) -> Tuple[str, int]:
    code = OK if check.ok else FAIL
    if a.format == "json":
        d = check.as_dict()
        d["conventions_table"] = conv.as_dict()
        return _dump(d), code
    lines = [f"{check.name}: {check.verdict}"]
    for k, v in check.details.items():
        if k.endswith("_ok"):
            lines.append(f"  {k[:-3]}: {'PASS' if v else 'FAIL'}")
    lines.extend(echo)
    return "\n".join(lines) + "\n" + _conventions_section(conv), code


def _thm22_echo(check: verify.Check) -> List[str]:
    out = []
    for row in check.details["report"]["rows"]:
        out.append(f"  n={row['n']}: computed {row['computed']}")
        out.append(f"       closed form {row['closed_form']}")
        if row["extra_terms"] != "0":
            out.append(f"       extra terms {row['extra_terms']} (boundary: {row['extra_is_boundary']})")
        if row["cup_discrepancy"] != "0":
            out.append(f"       ∪1 vs ∪2 discrepancy {row['cup_discrepancy']}")
    return out


def _thm23_echo(check: verify.Check) -> List[str]:
    r = check.details["report"]
    keys = ["raw", "corrected", "corrected_d", "d5", "g", "target", "d5_minus_target", "gh_d1_preimage"]
    return [f"  {k}: {json.dumps(r[k], sort_keys=True, ensure_ascii=False)}" for k in keys if k in r]


def cmd_verify(a, conv):
    name = a.suite
    if name == "thm22":
        check = verify.thm22(a.n or 4, conv)
        return _check_output(check, a, conv, _thm22_echo(check))
    if name == "thm23":
        if a.n is not None and a.n < 4:
            raise UsageError("thm23 needs --n >= 4")
        check = verify.thm23(a.n or 4, conv)
        return _check_output(check, a, conv, _thm23_echo(check))
    if name == "star":
        ns = (a.n,) if a.n else (3, 4, 5)
        if any(n < 2 for n in ns):
            raise UsageError("star needs --n >= 2")
        check = verify.star(ns, conv)
        echo = [f"  n={r['n']}: d1({r['chain']}) = {r['d1']}" for r in check.details["rows"]]
        return _check_output(check, a, conv, echo)
    return _check_output(verify.SUITES[name](conv=conv), a, conv)


def cmd_kervaire(a, conv):
    if a.n < 4:
        raise UsageError("kervaire needs N >= 4")
    report = may.kervaire_pipeline(a.n, a.max_stem, conv)
    code = OK if (not report["incomplete"] and report["low_vanish"] and report["g_is_d1_cycle"]
                  and report["d5_matches_up_to_d1_boundary"] and report["gh_vanishes_on_e2"]) else FAIL
    if a.format == "json":
        return _dump(report), code
    lines = [f"{k}: {json.dumps(v, sort_keys=True, ensure_ascii=False)}" for k, v in report.items()]
    return "\n".join(lines) + "\n" + _conventions_section(conv), code


def cmd_fho_verify(a, conv):
    return _check_output(verify.fho_suite(a.seed, conv), a, conv)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=[STABLE, UNSTABLE], default=None)
    common.add_argument("--conventions", default="default", help="preset name or JSON file")
    common.add_argument("--format", choices=["text", "json", "svg"], default="text")
    common.add_argument("--cache-dir", default=None)
    common.add_argument("--no-cache", action="store_true")

    p = argparse.ArgumentParser(prog="cobarforge", description="Mod-2 Milnor coalgebra and cobar computations.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("nabla", parents=[common], help="coproduct of a polynomial")
    s.add_argument("expr")
    s.set_defaults(func=cmd_nabla)
    for name, fn in (("eop", cmd_eop), ("qop", cmd_qop)):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("i", type=int)
        s.add_argument("expr")
        s.set_defaults(func=fn)
    s = sub.add_parser("cupk", parents=[common], help="x ∪_i y on the coalgebra")
    s.add_argument("i", type=int)
    s.add_argument("x")
    s.add_argument("y")
    s.set_defaults(func=cmd_cupk)
    s = sub.add_parser("cobar-d", parents=[common])
    s.add_argument("word")
    s.set_defaults(func=cmd_cobar_d)
    s = sub.add_parser("cobar-cup", parents=[common])
    s.add_argument("i", type=int)
    s.add_argument("u")
    s.add_argument("v")
    s.set_defaults(func=cmd_cobar_cup)
    s = sub.add_parser("ext-chart", parents=[common], help="Ext chart from the cobar complex, or a PS page")
    s.add_argument("--max-stem", type=int, default=8)
    s.add_argument("--max-filt", type=int, default=4)
    s.add_argument("--may-page", type=int, default=None, help="chart page r of the PS model instead of Ext")
    s.set_defaults(func=cmd_ext_chart)
    s = sub.add_parser("may-d", parents=[common], help="differential on PS split by filtration jump")
    s.add_argument("expr")
    s.add_argument("--max-jump", type=int, default=None)
    s.add_argument("--keep-hm1", action="store_true", help="do not quotient by h_{-1}")
    s.set_defaults(func=cmd_may_d)
    s = sub.add_parser("verify", parents=[common])
    s.add_argument("suite", choices=sorted(verify.SUITES))
    s.add_argument("--n", type=int, default=None)
    s.set_defaults(func=cmd_verify)
    s = sub.add_parser("kervaire", parents=[common], help="the h_n^2 pipeline")
    s.add_argument("n", type=int)
    s.add_argument("--max-stem", type=int, default=None)
    s.set_defaults(func=cmd_kervaire)
    s = sub.add_parser("fho-verify", parents=[common])
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_fho_verify)
    return p


_SKIP_KEYS = {"func", "format", "cache_dir", "no_cache", "conventions", "mode", "command"}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        conv = load(a.conventions)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    inputs = {k: v for k, v in sorted(vars(a).items()) if k not in _SKIP_KEYS}
    inputs["format"] = a.format
    key = fingerprint(a.command, inputs, a.mode or "", conv.hash)
    cache = None if a.no_cache else Cache(a.cache_dir)
    if cache is not None:
        hit = cache.lookup(key)
        if hit is not None:
            entry = json.loads(hit)
            sys.stdout.write(entry["out"])
            print("cached", file=sys.stderr)
            return entry["exit"]
    try:
        out, code = a.func(a, conv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except ConventionGap as e:
        print(f"convention gap: {e}", file=sys.stderr)
        print(_conventions_section(conv), end="", file=sys.stderr)
        return FAIL
    sys.stdout.write(out)
    if cache is not None:
        try:
            cache.store(key, json.dumps({"exit": code, "out": out}, sort_keys=True).encode())
        except OSError as e:
            print(f"warning: cache not written: {e}", file=sys.stderr)
    return code


def run(argv: List[str]) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
