"""Command-line front end: ``hyperdepth <verb> ...``.

Exit codes: 0 success or equal, 2 usage or input error, 3 distinguished or
failed check, 4 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import __version__
from .elimination import (format_ef, hd_exact, parse_ef, shd_exact, validate_ef,
                          validate_strict_ef)
from .errors import BudgetExceeded
from .families import FAMILIES, EnumerationBounds, enumerate_hypergraphs
from .homcount import ClassTruncation, count_hg_homs, count_ig_homs, hom_vector, indistinguishable
from .hypergraph import format_hg, read_hg, to_incidence
from .kli import build_from_strict_ef, read_gli
from .logic import (Interpretation, evaluate, free_vars, guard_depth, is_rgc, read_gcl,
                    wellformed_gck)
from .repro import CHECKS, budget_from_env, run_check, time_budget

SCHEMA = "hyperdepth/1"
EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_BUDGET = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class Output:
    """Collects config, records and a headline, then prints in the chosen format."""

    def __init__(self, verb: str, fmt: str, config: dict):
        self.verb, self.fmt, self.config = verb, fmt, config
        self.records: list[dict] = []
        self.lines: list[str] = []

    def record(self, **fields):
        self.records.append(fields)

    def text(self, line: str):
        self.lines.append(line)

    def emit(self, stream):
        if self.fmt == "json":
            json.dump({"schema": SCHEMA, "verb": self.verb, "config": self.config,
                       "records": self.records}, stream, indent=2, sort_keys=True)
            stream.write("\n")
            return
        stream.write("# " + " ".join(f"{k}={_flat(v)}" for k, v in sorted(self.config.items())) + "\n")
        if self.fmt == "tsv":
            if self.records:
                cols = list(self.records[0])
                stream.write("\t".join(cols) + "\n")
                for r in self.records:
                    stream.write("\t".join(_flat(r.get(c, "")) for c in cols) + "\n")
            return
        for line in self.lines:
            stream.write(line + "\n")


def _flat(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(_flat(x) for x in v)
    return str(v)


def _kv_map(text: Optional[str], what: str) -> dict[int, str]:
    out: dict[int, str] = {}
    if not text:
        return out
    for item in text.split(","):
        k, eq, v = item.partition("=")
        if not eq or not k.strip().isdigit():
            raise UsageError(f"--{what} expects entries like 1=a,2=b")
        out[int(k)] = v.strip()
    return out


# -- verbs -----------------------------------------------------------------------

def cmd_depth(a, out: Output) -> int:
    H = read_hg(a.instance)
    search = shd_exact if a.mode == "shd" else hd_exact
    w = search(H, budget=a.max_states)
    out.record(instance=a.instance, mode=a.mode, depth=w.depth, forest=format_ef(w.forest).strip().replace("\n", "; "))
    out.text(str(w.depth))
    out.text(format_ef(w.forest).rstrip("\n"))
    if a.witness:
        with open(a.witness, "w", encoding="utf-8") as fh:
            fh.write(format_ef(w.forest))
    code = EXIT_OK
    if a.validate:
        with open(a.validate, encoding="utf-8") as fh:
            ef = parse_ef(fh.read())
        v = validate_strict_ef(H, ef) if a.mode == "shd" else validate_ef(H, ef)
        out.record(instance=a.instance, mode=f"validate-{a.mode}", depth=ef.height,
                   valid=v.ok, violations=[f"{x.condition}:{'/'.join(x.ids)}" for x in v.violations])
        out.text(f"forest {a.validate}: {'valid' if v.ok else 'invalid'} (height {ef.height})")
        for x in v.violations:
            out.text(f"  {x.condition} {' '.join(x.ids)} {x.detail}".rstrip())
        code = EXIT_OK if v.ok else EXIT_FAIL
    return code


def cmd_hom(a, out: Output) -> int:
    F, G = read_hg(a.source), read_hg(a.target)
    n = count_ig_homs(F, G) if a.semantics == "incidence" else count_hg_homs(F, G)
    out.record(source=a.source, target=a.target, semantics=a.semantics, count=n)
    out.text(str(n))
    return EXIT_OK


def _truncation(a) -> ClassTruncation:
    return ClassTruncation(a.cls, a.k, a.maxE, a.maxV, a.connected)


def _target(a, path_):
    H = read_hg(path_)
    return to_incidence(H) if a.cls in ("ISHD", "IHD") else H


def cmd_homvec(a, out: Output) -> int:
    ct = _truncation(a)
    vec = hom_vector(ct, _target(a, a.target))
    for key, c in vec.entries.items():
        out.record(source=key, count=c)
        out.text(f"{key}\t{c}")
    out.text(f"# {len(vec.entries)} entries, bounds: {vec.bounds}")
    return EXIT_OK


def cmd_indist(a, out: Output) -> int:
    ct = _truncation(a)
    v = indistinguishable(ct, _target(a, a.first), _target(a, a.second))
    if v.equal:
        out.record(verdict="equal up to bounds", bounds=v.bounds, compared=v.compared)
        out.text(f"equal up to bounds ({v.bounds}; {v.compared} sources compared)")
        return EXIT_OK
    wit = format_hg(v.witness).strip().replace("\n", "; ")
    out.record(verdict="distinguished", bounds=v.bounds, compared=v.compared, witness=wit,
               counts=list(v.counts))
    out.text(f"distinguished ({v.bounds}) by {wit}: {v.counts[0]} vs {v.counts[1]}")
    return EXIT_FAIL


def cmd_gli(a, out: Output) -> int:
    if a.action == "replay":
        rep = read_gli(a.file)
        for name in rep.order:
            d = rep.steps[name]
            out.record(step=name, op=d.op, cost=d.cost, label_free=d.result.label_free,
                       reds=len(d.result.skeleton.reds), blues=len(d.result.skeleton.blues))
        for name in rep.order:
            d = rep.steps[name]
            out.text(f"{name}\t{d.op}\tcost {d.cost}")
        fin = rep.final
        out.text(f"result {rep.order[-1]}: cost {fin.cost}, label-free={fin.result.label_free}, "
                 f"in GLI_{rep.k}^{fin.cost}" if fin.result.label_free else
                 f"result {rep.order[-1]}: cost {fin.cost}, still labelled")
        return EXIT_OK if rep.final.cost <= rep.k else EXIT_FAIL
    H = read_hg(a.file)
    if a.ef:
        with open(a.ef, encoding="utf-8") as fh:
            ef = parse_ef(fh.read())
    else:
        ef = shd_exact(H).forest
    d = build_from_strict_ef(H, ef, a.k)
    for s in d.steps():
        out.record(step=s.name, op=s.op, cost=s.cost, label_free=s.result.label_free)
        out.text(f"{s.name}\t{s.op}\tcost {s.cost}")
    out.text(f"result: label-free={d.result.label_free}, cost {d.cost}, in GLI_{max(a.k or ef.height, 1)}^{d.cost}")
    return EXIT_OK


def cmd_gck(a, out: Output) -> int:
    phi = read_gcl(a.formula)
    wf = wellformed_gck(phi, a.k)
    gd = guard_depth(phi)
    if a.action == "check":
        rgc = is_rgc(phi, a.k)
        fv, fe = free_vars(phi)
        out.record(formula=a.formula, wellformed=wf.ok, guard_depth=gd, rgc=rgc.ok,
                   free=[f"v{i}" for i in sorted(fv)] + [f"e{j}" for j in sorted(fe)])
        out.text(f"well-formed in GC^{a.k}: {wf.ok}")
        for x in wf.violations:
            out.text(f"  {x.condition} {' '.join(x.ids)} {x.detail}".rstrip())
        out.text(f"guard depth: {gd}")
        out.text(f"restricted fragment: {rgc.ok}")
        return EXIT_OK if wf.ok else EXIT_FAIL
    if not wf.ok:
        raise UsageError(f"formula is not well formed: {wf.violations[0].detail}")
    H = read_hg(a.model)
    val = evaluate(phi, Interpretation(to_incidence(H), _kv_map(a.nu_v, "nu-v"), _kv_map(a.nu_e, "nu-e")))
    out.record(formula=a.formula, model=a.model, value=val, guard_depth=gd)
    out.text("true" if val else "false")
    return EXIT_OK


def cmd_families(a, out: Output) -> int:
    if a.action == "emit":
        if a.name not in FAMILIES:
            raise UsageError(f"unknown family {a.name!r}; known: {', '.join(FAMILIES)}")
        if a.k is None and a.name not in ("exampleG", "exampleH"):
            raise UsageError(f"family {a.name} needs --k")
        hs = FAMILIES[a.name](a.k)
        if a.out and len(a.out) != len(hs):
            raise UsageError(f"family {a.name} yields {len(hs)} instance(s); give that many --out files")
        for i, H in enumerate(hs):
            text = format_hg(H)
            if a.out:
                with open(a.out[i], "w", encoding="utf-8") as fh:
                    fh.write(text)
                out.record(name=a.name, index=i, file=a.out[i])
            else:
                out.record(name=a.name, index=i, hg=text.strip().replace("\n", "; "))
            out.text(text.rstrip("\n") if not a.out else f"wrote {a.out[i]}")
        return EXIT_OK
    hs = enumerate_hypergraphs(EnumerationBounds(a.maxE, a.maxV, a.connected))
    for H in hs:
        out.record(edges=len(H.edges), vertices=len(H.vertices),
                   hg=format_hg(H).strip().replace("\n", "; "))
    if a.list:
        for r in out.records:
            out.text(r["hg"])
    out.text(f"{len(hs)} hypergraphs up to isomorphism")
    return EXIT_OK


def cmd_repro(a, out: Output) -> int:
    if a.list:
        for c in CHECKS:
            out.record(check=c)
            out.text(c)
        return EXIT_OK
    ids = list(CHECKS) if a.check == "all" else [a.check]
    if ids[0] not in CHECKS:
        raise UsageError(f"unknown check {a.check!r}; known: {', '.join(CHECKS)}")
    failed = 0
    budget = budget_from_env()
    for cid in ids:
        rows = run_check(cid, budget)
        for r in rows:
            rec = dict(check=r.check, claim=r.claim, expected=r.expected, computed=r.computed,
                       status="pass" if r.ok else "FAIL")
            if a.timing:
                rec["seconds"] = f"{r.seconds:.2f}"
            out.record(**rec)
            line = f"{'pass' if r.ok else 'FAIL'}\t{r.check}\t{r.claim}\texpected {r.expected}\tgot {r.computed}"
            out.text(line + (f"\t{r.seconds:.2f}s" if a.timing else ""))
            failed += not r.ok
    out.text(f"{len(out.records) - failed} passed, {failed} failed")
    return EXIT_FAIL if failed else EXIT_OK


# -- argument parsing -----------------------------------------------------------------

def _class_flags(p):
    p.add_argument("--class", dest="cls", required=True, choices=["SHD", "HD", "ISHD", "IHD"])
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--maxE", type=int, default=3)
    p.add_argument("--maxV", type=int, default=6)
    p.add_argument("--connected", action="store_true", help="only connected sources")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hyperdepth", description="Hypertree depth, hom counts, labeled-graph derivations, guarded counting logic.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--format", choices=["text", "tsv", "json"], default="text")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    d = sub.add_parser("depth", help="exact (strict) hypertree depth with a witness forest")
    d.add_argument("instance")
    d.add_argument("--mode", choices=["hd", "shd"], default="hd")
    d.add_argument("--witness", help="write the witness forest (.ef) here")
    d.add_argument("--validate", help="also validate this .ef against the instance")
    d.add_argument("--max-states", type=int, default=500_000)
    d.set_defaults(run=cmd_depth)

    h = sub.add_parser("hom", help="count homomorphisms")
    h.add_argument("source")
    h.add_argument("target")
    h.add_argument("--semantics", choices=["hypergraph", "incidence"], default="hypergraph")
    h.set_defaults(run=cmd_hom)

    v = sub.add_parser("homvec", help="hom vector over a truncated class")
    _class_flags(v)
    v.add_argument("target")
    v.set_defaults(run=cmd_homvec)

    i = sub.add_parser("indist", help="compare two instances over a truncated class")
    _class_flags(i)
    i.add_argument("first")
    i.add_argument("second")
    i.set_defaults(run=cmd_indist)

    g = sub.add_parser("gli", help="replay or build labeled incidence graph derivations")
    g.add_argument("action", choices=["replay", "build"])
    g.add_argument("file", help=".gli script (replay) or .hg instance (build)")
    g.add_argument("--ef", help="strict forest to build from (default: exact witness)")
    g.add_argument("--k", type=int, default=None)
    g.set_defaults(run=cmd_gli)

    c = sub.add_parser("gck", help="check or evaluate guarded counting formulas")
    c.add_argument("action", choices=["eval", "check"])
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--formula", required=True)
    c.add_argument("--model")
    c.add_argument("--nu-v", help="vertex assignment, e.g. 1=a,2=b")
    c.add_argument("--nu-e", help="hyperedge assignment, e.g. 1=e")
    c.set_defaults(run=cmd_gck)

    f = sub.add_parser("families", help="emit named instances or enumerate small hypergraphs")
    f.add_argument("action", choices=["emit", "enumerate"])
    f.add_argument("--name")
    f.add_argument("--k", type=int)
    f.add_argument("--out", nargs="+")
    f.add_argument("--maxE", type=int, default=2)
    f.add_argument("--maxV", type=int, default=4)
    f.add_argument("--connected", action="store_true")
    f.add_argument("--list", action="store_true", help="print every enumerated instance")
    f.set_defaults(run=cmd_families)

    r = sub.add_parser("repro", help="run reproduction checks")
    r.add_argument("--check", default="all", help="check id or 'all'")
    r.add_argument("--list", action="store_true")
    r.add_argument("--timing", action="store_true", help="add runtimes (output no longer byte-stable)")
    r.set_defaults(run=cmd_repro)
    return p


def _config(a) -> dict:
    return {k: v for k, v in vars(a).items() if k not in ("run",) and v is not None and v is not False}


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if a.verb == "gck" and a.action == "eval" and not a.model:
        stderr.write("usage error: gck eval needs --model\n")
        return EXIT_USAGE
    if a.verb == "families" and a.action == "emit" and not a.name:
        stderr.write("usage error: families emit needs --name\n")
        return EXIT_USAGE
    out = Output(a.verb, a.format, _config(a))
    try:
        if a.verb == "repro":
            code = a.run(a, out)
        else:
            with time_budget(budget_from_env()):
                code = a.run(a, out)
    except BudgetExceeded as exc:
        stderr.write(f"budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (OSError, ValueError, KeyError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    out.emit(stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
