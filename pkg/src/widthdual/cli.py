"""Command-line front end: solve one instance, verify a witness, run sweeps.

Three subcommands:

* solve: read a graph or matroid, run one duality mode at one order
  bound, write the witness as JSON and print the side plus the width
  value or bound it certifies.
* verify: re-check a witness file against the instance it claims to
  answer, printing every named violation; exit status 0 means clean.
* suite: drive the independent dichotomy checker over a corpus, one
  row per (instance, mode, k), with optional CSV/JSONL/plot artifacts.

Graphs arrive as JSON {"vertices": n, "edges": [[u,v], ...]} or as
DIMACS-like text (p/e lines, 1-based); matroids as JSON objects with a
"type" field.  Witness files carry a schema_version field so older
fixtures stay readable or get refused loudly.

Exit codes: 0 success, 1 witness rejected or suite failure, 2 bad
input, 3 instance over an enumeration cap.  All stdout reporting is
byte-deterministic for fixed inputs and seeds; wall-clock times go
only into the CSV/JSONL artifacts.
"""

import argparse
import csv
import json
import multiprocessing
import os
import sys

from .modes import (
    MODE_NAMES,
    make_setup,
    summarize,
    tangle_violations,
    tree_violations,
)
from .oracle import BRANCH_EDGE_CAP, all_graphs, random_graphs, verify_dichotomy
from .separations import SeparationError
from .stree import stree_from_json_dict
from .universes import (
    CapExceeded,
    Graph,
    InputError,
    graph_from_dimacs,
    graph_from_json_dict,
    matroid_from_json_dict,
)

SCHEMA_VERSION = 1
SUITE_MODES = ("tree", "path", "branch", "adhesion", "carving", "rank")
CSV_COLUMNS = ("instance", "mode", "k", "side", "value", "verified", "ms")
# random corpus order bounds; higher bounds outgrow the exhaustive checker
RANDOM_CORPUS_MAX_K = 3


def _read_text(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError("cannot read %s: %s" % (path, exc))


def _read_json(path):
    try:
        return json.loads(_read_text(path))
    except ValueError as exc:
        raise InputError("%s is not valid JSON: %s" % (path, exc))


def load_instance(path, mode):
    """Graph from JSON or DIMACS text; matroid from its JSON object."""
    text = _read_text(path)
    try:
        data = json.loads(text)
    except ValueError:
        data = None
    if mode == "matroid-tree":
        if not isinstance(data, dict):
            raise InputError(
                "matroid instances are JSON objects with a 'type' field")
        return matroid_from_json_dict(data)
    if data is not None:
        if not isinstance(data, dict):
            raise InputError("a JSON graph must be an object")
        return graph_from_json_dict(data)
    return graph_from_dimacs(text)


def load_stars(path):
    """Explicit star family: JSON list of stars, each a list of [A, B]."""
    data = _read_json(path)
    if not isinstance(data, list):
        raise InputError("a star family file holds a JSON list of stars")
    return data


def _fmt(value):
    return "n/a" if value is None else str(value)


# -- solve -----------------------------------------------------------------------

def cmd_solve(args):
    instance = load_instance(args.input, args.mode)
    stars = load_stars(args.family) if args.family else None
    setup = make_setup(args.mode, instance, args.k, w=args.w, stars=stars)
    witness = setup.solve()
    out = summarize(setup, witness)

    doc = {
        "schema_version": SCHEMA_VERSION,
        "mode": args.mode,
        "k": args.k,
        "witness": witness.to_json_dict(),
        "summary": out,
    }
    if args.w is not None:
        doc["w"] = args.w
    path = args.output
    if path is None:
        path = os.path.splitext(args.input)[0] + ".witness.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")

    line = "side=%s width_param=%s" % (out["side"], _fmt(out["value"]))
    if "tangle_number" in out:
        line += " tangle_number=%s" % (out["tangle_number"],)
    print(line)
    if "note" in out:
        print("note: %s" % out["note"])
    print("wrote %s" % path)
    return 0


# -- verify ----------------------------------------------------------------------

def _witness_payload(doc):
    if not isinstance(doc, dict):
        raise InputError("a witness file holds a JSON object")
    if "schema_version" in doc:
        if doc["schema_version"] != SCHEMA_VERSION:
            raise InputError("unsupported witness schema_version %r"
                             % (doc["schema_version"],))
        payload = doc.get("witness")
    else:
        payload = doc
    if not isinstance(payload, dict) or "kind" not in payload:
        raise InputError("witness file carries no witness object")
    return payload


def _rebuild_tangle(universe, payload):
    oriented = payload.get("oriented")
    if not isinstance(oriented, list):
        raise InputError("a tangle witness lists its oriented separations")
    chosen = []
    for pos, entry in enumerate(oriented):
        try:
            side_a, side_b = entry["A"], entry["B"]
        except (TypeError, KeyError):
            raise InputError(
                "oriented entry %d needs 'A' and 'B' vertex lists" % pos)
        chosen.append(universe.sep(side_a, side_b))
    return chosen


def cmd_verify(args):
    instance = load_instance(args.input, args.mode)
    stars = load_stars(args.family) if args.family else None
    setup = make_setup(args.mode, instance, args.k, w=args.w, stars=stars)
    payload = _witness_payload(_read_json(args.witness))

    try:
        if payload["kind"] == "stree":
            tree = stree_from_json_dict(payload, setup.system.universe)
            report = tree_violations(setup, tree)
        elif payload["kind"] == "tangle":
            chosen = _rebuild_tangle(setup.system.universe, payload)
            report = tangle_violations(setup, chosen)
        else:
            raise InputError("unknown witness kind %r" % (payload["kind"],))
    except SeparationError as exc:
        # the payload does not even form separations of this instance
        print("violation not_a_separation: %s" % exc)
        print("witness rejected: 1 violation(s)")
        return 1

    if report.ok:
        print("witness ok: side=%s mode=%s k=%d"
              % (payload["kind"], args.mode, args.k))
        return 0
    for issue in report.issues:
        at = "" if issue.where is None else " at %r" % (issue.where,)
        print("violation %s%s: %s" % (issue.kind, at, issue.message))
    print("witness rejected: %d violation(s)" % len(report.issues))
    return 1


# -- suite -----------------------------------------------------------------------

def _suite_case(case):
    label, n, edges, mode, k, w = case
    graph = Graph(n, [tuple(e) for e in edges])
    return verify_dichotomy(graph, mode, k, w=w, label=label)


def _suite_corpus(args):
    """(label, graph) corpus plus the per-graph order bound range."""
    if args.seed is not None:
        named = random_graphs(seed=args.seed)
        corpus = sorted(named.items())
        return corpus, lambda g: range(1, RANDOM_CORPUS_MAX_K + 1)
    if not 1 <= args.max_n <= 5:
        raise InputError("--max-n must be between 1 and 5")
    corpus = []
    for n in range(1, args.max_n + 1):
        for i, g in enumerate(all_graphs(n)):
            corpus.append(("g%d_%d" % (n, i), g))
    return corpus, lambda g: range(1, g.n + 2)


def cmd_suite(args):
    mode_list = tuple(m.strip() for m in args.modes.split(",") if m.strip())
    for mode in mode_list:
        if mode not in SUITE_MODES:
            raise InputError("--modes accepts a subset of: %s"
                             % ",".join(SUITE_MODES))
    if not mode_list:
        raise InputError("--modes must name at least one mode")
    if args.jobs < 1:
        raise InputError("--jobs must be at least 1")

    corpus, k_range = _suite_corpus(args)
    cases = []
    skips = []
    for label, g in corpus:
        for mode in mode_list:
            for k in k_range(g):
                if mode == "branch" and k >= 3 and g.m > BRANCH_EDGE_CAP:
                    skips.append("skip %s branch k=%d: %d edges exceed the "
                                 "exact oracle cap %d"
                                 % (label, k, g.m, BRANCH_EDGE_CAP))
                    continue
                w = k + 1 if mode == "adhesion" else None
                cases.append((label, g.n, [list(e) for e in g.edges],
                              mode, k, w))

    if args.jobs > 1:
        with multiprocessing.Pool(args.jobs) as pool:
            rows = pool.map(_suite_case, cases)
    else:
        rows = [_suite_case(c) for c in cases]

    failures = 0
    for row in rows:
        status = "PASS" if row["verified"] else "FAIL"
        line = "%s %s %s k=%d side=%s value=%s" % (
            status, row["instance"], row["mode"], row["k"],
            row["side"], _fmt(row["value"]))
        if not row["verified"]:
            failures += 1
            line += " problems=%s" % ",".join(row.get("problems", []))
        print(line)
    for note in skips:
        print(note)
    print("result: %d/%d cases verified" % (len(rows) - failures, len(rows)))

    if args.csv:
        _write_csv(rows, args.csv)
        print("wrote %s" % args.csv)
    if args.jsonl:
        _write_jsonl(rows, args.jsonl)
        print("wrote %s" % args.jsonl)
    if args.plot:
        _write_plot(rows, args.plot)
        print("wrote %s" % args.plot)
    return 0 if failures == 0 else 1


def _write_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([
                row["instance"], row["mode"], row["k"], row["side"],
                _fmt(row["value"]), str(row["verified"]).lower(), row["ms"],
            ])


def _write_jsonl(rows, path):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True))
            fh.write("\n")


def _write_plot(rows, path):
    try:
        import matplotlib
    except ImportError:
        raise InputError("--plot needs matplotlib installed")
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    modes = sorted({row["mode"] for row in rows})
    sides = ("tree", "tangle")
    counts = {(m, s): 0 for m in modes for s in sides}
    for row in rows:
        counts[(row["mode"], row["side"])] += 1
    xs = range(len(modes))
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    width = 0.38
    ax.bar([x - width / 2 for x in xs],
           [counts[(m, "tree")] for m in modes], width, label="tree")
    ax.bar([x + width / 2 for x in xs],
           [counts[(m, "tangle")] for m in modes], width, label="tangle")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(modes)
    ax.set_ylabel("cases")
    ax.set_title("dichotomy outcomes per mode")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# -- entry -----------------------------------------------------------------------

def _add_instance_args(sub):
    sub.add_argument("--mode", required=True, choices=MODE_NAMES,
                     help="width parameter to instantiate")
    sub.add_argument("-k", dest="k", type=int, required=True,
                     help="order bound (positive integer)")
    sub.add_argument("--input", required=True,
                     help="instance file: graph JSON/DIMACS, or matroid JSON")
    sub.add_argument("--w", type=int, default=None,
                     help="bag size bound (adhesion mode only)")
    sub.add_argument("--family", default=None,
                     help="JSON star list (custom mode only)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="widthdual",
        description="Width-parameter duality: decompositions vs obstructions.")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve one instance, write a witness")
    _add_instance_args(ps)
    ps.add_argument("--output", default=None,
                    help="witness path (default: <input>.witness.json)")
    ps.set_defaults(func=cmd_solve)

    pv = sub.add_parser("verify", help="re-check a witness file")
    _add_instance_args(pv)
    pv.add_argument("--witness", required=True, help="witness JSON file")
    pv.set_defaults(func=cmd_verify)

    pt = sub.add_parser("suite", help="run the dichotomy sweep")
    pt.add_argument("--modes", default=",".join(SUITE_MODES),
                    help="comma-separated subset of %s" % (",".join(SUITE_MODES)))
    pt.add_argument("--max-n", dest="max_n", type=int, default=5,
                    help="corpus holds all graphs up to this many vertices")
    pt.add_argument("--seed", type=int, default=None,
                    help="use the seeded random 6-7 vertex corpus instead")
    pt.add_argument("--jobs", type=int, default=1,
                    help="worker processes for the sweep")
    pt.add_argument("--csv", default=None, help="write per-case CSV here")
    pt.add_argument("--jsonl", default=None, help="write per-case JSONL here")
    pt.add_argument("--plot", default=None, help="write a summary chart here")
    pt.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapExceeded as exc:
        print("cap exceeded: %s" % exc, file=sys.stderr)
        return 3
    except InputError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
