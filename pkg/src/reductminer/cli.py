"""Command-line entry point: ``reductminer {describe,reduce,tree,rules,eval,fetch}``.

Reports are JSON by default (``--format text`` for a readable rendering),
written to stdout or to ``<out>/<command>.<ext>``. Every report embeds the
resolved configuration and a digest of configuration plus input bytes.
Exit codes: 0 success, 1 computation failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import (
    BANK_SCHEMA,
    InformationSystem,
    apply_binning,
    describe,
    load_binning,
    load_csv,
)
from .dtree import TreeParams, build_tree, classify_table, gain_ratio_table, info_gain_table, tree_to_rules
from .exceptions import DatasetError, ReductMinerError, RuleError, UnknownAttribute
from .fetch import fetch_bank, sha256_file
from .roughset import check_reduct, discernibility_scan, greedy_reduct, partition_by, rules_from_partition
from .rules import (
    Rule,
    evaluate_rules,
    filter_rules,
    format_percent,
    load_rules,
    majority,
    predict_table,
    rank_rules,
    render_table,
    scored_to_dict,
)

log = logging.getLogger("reductminer")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
REPRODUCED_PP = 0.5


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# config & input
# ---------------------------------------------------------------------------

CONFIG_KEYS = {
    "input", "eval_input", "delimiter", "bins", "mode", "min_leaf", "min_gain", "max_depth",
    "min_confidence", "min_support", "rules", "out", "format", "candidate", "rank", "threads",
    "decision", "schema", "compare", "timing", "dest",
}

DEFAULTS = {
    "delimiter": ";",
    "mode": "absolute",
    "min_leaf": 2,
    "min_gain": 1e-4,
    "max_depth": 30,
    "min_confidence": 0.0,
    "min_support": 0,
    "format": "json",
    "rank": None,
    "schema": "auto",
}


def _resolve(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < explicit flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path}: {exc}") from None
        unknown = set(doc) - CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(doc)
    for k, v in vars(args).items():
        if k in CONFIG_KEYS and v is not None:
            cfg[k] = v
    if cfg.get("mode"):
        cfg["mode"] = cfg["mode"].replace("-", "_")
    return cfg


def _fixture(name: str) -> Path:
    return Path(str(resources.files("reductminer") / "fixtures" / name))


def _resolve_path(spec: str | None, what: str) -> Path | None:
    """Paths may name a packaged fixture as ``builtin:<name>``."""
    if spec is None:
        return None
    if spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        path = _fixture(name if name.endswith(".json") else name + ".json")
    else:
        path = Path(spec)
    if not path.is_file():
        raise UsageError(f"{what} not found: {spec}")
    return path


def _load(cfg: dict, key: str = "input") -> InformationSystem:
    spec = cfg.get(key)
    if not spec:
        raise UsageError(f"--{key.replace('_', '-')} is required")
    path = _resolve_path(spec, "input file")
    schema = None
    if cfg.get("schema") == "bank":
        schema = BANK_SCHEMA
    elif cfg.get("schema") == "auto":
        with path.open(encoding="utf-8") as fh:
            head = fh.readline().replace('"', "").strip().lower().split(cfg["delimiter"])
        if head == [c.name for c in BANK_SCHEMA.columns]:
            schema = BANK_SCHEMA
    system = load_csv(path, schema=schema, delimiter=cfg["delimiter"], decision=cfg.get("decision"))
    bins = _resolve_path(cfg.get("bins"), "binning file")
    if bins is not None:
        system = apply_binning(system, load_binning(bins))
    return system


def _digest(cfg: dict) -> dict:
    inputs = {}
    for key in ("input", "eval_input", "bins", "rules"):
        if cfg.get(key):
            inputs[key] = sha256_file(_resolve_path(cfg[key], key))
    canon = json.dumps({"config": cfg, "inputs": inputs}, sort_keys=True, default=str)
    return {"inputs": inputs, "config_digest": hashlib.sha256(canon.encode()).hexdigest()}


def _report(command: str, cfg: dict, body: dict) -> dict:
    shown = {k: v for k, v in sorted(cfg.items()) if k not in ("out", "format", "timing", "dest") and v is not None}
    return {"command": command, "version": __version__, "config": shown, **_digest(shown), **body}


def _emit(command: str, cfg: dict, report: dict, text: str) -> None:
    fmt = cfg.get("format", "json")
    if fmt not in ("json", "text"):
        raise UsageError(f"--format must be json or text, got {fmt!r}")
    payload = json.dumps(report, indent=2, ensure_ascii=False) + "\n" if fmt == "json" else text.rstrip() + "\n"
    out = cfg.get("out")
    if out:
        d = Path(out)
        try:
            d.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise UsageError(f"cannot create output directory {d}: {exc}") from None
        (d / f"{command}.{'json' if fmt == 'json' else 'txt'}").write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)


def _rules_from(cfg: dict) -> list[Rule]:
    path = _resolve_path(cfg.get("rules"), "rule file")
    return [] if path is None else load_rules(path)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_describe(cfg: dict) -> None:
    system = _load(cfg)
    summary = describe(system)
    lines = [f"rows: {summary['rows']}", f"conditional attributes: {summary['conditional_attributes']}"]
    for a in summary["attributes"]:
        extra = (f"min={a['min']} max={a['max']}" if "min" in a else "values=" + ",".join(a["dictionary"]))
        lines.append(f"  {a['name']:<12} {a['kind']:<12} distinct={a['distinct']:<6} {extra}")
    dist = summary["decision"]["distribution"]
    lines.append(f"decision {summary['decision']['name']}: " + ", ".join(f"{k}={v}" for k, v in dist.items()))
    _emit("describe", cfg, _report("describe", cfg, {"summary": summary}), "\n".join(lines))


def cmd_reduce(cfg: dict) -> None:
    system = _load(cfg)
    mode = cfg["mode"]
    t0 = time.perf_counter()
    summary = discernibility_scan(system, None, mode, threads=cfg.get("threads"))
    t_scan = time.perf_counter() - t0
    reduct = greedy_reduct(system, mode, summary=summary)
    t_total = time.perf_counter() - t0
    check = check_reduct(system, reduct, None, mode) if reduct else None
    body = {
        "rows": system.row_count,
        "scan": summary.to_dict(system),
        "core": system.names_of(summary.core),
        "reduct": system.names_of(reduct),
        "reduct_verification": check.to_dict(system) if check else None,
    }
    text = [
        f"rows: {system.row_count}  pairs: {summary.pair_count}  mode: {mode}",
        f"core: {{{', '.join(body['core'])}}}",
        f"greedy reduct: {{{', '.join(body['reduct'])}}} -> {check.verdict.value if check else 'empty'}",
    ]
    cand = cfg.get("candidate")
    if cand:
        names = [c.strip() for c in cand.split(",")] if isinstance(cand, str) else list(cand)
        cset = system.attrset(names)
        cc = check_reduct(system, cset, None, mode)
        body["candidate"] = {"attributes": system.names_of(cset), **cc.to_dict(system)}
        text.append(f"candidate {{{', '.join(system.names_of(cset))}}}: {cc.verdict.value}"
                    + (f" (removable: {', '.join(body['candidate']['removable'])})" if cc.removable else ""))
    if cfg.get("timing"):
        body["timing"] = {"scan_seconds": round(t_scan, 3), "total_seconds": round(t_total, 3)}
        text.append(f"scan {t_scan:.2f}s, total {t_total:.2f}s")
    _emit("reduce", cfg, _report("reduce", cfg, body), "\n".join(text))


def _score_rows(scored, system: InformationSystem, compare: bool) -> list[dict]:
    rows = []
    for s in scored:
        d = scored_to_dict(s)
        if compare and s.rule.expected is not None:
            pct = s.metrics.confidence
            d["expected_pct"] = s.rule.expected
            if pct is not None:
                delta = round(float(pct) * 100 - s.rule.expected, 4)
                d["delta_pp"] = delta
                d["status"] = "reproduced" if abs(delta) <= REPRODUCED_PP else "unreconciled"
        rows.append(d)
    return rows


def cmd_tree(cfg: dict) -> None:
    system = _load(cfg)
    params = TreeParams(int(cfg["min_leaf"]), int(cfg["max_depth"]), float(cfg["min_gain"]))
    gr = gain_ratio_table(system)
    ig = info_gain_table(system, "mdl")
    tree = build_tree(system, params)
    rules = tree_to_rules(tree)
    scored = evaluate_rules(rules, system)
    pred = classify_table(tree, system)
    truth = np.asarray(system.decision.dictionary, dtype=object)[system.decision_column]
    acc = int((pred == truth).sum())
    body = {
        "params": params.to_dict(),
        "gain_ratio_table": [s.to_dict() for s in gr],
        "info_gain_table": [s.to_dict() for s in ig],
        "tree_stats": {"leaves": tree.n_leaves, "size": tree.size, "depth": tree.depth},
        "training_accuracy": {"hits": acc, "rows": system.row_count, "pct": format_percent(acc / system.row_count)},
        "tree": tree.to_dict(),
        "rules": _score_rows(scored, system, False),
    }
    text = ["gain ratio (root):"]
    text += [f"  {s.name:<12} {s.gain_ratio:.8f}" for s in gr]
    text += ["information gain (MDL-discretised):"]
    text += [f"  {s.name:<12} {s.gain:.8f}" for s in ig]
    text += [f"tree: {tree.n_leaves} leaves, size {tree.size}, depth {tree.depth}; params {params.to_dict()}",
             tree.render(), "", render_table(scored, system.decision.name)]
    _emit("tree", cfg, _report("tree", cfg, body), "\n".join(text))


def cmd_rules(cfg: dict) -> None:
    system = _load(cfg)
    rules = _rules_from(cfg)
    if not rules and not cfg.get("rules"):
        binned = [a.name for a in system.attributes if a.is_binned]
        if not binned:
            raise UsageError("give --rules, or --bins so rules can be generated from the binned partition")
        rules = rules_from_partition(system, partition_by(system, binned))
    scored = evaluate_rules(rules, system)
    kept = filter_rules(scored, float(cfg["min_confidence"]), int(cfg["min_support"]))
    if cfg.get("rank"):
        kept = rank_rules(kept, cfg["rank"])
    body = {
        "rows": system.row_count,
        "evaluated": len(scored),
        "kept": len(kept),
        "rules": _score_rows(kept, system, bool(cfg.get("compare"))),
    }
    text = render_table(kept, system.decision.name) if kept else "(no rules)"
    if cfg.get("compare"):
        text += "\n\n" + "\n".join(
            f"{r.get('id') or i + 1}: expected {r['expected_pct']} computed {r['metrics']['confidence_pct']} "
            f"delta {r.get('delta_pp')} pp [{r.get('status')}]"
            for i, r in enumerate(body["rules"]) if "expected_pct" in r
        )
    _emit("rules", cfg, _report("rules", cfg, body), text)


def cmd_eval(cfg: dict) -> None:
    train = _load(cfg, "input")
    test = _load(cfg, "eval_input")
    if not train.same_schema(test):
        raise UsageError("schema mismatch: the two inputs have different attributes or decision")
    rules = _rules_from(cfg)
    counts = train.class_counts()
    default = train.decision.dictionary[majority(counts, counts)]
    truth = np.asarray(test.decision.dictionary, dtype=object)[test.decision_column]
    body: dict = {"train_rows": train.row_count, "eval_rows": test.row_count}
    if rules:
        model = "rules"
        pred, _ = predict_table(rules, test, default)
    else:
        model = "tree"
        params = TreeParams(int(cfg["min_leaf"]), int(cfg["max_depth"]), float(cfg["min_gain"]))
        tree = build_tree(train, params)
        rules = tree_to_rules(tree)
        pred = classify_table(tree, test)
        body["params"] = params.to_dict()
        body["tree_stats"] = {"leaves": tree.n_leaves, "size": tree.size}
    a, b = evaluate_rules(rules, train), evaluate_rules(rules, test)
    per_rule = []
    for sa, sb in zip(a, b):
        ca, cb = sa.metrics.confidence, sb.metrics.confidence
        entry = {
            "id": sa.rule.id,
            "text": sa.rule.render(train.decision.name),
            "train": sa.metrics.to_dict(),
            "eval": sb.metrics.to_dict(),
            "delta_pp": None if ca is None or cb is None else round(float(cb - ca) * 100, 4),
        }
        if sa.rule.expected is not None:
            entry["expected_pct"] = sa.rule.expected
            for key, c in (("train", ca), ("eval", cb)):
                if c is not None:
                    ok = abs(float(c) * 100 - sa.rule.expected) <= REPRODUCED_PP
                    entry[f"{key}_status"] = "reproduced" if ok else "unreconciled"
        per_rule.append(entry)
    hits = int((pred == truth).sum())
    body.update(model=model, default=default, rules=per_rule,
                accuracy={"hits": hits, "rows": test.row_count, "pct": format_percent(hits / test.row_count)})
    text = [f"model: {model}; accuracy on eval set {body['accuracy']['pct']}% ({hits}/{test.row_count})"]
    for e in per_rule:
        text.append(f"  {e['id'] or '-'}: train {e['train']['confidence_pct']} eval {e['eval']['confidence_pct']} "
                    f"delta {e['delta_pp']} pp  {e['text']}")
    _emit("eval", cfg, _report("eval", cfg, body), "\n".join(text))


def cmd_fetch(cfg: dict) -> None:
    digests = fetch_bank(cfg.get("dest") or "data")
    sys.stdout.write(json.dumps({"dest": str(cfg.get("dest") or "data"), "sha256": digests}, indent=2) + "\n")


COMMANDS = {
    "describe": cmd_describe,
    "reduce": cmd_reduce,
    "tree": cmd_tree,
    "rules": cmd_rules,
    "eval": cmd_eval,
    "fetch": cmd_fetch,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="delimited data file (header row required)")
    common.add_argument("--delimiter", help="field delimiter (default ';')")
    common.add_argument("--decision", help="decision column name (default: last column)")
    common.add_argument("--schema", choices=["auto", "bank", "infer"], help="column kinds (default auto)")
    common.add_argument("--bins", help="JSON binning spec {attribute: [cuts...]}")
    common.add_argument("--config", help="JSON file with any of the options below")
    common.add_argument("--out", help="write the report into this directory")
    common.add_argument("--format", choices=["json", "text"])
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="reductminer", description="Rough-set reducts, gain-ratio trees and rule evaluation.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("describe", parents=[common], help="dataset summary")

    r = sub.add_parser("reduce", parents=[common], help="core and reduct")
    r.add_argument("--mode", choices=["absolute", "decision-relative", "decision_relative"])
    r.add_argument("--candidate", help="comma-separated attribute set to verify as a reduct")
    r.add_argument("--threads", type=int, help="scan workers (0 = one per CPU); overrides REDUCTMINER_THREADS")
    r.add_argument("--timing", action="store_true", default=None, help="include wall times (report no longer byte-stable)")

    def tree_flags(sp):
        sp.add_argument("--min-leaf", dest="min_leaf", type=int)
        sp.add_argument("--min-gain", dest="min_gain", type=float)
        sp.add_argument("--max-depth", dest="max_depth", type=int)

    t = sub.add_parser("tree", parents=[common], help="gain-ratio tree and its rules")
    tree_flags(t)

    ru = sub.add_parser("rules", parents=[common], help="evaluate a rule file")
    ru.add_argument("--rules", help="JSON rule file, or builtin:<fixture>")
    ru.add_argument("--min-confidence", dest="min_confidence", type=float)
    ru.add_argument("--min-support", dest="min_support", type=int)
    ru.add_argument("--rank", choices=["confidence", "support", "lift"])
    ru.add_argument("--compare", action="store_true", default=None, help="show expected vs computed accuracy")

    e = sub.add_parser("eval", parents=[common], help="train on --input, evaluate on --eval-input")
    e.add_argument("--eval-input", dest="eval_input", required=False)
    e.add_argument("--rules", help="JSON rule file, or builtin:<fixture>; a tree is built when omitted")
    tree_flags(e)

    f = sub.add_parser("fetch", help="download the UCI bank-marketing files")
    f.add_argument("--dest", default="data")
    f.add_argument("--config", help=argparse.SUPPRESS)
    f.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve(args)
        COMMANDS[args.command](cfg)
    except (UsageError, FileNotFoundError, DatasetError, RuleError, UnknownAttribute, json.JSONDecodeError) as exc:
        print(f"reductminer {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ReductMinerError, ValueError, OSError) as exc:
        print(f"reductminer {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
