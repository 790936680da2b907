"""Command-line entry point: evaluation, decoding, generation, kernel checks.

Every evaluation prints one canonical JSON object on stdout; diagnostics go
to stderr.  Exit status is 0 on success, 1 when a metric is undefined or an
input fails validation, 2 on usage errors and malformed files.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .ctc import StopPolicy, best_path_decode, paragraph_decode, read_lattices, span_decode
from .errors import (
    ConfigurationError,
    FontError,
    FormatError,
    GenerationError,
    GrammarError,
    InvalidLabelError,
    LatticeValidationError,
    SearchBudgetExceeded,
    UndefinedMetricError,
)
from .layout import LayoutSchema, build_graph, parse_layout, postprocess
from .layout.ged import ged_details
from .layout.metrics import TaggedTranscription, dump_transcription, load_transcriptions, map_cer_details
from .segmetrics import WEIGHTINGS, BBox, ScoredPrediction, mean_average_precision
from .textmetrics import aggregate_counts, d_mean, load_eval_pairs, pair_counts
from .tokens import TokenDictionary

WORD_MODE_FLAGS = {"punct-word": "punct_as_word", "punct-attached": "punct_attached"}

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _canonical(value):
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return round(v, 6) if math.isfinite(v) else None
    return value


def report_format(results: dict) -> str:
    """Canonical JSON: sorted keys, floats rounded to 6 decimals, no spaces."""
    return json.dumps(_canonical(results), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _parallel_map(fn: Callable, items: Sequence, jobs: int) -> list:
    """Order-preserving map, in worker processes when ``jobs > 1``."""
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _read_jsonl(path: str) -> list[dict]:
    out = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if line.strip():
                    try:
                        out.append(json.loads(line))
                    except json.JSONDecodeError as exc:
                        raise FormatError(f"{path}:{lineno}: {exc}") from None
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from None
    return out


def _load_schema(spec: str) -> LayoutSchema:
    return LayoutSchema.load(spec)


# -- eval-text ------------------------------------------------------------------


def _text_counts(args):
    pair, mode, nfc = args
    return pair_counts(pair, mode=mode, nfc=nfc)


def cmd_eval_text(ns) -> int:
    pairs = load_eval_pairs(ns.pairs)
    mode = WORD_MODE_FLAGS[ns.word_mode]
    counts = _parallel_map(_text_counts, [(p, mode, ns.nfc) for _, p in pairs], ns.jobs)
    scores = aggregate_counts(counts)
    result = {"cer": scores.cer, "wer": scores.wer}
    records = _read_jsonl(ns.pairs)
    if records and all("n_lines_gt" in r and "n_lines_pred" in r for r in records):
        result["d_mean"] = d_mean((int(r["n_lines_gt"]), int(r["n_lines_pred"])) for r in records)
    print(report_format(result))
    return EXIT_OK


# -- eval-seg -------------------------------------------------------------------


def _box(obj, with_conf: bool):
    try:
        x0, y0, x1, y1 = (int(v) for v in obj["box"])
        box = BBox(x0, y0, x1, y1, obj.get("class", 0))
        return ScoredPrediction(box, float(obj["conf"])) if with_conf else box
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad box record {obj!r}: {exc}") from None


def cmd_eval_seg(ns) -> int:
    records = _read_jsonl(ns.boxes)
    preds: dict = {}
    gts: dict = {}
    for i, rec in enumerate(records):
        for obj in rec.get("gt", []):
            b = _box(obj, False)
            gts.setdefault(b.class_id, [[] for _ in records])[i].append(b)
        for obj in rec.get("pred", []):
            p = _box(obj, True)
            preds.setdefault(p.box.class_id, [[] for _ in records])[i].append(p)
    if not records:
        print(report_format({}))
        return EXIT_OK
    for table in (preds, gts):
        for c in list(preds) + list(gts):
            table.setdefault(c, [[] for _ in records])
    result = {
        "map": mean_average_precision(preds, gts, weighting=ns.weighting),
        "map_50": mean_average_precision(preds, gts, weighting=ns.weighting, thresholds=(0.5,)),
        "map_75": mean_average_precision(preds, gts, weighting=ns.weighting, thresholds=(0.75,)),
    }
    print(report_format(result))
    return EXIT_OK


# -- eval-layout ----------------------------------------------------------------


def _layout_doc(args):
    doc_id, pred, gt, schema = args
    gt_parse = parse_layout(gt.tokens, schema)
    if not gt_parse.ok:
        d = gt_parse.diagnostics[0]
        raise GrammarError(f"ground truth {doc_id!r}: {d.kind} at position {d.position}", gt_parse.diagnostics)
    report = postprocess(pred.tokens, schema)
    conf = pred.confidences or [1.0] * len(pred.tokens)
    fixed_conf = [conf[i] if i is not None else 0.0 for i in report.sources]
    fixed = TaggedTranscription(report.corrected_tokens, fixed_conf)
    g = ged_details(gt_parse.graph, build_graph(fixed.tokens, schema), schema.page)
    try:
        m = map_cer_details(fixed, gt, schema)
        map_part = (m.value * m.weight, m.weight)
    except UndefinedMetricError:
        map_part = (0.0, 0)
    gt_graph = gt_parse.graph
    return {
        "ged": g.distance,
        "norm": gt_graph.n_nodes + gt_graph.n_edges,
        "pages_differ": g.page_count_mismatch,
        "ppe": report.n_ppe,
        "gt_layout": gt.layout_count(schema),
        "map": map_part,
    }


def cmd_eval_layout(ns) -> int:
    schema = _load_schema(ns.schema)
    preds = load_transcriptions(ns.preds)
    gts = dict(load_transcriptions(ns.gts))
    missing = [i for i, _ in preds if i not in gts]
    if missing:
        raise FormatError(f"predictions without ground truth: {missing[:5]}")
    if len(preds) != len(gts):
        raise FormatError("prediction and ground-truth files hold different document sets")
    if not preds:
        print(report_format({}))
        return EXIT_OK
    if any(p.confidences is None for _, p in preds):
        print("note: predictions without confidences are ranked in document order", file=sys.stderr)
    parts = _parallel_map(_layout_doc, [(i, p, gts[i], schema) for i, p in preds], ns.jobs)
    for (doc_id, _), part in zip(preds, parts):
        if part["pages_differ"]:
            print(f"note: {doc_id}: page counts differ, extra pages compared to the null graph", file=sys.stderr)
    norm = sum(p["norm"] for p in parts)
    layout = sum(p["gt_layout"] for p in parts)
    chars = sum(p["map"][1] for p in parts)
    if norm == 0 or layout == 0 or chars == 0:
        raise UndefinedMetricError("ground truth holds no layout entities or no characters")
    result = {
        "loer": sum(p["ged"] for p in parts) / norm,
        "map_cer": sum(p["map"][0] for p in parts) / chars,
        "pper": sum(p["ppe"] for p in parts) / layout,
    }
    print(report_format(result))
    return EXIT_OK


# -- decode ---------------------------------------------------------------------


def cmd_decode(ns) -> int:
    dictionary = TokenDictionary(tuple(ns.alphabet))
    lattices = read_lattices(ns.lattices)
    stem = Path(ns.lattices).stem
    lines = []
    if ns.mode == "line":
        for k, lat in enumerate(lattices):
            lines.append({"id": f"{stem}:{k}", "text": best_path_decode(lat, dictionary).text})
    elif ns.mode == "span":
        for k, lat in enumerate(lattices):
            lines.append({"id": f"{stem}:{k}", "text": span_decode(lat, dictionary)})
    else:
        policy = StopPolicy(ns.policy, ns.l_max)
        stop = None
        if ns.policy == "learned":
            if not ns.stop_probs:
                raise UsageError("--policy learned needs --stop-probs")
            stop = read_lattices(ns.stop_probs)[0]
        res = paragraph_decode(lattices, dictionary, policy, stop)
        lines.append({"id": stem, "lines_used": res.lines_used, "text": res.text})
    out = "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in lines)
    if ns.out:
        Path(ns.out).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    return EXIT_OK


# -- gen ------------------------------------------------------------------------


def _gen_one(args):
    from .syndoc import augment, generate_document

    seed, sheet, corpus, lines, template, do_augment = args
    rng = np.random.default_rng(seed)
    doc = generate_document(template, lines, sheet, corpus, rng=rng)
    image = augment(doc.image, rng=rng) if do_augment else doc.image
    return image, doc.gt_tokens.tokens, doc.line_count


def cmd_gen(ns) -> int:
    from .syndoc import LineCorpus, StyleSheet, write_image

    sheet = StyleSheet.load(ns.stylesheet)
    corpus = LineCorpus.from_jsonl(ns.corpus) if ns.corpus else LineCorpus.builtin(sheet, seed=ns.seed)
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    seeds = np.random.SeedSequence(ns.seed).spawn(ns.count)
    template = tuple(ns.template) if ns.template else None
    jobs = [(s, sheet, corpus, ns.lines, template, ns.augment) for s in seeds]
    results = _parallel_map(_gen_one, jobs, ns.jobs)
    suffix = ".png" if ns.png else ".pgm"
    total = 0
    with open(out / "gt.jsonl", "w", encoding="utf-8") as fh:
        for k, (image, tokens, n_lines) in enumerate(results):
            doc_id = f"doc_{k:05d}"
            write_image(out / f"{doc_id}{suffix}", image)
            fh.write(dump_transcription(doc_id, TaggedTranscription(tokens)) + "\n")
            total += n_lines
    print(report_format({"documents": ns.count, "lines": total}))
    return EXIT_OK


# -- kernel-check ---------------------------------------------------------------


def cmd_kernel_check(ns) -> int:
    from .kernels.check import CHECKS, run_checks

    unknown = [n for n in ns.only or [] if n not in CHECKS]
    if unknown:
        raise UsageError(f"unknown checks {unknown}; available: {sorted(CHECKS)}")
    results = run_checks(ns.seed, ns.only)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}", file=sys.stderr)
    print(report_format({r.name: r.passed for r in results}))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# -- parser ---------------------------------------------------------------------


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="docrec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval-text", help="CER/WER (and d_mean) over a JSONL pair file")
    p.add_argument("pairs", help='JSONL of {"id", "gt", "pred"} (optional "n_lines_gt", "n_lines_pred")')
    p.add_argument("--word-mode", choices=sorted(WORD_MODE_FLAGS), default="punct-word")
    p.add_argument("--nfc", action="store_true", help="NFC-normalize both sides first")
    p.add_argument("--jobs", type=_positive, default=1)
    p.set_defaults(func=cmd_eval_text)

    p = sub.add_parser("eval-seg", help="box mAP over IoU thresholds 0.50:0.95")
    p.add_argument("boxes", help='JSONL of {"image", "gt": [{box, class}], "pred": [{box, class, conf}]}')
    p.add_argument("--weighting", choices=WEIGHTINGS, required=True, help="per-class weights for the mean")
    p.set_defaults(func=cmd_eval_seg)

    p = sub.add_parser("eval-layout", help="LOER, mAP_CER and PPER over tagged transcriptions")
    p.add_argument("preds", help='JSONL of {"id", "tokens", "conf"?}')
    p.add_argument("gts", help='JSONL of {"id", "tokens"}')
    p.add_argument("--schema", required=True, help="schema JSON path, builtin:read or builtin:rimes")
    p.add_argument("--jobs", type=_positive, default=1)
    p.set_defaults(func=cmd_eval_layout)

    p = sub.add_parser("decode", help="best-path decoding of LATT/JSON lattices")
    p.add_argument("lattices")
    p.add_argument("--alphabet", required=True, help="characters in lattice column order (blank is last)")
    p.add_argument("--mode", choices=("line", "span", "paragraph"), default="line")
    p.add_argument("--policy", choices=("fixed", "early", "learned"), default="early")
    p.add_argument("--l-max", type=_positive, default=30)
    p.add_argument("--stop-probs", help="(n, 2) lattice of [p_stop, p_continue] for --policy learned")
    p.add_argument("--out", help="write JSONL here instead of stdout")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("gen", help="synthetic documents as PGM/PNG plus gt.jsonl")
    p.add_argument("--stylesheet", default="builtin:read", help="style sheet JSON, builtin:read or builtin:rimes")
    p.add_argument("--corpus", help='JSONL of {"text", "class"}; default: built-in word lines')
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--count", type=_positive, default=1)
    p.add_argument("--lines", type=_positive, default=30, help="curriculum line bound l")
    p.add_argument("--template", type=_positive, nargs=2, metavar=("H", "W"))
    p.add_argument("--augment", action="store_true")
    p.add_argument("--png", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=_positive, default=1)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("kernel-check", help="run the kernel invariant and gradient suite")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--only", nargs="+", metavar="CHECK")
    p.set_defaults(func=cmd_kernel_check)
    return parser


def run(argv: Iterable[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(None if argv is None else list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return ns.func(ns)
    except (UsageError, FormatError, LatticeValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        UndefinedMetricError,
        GrammarError,
        ConfigurationError,
        SearchBudgetExceeded,
        InvalidLabelError,
        GenerationError,
        FontError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
