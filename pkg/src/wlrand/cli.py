"""Command-line front end.

Subcommands: ``score``, ``merge``, ``sweep``, ``features``, ``oracle``.
Reports are JSON (sorted keys, no timestamps) and curves are CSV, so
re-running a command on the same inputs reproduces its output byte for
byte. Every report echoes the effective configuration and the SHA-256 of
each input file.

Exit codes: 0 success, 2 validation failure, 3 resource cap exceeded,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .compare import DEFAULT_EXEMPLAR_CAP, MEASURES, MeasureConfig
from .crisp import crisp_scores
from .features import (
    DEFAULT_BINS,
    DEFAULT_SCALES,
    DEFAULT_SIGNATURE_SIZE,
    FeatureFormatError,
    hc_features,
    load_feature_map,
    save_feature_map,
)
from .grid import (
    CrispLabels,
    DimensionError,
    GridFormatError,
    SegmentMap,
    WeakLabels,
    load_grid,
    load_segment_map,
    validate_pair,
)
from .merge import INDEX_NAMES, MergeTraceError, best_candidate, greedy_merge, score_trace
from .wl_index import (
    DEFAULT_NAIVE_CAP,
    MODES,
    DegenerateLabelsError,
    PairCountCapError,
    naive_pair_counts,
    pair_counts,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CAP = 3
EXIT_INTERNAL = 4


class CliError(Exception):
    def __init__(self, code: int, reason: str, message: str):
        super().__init__(message)
        self.code = code
        self.reason = reason


@dataclass
class RunConfig:
    command: str
    seg: str | None = None
    must_link: str | None = None
    cannot_link: str | None = None
    crisp: str | None = None
    features: str | None = None
    features_payload: str | None = None
    image: str | None = None
    measure: str = "euclid-mean"
    measures: list[str] = field(default_factory=lambda: ["euclid-mean"])
    mode: str = "literal"
    connectivity: int = 4
    downsample: int = 1
    scales: list[int] = field(default_factory=lambda: list(DEFAULT_SCALES))
    normalize: bool = True
    bins: int = DEFAULT_BINS
    signature_size: int = DEFAULT_SIGNATURE_SIZE
    exemplar_cap: int = DEFAULT_EXEMPLAR_CAP
    oracle_cap: int = DEFAULT_NAIVE_CAP
    out: str | None = None
    curves_dir: str | None = None

    def measure_config(self) -> MeasureConfig:
        return MeasureConfig(
            bins=self.bins, signature_size=self.signature_size, exemplar_cap=self.exemplar_cap
        )


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _inputs(cfg: RunConfig, names) -> dict:
    out = {}
    for name in names:
        path = getattr(cfg, name)
        if path is not None:
            out[name] = {"path": path, "sha256": _digest(path)}
    return out


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _base_report(cfg: RunConfig, input_names) -> dict:
    return {"tool": "wlrand", "version": __version__, "config": asdict(cfg), "inputs": _inputs(cfg, input_names)}


def _load_seg(cfg: RunConfig) -> SegmentMap:
    try:
        return load_segment_map(cfg.seg)
    except (OSError, ValueError) as exc:
        raise CliError(EXIT_VALIDATION, "bad_segment_map", str(exc)) from None


def _load_weak(cfg: RunConfig, shape) -> WeakLabels:
    try:
        ml = load_grid(cfg.must_link) if cfg.must_link else None
        cl = load_grid(cfg.cannot_link) if cfg.cannot_link else None
        if ml is None:
            ml = np.zeros(cl.shape if cl is not None else shape, dtype=np.int64)
        if cl is None:
            cl = np.zeros(ml.shape, dtype=np.int64)
        return WeakLabels(ml, cl)
    except (OSError, ValueError) as exc:
        raise CliError(EXIT_VALIDATION, "bad_weak_labels", str(exc)) from None


def _load_crisp(cfg: RunConfig) -> CrispLabels | None:
    if not cfg.crisp:
        return None
    try:
        return CrispLabels(load_grid(cfg.crisp))
    except (OSError, ValueError) as exc:
        raise CliError(EXIT_VALIDATION, "bad_crisp_labels", str(exc)) from None


def _load_features(cfg: RunConfig):
    header = Path(cfg.features)
    payload = Path(cfg.features_payload) if cfg.features_payload else header.with_suffix(".bin")
    cfg.features_payload = str(payload)
    try:
        return load_feature_map(header, payload)
    except (OSError, FeatureFormatError) as exc:
        raise CliError(EXIT_VALIDATION, "bad_features", str(exc)) from None


def _validated(cfg: RunConfig, seg: SegmentMap, wl: WeakLabels, crisp) -> dict:
    report = validate_pair(seg, wl)
    if crisp is not None and crisp.shape != seg.shape:
        report.valid = False
        report.errors.append(f"dimension mismatch: segment map {seg.shape} vs crisp labels {crisp.shape}")
    if not report.valid:
        raise CliError(EXIT_VALIDATION, "validation_failed", "; ".join(report.errors))
    return report.as_dict()


def cmd_score(cfg: RunConfig) -> dict:
    seg = _load_seg(cfg)
    has_weak = bool(cfg.must_link or cfg.cannot_link)
    crisp = _load_crisp(cfg)
    if not has_weak and crisp is None:
        raise CliError(EXIT_VALIDATION, "no_labels", "give weak labels and/or crisp labels")
    doc = _base_report(cfg, ["seg", "must_link", "cannot_link", "crisp"])
    if has_weak:
        wl = _load_weak(cfg, seg.shape)
        doc["validation"] = _validated(cfg, seg, wl, crisp)
        counts = pair_counts(seg, wl, cfg.mode)
        if counts.total == 0:
            raise CliError(EXIT_VALIDATION, "degenerate_labels", "a + b + c + d = 0")
        doc["wl_rand"] = (counts.a + counts.b) / counts.total
        doc["pair_counts"] = counts.as_dict()
        doc["mode"] = cfg.mode
    if crisp is not None:
        if crisp.shape != seg.shape:
            raise CliError(EXIT_VALIDATION, "validation_failed", "crisp labels do not match the segment map")
        doc["crisp"] = crisp_scores(seg, crisp).as_dict()
    return doc


def cmd_merge(cfg: RunConfig) -> str:
    seg = _load_seg(cfg)
    fm = _load_features(cfg)
    if fm.shape != seg.shape:
        raise CliError(EXIT_VALIDATION, "validation_failed", "feature map does not match the segment map")
    trace = greedy_merge(seg, fm, cfg.measure, cfg.connectivity, cfg.measure_config())
    doc = json.loads(trace.to_json(cfg.seg))
    doc.update(_base_report(cfg, ["seg", "features", "features_payload"]))
    return _dump(doc)


def _curve_csv(scores) -> str:
    cols = list(scores.indices)
    lines = [",".join(["level"] + cols)]
    for row in scores.rows:
        lines.append(",".join([str(row.level)] + [repr(float(row.value(c))) for c in cols]))
    return "\n".join(lines) + "\n"


def cmd_sweep(cfg: RunConfig) -> dict:
    seg = _load_seg(cfg)
    fm = _load_features(cfg)
    wl = _load_weak(cfg, seg.shape)
    crisp = _load_crisp(cfg)
    validation = _validated(cfg, seg, wl, crisp)
    if fm.shape != seg.shape:
        raise CliError(EXIT_VALIDATION, "validation_failed", "feature map does not match the segment map")
    for name in cfg.measures:
        if name not in MEASURES:
            raise CliError(EXIT_VALIDATION, "unknown_measure", f"unknown measure {name!r}")
    doc = _base_report(cfg, ["seg", "features", "features_payload", "must_link", "cannot_link", "crisp"])
    doc["validation"] = validation
    board = []
    curves = {}
    for name in cfg.measures:
        trace = greedy_merge(seg, fm, name, cfg.connectivity, cfg.measure_config())
        scores = score_trace(trace, wl, crisp, cfg.mode)
        best = {index: best_candidate(scores, index)[0] for index in scores.indices}
        board.append(
            {
                "measure": name,
                "wl_rand_mean": scores.mean_wl_rand,
                "wl_rand_std": scores.std_wl_rand,
                "wl_rand_max": float(scores.column("wl_rand").max()),
                "best_level": best,
                "levels": len(scores.rows),
            }
        )
        curves[name] = _curve_csv(scores)
    doc["leaderboard"] = board
    doc["curves"] = {}
    if cfg.curves_dir:
        out_dir = Path(cfg.curves_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in curves.items():
            path = out_dir / f"curve_{name}.csv"
            path.write_text(text, encoding="utf-8")
            doc["curves"][name] = str(path)
    return doc


def _load_image(path) -> np.ndarray:
    try:
        return load_grid(path).astype(np.float64)
    except (OSError, ValueError) as exc:
        raise CliError(EXIT_VALIDATION, "bad_image", str(exc)) from None


def cmd_features(cfg: RunConfig) -> dict:
    if not cfg.out:
        raise CliError(EXIT_VALIDATION, "missing_output", "features needs --out HEADER.json")
    img = _load_image(cfg.image)
    try:
        fm = hc_features(img, tuple(cfg.scales), cfg.downsample, cfg.normalize)
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, "bad_parameters", str(exc)) from None
    header = Path(cfg.out)
    payload = header.with_suffix(".bin")
    save_feature_map(header, payload, fm)
    doc = _base_report(cfg, ["image"])
    doc["outputs"] = {
        "header": {"path": str(header), "sha256": _digest(header)},
        "payload": {"path": str(payload), "sha256": _digest(payload)},
    }
    doc["channels"] = [f"lacunarity_{s}" for s in cfg.scales] + ["sobel"]
    doc["shape"] = [fm.height, fm.width, fm.channels]
    return doc


def cmd_oracle(cfg: RunConfig) -> dict:
    seg = _load_seg(cfg)
    wl = _load_weak(cfg, seg.shape)
    doc = _base_report(cfg, ["seg", "must_link", "cannot_link"])
    doc["validation"] = _validated(cfg, seg, wl, None)
    results = {}
    passed = True
    for mode in MODES:
        fast = pair_counts(seg, wl, mode)
        try:
            naive = naive_pair_counts(seg, wl, mode, cap=cfg.oracle_cap)
        except PairCountCapError as exc:
            raise CliError(EXIT_CAP, "cap_exceeded", str(exc)) from None
        ok = fast == naive
        passed = passed and ok
        results[mode] = {"fast": fast.as_dict(), "naive": naive.as_dict(), "match": ok}
    doc["modes"] = results
    doc["pass"] = passed
    return doc


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _name_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wlrand", description="Weakly-labeled Rand index scoring and superpixel-merge evaluation."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def seg_arg(p):
        p.add_argument("--seg", required=True, help="segment map (.pgm 16-bit P5 or .csv)")

    def weak_args(p, required=False):
        p.add_argument("--must-link", required=required, help="must-link label grid (0 = unlabeled)")
        p.add_argument("--cannot-link", required=required, help="cannot-link label grid (0 = unlabeled)")

    def mode_arg(p):
        p.add_argument("--mode", choices=MODES, default="literal", help="cannot-link term reading (default: literal)")

    def out_arg(p, help_text="output path (default: stdout)"):
        p.add_argument("--out", help=help_text)

    def feature_args(p):
        p.add_argument("--features", required=True, help="feature header JSON")
        p.add_argument("--features-payload", help="raw float32 payload (default: header with .bin suffix)")
        p.add_argument("--connectivity", type=int, choices=(4, 8), default=4, help="pixel connectivity (default: 4)")
        p.add_argument("--bins", type=int, default=DEFAULT_BINS, help=f"histogram bins (default: {DEFAULT_BINS})")
        p.add_argument(
            "--signature-size",
            type=int,
            default=DEFAULT_SIGNATURE_SIZE,
            help=f"EMD signature clusters (default: {DEFAULT_SIGNATURE_SIZE})",
        )
        p.add_argument(
            "--exemplar-cap",
            type=int,
            default=DEFAULT_EXEMPLAR_CAP,
            help=f"max exemplars per bag for edist/mi (default: {DEFAULT_EXEMPLAR_CAP})",
        )

    p = sub.add_parser("score", help="score one segmentation against weak and/or crisp labels")
    seg_arg(p)
    weak_args(p)
    p.add_argument("--crisp", help="crisp class grid (0 = unlabeled)")
    mode_arg(p)
    out_arg(p)

    p = sub.add_parser("merge", help="greedy hierarchical merge; writes a JSON trace")
    seg_arg(p)
    feature_args(p)
    p.add_argument("--measure", choices=MEASURES, default="euclid-mean", help="comparison measure")
    out_arg(p)

    p = sub.add_parser("sweep", help="merge under several measures and score every level")
    seg_arg(p)
    feature_args(p)
    weak_args(p, required=True)
    p.add_argument("--crisp", help="crisp class grid for the baseline indices")
    p.add_argument(
        "--measures",
        type=_name_list,
        default=["euclid-mean"],
        help=f"comma-separated measures from {','.join(MEASURES)} (default: euclid-mean)",
    )
    mode_arg(p)
    p.add_argument("--curves-dir", help="directory for per-measure CSV curves (level, index...)")
    out_arg(p, "leaderboard JSON path (default: stdout)")

    p = sub.add_parser("features", help="compute lacunarity + Sobel features from a grayscale image")
    p.add_argument("--image", required=True, help="grayscale image (.pgm or .csv)")
    p.add_argument("--downsample", type=int, default=1, help="box-mean downsample factor (default: 1)")
    p.add_argument("--scales", type=_int_list, default=list(DEFAULT_SCALES), help="lacunarity window sizes (default: 2,4,8)")
    p.add_argument("--no-normalize", dest="normalize", action="store_false", help="skip per-channel z-scoring")
    p.add_argument("--out", required=True, help="feature header path; payload goes next to it with .bin suffix")
    p.add_argument("--report", help="report JSON path (default: stdout)")

    p = sub.add_parser("oracle", help="compare fast pair counts with the quadratic enumeration")
    seg_arg(p)
    weak_args(p, required=True)
    p.add_argument("--cap", dest="oracle_cap", type=int, default=DEFAULT_NAIVE_CAP, help="max labeled pixels")
    out_arg(p)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    return RunConfig(**fields)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = _config_from_args(args)
    report_path = getattr(args, "report", None) if cfg.command == "features" else cfg.out
    try:
        if cfg.command == "score":
            text = _dump(cmd_score(cfg))
        elif cfg.command == "merge":
            text = cmd_merge(cfg)
        elif cfg.command == "sweep":
            text = _dump(cmd_sweep(cfg))
        elif cfg.command == "features":
            text = _dump(cmd_features(cfg))
        else:
            doc = cmd_oracle(cfg)
            text = _dump(doc)
            if not doc["pass"]:
                _emit(text, report_path)
                return EXIT_INTERNAL
    except CliError as exc:
        sys.stdout.write(_dump({"error": exc.reason, "message": str(exc), "exit_code": exc.code}))
        return exc.code
    except (DimensionError, GridFormatError, DegenerateLabelsError) as exc:
        sys.stdout.write(_dump({"error": "validation_failed", "message": str(exc), "exit_code": EXIT_VALIDATION}))
        return EXIT_VALIDATION
    except MergeTraceError as exc:
        sys.stdout.write(_dump({"error": "invariant_violation", "message": str(exc), "exit_code": EXIT_INTERNAL}))
        return EXIT_INTERNAL
    _emit(text, report_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
