"""Command-line entry points.

Subcommands: gen-data, augment, train, eval, ablate, gradcheck. Exit codes:
0 success, 1 invalid input or config, 2 numeric failure, 3 property-check
failure. Every subcommand is deterministic under a fixed --seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import metrics
from .augment.pipeline import SM2CConfig, config_from_parts, sm2c
from .core.rng import RngState
from .core.types import Image, LabelMap
from .data.io import load_manifest, save_image_png, save_label_png, save_manifest
from .data.phantom import PhantomSpec, gen_phantom
from .data.splits import Sample, make_splits
from .errors import InvalidInputError, NumericError
from .mpl.config import TrainConfig, apply_overrides, parse_config_file
from .mpl.trainer import RUN_META_NAME, split_id_hash, train
from .net import KERNEL_BACKEND
from .net.arch import Architecture, init_params, load_checkpoint
from .net.model import backward, forward, predict_hard, softmax_ce

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERIC = 2
EXIT_PROPERTY = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract wants 1 for invalid input
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sm2c", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-data", help="generate a phantom dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--labeled", type=int, default=10)
    p.add_argument("--unlabeled", type=int, default=200)
    p.add_argument("--val", type=int, default=10)
    p.add_argument("--test", type=int, default=50)
    p.add_argument("--noise-sigma", type=float, default=None)
    p.add_argument("--hard", action="store_true", help="use the harder, noisier preset")

    p = sub.add_parser("augment", help="preview mixed samples with replay sidecars")
    p.add_argument("--data-dir", required=True, help="dataset directory or manifest path")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=4)
    p.add_argument("--sigma", type=int, default=4)
    p.add_argument("--no-jitter", action="store_true")
    p.add_argument("--no-mix", action="store_true")
    p.add_argument("--no-concat", action="store_true")

    p = sub.add_parser("train", help="run the teacher-student trainer")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--sigma", type=int, default=None)
    p.add_argument("--parts", default=None, help="comma list of enabled parts, e.g. 1,2,3")
    p.add_argument("--technic", type=int, default=None, choices=(1, 2, 3))
    p.add_argument("--scaling-mode", default=None, choices=("concat", "big_batch"))
    p.add_argument("--labeled-only", action="store_true")
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--eta-s", type=float, default=None)
    p.add_argument("--eta-t", type=float, default=None)
    p.add_argument("--batch-labeled", type=int, default=None)
    p.add_argument("--batch-unlabeled", type=int, default=None)
    p.add_argument("--warm-start", default=None)

    p = sub.add_parser("eval", help="score a checkpoint on a split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data-dir", required=True)
    p.add_argument("--split", default="test", choices=("labeled", "validation", "test"))
    p.add_argument("--out-dir", default=None)

    p = sub.add_parser("ablate", help="run the component and sigma sweeps")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--sweep", default="both", choices=("parts", "sigma", "both"))

    p = sub.add_parser("gradcheck", help="verify gradients and the feedback oracle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--tol", type=float, default=1e-4)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen-data": cmd_gen_data,
        "augment": cmd_augment,
        "train": cmd_train,
        "eval": cmd_eval,
        "ablate": cmd_ablate,
        "gradcheck": cmd_gradcheck,
    }
    try:
        return handlers[args.command](args)
    except InvalidInputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


def default_phantom_spec(size: int = 64, hard: bool = False, noise_sigma: float | None = None) -> PhantomSpec:
    """Desk presets. The hard preset narrows the gaps between class intensity
    bands and raises the noise so local intensity alone underdetermines the
    class."""
    if hard:
        spec = PhantomSpec(
            image_size=size,
            intensity_bands=((0.00, 0.20), (0.28, 0.44), (0.50, 0.66), (0.72, 0.88)),
            noise_sigma=0.18 if noise_sigma is None else noise_sigma,
        )
    else:
        spec = PhantomSpec(image_size=size)
        if noise_sigma is not None:
            spec = dataclasses.replace(spec, noise_sigma=noise_sigma)
    return spec


def cmd_gen_data(args) -> int:
    spec = default_phantom_spec(args.size, args.hard, args.noise_sigma)
    counts = (args.labeled, args.unlabeled, args.val, args.test)
    rng = RngState(args.seed)
    total = sum(counts)
    samples = []
    gen_rng = rng.child("phantoms")
    for i in range(total):
        img, lbl = gen_phantom(spec, gen_rng.child(i))
        samples.append(Sample(f"s{i:05d}", img, lbl))
    ds = make_splits(samples, counts, rng.child("splits"))
    manifest = save_manifest(ds, args.out_dir, extra_meta={"phantom_spec": spec.to_dict(), "seed": args.seed})
    print(f"wrote {total} samples to {manifest}")
    return EXIT_OK


def _augment_config(args) -> SM2CConfig:
    return SM2CConfig(
        sigma=1 if args.no_mix else args.sigma,
        concat_enabled=not args.no_concat,
        mix_enabled=not args.no_mix,
        jitter_enabled=not args.no_jitter,
    )


def cmd_augment(args) -> int:
    ds = load_manifest(args.data_dir)
    pool = [s for split in ds.splits().values() for s in split if s.label is not None]
    cfg = _augment_config(args)
    cfg.validate()
    k = cfg.images_per_mix
    if len(pool) < k:
        raise InvalidInputError(f"augment needs at least {k} labeled samples, got {len(pool)}")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    root = RngState(args.seed)
    for n in range(args.count):
        rng = root.child("mix", n)
        picks = rng.choice(len(pool), size=k, replace=False)
        batch = [(pool[int(i)].image, pool[int(i)].label) for i in picks]
        trace: list = []
        result = sm2c(batch, cfg, rng, trace=trace)
        pairs = [result] if isinstance(result, tuple) else result
        tiles = []
        for j, (img, lbl) in enumerate(pairs):
            suffix = f"{n:04d}" if len(pairs) == 1 else f"{n:04d}_t{j}"
            save_image_png(img, out_dir / f"mix_{suffix}_image.png")
            save_label_png(lbl, out_dir / f"mix_{suffix}_label.png")
            tiles.append({"image": f"mix_{suffix}_image.png", "label": f"mix_{suffix}_label.png"})
        sidecar = {
            "seed": args.seed,
            "index": n,
            "sample_ids": [pool[int(i)].sample_id for i in picks],
            "sigma": cfg.sigma,
            "parts": {
                "concat": cfg.concat_enabled,
                "mix": cfg.mix_enabled,
                "jitter": cfg.jitter_enabled,
            },
            "draws": trace,
            "outputs": tiles,
        }
        with open(out_dir / f"mix_{n:04d}.json", "w", encoding="utf-8") as f:
            json.dump(sidecar, f, indent=2, sort_keys=True)
    print(f"wrote {args.count} mixed samples to {out_dir}")
    return EXIT_OK


def resolve_train_config(args) -> TrainConfig:
    """Built-in defaults, then config file, then CLI flags."""
    cfg = TrainConfig()
    if args.config:
        cfg = apply_overrides(cfg, parse_config_file(args.config))
    flag_map = {
        "seed": args.seed,
        "total_iters": args.iters,
        "omega": args.omega,
        "eta_s": args.eta_s,
        "eta_t": args.eta_t,
        "batch_labeled": args.batch_labeled,
        "batch_unlabeled": args.batch_unlabeled,
        "scaling_mode": args.scaling_mode,
        "technic": args.technic,
        "warm_start": args.warm_start,
    }
    overrides = {k: str(v) for k, v in flag_map.items() if v is not None}
    if args.labeled_only:
        overrides["labeled_only"] = "true"
    if args.sigma is not None:
        overrides["sm2c.sigma"] = str(args.sigma)
    cfg = apply_overrides(cfg, overrides)
    if args.parts is not None:
        try:
            parts = {int(p) for p in args.parts.split(",") if p.strip()}
        except ValueError:
            raise InvalidInputError(f"--parts must be a comma list of 1,2,3, got {args.parts!r}") from None
        if not parts <= {1, 2, 3}:
            raise InvalidInputError(f"--parts entries must be in 1,2,3, got {sorted(parts)}")
        cfg = dataclasses.replace(cfg, sm2c=config_from_parts(cfg.sm2c, parts))
    cfg.validate()
    return cfg


def cmd_train(args) -> int:
    cfg = resolve_train_config(args)
    ds = load_manifest(args.data_dir)
    result = train(cfg, ds, out_dir=args.out_dir)
    final = result.log[-1] if result.log else {}
    print(f"finished {cfg.total_iters} iterations; final record: {json.dumps(final, sort_keys=True)}")
    print(f"artifacts in {result.out_dir}")
    return EXIT_OK


def evaluate_split(predict_fn, samples) -> dict:
    records = [
        metrics.evaluate_sample(predict_fn(s), s.label, s.image.spacing, s.sample_id)
        for s in samples
    ]
    return metrics.aggregate(records)


def render_report(report: dict) -> str:
    classes = report["classes"]
    header = f"{'class':<8}" + "".join(f"{c:>16}" for c in classes) + f"{'Mean':>16}"
    lines = [header]
    for key, label in (("dsc", "DSC"), ("hd95", "HD95")):
        cells = []
        for c in classes:
            e = report["per_class"][c]
            cells.append(f"{e[f'{key}_mean']:.4f}({e[f'{key}_std']:.4f})")
        m = report["mean"]
        cells.append(f"{m[f'{key}_mean']:.4f}({m[f'{key}_std']:.4f})")
        lines.append(f"{label:<8}" + "".join(f"{cell:>16}" for cell in cells))
    return "\n".join(lines)


def cmd_eval(args) -> int:
    params = load_checkpoint(args.checkpoint)
    ds = load_manifest(args.data_dir)
    samples = ds.splits()[args.split]
    if not samples:
        raise InvalidInputError(f"split {args.split!r} is empty")
    if params.arch.num_classes != ds.num_classes:
        raise InvalidInputError(
            f"checkpoint predicts {params.arch.num_classes} classes but the dataset "
            f"has {ds.num_classes}"
        )
    report = evaluate_split(lambda s: predict_hard(params, s.image), samples)
    report["checkpoint"] = str(args.checkpoint)
    report["split"] = args.split
    text = render_report(report)
    print(text)
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "report.json", "w", encoding="utf-8") as f:
            json.dump(report, f, indent=2, sort_keys=True)
        with open(out_dir / "report.txt", "w", encoding="utf-8") as f:
            f.write(text + "\n")
    return EXIT_OK


PART_MATRIX: list[tuple[str, set]] = [
    ("baseline", set()),
    ("part1", {1}),
    ("part2", {2}),
    ("part1+2", {1, 2}),
    ("part2+3", {2, 3}),
    ("part1+2+3", {1, 2, 3}),
]


def cmd_ablate(args) -> int:
    ds = load_manifest(args.data_dir)
    base = TrainConfig(seed=args.seed)
    if args.config:
        base = apply_overrides(base, parse_config_file(args.config))
    if args.iters is not None:
        base = dataclasses.replace(base, total_iters=args.iters)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    arms: list[tuple[str, TrainConfig]] = []
    if args.sweep in ("parts", "both"):
        for name, parts in PART_MATRIX:
            arms.append((f"parts_{name}", dataclasses.replace(base, sm2c=config_from_parts(base.sm2c, parts))))
    if args.sweep in ("sigma", "both"):
        for sigma in (1, 2, 3, 4):
            sm2c_cfg = dataclasses.replace(base.sm2c, sigma=sigma, mix_enabled=True,
                                           concat_enabled=True, jitter_enabled=True)
            arms.append((f"sigma_{sigma}", dataclasses.replace(base, sm2c=sm2c_cfg)))

    rows = []
    for name, cfg in arms:
        cfg.validate()
        arm_dir = out_dir / name
        result = train(cfg, ds, out_dir=arm_dir)
        report = evaluate_split(
            lambda s, p=result.eval_params: predict_hard(p, s.image),
            ds.test if ds.test else ds.validation,
        )
        rows.append(
            {
                "arm": name,
                "sigma": cfg.sm2c.sigma,
                "parts": {
                    "concat": cfg.sm2c.concat_enabled,
                    "mix": cfg.sm2c.mix_enabled,
                    "jitter": cfg.sm2c.jitter_enabled,
                },
                "split_hashes": split_id_hash(ds),
                "dsc_mean": report["mean"]["dsc_mean"],
                "hd95_mean": report["mean"]["hd95_mean"],
                "per_class": report["per_class"],
            }
        )
    sweep_report = {"seed": args.seed, "iters": base.total_iters, "rows": rows}
    with open(out_dir / "sweep.json", "w", encoding="utf-8") as f:
        json.dump(sweep_report, f, indent=2, sort_keys=True)
    lines = [f"{'arm':<16}{'sigma':>6}{'DSC':>10}{'HD95':>10}"]
    for r in rows:
        lines.append(f"{r['arm']:<16}{r['sigma']:>6}{r['dsc_mean']:>10.4f}{r['hd95_mean']:>10.4f}")
    text = "\n".join(lines)
    print(text)
    with open(out_dir / "sweep.txt", "w", encoding="utf-8") as f:
        f.write(text + "\n")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    from .testing import feedback_cosine_trial, gradient_check_trial, softmax_properties

    rng = RngState(args.seed)
    failures = []
    for i in range(args.trials):
        rel_err = gradient_check_trial(rng.child("grad", i))
        status = "ok" if rel_err < args.tol else "FAIL"
        print(f"gradcheck trial {i}: max relative error {rel_err:.3e} [{status}]")
        if rel_err >= args.tol:
            failures.append(f"gradient trial {i}: {rel_err:.3e} >= {args.tol}")
    ok, msg = softmax_properties(rng.child("softmax"))
    print(f"softmax properties: {'ok' if ok else 'FAIL ' + msg}")
    if not ok:
        failures.append(msg)
    positives = 0
    for i in range(args.trials):
        cos = feedback_cosine_trial(rng.child("feedback", i))
        print(f"feedback trial {i}: cosine(approx, exact_fd) = {cos:+.4f}")
        positives += cos > 0
    if positives < (args.trials + 1) // 2:
        failures.append(f"feedback cosine positive in only {positives}/{args.trials} trials")
    if failures:
        for f in failures:
            print(f"FAILED: {f}", file=sys.stderr)
        return EXIT_PROPERTY
    print(f"all checks passed (kernel backend: {KERNEL_BACKEND})")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
