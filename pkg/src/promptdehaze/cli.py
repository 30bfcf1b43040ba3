"""Command-line interface.

Subcommands: synth, prompt, dehaze, fln-apply, motivate, sweep, eval.
Options may come from a JSON --config file; explicit flags win over the
file, which wins over built-in defaults.  Batch commands process files
independently: one bad file is reported and skipped, and the exit code is
nonzero iff anything failed.
"""

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .adapt import AdaptConfig, adapt_pyramid_levels
from .backbone import BackboneConfig, band_rms, decode, dehaze, encode, perturb_level_stats
from .ftx import FtxError, read_ftx, write_ftx
from .haze import AsmParams, DarkChannelConfig, haze_density, synthesize_haze
from .imageio import FORMATS, load_image, save_image
from .metrics import MetricReport, psnr, ssim
from .prompt import PromptConfig, generate_prompt, partition

IMAGE_SUFFIXES = (".png", ".ppm", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")

# Statistic-perturbation grid for the motivate probe.
MOTIVATE_DELTAS = (-0.01, -0.005, 0.0, 0.005, 0.01)


@dataclass
class RunConfig:
    """Effective settings for one invocation; defaults mirror the method's."""

    tau: float = 0.005
    alpha: float = 2.0
    patch_divisor: int = 10
    levels: int = 3
    workers: int = 1
    seed: int = 0
    dark_window: int = 15
    density_threshold: float = 0.6
    saturation_floor: float = 0.05
    format: str = "png"
    # synth-only knobs
    t_mode: str = "constant"
    t_value: float = 0.5
    t_min: float = 0.3
    t_max: float = 0.8
    atmosphere: str = "0.9"
    # motivate-only knob
    stat: str = "std"

    def prompt_config(self) -> PromptConfig:
        return PromptConfig(
            patch_divisor=self.patch_divisor,
            tau=self.tau,
            saturation_floor=self.saturation_floor,
            dark=DarkChannelConfig(self.dark_window, self.density_threshold),
        )

    def adapt_config(self) -> AdaptConfig:
        return AdaptConfig(alpha=self.alpha)

    def backbone_config(self) -> BackboneConfig:
        return BackboneConfig(num_levels=self.levels)


def _effective_config(args: argparse.Namespace) -> RunConfig:
    """defaults < --config file < explicit flags."""
    values = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        known = {f.name for f in fields(RunConfig)}
        unknown = set(loaded) - known
        if unknown:
            raise ValueError(f"--config: unknown keys {sorted(unknown)}")
        values.update(loaded)
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    cfg = RunConfig(**values)
    if cfg.format not in FORMATS:
        raise ValueError(f"--format must be one of {FORMATS}, got {cfg.format!r}")
    if cfg.workers < 1:
        raise ValueError("--workers must be >= 1")
    return cfg


def _parse_atmosphere(text: str) -> np.ndarray:
    parts = [float(p) for p in str(text).split(",")]
    if len(parts) == 1:
        parts = parts * 3
    if len(parts) != 3:
        raise ValueError(f"--atmosphere expects 1 or 3 values, got {text!r}")
    return np.asarray(parts)


def _list_images(path: Path):
    if path.is_dir():
        files = sorted(
            p for p in path.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
        )
        if not files:
            raise ValueError(f"no images found in {path}")
        return files
    return [path]


def _match_ground_truth(stem: str, gt_dir: Path):
    """Pair an input with its reference by stem.

    Pipeline suffixes (`_dehazed`, `_hazy`, `_prompt`) are stripped from the
    input stem; the reference may carry a `_clean` suffix or none.
    """
    bases = [stem]
    current = stem
    while True:
        for tag in ("_dehazed", "_hazy", "_prompt"):
            if current.endswith(tag):
                current = current[: -len(tag)]
                bases.append(current)
                break
        else:
            break
    # try <base>_clean for every stripped form first; a bare stem is only
    # trusted once all pipeline tags are gone (else scene_hazy.png in a
    # mixed directory would pair with itself)
    candidates = [f"{base}_clean" for base in bases] + [bases[-1]]
    for candidate in candidates:
        for suffix in IMAGE_SUFFIXES:
            p = gt_dir / f"{candidate}{suffix}"
            if p.exists():
                return p
    return None


def _write_report(out_dir: Path, stem: str, payload: dict) -> None:
    (out_dir / f"{stem}_report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    lines = [f"{k}={v}" for k, v in sorted(_flatten(payload).items())]
    (out_dir / f"{stem}_report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _flatten(d: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, f"{key}."))
        else:
            flat[key] = v
    return flat


def _run_batch(items, worker, n_workers: int):
    """Run ``worker(item)`` per item, collecting (item, error) failures."""
    failures = []
    results = {}
    if n_workers <= 1:
        for item in items:
            try:
                results[item] = worker(item)
            except Exception as exc:  # per-file isolation
                failures.append((item, str(exc)))
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = {item: pool.submit(worker, item) for item in items}
        for item, fut in futures.items():
            try:
                results[item] = fut.result()
            except Exception as exc:
                failures.append((item, str(exc)))
    return results, failures


def _finish(failures, processed: int) -> int:
    if failures:
        print(f"\n{processed} succeeded, {len(failures)} failed:", file=sys.stderr)
        for item, msg in failures:
            print(f"  {item}: {msg}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    cfg = _effective_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = _list_images(Path(args.input))
    atmosphere = _parse_atmosphere(cfg.atmosphere)
    rng = np.random.default_rng(cfg.seed)

    manifest = []

    def synth_one(path: Path):
        clean = load_image(path)
        h, w = clean.shape[:2]
        entry = {
            "source": str(path),
            "mode": cfg.t_mode,
            "atmosphere": [float(a) for a in atmosphere],
        }
        if cfg.t_mode == "constant":
            t = cfg.t_value
            entry["t"] = float(t)
        elif cfg.t_mode == "per-patch":
            side = max(1, w // cfg.patch_divisor)
            grid = partition((h, w), side)
            t = np.empty((h, w))
            values = []
            for (y0, y1, x0, x1) in grid.regions:
                tv = float(rng.uniform(cfg.t_min, cfg.t_max))
                t[y0:y1, x0:x1] = tv
                values.append(tv)
            entry["t_patch_side"] = side
            entry["t_values"] = values
        elif cfg.t_mode == "smooth":
            yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
            fy, fx = rng.uniform(0.5, 1.5, 2)
            py, px = rng.uniform(0.0, 2 * np.pi, 2)
            wave = 0.5 * (
                np.sin(2 * np.pi * fy * yy / h + py)
                + np.cos(2 * np.pi * fx * xx / w + px)
            )
            t = cfg.t_min + (cfg.t_max - cfg.t_min) * (wave + 1.0) / 2.0
            entry["t_range"] = [float(t.min()), float(t.max())]
        else:
            raise ValueError(f"unknown t mode {cfg.t_mode!r}")
        hazy = synthesize_haze(clean, AsmParams(atmosphere, t))
        stem = path.stem
        hazy_path = save_image(out_dir / f"{stem}_hazy.{cfg.format}", hazy, cfg.format)
        clean_path = save_image(out_dir / f"{stem}_clean.{cfg.format}", clean, cfg.format)
        entry["hazy"] = hazy_path.name
        entry["clean"] = clean_path.name
        manifest.append(entry)
        print(f"synth: {path.name} -> {hazy_path.name}")

    # sequential: the manifest order and rng stream stay reproducible
    failures = []
    for path in files:
        try:
            synth_one(path)
        except Exception as exc:
            failures.append((path, str(exc)))
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return _finish(failures, len(manifest))


def cmd_prompt(args) -> int:
    cfg = _effective_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    source = load_image(args.prompt_source)
    files = _list_images(Path(args.input))

    def prompt_one(path: Path):
        hazy = load_image(path)
        prompt_img, report = generate_prompt(source, hazy, cfg.prompt_config())
        stem = path.stem
        save_image(out_dir / f"{stem}_prompt.{cfg.format}", prompt_img, cfg.format)
        _write_report(out_dir, f"{stem}_prompt", report.as_dict())
        print(
            f"prompt: {path.name} hue_spread={report.hue_spread:.6f} "
            f"branch={report.branch}"
        )

    results, failures = _run_batch(files, prompt_one, cfg.workers)
    return _finish(failures, len(results))


def _trace_summary(traces) -> list:
    out = []
    for i, tr in enumerate(traces):
        name = "base" if i == len(traces) - 1 else f"level{i}"
        out.append(
            {
                "level": name,
                "mean_adapted": int(tr.mean_adapted.sum()),
                "std_adapted": int(tr.std_adapted.sum()),
                "z_scores": [round(float(z), 6) for z in tr.z_scores],
            }
        )
    return out


def cmd_dehaze(args) -> int:
    cfg = _effective_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    source = load_image(args.prompt_source)
    gt_dir = Path(args.gt) if args.gt else None
    files = _list_images(Path(args.input))
    dark_cfg = DarkChannelConfig(cfg.dark_window, cfg.density_threshold)

    def dehaze_one(path: Path):
        hazy = load_image(path)
        result = dehaze(
            hazy, source, cfg.prompt_config(), cfg.adapt_config(), cfg.backbone_config()
        )
        stem = path.stem
        save_image(out_dir / f"{stem}_dehazed.{cfg.format}", result.image, cfg.format)
        payload = {
            "input": path.name,
            "gating": result.report.as_dict(),
            "adaptation": _trace_summary(result.traces),
            "haze_density_in": haze_density(hazy, dark_cfg),
            "haze_density_out": haze_density(result.image, dark_cfg),
        }
        if gt_dir is not None:
            gt_path = _match_ground_truth(stem, gt_dir)
            if gt_path is None:
                raise ValueError(f"no ground truth for {stem} in {gt_dir}")
            gt = load_image(gt_path)
            payload["metrics"] = {
                "psnr": psnr(result.image, gt),
                "ssim": ssim(result.image, gt),
                "psnr_input": psnr(hazy, gt),
                "ssim_input": ssim(hazy, gt),
            }
        _write_report(out_dir, stem, payload)
        print(f"dehaze: {path.name} branch={result.report.branch}")
        return payload

    results, failures = _run_batch(files, dehaze_one, cfg.workers)

    summary = {"n_images": len(results), "n_failed": len(failures)}
    if results:
        summary["mean_haze_density_in"] = float(
            np.mean([r["haze_density_in"] for r in results.values()])
        )
        summary["mean_haze_density_out"] = float(
            np.mean([r["haze_density_out"] for r in results.values()])
        )
        with_metrics = [r["metrics"] for r in results.values() if "metrics" in r]
        if with_metrics:
            for key in ("psnr", "ssim", "psnr_input", "ssim_input"):
                summary[f"mean_{key}"] = float(np.mean([m[key] for m in with_metrics]))
            summary["n_psnr_improved"] = int(
                sum(m["psnr"] > m["psnr_input"] for m in with_metrics)
            )
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    if results:
        print(f"dehaze: processed {len(results)} image(s)")
    return _finish(failures, len(results))


def cmd_fln_apply(args) -> int:
    cfg = _effective_config(args)
    out_path = Path(args.out)
    try:
        feats_x = read_ftx(args.input)
        feats_p = read_ftx(args.prompt_source)
    except FtxError as exc:
        print(f"fln-apply: {exc}", file=sys.stderr)
        return 1
    if len(feats_x) != len(feats_p):
        print(
            f"fln-apply: record count mismatch ({len(feats_x)} vs {len(feats_p)})",
            file=sys.stderr,
        )
        return 1
    try:
        inputs = [np.asarray(f, dtype=np.float64) for f in feats_x]
        prompts = [np.asarray(f, dtype=np.float64) for f in feats_p]
        adapted, traces = adapt_pyramid_levels(inputs, prompts, cfg.adapt_config())
    except ValueError as exc:
        print(f"fln-apply: {exc}", file=sys.stderr)
        return 1
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_ftx(out_path, [a.astype(np.float32) for a in adapted])
    trace_path = out_path.with_suffix(out_path.suffix + ".trace.json")
    trace_path.write_text(
        json.dumps(_trace_summary(traces), indent=2) + "\n", encoding="utf-8"
    )
    print(f"fln-apply: {len(adapted)} record(s) -> {out_path}")
    return 0


def cmd_motivate(args) -> int:
    cfg = _effective_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    img = load_image(args.input)
    bb = cfg.backbone_config()
    pyr = encode(img, bb)

    rows = []
    for level in range(bb.num_levels):
        for delta in MOTIVATE_DELTAS:
            if cfg.stat == "std":
                perturbed = perturb_level_stats(pyr, level, 0.0, delta)
            elif cfg.stat == "mean":
                perturbed = perturb_level_stats(pyr, level, delta, 0.0)
            else:
                raise ValueError(f"--stat must be 'std' or 'mean', got {cfg.stat!r}")
            out = np.clip(decode(perturbed), 0.0, 1.0)
            tag = f"L{level}_d{delta:+.3f}"
            save_image(out_dir / f"motivate_{tag}.{cfg.format}", out, cfg.format)
            rows.append(
                {
                    "level": level,
                    "delta": delta,
                    "band_rms": band_rms(out, level, bb),
                    "decoded_mean": float(out.mean()),
                }
            )
            print(
                f"motivate: level {level} delta {delta:+.3f} "
                f"band_rms {rows[-1]['band_rms']:.6f}"
            )
    with open(out_dir / "curve.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["level", "delta", "band_rms", "decoded_mean"])
        writer.writeheader()
        writer.writerows(rows)
    return 0


def cmd_sweep(args) -> int:
    cfg = _effective_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    candidates = _list_images(Path(args.candidates))
    files = _list_images(Path(args.input))
    gt_dir = Path(args.gt)

    pairs = []
    for path in files:
        gt_path = _match_ground_truth(path.stem, gt_dir)
        if gt_path is None:
            raise ValueError(f"no ground truth for {path.stem} in {gt_dir}")
        pairs.append((load_image(path), load_image(gt_path)))
    if not pairs:
        raise ValueError("sweep: no labeled pairs")

    def score_candidate(cand_path: Path):
        source = load_image(cand_path)
        scores = []
        for hazy, gt in pairs:
            result = dehaze(
                hazy, source, cfg.prompt_config(), cfg.adapt_config(), cfg.backbone_config()
            )
            scores.append((psnr(result.image, gt), ssim(result.image, gt)))
        return {
            "candidate": str(cand_path),
            "mean_psnr": float(np.mean([s[0] for s in scores])),
            "mean_ssim": float(np.mean([s[1] for s in scores])),
        }

    results, failures = _run_batch(candidates, score_candidate, cfg.workers)
    rows = sorted(results.values(), key=lambda r: -r["mean_psnr"])
    table = {
        "seed": cfg.seed,
        "n_pairs": len(pairs),
        "ranking": rows,
        "best": rows[0]["candidate"] if rows else None,
        "mean_over_candidates_psnr": float(np.mean([r["mean_psnr"] for r in rows]))
        if rows
        else None,
        "mean_over_candidates_ssim": float(np.mean([r["mean_ssim"] for r in rows]))
        if rows
        else None,
    }
    (out_dir / "sweep.json").write_text(
        json.dumps(table, indent=2) + "\n", encoding="utf-8"
    )
    with open(out_dir / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["candidate", "mean_psnr", "mean_ssim"])
        writer.writeheader()
        writer.writerows(rows)
    print(f"{'candidate':<40} {'mean_psnr':>10} {'mean_ssim':>10}")
    for r in rows:
        print(f"{Path(r['candidate']).name:<40} {r['mean_psnr']:>10.4f} {r['mean_ssim']:>10.4f}")
    if rows:
        print(f"best: {table['best']}")
        print(f"mean over candidates: psnr {table['mean_over_candidates_psnr']:.4f}")
    return _finish(failures, len(results))


def cmd_eval(args) -> int:
    cfg = _effective_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    gt_dir = Path(args.gt)
    files = _list_images(Path(args.input))
    dark_cfg = DarkChannelConfig(cfg.dark_window, cfg.density_threshold)

    def eval_one(path: Path):
        img = load_image(path)
        gt_path = _match_ground_truth(path.stem, gt_dir)
        if gt_path is None:
            raise ValueError(f"no ground truth for {path.stem} in {gt_dir}")
        gt = load_image(gt_path)
        report = MetricReport(
            psnr=psnr(img, gt),
            ssim=ssim(img, gt),
            haze_density_in=haze_density(img, dark_cfg),
            haze_density_out=haze_density(gt, dark_cfg),
        )
        (out_dir / f"{path.stem}_metrics.json").write_text(report.as_json(), encoding="utf-8")
        (out_dir / f"{path.stem}_metrics.txt").write_text(report.as_keyvalue(), encoding="utf-8")
        print(f"eval: {path.name} psnr={report.psnr:.4f} ssim={report.ssim:.4f}")
        return report

    results, failures = _run_batch(files, eval_one, cfg.workers)
    if results:
        summary = {
            "n_images": len(results),
            "mean_psnr": float(np.mean([r.psnr for r in results.values()])),
            "mean_ssim": float(np.mean([r.ssim for r in results.values()])),
        }
        (out_dir / "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return _finish(failures, len(results))


# ---------------------------------------------------------------------------
# parser


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with option defaults (flags win)")
    parser.add_argument("--tau", type=float, help="hue-spread gate threshold")
    parser.add_argument("--alpha", type=float, help="std adaptation guard bound")
    parser.add_argument("--patch-divisor", dest="patch_divisor", type=int,
                        help="patch side = width // divisor")
    parser.add_argument("--levels", type=int, help="backbone level count")
    parser.add_argument("--workers", type=int, help="parallel workers for batches")
    parser.add_argument("--seed", type=int, help="seed for sampled parameters")
    parser.add_argument("--format", choices=FORMATS, help="output image format")
    parser.add_argument("--dark-window", dest="dark_window", type=int,
                        help="dark channel window (odd)")
    parser.add_argument("--density-threshold", dest="density_threshold", type=float,
                        help="dark-channel threshold for the hazy-region mask")
    parser.add_argument("--saturation-floor", dest="saturation_floor", type=float,
                        help="minimum saturation for hue-spread pixels")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="promptdehaze",
        description="Training-free test-time dehazing via prompt statistics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="render hazy/clean pairs from clean images")
    p.add_argument("--input", required=True, help="clean image file or directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--t-mode", dest="t_mode", choices=("constant", "per-patch", "smooth"))
    p.add_argument("--t-value", dest="t_value", type=float, help="transmission for constant mode")
    p.add_argument("--t-min", dest="t_min", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--atmosphere", help="airlight: one value or R,G,B")
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("prompt", help="generate visual prompts")
    p.add_argument("--input", required=True, help="hazy image file or directory")
    p.add_argument("--prompt-source", dest="prompt_source", required=True,
                   help="haze-free reference image")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("dehaze", help="run the full pipeline")
    p.add_argument("--input", required=True, help="hazy image file or directory")
    p.add_argument("--prompt-source", dest="prompt_source", required=True)
    p.add_argument("--gt", help="ground-truth directory (enables metrics)")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_dehaze)

    p = sub.add_parser("fln-apply", help="adapt externally exported features")
    p.add_argument("--input", required=True, help="FTX file with input features")
    p.add_argument("--prompt-source", dest="prompt_source", required=True,
                   help="FTX file with prompt features")
    p.add_argument("--out", required=True, help="output FTX path")
    _add_common(p)
    p.set_defaults(func=cmd_fln_apply)

    p = sub.add_parser("motivate", help="statistic perturbation probe")
    p.add_argument("--input", required=True, help="image to probe")
    p.add_argument("--out", required=True)
    p.add_argument("--stat", choices=("std", "mean"), help="which statistic to perturb")
    _add_common(p)
    p.set_defaults(func=cmd_motivate)

    p = sub.add_parser("sweep", help="rank prompt-source candidates by mean PSNR")
    p.add_argument("--input", required=True, help="hazy image directory")
    p.add_argument("--gt", required=True, help="ground-truth directory")
    p.add_argument("--candidates", required=True, help="directory of candidate sources")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="reference metrics for processed images")
    p.add_argument("--input", required=True, help="images to score")
    p.add_argument("--gt", required=True, help="ground-truth directory")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, FtxError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
