"""Batch command-line interface.

Commands: estimate, apply, sweep, stitch, synthgen.  Exit codes: 0 on
success, 1 on runtime failure, 2 on usage or spec validation errors.
Parallelism for sweeps is capped by the IMFKIT_THREADS environment
variable (default 1); every command is deterministic given its flags,
inputs and seed (timing fields aside).
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .application import apply_imf
from .errors import ImfkitError, StitchSpecError
from .evaluate import (
    DEFAULT_NC_LIST,
    METHODS,
    completed_tables,
    run_sweep,
    write_sweep_csv,
)
from .fusion import FUSION_CONSTANTS
from .image import decode_image, simulate_overlap, write_png
from .panorama import MIN_OVERLAP_AREA, load_stitch_spec, stitch_hdr
from .synth import CURVE_KINDS, exposure_pair, exposure_triple
from .table import load_tables_json, save_table_csv, save_tables_json


def _versions() -> dict:
    import PIL
    import scipy

    return {
        "imfkit": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "pillow": PIL.__version__,
        "scipy": scipy.__version__,
    }


def cmd_estimate(args: argparse.Namespace) -> int:
    src = decode_image(args.src)
    ref = decode_image(args.ref)
    if args.nc > 0:
        overlap_src, overlap_ref = simulate_overlap(src, ref, args.nc)
    else:
        overlap_src, overlap_ref = src, ref
    tables = completed_tables(
        overlap_src, overlap_ref, args.method, args.nc, force_gc_correct=args.gc_correct
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for c, t in enumerate(tables):
        save_table_csv(t, out / f"imf_{args.method}_c{c}.csv")
    save_tables_json(tables, out / "tables.json")
    print(f"wrote {len(tables)} channel tables to {out}")
    return 0


def _resolve_tables_path(raw: str) -> Path:
    p = Path(raw)
    if p.is_dir():
        p = p / "tables.json"
    if not p.exists():
        raise ImfkitError(f"{p}: table file not found")
    return p


def cmd_apply(args: argparse.Namespace) -> int:
    tables = load_tables_json(_resolve_tables_path(args.tables))
    img = decode_image(args.image)
    mapped = apply_imf(img, tables)
    write_png(mapped, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    nc_list = [int(v) for v in args.nc_list.split(",") if v.strip() != ""]
    records, aggregates = run_sweep(args.pairs, methods, nc_list)
    write_sweep_csv(args.out, records, aggregates)
    print(f"wrote {len(records)} records + {len(aggregates)} aggregates to {args.out}")
    for agg in aggregates:
        print(
            f"  {agg.estimator:4s} n_c={agg.n_c:<3d} "
            f"psnr={agg.psnr:7.3f} ssim={agg.ssim:.4f} t={agg.seconds * 1e3:.1f}ms"
        )
    return 0


def cmd_stitch(args: argparse.Namespace) -> int:
    spec = load_stitch_spec(args.spec)
    images = [decode_image(p) for p in spec.inputs]
    result = stitch_hdr(images, spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_png(result.fused, out / "fused.png")
    written = ["fused.png"]
    if not args.no_intermediates:
        for l, pano in enumerate(result.panoramas):
            write_png(pano, out / f"pano_bench{l}.png")
            written.append(f"pano_bench{l}.png")
        for i, hop in enumerate(result.chain):
            save_tables_json(hop.forward, out / f"imf_hop{i}_forward.json")
            save_tables_json(hop.backward, out / f"imf_hop{i}_backward.json")
    manifest = {
        "command": "stitch",
        "versions": _versions(),
        "inputs": [str(p) for p in spec.inputs],
        "constants": {
            "feather": spec.feather,
            "min_overlap_area": MIN_OVERLAP_AREA,
            "fusion": FUSION_CONSTANTS,
        },
        "outputs": written,
        "timings": result.timings,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {', '.join(written)} and manifest.json to {out}")
    return 0


def cmd_synthgen(args: argparse.Namespace) -> int:
    try:
        h, w = (int(v) for v in args.size.lower().split("x"))
    except ValueError:
        raise ImfkitError(f"--size must look like 128x128, got {args.size!r}")
    rng = np.random.default_rng(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    strength = args.strength if args.strength is not None else {
        "gamma": 0.45, "sigmoid": 6.0, "shift": 0.15
    }[args.curve]
    for i in range(args.count):
        if args.kind == "pair":
            img_a, img_b, curve = exposure_pair(
                rng, h, w, kind=args.curve, strength=strength, noise_sigma=args.noise
            )
            write_png(img_a, out / f"pair{i:04d}_a.png")
            write_png(img_b, out / f"pair{i:04d}_b.png")
            save_table_csv(curve, out / f"pair{i:04d}_curve.csv")
        else:
            images, spec, _ = exposure_triple(rng, h, w, noise_sigma=args.noise)
            names = [f"scene{i:04d}_{l}.png" for l in range(3)]
            for name, img in zip(names, images):
                write_png(img, out / name)
            doc = {
                "inputs": names,
                "overlaps": [
                    {
                        "a_rect": [ov.a_rect.x0, ov.a_rect.y0, ov.a_rect.width, ov.a_rect.height],
                        "b_rect": [ov.b_rect.x0, ov.b_rect.y0, ov.b_rect.width, ov.b_rect.height],
                    }
                    for ov in spec.overlaps
                ],
                "feather": spec.feather,
            }
            with open(out / f"scene{i:04d}_spec.json", "w") as fh:
                json.dump(doc, fh, indent=2)
                fh.write("\n")
    # Record the generator settings so runs can be reproduced bit-exactly.
    meta = {
        "command": "synthgen",
        "versions": _versions(),
        "seed": args.seed,
        "count": args.count,
        "kind": args.kind,
        "curve": args.curve,
        "strength": strength,
        "noise": args.noise,
        "size": f"{h}x{w}",
    }
    with open(out / "synthgen_manifest.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.count} {args.kind}(s) to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imfkit",
        description="Estimate intensity mappings between exposures and stitch HDR panoramas.",
    )
    parser.add_argument("--version", action="version", version=f"imfkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate mapping tables from an image pair")
    p.add_argument("--src", required=True, help="image whose intensities get mapped")
    p.add_argument("--ref", required=True, help="image providing the target exposure")
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--nc", type=int, default=0, help="simulated misalignment in pixels")
    p.add_argument("--gc-correct", action="store_true",
                   help="force the median/slope correction for the gc method")
    p.add_argument("--out", required=True, help="output directory for table files")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("apply", help="apply saved tables to an image")
    p.add_argument("--image", required=True)
    p.add_argument("--tables", required=True, help="tables.json path or its directory")
    p.add_argument("--out", required=True, help="output PNG path")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("sweep", help="misalignment sweep over a directory of pairs")
    p.add_argument("--pairs", required=True, help="directory of <name>_a/<name>_b images")
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--nc-list", default=",".join(str(v) for v in DEFAULT_NC_LIST))
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("stitch", help="stitch differently exposed sub-images")
    p.add_argument("--spec", required=True, help="stitch spec JSON path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-intermediates", action="store_true")
    p.set_defaults(func=cmd_stitch)

    p = sub.add_parser("synthgen", help="generate seeded synthetic test data")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--kind", choices=("pair", "triple"), default="pair")
    p.add_argument("--curve", choices=CURVE_KINDS, default="gamma")
    p.add_argument("--strength", type=float, default=None,
                   help="curve parameter (default depends on the curve kind)")
    p.add_argument("--noise", type=float, default=1.0, help="noise sigma in levels")
    p.add_argument("--size", default="128x128")
    p.set_defaults(func=cmd_synthgen)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StitchSpecError as exc:
        print(f"imfkit: {exc}", file=sys.stderr)
        return 2
    except ImfkitError as exc:
        print(f"imfkit: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
