"""Command-line front end: verify / sweep / extremize / report / accept.

Configuration comes from an INI-style file (one section per experiment plus
[global]) with command-line flags taking precedence.  Exit status is 0
exactly when every selected check passes.  The field-size ceiling is read
from the CONELAB_MAX_FIELD_BYTES environment variable by the grid layer.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys

from .acceptance import run_acceptance
from .geometry import dump_geometry
from .packets import ExtremizerConfig, build_extremizer
from .sweeps import (EXPERIMENTS, ExperimentConfig, SweepResult,
                     lemma_suite_instance, report, run_sweep)


def _parse_delta(text: str) -> float:
    text = text.strip().replace("^", "**")
    if "**" in text:
        base, expo = text.split("**")
        return float(base) ** float(expo)
    return float(text)


def _parse_deltas(text: str) -> tuple:
    parts = text.replace(",", " ").split()
    return tuple(_parse_delta(p) for p in parts)


def _load_config(path: str | None, experiment: str | None) -> dict:
    """Flatten [global] plus the experiment's own section into one dict."""
    if path is None:
        return {}
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(f"config file {path!r} not found")
    merged = {}
    for section in ("global", experiment or ""):
        if section and parser.has_section(section):
            merged.update(parser[section])
    return merged


_CFG_FIELDS = {
    "experiment": str, "n": int, "p": float, "engine": str, "K": float,
    "gamma": float, "m_separation": int, "seed": int, "seeds": int,
    "samples": int, "threads": int, "variant": str, "out_dir": str,
}


def _build_experiment_config(args, file_cfg: dict) -> ExperimentConfig:
    kw = {}
    for key, cast in _CFG_FIELDS.items():
        if key in file_cfg:
            kw[key] = cast(file_cfg[key])
    if "deltas" in file_cfg:
        kw["deltas"] = _parse_deltas(file_cfg["deltas"])
    for key in _CFG_FIELDS:
        flag = getattr(args, key, None)
        if flag is not None:
            kw[key] = flag
    if getattr(args, "deltas", None):
        kw["deltas"] = _parse_deltas(args.deltas)
    if getattr(args, "out", None):
        kw["out_dir"] = args.out
    if "experiment" not in kw:
        raise SystemExit("an experiment must be named (flag or config file)")
    return ExperimentConfig(**kw)


def _add_sweep_flags(sub):
    sub.add_argument("--config", help="INI config file")
    sub.add_argument("--experiment", choices=EXPERIMENTS)
    sub.add_argument("--n", type=int)
    sub.add_argument("--p", type=float)
    sub.add_argument("--delta", dest="deltas",
                     help="delta list, e.g. '2^-3 2^-4 2^-5'")
    sub.add_argument("--engine", choices=("fft", "overlap"))
    sub.add_argument("--seed", type=int)
    sub.add_argument("--seeds", type=int)
    sub.add_argument("--samples", type=int)
    sub.add_argument("--variant")
    sub.add_argument("--threads", type=int)
    sub.add_argument("--out", help="output directory")


def _cmd_verify(args) -> int:
    ok = True
    res = run_acceptance(select=[1], printer=print)
    ok &= all(r.passed for r in res)
    seeds = args.seeds if args.seeds is not None else 10
    worst = {}
    for dim, delta in ((2, 2.0**-4), (3, 2.0**-3)):
        for s in range(seeds):
            for name, r in lemma_suite_instance(delta, dim, s,
                                                gamma=0.5).items():
                worst[name] = max(worst.get(name, 0.0), r)
    for name, r in sorted(worst.items()):
        line_ok = r <= 10.0
        ok &= line_ok
        print(f"[{'PASS' if line_ok else 'FAIL'}] lemma {name}: "
              f"worst ratio {r:.3f} over {seeds} seeds")
    return 0 if ok else 1


def _cmd_sweep(args) -> int:
    cfg = _build_experiment_config(args, _load_config(args.config,
                                                      args.experiment))
    result = run_sweep(cfg)
    paths = report([result], cfg.out_dir)
    print(f"{cfg.experiment}: alpha={result.exponent:.4f} "
          f"expected={result.expected:.4f} residual={result.residual:.4f} "
          f"-> {'PASS' if result.passed else 'FAIL'}")
    for p in paths:
        print(f"wrote {p}")
    return 0 if result.passed else 1


def _cmd_extremize(args) -> int:
    cfg = ExtremizerConfig(kind=args.kind, dim=args.n, p=args.p,
                           delta=_parse_delta(args.delta))
    ext = build_extremizer(cfg)
    out = args.out or "out"
    import os
    os.makedirs(out, exist_ok=True)
    base = os.path.join(out, f"{args.kind}_d{cfg.delta:g}")
    dump_geometry(ext.family.boxes, base + "_tubes.txt")
    dump_geometry(ext.dilated.boxes, base + "_dilated.txt")
    print(f"{args.kind}: {len(ext.family.boxes)} tubes, expected exponent "
          f"{ext.expected_exponent:.4f}")
    print(f"wrote {base}_tubes.txt and {base}_dilated.txt")
    return 0


def _cmd_report(args) -> int:
    """Regenerate plots from a previously written sweep CSV."""
    groups: dict = {}
    with open(args.csv, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["experiment"], row["n"], row["p"], row["engine"])
            groups.setdefault(key, []).append(row)
    results = []
    for key, rows in groups.items():
        by_delta: dict = {}
        for row in rows:
            by_delta.setdefault(float(row["delta"]), []).append(
                float(row["ratio"]))
        points = [(d, sorted(v)[len(v) // 2], 0.0)
                  for d, v in sorted(by_delta.items(), reverse=True)]
        first = rows[0]
        cfg = ExperimentConfig(experiment=key[0], n=int(key[1]),
                               p=float(key[2]), engine=key[3],
                               deltas=tuple(d for d, _, _ in points))
        results.append(SweepResult(cfg, points, rows,
                                   float(first["alpha"]),
                                   float(first["prefactor"]),
                                   float(first["residual"]),
                                   float(first["expected_alpha"])))
    paths = report(results, args.out or "out", stem="report")
    for p in paths:
        print(f"wrote {p}")
    return 0


def _cmd_accept(args) -> int:
    select = None
    if args.only:
        select = [int(x) for x in args.only.replace(",", " ").split()]
    results = run_acceptance(select=select, printer=print)
    failed = [r.ident for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {failed}" if failed else ""))
    return 0 if not failed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="conelab",
        description="numerical experiments for directional square functions")
    parser.add_argument("--accept", action="store_true",
                        help="run the full acceptance suite and exit")
    sub = parser.add_subparsers(dest="command")

    v = sub.add_parser("verify", help="identity and lemma-suite checks")
    v.add_argument("--seeds", type=int)

    s = sub.add_parser("sweep", help="delta sweep with exponent fit")
    _add_sweep_flags(s)

    e = sub.add_parser("extremize", help="build and export an extremizer")
    e.add_argument("--kind", required=True,
                   choices=("bochner_riesz", "sharp_cutoff_A1", "cone_l8_A2"))
    e.add_argument("--n", type=int, default=2)
    e.add_argument("--p", type=float, default=4.0)
    e.add_argument("--delta", required=True)
    e.add_argument("--out")

    r = sub.add_parser("report", help="regenerate plots from a sweep CSV")
    r.add_argument("--csv", required=True)
    r.add_argument("--out")

    a = sub.add_parser("accept", help="run the acceptance criteria")
    a.add_argument("--only", help="criterion ids, e.g. '1,3,8'")

    args = parser.parse_args(argv)
    if args.accept and args.command is None:
        return _cmd_accept(argparse.Namespace(only=None))
    if args.command is None:
        parser.print_help()
        return 2
    return {"verify": _cmd_verify, "sweep": _cmd_sweep,
            "extremize": _cmd_extremize, "report": _cmd_report,
            "accept": _cmd_accept}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
