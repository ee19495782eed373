"""Command-line surface: train, scatter, spectra, verify-theory, gen-sbm.

Every subcommand exits 0 only when all requested checks succeed; parse and
validation errors print to stderr and exit 2, failed checks exit 1.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

import contextlib

from .config import ConfigView, parse_config
from .datasets import Dataset, SBMSpec, describe, generate_sbm, save_dataset
from .errors import GraphScatError
from .experiment import (
    model_spec_from_config,
    run_experiment,
    run_trained_model,
    train_config_from_config,
    write_attention_ratios,
    write_metrics_csv,
)
from .fixtures import run_verify_suite
from .graph import read_edge_list
from .layers import attention_ratio
from .models import PRESETS, ModelSpec
from .scattering import ABS, cascade
from .spectral import (
    FilterSpec,
    chebyshev_filter,
    gcn_unnormalized,
    lowpass_filter,
    spectral_response,
    wavelet_filter,
)
from .train import SplitMasks, TrainConfig
from .wavelets import WaveletBank


def _load_features(path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(x) for x in line.split(",")])
    return np.asarray(rows, dtype=np.float64)


def _parse_paths(text: str):
    return [tuple(int(x) for x in part.split(",") if x.strip())
            for part in text.split("|")]


@contextlib.contextmanager
def _output(path):
    """File handle for path, or stdout (left open) when path is None."""
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _cmd_train(args) -> int:
    file_flags = ("graph", "features", "labels", "splits")
    given = [getattr(args, r) is not None for r in file_flags]
    if args.config and not any(given):
        run_experiment(args.config, out_dir=args.out_dir)
        return 0
    missing = [f"--{r}" for r, g_ in zip(file_flags, given) if not g_]
    if missing:
        print(f"train: missing {', '.join(missing)} (or use --config alone)",
              file=sys.stderr)
        return 2
    features = _load_features(args.features)
    g = read_edge_list(args.graph, n=features.shape[0])
    labels = np.loadtxt(args.labels, dtype=np.int64).reshape(-1)
    import json
    with open(args.splits, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    ds = Dataset(name="cli", graph=g, features=features, labels=labels,
                 splits=SplitMasks(np.asarray(raw["train"]), np.asarray(raw["val"]),
                                   np.asarray(raw["test"])))
    print(describe(ds))
    if args.config:
        # model.* / train.* settings come from the config; data from the flags
        view = ConfigView(parse_config(args.config))
        spec = model_spec_from_config(view, preset=args.preset)
        tcfg = train_config_from_config(view, seed=args.seed)
    else:
        spec = ModelSpec(preset=args.preset or "sc-gcn")
        tcfg = TrainConfig(seed=args.seed)
    model, result, acc = run_trained_model(ds, spec, tcfg)
    write_metrics_csv(args.out, result.history)
    print(f"test_accuracy: {acc:.4f}")
    if getattr(model, "last_attention", None) is not None:
        zeta = attention_ratio(model.last_attention)
        ratio_path = args.out.rsplit(".", 1)[0] + "_attention_ratios.csv"
        write_attention_ratios(ratio_path, zeta)
        print(f"attention ratios written to {ratio_path}")
    return 0


def _cmd_scatter(args) -> int:
    features = _load_features(args.features)
    g = read_edge_list(args.graph, n=features.shape[0])
    paths = _parse_paths(args.paths)
    bank = WaveletBank(g, K=max((max(p) for p in paths if p), default=0))
    outs = [cascade(bank, p, ABS, features) for p in paths]
    with _output(args.out) as fh:
        header = ["node"]
        for p in paths:
            tag = "p" + "-".join(map(str, p)) if p else "identity"
            header.extend(f"{tag}_c{j}" for j in range(features.shape[1]))
        fh.write(",".join(header) + "\n")
        for v in range(g.n):
            row = [str(v)]
            for U in outs:
                row.extend(f"{x:.10g}" for x in U[v])
            fh.write(",".join(row) + "\n")
    return 0


def _parse_filters(text: str) -> list[tuple[str, FilterSpec]]:
    filters = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        name, _, rest = item.partition(":")
        name = name.strip()
        if name == "gcn":
            filters.append(("gcn", gcn_unnormalized()))
        elif name == "wavelet":
            filters.append((f"wavelet_{int(rest)}", wavelet_filter(int(rest))))
        elif name == "lowpass":
            filters.append((f"lowpass_{int(rest)}", lowpass_filter(int(rest))))
        elif name == "cheb":
            thetas = [float(x) for x in rest.split(",")]
            filters.append(("cheb", chebyshev_filter(thetas)))
        else:
            raise ValueError(f"unknown filter {name!r}")
    return filters


def _cmd_spectra(args) -> int:
    g = read_edge_list(args.graph)
    filters = _parse_filters(args.filters)
    columns = []
    lam = None
    for _, flt in filters:
        lam, resp = spectral_response(g, flt)
        columns.append(resp)
    with _output(args.out) as fh:
        fh.write(",".join(["eigenvalue"] + [name for name, _ in filters]) + "\n")
        for i in range(lam.size):
            fh.write(",".join([f"{lam[i]:.10g}"] +
                              [f"{col[i]:.10g}" for col in columns]) + "\n")
    return 0


def _cmd_verify_theory(args) -> int:
    results = run_verify_suite(tol=args.tol)
    width = max(len(r.name) for r in results)
    failures = 0
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        failures += not r.ok
        print(f"{r.name:<{width}}  {status}  {r.detail}")
    print(f"{len(results) - failures}/{len(results)} fixtures passed")
    return 0 if failures == 0 else 1


def _cmd_gen_sbm(args) -> int:
    spec = SBMSpec(block_sizes=tuple(int(b) for b in args.blocks.split(",")),
                   p_in=args.p_in, p_out=args.p_out,
                   feature_dim=args.feature_dim, noise_scale=args.noise,
                   seed=args.seed)
    ds = generate_sbm(spec)
    save_dataset(ds, args.out)
    print(describe(ds))
    print(f"written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphscat",
        description="Hybrid scattering graph networks: training, scattering "
                    "features, spectral diagnostics, and theory verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a preset on a dataset")
    p.add_argument("--config", help="experiment config file (overrides file flags)")
    p.add_argument("--graph", help="edges.tsv path")
    p.add_argument("--features", help="features.csv path")
    p.add_argument("--labels", help="labels.csv path")
    p.add_argument("--splits", help="splits.json path")
    p.add_argument("--preset", choices=PRESETS, default=None,
                   help="model preset (default sc-gcn, or the config's model.preset)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="metrics.csv", help="metrics CSV path")
    p.add_argument("--out-dir", default=None, help="output directory for --config mode")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("scatter", help="emit scattering features as CSV")
    p.add_argument("--graph", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--paths", required=True,
                   help="wavelet-scale paths, e.g. '1|2|0,1' (scales comma-separated)")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_scatter)

    p = sub.add_parser("spectra", help="measured per-eigenvalue filter multipliers")
    p.add_argument("--graph", required=True)
    p.add_argument("--filters", default="gcn;wavelet:1;wavelet:2;lowpass:3",
                   help="semicolon list: gcn, wavelet:k, lowpass:K, cheb:t0,t1,...")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_spectra)

    p = sub.add_parser("verify-theory", help="run the discriminability fixture suite")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_verify_theory)

    p = sub.add_parser("gen-sbm", help="generate a synthetic block-model dataset")
    p.add_argument("--blocks", default="200,200", help="comma-separated block sizes")
    p.add_argument("--p-in", type=float, default=0.1)
    p.add_argument("--p-out", type=float, default=0.01)
    p.add_argument("--feature-dim", type=int, default=8)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output dataset directory")
    p.set_defaults(func=_cmd_gen_sbm)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GraphScatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
