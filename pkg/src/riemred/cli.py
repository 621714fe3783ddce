"""Command-line front end.

Subcommands: ``generate`` (synthetic datasets to CSV + spec sidecar),
``reduce`` (run one reducer over a CSV), ``mean`` (Frechet mean),
``geodesic`` (distance between two points), ``benchmark`` (the full
protocol grid).

stdout carries data and tables only; diagnostics go to stderr.  Exit
codes: 0 success, 2 usage errors / unknown dataset kind, 3 I/O
failures, 4 disconnected neighborhood graph without --grow-k,
5 solver non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .benchmark import BenchConfig, run_benchmark
from .datasets import (
    LabeledDataset,
    generate,
    load_dataset,
    save_csv,
    save_spec,
    spec_sidecar_path,
    load_spec,
)
from .errors import (
    DisconnectedGraph,
    NoConvergence,
    RiemredError,
    UnknownKind,
)
from .frechet import frechet_mean_arr
from .graph_reducers import (
    grow_to_connected,
    heat_weights,
    isomap_from_graph,
    knn_graph,
    laplacian_embed,
)
from .manifolds import ManifoldSpec, dist_arr
from .supervised import rlda_fit, rlda_transform, rsvm_decision, rsvm_fit
from .tangent_reducers import (
    onpp_fit,
    onpp_transform,
    pga_fit,
    pga_transform,
    rrpca_reduce,
    save_model,
)

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DISCONNECTED = 4
EXIT_NOCONVERGENCE = 5

REDUCE_METHODS = ("pga", "rrpca", "ronpp", "rle", "rlda", "risomap", "rsvm")


def _err(msg: str):
    print("error: %s" % msg, file=sys.stderr)


def _write_embedding(path, coords: np.ndarray):
    coords = np.atleast_2d(coords)
    header = ",".join("y%d" % j for j in range(coords.shape[1]))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in coords:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def _model_path(out_path) -> str:
    stem, _ = os.path.splitext(str(out_path))
    return stem + ".model.json"


def cmd_generate(args) -> int:
    try:
        data = generate(args.kind, args.seed)
    except UnknownKind as e:
        _err(str(e))
        return EXIT_USAGE
    try:
        save_csv(args.out, data)
        save_spec(spec_sidecar_path(args.out), data.spec)
    except OSError as e:
        _err("cannot write output: %s" % e)
        return EXIT_IO
    print("wrote %d points to %s (+ spec sidecar)" % (data.n, args.out),
          file=sys.stderr)
    return 0


def _load_for_reduce(args) -> LabeledDataset:
    return load_dataset(args.input, spec_path=args.spec)


def cmd_reduce(args) -> int:
    try:
        data = _load_for_reduce(args)
    except OSError as e:
        _err("cannot read input: %s" % e)
        return EXIT_IO
    d = data.spec.vec_dim
    n_c = args.components if args.components is not None else min(3, d - 1)
    k = args.k if args.k is not None else min(10, max(3, data.n // 10))
    method = args.method
    model = None
    spectrum = None
    try:
        if method == "pga":
            model = pga_fit(data, n_c)
            coords = pga_transform(model, data)
            spectrum = model.eigenvalues
        elif method == "rrpca":
            model = rrpca_reduce(data, n_c)
            coords = pga_transform(model, data)
            spectrum = model.eigenvalues
        elif method == "ronpp":
            model = onpp_fit(data, n_c, k)
            coords = onpp_transform(model, data)
            spectrum = np.array(
                [model.objective_trace[0], model.objective_trace[-1]]
            )
        elif method == "rlda":
            limit = data.n_classes - 1
            d_out = n_c
            if d_out > limit:
                print(
                    "warning: clamping components from %d to C-1 = %d"
                    % (d_out, limit),
                    file=sys.stderr,
                )
                d_out = limit
            model = rlda_fit(data, d_out)
            coords = rlda_transform(model, data)
            spectrum = model.eigenvalues
        elif method == "rle":
            if args.grow_k:
                g, k_eff = grow_to_connected(data, k)
                if k_eff != k:
                    print("grew k from %d to %d for connectivity" % (k, k_eff),
                          file=sys.stderr)
            else:
                g = knn_graph(data, k)
            emb = laplacian_embed(heat_weights(g), n_c)
            coords = emb.coords
            spectrum = emb.spectrum
        elif method == "risomap":
            if args.grow_k:
                g, k_eff = grow_to_connected(data, k)
                if k_eff != k:
                    print("grew k from %d to %d for connectivity" % (k, k_eff),
                          file=sys.stderr)
            else:
                g = knn_graph(data, k)
            emb = isomap_from_graph(g, n_c)
            coords = emb.coords
            spectrum = emb.spectrum
        elif method == "rsvm":
            model = rsvm_fit(data)
            coords = rsvm_decision(model, data)[:, None]
            spectrum = np.array([model.b])
        else:
            _err("unknown method %r" % method)
            return EXIT_USAGE
    except DisconnectedGraph as e:
        _err("%s (rerun with --grow-k)" % e)
        return EXIT_DISCONNECTED
    except NoConvergence as e:
        _err("solver did not converge: %s" % e)
        return EXIT_NOCONVERGENCE
    except RiemredError as e:
        _err(str(e))
        return 1
    try:
        _write_embedding(args.out, coords)
        if model is not None:
            save_model(_model_path(args.out), model)
    except OSError as e:
        _err("cannot write output: %s" % e)
        return EXIT_IO
    print("spectrum: " + " ".join("%.6g" % v for v in np.atleast_1d(spectrum)))
    return 0


def _load_points(args):
    """Points for the utility commands; the label column is optional."""
    from .datasets import load_matrix_csv
    from .errors import MissingLabelColumn

    try:
        data = load_dataset(args.input, spec_path=args.spec)
        return data.points, data.spec
    except MissingLabelColumn:
        X = load_matrix_csv(args.input)
        spec_path = args.spec
        if spec_path is None:
            candidate = spec_sidecar_path(args.input)
            spec_path = candidate if os.path.exists(candidate) else None
        if spec_path is None:
            spec = ManifoldSpec.euclidean(X.shape[1])
        else:
            spec = load_spec(spec_path)
        return X.reshape((X.shape[0],) + spec.ambient_shape), spec


def cmd_mean(args) -> int:
    try:
        points, spec = _load_points(args)
    except OSError as e:
        _err("cannot read input: %s" % e)
        return EXIT_IO
    try:
        mean = frechet_mean_arr(spec, points)
    except NoConvergence as e:
        _err(str(e))
        return EXIT_NOCONVERGENCE
    flat = mean.ravel()
    print(" ".join("%.12f" % v for v in flat))
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(",".join("f%d" % j for j in range(flat.size)) + "\n")
                fh.write(",".join("%.17g" % v for v in flat) + "\n")
        except OSError as e:
            _err("cannot write output: %s" % e)
            return EXIT_IO
    return 0


def cmd_geodesic(args) -> int:
    try:
        points, spec = _load_points(args)
    except OSError as e:
        _err("cannot read input: %s" % e)
        return EXIT_IO
    if points.shape[0] != 2:
        _err("geodesic expects exactly 2 rows, got %d" % points.shape[0])
        return EXIT_USAGE
    d = dist_arr(spec, points[0], points[1])
    print("%.12f" % d)
    return 0


def _find_real_datasets(directory: str):
    """Real-world category: CSVs from the directory plus synthetic_hd."""
    out = [generate("synthetic_hd", 42)]
    names = {
        "mnist_8x8.csv": "mnist_8x8",
        "wine.csv": "wine",
        "breast_cancer.csv": "breast_cancer",
    }
    for fname, name in names.items():
        path = os.path.join(directory, fname)
        if os.path.exists(path):
            data = load_dataset(path)
            X = data.points
            # per-column standardization; raw feature scales differ wildly
            X = (X - X.mean(axis=0)) / np.maximum(X.std(axis=0), 1e-8)
            out.append(
                LabeledDataset(X, data.labels, data.spec, name=name)
            )
    return out


def cmd_benchmark(args) -> int:
    cfg = BenchConfig()
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = BenchConfig.from_json_dict(json.load(fh))
        except OSError as e:
            _err("cannot read config: %s" % e)
            return EXIT_IO
        except (ValueError, TypeError) as e:
            _err("bad config: %s" % e)
            return EXIT_USAGE
    try:
        datasets = [generate(kind, cfg.seed) for kind in cfg.datasets]
    except UnknownKind as e:
        _err(str(e))
        return EXIT_USAGE
    if args.include_real:
        try:
            datasets.extend(_find_real_datasets(args.include_real))
        except OSError as e:
            _err("cannot read real datasets: %s" % e)
            return EXIT_IO
        except RiemredError as e:
            _err("bad real dataset: %s" % e)
            return EXIT_USAGE
    methods = list(cfg.methods)
    if args.with_rsvm and "RSVM" not in methods:
        methods.append("RSVM")
    report = run_benchmark(datasets, methods, cfg)
    print(report.grid_text())
    try:
        with open(args.out + ".csv", "w") as fh:
            fh.write(report.to_csv())
        with open(args.out + ".json", "w") as fh:
            json.dump(report.to_json_dict(), fh, indent=1)
    except OSError as e:
        _err("cannot write report: %s" % e)
        return EXIT_IO
    ok = any(not np.isnan(r.accuracy) for r in report.rows)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="riemred",
        description="dimensionality reduction for manifold-valued data",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset to CSV")
    g.add_argument("--kind", required=True)
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("reduce", help="fit one reducer and dump the embedding")
    r.add_argument("--method", required=True, choices=REDUCE_METHODS)
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--spec", default=None, help="spec sidecar JSON")
    r.add_argument("--k", type=int, default=None, help="neighborhood size")
    r.add_argument("--components", type=int, default=None)
    r.add_argument("--out", required=True)
    r.add_argument("--grow-k", action="store_true")
    r.set_defaults(func=cmd_reduce)

    m = sub.add_parser("mean", help="Frechet mean of a dataset")
    m.add_argument("--in", dest="input", required=True)
    m.add_argument("--spec", default=None)
    m.add_argument("--out", default=None)
    m.set_defaults(func=cmd_mean)

    d = sub.add_parser("geodesic", help="geodesic distance between two points")
    d.add_argument("--in", dest="input", required=True)
    d.add_argument("--spec", default=None)
    d.set_defaults(func=cmd_geodesic)

    b = sub.add_parser("benchmark", help="run the benchmark grid")
    b.add_argument("--config", default=None, help="BenchConfig overrides (JSON)")
    b.add_argument("--out", required=True, help="report path prefix")
    b.add_argument("--include-real", default=None, metavar="DIR")
    b.add_argument("--with-rsvm", action="store_true")
    b.set_defaults(func=cmd_benchmark)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
