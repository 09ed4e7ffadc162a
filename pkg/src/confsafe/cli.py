"""Command-line surface: generate, train, calibrate, evaluate, sweep, region.

Every command is a pure function of its input files and flags. A manifest
JSON is written beside the primary output recording the resolved
configuration, the input and output paths and their SHA-256 checksums;
`confsafe rerun MANIFEST` re-executes the recorded command and verifies
that the outputs come out byte-identical.

Exit codes: 0 success, 2 input or validation error, 3 numerical
non-convergence.
"""

import argparse
import hashlib
import json
import os
import sys

from . import conformal, datasets, evaluation, kernels, models, training
from .exceptions import ConvergenceError, InputError


def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_text(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_manifest(command, config, inputs, outputs):
    manifest = {
        "command": command,
        "config": config,
        "inputs": {path: _sha256(path) for path in inputs},
        "outputs": {path: _sha256(path) for path in outputs},
    }
    path = f"{outputs[0]}.manifest.json"
    _write_text(path, json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    return path


def _parse_pair(text, flag):
    parts = text.split(",")
    if len(parts) != 2:
        raise InputError(f"{flag} expects two comma-separated numbers, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise InputError(f"{flag} expects numbers, got {text!r}") from None


def _kernel_from_args(args, train_X=None):
    if args.kernel == "linear":
        return kernels.LinearKernel()
    if args.kernel == "polynomial":
        return kernels.PolynomialKernel(args.degree, args.scale, args.offset)
    if args.gamma is None:
        gamma = kernels.default_gamma(train_X.shape[1])
    elif args.gamma == "median":
        gamma = kernels.median_heuristic_gamma(train_X, seed=args.seed)
    else:
        try:
            gamma = float(args.gamma)
        except ValueError:
            raise InputError(f"--gamma expects a number or 'median', got {args.gamma!r}") from None
    return kernels.GaussianKernel(gamma)


def _cmd_generate(args):
    if args.generator == "two-gaussians":
        spec = datasets.GaussianSpec(
            mean_safe=_parse_pair(args.mean_safe, "--mean-safe"),
            mean_unsafe=_parse_pair(args.mean_unsafe, "--mean-unsafe"),
            cov_scale_safe=args.cov_scale_safe,
            cov_scale_unsafe=args.cov_scale_unsafe,
            outlier_prob=args.outlier_prob,
            seed=args.seed,
        )
        data = datasets.gen_two_gaussians(args.n, spec)
        config = {"generator": "two-gaussians", "n": args.n, **_spec_dict(spec)}
    else:
        spec = datasets.DnsSurrogateSpec(
            n_windows=args.windows,
            tunnel_fraction=args.tunnel_fraction,
            packets_per_window=args.packets,
            intensity=args.intensity,
            seed=args.seed,
        )
        data = datasets.gen_dns_surrogate(spec)
        config = {"generator": "dns-surrogate", **_spec_dict(spec)}
    datasets.save_csv(data, args.out)
    _write_manifest("generate", config, [], [args.out])
    return 0


def _spec_dict(spec):
    doc = {}
    for name in spec.__dataclass_fields__:
        value = getattr(spec, name)
        doc[name] = list(value) if isinstance(value, tuple) else value
    return doc


def _cmd_train(args):
    data = datasets.load_csv(args.data)
    kernel = _kernel_from_args(args, data.X)
    cfg = training.TrainConfig(
        classifier_kind=args.kind,
        kernel=kernel,
        C=args.C,
        tolerance=args.tolerance,
        max_iterations=args.max_iterations,
        learning_rate=args.learning_rate,
        seed=args.seed,
    )
    model = training.train_model(data, cfg)
    model.save(args.out)
    _write_manifest("train", {"data": args.data, **cfg.to_metadata()},
                    [args.data], [args.out])
    return 0


def _cmd_calibrate(args):
    model = models.load_model(args.model)
    calib = datasets.load_csv(args.calib)
    profile = conformal.calibrate(model, calib)
    profile.save(args.out)
    _write_manifest("calibrate", {"model": args.model, "calib": args.calib},
                    [args.model, args.calib], [args.out])
    return 0


def _cmd_evaluate(args):
    model = models.load_model(args.model)
    profile = conformal.load_profile(args.profile)
    test = datasets.load_csv(args.test)
    report = evaluation.evaluate(model, profile, args.epsilon, test)
    _write_text(args.out, evaluation.reports_to_csv([report]))
    outputs = [args.out]
    if args.json_out:
        _write_text(args.json_out, evaluation.reports_to_json([report]))
        outputs.append(args.json_out)
    config = {"model": args.model, "profile": args.profile, "test": args.test,
              "epsilon": args.epsilon, "json_out": args.json_out}
    _write_manifest("evaluate", config, [args.model, args.profile, args.test], outputs)
    return 0


def _parse_grid(text):
    try:
        grid = [float(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise InputError(f"--eps-grid expects comma-separated numbers, got {text!r}") from None
    if not grid:
        raise InputError("--eps-grid must name at least one epsilon")
    return grid


def _cmd_sweep(args):
    model = models.load_model(args.model)
    profile = conformal.load_profile(args.profile)
    test = datasets.load_csv(args.test)
    grid = _parse_grid(args.eps_grid)
    reports = evaluation.sweep(model, profile, grid, test)
    _write_text(args.out, evaluation.reports_to_csv(reports))
    outputs = [args.out]
    if args.json_out:
        _write_text(args.json_out, evaluation.reports_to_json(reports))
        outputs.append(args.json_out)
    config = {"model": args.model, "profile": args.profile, "test": args.test,
              "eps_grid": grid, "json_out": args.json_out}
    _write_manifest("sweep", config, [args.model, args.profile, args.test], outputs)
    return 0


def _cmd_region(args):
    model = models.load_model(args.model)
    profile = conformal.load_profile(args.profile)
    parts = args.bounds.split(",")
    if len(parts) != 4:
        raise InputError(f"--bounds expects x1min,x1max,x2min,x2max, got {args.bounds!r}")
    try:
        x1_lo, x1_hi, x2_lo, x2_hi = (float(v) for v in parts)
    except ValueError:
        raise InputError(f"--bounds expects numbers, got {args.bounds!r}") from None
    grid = evaluation.region_grid(
        model, profile, args.epsilon,
        ((x1_lo, x1_hi), (x2_lo, x2_hi)), args.resolution,
    )
    _write_text(args.out, evaluation.grid_to_csv(grid))
    config = {"model": args.model, "profile": args.profile, "epsilon": args.epsilon,
              "bounds": [x1_lo, x1_hi, x2_lo, x2_hi], "resolution": args.resolution}
    _write_manifest("region", config, [args.model, args.profile], [args.out])
    return 0


def _cmd_rerun(args):
    try:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read manifest {args.manifest}: {exc}") from exc
    try:
        command = manifest["command"]
        config = manifest["config"]
        recorded = manifest["outputs"]
    except (TypeError, KeyError):
        raise InputError(f"{args.manifest} is not a run manifest") from None
    argv = _argv_from_manifest(command, config, recorded)
    code = main(argv)
    if code != 0:
        return code
    for path, checksum in recorded.items():
        if _sha256(path) != checksum:
            print(f"rerun mismatch: {path} differs from manifest checksum",
                  file=sys.stderr)
            return 1
    return 0


def _argv_from_manifest(command, config, outputs):
    out_paths = list(outputs)
    primary = out_paths[0]
    if command == "generate":
        if config["generator"] == "two-gaussians":
            return ["generate", "two-gaussians",
                    "--n", str(config["n"]),
                    "--mean-safe=" + ",".join(map(repr, config["mean_safe"])),
                    "--mean-unsafe=" + ",".join(map(repr, config["mean_unsafe"])),
                    "--cov-scale-safe", repr(config["cov_scale_safe"]),
                    "--cov-scale-unsafe", repr(config["cov_scale_unsafe"]),
                    "--outlier-prob", repr(config["outlier_prob"]),
                    "--seed", str(config["seed"]), "--out", primary]
        return ["generate", "dns-surrogate",
                "--windows", str(config["n_windows"]),
                "--tunnel-fraction", repr(config["tunnel_fraction"]),
                "--packets", str(config["packets_per_window"]),
                "--intensity", repr(config["intensity"]),
                "--seed", str(config["seed"]), "--out", primary]
    if command == "train":
        kernel = config["kernel"]
        argv = ["train", "--kind", config["classifier_kind"],
                "--kernel", kernel["variant"],
                "--C", repr(config["C"]),
                "--tolerance", repr(config["tolerance"]),
                "--max-iterations", str(config["max_iterations"]),
                "--learning-rate", repr(config["learning_rate"]),
                "--seed", str(config["seed"]), "--out", primary, config["data"]]
        if kernel["variant"] == "polynomial":
            argv += ["--degree", str(kernel["degree"]),
                     "--scale", repr(kernel["scale"]),
                     "--offset", repr(kernel["offset"])]
        elif kernel["variant"] == "gaussian":
            argv += ["--gamma", repr(kernel["gamma"])]
        return argv
    if command == "calibrate":
        return ["calibrate", config["model"], config["calib"], "--out", primary]
    if command == "evaluate":
        argv = ["evaluate", config["model"], config["profile"], config["test"],
                "--epsilon", repr(config["epsilon"]), "--out", primary]
        if config.get("json_out"):
            argv += ["--json-out", config["json_out"]]
        return argv
    if command == "sweep":
        argv = ["sweep", config["model"], config["profile"], config["test"],
                "--eps-grid", ",".join(map(repr, config["eps_grid"])),
                "--out", primary]
        if config.get("json_out"):
            argv += ["--json-out", config["json_out"]]
        return argv
    if command == "region":
        return ["region", config["model"], config["profile"],
                "--epsilon", repr(config["epsilon"]),
                "--bounds=" + ",".join(map(repr, config["bounds"])),
                "--resolution", str(config["resolution"]),
                "--out", primary]
    raise InputError(f"manifest names unknown command {command!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="confsafe",
        description="Scalable kernel classifiers with conformal safety regions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a synthetic dataset CSV")
    gen_sub = gen.add_subparsers(dest="generator", required=True)
    two = gen_sub.add_parser("two-gaussians", help="two Gaussian classes in the plane")
    two.add_argument("--n", type=int, required=True, help="total number of samples")
    two.add_argument("--mean-safe", default="-1,-1")
    two.add_argument("--mean-unsafe", default="1,1")
    two.add_argument("--cov-scale-safe", type=float, default=1.0)
    two.add_argument("--cov-scale-unsafe", type=float, default=1.0)
    two.add_argument("--outlier-prob", type=float, default=0.0)
    two.add_argument("--seed", type=int, required=True)
    two.add_argument("--out", required=True)
    dns = gen_sub.add_parser("dns-surrogate", help="moment features of simulated DNS windows")
    dns.add_argument("--windows", type=int, required=True)
    dns.add_argument("--tunnel-fraction", type=float, default=0.5)
    dns.add_argument("--packets", type=int, default=100)
    dns.add_argument("--intensity", type=float, default=1.0)
    dns.add_argument("--seed", type=int, required=True)
    dns.add_argument("--out", required=True)

    train = sub.add_parser("train", help="train a scalable classifier")
    train.add_argument("data", help="training CSV")
    train.add_argument("--kind", choices=("svm", "svdd", "lr"), required=True)
    train.add_argument("--kernel", choices=("linear", "polynomial", "gaussian"),
                       default="linear")
    train.add_argument("--degree", type=int, default=3)
    train.add_argument("--scale", type=float, default=1.0)
    train.add_argument("--offset", type=float, default=1.0)
    train.add_argument("--gamma", default=None,
                       help="RBF width, or 'median' for the median heuristic "
                            "(default 1/d)")
    train.add_argument("--C", type=float, default=1.0)
    train.add_argument("--tolerance", type=float, default=1e-6)
    train.add_argument("--max-iterations", type=int, default=100_000)
    train.add_argument("--learning-rate", type=float, default=0.1)
    train.add_argument("--seed", type=int, required=True)
    train.add_argument("--out", required=True)

    cal = sub.add_parser("calibrate", help="score a calibration CSV into a profile")
    cal.add_argument("model")
    cal.add_argument("calib")
    cal.add_argument("--out", required=True)

    ev = sub.add_parser("evaluate", help="coverage report at one epsilon")
    ev.add_argument("model")
    ev.add_argument("profile")
    ev.add_argument("test")
    ev.add_argument("--epsilon", type=float, required=True)
    ev.add_argument("--out", required=True, help="report CSV path")
    ev.add_argument("--json-out", default=None)

    sw = sub.add_parser("sweep", help="coverage reports over an epsilon grid")
    sw.add_argument("model")
    sw.add_argument("profile")
    sw.add_argument("test")
    sw.add_argument("--eps-grid", required=True,
                    help="comma-separated ascending epsilons")
    sw.add_argument("--out", required=True, help="report CSV path")
    sw.add_argument("--json-out", default=None)

    reg = sub.add_parser("region", help="rasterize conformal regions of a 2-D model")
    reg.add_argument("model")
    reg.add_argument("profile")
    reg.add_argument("--epsilon", type=float, required=True)
    reg.add_argument("--bounds", required=True, help="x1min,x1max,x2min,x2max")
    reg.add_argument("--resolution", type=int, required=True)
    reg.add_argument("--out", required=True)

    rer = sub.add_parser("rerun", help="re-execute a manifest and verify outputs")
    rer.add_argument("manifest")

    return parser


_HANDLERS = {
    "generate": _cmd_generate,
    "train": _cmd_train,
    "calibrate": _cmd_calibrate,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
    "region": _cmd_region,
    "rerun": _cmd_rerun,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
