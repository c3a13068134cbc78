"""Command-line front end.

Subcommands
-----------
fit        preprocess data, sample the posterior, write a draws CSV
simulate   write a simulated trajectory from an explicit or prior-drawn model
score      forecast the held-back tail and write the score report + figures
transform  apply one of the reparameterisation maps to matrices in a CSV

Exit codes: 0 success, 1 computational failure, 2 usage or I/O error,
3 finished but with convergence warnings.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, config as cfgmod, dataio, inference, priors, process, reparam, scoring
from .errors import (
    AllDivergent,
    BadCsv,
    ConfigInvalid,
    DimensionMismatch,
    NotStationary,
    StatVarError,
)

RHAT_WARN = 1.05


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statvar",
        description="Stationary-by-construction Bayesian vector autoregressions",
    )
    parser.add_argument("--version", action="version", version=f"statvar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="sample the posterior for a data set")
    fit.add_argument("--config", required=True)
    fit.add_argument("--data", required=True)
    fit.add_argument("--out", required=True)
    fit.add_argument("--seed", type=int)
    fit.add_argument("--chains", type=int)
    fit.add_argument("--iters", type=int)
    fit.add_argument("--warmup", type=int)
    fit.add_argument("--holdout", type=int)
    fit.add_argument("--grad", choices=("ad", "fd"))

    sim = sub.add_parser("simulate", help="simulate a trajectory")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--seed", type=int)

    score = sub.add_parser("score", help="score forecasts on the held-back tail")
    score.add_argument("--config", required=True)
    score.add_argument("--data", required=True)
    score.add_argument("--draws", required=True)
    score.add_argument("--out", required=True, help="output prefix for report files")
    score.add_argument("--seed", type=int)
    score.add_argument("--holdout", type=int)
    score.add_argument("--mode", choices=("rolling", "fixed-origin"))

    trans = sub.add_parser("transform", help="apply a reparameterisation map")
    trans.add_argument("--direction", required=True,
                       choices=("phi-to-a", "a-to-phi", "p-to-a", "a-to-p",
                                "ak-to-rml", "rml-to-ak"))
    trans.add_argument("--in", dest="infile", required=True)
    trans.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "fit": cmd_fit,
        "simulate": cmd_simulate,
        "score": cmd_score,
        "transform": cmd_transform,
    }[args.command]
    try:
        return handler(args)
    except (BadCsv, ConfigInvalid, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AllDivergent as exc:
        print(f"error: {exc}\nhint: lower the step size via a higher "
              "target_accept, or tighten the prior", file=sys.stderr)
        return 1
    except StatVarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _require_file(path: str):
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")


# -- fit ---------------------------------------------------------------------


def write_draws_csv(draws: inference.Draws, path: str) -> None:
    """One row per kept draw: chain, iter, named coordinates, log posterior."""
    header = ["chain", "iter"] + list(draws.names) + ["lp"]
    rows = []
    for c in range(draws.chains):
        for i in range(draws.kept):
            rows.append([c, i] + list(draws.theta[c, i]) + [draws.logpost[c, i]])
    dataio.write_csv(path, header, rows)


def read_draws_csv(path: str) -> tuple[list, np.ndarray, np.ndarray, np.ndarray]:
    names, arr = dataio.read_csv(path)
    if names[:2] != ["chain", "iter"] or names[-1] != "lp":
        raise BadCsv(f"{path} is not a draws file")
    chains = arr[:, 0].astype(int)
    theta = arr[:, 2:-1]
    lp = arr[:, -1]
    return names[2:-1], chains, theta, lp


def cmd_fit(args) -> int:
    _require_file(args.config)
    _require_file(args.data)
    cfg = cfgmod.load_config(args.config)
    p = cfgmod.model_order(cfg)
    _, raw = dataio.read_csv(args.data)
    prep = cfgmod.preprocess_settings(cfg)
    processed, prep_meta = dataio.preprocess(raw, **prep)
    fc = cfgmod.forecast_settings(cfg)
    holdout = args.holdout if args.holdout is not None else fc["holdout"]
    if holdout < 0 or (holdout and holdout >= processed.shape[0] - p):
        raise ConfigInvalid("holdout must satisfy 0 <= holdout < n - p")
    train = processed[:-holdout] if holdout else processed
    spec = cfgmod.build_prior_spec(cfg, p)
    hmc = cfgmod.build_hmc_config(cfg, args)

    draws = inference.run_hmc(train, spec, hmc)
    write_draws_csv(draws, args.out)
    summary = {"max_rhat": None, "min_ess": None}
    warn = False
    if hmc.chains >= 2 and draws.kept >= 4:
        diag = inference.diagnostics(draws)
        summary = {"max_rhat": float(diag["rhat"].max()),
                   "min_ess": float(diag["ess"].min())}
        warn = summary["max_rhat"] > RHAT_WARN
    meta = {
        "version": __version__,
        "config_sha256": cfgmod.config_hash(args.config),
        "seed": hmc.seed,
        "m": train.shape[1],
        "p": p,
        "kind": spec.kind,
        "holdout": holdout,
        "n_train": int(train.shape[0]),
        "preprocess": prep_meta,
        "diagnostics": summary,
        "divergences": [int(v) for v in draws.divergences],
    }
    with open(args.out + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {draws.chains * draws.kept} draws to {args.out}")
    if summary["max_rhat"] is not None:
        print(f"max split-Rhat {summary['max_rhat']:.4f}, "
              f"min ESS {summary['min_ess']:.0f}, "
              f"divergences {int(draws.divergences.sum())}")
    if warn:
        print(f"warning: split-Rhat above {RHAT_WARN}; treat these draws "
              "with suspicion (longer chains or more warmup recommended)",
              file=sys.stderr)
        return 3
    return 0


# -- simulate -----------------------------------------------------------------


def _model_from_config(cfg: dict, seed: int) -> process.VarModel:
    section = cfg.get("simulate", {})
    p = cfgmod.model_order(cfg)
    if section.get("from_prior", "false").lower() in ("true", "1", "yes"):
        m = int(section.get("m", 0) or cfg.get("model", {}).get("m", 0))
        if m < 1:
            raise ConfigInvalid("from_prior simulation needs [simulate] m")
        spec = cfgmod.build_prior_spec(cfg, p)
        point = priors.sample_prior(spec, m, p, seed=seed)
        plist = [reparam.a_to_p(a) for a in point.aseq]
        model, _ = reparam.reverse_map(point.sigma, plist)
        return model
    try:
        sigma = cfgmod.parse_matrix(section["sigma"])
        phis = [cfgmod.parse_matrix(section[f"phi{s}"]) for s in range(1, p + 1)]
    except KeyError as exc:
        raise ConfigInvalid(f"[simulate] needs sigma and phi1..phi{p} "
                            f"(missing {exc.args[0]})") from exc
    return process.VarModel(sigma=sigma, phi=phis)


def cmd_simulate(args) -> int:
    _require_file(args.config)
    cfg = cfgmod.load_config(args.config)
    section = cfg.get("simulate", {})
    n = int(section.get("n", 200))
    seed = args.seed if args.seed is not None else int(section.get("seed", 0))
    model = _model_from_config(cfg, seed)
    stationary, radius = process.is_stationary(model.phi)
    if not stationary:
        raise NotStationary(f"explicit model has companion spectral radius "
                            f"{radius:.4f} >= 1; refusing to simulate")
    traj = process.simulate(model, n, seed=seed)
    header = [f"y{j + 1}" for j in range(model.dim)]
    dataio.write_csv(args.out, header, traj)
    print(f"wrote {n} x {model.dim} trajectory to {args.out}")
    return 0


# -- score --------------------------------------------------------------------


def cmd_score(args) -> int:
    _require_file(args.config)
    _require_file(args.data)
    _require_file(args.draws)
    cfg = cfgmod.load_config(args.config)
    meta_path = args.draws + ".meta.json"
    _require_file(meta_path)
    with open(meta_path, encoding="utf-8") as fh:
        meta = json.load(fh)
    p = int(meta["p"])
    _, raw = dataio.read_csv(args.data)
    prep = cfgmod.preprocess_settings(cfg)
    processed, _ = dataio.preprocess(raw, **prep)
    m = processed.shape[1]
    if m != int(meta["m"]):
        raise DimensionMismatch(f"data has m={m} but draws were fit with m={meta['m']}")
    fc = cfgmod.forecast_settings(cfg)
    holdout = args.holdout if args.holdout is not None else \
        (fc["holdout"] or int(meta.get("holdout", 0)))
    if holdout < 1:
        raise ConfigInvalid("scoring needs a positive holdout")
    mode = args.mode or fc["mode"]
    seed = args.seed if args.seed is not None else int(meta.get("seed", 0))
    train = processed[:-holdout]
    if train.shape[0] != int(meta["n_train"]):
        raise DimensionMismatch("training length does not match the draws file; "
                                "check the holdout setting")

    spec = cfgmod.build_prior_spec(cfg, p)
    if spec.kind != meta["kind"]:
        raise ConfigInvalid(f"config prior kind {spec.kind!r} does not match "
                            f"draws metadata {meta['kind']!r}")
    names, _, theta, lp = read_draws_csv(args.draws)
    post = inference.PosteriorModel(train, spec)
    if names != post.theta_names():
        raise DimensionMismatch("draws file columns do not match the prior layout")
    phis, sigmas = [], []
    for row in theta:
        vm = post.model_from_theta(row)
        phis.append(np.stack(vm.phi))
        sigmas.append(vm.sigma)
    phi_stack, sigma_stack = np.stack(phis), np.stack(sigmas)

    rows = [scoring.score_entry(spec.kind, phi_stack, sigma_stack, processed,
                                holdout, seed, mode=mode, subset=fc["subset"])]
    ndraw = phi_stack.shape[0]
    hmc = cfgmod.build_hmc_config(cfg)
    for baseline in fc["baselines"]:
        if baseline == priors.MINNESOTA:
            bspec = cfgmod.build_prior_spec({"prior": {"kind": "minnesota"}}, p)
            fit = scoring.fit_minnesota(train, bspec)
            bphi = fit.phi_draws(ndraw, seed + 1)
            rows.append(scoring.score_entry("minnesota", bphi, fit.sigma,
                                            processed, holdout, seed,
                                            mode=mode, subset=fc["subset"]))
        elif baseline == priors.SEMI_CONJUGATE:
            bspec = priors.semi_conjugate_spec(p)
            bdraws = inference.run_hmc(train, bspec, hmc)
            tr = bdraws.transformed()
            rows.append(scoring.score_entry("semi-conjugate", tr["phi"], tr["sigma"],
                                            processed, holdout, seed,
                                            mode=mode, subset=fc["subset"]))
        elif baseline:
            raise ConfigInvalid(f"unknown baseline {baseline!r}")

    subset = fc["subset"] if fc["subset"] is not None else list(range(min(3, m)))
    report = scoring.ScoreReport(rows=rows, variables=[f"y{j + 1}" for j in range(m)],
                                 subset=subset, holdout=holdout, mode=mode)
    from . import report as reportmod

    csv_path = args.out + "_scores.csv"
    reportmod.write_score_csv(report, csv_path)
    figures = reportmod.render_score_figures(report, os.path.dirname(os.path.abspath(args.out))
                                             or ".", stem=os.path.basename(args.out))
    print(report.format_table())
    print(f"wrote {csv_path} and {len(figures)} figures")
    return 0


# -- transform ------------------------------------------------------------------


def _read_blocks(path: str) -> tuple[list, np.ndarray]:
    header, arr = dataio.read_csv(path)
    m = arr.shape[1]
    if arr.shape[0] % m != 0:
        raise BadCsv(f"{path}: row count {arr.shape[0]} is not a multiple of "
                     f"the column count {m}")
    blocks = [arr[i * m:(i + 1) * m] for i in range(arr.shape[0] // m)]
    return header, blocks


def cmd_transform(args) -> int:
    _require_file(args.infile)
    header, blocks = _read_blocks(args.infile)
    direction = args.direction
    needs_sigma = direction in ("phi-to-a", "a-to-phi", "ak-to-rml", "rml-to-ak")
    if needs_sigma and len(blocks) < 2:
        raise ConfigInvalid(f"{direction} needs a leading Sigma block plus "
                            "at least one coefficient block")
    if direction == "p-to-a":
        out = [reparam.p_to_a(b) for b in blocks]
    elif direction == "a-to-p":
        out = [reparam.a_to_p(b) for b in blocks]
    elif direction == "phi-to-a":
        sigma, phis = blocks[0], blocks[1:]
        plist, _ = reparam.forward_map(process.VarModel(sigma=sigma, phi=phis))
        out = [sigma] + [reparam.p_to_a(pm) for pm in plist]
    elif direction == "a-to-phi":
        sigma, amats = blocks[0], blocks[1:]
        model, _ = reparam.reverse_map(sigma, [reparam.a_to_p(a) for a in amats])
        out = [sigma] + model.phi
    elif direction == "ak-to-rml":
        sigma, amats = blocks[0], blocks[1:]
        out = [sigma] + reparam.rml_from_ak(sigma, [reparam.a_to_p(a) for a in amats])
    else:  # rml-to-ak
        sigma, cmats = blocks[0], blocks[1:]
        plist = reparam.ak_from_rml(sigma, cmats)
        out = [sigma] + [reparam.p_to_a(pm) for pm in plist]
    dataio.write_csv(args.out, header, np.vstack(out))
    print(f"wrote {len(out)} blocks to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
