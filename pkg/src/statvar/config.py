"""Flat, human-diffable run configuration (INI sections of key = value)."""

from __future__ import annotations

import configparser
import hashlib

import numpy as np

from . import priors
from .errors import ConfigInvalid
from .inference import HmcConfig


def parse_matrix(text: str) -> np.ndarray:
    """Parse "a,b; c,d" into a 2-D array (rows separated by ';')."""
    try:
        rows = [[float(c) for c in row.split(",")] for row in text.split(";") if row.strip()]
    except ValueError as exc:
        raise ConfigInvalid(f"bad matrix literal {text!r}") from exc
    arr = np.array(rows)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ConfigInvalid(f"matrix literal {text!r} is not square")
    return arr


def _floats(text: str) -> list:
    return [float(c) for c in text.replace(";", ",").split(",") if c.strip()]


def load_config(path: str) -> dict:
    """Read an INI file into a plain {section: {key: value}} dict."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigInvalid(f"cannot read config file {path}")
    return {section: dict(parser.items(section)) for section in parser.sections()}


def config_hash(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def build_prior_spec(cfg: dict, p: int) -> priors.PriorSpec:
    """PriorSpec from the [prior] section; unknown kinds are rejected."""
    section = cfg.get("prior", {})
    kind = section.get("kind", "exchangeable").strip()
    kw = {}
    if "iw_df" in section and section["iw_df"] != "auto":
        kw["iw_df"] = float(section["iw_df"])
    if "iw_scale" in section:
        kw["iw_scale"] = parse_matrix(section["iw_scale"])

    def arr(key, default):
        return _floats(section[key]) if key in section else default

    if kind == priors.EXCHANGEABLE:
        return priors.exchangeable_spec(
            p, e1=arr("e1", 0.0), f1=arr("f1", np.sqrt(0.7)),
            g1=arr("g1", 2.1), h1=arr("h1", 0.33),
            e2=arr("e2", None), f2=arr("f2", None),
            g2=arr("g2", None), h2=arr("h2", None), **kw)
    if kind == priors.DIAGONAL:
        extra = {}
        if "diag_means" in section:
            extra["diag_means"] = _floats(section["diag_means"])
            extra["diag_vars"] = _floats(section.get("diag_vars", ""))
        return priors.diagonal_spec(
            p, e1=arr("e1", 0.0), f1=arr("f1", np.sqrt(0.7)),
            g1=arr("g1", 2.1), h1=arr("h1", 0.33),
            g2=arr("g2", None), h2=arr("h2", None), **extra, **kw)
    if kind == priors.ALL_ONES:
        return priors.all_ones_spec(
            p, e=arr("e", 0.0), f=arr("f", np.sqrt(0.7)),
            g1=arr("g1", 2.1), h1=arr("h1", 0.33),
            g2=arr("g2", None), h2=arr("h2", None), **kw)
    if kind == priors.SPARSE:
        return priors.sparse_spec(
            p, df_diag=float(section.get("df_diag", 3.0)),
            df_offdiag=float(section.get("df_offdiag", 3.0)), **kw)
    if kind == priors.RML_VAGUE:
        return priors.rml_vague_spec(p, **kw)
    if kind == priors.SEMI_CONJUGATE:
        return priors.semi_conjugate_spec(
            p, phi_sd=float(section.get("phi_sd", 1.0)), **kw)
    if kind == priors.MINNESOTA:
        return priors.minnesota_spec(
            p, lambda1=float(section.get("lambda1", 0.2)),
            lambda2=float(section.get("lambda2", 0.5)),
            own_mean=float(section.get("own_mean", 0.0)))
    raise ConfigInvalid(f"unknown prior kind {kind!r}")


def prior_section(spec: priors.PriorSpec) -> dict:
    """Inverse of :func:`build_prior_spec`: a [prior] section for a spec."""
    out = {"kind": spec.kind}

    def put(key, arr):
        if arr is not None:
            out[key] = ",".join(repr(float(v)) for v in np.atleast_1d(arr))

    if spec.kind in priors.HIERARCHICAL_KINDS:
        if spec.kind == priors.ALL_ONES:
            put("e", spec.e1)
            put("f", spec.f1)
        else:
            put("e1", spec.e1)
            put("f1", spec.f1)
        put("g1", spec.g1)
        put("h1", spec.h1)
        if spec.kind == priors.EXCHANGEABLE:
            put("e2", spec.e2)
            put("f2", spec.f2)
        put("g2", spec.g2)
        put("h2", spec.h2)
        if spec.kind == priors.DIAGONAL and spec.diag_means is not None:
            put("diag_means", spec.diag_means)
            put("diag_vars", spec.diag_vars)
    elif spec.kind == priors.SPARSE:
        out["df_diag"] = repr(spec.df_diag)
        out["df_offdiag"] = repr(spec.df_offdiag)
    elif spec.kind == priors.SEMI_CONJUGATE:
        out["phi_sd"] = repr(spec.phi_sd)
    elif spec.kind == priors.MINNESOTA:
        out["lambda1"] = repr(spec.lambda1)
        out["lambda2"] = repr(spec.lambda2)
        out["own_mean"] = repr(spec.own_mean)
    if spec.iw_df is not None:
        out["iw_df"] = repr(float(spec.iw_df))
    return out


def build_hmc_config(cfg: dict, args=None) -> HmcConfig:
    """HmcConfig from the [hmc] section with command-line overrides."""
    section = cfg.get("hmc", {})
    hmc = HmcConfig(
        chains=int(section.get("chains", 4)),
        iterations=int(section.get("iterations", 2000)),
        warmup=int(section.get("warmup", 1000)),
        target_accept=float(section.get("target_accept", 0.8)),
        max_leapfrog=int(section.get("max_leapfrog", 64)),
        seed=int(section.get("seed", 0)),
        init_jitter=float(section.get("init_jitter", 0.5)),
    )
    if args is not None:
        if getattr(args, "seed", None) is not None:
            hmc.seed = args.seed
        if getattr(args, "chains", None) is not None:
            hmc.chains = args.chains
        if getattr(args, "iters", None) is not None:
            hmc.iterations = args.iters
        if getattr(args, "warmup", None) is not None:
            hmc.warmup = args.warmup
        if getattr(args, "grad", None) is not None:
            hmc.grad_method = args.grad
    hmc.validate()
    return hmc


def model_order(cfg: dict) -> int:
    try:
        p = int(cfg["model"]["p"])
    except KeyError as exc:
        raise ConfigInvalid("config needs [model] p = <order>") from exc
    if p < 1:
        raise ConfigInvalid("model order p must be >= 1")
    return p


def preprocess_settings(cfg: dict) -> dict:
    section = cfg.get("preprocess", {})
    log_cols = []
    if section.get("log_columns", "").strip():
        log_cols = [int(c) - 1 for c in section["log_columns"].split(",")]
    return {
        "difference": int(section.get("difference", 0)),
        "log_columns": log_cols,
        "standardise": section.get("standardise", "false").lower() in ("true", "1", "yes"),
    }


def forecast_settings(cfg: dict, m: int | None = None) -> dict:
    section = cfg.get("forecast", {})
    subset = None
    if section.get("subset", "").strip():
        subset = [int(c) - 1 for c in section["subset"].split(",")]
    baselines = [b.strip() for b in section.get("baselines", "").split(",") if b.strip()]
    return {
        "holdout": int(section.get("holdout", 0)),
        "mode": section.get("mode", "rolling"),
        "subset": subset,
        "baselines": baselines,
    }
