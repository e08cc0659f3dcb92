"""Command-line interface: ``cvswap {scan,verify,decompose,swap}``.

Settings are resolved with the precedence command-line flags > config
file (``--config``, INI with one section per subcommand) > built-in
defaults. When ``--out`` is not given, output goes to ``$CVSWAP_OUTPUT_DIR``
if that variable is set and to stdout otherwise.

Example config::

    [scan]
    scheme = both
    r_range = 0:3:301
    loss = 0.5
    split = 0
    gains = optimal
    format = csv

    [verify]
    samples = 100000
    seed = 7
    fast = true
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import re
import sys

import numpy as np

from . import __version__
from .channels import ChannelSpec, effective_decomposition, lossy_tmss, split_transmittivities
from .errors import ConfigError, CVSwapError, VerificationFailed
from .experiment import (
    ExperimentConfig,
    VerifyConfig,
    choose_gains,
    format_report,
    format_rows,
    parse_range,
    run_scan,
    state_measures,
    verify,
    write_scan,
)
from .gaussian import SimpleFormParams, StandardFormParams, is_physical, is_separable, to_standard_form
from .oracle import OracleConfig, sample_ensemble
from .swap import ensemble_cm

OUTPUT_DIR_ENV = "CVSWAP_OUTPUT_DIR"

# allowed keys per section and their parsers
_SECTIONS = {
    "scan": {
        "scheme": str,
        "r": float,
        "r_range": str,
        "loss": float,
        "split": float,
        "gains": str,
        "format": str,
        "out": str,
        "epr_method": str,
        "workers": int,
    },
    "verify": {"samples": int, "seed": int, "fast": "bool", "mutate": "bool", "out": str},
    "swap": {"r": float, "loss": float, "split": float, "gains": str, "samples": int, "seed": int},
}


def _key_lines(text: str) -> dict:
    """Map ``(section, key)`` to 1-based line numbers, for diagnostics."""
    lines, section = {}, None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = n
        elif section and line and line[0] not in "#;":
            key = re.split(r"[=:]", line, maxsplit=1)[0].strip().lower()
            lines[(section, key)] = n
    return lines


def load_config(path: str, section: str) -> dict:
    """Read one section of an INI config file into typed values.

    Raises:
        ConfigError: for unreadable files, syntax errors, unknown sections or
            keys and values of the wrong type, with line and field
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=path)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", field=exc.option, line=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if getattr(exc, "errors", None) else None
        raise ConfigError("syntax error", line=lineno) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], line=getattr(exc, "lineno", None)) from None
    where = _key_lines(text)
    for sec in parser.sections():
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}]", line=where.get((sec, None)))
        for key in parser[sec]:
            if key not in _SECTIONS[sec]:
                raise ConfigError("unknown key", field=key, line=where.get((sec, key)))
    out = {}
    if section not in parser:
        return out
    for key, kind in _SECTIONS[section].items():
        if key not in parser[section]:
            continue
        try:
            if kind == "bool":
                out[key] = parser[section].getboolean(key)
            else:
                out[key] = kind(parser[section][key])
        except ValueError:
            raise ConfigError(
                f"invalid value {parser[section][key]!r}", field=key, line=where.get((section, key))
            ) from None
    return out


def _merged(args, section: str, defaults: dict) -> dict:
    """Defaults, then config file values, then explicitly given flags."""
    values = dict(defaults)
    if getattr(args, "config", None):
        values.update(load_config(args.config, section))
    for key in _SECTIONS[section]:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return values


def _parse_gains(spec):
    """``["optimal"]`` or ``["custom", "0.1", "0.2"]`` (or the string form) -> (strategy, custom)."""
    parts = spec.split() if isinstance(spec, str) else list(spec)
    if not parts:
        raise ConfigError("empty gain strategy", field="gains")
    name = parts[0]
    if name == "custom":
        if len(parts) != 3:
            raise ConfigError("usage: custom G1 G4", field="gains")
        try:
            return name, (float(parts[1]), float(parts[2]))
        except ValueError:
            raise ConfigError(f"gains must be numbers, got {parts[1:]}", field="gains") from None
    if len(parts) != 1:
        raise ConfigError(f"strategy {name!r} takes no values", field="gains")
    return name, None


def _default_out(name: str):
    d = os.environ.get(OUTPUT_DIR_ENV)
    return os.path.join(d, name) if d else None


def scan_config(args) -> ExperimentConfig:
    v = _merged(
        args,
        "scan",
        {"scheme": "both", "loss": 0.5, "split": 0.0, "gains": "optimal", "format": "csv", "epr_method": "reduced", "workers": 1},
    )
    # a flag for either grid form overrides both forms from the file
    if getattr(args, "r", None) is not None:
        r_values = (float(args.r),)
    elif "r_range" in v:
        r_values = parse_range(v["r_range"])
    elif "r" in v:
        r_values = (float(v["r"]),)
    else:
        r_values = parse_range("0:3:61")
    schemes = ("direct", "swap") if v["scheme"] == "both" else (v["scheme"],)
    strategy, custom = _parse_gains(v["gains"])
    out = v.get("out") or _default_out(f"scan.{v['format']}")
    return ExperimentConfig(
        schemes=schemes,
        r_values=r_values,
        loss=float(v["loss"]),
        split=float(v["split"]),
        gains=strategy,
        custom_gains=custom,
        fmt=v["format"],
        out=out,
        epr_method=v["epr_method"],
        workers=int(v["workers"]),
    )


def cmd_scan(args) -> int:
    cfg = scan_config(args)
    rows = run_scan(cfg)
    if cfg.out:
        write_scan(rows, cfg, cfg.out)
        print(f"wrote {len(rows)} rows to {cfg.out}", file=sys.stderr)
    else:
        sys.stdout.write(format_rows(rows, cfg.fmt))
    return 0


def cmd_verify(args) -> int:
    v = _merged(args, "verify", {"samples": 1_000_000, "seed": VerifyConfig.seed, "fast": False, "mutate": False})
    cfg = VerifyConfig(samples=int(v["samples"]), seed=int(v["seed"]), fast=bool(v["fast"]), mutate=bool(v["mutate"]))
    try:
        report = verify(cfg)
        code = 0
    except VerificationFailed as exc:
        report = exc.report
        code = 1
    print(format_report(report))
    out = v.get("out") or _default_out("verify_report.json")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"report written to {out}", file=sys.stderr)
    return code


def _decomposition_dict(p: SimpleFormParams) -> dict:
    d = effective_decomposition(p)
    return {
        "r_eff": d.r_eff,
        "tau_a_eff": d.tau_a_eff,
        "tau_b_eff": d.tau_b_eff,
        "tau_eff_product": d.total_transmittivity,
    }


def cmd_decompose(args) -> int:
    p = SimpleFormParams(args.a, args.b, args.c)
    result = {"input": {"a": p.a, "b": p.b, "c": p.c}, "physical": is_physical(p)}
    if result["physical"]:
        result["separable"] = is_separable(p)
        if not result["separable"]:
            result.update(_decomposition_dict(p))
    print(json.dumps(result, indent=2))
    return 0 if result["physical"] and not result.get("separable", True) else 1


def cmd_swap(args) -> int:
    v = _merged(args, "swap", {"loss": 0.0, "split": 0.0, "gains": "optimal", "seed": 0})
    if args.input is not None:
        vals = args.input
        if len(vals) == 3:
            p = SimpleFormParams(*vals)
        elif len(vals) == 4:
            p = StandardFormParams(*vals)
            if p.is_simple():
                p = p.to_simple()
        else:
            raise ConfigError("--input takes a b c or a b c_plus c_minus", field="input")
        source = {"input": list(vals)}
    else:
        if "r" not in v:
            raise ConfigError("give --r (with --loss/--split) or --input", field="r")
        ta, tb = split_transmittivities(float(v["loss"]), float(v["split"]))
        p = lossy_tmss(ChannelSpec(float(v["r"]), ta, tb))
        source = {"r": float(v["r"]), "loss": float(v["loss"]), "split": float(v["split"]), "tau_a": ta, "tau_b": tb}
    if not is_physical(p):
        raise ConfigError(f"input {p} is not physical", field="input")
    strategy, custom = _parse_gains(v["gains"])
    if strategy != "optimal-pq" and not isinstance(p, SimpleFormParams):
        raise ConfigError(f"gain strategy {strategy!r} needs a simple-form input", field="gains")
    g = choose_gains(p, strategy, custom)
    cm = ensemble_cm(p, g)
    sf = to_standard_form(cm)
    result = {
        "source": source,
        "gains": {"g1q": g.g1q, "g1p": g.g1p, "g4q": g.g4q, "g4p": g.g4p, "strategy": strategy},
        "output_cm": cm.tolist(),
        "output_standard_form": {"a": sf.a, "b": sf.b, "c_plus": sf.c_plus, "c_minus": sf.c_minus},
        "measures": state_measures(cm),
    }
    if sf.is_simple(1e-9):
        out = sf.to_simple()
        out = SimpleFormParams(out.a, out.b, abs(out.c))
        if not is_separable(out):
            result["effective"] = _decomposition_dict(out)
    if v.get("samples"):
        est = sample_ensemble(p, g, OracleConfig(int(v["samples"]), int(v["seed"])))
        result["oracle"] = {
            "samples": est.samples,
            "seed": est.seed,
            "cm": est.cm.tolist(),
            "cm_se": est.cm_se.tolist(),
            "max_abs_z": float(np.max(np.abs(est.z_scores(cm)))),
        }
    print(json.dumps(result, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cvswap", description="Gaussian entanglement swapping over lossy channels.")
    ap.add_argument("--version", action="version", version=f"cvswap {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, sampling=False):
        p.add_argument("--config", help="INI config file; flags override its values")
        if sampling:
            p.add_argument("--samples", type=int, help="Monte Carlo events")
            p.add_argument("--seed", type=int, help="root RNG seed")

    s = sub.add_parser("scan", help="scan the input squeezing for direct and swapped distribution")
    common(s)
    s.add_argument("--scheme", choices=["direct", "swap", "both"])
    grid = s.add_mutually_exclusive_group()
    grid.add_argument("--r", type=float, help="single squeezing value")
    grid.add_argument("--r-range", dest="r_range", help="START:STOP:NUM (inclusive) or comma list")
    s.add_argument("--loss", type=float, help="total length in absorption lengths")
    s.add_argument("--split", type=float, help="fraction of each segment in the first arm")
    s.add_argument("--gains", nargs="+", metavar="STRATEGY", help="optimal | optimal-pq | one-sided | custom G1 G4")
    s.add_argument("--format", choices=["csv", "jsonl"])
    s.add_argument("--epr-method", dest="epr_method", choices=["reduced", "numeric"])
    s.add_argument("--workers", type=int)
    s.add_argument("--out", help="output file (a manifest is written next to it)")
    s.set_defaults(func=cmd_scan)

    v = sub.add_parser("verify", help="run the oracle and closed-form regression gate")
    common(v, sampling=True)
    v.add_argument("--fast", action="store_const", const=True, help="1e5 samples, 5 standard errors")
    v.add_argument("--mutate", action="store_const", const=True, help="inject a sign error that must be caught")
    v.add_argument("--out", help="JSON report path")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("decompose", help="write a simple-form state as a lossy two-mode squeezed state")
    d.add_argument("a", type=float)
    d.add_argument("b", type=float)
    d.add_argument("c", type=float)
    d.set_defaults(func=cmd_decompose)

    w = sub.add_parser("swap", help="one-shot swapping of two copies of a state")
    common(w, sampling=True)
    w.add_argument("--input", nargs="+", type=float, metavar="X", help="a b c, or a b c_plus c_minus")
    w.add_argument("--r", type=float)
    w.add_argument("--loss", type=float)
    w.add_argument("--split", type=float)
    w.add_argument("--gains", nargs="+", metavar="STRATEGY", help="optimal | optimal-pq | one-sided | custom G1 G4")
    w.set_defaults(func=cmd_swap)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CVSwapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
