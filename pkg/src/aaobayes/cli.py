"""Command line driver: ``aaobayes {spectrum,reconstruct,link-check,spc}``.

Settings come from an optional JSON file (``--config``; a run manifest is
accepted too, so ``--config out/manifest.json`` repeats a run) and are then
overridden field by field with ``--key value`` flags.  On success the
manifest is printed to stdout and the exit code is 0; on failure a JSON
object ``{"error": ..., "message": ...}`` goes to stderr with exit code 1.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import typing

from .experiments import (ExperimentConfig, run_link_check, run_reconstruction, run_spc,
                          run_spectrum)

COMMANDS = {
    "spectrum": (run_spectrum, "eigenvalues of the transformed all-at-once operator"),
    "reconstruct": (run_reconstruction, "synthetic data, MAP estimate and posterior samples"),
    "link-check": (run_link_check, "empirical link-condition constants"),
    "spc": (run_spc, "squared posterior contraction and its parts"),
}


def _float_list(text: str) -> list:
    return [float(t) for t in text.split(",") if t.strip()]


def _optional_float(text: str):
    return None if text.lower() in ("none", "null", "") else float(text)


def _optional_int(text: str):
    return None if text.lower() in ("none", "null", "") else int(text)


def _parser_for(f: dataclasses.Field):
    hint = str(f.type)
    if hint == "list":
        return _float_list, "comma-separated floats"
    if hint == "float | None":
        return _optional_float, "float or none"
    if hint == "int | None":
        return _optional_int, "int or none"
    if hint == "str | None":
        return (lambda t: None if t.lower() in ("none", "null", "") else t), "str or none"
    return {"int": int, "float": float, "str": str}[hint], hint


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aaobayes", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    defaults = ExperimentConfig()
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="JSON config file or a previous run's manifest")
        for f in dataclasses.fields(ExperimentConfig):
            conv, kind = _parser_for(f)
            p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, type=conv,
                           default=argparse.SUPPRESS,
                           help=f"{kind} (default: {getattr(defaults, f.name)!r})")
    return ap


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    base = {}
    if getattr(ns, "config", None):
        with open(ns.config, encoding="utf-8") as fh:
            base = json.load(fh)
        base = dict(base.get("config", base))
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    base.update({k: v for k, v in vars(ns).items() if k in names})
    return ExperimentConfig.from_dict(base).validate()


def main(argv: typing.Sequence[str] | None = None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        manifest = COMMANDS[ns.command][0](cfg)
    except Exception as exc:  # reported as JSON, never as a traceback
        err = {"error": type(exc).__name__, "message": str(exc), "command": ns.command}
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return 1
    sys.stdout.write(json.dumps(manifest, sort_keys=True, indent=2, default=float) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
