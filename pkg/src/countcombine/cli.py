"""Command-line front end: run experiment grids and expose the combiners.

Subcommands
-----------
type1    run a type-1-error grid from a config file
power    run a power curve from a config file
combine  combine p-values given inline or in a file
sample   dump one generated dataset as tab-separated integers

Configs are flat INI files with a single ``[experiment]`` section; see the
bundled files under ``countcombine/configs``. Exit codes: 0 ok, 1 runtime
error, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .combiners import COMBINERS, Method, PValueVector
from .copulas import CopulaFamily, CopulaSpec
from .datagen import DatasetSpec, dump_counts, generate_dataset
from .distributions import NegBinParams
from .harness import (
    REPORT_COLUMNS,
    ExperimentConfig,
    run_grid,
)
from .ztest import NullSpec

__all__ = [
    "ConfigError",
    "RunManifest",
    "RunSpec",
    "parse_config",
    "serialize_config",
    "expand_cells",
    "bundled_config_path",
    "main",
]

_SECTION = "experiment"
_KINDS = ("type1", "power")
_FAMILY_ALIASES = {
    "independence": CopulaFamily.INDEPENDENCE,
    "clayton": CopulaFamily.CLAYTON,
    "gumbel-hougaard": CopulaFamily.GUMBEL_HOUGAARD,
    "gumbel": CopulaFamily.GUMBEL_HOUGAARD,
}
_KEYS = {
    "type1": {
        "required": {"name", "kind", "family", "m", "r", "p", "n", "M", "alphas", "seed"},
        "optional": {"target", "theta", "methods"},
    },
    "power": {
        "required": {"name", "kind", "family", "m", "r", "p", "n_grid", "M", "alphas", "seed"},
        "optional": {"target", "theta", "methods", "r_alt"},
    },
}


class ConfigError(Exception):
    """Invalid experiment config; message carries file and line."""


@dataclass(frozen=True)
class RunManifest:
    """Where a run reads its config and writes its results."""

    config_path: Path
    output_dir: Path
    format: str = "csv"
    parallelism: int = 1
    seed_override: int | None = None
    overwrite: bool = False


@dataclass(frozen=True)
class RunSpec:
    """A parsed experiment config, before grid expansion."""

    name: str
    kind: str
    family: CopulaFamily
    p: float
    replications: int
    alphas: tuple[float, ...]
    seed: int
    target: str = ""
    theta: tuple[float, ...] = ()
    m: tuple[int, ...] = ()
    r: tuple[int, ...] = ()
    n: int | None = None
    n_grid: tuple[int, ...] = ()
    r_alt: int | None = None
    methods: tuple[Method, ...] = (Method.CCT, Method.FISHER, Method.MINP)


class _Anchored:
    """Config accessor that prefixes errors with ``file:line``."""

    def __init__(self, path: Path):
        self.path = path
        text = path.read_text()
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        # Keep option names case-sensitive: M (replications) and m (number
        # of tests) are distinct keys.
        parser.optionxform = str
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
        if not parser.has_section(_SECTION):
            raise ConfigError(f"{path}: missing [{_SECTION}] section")
        self.section = parser[_SECTION]
        self._lines = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            key = line.split("=", 1)[0].split(":", 1)[0].strip()
            if key and key not in self._lines:
                self._lines[key] = lineno

    def where(self, key: str) -> str:
        lineno = self._lines.get(key)
        return f"{self.path}:{lineno}" if lineno else str(self.path)

    def fail(self, key: str, message: str) -> ConfigError:
        return ConfigError(f"{self.where(key)}: {key}: {message}")

    def raw(self, key: str, default=None):
        return self.section.get(key, default)

    def parse(self, key: str, kind, required: bool = True, default=None):
        raw = self.section.get(key)
        if raw is None or not raw.strip():
            if required:
                raise ConfigError(f"{self.path}: missing required key '{key}'")
            return default
        try:
            return kind(raw)
        except ConfigError:
            raise
        except Exception as exc:
            raise self.fail(key, str(exc)) from exc


def _int_value(raw: str) -> int:
    return int(raw.strip())


def _float_value(raw: str) -> float:
    return float(raw.strip())


def _int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(tok.strip()) for tok in raw.split(",") if tok.strip())


def _float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(tok.strip()) for tok in raw.split(",") if tok.strip())


def _method_list(raw: str) -> tuple[Method, ...]:
    out = []
    for tok in raw.split(","):
        tok = tok.strip()
        if tok:
            out.append(_method_from_name(tok))
    return tuple(out)


def _method_from_name(name: str) -> Method:
    lookup = {"cct": Method.CCT, "fisher": Method.FISHER, "minp": Method.MINP}
    key = name.strip().lower()
    if key not in lookup:
        raise ValueError(f"unknown method '{name}' (expected CCT, Fisher, or MinP)")
    return lookup[key]


def parse_config(path) -> RunSpec:
    """Parse and validate an experiment config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: no such config file")
    cfg = _Anchored(path)

    kind = cfg.parse("kind", str.strip)
    if kind not in _KINDS:
        raise cfg.fail("kind", f"must be one of {', '.join(_KINDS)}")
    keys = _KEYS[kind]
    known = keys["required"] | keys["optional"]
    for key in cfg.section:
        if key not in known:
            raise cfg.fail(key, "unknown key")
    for key in keys["required"]:
        if cfg.raw(key) is None:
            raise ConfigError(f"{path}: missing required key '{key}' for kind={kind}")

    family_raw = cfg.parse("family", str.strip).lower()
    if family_raw not in _FAMILY_ALIASES:
        raise cfg.fail(
            "family", f"unknown family (expected {', '.join(sorted(set(_FAMILY_ALIASES)))})"
        )
    family = _FAMILY_ALIASES[family_raw]

    theta = cfg.parse("theta", _float_list, required=False, default=())
    if family is not CopulaFamily.INDEPENDENCE and not theta:
        raise ConfigError(
            f"{path}: family={family.value} requires an explicit theta key"
        )

    spec = RunSpec(
        name=cfg.parse("name", str.strip),
        kind=kind,
        target=cfg.parse("target", str.strip, required=False, default=""),
        family=family,
        theta=theta if family is not CopulaFamily.INDEPENDENCE else (),
        m=cfg.parse("m", _int_list),
        r=cfg.parse("r", _int_list),
        p=cfg.parse("p", _float_value),
        n=cfg.parse("n", _int_value, required=kind == "type1"),
        n_grid=cfg.parse("n_grid", _int_list, required=kind == "power", default=()),
        r_alt=cfg.parse("r_alt", _int_value, required=False),
        replications=cfg.parse("M", _int_value),
        alphas=cfg.parse("alphas", _float_list),
        seed=cfg.parse("seed", _int_value),
        methods=cfg.parse(
            "methods", _method_list, required=False,
            default=(Method.CCT, Method.FISHER, Method.MINP),
        ),
    )

    if kind == "power":
        if not spec.n_grid:
            raise cfg.fail("n_grid", "must list at least one sample size")
        if len(spec.m) != 1 or len(spec.r) != 1:
            raise ConfigError(f"{path}: power configs need scalar m and r")
        if len(spec.theta) > 1:
            raise cfg.fail("theta", "power configs need a scalar theta")
    # Surface domain errors (theta bounds, p range, ...) with an anchor.
    try:
        expand_cells(spec)
    except ConfigError:
        raise
    except ValueError as exc:
        msg = str(exc)
        key = "theta" if "theta" in msg else ("p" if " p " in msg or "p must" in msg else "m")
        raise cfg.fail(key, msg) from exc
    return spec


def serialize_config(spec: RunSpec) -> str:
    """Render a RunSpec back to config text (parse -> serialize round-trips)."""
    lines = [f"[{_SECTION}]", f"name = {spec.name}", f"kind = {spec.kind}"]
    if spec.target:
        lines.append(f"target = {spec.target}")
    lines.append(f"family = {spec.family.value}")
    if spec.theta:
        lines.append("theta = " + ", ".join(f"{t:g}" for t in spec.theta))
    lines.append("m = " + ", ".join(str(v) for v in spec.m))
    lines.append("r = " + ", ".join(str(v) for v in spec.r))
    lines.append(f"p = {spec.p:g}")
    if spec.kind == "type1":
        lines.append(f"n = {spec.n}")
    else:
        lines.append("n_grid = " + ", ".join(str(v) for v in spec.n_grid))
        if spec.r_alt is not None:
            lines.append(f"r_alt = {spec.r_alt}")
    lines.append(f"M = {spec.replications}")
    lines.append("alphas = " + ", ".join(f"{a:g}" for a in spec.alphas))
    lines.append(f"seed = {spec.seed}")
    lines.append("methods = " + ", ".join(mth.value for mth in spec.methods))
    return "\n".join(lines) + "\n"


def _cell_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence((master_seed, index)).generate_state(1, np.uint64)[0])


def _copula_for(spec: RunSpec, theta: float | None, m: int) -> CopulaSpec | None:
    if spec.family is CopulaFamily.INDEPENDENCE:
        return None
    return CopulaSpec(family=spec.family, theta=float(theta), dim=m)


def expand_cells(spec: RunSpec, seed_override: int | None = None) -> list[ExperimentConfig]:
    """Expand a RunSpec into its grid of ExperimentConfig cells, in order."""
    seed = spec.seed if seed_override is None else seed_override
    cells: list[ExperimentConfig] = []
    if spec.kind == "type1":
        thetas = spec.theta if spec.family is not CopulaFamily.INDEPENDENCE else (None,)
        index = 0
        for m in spec.m:
            for r in spec.r:
                for theta in thetas:
                    marginals = (NegBinParams(r=r, p=spec.p),) * m
                    ident = f"{spec.name}:m={m},r={r}"
                    if theta is not None:
                        ident += f",theta={theta:g}"
                    cells.append(
                        ExperimentConfig(
                            dataset=DatasetSpec(
                                marginals=marginals,
                                copula=_copula_for(spec, theta, m),
                                n=spec.n,
                            ),
                            null=NullSpec.from_negbin(marginals),
                            replications=spec.replications,
                            alpha_levels=spec.alphas,
                            seed=_cell_seed(seed, index),
                            methods=spec.methods,
                            experiment_id=ident,
                        )
                    )
                    index += 1
        return cells

    m, r = spec.m[0], spec.r[0]
    r_alt = spec.r_alt if spec.r_alt is not None else r + 1
    theta = spec.theta[0] if spec.theta else None
    null_marginals = (NegBinParams(r=r, p=spec.p),) * m
    marginals = null_marginals[:-1] + (NegBinParams(r=r_alt, p=spec.p),)
    for index, n in enumerate(spec.n_grid):
        cells.append(
            ExperimentConfig(
                dataset=DatasetSpec(
                    marginals=marginals,
                    copula=_copula_for(spec, theta, m),
                    n=n,
                ),
                null=NullSpec.from_negbin(null_marginals),
                replications=spec.replications,
                alpha_levels=spec.alphas,
                seed=_cell_seed(seed, index),
                methods=spec.methods,
                experiment_id=f"{spec.name}:n={n}",
            )
        )
    return cells


def bundled_config_path(name: str) -> Path:
    """Path of a bundled reproduction config, e.g. 'table1_independence'."""
    path = Path(str(resources.files("countcombine") / "configs" / f"{name}.ini"))
    if not path.is_file():
        raise FileNotFoundError(f"no bundled config named {name!r}")
    return path


def _format_row(row: dict) -> dict:
    out = dict(row)
    out["alpha"] = f"{row['alpha']:g}"
    out["p"] = f"{row['p']:g}"
    out["theta"] = f"{row['theta']:g}"
    out["rate"] = f"{row['rate']:.6g}"
    out["se"] = f"{row['se']:.6g}"
    return out


def _write_results(path: Path, fmt: str, spec: RunSpec, rows: list[dict]) -> None:
    meta = {"name": spec.name, "kind": spec.kind, "target": spec.target, "seed": spec.seed}
    if fmt == "csv":
        with open(path, "w", newline="") as handle:
            for key, value in meta.items():
                handle.write(f"# {key}: {value}\n")
            writer = csv.DictWriter(handle, fieldnames=REPORT_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow(_format_row(row))
    else:
        with open(path, "w") as handle:
            json.dump({**meta, "rows": rows}, handle, indent=2)
            handle.write("\n")


def _prepare_output(manifest: RunManifest, filename: str) -> Path:
    manifest.output_dir.mkdir(parents=True, exist_ok=True)
    out_path = manifest.output_dir / filename
    if out_path.exists() and not manifest.overwrite:
        raise FileExistsError(f"{out_path} exists; pass --overwrite to replace it")
    return out_path


def _manifest(args) -> RunManifest:
    return RunManifest(
        config_path=Path(args.config),
        output_dir=Path(args.out),
        format=args.format,
        parallelism=args.parallelism,
        seed_override=args.seed,
        overwrite=args.overwrite,
    )


def _run_kind(args, kind: str) -> int:
    manifest = _manifest(args)
    spec = parse_config(manifest.config_path)
    if spec.kind != kind:
        raise ConfigError(
            f"{manifest.config_path}: config has kind={spec.kind}, expected {kind}"
        )
    cells = expand_cells(spec, seed_override=manifest.seed_override)
    results = run_grid(cells, parallelism=manifest.parallelism)
    rows: list[dict] = []
    failed = 0
    for cell in results:
        if cell.report is not None:
            rows.extend(cell.report.to_rows())
        else:
            failed += 1
            print(f"cell {cell.config.experiment_id}: {cell.error}", file=sys.stderr)
    out_path = _prepare_output(manifest, f"{spec.name}.{manifest.format}")
    _write_results(out_path, manifest.format, spec, rows)
    print(f"wrote {len(rows)} rows to {out_path}")
    return 1 if failed else 0


def cmd_type1(args) -> int:
    return _run_kind(args, "type1")


def cmd_power(args) -> int:
    return _run_kind(args, "power")


def cmd_combine(args) -> int:
    if args.file is not None:
        try:
            values = [float(tok) for tok in Path(args.file).read_text().split()]
        except OSError as exc:
            raise ConfigError(str(exc)) from exc
        except ValueError as exc:
            raise ConfigError(f"{args.file}: {exc}") from exc
    else:
        values = args.pvalues
    if not values:
        raise ConfigError("no p-values given (pass them inline or via --file)")
    if any(not 0.0 <= v <= 1.0 for v in values):
        raise ConfigError("p-values must lie in [0, 1]")
    weights = args.weights
    if weights is not None and len(weights) != len(values):
        raise ConfigError("--weights must match the number of p-values")
    method = _method_from_name(args.method)
    pv = PValueVector(np.asarray(values), None if weights is None else np.asarray(weights))
    result = COMBINERS[method](pv)
    print(f"method {result.method.value}")
    print(f"statistic {result.statistic:.6g}")
    print(f"pvalue {result.pvalue:.6g}")
    return 0


def cmd_sample(args) -> int:
    manifest = _manifest(args)
    spec = parse_config(manifest.config_path)
    cells = expand_cells(spec, seed_override=manifest.seed_override)
    config = cells[0]
    rng = np.random.Generator(np.random.PCG64(config.seed))
    data = generate_dataset(config.dataset, rng)
    out_path = _prepare_output(manifest, f"{spec.name}.tsv")
    dump_counts(data, out_path)
    print(f"wrote {data.values.shape[0]}x{data.values.shape[1]} counts to {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="countcombine",
        description="Monte Carlo experiments for p-value combination tests on count data",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--parallelism", type=int, default=1, metavar="N")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--overwrite", action="store_true")

    p_type1 = sub.add_parser("type1", help="run a type-1-error grid")
    add_run_flags(p_type1)
    p_type1.set_defaults(func=cmd_type1)

    p_power = sub.add_parser("power", help="run a power curve")
    add_run_flags(p_power)
    p_power.set_defaults(func=cmd_power)

    p_combine = sub.add_parser("combine", help="combine p-values on stdout")
    p_combine.add_argument("--method", required=True, help="cct, fisher, or minp")
    p_combine.add_argument("--weights", type=float, nargs="+", default=None)
    p_combine.add_argument("--file", default=None, help="read p-values from a file")
    p_combine.add_argument("pvalues", type=float, nargs="*")
    p_combine.set_defaults(func=cmd_combine)

    p_sample = sub.add_parser("sample", help="dump one generated dataset")
    add_run_flags(p_sample)
    p_sample.set_defaults(func=cmd_sample)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
