"""Command-line front end: ``simulate``, ``identify``, ``fit`` and ``mc``.

Every command reads one JSON configuration document::

    {
      "theta": {...Theta document...} | {"generator": {"variant": "Baseline", "T": 4, "r_bar": 1}},
      "n_units": 2000,            # or a list for mc
      "n_replications": 50,
      "seed": 12345,
      "output_dir": "out",
      "formats": ["json", "csv"],
      "delta": [...], "loading_spec": {...}, "fit_options": {...}, "n_minors": 2
    }

Exit status is 0 on success, 1 for configuration or precondition errors and
2 for numerical failures. Results are identical for any ``--workers``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from .estimate import FitOptions, fit, pack
from .ident_check import DegeneratePolynomialError, check_theta
from .model_core import NotPositiveDefiniteError, Theta, Variant, min_periods, random_theta
from .poly_minors import RankConditionError
from .simulate import LoadingSpec, gen_panel, read_binary, read_csv, sample_cov, write_binary, write_csv

__all__ = ["ConfigError", "ExperimentConfig", "run", "main", "replication_seed"]

COMMANDS = ("simulate", "identify", "fit", "mc")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class ConfigError(ValueError):
    """The configuration is malformed or violates a module precondition."""


@dataclass
class ExperimentConfig:
    command: str
    theta: Optional[Theta] = None
    generator: Optional[dict] = None
    n_units: list[int] = field(default_factory=lambda: [1000])
    n_replications: int = 1
    seed: Optional[int] = None
    output_dir: Path = Path("out")
    formats: tuple[str, ...] = ("json", "csv")
    delta: Optional[list[float]] = None
    loading_spec: LoadingSpec = field(default_factory=LoadingSpec)
    fit_options: dict = field(default_factory=dict)
    n_minors: Optional[int] = 2
    data: Optional[Path] = None
    variant: Optional[Variant] = None
    r_bar: Optional[int] = None
    workers: int = 1

    @classmethod
    def from_dict(cls, doc: dict, command: Optional[str] = None) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("configuration must be a JSON object")
        cmd = command or doc.get("command")
        if cmd not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}, got {cmd!r}")
        theta = generator = None
        tdoc = doc.get("theta")
        if isinstance(tdoc, dict) and "generator" in tdoc:
            generator = dict(tdoc["generator"])
        elif isinstance(tdoc, dict):
            try:
                theta = Theta.from_dict(tdoc).validate()
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"invalid theta: {exc}") from exc
        elif tdoc is not None:
            raise ConfigError("theta must be a Theta document or {'generator': {...}}")
        if generator is not None:
            try:
                generator["variant"] = Variant(generator.get("variant", "Baseline")).value
                generator["T"] = int(generator["T"])
                generator["r_bar"] = int(generator.get("r_bar", 1))
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"invalid theta generator: {exc}") from exc
        n_units = doc.get("n_units", 1000)
        n_units = [int(n) for n in (n_units if isinstance(n_units, list) else [n_units])]
        if any(n < 2 for n in n_units):
            raise ConfigError("n_units must be at least 2")
        n_rep = int(doc.get("n_replications", 1))
        if n_rep < 1:
            raise ConfigError("n_replications must be >= 1")
        formats = doc.get("formats", ["json", "csv"])
        formats = tuple([formats] if isinstance(formats, str) else formats)
        if not set(formats) <= {"json", "csv"}:
            raise ConfigError(f"formats must be a subset of {{json, csv}}, got {list(formats)}")
        seed = doc.get("seed")
        if seed is not None:
            seed = int(seed)
            if seed < 0 or seed >= 1 << 64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
        try:
            spec = LoadingSpec.from_dict(doc.get("loading_spec"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        variant = doc.get("variant")
        return cls(
            command=cmd,
            theta=theta,
            generator=generator,
            n_units=n_units,
            n_replications=n_rep,
            seed=seed,
            output_dir=Path(doc.get("output_dir", "out")),
            formats=formats,
            delta=doc.get("delta"),
            loading_spec=spec,
            fit_options=dict(doc.get("fit_options", {})),
            n_minors=doc.get("n_minors", 2),
            data=Path(doc["data"]) if doc.get("data") else None,
            variant=Variant(variant) if variant else None,
            r_bar=doc.get("r_bar"),
        )

    def check(self) -> None:
        """Command-specific preconditions."""
        randomized = self.command in ("simulate", "mc") or self.generator is not None or (
            self.command == "fit" and self.data is None
        )
        if randomized and self.seed is None:
            raise ConfigError(f"'{self.command}' is randomized and needs a seed")
        if self.command in ("simulate", "mc") and self.theta is None and self.generator is None:
            raise ConfigError(f"'{self.command}' needs theta")
        if self.command == "identify" and self.theta is None and self.generator is None:
            raise ConfigError("'identify' needs theta or a theta generator")
        if self.command == "fit" and self.data is None and self.theta is None and self.generator is None:
            raise ConfigError("'fit' needs data or theta to simulate from")
        if self.command == "fit" and self.data is not None and self.r_bar is None and self.theta is None:
            raise ConfigError("'fit' on a data file needs r_bar (and variant)")
        if self.generator is not None:
            g = self.generator
            need = min_periods(Variant(g["variant"]), g["r_bar"])
            if g["T"] < need and self.command != "identify":
                raise ConfigError(f"{g['variant']} needs T >= {need}, got {g['T']}")
        if self.command in ("simulate", "fit", "mc") and self.theta is not None and self.delta is not None:
            if len(self.delta) != self.theta.big_t:
                raise ConfigError(f"delta must have length T={self.theta.big_t}")


def replication_seed(seed: int, *path: int) -> int:
    """Independent 64-bit seed for a replication index path."""
    return int(np.random.SeedSequence([seed, *path]).generate_state(1, dtype=np.uint64)[0])


def _draw_theta(cfg: ExperimentConfig, *path: int) -> Theta:
    if cfg.theta is not None:
        return cfg.theta
    g = cfg.generator
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 7, *path]))
    return random_theta(g["variant"], g["T"], g["r_bar"], rng, alpha=g.get("alpha"))


def _pmap(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _write_json(path: Path, obj: Any) -> None:
    path.write_text(json.dumps(obj, indent=2, allow_nan=True) + "\n")


def _write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)


def _print_table(header: Sequence[str], rows: Sequence[Sequence[Any]], out=None) -> None:
    out = sys.stdout if out is None else out

    def fmt(x):
        if isinstance(x, float):
            return f"{x:.6g}"
        return str(x)

    cells = [[fmt(h) for h in header]] + [[fmt(x) for x in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for n, r in enumerate(cells):
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)), file=out)
        if n == 0:
            print("  ".join("-" * w for w in widths), file=out)


# -- commands ----------------------------------------------------------------


def _sim_task(args):
    cfg, rep, n = args
    theta = _draw_theta(cfg, rep)
    seed = replication_seed(cfg.seed, rep)
    return gen_panel(theta, cfg.delta, n, seed, cfg.loading_spec)


def cmd_simulate(cfg: ExperimentConfig) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(cfg, rep, cfg.n_units[0]) for rep in range(cfg.n_replications)]
    panels = _pmap(_sim_task, tasks, cfg.workers)
    meta = []
    for rep, p in enumerate(panels):
        stem = f"panel_{rep:04d}"
        write_binary(p, out / f"{stem}.pnls")
        if "csv" in cfg.formats:
            write_csv(p, out / f"{stem}.csv")
        meta.append({"replication": rep, "seed": p.seed, "N": p.n_units, "T": p.big_t,
                     "theta": p.theta_used.to_dict(), "delta": p.delta.tolist(),
                     "loading_spec": p.loading_spec.to_dict()})
    if "json" in cfg.formats:
        _write_json(out / "panels.json", meta)
    _print_table(["replication", "seed", "N", "T"], [[m["replication"], m["seed"], m["N"], m["T"]] for m in meta])
    return EXIT_OK


def _ident_task(args):
    cfg, i = args
    theta = _draw_theta(cfg, i)
    return check_theta(theta, n_minors=cfg.n_minors)


def cmd_identify(cfg: ExperimentConfig) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    n = cfg.n_replications if cfg.generator is not None else 1
    reports = _pmap(_ident_task, [(cfg, i) for i in range(n)], cfg.workers)
    k = (cfg.theta or _draw_theta(cfg, 0)).r_bar + 1
    r_bar = k - 1
    degrees: dict[str, int] = {}
    violations = 0
    for rep in reports:
        for pm in rep.per_minor:
            key = "zero" if pm.zero_poly else str(int(pm.degree))
            degrees[key] = degrees.get(key, 0) + 1
            kk = pm.minor.k
            if pm.zero_poly or not (max(0, kk - r_bar) <= pm.degree <= 2 * kk - 1):
                violations += 1
    n_ok = sum(r.identified for r in reports)
    variant = reports[0].variant.value
    summary = {
        "variant": variant,
        "draws": n,
        "identified": n_ok,
        "identified_rate": n_ok / n,
        "degree_histogram": dict(sorted(degrees.items())),
        "degree_bound": [1, 2 * r_bar + 1],
        "degree_bound_violations": violations,
    }
    if "json" in cfg.formats:
        _write_json(out / "reports.json", [r.to_dict() for r in reports])
        _write_json(out / "summary.json", summary)
    if "csv" in cfg.formats:
        _write_table(
            out / "reports.csv",
            ["draw", "identified", "alpha_true", "common_roots", "labels"],
            [[i, r.identified, r.alpha_true, ";".join(f"{x:.12g}" for x in r.common_roots), ";".join(r.labels())]
             for i, r in enumerate(reports)],
        )
    print(f"identified {n_ok}/{n}")
    _print_table(
        ["variant", "draws", "identified", "rate", "degree_violations"],
        [[variant, n, n_ok, n_ok / n, violations]],
    )
    _print_table(["degree", "count"], [[k_, v] for k_, v in sorted(degrees.items())])
    return EXIT_OK


def _fit_task(args):
    cfg, n, path = args
    theta = _draw_theta(cfg, *path)
    panel = gen_panel(theta, cfg.delta, n, replication_seed(cfg.seed, *path), cfg.loading_spec)
    res = fit(panel, theta.r_bar, theta.variant, FitOptions.from_dict(cfg.fit_options))
    return theta, res


def _fit_row(i, res, theta=None):
    row = [i, res.theta_hat.alpha, res.loglik, res.converged, res.gradient_norm, res.n_iterations, res.start_points_tried]
    if theta is not None:
        row.append(theta.alpha)
    return row


def cmd_fit(cfg: ExperimentConfig) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    results = []
    truths: list[Optional[Theta]] = []
    if cfg.data is not None:
        y = read_binary(cfg.data) if cfg.data.suffix == ".pnls" else read_csv(cfg.data)
        variant = cfg.variant or (cfg.theta.variant if cfg.theta else Variant.BASELINE)
        r_bar = int(cfg.r_bar if cfg.r_bar is not None else cfg.theta.r_bar)
        s = sample_cov(y, divisor="N")
        res = fit((s, y.shape[0]), r_bar, variant, FitOptions.from_dict(cfg.fit_options))
        results.append(res)
        truths.append(None)
    else:
        tasks = [(cfg, cfg.n_units[0], (rep,)) for rep in range(cfg.n_replications)]
        for theta, res in _pmap(_fit_task, tasks, cfg.workers):
            results.append(res)
            truths.append(theta)
    if "json" in cfg.formats:
        docs = []
        for th, r in zip(truths, results):
            d = r.to_dict()
            if th is not None:
                d["theta_true"] = th.to_dict()
            docs.append(d)
        _write_json(out / "fits.json", docs)
    header = ["replication", "alpha_hat", "loglik", "converged", "gradient_norm", "iterations", "starts"]
    if truths[0] is not None:
        header.append("alpha_true")
    rows = [_fit_row(i, r, t) for i, (r, t) in enumerate(zip(results, truths))]
    if "csv" in cfg.formats:
        _write_table(out / "fits.csv", header, rows)
    _print_table(header, rows)
    if not any(r.converged for r in results):
        print("no fit converged", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_mc(cfg: ExperimentConfig) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(cfg, n, (j, rep)) for j, n in enumerate(cfg.n_units) for rep in range(cfg.n_replications)]
    results = _pmap(_fit_task, tasks, cfg.workers)
    rows = []
    detail = []
    for j, n in enumerate(cfg.n_units):
        chunk = results[j * cfg.n_replications : (j + 1) * cfg.n_replications]
        err = np.array([r.theta_hat.alpha - th.alpha for th, r in chunk])
        par = np.array([pack(r.theta_hat) - pack(th) for th, r in chunk])
        conv = sum(r.converged for _, r in chunk)
        rows.append([chunk[0][0].variant.value, n, len(chunk), float(err.mean()), float(np.sqrt(np.mean(err**2))),
                     float(np.sqrt(np.mean(par**2))), conv])
        for rep, (th, r) in enumerate(chunk):
            detail.append([n, rep, th.alpha, r.theta_hat.alpha, r.converged, r.loglik])
    header = ["variant", "N", "replications", "bias_alpha", "rmse_alpha", "rmse_all_params", "converged"]
    if "csv" in cfg.formats:
        _write_table(out / "mc_summary.csv", header, rows)
        _write_table(out / "mc_replications.csv", ["N", "replication", "alpha_true", "alpha_hat", "converged", "loglik"], detail)
    if "json" in cfg.formats:
        _write_json(out / "mc_summary.json", [dict(zip(header, r)) for r in rows])
    _print_table(header, rows)
    return EXIT_OK


_DISPATCH = {"simulate": cmd_simulate, "identify": cmd_identify, "fit": cmd_fit, "mc": cmd_mc}


def run(config: ExperimentConfig) -> int:
    """Validate and execute ``config``; returns the process exit status."""
    try:
        config.check()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _DISPATCH[config.command](config)
    except (np.linalg.LinAlgError, NotPositiveDefiniteError, RankConditionError,
            DegeneratePolynomialError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, OSError) as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="panelid", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("simulate", "generate panels"),
        ("identify", "run identification checks"),
        ("fit", "quasi-ML fit"),
        ("mc", "Monte Carlo sweep over N"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--seed", type=int, help="override the configured seed")
        p.add_argument("--out", help="override output_dir")
        p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
        p.add_argument("--format", help="json, csv or json,csv")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = json.loads(Path(args.config).read_text())
        if args.seed is not None:
            doc["seed"] = args.seed
        if args.out is not None:
            doc["output_dir"] = args.out
        if args.format is not None:
            doc["formats"] = [f.strip() for f in args.format.split(",") if f.strip()]
        cfg = ExperimentConfig.from_dict(doc, command=args.command)
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg.workers = args.workers
    except (OSError, json.JSONDecodeError, ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
