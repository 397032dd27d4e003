"""Command-line driver: ``cognatephylo {detect,matrix,mcmc,gqd,pipeline,simulate}``.

Output layout under ``--out``::

    <METHOD>/partition.tsv   cognate partition
    <METHOD>/matrix.tsv      binary character matrix (plus matrix.phy)
    <METHOD>/run{1,2}.log.tsv, run{1,2}.trees, posterior.trees, convergence.tsv
    bcubed.tsv               precision / recall / F per method
    gqd.tsv                  GQD mean and sd per method

Exit status: 0 success, 1 usage or configuration error, 2 data error,
3 the chains ran but did not converge.
"""

from __future__ import annotations

import argparse
import io
import logging
import os
import sys
import tempfile
import zlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__, bcubed, treedist
from .charmatrix import CharacterMatrix, read_matrix, to_matrix, write_matrix, write_phylip
from .cogcluster import (
    CognatePartition,
    DetectConfig,
    detect_cognates,
    read_partition,
    write_partition,
)
from .config import EXPERT, Config, load_config
from .errors import CognatePhyloError, ConfigurationError
from .pairsim import lexstat_train, online_pmi_train
from .phylo.mcmc import (
    DualRunResult,
    McmcConfig,
    chain_seeds,
    dual_run,
    write_sample_log,
)
from .phylo.model import GammaRates, SubstModel2
from .phylo.simulate import igr_branch_rates, simulate_characters
from .phylo.timetree import TimeTree
from .tree import Tree, parse_newick, read_newick_lines
from .wordlist import Wordlist, read_wordlist

log = logging.getLogger("cognatephylo")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_UNCONVERGED = 0, 1, 2, 3
COMMANDS = ("detect", "matrix", "mcmc", "gqd", "pipeline", "simulate")
CONVERGENCE_COLUMNS = ("ASDSF", "THRESHOLD", "MIN_FREQ", "CONVERGED", "N_RUN1", "N_RUN2", "N_POOLED")


class UsageError(Exception):
    pass


class MethodError(CognatePhyloError):
    """A stage failed for one method; ``cause`` keeps the original error."""

    def __init__(self, method: str, cause: Exception):
        super().__init__(f"{method}: {cause}")
        self.method = method
        self.cause = cause


# ---------------------------------------------------------------------------
# Output helpers


def atomic_write(path: Path, text: str) -> None:
    """Write via a temporary sibling file and rename it into place."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render(writer: Callable, *args, **kwargs) -> str:
    buf = io.StringIO()
    writer(*args, buf, **kwargs)
    return buf.getvalue()


def stage_seed(seed: int, method: str, stage: str) -> int:
    """Independent, reproducible seed per (run seed, method, stage)."""
    key = [seed & 0xFFFFFFFF, zlib.crc32(method.encode()), zlib.crc32(stage.encode())]
    return int(np.random.SeedSequence(key).generate_state(1)[0])


@dataclass
class Context:
    cfg: Config
    out: Path
    methods: tuple[str, ...]
    seed: int
    notes: list[str] = field(default_factory=list)

    def header(self, *extra: str) -> list[str]:
        return [f"cognatephylo {__version__}", f"numpy {np.__version__}", f"config {self.cfg.digest()}",
                f"seed {self.seed}", *extra]

    def method_dir(self, method: str) -> Path:
        return self.out / method


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigurationError(f"missing input file {str(path)!r}") from None


# ---------------------------------------------------------------------------
# Stages (one method each)


def run_detect(ctx: Context, wl: Wordlist, method: str) -> CognatePartition:
    cfg = ctx.cfg
    if method == EXPERT:
        if not wl.has_gold:
            raise ConfigurationError("EXPERT partition needs COGNATE_ID for every row")
        part = CognatePartition.from_gold(wl)
    else:
        seed = stage_seed(ctx.seed, method, "detect")
        dc = DetectConfig(thresholds={m: cfg[f"threshold.{m}"] for m in ("NED", "SCA", "LEXSTAT", "ONLINEPMI")},
                          seed=seed)
        if method == "LEXSTAT":
            dc.lexstat = lexstat_train(wl, n_perm=cfg["lexstat.n_perm"], seed=stage_seed(ctx.seed, method, "train"),
                                       prefilter=cfg["lexstat.prefilter"], epsilon=cfg["lexstat.epsilon"])
        elif method == "ONLINEPMI":
            dc.pmi = online_pmi_train(wl, batch_size=cfg["pmi.batch_size"], iterations=cfg["pmi.iterations"],
                                      mix=cfg["pmi.mix"], seed=stage_seed(ctx.seed, method, "train"),
                                      gap_open=cfg["pmi.gap_open"], gap_extend=cfg["pmi.gap_extend"])
            atomic_write(ctx.method_dir(method) / "pmi.tsv", dc.pmi.dumps())
        part = detect_cognates(wl, method, dc)
    atomic_write(ctx.method_dir(method) / "partition.tsv", render(write_partition, part))
    log.info("%s: %d cognate sets", method, part.n_clusters())
    return part


def run_matrix(ctx: Context, wl: Wordlist, part: CognatePartition, method: str) -> CharacterMatrix:
    X = to_matrix(wl, part)
    atomic_write(ctx.method_dir(method) / "matrix.tsv", render(write_matrix, X))
    atomic_write(ctx.method_dir(method) / "matrix.phy", render(write_phylip, X))
    log.info("%s: matrix %d x %d", method, X.n_languages, X.n_columns)
    return X


def mcmc_config(cfg: Config, seed: int) -> McmcConfig:
    weights = {k.rsplit(".", 1)[1]: cfg[k] for k in cfg if k.startswith("mcmc.weight.")}
    return McmcConfig(generations=cfg["mcmc.generations"], sample_every=cfg["mcmc.sample_every"], seed=seed,
                      weights=weights, ascertainment=cfg["mcmc.ascertainment"])


def pooled(ctx: Context, res: DualRunResult) -> list:
    return res.post1 + res.post2 if ctx.cfg["eval.pool"] == "both" else res.post1


def run_mcmc(ctx: Context, X: CharacterMatrix, method: str) -> DualRunResult:
    cfg = ctx.cfg
    mc = mcmc_config(cfg, stage_seed(ctx.seed, method, "mcmc"))
    seeds = chain_seeds(mc.seed)
    try:
        mc.validate()
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None
    res = dual_run(X, mc, seeds=seeds, min_freq=cfg["eval.min_freq"], threshold=cfg["eval.asdsf_threshold"])
    d = ctx.method_dir(method)
    for i, run in enumerate((res.run1, res.run2), 1):
        atomic_write(d / f"run{i}.log.tsv", render(write_sample_log, run))
        atomic_write(d / f"run{i}.trees", "".join(s.tree + "\n" for s in run))
    post = pooled(ctx, res)
    atomic_write(d / "posterior.trees", "".join(s.tree + "\n" for s in post))
    header = ctx.header(f"chain seeds {seeds[0]} {seeds[1]}", "burn-in first 50% of each run",
                        f"pooled {cfg['eval.pool']}")
    row = (repr(res.asdsf), repr(res.threshold), repr(cfg["eval.min_freq"]), str(res.converged).lower(),
           str(len(res.post1)), str(len(res.post2)), str(len(post)))
    text = "".join(f"# {h}\n" for h in header) + "\t".join(CONVERGENCE_COLUMNS) + "\n" + "\t".join(row) + "\n"
    atomic_write(d / "convergence.tsv", text)
    log.info("%s: ASDSF %.4f (%s)", method, res.asdsf, "converged" if res.converged else "not converged")
    return res


def load_gold(ctx: Context, languages: Optional[Sequence[str]] = None) -> Tree:
    ctx.cfg.require_paths(["gold_tree"])
    gold = parse_newick(_read_text(ctx.cfg.path("gold_tree")).strip())
    if languages is not None and set(languages) != gold.leaf_set:
        diff = sorted(set(languages) ^ gold.leaf_set)
        raise CognatePhyloError(f"gold tree and data disagree on languages: {diff}")
    return gold


def run_gqd(ctx: Context, samples: Sequence[Tree], gold: Tree, method: str) -> tuple[float, float, int]:
    ddof = 1 if ctx.cfg["eval.sd"] == "sample" else 0
    values = treedist.gqd_values(samples, gold)
    if not values:
        raise CognatePhyloError("no posterior samples")
    if ddof and len(values) < 2:
        raise ConfigurationError("sample sd needs at least two trees")
    arr = np.array(values)
    if ctx.cfg["eval.histogram"]:
        atomic_write(ctx.method_dir(method) / "gqd_hist.txt", treedist.gqd_histogram(values) + "\n")
    return float(arr.mean()), float(arr.std(ddof=ddof)), len(values)


# ---------------------------------------------------------------------------
# Commands


def _wordlist(ctx: Context) -> Wordlist:
    ctx.cfg.require_paths(["wordlist"])
    return read_wordlist(ctx.cfg.path("wordlist"))


def _want_bcubed(ctx: Context, wl: Wordlist) -> bool:
    mode = ctx.cfg["eval.bcubed"]
    if mode == "yes" and not wl.has_gold:
        raise ConfigurationError("B-cubed evaluation requested but the wordlist has no COGNATE_ID column")
    return mode == "yes" or (mode == "auto" and wl.has_gold)


def _wrap(method: str, func: Callable, *args):
    try:
        return func(*args)
    except MethodError:
        raise
    except (CognatePhyloError, ValueError) as exc:
        raise MethodError(method, exc) from exc


def _bcubed_rows(ctx: Context, parts: dict, gold: Optional[CognatePartition]) -> list:
    rows = []
    for m in ctx.methods:
        if m == EXPERT:
            continue
        part = parts.get(m)
        res = bcubed.bcubed(part, gold, ctx.cfg["eval.average"]) if part is not None else None
        rows.append((m, ctx.cfg["family"], res))
    return rows


def cmd_detect(ctx: Context) -> int:
    wl = _wordlist(ctx)
    evaluate = _want_bcubed(ctx, wl)
    parts = {m: _wrap(m, run_detect, ctx, wl, m) for m in ctx.methods}
    if evaluate:
        rows = _bcubed_rows(ctx, parts, CognatePartition.from_gold(wl))
        hdr = ctx.header(f"averaging {ctx.cfg['eval.average']}")
        atomic_write(ctx.out / "bcubed.tsv", render(bcubed.write_report, rows, header=hdr))
    return EXIT_OK


def _partition_for(ctx: Context, method: str) -> CognatePartition:
    path = ctx.cfg.path("partition") if len(ctx.methods) == 1 and ctx.cfg["partition"] else None
    return read_partition(_read_text(path or ctx.method_dir(method) / "partition.tsv"))


def cmd_matrix(ctx: Context) -> int:
    wl = _wordlist(ctx)
    for m in ctx.methods:
        _wrap(m, lambda: run_matrix(ctx, wl, _partition_for(ctx, m), m))
    return EXIT_OK


def _matrix_for(ctx: Context, method: str) -> CharacterMatrix:
    path = ctx.cfg.path("matrix") if len(ctx.methods) == 1 and ctx.cfg["matrix"] else None
    return read_matrix(_read_text(path or ctx.method_dir(method) / "matrix.tsv"))


def cmd_mcmc(ctx: Context) -> int:
    status = EXIT_OK
    for m in ctx.methods:
        res = _wrap(m, lambda: run_mcmc(ctx, _matrix_for(ctx, m), m))
        if not res.converged:
            status = EXIT_UNCONVERGED
    return status


def _samples_for(ctx: Context, method: str) -> list[Tree]:
    if len(ctx.methods) == 1 and ctx.cfg["samples"]:
        paths = [Path(p) for p in ctx.cfg["samples"]]
    else:
        paths = [ctx.method_dir(method) / "posterior.trees"]
    trees: list[Tree] = []
    for p in paths:
        trees.extend(read_newick_lines(_read_text(p).splitlines()))
    return trees


def _gqd_report(ctx: Context, cells: dict) -> None:
    rows = []
    for m in ctx.methods:
        mean, sd, n = cells.get(m, (None, None, 0))
        rows.append({"METHOD": m, "FAMILY": ctx.cfg["family"], "GQD_MEAN": mean, "GQD_SD": sd, "N_SAMPLES": n})
    hdr = ctx.header(f"sd {ctx.cfg['eval.sd']}", f"pooled {ctx.cfg['eval.pool']}", *ctx.notes)
    atomic_write(ctx.out / "gqd.tsv", render(treedist.write_report, rows, header=hdr))


def cmd_gqd(ctx: Context) -> int:
    gold = load_gold(ctx)
    cells = {m: _wrap(m, lambda: run_gqd(ctx, _samples_for(ctx, m), gold, m)) for m in ctx.methods}
    _gqd_report(ctx, cells)
    for m, (mean, sd, _) in cells.items():
        print(f"{m}\t{treedist.format_cell(mean, sd)}")
    return EXIT_OK


def cmd_pipeline(ctx: Context) -> int:
    wl = _wordlist(ctx)
    evaluate = _want_bcubed(ctx, wl)
    if EXPERT in ctx.methods and not wl.has_gold:
        log.warning("no COGNATE_ID column: skipping EXPERT")
        ctx.methods = tuple(m for m in ctx.methods if m != EXPERT)
    gold = load_gold(ctx, wl.languages)
    treedist.gqd(gold, gold)  # fail early on a star gold tree
    parts, cells, failed, unconverged = {}, {}, [], []
    for m in ctx.methods:
        try:
            part = _wrap(m, run_detect, ctx, wl, m)
            parts[m] = part
            X = _wrap(m, run_matrix, ctx, wl, part, m)
            res = _wrap(m, run_mcmc, ctx, X, m)
            if not res.converged:
                unconverged.append(m)
            trees = [s.parse_tree() for s in pooled(ctx, res)]
            cells[m] = _wrap(m, run_gqd, ctx, trees, gold, m)
        except MethodError as exc:
            log.error("%s (later stages skipped)", exc)
            failed.append(m)
    if evaluate:
        rows = _bcubed_rows(ctx, parts, CognatePartition.from_gold(wl))
        hdr = ctx.header(f"averaging {ctx.cfg['eval.average']}")
        atomic_write(ctx.out / "bcubed.tsv", render(bcubed.write_report, rows, header=hdr))
    if unconverged:
        ctx.notes.append("unconverged " + ",".join(unconverged))
    if failed:
        ctx.notes.append("skipped " + ",".join(failed))
    _gqd_report(ctx, cells)
    if failed:
        return EXIT_DATA
    return EXIT_UNCONVERGED if unconverged else EXIT_OK


def cmd_simulate(ctx: Context) -> int:
    cfg = ctx.cfg
    cfg.require_paths(["simulate.tree"])
    tree = TimeTree.from_tree(parse_newick(_read_text(cfg.path("simulate.tree")).strip()))
    rng = np.random.default_rng(stage_seed(ctx.seed, "SIMULATE", "rates"))
    rates = igr_branch_rates(tree, cfg["simulate.sigma2"], rng)
    X = simulate_characters(tree, SubstModel2(cfg["simulate.pi0"]), GammaRates(cfg["simulate.alpha"]),
                            branch_rates=rates, n_sites=cfg["simulate.sites"],
                            seed=stage_seed(ctx.seed, "SIMULATE", "sites"))
    atomic_write(ctx.out / "simulated" / "matrix.tsv", render(write_matrix, X))
    atomic_write(ctx.out / "simulated" / "tree.nwk", tree.to_newick() + "\n")
    return EXIT_OK


HANDLERS = {"detect": cmd_detect, "matrix": cmd_matrix, "mcmc": cmd_mcmc, "gqd": cmd_gqd,
            "pipeline": cmd_pipeline, "simulate": cmd_simulate}


# ---------------------------------------------------------------------------
# Entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def tutorial_config() -> Path:
    return Path(str(resources.files("cognatephylo") / "data" / "tutorial" / "config.txt"))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cognatephylo", description="Cognate detection to Bayesian trees to GQD evaluation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--tutorial", action="store_true", help="use the bundled tutorial config")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--method", action="append", default=[], help="restrict to a method (repeatable)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"cognatephylo: usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.config and args.tutorial:
            raise ConfigurationError("--config and --tutorial are mutually exclusive")
        overrides = list(args.set)
        if args.seed is not None:
            overrides.append(f"seed={args.seed}")
        if args.method:
            overrides.append("methods=" + ",".join(args.method))
        cfg = load_config(tutorial_config() if args.tutorial else args.config, overrides)
        ctx = Context(cfg, Path(args.out), cfg.methods(), cfg["seed"])
        return HANDLERS[args.command](ctx)
    except ConfigurationError as exc:
        print(f"cognatephylo: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MethodError as exc:
        code = EXIT_CONFIG if isinstance(exc.cause, ConfigurationError) else EXIT_DATA
        print(f"cognatephylo: error: {exc}", file=sys.stderr)
        return code
    except (CognatePhyloError, ValueError, OSError) as exc:
        print(f"cognatephylo: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
