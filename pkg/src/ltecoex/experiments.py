"""Named experiment presets: run the drop grid and write CSV outputs.

Every run kind of an experiment uses the same drop seeds
(``seed_base + drop_index``), so topologies and traffic are shared between
run kinds and differences between them are paired drop by drop.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import __version__
from .config import EXPERIMENTS, ConfigError, RunConfig
from .engine import DropResult, DropSummary, aggregate_drops, run_drop
from .metrics import TABLE_COLUMNS, ComparisonTable, combined_throughput

log = logging.getLogger(__name__)

RUN_KINDS: Dict[str, Dict[str, object]] = {
    "lte_only": {"mode": "lte_only"},
    "wlan_only": {"mode": "wlan_only"},
    "adaptive": {"mode": "adaptive"},
    "mode1": {"mode": "fixed", "fixed_mode": 1},
    "mode2": {"mode": "fixed", "fixed_mode": 2},
    "mode3": {"mode": "fixed", "fixed_mode": 3},
    "mode4": {"mode": "fixed", "fixed_mode": 4},
}

FIG2_KINDS = ("lte_only", "wlan_only", "adaptive")
TABLE_KINDS = ("lte_only", "wlan_only", "adaptive", "mode1", "mode2", "mode3", "mode4")
# per-cycle figures, one LTE arrival rate each (index into lte.lambda_grid)
CYCLE_FIGURES = {"fig3": 0, "fig4": 1, "fig5": 2, "fig6": 3}

CYCLE_HEADER = ("cycle_index", "lte_mbps", "wlan_mbps", "spared_count", "gamma")
SUMMARY_HEADER = ("lambda_l", "run_kind", "mean_lte_mbps", "mean_wlan_mbps", "loss_lte_pct", "loss_wlan_pct")
TABLE_HEADER = ("lambda_l",) + TABLE_COLUMNS
FIG7_HEADER = ("lambda_l", "best", "adaptive", "mode1", "mode2", "mode3", "mode4")


def arm_config(config: RunConfig, kind: str, lambda_l: float) -> RunConfig:
    if kind not in RUN_KINDS:
        raise ConfigError(f"unknown run kind '{kind}'")
    return config.with_overrides(coexistence=RUN_KINDS[kind], lte={"arrival_rate_per_ms": lambda_l})


def _seeded(args):
    config, seed = args
    return run_drop(config, seed)


def run_drops(config: RunConfig) -> List[DropResult]:
    """All drops of one configuration, ordered by drop index."""
    eng = config.engine
    jobs = [(config, eng.seed_base + i) for i in range(eng.drops)]
    if eng.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=eng.workers) as pool:
            return list(pool.map(_seeded, jobs))
    return [_seeded(j) for j in jobs]


@dataclass
class Grid:
    """Drop results keyed by ``(lambda_l, run_kind)``."""

    results: Dict[Tuple[float, str], List[DropResult]] = field(default_factory=dict)

    def summary(self, lambda_l: float, kind: str) -> DropSummary:
        lte_base = wlan_base = None
        if (lambda_l, "lte_only") in self.results and kind != "lte_only":
            lte_base = aggregate_drops(self.results[lambda_l, "lte_only"]).mean_lte_mbps
        if (lambda_l, "wlan_only") in self.results and kind != "wlan_only":
            wlan_base = aggregate_drops(self.results[lambda_l, "wlan_only"]).mean_wlan_mbps
        return aggregate_drops(self.results[lambda_l, kind], lte_base, wlan_base)

    @property
    def lambdas(self) -> List[float]:
        return sorted({lam for lam, _ in self.results})

    def kinds(self) -> List[str]:
        seen = {k for _, k in self.results}
        return [k for k in RUN_KINDS if k in seen]


def run_grid(config: RunConfig, kinds: Iterable[str], lambdas: Iterable[float]) -> Grid:
    grid = Grid()
    for lam in lambdas:
        for kind in kinds:
            log.info("lambda_l=%g %s: %d drops", lam, kind, config.engine.drops)
            grid.results[lam, kind] = run_drops(arm_config(config, kind, lam))
    return grid


# -- CSV output ----------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.6g}"
    return str(value)


def write_csv(header: Sequence[str], rows: Iterable[Sequence], path) -> Path:
    """Header plus rows, floats at 6 significant digits, LF line endings."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def cycle_rows(summary: DropSummary) -> List[Tuple]:
    return [
        (i, lte, wlan, spared, gamma)
        for i, lte, wlan, spared, gamma in zip(
            summary.cycle_index, summary.lte_mbps, summary.wlan_mbps, summary.spared_count, summary.gamma
        )
    ]


def summary_rows(grid: Grid) -> List[Tuple]:
    rows = []
    for lam in grid.lambdas:
        for kind in grid.kinds():
            s = grid.summary(lam, kind)
            rows.append((lam, kind, s.mean_lte_mbps, s.mean_wlan_mbps, s.loss_lte_pct, s.loss_wlan_pct))
    return rows


def comparison_tables(grid: Grid) -> Tuple[ComparisonTable, ComparisonTable]:
    """WLAN and LTE tables; the best column is the single-system run."""
    wlan, lte = ComparisonTable("wlan"), ComparisonTable("lte")
    for lam in grid.lambdas:
        wlan.set(lam, "best", grid.summary(lam, "wlan_only").mean_wlan_mbps)
        lte.set(lam, "best", grid.summary(lam, "lte_only").mean_lte_mbps)
        for kind in ("adaptive", "mode1", "mode2", "mode3", "mode4"):
            s = grid.summary(lam, kind)
            wlan.set(lam, kind, s.mean_wlan_mbps)
            lte.set(lam, kind, s.mean_lte_mbps)
    return wlan, lte


def combined_rows(wlan: ComparisonTable, lte: ComparisonTable) -> List[List[float]]:
    return [
        [lam] + [combined_throughput(lte.get(lam, c), wlan.get(lam, c)) for c in FIG7_HEADER[1:]]
        for lam in sorted(wlan.rows)
    ]


def write_manifest(out_dir: Path, name: str, config: RunConfig, files: Sequence[Path]) -> Path:
    manifest = {
        "experiment": name,
        "config_digest": config.digest(),
        "seed_base": config.engine.seed_base,
        "drops": config.engine.drops,
        "duration_ms": config.engine.duration_ms,
        "version": __version__,
        "files": sorted(p.name for p in files),
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def run_experiment(name: str, config: RunConfig, out_dir) -> List[Path]:
    """Run preset ``name`` and write its CSVs (plus manifest) into ``out_dir``."""
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment '{name}'; choose from {', '.join(EXPERIMENTS)}")
    out_dir = Path(out_dir)
    out = config.output
    lambdas = config.lte.lambda_grid
    files: List[Path] = []
    if name in CYCLE_FIGURES:
        i = CYCLE_FIGURES[name]
        if i >= len(lambdas):
            raise ConfigError(f"{name} needs lte.lambda_grid with at least {i + 1} entries")
        grid = run_grid(config, ["adaptive"], [lambdas[i]])
        files.append(write_csv(CYCLE_HEADER, cycle_rows(grid.summary(lambdas[i], "adaptive")),
                               out_dir / out.cycles_csv))
    elif name == "fig2":
        grid = run_grid(config, FIG2_KINDS, lambdas)
        files.append(write_csv(SUMMARY_HEADER, summary_rows(grid), out_dir / out.summary_csv))
    else:
        grid = run_grid(config, TABLE_KINDS, lambdas)
        files.append(write_csv(SUMMARY_HEADER, summary_rows(grid), out_dir / out.summary_csv))
        wlan, lte = comparison_tables(grid)
        files.append(write_csv(TABLE_HEADER, wlan.as_rows(), out_dir / "table3_wlan.csv"))
        files.append(write_csv(TABLE_HEADER, lte.as_rows(), out_dir / "table4_lte.csv"))
        if name == "fig7":
            files.append(write_csv(FIG7_HEADER, combined_rows(wlan, lte), out_dir / "fig7_combined.csv"))
    files.append(write_manifest(out_dir, name, config, files))
    return files
