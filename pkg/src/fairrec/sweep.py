"""Batch experiment harness: load, predict, re-rank over a grid, report.

A sweep always measures the no-post-processing baseline first, then one
grid point per l (random) or theta (greedy). Outputs are deterministic for
a fixed config and seed: results.csv, one scatter file per disparity
metric (aggregate diversity on x), and optional per-user and SVG files.
Grid points share one immutable ScoreGraph and are evaluated in grid order.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .dataset import candidate_sets, load_ratings
from .errors import InvalidInputError
from .metrics import DisparityReport, disparity_report, write_per_user_csv, write_results_csv
from .predictors import (
    KnnParams,
    NmfParams,
    load_score_cache,
    predict_knn,
    predict_nmf,
    save_score_cache,
)
from .reranking import GreedyParams, RandomParams, greedy_rerank, random_rerank, top_k

PREDICTORS = ("knn", "nmf")
POSTS = ("none", "random", "greedy")


@dataclass
class SweepConfig:
    data_path: Path = Path("u.data")
    predictor: str = "knn"
    post: str = "none"
    k: int = 5
    ell_grid: tuple[int, ...] = (10, 50, 100, 500)
    theta_grid: tuple[int, ...] = (10, 100, 200, 500, 1000)
    threshold: float = 3.5
    seed: int = 0
    output_dir: Path = Path("results")
    use_cache: bool = False
    per_user: bool = False
    emit_svg: bool = False
    knn_neighbors: int = 40
    knn_min_overlap: int = 1
    nmf_factors: int = 15
    nmf_epochs: int = 50

    def validate(self) -> None:
        if self.predictor not in PREDICTORS:
            raise InvalidInputError(f"unknown predictor {self.predictor!r}")
        if self.post not in POSTS:
            raise InvalidInputError(f"unknown post-processor {self.post!r}")
        if self.k < 1:
            raise InvalidInputError("k must be >= 1")
        if self.post == "random" and not self.ell_grid:
            raise InvalidInputError("ell grid is empty but post=random selected")
        if self.post == "greedy" and not self.theta_grid:
            raise InvalidInputError("theta grid is empty but post=greedy selected")
        if self.seed < 0:
            raise InvalidInputError("seed must be non-negative")


_BOOL_KEYS = {"cache", "per_user", "svg"}
_INT_KEYS = {"k", "seed", "knn_neighbors", "knn_min_overlap", "nmf_factors", "nmf_epochs"}
_GRID_KEYS = {"ell", "theta"}
_KEY_TO_FIELD = {
    "data": "data_path",
    "predictor": "predictor",
    "post": "post",
    "k": "k",
    "ell": "ell_grid",
    "theta": "theta_grid",
    "threshold": "threshold",
    "seed": "seed",
    "out": "output_dir",
    "cache": "use_cache",
    "per_user": "per_user",
    "svg": "emit_svg",
    "knn_neighbors": "knn_neighbors",
    "knn_min_overlap": "knn_min_overlap",
    "nmf_factors": "nmf_factors",
    "nmf_epochs": "nmf_epochs",
}


def parse_grid(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in str(text).split(",") if part.strip())
    except ValueError:
        raise InvalidInputError(f"grid must be comma-separated integers, got {text!r}") from None
    return values


def _coerce(key: str, value: str):
    if key in _BOOL_KEYS:
        lowered = str(value).strip().lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise InvalidInputError(f"config key {key!r} expects a boolean, got {value!r}")
    if key in _INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise InvalidInputError(f"config key {key!r} expects an integer, got {value!r}") from None
    if key in _GRID_KEYS:
        return parse_grid(value)
    if key == "threshold":
        try:
            return float(value)
        except ValueError:
            raise InvalidInputError(f"threshold expects a number, got {value!r}") from None
    if key in ("data", "out"):
        return Path(value)
    return value


def read_config_file(path: str | Path) -> dict:
    """Parse a ``key = value`` config file into SweepConfig field overrides.

    Blank lines and ``#`` comments are ignored; grids are comma-separated.
    """
    overrides: dict = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInputError(f"{path}:{line_no}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip().strip("\"'")
            if key not in _KEY_TO_FIELD:
                raise InvalidInputError(f"{path}:{line_no}: unknown config key {key!r}")
            overrides[_KEY_TO_FIELD[key]] = _coerce(key, value)
    return overrides


def build_config(file_path: str | Path | None = None, **overrides) -> SweepConfig:
    """Defaults, then config file values, then explicit overrides."""
    settings: dict = {}
    if file_path is not None:
        settings.update(read_config_file(file_path))
    settings.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(SweepConfig)}
    unknown = set(settings) - known
    if unknown:
        raise InvalidInputError(f"unknown config fields: {sorted(unknown)}")
    cfg = SweepConfig(**settings)
    cfg.validate()
    return cfg


def _fit_scores(cfg: SweepConfig, dataset, candidates):
    if cfg.predictor == "knn":
        return predict_knn(dataset, candidates, KnnParams(cfg.knn_neighbors, cfg.knn_min_overlap))
    return predict_nmf(dataset, candidates, NmfParams(cfg.nmf_factors, cfg.nmf_epochs, cfg.seed))


def _obtain_scores(cfg: SweepConfig, dataset, candidates):
    if not cfg.use_cache:
        return _fit_scores(cfg, dataset, candidates)
    cache_path = cfg.output_dir / f"scores_{cfg.predictor}.csv"
    if cache_path.exists():
        return load_score_cache(cache_path, dataset, candidates, provenance=f"{cfg.predictor}(cache)")
    graph = _fit_scores(cfg, dataset, candidates)
    save_score_cache(graph, dataset, cache_path)
    # reload so cached and fresh runs see identical (6-decimal) scores
    return load_score_cache(cache_path, dataset, candidates, provenance=f"{cfg.predictor}(cache)")


def run_sweep(cfg: SweepConfig, quiet: bool = False) -> list[DisparityReport]:
    """Execute the configured sweep and write all output files.

    Returns the reports in output order: baseline first, then grid order.
    """
    cfg.validate()
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    dataset = load_ratings(cfg.data_path)
    candidates = candidate_sets(dataset, min_size=cfg.k)
    graph = _obtain_scores(cfg, dataset, candidates)
    top = top_k(graph, cfg.k)

    reports = [
        disparity_report(graph, top, top, predictor=cfg.predictor, post="none", param=0)
    ]
    if cfg.post == "random":
        for ell in cfg.ell_grid:
            recs = random_rerank(graph, RandomParams(ell=ell, seed=cfg.seed), cfg.k)
            reports.append(
                disparity_report(graph, recs, top, predictor=cfg.predictor, post="random", param=ell)
            )
    elif cfg.post == "greedy":
        for theta in cfg.theta_grid:
            result = greedy_rerank(graph, top, GreedyParams(theta=theta, threshold=cfg.threshold))
            reports.append(
                disparity_report(
                    graph,
                    result.recommendations,
                    top,
                    predictor=cfg.predictor,
                    post="greedy",
                    param=theta,
                    achieved=result.achieved_increase,
                )
            )

    write_results_csv(reports, cfg.output_dir / "results.csv")
    emit_plot_data(reports, cfg.output_dir, svg=cfg.emit_svg)
    if cfg.per_user:
        for report in reports:
            name = f"per_user__{report.post}__{report.param}.csv"
            write_per_user_csv(report, cfg.output_dir / name, dataset)
    if not quiet:
        for report in reports:
            print(report.summary())
    return reports


_METRICS = (
    ("score_disparity", lambda r: r.score_disparity),
    ("recommendation_disparity", lambda r: r.recommendation_disparity),
)


def emit_plot_data(reports: list[DisparityReport], output_dir: str | Path, svg: bool = False) -> list[Path]:
    """Write scatter data (and optional SVG) per disparity metric.

    One file per (post, predictor, metric) group: two numeric columns,
    aggregate diversity then disparity, sorted by the first column, with
    the baseline row flagged in a comment. Byte-stable for equal reports.
    """
    if not reports:
        raise InvalidInputError("no reports to plot")
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    groups: dict[tuple[str, str], list[DisparityReport]] = {}
    run_post = next((r.post for r in reports if r.post != "none"), "none")
    for report in reports:
        groups.setdefault((run_post, report.predictor), []).append(report)

    written: list[Path] = []
    for (post, predictor), group in sorted(groups.items()):
        for metric_name, metric in _METRICS:
            points = sorted(
                ((r.aggregate_diversity, metric(r), r.post == "none") for r in group),
                key=lambda p: (p[0], p[1]),
            )
            path = output_dir / f"{post}__{predictor}__{metric_name}.dat"
            lines = [
                f"# {predictor} {post}: aggregate diversity vs {metric_name}\n",
                "# columns: agg_div  disparity\n",
            ]
            for x, y, is_baseline in points:
                if is_baseline:
                    lines.append("# next row is the baseline (no post-processing)\n")
                lines.append(f"{x:.6f}  {y:.6f}\n")
            path.write_text("".join(lines), encoding="ascii")
            written.append(path)
            if svg:
                svg_path = path.with_suffix(".svg")
                _write_scatter_svg(points, svg_path, f"{predictor} / {post}", metric_name)
                written.append(svg_path)
    return written


def _write_scatter_svg(points, path: Path, title: str, metric_name: str) -> None:
    width, height, margin = 480, 360, 50
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_max = max(max(xs), 1e-9) * 1.05
    y_max = max(max(ys), 1e-9) * 1.15

    def sx(x: float) -> float:
        return margin + (width - 2 * margin) * x / x_max

    def sy(y: float) -> float:
        return height - margin - (height - 2 * margin) * y / y_max

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n',
        f'<rect width="{width}" height="{height}" fill="white"/>\n',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>\n',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>\n',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">{title}</text>\n',
        f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" '
        f'font-size="11">aggregate diversity (max {x_max:.4f})</text>\n',
        f'<text x="14" y="{height / 2:.1f}" text-anchor="middle" font-size="11" '
        f'transform="rotate(-90 14 {height / 2:.1f})">{metric_name} (max {y_max:.4f})</text>\n',
    ]
    for x, y, is_baseline in points:
        if is_baseline:
            parts.append(
                f'<rect x="{sx(x) - 4:.2f}" y="{sy(y) - 4:.2f}" width="8" height="8" fill="black"/>\n'
            )
        else:
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="4" fill="steelblue"/>\n')
    parts.append("</svg>\n")
    path.write_text("".join(parts), encoding="ascii")
