"""Report output: canonical JSON, tab-separated per-example scores, and
summary figures rendered to PNG files next to the delimited output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluation import EvalReport  # noqa: E402

TSV_COLUMNS = ("id", "task", "score", "category", "multi_answer", "llm_calls", "wall_time_ms")


def report_tsv(report: EvalReport) -> str:
    lines = ["\t".join(TSV_COLUMNS)]
    for r in report.results:
        lines.append(
            "\t".join(
                [
                    r.id,
                    r.task,
                    "" if r.score is None else str(r.score),
                    r.category or "",
                    "1" if r.multi_answer else "0",
                    str(r.llm_calls),
                    f"{r.wall_time_ms:.3f}",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _outcome_counts(report: EvalReport) -> dict[str, int]:
    counts = {
        "correct": sum(1 for r in report.results if r.score == 1),
        "incorrect": sum(1 for r in report.results if r.score == 0),
        "excluded": report.excluded,
    }
    counts.update(report.category_counts)
    return counts


def render_summary_figure(report: EvalReport, path: Path) -> None:
    """Two panels: outcome/category counts and model calls per example."""
    fig, (ax_counts, ax_calls) = plt.subplots(1, 2, figsize=(10, 4))

    counts = _outcome_counts(report)
    labels = list(counts)
    values = [counts[k] for k in labels]
    ax_counts.bar(range(len(labels)), values, color="#4878a8")
    ax_counts.set_xticks(range(len(labels)))
    ax_counts.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax_counts.set_ylabel("examples")
    ax_counts.set_title(f"outcomes (aggregate {report.aggregate:.3f})")

    calls = [r.llm_calls for r in report.results]
    upper = max(calls) if calls else 1
    ax_calls.hist(calls, bins=range(0, upper + 2), color="#6aa66a", edgecolor="black")
    ax_calls.set_xlabel("model calls per example")
    ax_calls.set_ylabel("examples")
    ax_calls.set_title(f"model calls (total {report.total_llm_calls})")

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_score_figure(report: EvalReport, path: Path) -> None:
    """Per-example score strip, one marker per example in dataset order."""
    fig, ax = plt.subplots(figsize=(max(6, len(report.results) * 0.22), 2.6))
    xs = range(len(report.results))
    colors = [
        "#bbbbbb" if r.score is None else ("#2e7d32" if r.score == 1 else "#c62828")
        for r in report.results
    ]
    ys = [0 if r.score is None else r.score for r in report.results]
    ax.scatter(xs, ys, c=colors, s=28)
    ax.set_yticks([0, 1])
    ax.set_yticklabels(["0", "1"])
    ax.set_xlabel("example index")
    ax.set_ylabel("score")
    ax.set_title("per-example scores (grey = excluded)")
    ax.set_ylim(-0.3, 1.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report_files(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Write report.json, report.tsv, and the summary figures; return paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "report.json"
    tsv_path = out / "report.tsv"
    summary_png = out / "report_summary.png"
    scores_png = out / "report_scores.png"
    json_path.write_text(report.to_json(), encoding="utf-8")
    tsv_path.write_text(report_tsv(report), encoding="utf-8")
    render_summary_figure(report, summary_png)
    render_score_figure(report, scores_png)
    return [json_path, tsv_path, summary_png, scores_png]
