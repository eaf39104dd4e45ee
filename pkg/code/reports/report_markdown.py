from pathlib import Path
from typing import List

from models.run_model import LADDER, LadderReport, SweepReport


def _fmt(x: float, digits: int = 3) -> str:
    return f"{x:.{digits}f}" if x == x else "n/a"


def _ms(seconds: float) -> str:
    return f"{seconds * 1e3:.2f}"


def generate_ladder_markdown(ladder: LadderReport, output_path: Path) -> Path:
    lines: List[str] = []
    lines.append(f"# Optimization ladder: {ladder.model}\n")
    lines.append(f"- **DRAM:** {ladder.dram_kind}")
    lines.append(f"- **Sequence length:** {ladder.seq_len}")
    lines.append("")

    lines.append("## Normalized step latency\n")
    lines.append("| Method | Latency (ms) | Normalized latency | Speedup | C_T | Energy (J) |")
    lines.append("|---|---:|---:|---:|---:|---:|")
    for r in ladder.rows:
        speedup = 1.0 / r.normalized_latency if r.normalized_latency else float("nan")
        lines.append(
            f"| {r.method.value} | {_ms(r.latency_s)} | {_fmt(r.normalized_latency)} | {_fmt(speedup, 2)}x "
            f"| {_fmt(r.c_t, 2)} | {_fmt(r.energy_j, 1)} |"
        )
    lines.append("")

    lines.append("## Where the time goes\n")
    lines.append("Busy time per category (ms). Categories overlap once compute and communication run concurrently, "
                 "so a row can sum to more than the step latency.\n")
    categories = list(ladder.reports[0].breakdown.model_dump()) if ladder.reports else []
    lines.append("| Method | " + " | ".join(categories) + " |")
    lines.append("|---|" + "---:|" * len(categories))
    for rep in ladder.reports:
        bd = rep.breakdown.model_dump()
        lines.append(f"| {rep.method.value} | " + " | ".join(_ms(bd[c]) for c in categories) + " |")
    lines.append("")

    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text("\n".join(lines), encoding="utf-8")
    return output_path


def generate_sweep_markdown(sweep: SweepReport, output_path: Path) -> Path:
    lines: List[str] = []
    lines.append(f"# Sequence length and DRAM sweep: {sweep.model}\n")
    df = sweep.to_frame()
    if df.empty:
        lines.append("No cells were simulated.")
    else:
        lines.append(f"- **Cells:** {len(df)}")
        lines.append(f"- **Sequence lengths:** {', '.join(str(s) for s in sorted(df['seq_len'].unique()))}")
        lines.append(f"- **DRAM kinds:** {', '.join(sorted(df['dram_kind'].unique()))}")
        lines.append("")
        methods = [m.value for m in LADDER if m.value in set(df["method"])]
        for dram in sorted(df["dram_kind"].unique()):
            lines.append(f"## {dram}: speedup over Baseline\n")
            lines.append("| seq_len | " + " | ".join(methods) + " |")
            lines.append("|---:|" + "---:|" * len(methods))
            sub = df[df["dram_kind"] == dram]
            for seq_len in sorted(sub["seq_len"].unique()):
                cells = sub[sub["seq_len"] == seq_len].set_index("method")["speedup_vs_baseline"]
                lines.append(f"| {seq_len} | " + " | ".join(
                    f"{_fmt(float(cells[m]), 2)}x" if m in cells.index else "n/a" for m in methods) + " |")
            lines.append("")

    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text("\n".join(lines), encoding="utf-8")
    return output_path
