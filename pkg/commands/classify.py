# commands/classify.py

from __future__ import annotations

import json

from analysis.net_profit import classify_net_profit
from analysis.ultimate import BRANCH_NAMES, branch_id
from commands.run_config import RunConfig, write_output


def classification_report(model) -> dict:
    verdict = classify_net_profit(model)
    report = {
        "class": verdict.kind.value,
        "mean_s": verdict.mean_s,
        "pattern": verdict.pattern,
        "branch": None,
        "leading_atom": model.leading_atom(),
        "summary": verdict.describe(),
    }
    if verdict.subcritical:
        branch = branch_id(model)
        report["branch"] = branch
        report["summary"] += f", branch {branch} ({BRANCH_NAMES[branch]})"
    return report


def run_classify(cfg: RunConfig) -> int:
    report = classification_report(cfg.require_model())
    if cfg.output_format == "json":
        text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    else:
        text = f"{report['summary']}\nleading aggregate atom: s_{report['leading_atom']}\n"
    write_output(text, cfg.output_path)
    return 0
