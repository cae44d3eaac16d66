# -*- coding: utf-8 -*-
"""
报告输出
JSON 报告与逐项 CSV
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from .interfaces import CSV_HEADER, REPORT_FORMATS, EvaluationError, MetricsReport


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def WriteJson(data: Dict[str, Any], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(data, handle, indent=2, sort_keys=True, ensure_ascii=False)
        handle.write("\n")
    return path


def WriteReport(report: MetricsReport, path: PathLike, fmt: str = "json") -> Path:
    """按格式写出报告；csv 每个片段一行"""
    if fmt not in REPORT_FORMATS:
        raise EvaluationError(f"未知报告格式: {fmt}")
    path = Path(path)
    if fmt == "json":
        WriteJson(report.ToJson(), path)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(CSV_HEADER)
            for item in report.items:
                writer.writerow([item.clip_id, repr(item.predicted_bpm), repr(item.true_bpm),
                                 int(item.hit1), int(item.hit2)])
    logger.info("报告已写出: %s", path)
    return path
