# -*- coding: utf-8 -*-
"""
节奏准确率
Accuracy 1：预测落在真实节奏 ±tol 内；Accuracy 2：允许 2、3、1/2、1/3 倍的八度误差
"""

from typing import Any, Dict, List, Optional, Sequence

from .interfaces import (
    DEFAULT_TOLERANCE, OCTAVE_FACTORS, ItemResult, MetricInputError, MetricsReport, TempoPrediction
)

# 吸收 f·truth 的浮点舍入，使边界保持闭区间
_BOUNDARY_SLACK = 1e-12


def _CheckPositive(pred: float, truth: float) -> None:
    if not pred > 0 or not truth > 0:
        raise MetricInputError(f"节奏必须为正: pred={pred}, truth={truth}")


def _Within(pred: float, reference: float, tol: float) -> bool:
    return abs(pred - reference) <= tol * reference * (1.0 + _BOUNDARY_SLACK)


def Accuracy1(pred: float, truth: float, tol: float = DEFAULT_TOLERANCE) -> bool:
    """|pred − truth| ≤ tol · truth（含边界）"""
    _CheckPositive(pred, truth)
    return _Within(pred, truth, tol)


def Accuracy2(pred: float, truth: float, tol: float = DEFAULT_TOLERANCE) -> bool:
    """存在 f ∈ {1, 2, 3, 1/2, 1/3} 使 |pred − f·truth| ≤ tol · f·truth"""
    _CheckPositive(pred, truth)
    return any(_Within(pred, factor * truth, tol) for factor in OCTAVE_FACTORS)


def ScorePredictions(predictions: Sequence[TempoPrediction], tolerance: float = DEFAULT_TOLERANCE,
                     excluded: int = 0, config: Optional[Dict[str, Any]] = None) -> MetricsReport:
    """逐项计算命中并汇总"""
    items: List[ItemResult] = []
    for p in predictions:
        if p.Degenerate:
            hit1 = hit2 = False
        else:
            hit1 = Accuracy1(p.PredictedBpm, p.TrueBpm, tolerance)
            hit2 = Accuracy2(p.PredictedBpm, p.TrueBpm, tolerance)
        items.append(ItemResult(p.ClipId, float(p.PredictedBpm), float(p.TrueBpm), hit1, hit2))
    count = len(items)
    acc1 = sum(i.hit1 for i in items) / count if count else 0.0
    acc2 = sum(i.hit2 for i in items) / count if count else 0.0
    return MetricsReport(acc1, acc2, count, excluded, tolerance, items, dict(config or {}))
