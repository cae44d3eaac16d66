# -*- coding: utf-8 -*-
"""
评估模块

提供节奏估计的评估：
- Accuracy 1 / Accuracy 2（±4%，含八度误差）
- 跨语料重叠检查
- 预训练伪节奏诊断
- JSON / CSV 报告
"""

from .interfaces import (
    TempoPrediction, ItemResult, MetricsReport, PseudoTempoReport, EvaluateConfig,
    EvaluationError, ManifestOverlapError, MetricInputError,
    DEFAULT_TOLERANCE, OCTAVE_FACTORS, DIAGNOSTIC_ALPHAS
)
from .metrics import Accuracy1, Accuracy2, ScorePredictions
from .evaluate import (
    CheckOverlap, PredictTempi, Evaluate, EvaluateOracle,
    RankCorrelation, EquivarianceErrors, PseudoTempoDiagnostics
)
from .report import WriteJson, WriteReport

__all__ = [
    'TempoPrediction', 'ItemResult', 'MetricsReport', 'PseudoTempoReport', 'EvaluateConfig',
    'EvaluationError', 'ManifestOverlapError', 'MetricInputError',
    'DEFAULT_TOLERANCE', 'OCTAVE_FACTORS', 'DIAGNOSTIC_ALPHAS',
    'Accuracy1', 'Accuracy2', 'ScorePredictions',
    'CheckOverlap', 'PredictTempi', 'Evaluate', 'EvaluateOracle',
    'RankCorrelation', 'EquivarianceErrors', 'PseudoTempoDiagnostics',
    'WriteJson', 'WriteReport'
]
