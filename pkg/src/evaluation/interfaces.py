# -*- coding: utf-8 -*-
"""
评估模块接口定义
定义节奏预测、指标报告、伪节奏诊断与异常类
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from src.audio.interfaces import EXCERPT_LENGTH


#region 常量

DEFAULT_TOLERANCE = 0.04
OCTAVE_FACTORS = (1.0, 2.0, 3.0, 1.0 / 2.0, 1.0 / 3.0)
DIAGNOSTIC_ALPHAS = (0.8, 1.25)
REPORT_FORMATS = ('json', 'csv')
CSV_HEADER = ('clip_id', 'predicted_bpm', 'true_bpm', 'hit1', 'hit2')

#endregion


#region 数据结构定义

@dataclass(frozen=True)
class TempoPrediction:
    """单个片段的预测；Degenerate 为真时视为未命中"""
    PredictedBpm: float
    TrueBpm: float
    ClipId: str = ""
    Degenerate: bool = False

    def __post_init__(self):
        if not self.TrueBpm > 0:
            raise MetricInputError(f"片段 {self.ClipId!r} 的真实节奏必须为正: {self.TrueBpm}")
        if not self.Degenerate and not self.PredictedBpm > 0:
            raise MetricInputError(f"片段 {self.ClipId!r} 的预测节奏必须为正: {self.PredictedBpm}")


@dataclass
class ItemResult:
    """逐项命中标记"""
    clip_id: str
    predicted_bpm: float
    true_bpm: float
    hit1: bool
    hit2: bool


@dataclass
class MetricsReport:
    """Accuracy 1 / Accuracy 2 报告，acc1 ≤ acc2"""
    acc1: float
    acc2: float
    n_items: int
    n_excluded: int
    tolerance: float
    items: List[ItemResult] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)

    def ToJson(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class PseudoTempoReport:
    """预训练伪节奏诊断"""
    spearman_rho: float
    degenerate: bool
    median_equivariance_error: Dict[str, float]
    n_items: int
    n_excluded: int

    def ToJson(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class EvaluateConfig:
    """评估配置"""
    tolerance: float = DEFAULT_TOLERANCE
    format: str = "json"
    allow_overlap: bool = False
    excerpt_length: int = EXCERPT_LENGTH
    batch_size: int = 16
    workers: int = 0

    def __post_init__(self):
        if not self.tolerance >= 0:
            raise ValueError(f"tolerance 不能为负: {self.tolerance}")
        if self.format not in REPORT_FORMATS:
            raise ValueError(f"format 必须是 {REPORT_FORMATS} 之一: {self.format}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size 至少为 1: {self.batch_size}")

    def Echo(self) -> Dict[str, Any]:
        return asdict(self)

#endregion


#region 异常类

class EvaluationError(Exception):
    """评估异常基类"""

    def __init__(self, message: str, error_code: Optional[int] = None):
        super().__init__(message)
        self._error_code = error_code

    @property
    def ErrorCode(self) -> Optional[int]:
        return self._error_code


class ManifestOverlapError(EvaluationError):
    """评估语料与训练语料重叠"""

    def __init__(self, message: str, sharedDigests: List[str]):
        super().__init__(message)
        self.SharedDigests = list(sharedDigests)


class MetricInputError(EvaluationError):
    """指标输入非正"""
    pass

#endregion
