# -*- coding: utf-8 -*-
"""
训练模块接口定义
定义预训练与微调配置、逐轮记录、坍缩监视器与异常类
"""

from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.audio.interfaces import EXCERPT_LENGTH, CropPolicy, StretchEngine


#region 枚举

class LossVariant(Enum):
    """损失变体"""
    MAIN = "main"                   # |z_i / z_j − α_i / α_j|
    PRIME = "prime"                 # |α_i z_j − α_j z_i|，z = 0 为平凡最优
    DOUBLE_PRIME = "double_prime"   # |z_i − α_i z_j / α_j|，z = 0 为平凡最优

    @staticmethod
    def Parse(value) -> 'LossVariant':
        if isinstance(value, LossVariant):
            return value
        return LossVariant(str(value).replace('-', '_'))


class CollapseVerdict(Enum):
    """坍缩判定"""
    STABLE = "STABLE"
    COLLAPSED = "COLLAPSED"
    INCONCLUSIVE = "INCONCLUSIVE"

#endregion


#region 配置

@dataclass
class SslConfig:
    """预训练配置"""
    r_p: float = 0.2
    batch_size: int = 16
    epochs: int = 20
    learning_rate: float = 0.001
    audio_augs_enabled: bool = False
    loss_variant: str = "main"
    seed: int = 0
    symmetric: bool = False
    crop_policy: str = "leading"
    stretch_engine: str = "resample"
    excerpt_length: int = EXCERPT_LENGTH
    workers: int = 0

    def __post_init__(self):
        if not 0.0 < self.r_p < 1.0:
            raise ValueError(f"r_p 必须位于 (0, 1): {self.r_p}")
        if self.batch_size < 2:
            raise ValueError(f"batch_size 至少为 2: {self.batch_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs 不能为负: {self.epochs}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate 必须为正: {self.learning_rate}")
        if self.excerpt_length <= 0:
            raise ValueError(f"excerpt_length 必须为正: {self.excerpt_length}")
        self.loss_variant = LossVariant.Parse(self.loss_variant).value
        CropPolicy(self.crop_policy)
        StretchEngine(self.stretch_engine)

    @property
    def Variant(self) -> LossVariant:
        return LossVariant.Parse(self.loss_variant)

    def Echo(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class FinetuneConfig:
    """微调配置"""
    r_f: float = 0.2
    epochs: int = 100
    batch_size: int = 16
    learning_rate: float = 0.001
    seed: int = 0
    redraw_per_epoch: bool = True
    stretch_engine: str = "resample"
    excerpt_length: int = EXCERPT_LENGTH
    workers: int = 0

    def __post_init__(self):
        if not 0.0 <= self.r_f < 1.0:
            raise ValueError(f"r_f 必须位于 [0, 1): {self.r_f}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size 至少为 1: {self.batch_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs 不能为负: {self.epochs}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate 必须为正: {self.learning_rate}")
        StretchEngine(self.stretch_engine)

    def Echo(self) -> Dict[str, Any]:
        return asdict(self)

#endregion


#region 运行记录

@dataclass
class EpochRecord:
    """一轮训练的记录"""
    epoch: int
    loss_mean: float
    z_abs_mean: float = 0.0
    z_std: float = 0.0
    guard_hits: int = 0
    wallclock_s: float = 0.0
    skipped_files: int = 0
    rss_mb: float = 0.0

    def ToJson(self) -> Dict[str, Any]:
        return asdict(self)

    def Deterministic(self) -> Dict[str, Any]:
        """去掉墙钟与内存字段，可写入检查点"""
        data = asdict(self)
        data.pop('wallclock_s')
        data.pop('rss_mb')
        return data


@dataclass
class CollapseMonitor:
    """逐轮记录 |z| 均值、z 的标准差与损失均值"""
    Records: List[EpochRecord] = field(default_factory=list)
    CollapseThreshold: float = 0.01
    StableThreshold: float = 0.1
    CollapseWithinEpochs: int = 5
    LossReduction: float = 0.25

    def Record(self, record: EpochRecord) -> None:
        self.Records.append(record)

    @property
    def ZAbsCurve(self) -> List[float]:
        return [r.z_abs_mean for r in self.Records]

    @property
    def TotalGuardHits(self) -> int:
        return int(sum(r.guard_hits for r in self.Records))

    def Verdict(self) -> CollapseVerdict:
        """前 5 轮内 |z| 均值跌破 0.01 为坍缩；全程高于 0.1 且末轮损失低于首轮的 1/4 为稳定"""
        if not self.Records:
            return CollapseVerdict.INCONCLUSIVE
        early = self.Records[:self.CollapseWithinEpochs]
        if any(r.z_abs_mean < self.CollapseThreshold for r in early):
            return CollapseVerdict.COLLAPSED
        first, last = self.Records[0].loss_mean, self.Records[-1].loss_mean
        if all(r.z_abs_mean > self.StableThreshold for r in self.Records) and last < self.LossReduction * first:
            return CollapseVerdict.STABLE
        return CollapseVerdict.INCONCLUSIVE

    def ToJson(self) -> List[Dict[str, Any]]:
        return [r.Deterministic() for r in self.Records]


@dataclass
class SmoothedTarget:
    """300 维平滑目标，支撑集为中心类别 ±1"""
    Weights: np.ndarray
    CenterBin: int

#endregion


#region 异常类

class TrainingError(Exception):
    """训练异常基类"""

    def __init__(self, message: str, error_code: Optional[int] = None):
        super().__init__(message)
        self._error_code = error_code

    @property
    def ErrorCode(self) -> Optional[int]:
        return self._error_code


class EmptyCorpusError(TrainingError):
    """语料为空或全部不可读"""
    pass


class LabelRangeError(TrainingError):
    """节奏标注超出 (0, 300)"""
    pass


class NumericalFailure(TrainingError):
    """损失非有限，携带出问题批次的片段标识"""

    def __init__(self, message: str, batchIds: Sequence[str], epoch: int, batchIndex: int):
        super().__init__(message)
        self.BatchIds = list(batchIds)
        self.Epoch = epoch
        self.BatchIndex = batchIndex

    def Diagnostic(self) -> Dict[str, Any]:
        return {
            'error': str(self),
            'epoch': self.Epoch,
            'batch_index': self.BatchIndex,
            'batch_ids': self.BatchIds,
        }

#endregion


#region 接口定义

class IResourceMonitor(ABC):
    """进程资源监视接口"""

    @abstractmethod
    def RssMb(self) -> float:
        """当前驻留内存（MB）"""
        pass

    @abstractmethod
    def ResolveWorkerCount(self, requested: int = 0) -> int:
        """确定生产者线程数，requested ≤ 0 表示自动"""
        pass

    @abstractmethod
    def GetSystemInfo(self) -> Dict[str, Any]:
        """平台、核数与内存等系统信息"""
        pass

#endregion
