# -*- coding: utf-8 -*-
"""
命令行模块接口定义
定义各命令的配置结构、退出码与异常类
"""

from dataclasses import asdict, dataclass
from enum import IntEnum
from typing import Any, Dict, Optional

from src.audio.interfaces import EXCERPT_LENGTH
from src.evaluation.interfaces import EvaluateConfig
from src.training.interfaces import FinetuneConfig, SslConfig


#region 退出码

class ExitCode(IntEnum):
    """进程退出码"""
    OK = 0
    USAGE = 1
    DATA = 2
    NUMERICAL = 3

#endregion


#region 命令配置

@dataclass
class SynthConfig:
    """synth-data 配置"""
    n: int = 2700
    bpm_min: float = 60.0
    bpm_max: float = 180.0
    splits: str = "20,5,2"
    seed: int = 0
    out_dir: str = "corpus"
    duration_s: float = 14.0
    workers: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"n 不能为负: {self.n}")
        if self.duration_s <= 0:
            raise ValueError(f"duration_s 必须为正: {self.duration_s}")

    def Echo(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class PretrainCommandConfig(SslConfig):
    """pretrain 配置：预训练参数加输入输出路径"""
    manifest: str = ""
    out: str = "pretrain.ckpt"
    log_out: str = ""


@dataclass
class FinetuneCommandConfig(FinetuneConfig):
    """finetune 配置"""
    checkpoint: str = ""
    manifest: str = ""
    out: str = "finetune.ckpt"
    log_out: str = ""


@dataclass
class EvaluateCommandConfig(EvaluateConfig):
    """evaluate 配置"""
    checkpoint: str = ""
    manifest: str = ""
    out: str = "report.json"
    diagnostics: bool = False


@dataclass
class EmbedConfig:
    """embed 配置：导出 clip_id, z, h_0..h_15"""
    checkpoint: str = ""
    manifest: str = ""
    out: str = "embeddings.csv"
    excerpt_length: int = EXCERPT_LENGTH
    batch_size: int = 16
    workers: int = 0

    def Echo(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class CollapseDemoConfig:
    """collapse-demo 配置：三种损失变体在同一语料、同一初始化上各跑一次"""
    manifest: str = ""
    out_dir: str = "collapse_demo"
    n: int = 200
    duration_s: float = 14.0
    epochs: int = 20
    r_p: float = 0.2
    batch_size: int = 16
    learning_rate: float = 0.001
    seed: int = 0
    excerpt_length: int = EXCERPT_LENGTH
    workers: int = 0

    def __post_init__(self):
        if not 0.0 < self.r_p < 1.0:
            raise ValueError(f"r_p 必须位于 (0, 1): {self.r_p}")
        if self.n < 2 and not self.manifest:
            raise ValueError(f"合成语料至少需要 2 个片段: {self.n}")

    def Echo(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SweepConfig:
    """sweep 配置

    mode=pretrain: r_p 网格 × {aug, noAug}，每个条件再以 r_f=0.2 微调并评估；
    mode=finetune: 从一个预训练检查点出发扫描 r_f 网格。
    """
    mode: str = "finetune"
    pretrain_manifest: str = ""
    finetune_manifest: str = ""
    eval_manifest: str = ""
    checkpoint: str = ""
    out_dir: str = "sweep"
    rp_grid: str = "0.1,0.2,0.3,0.4"
    rf_grid: str = "0.0,0.1,0.2,0.3,0.4"
    rf_default: float = 0.2
    pretrain_epochs: int = 20
    finetune_epochs: int = 100
    batch_size: int = 16
    learning_rate: float = 0.001
    seed: int = 0
    excerpt_length: int = EXCERPT_LENGTH
    tolerance: float = 0.04
    workers: int = 0

    def __post_init__(self):
        if self.mode not in ('pretrain', 'finetune'):
            raise ValueError(f"mode 必须是 pretrain 或 finetune: {self.mode}")

    def Echo(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class OracleConfig:
    """oracle 配置"""
    manifest: str = ""
    out: str = "oracle_report.json"
    tolerance: float = 0.04
    format: str = "json"
    workers: int = 0

    def __post_init__(self):
        if self.format not in ('json', 'csv'):
            raise ValueError(f"format 必须是 json 或 csv: {self.format}")

    def Echo(self) -> Dict[str, Any]:
        return asdict(self)

#endregion


#region 异常类

class CliError(Exception):
    """命令行异常基类"""

    def __init__(self, message: str, error_code: Optional[int] = None):
        super().__init__(message)
        self._error_code = error_code

    @property
    def ErrorCode(self) -> Optional[int]:
        return self._error_code


class UsageError(CliError):
    """参数或配置错误"""

    def __init__(self, message: str):
        super().__init__(message, int(ExitCode.USAGE))

#endregion
