# -*- coding: utf-8 -*-
"""
合成数据模块接口定义
定义合成规格、节奏预言机结果与语料划分
"""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Tuple

from src.audio.interfaces import CANONICAL_SAMPLE_RATE


#region 数据结构定义

class SynthPattern(Enum):
    """节奏型"""
    CLICK = "click"                       # 每拍一个噪声脉冲
    DRUM_KICK_SNARE = "drum_kick_snare"   # 1/3 拍底鼓、2/4 拍军鼓、八分音符踩镲
    ACCENTED_4_4 = "accented_4_4"         # 每小节第一拍加重 6 dB 的脉冲


@dataclass
class SynthSpec:
    """合成片段规格

    拍点位于 k * 60 / Bpm 秒，第一个拍点在 t = 0。
    Swing 只推迟反拍八分音符，推迟量为 Swing * 半拍。
    """
    Bpm: float = 120.0
    DurationSeconds: float = 10.0
    Pattern: SynthPattern = SynthPattern.CLICK
    ClickDecayMs: float = 5.0
    NoiseBandHz: Optional[Tuple[float, float]] = None
    Swing: float = 0.0
    NoiseSnrDb: Optional[float] = None
    Seed: int = 0
    SampleRate: int = CANONICAL_SAMPLE_RATE

    def __post_init__(self):
        if isinstance(self.Pattern, str):
            self.Pattern = SynthPattern(self.Pattern)
        if not 60.0 <= self.Bpm <= 180.0:
            raise SynthError(f"合成节奏必须位于 [60, 180]: {self.Bpm}")
        if self.DurationSeconds <= 0:
            raise SynthError(f"时长必须为正: {self.DurationSeconds}")
        if not 0.0 <= self.Swing <= 0.2:
            raise SynthError(f"swing 必须位于 [0, 0.2]: {self.Swing}")
        if self.ClickDecayMs <= 0:
            raise SynthError(f"脉冲时长必须为正: {self.ClickDecayMs}")
        if self.NoiseBandHz is not None:
            low, high = self.NoiseBandHz
            if not 0 < low < high < self.SampleRate / 2:
                raise SynthError(f"噪声频带非法: {self.NoiseBandHz}")

    @property
    def BeatPeriodSeconds(self) -> float:
        return 60.0 / self.Bpm

    @property
    def NumSamples(self) -> int:
        return int(round(self.DurationSeconds * self.SampleRate))


@dataclass(frozen=True)
class OracleEstimate:
    """自相关节奏估计"""
    Bpm: float
    Confidence: float
    IsDegenerate: bool


@dataclass
class CorpusSplits:
    """三份语料清单的路径与片段数"""
    PretrainManifest: Path
    FinetuneManifest: Path
    EvalManifest: Path
    Counts: Dict[str, int] = field(default_factory=dict)

#endregion


#region 异常类

class SynthError(Exception):
    """合成数据异常基类"""

    def __init__(self, message: str, error_code: Optional[int] = None):
        super().__init__(message)
        self._error_code = error_code

    @property
    def ErrorCode(self) -> Optional[int]:
        return self._error_code

#endregion
