# -*- coding: utf-8 -*-
"""
音频模块接口定义
定义音频片段、对数梅尔谱、拉伸视图等数据结构与异常类
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np


#region 前端常量

CANONICAL_SAMPLE_RATE = 44100
EXCERPT_LENGTH = 600000          # l_x，13.6 秒 @ 44.1 kHz
FFT_SIZE = 2048
HOP_SIZE = 441                   # 100 帧/秒
N_MELS = 81
MEL_FMIN = 30.0
MEL_FMAX = 17000.0
N_FFT_BINS = FFT_SIZE // 2 + 1   # 1025

#endregion


#region 数据结构定义

@dataclass
class AudioClip:
    """单声道波形"""
    Samples: np.ndarray
    SampleRate: int = CANONICAL_SAMPLE_RATE
    ClipId: str = ""

    def __post_init__(self):
        self.Samples = np.ascontiguousarray(self.Samples, dtype=np.float32)
        if self.Samples.ndim != 1:
            raise AudioValueError(f"AudioClip 必须是一维波形，当前形状 {self.Samples.shape}")
        if self.Samples.size == 0:
            raise AudioValueError("AudioClip 不能为空")
        if self.SampleRate <= 0:
            raise AudioValueError(f"采样率必须为正: {self.SampleRate}")

    @property
    def Length(self) -> int:
        return int(self.Samples.size)

    @property
    def DurationSeconds(self) -> float:
        return self.Length / float(self.SampleRate)

    def WithSamples(self, samples: np.ndarray) -> 'AudioClip':
        return AudioClip(samples, self.SampleRate, self.ClipId)


@dataclass
class LogMelSpectrogram:
    """对数压缩梅尔谱，形状 [n_frames, 81]"""
    Values: np.ndarray
    FrameRate: float = CANONICAL_SAMPLE_RATE / HOP_SIZE

    @property
    def NumFrames(self) -> int:
        return int(self.Values.shape[0])


@dataclass(frozen=True)
class StretchRate:
    """时间拉伸率 α，节奏按 α 缩放、时长按 1/α 缩放"""
    Alpha: float

    def __post_init__(self):
        if not self.Alpha > 0:
            raise AudioValueError(f"拉伸率必须为正: {self.Alpha}")


@dataclass
class ViewPair:
    """同一节选的两个拉伸视图"""
    ViewI: AudioClip
    ViewJ: AudioClip
    AlphaI: StretchRate
    AlphaJ: StretchRate
    SourceId: str = ""


@dataclass
class LabeledClip:
    """带节奏标注的片段，0 < TempoBpm < 300"""
    Clip: AudioClip
    TempoBpm: float

    def __post_init__(self):
        if not 0.0 < self.TempoBpm < 300.0:
            raise AudioValueError(f"片段 {self.Clip.ClipId!r} 的节奏标注超出 (0, 300): {self.TempoBpm}")

    @property
    def ClipId(self) -> str:
        return self.Clip.ClipId


class StretchEngine(Enum):
    """拉伸引擎"""
    RESAMPLE = "resample"   # 重采样后按原采样率解释，音高随之改变
    WSOLA = "wsola"         # 波形相似叠加，保持音高


class CropPolicy(Enum):
    """超长视图的裁剪策略"""
    LEADING = "leading"
    RANDOM = "random"


@dataclass
class AudioAugConfig:
    """波形与谱域增强参数"""
    GainProbability: float = 0.5
    GainDbRange: Tuple[float, float] = (-12.0, 12.0)
    PolarityProbability: float = 0.5
    NoiseProbability: float = 0.3
    NoiseSnrDbRange: Tuple[float, float] = (5.0, 40.0)
    FreqMaskProbability: float = 0.5
    FreqMaskCountRange: Tuple[int, int] = (1, 2)
    FreqMaskMaxWidth: int = 15

    @staticmethod
    def Disabled() -> 'AudioAugConfig':
        """全部概率为 0 的配置"""
        return AudioAugConfig(
            GainProbability=0.0, PolarityProbability=0.0,
            NoiseProbability=0.0, FreqMaskProbability=0.0
        )

#endregion


#region 异常类

class AudioError(Exception):
    """音频模块异常基类"""

    def __init__(self, message: str, error_code: Optional[int] = None):
        super().__init__(message)
        self._error_code = error_code

    @property
    def ErrorCode(self) -> Optional[int]:
        return self._error_code


class AudioFormatError(AudioError):
    """不支持的容器或编码"""
    pass


class AudioValueError(AudioError):
    """音频数值或参数非法"""
    pass

#endregion
