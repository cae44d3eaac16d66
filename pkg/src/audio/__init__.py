# -*- coding: utf-8 -*-
"""
音频模块

提供网络输入与训练视图：
- WAV 读写与重采样
- 对数梅尔前端
- 时间拉伸（重采样 / WSOLA）与视图对生成
- 波形与谱域增强
"""

# 数据结构与异常
from .interfaces import (
    AudioClip, LabeledClip, LogMelSpectrogram, StretchRate, ViewPair,
    StretchEngine, CropPolicy, AudioAugConfig,
    AudioError, AudioFormatError, AudioValueError,
    CANONICAL_SAMPLE_RATE, EXCERPT_LENGTH, HOP_SIZE, N_MELS
)

# 前端
from .frontend import (
    Downmix, StftMagnitude, MelFilterbank, MelCenterFrequencies,
    MelProject, LogCompress, ComputeLogMel
)

# 读写
from .wav_io import ReadWav, WriteWav, Resample

# 视图与增强
from .augment import (
    FixLength, RandomExcerpt, SampleStretchRate, TimeStretch,
    AudioAugmentations, SpecAugmentFrequencyMask, MakeViewPair
)
from .wsola import WsolaStretch

__all__ = [
    'AudioClip', 'LabeledClip', 'LogMelSpectrogram', 'StretchRate', 'ViewPair',
    'StretchEngine', 'CropPolicy', 'AudioAugConfig',
    'AudioError', 'AudioFormatError', 'AudioValueError',
    'CANONICAL_SAMPLE_RATE', 'EXCERPT_LENGTH', 'HOP_SIZE', 'N_MELS',
    'Downmix', 'StftMagnitude', 'MelFilterbank', 'MelCenterFrequencies',
    'MelProject', 'LogCompress', 'ComputeLogMel',
    'ReadWav', 'WriteWav', 'Resample',
    'FixLength', 'RandomExcerpt', 'SampleStretchRate', 'TimeStretch',
    'AudioAugmentations', 'SpecAugmentFrequencyMask', 'MakeViewPair',
    'WsolaStretch'
]
