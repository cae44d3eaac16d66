# -*- coding: utf-8 -*-
"""
WAV 读写
读取 PCM WAV（16/24 位整型、32 位浮点，单/双声道），降混为单声道并重采样到 44.1 kHz
"""

import logging
from fractions import Fraction
from pathlib import Path
from typing import Union

import numpy as np
import soundfile as sf
from scipy.signal import resample_poly

from .frontend import Downmix
from .interfaces import AudioClip, AudioFormatError, CANONICAL_SAMPLE_RATE


logger = logging.getLogger(__name__)

_SUPPORTED_SUBTYPES = {'PCM_16', 'PCM_24', 'FLOAT'}

PathLike = Union[str, Path]


def Resample(samples: np.ndarray, sourceRate: int, targetRate: int = CANONICAL_SAMPLE_RATE) -> np.ndarray:
    """多相加窗 sinc 重采样"""
    if sourceRate == targetRate:
        return np.asarray(samples, dtype=np.float32)
    ratio = Fraction(targetRate, sourceRate)
    out = resample_poly(samples.astype(np.float64), ratio.numerator, ratio.denominator)
    return out.astype(np.float32)


def ReadWav(path: PathLike, clipId: str = "") -> AudioClip:
    """读取 WAV 文件

    Args:
        path: 文件路径
        clipId: 片段标识，默认取文件名

    Returns:
        44.1 kHz 单声道 AudioClip

    Raises:
        AudioFormatError: 非 WAV 容器或不支持的编码
    """
    path = Path(path)
    try:
        info = sf.info(str(path))
    except RuntimeError as e:
        raise AudioFormatError(f"无法识别的音频文件 {path}: {e}")
    if info.format != 'WAV':
        raise AudioFormatError(f"只支持 WAV 容器: {path} 为 {info.format}")
    if info.subtype not in _SUPPORTED_SUBTYPES:
        raise AudioFormatError(f"不支持的 WAV 编码 {info.subtype}: {path}")
    if info.channels < 1 or info.frames == 0:
        raise AudioFormatError(f"WAV 文件没有音频数据: {path}")

    data, sampleRate = sf.read(str(path), dtype='float32', always_2d=True)
    mono = Downmix(data.T)
    samples = mono.Samples
    if sampleRate != CANONICAL_SAMPLE_RATE:
        logger.debug("重采样 %s: %d Hz -> %d Hz", path.name, sampleRate, CANONICAL_SAMPLE_RATE)
        samples = Resample(samples, sampleRate)
    return AudioClip(samples, CANONICAL_SAMPLE_RATE, clipId or path.stem)


def WriteWav(path: PathLike, clip: AudioClip, subtype: str = 'PCM_16') -> None:
    """写出单声道 WAV"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    samples = clip.Samples
    if subtype.startswith('PCM'):
        samples = np.clip(samples, -1.0, 1.0)
    sf.write(str(path), samples, clip.SampleRate, subtype=subtype, format='WAV')
