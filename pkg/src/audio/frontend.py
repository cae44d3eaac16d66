# -*- coding: utf-8 -*-
"""
音频前端
降混 → STFT 幅度 → 梅尔投影 → 对数压缩，得到网络输入的 [n_frames, 81] 对数梅尔谱
"""

from functools import lru_cache
from typing import Sequence, Union

import librosa
import numpy as np

from .interfaces import (
    AudioClip, AudioValueError, LogMelSpectrogram,
    CANONICAL_SAMPLE_RATE, FFT_SIZE, HOP_SIZE, N_MELS, MEL_FMIN, MEL_FMAX, N_FFT_BINS
)


#region 降混

def Downmix(channels: Union[np.ndarray, Sequence[np.ndarray]], sampleRate: int = CANONICAL_SAMPLE_RATE) -> AudioClip:
    """多声道取算术平均得到单声道

    Args:
        channels: [n_channels, n_samples] 或一维单声道

    Raises:
        AudioValueError: 没有声道或声道长度不一致
    """
    if isinstance(channels, np.ndarray) and channels.ndim == 1:
        return AudioClip(channels, sampleRate)
    channelList = [np.asarray(c, dtype=np.float32) for c in channels]
    if not channelList:
        raise AudioValueError("降混输入没有声道")
    lengths = {c.shape[0] for c in channelList}
    if len(lengths) != 1:
        raise AudioValueError(f"各声道长度不一致: {sorted(lengths)}")
    if len(channelList) == 1:
        return AudioClip(channelList[0].copy(), sampleRate)
    stacked = np.stack(channelList, axis=0)
    return AudioClip(stacked.mean(axis=0), sampleRate)

#endregion


#region 频谱

def StftMagnitude(clip: AudioClip) -> np.ndarray:
    """Hann 窗、居中帧的 STFT 幅度

    Returns:
        [n_frames, 1025]，n_frames = 1 + floor(len / 441)
    """
    samples = clip.Samples
    # 反射填充需要长于半个窗口的信号，更短的片段退回零填充
    padMode = 'reflect' if samples.size > FFT_SIZE // 2 else 'constant'
    spectrum = librosa.stft(
        samples, n_fft=FFT_SIZE, hop_length=HOP_SIZE, win_length=FFT_SIZE,
        window='hann', center=True, pad_mode=padMode
    )
    return np.abs(spectrum).T.astype(np.float32)


@lru_cache(maxsize=4)
def MelFilterbank(sampleRate: int = CANONICAL_SAMPLE_RATE) -> np.ndarray:
    """81×1025 Slaney 梅尔三角滤波器组，各滤波器峰值为 1，只读共享"""
    bank = librosa.filters.mel(
        sr=sampleRate, n_fft=FFT_SIZE, n_mels=N_MELS, fmin=MEL_FMIN, fmax=MEL_FMAX,
        htk=False, norm=None, dtype=np.float32
    )
    bank.setflags(write=False)
    return bank


def MelCenterFrequencies() -> np.ndarray:
    """各梅尔滤波器的中心频率 (Hz)"""
    edges = librosa.mel_frequencies(n_mels=N_MELS + 2, fmin=MEL_FMIN, fmax=MEL_FMAX, htk=False)
    return edges[1:-1]


def MelProject(magnitude: np.ndarray) -> np.ndarray:
    """幅度谱乘以梅尔滤波器组

    Raises:
        AudioValueError: 频点数不是 1025
    """
    magnitude = np.asarray(magnitude, dtype=np.float32)
    if magnitude.ndim != 2 or magnitude.shape[1] != N_FFT_BINS:
        raise AudioValueError(f"梅尔投影需要 [frames, {N_FFT_BINS}] 输入，当前 {magnitude.shape}")
    return magnitude @ MelFilterbank().T


def LogCompress(mel: np.ndarray) -> LogMelSpectrogram:
    """log(1 + x) 压缩

    Raises:
        AudioValueError: 输入含负值
    """
    mel = np.asarray(mel, dtype=np.float32)
    if np.any(mel < 0):
        raise AudioValueError("对数压缩的输入必须非负")
    return LogMelSpectrogram(np.log1p(mel))


def ComputeLogMel(clip: AudioClip) -> LogMelSpectrogram:
    """完整前端：STFT 幅度 → 梅尔 → log1p"""
    if clip.SampleRate != CANONICAL_SAMPLE_RATE:
        raise AudioValueError(f"前端参数定义在 {CANONICAL_SAMPLE_RATE} Hz，收到 {clip.SampleRate} Hz")
    return LogCompress(MelProject(StftMagnitude(clip)))

#endregion
