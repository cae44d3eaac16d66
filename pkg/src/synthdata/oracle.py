# -*- coding: utf-8 -*-
"""
自相关节奏预言机
谱通量起音包络的自相关在 50–220 BPM 滞后范围内的峰值，与学习模型属于不同算法族
"""

import logging

import librosa
import numpy as np

from src.audio.interfaces import AudioClip

from .interfaces import OracleEstimate


logger = logging.getLogger(__name__)

ORACLE_HOP = 128
ORACLE_FFT = 1024
MIN_BPM = 50.0
MAX_BPM = 220.0
MIN_PEAK = 0.1
MIN_DURATION_SECONDS = 5.0


def OnsetEnvelope(clip: AudioClip):
    """谱通量起音包络与其帧率"""
    envelope = librosa.onset.onset_strength(
        y=clip.Samples.astype(np.float32), sr=clip.SampleRate,
        n_fft=ORACLE_FFT, hop_length=ORACLE_HOP, center=True
    )
    return np.asarray(envelope, dtype=np.float64), clip.SampleRate / float(ORACLE_HOP)


def OracleEstimateTempo(clip: AudioClip) -> OracleEstimate:
    """估计片段节奏

    包络去均值后做有偏自相关并按零滞后归一化，在滞后范围内取最大值，
    用抛物线插值细化。包络平坦或峰值低于 0.1 时标记为退化。
    """
    if clip.DurationSeconds < MIN_DURATION_SECONDS:
        logger.warning("片段 %s 仅 %.2f 秒，短于预言机建议的 %.0f 秒",
                       clip.ClipId, clip.DurationSeconds, MIN_DURATION_SECONDS)
    envelope, frameRate = OnsetEnvelope(clip)
    envelope = envelope - envelope.mean()
    energy = float(np.dot(envelope, envelope))
    if envelope.size < 2 or energy <= 1e-12 * max(envelope.size, 1):
        return OracleEstimate(0.0, 0.0, True)

    minLag = int(np.floor(60.0 * frameRate / MAX_BPM))
    maxLag = int(np.ceil(60.0 * frameRate / MIN_BPM))
    maxLag = min(maxLag, envelope.size - 2)
    if maxLag <= minLag + 1:
        return OracleEstimate(0.0, 0.0, True)

    full = np.correlate(envelope, envelope, mode='full')[envelope.size - 1:]
    correlation = full / energy
    window = correlation[minLag:maxLag + 1]
    best = int(np.argmax(window))
    lag = float(minLag + best)
    peak = float(window[best])

    if 0 < best < window.size - 1:
        left, center, right = window[best - 1], window[best], window[best + 1]
        denominator = left - 2.0 * center + right
        if denominator != 0:
            lag += 0.5 * (left - right) / denominator

    bpm = 60.0 * frameRate / lag
    return OracleEstimate(float(bpm), peak, peak < MIN_PEAK)


def OracleTempo(clip: AudioClip) -> float:
    """节奏估计（BPM），退化时返回 0"""
    estimate = OracleEstimateTempo(clip)
    return 0.0 if estimate.IsDegenerate else estimate.Bpm
