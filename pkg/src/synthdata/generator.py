# -*- coding: utf-8 -*-
"""
合成片段生成器
在精确的拍点网格上放置打击音色，标注即规格中的节奏
"""

import logging
from functools import lru_cache
from typing import List

import numpy as np
from scipy.signal import butter, sosfilt

from src.audio.interfaces import AudioClip, LabeledClip

from .interfaces import SynthPattern, SynthSpec


logger = logging.getLogger(__name__)

_PEAK_LEVEL = 0.5
_ACCENT_GAIN = 10.0 ** (6.0 / 20.0)
_HAT_GAIN = 10.0 ** (-14.0 / 20.0)


#region 拍点

def OnsetTimes(spec: SynthSpec) -> np.ndarray:
    """拍点时刻（秒），k * 60 / bpm < 时长"""
    count = int(np.ceil(spec.DurationSeconds / spec.BeatPeriodSeconds - 1e-9))
    times = np.arange(count) * spec.BeatPeriodSeconds
    return times[times < spec.DurationSeconds]


def _EighthTimes(spec: SynthSpec) -> np.ndarray:
    """八分音符时刻，反拍按 swing 推迟"""
    half = spec.BeatPeriodSeconds / 2.0
    beats = OnsetTimes(spec)
    offBeats = beats + half * (1.0 + spec.Swing)
    times = np.sort(np.concatenate([beats, offBeats]))
    return times[times < spec.DurationSeconds]

#endregion


#region 音色

@lru_cache(maxsize=16)
def _BandPass(low: float, high: float, sampleRate: int):
    return butter(4, [low, high], btype='bandpass', fs=sampleRate, output='sos')


def _NoiseBurst(rng: np.random.Generator, lengthMs: float, sampleRate: int, band=None) -> np.ndarray:
    """指数衰减噪声脉冲，末端衰减到 e^-5"""
    length = max(int(round(lengthMs * sampleRate / 1000.0)), 1)
    noise = rng.standard_normal(length)
    if band is not None:
        noise = sosfilt(_BandPass(float(band[0]), float(band[1]), sampleRate), noise)
    envelope = np.exp(-5.0 * np.arange(length) / length)
    burst = noise * envelope
    peak = np.max(np.abs(burst))
    return burst / peak if peak > 0 else burst


def _Kick(sampleRate: int) -> np.ndarray:
    length = int(0.08 * sampleRate)
    t = np.arange(length) / sampleRate
    frequency = 50.0 + 100.0 * np.exp(-t / 0.02)
    phase = 2.0 * np.pi * np.cumsum(frequency) / sampleRate
    return np.sin(phase) * np.exp(-t / 0.03)


def _Snare(rng: np.random.Generator, sampleRate: int) -> np.ndarray:
    noise = _NoiseBurst(rng, 60.0, sampleRate, (1000.0, 8000.0))
    t = np.arange(noise.size) / sampleRate
    tone = 0.5 * np.sin(2.0 * np.pi * 190.0 * t) * np.exp(-t / 0.015)
    return 0.8 * noise + tone


def _Place(buffer: np.ndarray, sound: np.ndarray, time: float, sampleRate: int, gain: float = 1.0) -> None:
    start = int(round(time * sampleRate))
    if start >= buffer.size:
        return
    stop = min(start + sound.size, buffer.size)
    buffer[start:stop] += gain * sound[:stop - start]

#endregion


#region 生成

def Synthesize(spec: SynthSpec) -> np.ndarray:
    """按规格合成波形（float32，峰值 0.5）"""
    rng = np.random.default_rng(spec.Seed)
    sampleRate = spec.SampleRate
    buffer = np.zeros(spec.NumSamples, dtype=np.float64)
    beats = OnsetTimes(spec)

    if spec.Pattern == SynthPattern.CLICK:
        for time in beats:
            _Place(buffer, _NoiseBurst(rng, spec.ClickDecayMs, sampleRate, spec.NoiseBandHz), time, sampleRate)
    elif spec.Pattern == SynthPattern.ACCENTED_4_4:
        for index, time in enumerate(beats):
            gain = _ACCENT_GAIN if index % 4 == 0 else 1.0
            _Place(buffer, _NoiseBurst(rng, spec.ClickDecayMs, sampleRate, spec.NoiseBandHz),
                   time, sampleRate, gain)
    else:
        kick = _Kick(sampleRate)
        for index, time in enumerate(beats):
            if index % 2 == 0:
                _Place(buffer, kick, time, sampleRate)
            else:
                _Place(buffer, _Snare(rng, sampleRate), time, sampleRate)
        for time in _EighthTimes(spec):
            hat = _NoiseBurst(rng, 20.0, sampleRate, (6000.0, min(16000.0, sampleRate / 2 - 1)))
            _Place(buffer, hat, time, sampleRate, _HAT_GAIN)

    if spec.NoiseSnrDb is not None:
        rms = float(np.sqrt(np.mean(buffer ** 2)))
        if rms > 0:
            buffer += rng.normal(0.0, rms / (10.0 ** (spec.NoiseSnrDb / 20.0)), size=buffer.size)

    peak = float(np.max(np.abs(buffer)))
    if peak > 0:
        buffer *= _PEAK_LEVEL / peak
    return buffer.astype(np.float32)


def Generate(spec: SynthSpec, clipId: str = "") -> LabeledClip:
    """生成带标注片段，标注为 spec.Bpm"""
    clip = AudioClip(Synthesize(spec), spec.SampleRate, clipId or f"synth_{spec.Seed}")
    return LabeledClip(clip, float(spec.Bpm))

#endregion
