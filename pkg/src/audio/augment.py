# -*- coding: utf-8 -*-
"""
视图生成与音频增强
为每个训练样本生成两个随机拉伸视图 (x̃_i, α_i)、(x̃_j, α_j)，并提供
增益、极性反转、高斯噪声与谱域频率遮蔽
"""

import logging
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.signal import resample_poly

from .interfaces import (
    AudioAugConfig, AudioClip, AudioValueError, CropPolicy, LogMelSpectrogram,
    StretchEngine, StretchRate, ViewPair, EXCERPT_LENGTH
)
from .wsola import WsolaStretch


logger = logging.getLogger(__name__)

# 拉伸率有理近似的分母上限
_MAX_RATIO_DENOMINATOR = 512


#region 节选与定长

def FixLength(clip: AudioClip, length: int = EXCERPT_LENGTH,
              policy: CropPolicy = CropPolicy.LEADING,
              rng: Optional[np.random.Generator] = None) -> AudioClip:
    """裁剪或右侧补零到指定长度"""
    samples = clip.Samples
    if samples.size == length:
        return clip
    if samples.size < length:
        return clip.WithSamples(np.pad(samples, (0, length - samples.size)))
    start = 0
    if policy == CropPolicy.RANDOM:
        if rng is None:
            raise AudioValueError("随机裁剪需要提供随机数发生器")
        start = int(rng.integers(0, samples.size - length + 1))
    return clip.WithSamples(samples[start:start + length])


def RandomExcerpt(clip: AudioClip, length: int, rng: np.random.Generator) -> AudioClip:
    """随机选取长度为 length 的连续节选，起点在有效范围内均匀分布

    片段短于 length 时整体右侧补零返回。
    """
    if clip.Length <= length:
        return FixLength(clip, length)
    start = int(rng.integers(0, clip.Length - length + 1))
    return clip.WithSamples(clip.Samples[start:start + length])

#endregion


#region 时间拉伸

def SampleStretchRate(r: float, rng: np.random.Generator) -> StretchRate:
    """从 U[1-r, 1+r] 抽取拉伸率"""
    if not 0.0 <= r < 1.0:
        raise AudioValueError(f"拉伸强度 r 必须位于 [0,1): {r}")
    return StretchRate(float(rng.uniform(1.0 - r, 1.0 + r)))


def TimeStretch(clip: AudioClip, alpha, engine: StretchEngine = StretchEngine.RESAMPLE) -> AudioClip:
    """时间拉伸，输出长度 round(len / alpha)

    重采样引擎以加窗 sinc 多相滤波把波形重采样为 len/alpha 个样本，
    再按原采样率解释，事件间隔缩放为 1/alpha。

    Raises:
        AudioValueError: alpha 非正
    """
    alphaValue = alpha.Alpha if isinstance(alpha, StretchRate) else float(alpha)
    if not alphaValue > 0:
        raise AudioValueError(f"拉伸率必须为正: {alphaValue}")
    targetLength = int(round(clip.Length / alphaValue))
    if targetLength <= 0:
        raise AudioValueError(f"拉伸率 {alphaValue} 使 {clip.Length} 个样本的片段变为空")
    if alphaValue == 1.0:
        return clip.WithSamples(clip.Samples.copy())

    if engine == StretchEngine.WSOLA:
        stretched = WsolaStretch(clip.Samples, alphaValue)
    else:
        ratio = Fraction(1.0 / alphaValue).limit_denominator(_MAX_RATIO_DENOMINATOR)
        stretched = resample_poly(clip.Samples.astype(np.float64), ratio.numerator, ratio.denominator)
    stretched = np.asarray(stretched, dtype=np.float32)
    if stretched.size >= targetLength:
        stretched = stretched[:targetLength]
    else:
        stretched = np.pad(stretched, (0, targetLength - stretched.size))
    return clip.WithSamples(stretched)

#endregion


#region 波形增强

def AudioAugmentations(clip: AudioClip, cfg: AudioAugConfig, rng: np.random.Generator) -> AudioClip:
    """独立随机地施加增益、极性反转与高斯噪声"""
    samples = clip.Samples.astype(np.float64)
    if rng.random() < cfg.GainProbability:
        gainDb = rng.uniform(*cfg.GainDbRange)
        samples = samples * (10.0 ** (gainDb / 20.0))
    if rng.random() < cfg.PolarityProbability:
        samples = -samples
    if rng.random() < cfg.NoiseProbability:
        snrDb = rng.uniform(*cfg.NoiseSnrDbRange)
        rms = float(np.sqrt(np.mean(samples ** 2)))
        if rms > 0:
            noiseStd = rms / (10.0 ** (snrDb / 20.0))
            samples = samples + rng.normal(0.0, noiseStd, size=samples.shape)
    return clip.WithSamples(samples.astype(np.float32))


def SpecAugmentFrequencyMask(spec: LogMelSpectrogram, cfg: AudioAugConfig,
                             rng: np.random.Generator) -> LogMelSpectrogram:
    """谱域频率遮蔽：1–2 条宽度不超过 15 个梅尔带的遮蔽，置为 0"""
    if rng.random() >= cfg.FreqMaskProbability:
        return spec
    values = spec.Values.copy()
    nBins = values.shape[1]
    lowCount, highCount = cfg.FreqMaskCountRange
    count = int(rng.integers(lowCount, highCount + 1))
    for _ in range(count):
        width = int(rng.integers(1, min(cfg.FreqMaskMaxWidth, nBins) + 1))
        start = int(rng.integers(0, nBins - width + 1))
        values[:, start:start + width] = 0.0
    return LogMelSpectrogram(values, spec.FrameRate)

#endregion


#region 视图对

def MakeViewPair(excerpt: AudioClip, r: float, rng: np.random.Generator,
                 audioAugs: Optional[AudioAugConfig] = None,
                 engine: StretchEngine = StretchEngine.RESAMPLE,
                 cropPolicy: CropPolicy = CropPolicy.LEADING,
                 length: int = EXCERPT_LENGTH) -> ViewPair:
    """生成两个独立拉伸的视图

    各视图独立抽取 α，拉伸后裁剪或补零到 l_x，增强在拉伸之后按视图独立施加。
    """
    if excerpt.Length != length:
        raise AudioValueError(f"节选长度必须为 {length}，当前 {excerpt.Length}")
    alphaI = SampleStretchRate(r, rng)
    alphaJ = SampleStretchRate(r, rng)
    views = []
    for alpha in (alphaI, alphaJ):
        view = FixLength(TimeStretch(excerpt, alpha, engine), length, cropPolicy, rng)
        if audioAugs is not None:
            view = AudioAugmentations(view, audioAugs, rng)
        views.append(view)
    return ViewPair(views[0], views[1], alphaI, alphaJ, excerpt.ClipId)

#endregion
