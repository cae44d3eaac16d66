# -*- coding: utf-8 -*-
"""
WSOLA 时间拉伸
波形相似叠加：合成帧按固定步长排布，分析帧在名义位置附近搜索与上一帧
自然延续最相似的片段，因此节奏改变而音高保持
"""

import math

import numpy as np
from scipy.signal import correlate, get_window


FRAME_LENGTH = 2048
SYNTHESIS_HOP = FRAME_LENGTH // 2
SEARCH_RADIUS = 512


def WsolaStretch(samples: np.ndarray, alpha: float,
                 frameLength: int = FRAME_LENGTH, searchRadius: int = SEARCH_RADIUS) -> np.ndarray:
    """按拉伸率 alpha 做保音高拉伸

    Args:
        samples: 单声道波形
        alpha: 节奏缩放率，输出长度 round(len / alpha)

    Returns:
        拉伸后的波形 (float32)
    """
    samples = np.asarray(samples, dtype=np.float64)
    outLength = int(round(samples.size / alpha))
    if outLength <= 0:
        return np.zeros(0, dtype=np.float32)

    synthesisHop = frameLength // 2
    analysisHop = synthesisHop * alpha
    window = get_window('hann', frameLength, fftbins=True)
    margin = searchRadius + frameLength
    padded = np.pad(samples, (margin, margin + frameLength + int(math.ceil(analysisHop))))

    frameCount = int(math.ceil(outLength / synthesisHop)) + 1
    output = np.zeros(frameCount * synthesisHop + frameLength)
    normalizer = np.zeros_like(output)

    previous = margin
    for k in range(frameCount):
        nominal = margin + int(round(k * analysisHop))
        if k == 0:
            position = nominal
        else:
            # 与上一帧的自然延续做互相关，在 ±searchRadius 内选最相似的起点
            template = padded[previous + synthesisHop: previous + synthesisHop + frameLength]
            lo = max(nominal - searchRadius, 0)
            hi = min(nominal + searchRadius, padded.size - frameLength)
            region = padded[lo: hi + frameLength]
            if region.size < frameLength or not np.any(template):
                position = min(max(nominal, 0), padded.size - frameLength)
            else:
                scores = correlate(region, template, mode='valid', method='fft')
                position = lo + int(np.argmax(scores))
        frame = padded[position: position + frameLength]
        start = k * synthesisHop
        output[start: start + frameLength] += window * frame
        normalizer[start: start + frameLength] += window
        previous = position

    nonzero = normalizer > 1e-8
    output[nonzero] /= normalizer[nonzero]
    return output[:outLength].astype(np.float32)
