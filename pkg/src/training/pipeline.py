# -*- coding: utf-8 -*-
"""
样本生产流水线
并行生产者池按样本顺序交付结果；每个样本的随机流只由 (seed, epoch, index) 决定
"""

import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, TypeVar

import numpy as np

from src.audio.augment import (
    FixLength, MakeViewPair, RandomExcerpt, SpecAugmentFrequencyMask
)
from src.audio.frontend import ComputeLogMel
from src.audio.interfaces import AudioAugConfig, AudioClip, AudioError, CropPolicy, StretchEngine
from src.audio.wav_io import ReadWav
from src.persist.interfaces import ManifestEntry

from .interfaces import SslConfig


logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

# 随机流编号
STREAM_SAMPLE = 0
STREAM_DROPOUT = 1


def SampleRng(seed: int, epoch: int, index: int, stream: int = STREAM_SAMPLE) -> np.random.Generator:
    return np.random.default_rng([seed, epoch, index, stream])


def EpochOrder(seed: int, epoch: int, count: int) -> np.ndarray:
    """本轮样本顺序"""
    return np.random.default_rng([seed, epoch]).permutation(count)


def Batches(order: Sequence[int], batchSize: int, minSize: int = 1) -> List[List[int]]:
    """按顺序切分批次，丢弃小于 minSize 的尾批"""
    batches = [list(order[i:i + batchSize]) for i in range(0, len(order), batchSize)]
    return [b for b in batches if len(b) >= minSize]


#region 生产者池

class ProducerPool:
    """有界窗口的线程池映射，结果按输入顺序交付"""

    def __init__(self, workers: int = 1, window: int = 32):
        self._workers = max(1, int(workers))
        self._window = max(1, int(window))

    @property
    def Workers(self) -> int:
        return self._workers

    def Map(self, fn: Callable[[T], R], items: Iterable[T]) -> Iterator[R]:
        if self._workers == 1:
            for item in items:
                yield fn(item)
            return
        with ThreadPoolExecutor(max_workers=self._workers) as executor:
            pending = deque()
            for item in items:
                pending.append(executor.submit(fn, item))
                if len(pending) >= self._window:
                    yield pending.popleft().result()
            while pending:
                yield pending.popleft().result()

#endregion


#region 样本准备

@dataclass
class PreparedPair:
    """已转换为对数梅尔谱的视图对"""
    Index: int
    ClipId: str
    SpecI: np.ndarray
    SpecJ: np.ndarray
    AlphaI: float
    AlphaJ: float


def LoadClip(entry: ManifestEntry) -> Optional[AudioClip]:
    """读取片段，不可读时记录警告并返回 None"""
    try:
        return ReadWav(entry.Path, entry.ClipId)
    except (AudioError, OSError, RuntimeError) as e:
        logger.warning("跳过不可读文件 %s: %s", entry.Path, e)
        return None


def PreparePair(entry: ManifestEntry, index: int, epoch: int, cfg: SslConfig,
                augs: Optional[AudioAugConfig] = None) -> Optional[PreparedPair]:
    """读取 → 随机节选 → 视图对 → 对数梅尔谱（可选频率遮蔽）"""
    clip = LoadClip(entry)
    if clip is None:
        return None
    rng = SampleRng(cfg.seed, epoch, index)
    excerpt = RandomExcerpt(clip, cfg.excerpt_length, rng)
    pair = MakeViewPair(
        excerpt, cfg.r_p, rng, audioAugs=augs,
        engine=StretchEngine(cfg.stretch_engine), cropPolicy=CropPolicy(cfg.crop_policy),
        length=cfg.excerpt_length,
    )
    specI = ComputeLogMel(pair.ViewI)
    specJ = ComputeLogMel(pair.ViewJ)
    if augs is not None:
        specI = SpecAugmentFrequencyMask(specI, augs, rng)
        specJ = SpecAugmentFrequencyMask(specJ, augs, rng)
    return PreparedPair(index, clip.ClipId, specI.Values, specJ.Values,
                        pair.AlphaI.Alpha, pair.AlphaJ.Alpha)


def PrepareEvalSpectrogram(entry: ManifestEntry, length: int) -> Optional[np.ndarray]:
    """评估与嵌入用：前导 length 个样本（不足补零）的对数梅尔谱"""
    clip = LoadClip(entry)
    if clip is None:
        return None
    return ComputeLogMel(FixLength(clip, length)).Values

#endregion
