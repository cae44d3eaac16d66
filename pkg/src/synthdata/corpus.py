# -*- coding: utf-8 -*-
"""
合成语料生成
按比例划分为预训练/微调/评估三份互不相交的片段集合，写出 WAV 与 CSV 清单
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from src.audio.wav_io import WriteWav
from src.persist.interfaces import ManifestEntry
from src.persist.manifest import WriteManifest

from .generator import Generate
from .interfaces import CorpusSplits, SynthError, SynthPattern, SynthSpec


logger = logging.getLogger(__name__)

SPLIT_NAMES = ('pretrain', 'finetune', 'eval')
DEFAULT_SPLIT_WEIGHTS = (20.0, 5.0, 2.0)
CLIP_NAME_FORMAT = 'clip_%06d.wav'


#region 划分

def SplitCounts(n: int, weights: Sequence[float]) -> Tuple[int, ...]:
    """按权重划分 n 个片段（最大余数法），权重先归一化

    Raises:
        SynthError: 权重个数不为 3、含负值或全为 0
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (len(SPLIT_NAMES),) or np.any(weights < 0) or weights.sum() <= 0:
        raise SynthError(f"划分比例必须是 3 个非负数且和为正: {list(weights)}")
    if n < 0:
        raise SynthError(f"片段数不能为负: {n}")
    quotas = weights / weights.sum() * n
    counts = np.floor(quotas).astype(int)
    remainder = n - int(counts.sum())
    order = np.argsort(-(quotas - counts), kind='stable')
    counts[order[:remainder]] += 1
    return tuple(int(c) for c in counts)


def ParseSplits(text: str) -> Tuple[float, ...]:
    """解析 "a,b,c" 或 "a:b:c" 形式的划分比例"""
    parts = text.replace(':', ',').split(',')
    try:
        values = tuple(float(part) for part in parts)
    except ValueError:
        raise SynthError(f"无法解析划分比例: {text!r}")
    SplitCounts(0, values)
    return values

#endregion


#region 规格抽样

def DrawSpec(index: int, seed: int, bpmRange: Tuple[float, float], durationSeconds: float,
             patterns: Sequence[SynthPattern], snrRange: Optional[Tuple[float, float]]) -> SynthSpec:
    """第 index 个片段的规格，只依赖 (seed, index)"""
    rng = np.random.default_rng([seed, index])
    bpm = float(rng.uniform(bpmRange[0], bpmRange[1]))
    pattern = patterns[int(rng.integers(0, len(patterns)))]
    swing = float(rng.uniform(0.0, 0.2)) if pattern == SynthPattern.DRUM_KICK_SNARE else 0.0
    snr = float(rng.uniform(*snrRange)) if snrRange is not None else None
    return SynthSpec(
        Bpm=bpm, DurationSeconds=durationSeconds, Pattern=pattern, Swing=swing,
        NoiseSnrDb=snr, Seed=int(rng.integers(0, 2 ** 31 - 1))
    )

#endregion


#region 语料

def MakeCorpus(outDir: Union[str, Path], n: int = 2700,
               bpmRange: Tuple[float, float] = (60.0, 180.0),
               splitWeights: Sequence[float] = DEFAULT_SPLIT_WEIGHTS,
               seed: int = 0, durationSeconds: float = 14.0,
               patterns: Sequence[SynthPattern] = tuple(SynthPattern),
               snrRange: Optional[Tuple[float, float]] = (20.0, 40.0),
               workers: int = 1, showProgress: bool = False) -> CorpusSplits:
    """生成语料目录 outDir/{pretrain,finetune,eval}/clip_%06d.wav 与三份清单

    片段序号全局唯一，划分由以 seed 置乱的序号决定，因此三份集合互不相交。
    预训练清单不含 bpm 列。
    """
    low, high = bpmRange
    if not 60.0 <= low <= high <= 180.0:
        raise SynthError(f"BPM 范围必须位于 [60, 180]: {bpmRange}")
    if not patterns:
        raise SynthError("至少需要一种节奏型")
    counts = SplitCounts(n, splitWeights)
    outDir = Path(outDir)

    order = np.random.default_rng(seed).permutation(n)
    assignments: List[Tuple[int, str]] = []
    cursor = 0
    for name, count in zip(SPLIT_NAMES, counts):
        for index in sorted(order[cursor:cursor + count]):
            assignments.append((int(index), name))
        cursor += count

    def Produce(item: Tuple[int, str]) -> Tuple[str, ManifestEntry]:
        index, split = item
        spec = DrawSpec(index, seed, bpmRange, durationSeconds, patterns, snrRange)
        path = outDir / split / (CLIP_NAME_FORMAT % index)
        labeled = Generate(spec, path.stem)
        WriteWav(path, labeled.Clip)
        return split, ManifestEntry(path.resolve(), labeled.TempoBpm)

    entries: Dict[str, List[ManifestEntry]] = {name: [] for name in SPLIT_NAMES}
    for name in SPLIT_NAMES:
        (outDir / name).mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = pool.map(Produce, assignments)
        for split, entry in tqdm(results, total=len(assignments), desc="synth", disable=not showProgress):
            entries[split].append(entry)

    manifests = {}
    for name in SPLIT_NAMES:
        manifests[name] = WriteManifest(outDir / f"{name}.csv", entries[name], labeled=(name != 'pretrain'))
    logger.info("合成语料完成: %s (pretrain=%d, finetune=%d, eval=%d)", outDir, *counts)
    return CorpusSplits(
        PretrainManifest=manifests['pretrain'],
        FinetuneManifest=manifests['finetune'],
        EvalManifest=manifests['eval'],
        Counts=dict(zip(SPLIT_NAMES, counts)),
    )

#endregion
