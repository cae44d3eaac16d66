# -*- coding: utf-8 -*-
"""
线性探针微调
冻结编码器，只训练 300 类分类头；目标为 ±1 类别的平滑窗口，可选保持标注一致的时间拉伸
"""

import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from src.audio.augment import FixLength, SampleStretchRate, TimeStretch
from src.audio.frontend import ComputeLogMel
from src.audio.interfaces import LabeledClip, StretchEngine
from src.model.heads import TempoClassifierHead
from src.model.interfaces import N_TEMPO_CLASSES
from src.model.network import DecodeBpm, FreezeEncoder, LogParameterCounts, TempoNetwork
from src.numerics.interfaces import NonFiniteError
from src.numerics.optimizer import AdamOptimizer
from src.numerics.tensor import NoGrad
from src.persist.interfaces import Manifest
from src.persist.manifest import ComputeCorpusIdentity

from .interfaces import (
    EmptyCorpusError, EpochRecord, FinetuneConfig, LabelRangeError, NumericalFailure, SmoothedTarget
)
from .losses import SmoothedCrossEntropy
from .pipeline import Batches, EpochOrder, LoadClip, ProducerPool, SampleRng
from .resources import ResourceMonitor


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MAX_STRETCH_RETRIES = 100
_SMOOTHING = (0.25, 0.5, 0.25)


#region 目标与拉伸

def BpmToTarget(bpm: float, clipId: str = "") -> SmoothedTarget:
    """中心类别 k = round(bpm) 限制在 [1, 298]，权重 {k-1: .25, k: .5, k+1: .25}

    Raises:
        LabelRangeError: bpm 不在 (0, 300)
    """
    if not 0.0 < bpm < 300.0:
        raise LabelRangeError(f"片段 {clipId!r} 的节奏 {bpm} 超出 (0, 300)")
    center = int(np.clip(np.floor(bpm + 0.5), 1, N_TEMPO_CLASSES - 2))
    weights = np.zeros(N_TEMPO_CLASSES, dtype=np.float32)
    weights[center - 1:center + 2] = _SMOOTHING
    return SmoothedTarget(weights, center)


def StretchLabeled(sample: LabeledClip, rF: float, rng: np.random.Generator,
                   length: Optional[int] = None,
                   engine: StretchEngine = StretchEngine.RESAMPLE) -> Optional[LabeledClip]:
    """按 α ~ U[1-r_f, 1+r_f] 拉伸片段并把标注缩放为 α·bpm，再裁剪/补零到 length

    α·bpm 超出 [0, 300) 时重抽，最多 100 次；全部失败返回 None。
    """
    length = sample.Clip.Length if length is None else length
    if rF == 0.0:
        return LabeledClip(FixLength(sample.Clip, length), sample.TempoBpm)
    for _ in range(MAX_STRETCH_RETRIES):
        alpha = SampleStretchRate(rF, rng)
        bpm = alpha.Alpha * sample.TempoBpm
        if 0.0 < bpm < 300.0:
            stretched = TimeStretch(sample.Clip, alpha, engine)
            return LabeledClip(FixLength(stretched, length), bpm)
    logger.warning("片段 %s 连续 %d 次拉伸后节奏越界，跳过", sample.ClipId, MAX_STRETCH_RETRIES)
    return None

#endregion


#region 分类头训练

def TrainClassifierStep(classifier: TempoClassifierHead, optimizer: AdamOptimizer,
                        embeddings: np.ndarray, targets: np.ndarray) -> float:
    """一次分类头更新，返回批损失"""
    try:
        loss = SmoothedCrossEntropy(classifier.Logits(embeddings), targets)
        value = loss.Item()
        if not np.isfinite(value):
            raise NonFiniteError(f"交叉熵非有限: {value}")
        loss.Backward()
        optimizer.Step()
    finally:
        optimizer.ZeroGrad()
    return value


def FitClassifierHead(classifier: TempoClassifierHead, embeddings: np.ndarray, targets: np.ndarray,
                      epochs: int, batchSize: int = 16, learningRate: float = 0.001,
                      seed: int = 0) -> List[float]:
    """在固定嵌入上训练分类头，返回逐轮损失均值"""
    optimizer = AdamOptimizer(classifier.TrainableParameters("classifier.").items(), learningRate=learningRate)
    history = []
    for epoch in range(1, epochs + 1):
        order = EpochOrder(seed, epoch, len(embeddings))
        losses = [TrainClassifierStep(classifier, optimizer, embeddings[batch], targets[batch])
                  for batch in Batches(order, batchSize)]
        history.append(float(np.mean(losses)))
    return history

#endregion


#region 微调

@dataclass
class FinetuneResult:
    """微调产物"""
    Network: TempoNetwork
    History: List[EpochRecord]
    Metadata: Dict[str, Any]
    CheckpointPath: Optional[Path] = None


def _Embed(network: TempoNetwork, spectrogram: np.ndarray) -> np.ndarray:
    with NoGrad():
        return network.Encoder(spectrogram[None].astype(np.float32)).Numpy()[0]


def Finetune(network: TempoNetwork, manifest: Manifest, cfg: FinetuneConfig,
             parentMetadata: Optional[Dict[str, Any]] = None,
             outPath: Optional[PathLike] = None, logPath: Optional[PathLike] = None,
             configEcho: Optional[Dict[str, Any]] = None,
             showProgress: bool = False) -> FinetuneResult:
    """冻结编码器后训练分类头

    嵌入在无梯度模式下用运行统计计算；r_f = 0 或关闭逐轮重抽时嵌入只计算一次。

    Raises:
        EmptyCorpusError: 语料为空或全部不可用
        LabelRangeError: 标注越界
        NumericalFailure: 损失非有限
    """
    if not manifest.Entries:
        raise EmptyCorpusError(f"微调语料为空: {manifest.Path}")
    if not manifest.Labeled:
        raise LabelRangeError(f"微调清单缺少 bpm 列: {manifest.Path}")
    entries = manifest.Entries
    for entry in entries:
        BpmToTarget(entry.Bpm, entry.ClipId)

    FreezeEncoder(network.Encoder)
    network.Projection.Freeze()
    LogParameterCounts(network)
    optimizer = AdamOptimizer(network.Classifier.TrainableParameters("classifier.").items(),
                              learningRate=cfg.learning_rate)
    resources = ResourceMonitor()
    pool = ProducerPool(resources.ResolveWorkerCount(cfg.workers), window=2 * cfg.batch_size)
    engine = StretchEngine(cfg.stretch_engine)
    cacheable = cfg.r_f == 0.0 or not cfg.redraw_per_epoch
    cache: Dict[int, Optional[Tuple[np.ndarray, float]]] = {}
    logger.info("微调开始: %d 个文件, r_f=%.3f, epochs=%d, workers=%d, 嵌入缓存=%s",
                len(entries), cfg.r_f, cfg.epochs, pool.Workers, cacheable)
    logger.info("系统信息: %s", resources.GetSystemInfo())

    def Prepare(index: int, epoch: int) -> Optional[Tuple[np.ndarray, float]]:
        if cacheable and index in cache:
            return cache[index]
        entry = entries[index]
        result = None
        clip = LoadClip(entry)
        if clip is not None:
            rng = SampleRng(cfg.seed, 0 if cacheable else epoch, index)
            stretched = StretchLabeled(LabeledClip(clip, entry.Bpm), cfg.r_f, rng, cfg.excerpt_length, engine)
            if stretched is not None:
                result = (_Embed(network, ComputeLogMel(stretched.Clip).Values), stretched.TempoBpm)
        if cacheable:
            cache[index] = result
        return result

    history: List[EpochRecord] = []
    logHandle = None
    if logPath is not None:
        Path(logPath).parent.mkdir(parents=True, exist_ok=True)
        logHandle = open(logPath, 'w', encoding='utf-8')
    try:
        for epoch in range(1, cfg.epochs + 1):
            started = time.perf_counter()
            order = EpochOrder(cfg.seed, epoch, len(entries))
            items = pool.Map(lambda index: (int(index), Prepare(int(index), epoch)), order)
            losses: List[float] = []
            hits = 0
            seen = 0
            skipped = 0
            batch: List[Tuple[int, np.ndarray, float]] = []

            def Flush():
                nonlocal hits, seen
                embeddings = np.stack([b[1] for b in batch])
                targets = np.stack([BpmToTarget(b[2], entries[b[0]].ClipId).Weights for b in batch])
                try:
                    losses.append(TrainClassifierStep(network.Classifier, optimizer, embeddings, targets))
                except NonFiniteError as e:
                    ids = [entries[b[0]].ClipId for b in batch]
                    raise NumericalFailure(f"第 {epoch} 轮微调出现非有限值: {e}", ids, epoch, len(losses))
                with NoGrad():
                    predicted = DecodeBpm(network.Classifier(embeddings))
                truths = np.array([b[2] for b in batch])
                hits += int(np.sum(np.abs(predicted - truths) <= 0.04 * truths))
                seen += len(batch)
                batch.clear()

            for index, prepared in tqdm(items, total=len(order), desc=f"finetune {epoch}",
                                        disable=not showProgress, leave=False):
                if prepared is None:
                    skipped += 1
                    continue
                batch.append((index, prepared[0], prepared[1]))
                if len(batch) == cfg.batch_size:
                    Flush()
            if batch:
                Flush()
            if not losses:
                raise EmptyCorpusError(f"第 {epoch} 轮微调没有可用样本（跳过 {skipped} 个）")

            record = EpochRecord(
                epoch=epoch, loss_mean=float(np.mean(losses)),
                wallclock_s=round(time.perf_counter() - started, 3),
                skipped_files=skipped, rss_mb=round(resources.RssMb(), 1),
            )
            history.append(record)
            logger.info("finetune epoch %d: loss=%.5f train_acc1=%.3f skipped=%d",
                        epoch, record.loss_mean, hits / max(seen, 1), skipped)
            if logHandle is not None:
                line = record.ToJson()
                line['train_acc1'] = hits / max(seen, 1)
                logHandle.write(json.dumps(line, sort_keys=True) + "\n")
                logHandle.flush()
    finally:
        if logHandle is not None:
            logHandle.close()

    parent = parentMetadata or {}
    corpora = dict(parent.get('corpora', {}))
    corpora['finetune'] = ComputeCorpusIdentity(manifest).ToJson()
    metadata = {
        'phase': 'finetune',
        'config': configEcho if configEcho is not None else cfg.Echo(),
        'pretrain_config': parent.get('config'),
        'corpora': corpora,
        'epochs': cfg.epochs,
        'seed': cfg.seed,
        'history': [r.Deterministic() for r in history],
    }
    checkpointPath = network.Save(outPath, metadata) if outPath is not None else None
    return FinetuneResult(network, history, metadata, checkpointPath)

#endregion
