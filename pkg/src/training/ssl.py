# -*- coding: utf-8 -*-
"""
等变自监督预训练
视图对 → 编码器 + 投影头 → 比值损失 → Adam，逐轮记录坍缩监视指标
"""

import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from tqdm import tqdm

from src.audio.interfaces import AudioAugConfig
from src.model.network import LogParameterCounts, TempoNetwork
from src.numerics.interfaces import IsDeterministic, NonFiniteError
from src.numerics.optimizer import AdamOptimizer
from src.persist.interfaces import Manifest
from src.persist.manifest import ComputeCorpusIdentity

from .interfaces import (
    CollapseMonitor, EmptyCorpusError, EpochRecord, NumericalFailure, SslConfig
)
from .losses import PairLoss
from .pipeline import STREAM_DROPOUT, Batches, EpochOrder, PreparePair, ProducerPool, SampleRng
from .resources import ResourceMonitor


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class PretrainResult:
    """预训练产物"""
    Network: TempoNetwork
    Monitor: CollapseMonitor
    Metadata: Dict[str, Any]
    CheckpointPath: Optional[Path] = None


def EncoderOptimizer(network: TempoNetwork, learningRate: float) -> AdamOptimizer:
    """编码器与投影头参数的优化器"""
    params = list(network.Encoder.TrainableParameters("encoder.").items())
    params += list(network.Projection.TrainableParameters("projection.").items())
    return AdamOptimizer(params, learningRate=learningRate)


def _CheckFinite(value: float, ids: List[str], epoch: int, batchIndex: int) -> None:
    if not np.isfinite(value):
        raise NumericalFailure(f"第 {epoch} 轮第 {batchIndex} 批损失非有限: {value}", ids, epoch, batchIndex)


def Pretrain(manifest: Manifest, cfg: SslConfig, network: Optional[TempoNetwork] = None,
             outPath: Optional[PathLike] = None, logPath: Optional[PathLike] = None,
             configEcho: Optional[Dict[str, Any]] = None,
             showProgress: bool = False) -> PretrainResult:
    """在无标注语料上预训练编码器与投影头

    每轮对每个文件取一个随机节选；批次顺序与所有随机流只依赖 (seed, epoch, index)。

    Args:
        manifest: 语料清单（无需 bpm）
        cfg: 预训练配置
        network: 初始网络，默认按 cfg.seed 初始化
        outPath: 检查点输出路径
        logPath: 逐轮 JSON-lines 记录路径

    Raises:
        EmptyCorpusError: 语料为空或全部不可读
        NumericalFailure: 损失非有限
    """
    if not manifest.Entries:
        raise EmptyCorpusError(f"预训练语料为空: {manifest.Path}")
    network = network or TempoNetwork(cfg.seed)
    LogParameterCounts(network)
    optimizer = EncoderOptimizer(network, cfg.learning_rate)
    augs = AudioAugConfig() if cfg.audio_augs_enabled else None
    resources = ResourceMonitor()
    pool = ProducerPool(resources.ResolveWorkerCount(cfg.workers), window=2 * cfg.batch_size)
    monitor = CollapseMonitor()
    entries = manifest.Entries
    logger.info("预训练开始: %d 个文件, loss=%s, r_p=%.3f, epochs=%d, workers=%d, deterministic=%s",
                len(entries), cfg.loss_variant, cfg.r_p, cfg.epochs, pool.Workers, IsDeterministic())
    logger.info("系统信息: %s", resources.GetSystemInfo())

    logHandle = None
    if logPath is not None:
        Path(logPath).parent.mkdir(parents=True, exist_ok=True)
        logHandle = open(logPath, 'w', encoding='utf-8')
    try:
        for epoch in range(1, cfg.epochs + 1):
            record = _RunEpoch(network, optimizer, entries, cfg, augs, pool, epoch, showProgress)
            record.rss_mb = round(resources.RssMb(), 1)
            monitor.Record(record)
            logger.info("epoch %d: loss=%.5f |z|=%.5f std(z)=%.5f guard=%d skipped=%d %.1fs",
                        epoch, record.loss_mean, record.z_abs_mean, record.z_std,
                        record.guard_hits, record.skipped_files, record.wallclock_s)
            if logHandle is not None:
                logHandle.write(json.dumps(record.ToJson(), sort_keys=True) + "\n")
                logHandle.flush()
    finally:
        if logHandle is not None:
            logHandle.close()

    metadata = {
        'phase': 'pretrain',
        'config': configEcho if configEcho is not None else cfg.Echo(),
        'corpora': {'pretrain': ComputeCorpusIdentity(manifest).ToJson()},
        'epochs': cfg.epochs,
        'seed': cfg.seed,
        'monitor': monitor.ToJson(),
        'verdict': monitor.Verdict().value,
    }
    network.Eval()
    checkpointPath = network.Save(outPath, metadata) if outPath is not None else None
    return PretrainResult(network, monitor, metadata, checkpointPath)


def _RunEpoch(network: TempoNetwork, optimizer: AdamOptimizer, entries, cfg: SslConfig,
              augs: Optional[AudioAugConfig], pool: ProducerPool, epoch: int,
              showProgress: bool) -> EpochRecord:
    started = time.perf_counter()
    network.Train()
    order = EpochOrder(cfg.seed, epoch, len(entries))
    prepared = pool.Map(lambda index: PreparePair(entries[index], int(index), epoch, cfg, augs), order)

    losses: List[float] = []
    zValues: List[np.ndarray] = []
    guardHits = 0
    skipped = 0
    batchIndex = 0
    pending = []

    def Step(batch) -> None:
        nonlocal guardHits, batchIndex
        ids = [p.ClipId for p in batch]
        size = len(batch)
        specs = np.stack([p.SpecI for p in batch] + [p.SpecJ for p in batch]).astype(np.float32)
        alphaI = np.array([p.AlphaI for p in batch], dtype=np.float32)
        alphaJ = np.array([p.AlphaJ for p in batch], dtype=np.float32)
        network.Encoder.SetDropoutRng(SampleRng(cfg.seed, epoch, batchIndex, STREAM_DROPOUT))
        try:
            z = network(specs).Reshape(-1)
            result = PairLoss(cfg.Variant, z[:size], z[size:], alphaI, alphaJ, cfg.symmetric)
            value = result.Loss.Item()
            _CheckFinite(value, ids, epoch, batchIndex)
            result.Loss.Backward()
            optimizer.Step()
        except NonFiniteError as e:
            raise NumericalFailure(f"第 {epoch} 轮第 {batchIndex} 批出现非有限值: {e}", ids, epoch, batchIndex)
        finally:
            optimizer.ZeroGrad()
        losses.append(value)
        zValues.append(z.Numpy())
        guardHits += result.GuardHits
        batchIndex += 1

    progress = tqdm(prepared, total=len(order), desc=f"epoch {epoch}", disable=not showProgress, leave=False)
    for item in progress:
        if item is None:
            skipped += 1
            continue
        pending.append(item)
        if len(pending) == cfg.batch_size:
            Step(pending)
            pending = []
    if len(pending) >= 2:
        Step(pending)

    if not losses:
        raise EmptyCorpusError(f"第 {epoch} 轮没有可用批次（跳过 {skipped} 个文件）")
    allZ = np.concatenate(zValues)
    return EpochRecord(
        epoch=epoch,
        loss_mean=float(np.mean(losses)),
        z_abs_mean=float(np.mean(np.abs(allZ))),
        z_std=float(np.std(allZ)),
        guard_hits=int(guardHits),
        wallclock_s=round(time.perf_counter() - started, 3),
        skipped_files=skipped,
    )
