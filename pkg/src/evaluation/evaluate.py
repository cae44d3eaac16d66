# -*- coding: utf-8 -*-
"""
跨语料评估
重叠检查 → 逐片段解码 BPM → 准确率；另含预言机评分与伪节奏诊断
"""

import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import spearmanr

from src.audio.augment import FixLength, TimeStretch
from src.audio.frontend import ComputeLogMel
from src.model.network import DecodeBpm, EmbedBatch, TempoNetwork
from src.numerics.functional import GuardedDenominator
from src.numerics.tensor import NoGrad
from src.persist.interfaces import CorpusIdentity, Manifest
from src.persist.manifest import ComputeCorpusIdentity, FindOverlap
from src.synthdata.oracle import OracleEstimateTempo
from src.training.losses import GUARD_THRESHOLD
from src.training.pipeline import LoadClip, PrepareEvalSpectrogram, ProducerPool
from src.training.resources import ResourceMonitor

from .interfaces import (
    DIAGNOSTIC_ALPHAS, EvaluateConfig, EvaluationError, ManifestOverlapError, MetricsReport,
    PseudoTempoReport, TempoPrediction
)
from .metrics import ScorePredictions


logger = logging.getLogger(__name__)


#region 重叠检查

def SeenCorpora(metadata: Dict[str, Any]) -> Dict[str, CorpusIdentity]:
    """检查点元数据中记录的训练语料身份"""
    return {name: CorpusIdentity.FromJson(data) for name, data in metadata.get('corpora', {}).items()}


def CheckOverlap(metadata: Dict[str, Any], manifest: Manifest, allowOverlap: bool = False) -> List[str]:
    """比较评估语料与训练语料，返回共享摘要

    Raises:
        ManifestOverlapError: 有重叠且未显式允许
    """
    seen = SeenCorpora(metadata)
    if not seen:
        logger.warning("检查点没有记录训练语料，无法检查重叠")
        return []
    shared = FindOverlap(ComputeCorpusIdentity(manifest), seen.values())
    if shared:
        message = (f"评估语料 {manifest.Path} 与训练语料 {sorted(seen)} 共享 {len(shared)} 个片段")
        if not allowOverlap:
            raise ManifestOverlapError(message + "；如确需评估请显式允许重叠", shared)
        logger.warning("%s（已显式允许）", message)
    return shared

#endregion


#region 模型评估

def _LabeledEntries(manifest: Manifest):
    if not manifest.Labeled:
        raise EvaluationError(f"评估清单缺少 bpm 列: {manifest.Path}")
    if not manifest.Entries:
        raise EvaluationError(f"评估清单为空: {manifest.Path}")
    return manifest.Entries


def PredictTempi(network: TempoNetwork, manifest: Manifest, cfg: EvaluateConfig) -> Tuple[List[TempoPrediction], int]:
    """逐片段解码 BPM，返回 (预测列表, 排除数)"""
    entries = _LabeledEntries(manifest)
    network.Eval()
    pool = ProducerPool(ResourceMonitor().ResolveWorkerCount(cfg.workers), window=2 * cfg.batch_size)
    spectrograms = pool.Map(lambda entry: (entry, PrepareEvalSpectrogram(entry, cfg.excerpt_length)), entries)

    predictions: List[TempoPrediction] = []
    excluded = 0
    batch = []

    def Flush():
        with NoGrad():
            h = network.Encoder(np.stack([spec for _, spec in batch]).astype(np.float32))
            predicted = DecodeBpm(network.Classifier(h))
        for (entry, _), bpm in zip(batch, predicted):
            predictions.append(TempoPrediction(float(bpm), float(entry.Bpm), entry.ClipId))
        batch.clear()

    for entry, spec in spectrograms:
        if spec is None:
            excluded += 1
            continue
        batch.append((entry, spec))
        if len(batch) == cfg.batch_size:
            Flush()
    if batch:
        Flush()
    return predictions, excluded


def Evaluate(network: TempoNetwork, metadata: Dict[str, Any], manifest: Manifest,
             cfg: Optional[EvaluateConfig] = None,
             configEcho: Optional[Dict[str, Any]] = None) -> MetricsReport:
    """评估微调后的网络

    Raises:
        ManifestOverlapError: 评估语料与训练语料重叠且未允许
    """
    cfg = cfg or EvaluateConfig()
    shared = CheckOverlap(metadata, manifest, cfg.allow_overlap)
    if metadata.get('phase') != 'finetune':
        logger.warning("检查点阶段为 %s，分类头可能未经训练", metadata.get('phase'))
    predictions, excluded = PredictTempi(network, manifest, cfg)
    config = dict(configEcho if configEcho is not None else cfg.Echo())
    config['overlap_overridden'] = bool(shared)
    report = ScorePredictions(predictions, cfg.tolerance, excluded, config)
    logger.info("评估完成: acc1=%.4f acc2=%.4f n=%d excluded=%d",
                report.acc1, report.acc2, report.n_items, report.n_excluded)
    return report


def EvaluateOracle(manifest: Manifest, tolerance: float = 0.04, workers: int = 0,
                   configEcho: Optional[Dict[str, Any]] = None) -> MetricsReport:
    """用自相关预言机对有标注语料评分，退化估计计为未命中"""
    entries = _LabeledEntries(manifest)
    pool = ProducerPool(ResourceMonitor().ResolveWorkerCount(workers))

    def Estimate(entry):
        clip = LoadClip(entry)
        return entry, (OracleEstimateTempo(clip) if clip is not None else None)

    predictions: List[TempoPrediction] = []
    excluded = 0
    for entry, estimate in pool.Map(Estimate, entries):
        if estimate is None:
            excluded += 1
            continue
        predictions.append(TempoPrediction(estimate.Bpm, float(entry.Bpm), entry.ClipId, estimate.IsDegenerate))
    report = ScorePredictions(predictions, tolerance, excluded, configEcho)
    logger.info("预言机评分: acc1=%.4f acc2=%.4f n=%d", report.acc1, report.acc2, report.n_items)
    return report

#endregion


#region 伪节奏诊断

def RankCorrelation(z: Sequence[float], bpm: Sequence[float]) -> Tuple[float, bool]:
    """Spearman 秩相关；z 为常数时返回 (0, True)"""
    z = np.asarray(z, dtype=np.float64)
    bpm = np.asarray(bpm, dtype=np.float64)
    if z.size < 2 or np.all(z == z[0]) or np.all(bpm == bpm[0]):
        return 0.0, True
    rho = spearmanr(z, bpm)[0]
    if not np.isfinite(rho):
        return 0.0, True
    return float(rho), False


def EquivarianceErrors(zBase: Sequence[float], zStretched: Sequence[float], alpha: float) -> np.ndarray:
    """e = |z(stretch(x, α)) / z(x) − α|，分母保号截断"""
    base = np.asarray(zBase, dtype=np.float32)
    guarded, _ = GuardedDenominator(base, GUARD_THRESHOLD)
    ratio = np.asarray(zStretched, dtype=np.float64) / guarded.Data.astype(np.float64)
    return np.abs(ratio - alpha)


def PseudoTempoDiagnostics(network: TempoNetwork, manifest: Manifest,
                           alphas: Sequence[float] = DIAGNOSTIC_ALPHAS,
                           excerptLength: Optional[int] = None, workers: int = 0) -> PseudoTempoReport:
    """z = g(f(x)) 与真实 BPM 的秩相关，以及片段内等变误差的中位数"""
    entries = _LabeledEntries(manifest)
    length = excerptLength or EvaluateConfig().excerpt_length
    network.Eval()
    pool = ProducerPool(ResourceMonitor().ResolveWorkerCount(workers))

    def Views(entry):
        clip = LoadClip(entry)
        if clip is None:
            return entry, None
        excerpt = FixLength(clip, length)
        specs = [ComputeLogMel(excerpt).Values]
        specs += [ComputeLogMel(FixLength(TimeStretch(excerpt, alpha), length)).Values for alpha in alphas]
        return entry, np.stack(specs)

    zBase, bpms = [], []
    zStretched = {alpha: [] for alpha in alphas}
    excluded = 0
    for entry, specs in pool.Map(Views, entries):
        if specs is None:
            excluded += 1
            continue
        z = EmbedBatch(network, specs)['z']
        zBase.append(float(z[0]))
        bpms.append(float(entry.Bpm))
        for k, alpha in enumerate(alphas):
            zStretched[alpha].append(float(z[k + 1]))

    rho, degenerate = RankCorrelation(zBase, bpms)
    medians = {}
    for alpha in alphas:
        errors = EquivarianceErrors(zBase, zStretched[alpha], alpha) if zBase else np.zeros(0)
        medians[repr(float(alpha))] = float(np.median(errors)) if errors.size else float('nan')
    report = PseudoTempoReport(rho, degenerate, medians, len(zBase), excluded)
    logger.info("伪节奏诊断: rho=%.4f degenerate=%s median_e=%s", rho, degenerate, medians)
    return report

#endregion
