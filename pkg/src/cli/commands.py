# -*- coding: utf-8 -*-
"""
命令实现与参数解析
每个命令：解析配置 → 执行流水线 → 产物写文件，日志写标准错误
"""

import argparse
import csv
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.audio.interfaces import AudioError
from src.evaluation.evaluate import Evaluate, EvaluateOracle, PseudoTempoDiagnostics
from src.evaluation.interfaces import EvaluateConfig, EvaluationError
from src.evaluation.report import WriteJson, WriteReport
from src.model.interfaces import EMBEDDING_DIM, ModelError
from src.model.network import EmbedBatch, TempoNetwork
from src.numerics.interfaces import EnableDeterministicMode, IsDeterministic, NonFiniteError
from src.persist.checkpoint import ReadHeader
from src.persist.interfaces import PersistError
from src.persist.manifest import ReadManifest
from src.synthdata.corpus import MakeCorpus, ParseSplits, SPLIT_NAMES
from src.synthdata.interfaces import SynthError
from src.training.finetune import Finetune
from src.training.interfaces import (
    EmptyCorpusError, FinetuneConfig, LabelRangeError, LossVariant, NumericalFailure, SslConfig
)
from src.training.pipeline import PrepareEvalSpectrogram, ProducerPool
from src.training.resources import ResourceMonitor
from src.training.ssl import Pretrain

from .interfaces import ExitCode, UsageError
from .logging_setup import ConfigureLogging
from .run_config import RunConfigManager, run_config_manager


logger = logging.getLogger(__name__)

# 不属于命令配置的全局参数
GLOBAL_DESTS = ('command', 'config', 'log_level', 'json_logs', 'deterministic', 'progress')

DATA_ERRORS = (AudioError, PersistError, EmptyCorpusError, EvaluationError,
               SynthError, LabelRangeError, ModelError)
NUMERICAL_ERRORS = (NumericalFailure, NonFiniteError)


#region 参数解析

# (flag, dest, 额外参数)
_FLAG_TABLE: Dict[str, List[Tuple[str, str, Dict[str, Any]]]] = {
    "synth-data": [
        ("--n", "n", {}),
        ("--bpm-min", "bpm_min", {}),
        ("--bpm-max", "bpm_max", {}),
        ("--splits", "splits", {}),
        ("--seed", "seed", {}),
        ("--out-dir", "out_dir", {}),
        ("--duration", "duration_s", {}),
    ],
    "pretrain": [
        ("--manifest", "manifest", {}),
        ("--rp", "r_p", {}),
        ("--loss", "loss_variant", {'choices': [v.value for v in LossVariant] + ['double-prime']}),
        ("--epochs", "epochs", {}),
        ("--batch-size", "batch_size", {}),
        ("--lr", "learning_rate", {}),
        ("--seed", "seed", {}),
        ("--crop", "crop_policy", {'choices': ['leading', 'random']}),
        ("--stretch-engine", "stretch_engine", {'choices': ['resample', 'wsola']}),
        ("--excerpt-length", "excerpt_length", {}),
        ("--out", "out", {}),
        ("--log-out", "log_out", {}),
    ],
    "finetune": [
        ("--checkpoint", "checkpoint", {}),
        ("--manifest", "manifest", {}),
        ("--rf", "r_f", {}),
        ("--epochs", "epochs", {}),
        ("--batch-size", "batch_size", {}),
        ("--lr", "learning_rate", {}),
        ("--seed", "seed", {}),
        ("--stretch-engine", "stretch_engine", {'choices': ['resample', 'wsola']}),
        ("--excerpt-length", "excerpt_length", {}),
        ("--out", "out", {}),
        ("--log-out", "log_out", {}),
    ],
    "evaluate": [
        ("--checkpoint", "checkpoint", {}),
        ("--manifest", "manifest", {}),
        ("--tolerance", "tolerance", {}),
        ("--format", "format", {'choices': ['json', 'csv']}),
        ("--excerpt-length", "excerpt_length", {}),
        ("--batch-size", "batch_size", {}),
        ("--out", "out", {}),
    ],
    "embed": [
        ("--checkpoint", "checkpoint", {}),
        ("--manifest", "manifest", {}),
        ("--excerpt-length", "excerpt_length", {}),
        ("--batch-size", "batch_size", {}),
        ("--out", "out", {}),
    ],
    "collapse-demo": [
        ("--manifest", "manifest", {}),
        ("--out-dir", "out_dir", {}),
        ("--n", "n", {}),
        ("--duration", "duration_s", {}),
        ("--epochs", "epochs", {}),
        ("--rp", "r_p", {}),
        ("--batch-size", "batch_size", {}),
        ("--lr", "learning_rate", {}),
        ("--seed", "seed", {}),
        ("--excerpt-length", "excerpt_length", {}),
    ],
    "sweep": [
        ("--mode", "mode", {'choices': ['pretrain', 'finetune']}),
        ("--pretrain-manifest", "pretrain_manifest", {}),
        ("--finetune-manifest", "finetune_manifest", {}),
        ("--eval-manifest", "eval_manifest", {}),
        ("--checkpoint", "checkpoint", {}),
        ("--out-dir", "out_dir", {}),
        ("--rp-grid", "rp_grid", {}),
        ("--rf-grid", "rf_grid", {}),
        ("--rf", "rf_default", {}),
        ("--pretrain-epochs", "pretrain_epochs", {}),
        ("--finetune-epochs", "finetune_epochs", {}),
        ("--batch-size", "batch_size", {}),
        ("--lr", "learning_rate", {}),
        ("--seed", "seed", {}),
        ("--excerpt-length", "excerpt_length", {}),
        ("--tolerance", "tolerance", {}),
    ],
    "oracle": [
        ("--manifest", "manifest", {}),
        ("--tolerance", "tolerance", {}),
        ("--format", "format", {'choices': ['json', 'csv']}),
        ("--out", "out", {}),
    ],
}


class _UsageParser(argparse.ArgumentParser):
    """参数错误抛出 UsageError，而不是直接退出进程"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _AddGlobalFlags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=argparse.SUPPRESS, help="key=value 配置文件")
    parser.add_argument("--log-level", dest="log_level", default=argparse.SUPPRESS,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    parser.add_argument("--json-logs", dest="json_logs", action="store_true", default=argparse.SUPPRESS)
    parser.add_argument("--workers", dest="workers", default=argparse.SUPPRESS,
                        help="工作线程数，0 表示按物理核心数")
    parser.add_argument("--deterministic", action="store_true", default=argparse.SUPPRESS,
                        help="BLAS 单线程，结果逐位可复现")
    parser.add_argument("--progress", action="store_true", default=argparse.SUPPRESS,
                        help="在标准错误显示进度条")


def BuildParser() -> argparse.ArgumentParser:
    """构造命令行解析器；未显式给出的参数不出现在结果中"""
    parser = _UsageParser(prog="tempo-equivariance", description="等变自监督节奏表示训练")
    subparsers = parser.add_subparsers(dest="command", parser_class=_UsageParser)
    subparsers.required = True
    for command, flags in _FLAG_TABLE.items():
        sub = subparsers.add_parser(command)
        _AddGlobalFlags(sub)
        for flag, dest, extra in flags:
            sub.add_argument(flag, dest=dest, default=argparse.SUPPRESS, **extra)
        if command == "pretrain":
            group = sub.add_mutually_exclusive_group()
            group.add_argument("--aug", dest="audio_augs_enabled", action="store_true", default=argparse.SUPPRESS)
            group.add_argument("--no-aug", dest="audio_augs_enabled", action="store_false", default=argparse.SUPPRESS)
            sub.add_argument("--symmetric", dest="symmetric", action="store_true", default=argparse.SUPPRESS)
        if command == "finetune":
            sub.add_argument("--no-redraw", dest="redraw_per_epoch", action="store_false",
                             default=argparse.SUPPRESS)
        if command == "evaluate":
            sub.add_argument("--allow-overlap", dest="allow_overlap", action="store_true",
                             default=argparse.SUPPRESS)
            sub.add_argument("--diagnostics", dest="diagnostics", action="store_true",
                             default=argparse.SUPPRESS)
    return parser

#endregion


#region 工具

def _Require(value: str, flag: str) -> str:
    if not value:
        raise UsageError(f"缺少必需参数 {flag}")
    return value


def _ParseGrid(text: str, name: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise UsageError(f"无法解析 {name}: {text!r}")
    if not values:
        raise UsageError(f"{name} 为空")
    return values


def _Echo(command: str, cfg) -> Dict[str, Any]:
    echo = RunConfigManager.Echo(command, cfg)
    echo['deterministic'] = IsDeterministic()
    return echo


def _FailurePath(cfg) -> Path:
    out = getattr(cfg, 'out', None)
    if out:
        return Path(f"{out}.failure.json")
    return Path(getattr(cfg, 'out_dir', '.')) / "failure.json"

#endregion


#region 命令

def CmdSynthData(cfg, echo: Dict[str, Any], showProgress: bool = False) -> int:
    try:
        weights = ParseSplits(cfg.splits)
    except SynthError as e:
        raise UsageError(str(e))
    if not 60.0 <= cfg.bpm_min <= cfg.bpm_max <= 180.0:
        raise UsageError(f"BPM 范围必须位于 [60, 180]: {cfg.bpm_min}..{cfg.bpm_max}")
    workers = ResourceMonitor().ResolveWorkerCount(cfg.workers)
    splits = MakeCorpus(cfg.out_dir, cfg.n, (cfg.bpm_min, cfg.bpm_max), weights, cfg.seed,
                        cfg.duration_s, workers=workers, showProgress=showProgress)
    WriteJson({'config': echo, 'counts': splits.Counts}, Path(cfg.out_dir) / "synth_config.json")
    return int(ExitCode.OK)


def CmdPretrain(cfg, echo: Dict[str, Any], showProgress: bool = False) -> int:
    manifest = ReadManifest(_Require(cfg.manifest, "--manifest"))
    logPath = cfg.log_out or f"{cfg.out}.log.jsonl"
    result = Pretrain(manifest, cfg, TempoNetwork(cfg.seed), cfg.out, logPath, echo, showProgress)
    logger.info("预训练完成: %s, 判定=%s", result.CheckpointPath, result.Metadata['verdict'])
    return int(ExitCode.OK)


def CmdFinetune(cfg, echo: Dict[str, Any], showProgress: bool = False) -> int:
    checkpoint = _Require(cfg.checkpoint, "--checkpoint")
    manifest = ReadManifest(_Require(cfg.manifest, "--manifest"))
    header = ReadHeader(checkpoint)
    network = TempoNetwork.Load(checkpoint, cfg.seed)
    logPath = cfg.log_out or f"{cfg.out}.log.jsonl"
    result = Finetune(network, manifest, cfg, header.Metadata, cfg.out, logPath, echo, showProgress)
    logger.info("微调完成: %s", result.CheckpointPath)
    return int(ExitCode.OK)


def CmdEvaluate(cfg, echo: Dict[str, Any], showProgress: bool = False) -> int:
    checkpoint = _Require(cfg.checkpoint, "--checkpoint")
    manifest = ReadManifest(_Require(cfg.manifest, "--manifest"))
    metadata = ReadHeader(checkpoint).Metadata
    network = TempoNetwork.Load(checkpoint)
    report = Evaluate(network, metadata, manifest, cfg, echo)
    WriteReport(report, cfg.out, cfg.format)
    if cfg.diagnostics:
        diagnostics = PseudoTempoDiagnostics(network, manifest, excerptLength=cfg.excerpt_length,
                                             workers=cfg.workers)
        WriteJson({'config': echo, 'diagnostics': diagnostics.ToJson()}, f"{cfg.out}.diagnostics.json")
    return int(ExitCode.OK)


def EmbedManifest(network: TempoNetwork, manifest, excerptLength: int, batchSize: int = 16,
                  workers: int = 0) -> List[Tuple[str, float, np.ndarray]]:
    """逐片段导出 (clip_id, z, h)；不可读片段跳过"""
    pool = ProducerPool(ResourceMonitor().ResolveWorkerCount(workers), window=2 * batchSize)
    rows: List[Tuple[str, float, np.ndarray]] = []
    pending: List[Tuple[str, np.ndarray]] = []

    def Flush():
        out = EmbedBatch(network, np.stack([p[1] for p in pending]))
        for k, (clipId, _) in enumerate(pending):
            rows.append((clipId, float(out['z'][k]), out['h'][k]))
        pending.clear()

    items = pool.Map(lambda entry: (entry.ClipId, PrepareEvalSpectrogram(entry, excerptLength)), manifest.Entries)
    for clipId, spec in items:
        if spec is None:
            continue
        pending.append((clipId, spec))
        if len(pending) == batchSize:
            Flush()
    if pending:
        Flush()
    return rows


def CmdEmbed(cfg, echo: Dict[str, Any], showProgress: bool = False) -> int:
    checkpoint = _Require(cfg.checkpoint, "--checkpoint")
    manifest = ReadManifest(_Require(cfg.manifest, "--manifest"))
    network = TempoNetwork.Load(checkpoint)
    rows = EmbedManifest(network, manifest, cfg.excerpt_length, cfg.batch_size, cfg.workers)
    skipped = len(manifest.Entries) - len(rows)
    if skipped:
        logger.warning("嵌入导出跳过了 %d 个不可读片段", skipped)
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, 'w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['clip_id', 'z'] + [f'h_{k}' for k in range(EMBEDDING_DIM)])
        for clipId, z, h in rows:
            writer.writerow([clipId, repr(z)] + [repr(float(v)) for v in h])
    WriteJson({'config': echo, 'rows': len(rows), 'skipped': skipped}, f"{cfg.out}.config.json")
    logger.info("嵌入已写出: %s (%d 行)", out, len(rows))
    return int(ExitCode.OK)


def CmdCollapseDemo(cfg, echo: Dict[str, Any], showProgress: bool = False) -> int:
    outDir = Path(cfg.out_dir)
    if cfg.manifest:
        manifestPath = Path(cfg.manifest)
    else:
        splits = MakeCorpus(outDir / "corpus", cfg.n, splitWeights=(1.0, 0.0, 0.0), seed=cfg.seed,
                            durationSeconds=cfg.duration_s,
                            workers=ResourceMonitor().ResolveWorkerCount(cfg.workers),
                            showProgress=showProgress)
        manifestPath = splits.PretrainManifest
    manifest = ReadManifest(manifestPath)

    variants: Dict[str, Dict[str, Any]] = {}
    for variant in LossVariant:
        sslCfg = SslConfig(r_p=cfg.r_p, batch_size=cfg.batch_size, epochs=cfg.epochs,
                           learning_rate=cfg.learning_rate, loss_variant=variant.value, seed=cfg.seed,
                           excerpt_length=cfg.excerpt_length, workers=cfg.workers)
        logger.info("坍缩演示: 损失变体 %s", variant.value)
        result = Pretrain(manifest, sslCfg, TempoNetwork(cfg.seed),
                          logPath=outDir / f"{variant.value}.log.jsonl",
                          configEcho=dict(echo, loss_variant=variant.value), showProgress=showProgress)
        monitor = result.Monitor
        variants[variant.value] = {
            'verdict': monitor.Verdict().value,
            'z_abs_curve': monitor.ZAbsCurve,
            'loss_curve': [r.loss_mean for r in monitor.Records],
            'guard_hits': monitor.TotalGuardHits,
        }

    WriteJson({'config': echo, 'variants': variants}, outDir / "collapse_report.json")
    with open(outDir / "collapse_verdicts.csv", 'w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['loss_variant', 'verdict', 'final_z_abs_mean', 'final_loss', 'guard_hits'])
        for name, data in variants.items():
            finalZ = data['z_abs_curve'][-1] if data['z_abs_curve'] else float('nan')
            finalLoss = data['loss_curve'][-1] if data['loss_curve'] else float('nan')
            writer.writerow([name, data['verdict'], repr(finalZ), repr(finalLoss), data['guard_hits']])
    for name, data in variants.items():
        logger.info("%-13s %s guard_hits=%d", name, data['verdict'], data['guard_hits'])
    return int(ExitCode.OK)


def _FinetuneAndEvaluate(network: TempoNetwork, parentMetadata: Dict[str, Any], rF: float, cfg,
                         conditionDir: Path, echo: Dict[str, Any], showProgress: bool) -> Dict[str, Any]:
    ftCfg = FinetuneConfig(r_f=rF, epochs=cfg.finetune_epochs, batch_size=cfg.batch_size,
                           learning_rate=cfg.learning_rate, seed=cfg.seed,
                           excerpt_length=cfg.excerpt_length, workers=cfg.workers)
    result = Finetune(network, ReadManifest(cfg.finetune_manifest), ftCfg, parentMetadata,
                      conditionDir / "finetune.ckpt", conditionDir / "finetune.log.jsonl",
                      dict(echo, r_f=rF), showProgress)
    evalCfg = EvaluateConfig(tolerance=cfg.tolerance, excerpt_length=cfg.excerpt_length,
                             batch_size=cfg.batch_size, workers=cfg.workers)
    report = Evaluate(result.Network, result.Metadata, ReadManifest(cfg.eval_manifest), evalCfg,
                      dict(echo, r_f=rF))
    WriteReport(report, conditionDir / "report.json")
    return {'acc1': report.acc1, 'acc2': report.acc2, 'n_items': report.n_items}


def CmdSweep(cfg, echo: Dict[str, Any], showProgress: bool = False) -> int:
    outDir = Path(cfg.out_dir)
    _Require(cfg.finetune_manifest, "--finetune-manifest")
    _Require(cfg.eval_manifest, "--eval-manifest")
    rows: List[Dict[str, Any]] = []
    if cfg.mode == 'pretrain':
        pretrainManifest = ReadManifest(_Require(cfg.pretrain_manifest, "--pretrain-manifest"))
        for rP in _ParseGrid(cfg.rp_grid, "--rp-grid"):
            for aug in (True, False):
                condition = f"rp{rP:g}_{'aug' if aug else 'noAug'}"
                conditionDir = outDir / condition
                sslCfg = SslConfig(r_p=rP, batch_size=cfg.batch_size, epochs=cfg.pretrain_epochs,
                                   learning_rate=cfg.learning_rate, audio_augs_enabled=aug, seed=cfg.seed,
                                   excerpt_length=cfg.excerpt_length, workers=cfg.workers)
                conditionEcho = dict(echo, r_p=rP, audio_augs_enabled=aug)
                pretrained = Pretrain(pretrainManifest, sslCfg, TempoNetwork(cfg.seed),
                                      conditionDir / "pretrain.ckpt", conditionDir / "pretrain.log.jsonl",
                                      conditionEcho, showProgress)
                scores = _FinetuneAndEvaluate(pretrained.Network, pretrained.Metadata, cfg.rf_default,
                                              cfg, conditionDir, conditionEcho, showProgress)
                rows.append(dict(condition=condition, r_p=rP, aug=int(aug), r_f=cfg.rf_default, **scores))
                logger.info("sweep %s: acc1=%.4f acc2=%.4f", condition, scores['acc1'], scores['acc2'])
    else:
        checkpoint = _Require(cfg.checkpoint, "--checkpoint")
        metadata = ReadHeader(checkpoint).Metadata
        pretrainConfig = metadata.get('config') or {}
        for rF in _ParseGrid(cfg.rf_grid, "--rf-grid"):
            condition = f"rf{rF:g}"
            scores = _FinetuneAndEvaluate(TempoNetwork.Load(checkpoint, cfg.seed), metadata, rF, cfg,
                                          outDir / condition, echo, showProgress)
            rows.append(dict(condition=condition, r_p=pretrainConfig.get('r_p', ''),
                             aug=int(bool(pretrainConfig.get('audio_augs_enabled', False))), r_f=rF, **scores))
            logger.info("sweep %s: acc1=%.4f acc2=%.4f", condition, scores['acc1'], scores['acc2'])

    outDir.mkdir(parents=True, exist_ok=True)
    with open(outDir / "sweep_summary.csv", 'w', encoding='utf-8', newline='') as handle:
        writer = csv.DictWriter(handle, fieldnames=['condition', 'r_p', 'aug', 'r_f', 'acc1', 'acc2', 'n_items'],
                                lineterminator='\n')
        writer.writeheader()
        writer.writerows(rows)
    WriteJson({'config': echo, 'conditions': rows}, outDir / "sweep_summary.json")
    return int(ExitCode.OK)


def CmdOracle(cfg, echo: Dict[str, Any], showProgress: bool = False) -> int:
    manifest = ReadManifest(_Require(cfg.manifest, "--manifest"))
    report = EvaluateOracle(manifest, cfg.tolerance, cfg.workers, echo)
    WriteReport(report, cfg.out, cfg.format)
    return int(ExitCode.OK)


COMMANDS: Dict[str, Callable[..., int]] = {
    "synth-data": CmdSynthData,
    "pretrain": CmdPretrain,
    "finetune": CmdFinetune,
    "evaluate": CmdEvaluate,
    "embed": CmdEmbed,
    "collapse-demo": CmdCollapseDemo,
    "sweep": CmdSweep,
    "oracle": CmdOracle,
}

#endregion


#region 入口

def Main(argv: Optional[Sequence[str]] = None, manager: Optional[RunConfigManager] = None) -> int:
    """解析参数并运行一个命令，返回退出码"""
    manager = manager or run_config_manager
    cfg = None
    try:
        args = vars(BuildParser().parse_args(argv))
        ConfigureLogging(args.get('log_level', 'INFO'), bool(args.get('json_logs', False)))
        if args.get('deterministic'):
            EnableDeterministicMode()
        command = args['command']
        fileValues = manager.LoadConfigFile(args['config']) if 'config' in args else {}
        flagValues = {k: v for k, v in args.items() if k not in GLOBAL_DESTS}
        cfg = manager.Resolve(command, fileValues, flagValues)
        return COMMANDS[command](cfg, _Echo(command, cfg), bool(args.get('progress', False)))
    except UsageError as e:
        logger.error("%s", e)
        return int(ExitCode.USAGE)
    except NumericalFailure as e:
        logger.error("数值失败: %s", e)
        if cfg is not None:
            path = WriteJson(e.Diagnostic(), _FailurePath(cfg))
            logger.error("诊断已写出: %s", path)
        return int(ExitCode.NUMERICAL)
    except NonFiniteError as e:
        logger.error("数值失败: %s", e)
        return int(ExitCode.NUMERICAL)
    except DATA_ERRORS as e:
        logger.error("数据错误: %s", e)
        return int(ExitCode.DATA)

#endregion
