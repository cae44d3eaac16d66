# -*- coding: utf-8 -*-
"""
完整网络
编码器、投影头与分类头的组合，以及 encode / project / classify / freeze 操作
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from src.audio.interfaces import LogMelSpectrogram
from src.numerics.interfaces import ShapeMismatchError
from src.numerics.module import Module
from src.numerics.tensor import AsTensor, NoGrad, Tensor
from src.persist.checkpoint import LoadCheckpoint, SaveCheckpoint
from src.persist.interfaces import Checkpoint, CheckpointCorruptError, FingerprintMismatchError

from .encoder import Fingerprint, TcnEncoder
from .heads import ProjectionHead, TempoClassifierHead
from .interfaces import MAX_PARAMETERS, N_TCN_LAYERS, LayerSpec, ModelError


logger = logging.getLogger(__name__)


class TempoNetwork(Module):
    """编码器 f、投影头 g 与分类头

    张量名前缀依次为 encoder. / projection. / classifier.
    """

    def __init__(self, seed: int = 0, nTcnLayers: int = N_TCN_LAYERS):
        super().__init__()
        rng = np.random.default_rng([seed, 1])
        self.Encoder = self.RegisterModule("encoder", TcnEncoder(seed, nTcnLayers))
        self.Projection = self.RegisterModule("projection", ProjectionHead(rng))
        self.Classifier = self.RegisterModule("classifier", TempoClassifierHead(rng))
        count = ParameterCount(self)
        if count >= MAX_PARAMETERS:
            raise ModelError(f"参数量 {count} 超出上限 {MAX_PARAMETERS}")

    def LayerSpecs(self) -> List[LayerSpec]:
        specs = list(self.Encoder.LayerSpecs())
        specs.append(LayerSpec.Of("head", name="projection"))
        specs.extend(self.Projection.Specs())
        specs.append(LayerSpec.Of("head", name="classifier"))
        specs.extend(self.Classifier.Specs())
        return specs

    @property
    def Fingerprint(self) -> str:
        return Fingerprint(self.LayerSpecs())

    def Forward(self, spec) -> Tensor:
        return self.Projection(self.Encoder(spec))

    #region 检查点

    def ToCheckpoint(self, metadata: Optional[Dict[str, Any]] = None) -> Checkpoint:
        return Checkpoint(self.NamedTensors(), self.Fingerprint, dict(metadata or {}))

    def LoadFromCheckpoint(self, checkpoint: Checkpoint) -> 'TempoNetwork':
        if checkpoint.Fingerprint != self.Fingerprint:
            raise FingerprintMismatchError(
                f"检查点架构指纹 {checkpoint.Fingerprint[:12]} 与当前网络 {self.Fingerprint[:12]} 不一致"
            )
        try:
            self.LoadNamedTensors(checkpoint.Tensors)
        except KeyError as e:
            raise CheckpointCorruptError(f"检查点不完整，{e.args[0]}")
        except ShapeMismatchError as e:
            raise CheckpointCorruptError(f"检查点张量形状不符: {e}")
        return self

    def Save(self, path: Union[str, Path], metadata: Optional[Dict[str, Any]] = None) -> Path:
        return SaveCheckpoint(self.ToCheckpoint(metadata), path)

    @staticmethod
    def Load(path: Union[str, Path], seed: int = 0) -> 'TempoNetwork':
        network = TempoNetwork(seed)
        network.LoadFromCheckpoint(LoadCheckpoint(path, expectedFingerprint=network.Fingerprint))
        return network

    #endregion


#region 操作

def ParameterCount(module: Module) -> int:
    """可训练参数总数"""
    return module.ParameterCount()


def LogParameterCounts(network: TempoNetwork) -> Dict[str, int]:
    """按子模块记录精确参数量"""
    counts = {
        'encoder': ParameterCount(network.Encoder),
        'projection': ParameterCount(network.Projection),
        'classifier': ParameterCount(network.Classifier),
    }
    counts['total'] = sum(counts.values())
    logger.info("参数量: encoder=%d projection=%d classifier=%d total=%d",
                counts['encoder'], counts['projection'], counts['classifier'], counts['total'])
    return counts


def StackSpectrograms(specs: List[LogMelSpectrogram]) -> np.ndarray:
    """把等长对数梅尔谱堆叠为 [batch, frames, 81]"""
    if not specs:
        raise ModelError("批为空")
    frames = {spec.NumFrames for spec in specs}
    if len(frames) != 1:
        raise ModelError(f"批内帧数不一致: {sorted(frames)}")
    return np.stack([spec.Values for spec in specs]).astype(np.float32)


def Encode(encoder: TcnEncoder, batch) -> Tensor:
    """[batch, frames, 81] → [batch, 16]"""
    if isinstance(batch, list):
        batch = StackSpectrograms(batch)
    return encoder(batch)


def Project(head: ProjectionHead, h) -> Tensor:
    """[batch, 16] → [batch, 1]"""
    return head(h)


def Classify(head: TempoClassifierHead, h) -> Tensor:
    """[batch, 16] → [batch, 300] 概率"""
    return head(h)


def FreezeEncoder(encoder: TcnEncoder) -> TcnEncoder:
    """冻结编码器：不再接收梯度，批归一化只使用运行统计"""
    encoder.Freeze()
    encoder.Eval()
    return encoder


def DecodeBpm(probabilities) -> np.ndarray:
    """取 1..299 号类别中概率最大的类别作为 BPM"""
    values = AsTensor(probabilities).Data
    return (np.argmax(values[:, 1:], axis=1) + 1).astype(np.float64)


def EmbedBatch(network: TempoNetwork, batch) -> Dict[str, np.ndarray]:
    """切换到评估模式后计算 h 与 z，不记录计算图"""
    network.Eval()
    with NoGrad():
        h = Encode(network.Encoder, batch)
        z = Project(network.Projection, h)
    return {'h': h.Numpy(), 'z': z.Numpy()[:, 0]}

#endregion
