# -*- coding: utf-8 -*-
"""
TCN 编码器
输入批归一化 → 3 个卷积块 → 8 个空洞 TCN 层 → 时间全局平均，输出 16 维嵌入 h
"""

import hashlib
import json
import logging
from typing import List, Optional

import numpy as np

from src.numerics import functional as F
from src.numerics.module import Module
from src.numerics.tensor import AsTensor, Tensor

from .interfaces import (
    InputTooShortError, LayerSpec, ModelError,
    DROPOUT_RATE, EMBEDDING_DIM, MIN_FRAMES, N_FILTERS, N_MEL_BINS, N_TCN_LAYERS, TCN_KERNEL
)
from .layers import BatchNormLayer, Conv1dLayer, Conv2dLayer


logger = logging.getLogger(__name__)


class _ConvBlock(Module):
    """卷积 → ELU → (梅尔轴最大池化) → 随机失活"""

    def __init__(self, inChannels: int, kernel, padding, pool: int, rng: np.random.Generator):
        super().__init__()
        self.Pool = pool
        self.Conv = self.RegisterModule("conv", Conv2dLayer(inChannels, N_FILTERS, kernel, padding, rng))

    def Specs(self) -> List[LayerSpec]:
        specs = [self.Conv.Spec(), LayerSpec.Of("elu")]
        if self.Pool > 1:
            specs.append(LayerSpec.Of("maxpool", axis="mel", size=self.Pool))
        specs.append(LayerSpec.Of("dropout", rate=DROPOUT_RATE))
        return specs

    def Forward(self, x, rng: np.random.Generator) -> Tensor:
        y = F.Elu(self.Conv(x))
        if self.Pool > 1:
            y = F.MaxPool1dAlong(y, axis=3, size=self.Pool)
        return F.Dropout(y, DROPOUT_RATE, rng, self.IsTraining)


class _TcnLayer(Module):
    """空洞卷积 → ELU → 空间失活 → 残差相加"""

    def __init__(self, dilation: int, rng: np.random.Generator):
        super().__init__()
        self.Conv = self.RegisterModule("conv", Conv1dLayer(N_FILTERS, TCN_KERNEL, dilation, rng))

    def Specs(self) -> List[LayerSpec]:
        return [self.Conv.Spec(), LayerSpec.Of("elu"), LayerSpec.Of("spatial_dropout", rate=DROPOUT_RATE),
                LayerSpec.Of("residual")]

    def Forward(self, x, rng: np.random.Generator) -> Tensor:
        y = F.Elu(self.Conv(x))
        y = F.Dropout(y, DROPOUT_RATE, rng, self.IsTraining, sharedAxes=(2,))
        return x + y


class TcnEncoder(Module):
    """TCN 编码器 f(·)

    输入 [batch, frames, 81]，frames ≥ 256；输出 [batch, 16]。
    nTcnLayers 小于 8 时为截断变体，其指纹不同。
    """

    def __init__(self, seed: int = 0, nTcnLayers: int = N_TCN_LAYERS):
        super().__init__()
        if not 1 <= nTcnLayers <= N_TCN_LAYERS:
            raise ModelError(f"TCN 层数必须位于 [1, {N_TCN_LAYERS}]: {nTcnLayers}")
        rng = np.random.default_rng(seed)
        self.NumTcnLayers = nTcnLayers
        self.InputNorm = self.RegisterModule("input_norm", BatchNormLayer(N_MEL_BINS, axis=2))
        # 梅尔轴: 81 -3x3-> 79 -pool3-> 26 -3x3-> 24 -pool3-> 8 -1x8-> 1
        self.Blocks = [
            self.RegisterModule("block1", _ConvBlock(1, (3, 3), (1, 0), 3, rng)),
            self.RegisterModule("block2", _ConvBlock(N_FILTERS, (3, 3), (1, 0), 3, rng)),
            self.RegisterModule("block3", _ConvBlock(N_FILTERS, (1, 8), (0, 0), 1, rng)),
        ]
        self.TcnLayers = [
            self.RegisterModule(f"tcn{k}", _TcnLayer(2 ** k, rng)) for k in range(nTcnLayers)
        ]
        self._dropoutRng = np.random.default_rng(seed + 1)

    #region 架构描述

    def LayerSpecs(self) -> List[LayerSpec]:
        specs = [self.InputNorm.Spec()]
        for block in self.Blocks:
            specs.extend(block.Specs())
        for layer in self.TcnLayers:
            specs.extend(layer.Specs())
        specs.append(LayerSpec.Of("global_average_pool", axis="time", outFeatures=EMBEDDING_DIM))
        return specs

    @property
    def ReceptiveField(self) -> int:
        """时间轴感受野（帧）"""
        convBlocks = 2 + 2
        tcn = sum((TCN_KERNEL - 1) * 2 ** k for k in range(self.NumTcnLayers))
        return 1 + convBlocks + tcn

    def SetDropoutRng(self, rng: np.random.Generator) -> None:
        """设置随机失活使用的随机数发生器"""
        self._dropoutRng = rng

    #endregion

    #region 前向

    def EncodeSequence(self, spec) -> Tensor:
        """池化前的特征序列 [batch, 16, frames]"""
        x = AsTensor(spec)
        if x.Ndim != 3 or x.Shape[2] != N_MEL_BINS:
            raise ModelError(f"输入形状必须为 [batch, frames, {N_MEL_BINS}]，当前 {x.Shape}")
        if x.Shape[1] < MIN_FRAMES:
            raise InputTooShortError(x.Shape[1])
        rng = self._dropoutRng
        y = self.InputNorm(x)
        batch, frames, mels = y.Shape
        y = y.Reshape(batch, 1, frames, mels)
        for block in self.Blocks:
            y = block(y, rng)
        y = y.Reshape(batch, N_FILTERS, frames)
        for layer in self.TcnLayers:
            y = layer(y, rng)
        return y

    def Forward(self, spec) -> Tensor:
        return self.EncodeSequence(spec).Mean(axis=2)

    #endregion


def Fingerprint(specs: List[LayerSpec]) -> str:
    """层规格列表 JSON 的 SHA-256"""
    payload = json.dumps([spec.ToJson() for spec in specs], sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()
