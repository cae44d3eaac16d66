# -*- coding: utf-8 -*-
"""
输出头
投影头 g(·) 产生伪节奏 z；分类头产生 300 个 BPM 类别上的分布
"""

from typing import List

import numpy as np

from src.numerics import functional as F
from src.numerics.module import Module
from src.numerics.tensor import AsTensor, Tensor

from .interfaces import EMBEDDING_DIM, N_TEMPO_CLASSES, LayerSpec, ModelError
from .layers import Linear


def _CheckEmbedding(h: Tensor) -> Tensor:
    h = AsTensor(h)
    if h.Ndim != 2 or h.Shape[1] != EMBEDDING_DIM:
        raise ModelError(f"嵌入形状必须为 [batch, {EMBEDDING_DIM}]，当前 {h.Shape}")
    return h


class ProjectionHead(Module):
    """线性投影 16 → 1，严格仿射"""

    def __init__(self, rng: np.random.Generator):
        super().__init__()
        self.Linear = self.RegisterModule("linear", Linear(EMBEDDING_DIM, 1, rng))

    def Specs(self) -> List[LayerSpec]:
        return [self.Linear.Spec()]

    def Forward(self, h) -> Tensor:
        return self.Linear(_CheckEmbedding(h))


class TempoClassifierHead(Module):
    """线性映射 16 → 300，再做 softmax；类别 k 表示 k BPM"""

    def __init__(self, rng: np.random.Generator):
        super().__init__()
        self.Linear = self.RegisterModule("linear", Linear(EMBEDDING_DIM, N_TEMPO_CLASSES, rng))

    def Specs(self) -> List[LayerSpec]:
        return [self.Linear.Spec(), LayerSpec.Of("softmax", classes=N_TEMPO_CLASSES)]

    def Logits(self, h) -> Tensor:
        return self.Linear(_CheckEmbedding(h))

    def Forward(self, h) -> Tensor:
        return F.Softmax(self.Logits(h), axis=-1)
