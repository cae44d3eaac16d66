# -*- coding: utf-8 -*-
"""
模型模块

提供节奏表示网络：
- TCN 编码器 f(·)，输出 16 维嵌入
- 线性投影头 g(·)，输出伪节奏 z
- 300 类节奏分类头
"""

# 常量与异常
from .interfaces import (
    LayerSpec, ModelError, InputTooShortError,
    EMBEDDING_DIM, MIN_FRAMES, N_TEMPO_CLASSES, N_TCN_LAYERS, MAX_PARAMETERS
)

# 层与网络
from .layers import Linear, Conv1dLayer, Conv2dLayer, BatchNormLayer, HeUniform
from .encoder import TcnEncoder, Fingerprint
from .heads import ProjectionHead, TempoClassifierHead
from .network import (
    TempoNetwork, ParameterCount, LogParameterCounts, StackSpectrograms,
    Encode, Project, Classify, FreezeEncoder, DecodeBpm, EmbedBatch
)

__all__ = [
    'LayerSpec', 'ModelError', 'InputTooShortError',
    'EMBEDDING_DIM', 'MIN_FRAMES', 'N_TEMPO_CLASSES', 'N_TCN_LAYERS', 'MAX_PARAMETERS',
    'Linear', 'Conv1dLayer', 'Conv2dLayer', 'BatchNormLayer', 'HeUniform',
    'TcnEncoder', 'Fingerprint', 'ProjectionHead', 'TempoClassifierHead',
    'TempoNetwork', 'ParameterCount', 'LogParameterCounts', 'StackSpectrograms',
    'Encode', 'Project', 'Classify', 'FreezeEncoder', 'DecodeBpm', 'EmbedBatch'
]
