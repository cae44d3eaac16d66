# -*- coding: utf-8 -*-
"""
基础层
线性层、卷积层与批归一化层，权重 He 均匀初始化、偏置置零
"""

from typing import Optional, Tuple

import numpy as np

from src.numerics import functional as F
from src.numerics.module import Module
from src.numerics.tensor import AsTensor, Tensor

from .interfaces import BN_EPSILON, BN_MOMENTUM, LayerSpec


def HeUniform(rng: np.random.Generator, shape: Tuple[int, ...], fanIn: int) -> np.ndarray:
    limit = np.sqrt(6.0 / fanIn)
    return rng.uniform(-limit, limit, size=shape).astype(np.float32)


class Linear(Module):
    """仿射映射 y = x @ W + b，W 形状 [in, out]"""

    def __init__(self, inFeatures: int, outFeatures: int, rng: np.random.Generator):
        super().__init__()
        self.InFeatures = inFeatures
        self.OutFeatures = outFeatures
        self.Weight = self.RegisterParameter("weight", HeUniform(rng, (inFeatures, outFeatures), inFeatures))
        self.Bias = self.RegisterParameter("bias", np.zeros(outFeatures, dtype=np.float32))

    def Spec(self) -> LayerSpec:
        return LayerSpec.Of("linear", inFeatures=self.InFeatures, outFeatures=self.OutFeatures)

    def Forward(self, x) -> Tensor:
        return AsTensor(x) @ self.Weight + self.Bias


class Conv2dLayer(Module):
    """二维卷积层，输入布局 [batch, channel, time, mel]"""

    def __init__(self, inChannels: int, outChannels: int, kernel: Tuple[int, int],
                 padding: Tuple[int, int], rng: np.random.Generator):
        super().__init__()
        self.Kernel = tuple(kernel)
        self.Padding = tuple(padding)
        self.InChannels = inChannels
        self.OutChannels = outChannels
        fanIn = inChannels * kernel[0] * kernel[1]
        self.Weight = self.RegisterParameter(
            "weight", HeUniform(rng, (outChannels, inChannels) + self.Kernel, fanIn))
        self.Bias = self.RegisterParameter("bias", np.zeros(outChannels, dtype=np.float32))

    def Spec(self) -> LayerSpec:
        return LayerSpec.Of("conv2d", inChannels=self.InChannels, outChannels=self.OutChannels,
                            kernel=self.Kernel, padding=self.Padding)

    def Forward(self, x) -> Tensor:
        return F.Conv2d(x, self.Weight, self.Bias, padding=self.Padding)


class Conv1dLayer(Module):
    """一维空洞卷积层，"same" 填充"""

    def __init__(self, channels: int, kernel: int, dilation: int, rng: np.random.Generator):
        super().__init__()
        self.Channels = channels
        self.KernelSize = kernel
        self.Dilation = dilation
        self.Weight = self.RegisterParameter(
            "weight", HeUniform(rng, (channels, channels, kernel), channels * kernel))
        self.Bias = self.RegisterParameter("bias", np.zeros(channels, dtype=np.float32))

    def Spec(self) -> LayerSpec:
        return LayerSpec.Of("conv1d", channels=self.Channels, kernel=self.KernelSize, dilation=self.Dilation)

    def Forward(self, x) -> Tensor:
        return F.Conv1d(x, self.Weight, self.Bias, dilation=self.Dilation, padding="same")


class BatchNormLayer(Module):
    """批归一化层，运行统计作为缓冲保存"""

    def __init__(self, features: int, axis: int, momentum: float = BN_MOMENTUM, eps: float = BN_EPSILON):
        super().__init__()
        self.Features = features
        self.Axis = axis
        self.Momentum = momentum
        self.Eps = eps
        self.Gamma = self.RegisterParameter("gamma", np.ones(features, dtype=np.float32))
        self.Beta = self.RegisterParameter("beta", np.zeros(features, dtype=np.float32))
        self.RunningMean = self.RegisterBuffer("running_mean", np.zeros(features))
        self.RunningVar = self.RegisterBuffer("running_var", np.ones(features))

    def Spec(self) -> LayerSpec:
        return LayerSpec.Of("batchnorm", features=self.Features, axis=self.Axis,
                            momentum=self.Momentum, eps=self.Eps)

    def Forward(self, x) -> Tensor:
        return F.BatchNorm(x, self.Gamma, self.Beta, self.RunningMean, self.RunningVar,
                           training=self.IsTraining, momentum=self.Momentum, eps=self.Eps, axis=self.Axis)
