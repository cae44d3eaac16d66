# -*- coding: utf-8 -*-
"""
网络算子
卷积、池化、批归一化、激活函数与守护除法
"""

from typing import Optional, Tuple, Union

import numpy as np

from .interfaces import GetWorkingDtype, NonFiniteError, ShapeMismatchError
from .tensor import AsTensor, Tensor


IntPair = Union[int, Tuple[int, int]]


def _Pair(value: IntPair) -> Tuple[int, int]:
    if isinstance(value, int):
        return value, value
    return int(value[0]), int(value[1])


def _OutputLength(length: int, kernel: int, dilation: int, stride: int, padLeft: int, padRight: int) -> int:
    span = dilation * (kernel - 1) + 1
    return (length + padLeft + padRight - span) // stride + 1


#region 一维卷积

def Conv1d(x, weight, bias=None, dilation: int = 1, stride: int = 1,
           padding: Union[str, int] = "same") -> Tensor:
    """一维（空洞）卷积

    Args:
        x: [batch, inChannels, length]
        weight: [outChannels, inChannels, kernel]
        bias: [outChannels] 或 None
        padding: "same"（两侧各 (kernel-1)*dilation/2，要求 stride=1）或整数

    Returns:
        [batch, outChannels, outLength]
    """
    x, weight = AsTensor(x), AsTensor(weight)
    if x.Ndim != 3 or weight.Ndim != 3 or x.Shape[1] != weight.Shape[1]:
        raise ShapeMismatchError("conv1d", x.Shape, weight.Shape)
    kernel = weight.Shape[2]
    if padding == "same":
        if stride != 1 or ((kernel - 1) * dilation) % 2 != 0:
            raise ShapeMismatchError("conv1d", x.Shape, weight.Shape, "same 填充要求 stride=1 且总填充为偶数")
        pad = (kernel - 1) * dilation // 2
    else:
        pad = int(padding)
    batch, inChannels, length = x.Shape
    outLength = _OutputLength(length, kernel, dilation, stride, pad, pad)
    if outLength <= 0:
        raise ShapeMismatchError("conv1d", x.Shape, weight.Shape, "输入长度不足")

    padded = np.pad(x.Data, ((0, 0), (0, 0), (pad, pad)))
    wData = weight.Data
    out = np.zeros((batch, weight.Shape[0], outLength), dtype=GetWorkingDtype())
    stop = stride * (outLength - 1) + 1
    for k in range(kernel):
        start = k * dilation
        window = padded[:, :, start:start + stop:stride]
        out += np.matmul(wData[:, :, k], window)
    parents = [x, weight]
    if bias is not None:
        bias = AsTensor(bias)
        out += bias.Data[None, :, None]
        parents.append(bias)

    def backward(g):
        gradPadded = np.zeros_like(padded)
        gradW = np.zeros_like(wData)
        for k in range(kernel):
            start = k * dilation
            window = padded[:, :, start:start + stop:stride]
            gradW[:, :, k] = np.tensordot(g, window, axes=([0, 2], [0, 2]))
            gradPadded[:, :, start:start + stop:stride] += np.matmul(wData[:, :, k].T, g)
        gradX = gradPadded[:, :, pad:pad + length]
        grads = [gradX, gradW]
        if bias is not None:
            grads.append(g.sum(axis=(0, 2)))
        return grads

    return Tensor._Make(out, parents, backward, "conv1d")

#endregion


#region 二维卷积

def Conv2d(x, weight, bias=None, padding: IntPair = 0, stride: IntPair = 1,
           dilation: IntPair = 1) -> Tensor:
    """二维卷积

    Args:
        x: [batch, inChannels, height, width]
        weight: [outChannels, inChannels, kernelH, kernelW]
        padding: 每个轴两侧的零填充

    Returns:
        [batch, outChannels, outH, outW]
    """
    x, weight = AsTensor(x), AsTensor(weight)
    if x.Ndim != 4 or weight.Ndim != 4 or x.Shape[1] != weight.Shape[1]:
        raise ShapeMismatchError("conv2d", x.Shape, weight.Shape)
    padH, padW = _Pair(padding)
    strideH, strideW = _Pair(stride)
    dilH, dilW = _Pair(dilation)
    batch, inChannels, height, width = x.Shape
    outChannels, _, kernelH, kernelW = weight.Shape
    outH = _OutputLength(height, kernelH, dilH, strideH, padH, padH)
    outW = _OutputLength(width, kernelW, dilW, strideW, padW, padW)
    if outH <= 0 or outW <= 0:
        raise ShapeMismatchError("conv2d", x.Shape, weight.Shape, "输入尺寸不足")

    padded = np.pad(x.Data, ((0, 0), (0, 0), (padH, padH), (padW, padW)))
    wData = weight.Data
    stopH = strideH * (outH - 1) + 1
    stopW = strideW * (outW - 1) + 1

    def Window(kh: int, kw: int):
        h0, w0 = kh * dilH, kw * dilW
        return (slice(None), slice(None),
                slice(h0, h0 + stopH, strideH), slice(w0, w0 + stopW, strideW))

    # 以 [batch, outH, outW, outChannels] 布局累加
    acc = np.zeros((batch, outH, outW, outChannels), dtype=GetWorkingDtype())
    for kh in range(kernelH):
        for kw in range(kernelW):
            acc += np.tensordot(padded[Window(kh, kw)], wData[:, :, kh, kw], axes=([1], [1]))
    out = np.ascontiguousarray(acc.transpose(0, 3, 1, 2))
    parents = [x, weight]
    if bias is not None:
        bias = AsTensor(bias)
        out += bias.Data[None, :, None, None]
        parents.append(bias)

    def backward(g):
        gradPadded = np.zeros_like(padded)
        gradW = np.zeros_like(wData)
        for kh in range(kernelH):
            for kw in range(kernelW):
                index = Window(kh, kw)
                gradW[:, :, kh, kw] = np.tensordot(g, padded[index], axes=([0, 2, 3], [0, 2, 3]))
                gradWindow = np.tensordot(g, wData[:, :, kh, kw], axes=([1], [0]))
                gradPadded[index] += gradWindow.transpose(0, 3, 1, 2)
        gradX = gradPadded[:, :, padH:padH + height, padW:padW + width]
        grads = [gradX, gradW]
        if bias is not None:
            grads.append(g.sum(axis=(0, 2, 3)))
        return grads

    return Tensor._Make(out, parents, backward, "conv2d")

#endregion


#region 池化

def MaxPool1dAlong(x, axis: int, size: int) -> Tensor:
    """沿单个轴做不重叠最大池化，尾部不足一个窗口的元素丢弃"""
    x = AsTensor(x)
    ax = axis % x.Ndim
    length = x.Shape[ax]
    outLength = length // size
    if outLength <= 0:
        raise ShapeMismatchError("maxpool", x.Shape, (size,), f"axis={axis} 长度不足")
    moved = np.moveaxis(x.Data, ax, -1)[..., :outLength * size]
    blocks = moved.reshape(moved.shape[:-1] + (outLength, size))
    choice = blocks.argmax(axis=-1)
    pooled = np.take_along_axis(blocks, choice[..., None], axis=-1)[..., 0]
    out = np.moveaxis(pooled, -1, ax)
    movedShape = moved.shape[:-1] + (length,)

    def backward(g):
        gMoved = np.moveaxis(g, ax, -1)
        gradBlocks = np.zeros(blocks.shape, dtype=GetWorkingDtype())
        np.put_along_axis(gradBlocks, choice[..., None], gMoved[..., None], axis=-1)
        gradMoved = np.zeros(movedShape, dtype=GetWorkingDtype())
        gradMoved[..., :outLength * size] = gradBlocks.reshape(gradBlocks.shape[:-2] + (outLength * size,))
        return (np.moveaxis(gradMoved, -1, ax),)

    return Tensor._Make(np.ascontiguousarray(out), (x,), backward, "maxpool")

#endregion


#region 批归一化

def BatchNorm(x, gamma, beta, runningMean: np.ndarray, runningVar: np.ndarray,
              training: bool, momentum: float = 0.9, eps: float = 1e-5, axis: int = 1) -> Tensor:
    """批归一化

    特征轴为 axis，其余轴参与统计。训练模式下使用批统计并原地更新
    running = momentum * running + (1 - momentum) * batch；评估模式只用运行统计。
    """
    x, gamma, beta = AsTensor(x), AsTensor(gamma), AsTensor(beta)
    ax = axis % x.Ndim
    features = x.Shape[ax]
    if gamma.Shape != (features,) or beta.Shape != (features,):
        raise ShapeMismatchError("batchnorm", x.Shape, gamma.Shape, f"特征轴 {axis}")
    reduceAxes = tuple(i for i in range(x.Ndim) if i != ax)
    view = [1] * x.Ndim
    view[ax] = features
    view = tuple(view)

    if training:
        mean = x.Data.mean(axis=reduceAxes)
        var = x.Data.var(axis=reduceAxes)
        runningMean *= momentum
        runningMean += (1.0 - momentum) * mean
        runningVar *= momentum
        runningVar += (1.0 - momentum) * var
    else:
        mean = runningMean.copy()
        var = runningVar.copy()

    invStd = (1.0 / np.sqrt(var + eps)).astype(GetWorkingDtype())
    xHat = (x.Data - mean.reshape(view)) * invStd.reshape(view)
    out = gamma.Data.reshape(view) * xHat + beta.Data.reshape(view)

    def backward(g):
        gradGamma = (g * xHat).sum(axis=reduceAxes)
        gradBeta = g.sum(axis=reduceAxes)
        gXHat = g * gamma.Data.reshape(view)
        if training:
            meanG = gXHat.mean(axis=reduceAxes, keepdims=True)
            meanGX = (gXHat * xHat).mean(axis=reduceAxes, keepdims=True)
            gradX = (gXHat - meanG - xHat * meanGX) * invStd.reshape(view)
        else:
            gradX = gXHat * invStd.reshape(view)
        return gradX, gradGamma, gradBeta

    return Tensor._Make(out, (x, gamma, beta), backward, "batchnorm")

#endregion


#region 激活函数

def Elu(x, alpha: float = 1.0) -> Tensor:
    x = AsTensor(x)
    data = x.Data
    negative = np.expm1(np.minimum(data, 0.0))
    out = np.where(data > 0, data, alpha * negative)

    def backward(g):
        return (g * np.where(data > 0, 1.0, alpha * (negative + 1.0)),)

    return Tensor._Make(out, (x,), backward, "elu")


def Softplus(x) -> Tensor:
    x = AsTensor(x)
    data = x.Data
    out = np.logaddexp(0.0, data)
    sigmoid = np.exp(data - out)
    return Tensor._Make(out, (x,), lambda g: (g * sigmoid,), "softplus")


def Softmax(x, axis: int = -1) -> Tensor:
    x = AsTensor(x)
    shifted = x.Data - x.Data.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=axis, keepdims=True)

    def backward(g):
        dot = (g * probs).sum(axis=axis, keepdims=True)
        return (probs * (g - dot),)

    return Tensor._Make(probs, (x,), backward, "softmax")


def LogSoftmax(x, axis: int = -1) -> Tensor:
    x = AsTensor(x)
    shifted = x.Data - x.Data.max(axis=axis, keepdims=True)
    logSum = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - logSum
    probs = np.exp(out)

    def backward(g):
        return (g - probs * g.sum(axis=axis, keepdims=True),)

    return Tensor._Make(out, (x,), backward, "logsoftmax")

#endregion


#region 随机失活

def Dropout(x, rate: float, rng: np.random.Generator, training: bool,
            sharedAxes: Tuple[int, ...] = ()) -> Tensor:
    """随机失活

    sharedAxes 中的轴共享同一掩码（空间失活：整条通道一起丢弃）。
    """
    x = AsTensor(x)
    if not training or rate <= 0.0:
        return x
    maskShape = tuple(1 if i in sharedAxes else size for i, size in enumerate(x.Shape))
    dtype = GetWorkingDtype()
    keep = (rng.random(maskShape) >= rate).astype(dtype) / dtype(1.0 - rate)
    return Tensor._Make(x.Data * keep, (x,), lambda g: (g * keep,), "dropout")

#endregion


#region 守护除法

def GuardedDenominator(z, threshold: float) -> Tuple[Tensor, int]:
    """保号截断 sign(z)*max(|z|, threshold)，sign(0) 取 +1

    Returns:
        (截断后的张量, 被截断的元素个数)；截断区域内梯度为 0
    """
    z = AsTensor(z)
    if threshold <= 0:
        raise NonFiniteError(f"guard: 阈值必须为正: {threshold}")
    data = z.Data
    guarded = np.abs(data) < threshold
    dtype = GetWorkingDtype()
    sign = np.where(data < 0, -1.0, 1.0).astype(dtype)
    out = np.where(guarded, sign * dtype(threshold), data)
    passMask = (~guarded).astype(dtype)
    return Tensor._Make(out, (z,), lambda g: (g * passMask,), "guard"), int(guarded.sum())

#endregion
