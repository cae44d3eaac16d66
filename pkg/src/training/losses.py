# -*- coding: utf-8 -*-
"""
训练损失
等变比值损失与两个允许平凡解 z = 0 的对照损失，以及平滑目标上的交叉熵
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.numerics import functional as F
from src.numerics.tensor import AsTensor, Tensor

from .interfaces import LossVariant


GUARD_THRESHOLD = 1e-3


@dataclass
class LossResult:
    """批损失与守护触发次数"""
    Loss: Tensor
    GuardHits: int = 0


def _Flatten(z) -> Tensor:
    z = AsTensor(z)
    return z.Reshape(-1) if z.Ndim > 1 else z


def _Alphas(alphaI, alphaJ) -> Tuple[np.ndarray, np.ndarray]:
    return (np.asarray(alphaI, dtype=np.float32).reshape(-1),
            np.asarray(alphaJ, dtype=np.float32).reshape(-1))


def EquivarianceLoss(zI, zJ, alphaI, alphaJ, threshold: float = GUARD_THRESHOLD) -> LossResult:
    """批均值 |z_i / z_j − α_i / α_j|，分母经保号截断"""
    zI, zJ = _Flatten(zI), _Flatten(zJ)
    aI, aJ = _Alphas(alphaI, alphaJ)
    denominator, hits = F.GuardedDenominator(zJ, threshold)
    ratio = zI / denominator
    return LossResult(((ratio - aI / aJ).Abs()).Mean(), hits)


def TrivialLossPrime(zI, zJ, alphaI, alphaJ) -> LossResult:
    """批均值 |α_i z_j − α_j z_i|"""
    zI, zJ = _Flatten(zI), _Flatten(zJ)
    aI, aJ = _Alphas(alphaI, alphaJ)
    return LossResult((zJ * aI - zI * aJ).Abs().Mean())


def TrivialLossDoublePrime(zI, zJ, alphaI, alphaJ) -> LossResult:
    """批均值 |z_i − α_i z_j / α_j|"""
    zI, zJ = _Flatten(zI), _Flatten(zJ)
    aI, aJ = _Alphas(alphaI, alphaJ)
    return LossResult((zI - zJ * (aI / aJ)).Abs().Mean())


_LOSSES = {
    LossVariant.MAIN: EquivarianceLoss,
    LossVariant.PRIME: TrivialLossPrime,
    LossVariant.DOUBLE_PRIME: TrivialLossDoublePrime,
}


def PairLoss(variant: LossVariant, zI, zJ, alphaI, alphaJ, symmetric: bool = False) -> LossResult:
    """按变体计算损失；symmetric 时再加入 (j, i) 有序对并取平均"""
    lossFn = _LOSSES[LossVariant.Parse(variant)]
    forward = lossFn(zI, zJ, alphaI, alphaJ)
    if not symmetric:
        return forward
    backward = lossFn(zJ, zI, alphaJ, alphaI)
    return LossResult((forward.Loss + backward.Loss) * 0.5, forward.GuardHits + backward.GuardHits)


def SmoothedCrossEntropy(logits, targets) -> Tensor:
    """平滑目标上的交叉熵，批均值 −Σ t log softmax(logits)"""
    logits = AsTensor(logits)
    targets = np.asarray(targets, dtype=np.float32)
    logProbs = F.LogSoftmax(logits, axis=-1)
    return -((logProbs * targets).Sum(axis=-1).Mean())
