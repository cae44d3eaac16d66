# -*- coding: utf-8 -*-
"""
Adam 优化器
带偏差修正的自适应矩估计，矩缓冲按参数名存放于 AdamState
"""

from typing import Dict, Iterable, Tuple

import numpy as np

from .interfaces import AdamState, FLOAT_DTYPE, GradientError
from .tensor import Tensor


def AdamStep(params: Dict[str, Tensor], state: AdamState) -> None:
    """执行一次 Adam 更新

    参数原地更新，梯度保持不变（由调用方清零）。

    Args:
        params: 参数名到张量的映射，所有参数必须已有梯度
        state: 优化器状态，StepCount 每次调用加 1
    """
    for name, param in params.items():
        if param.Grad is None:
            raise GradientError(f"参数 {name} 没有梯度")

    state.StepCount += 1
    step = state.StepCount
    correction1 = 1.0 - state.Beta1 ** step
    correction2 = 1.0 - state.Beta2 ** step

    for name, param in params.items():
        grad = param.Grad
        if name not in state.FirstMoment:
            state.FirstMoment[name] = np.zeros_like(param.Data)
            state.SecondMoment[name] = np.zeros_like(param.Data)
        m = state.FirstMoment[name]
        v = state.SecondMoment[name]
        if m.shape != param.Shape:
            raise GradientError(f"参数 {name} 的形状 {param.Shape} 与矩缓冲 {m.shape} 不一致")

        m *= state.Beta1
        m += (1.0 - state.Beta1) * grad
        v *= state.Beta2
        v += (1.0 - state.Beta2) * (grad * grad)

        mHat = m / correction1
        vHat = v / correction2
        update = state.LearningRate * mHat / (np.sqrt(vHat) + state.Epsilon)
        # 参数数据在每个训练步之间被替换而非原地改写，已交出的前向值不受影响
        param.Data = (param.Data - update).astype(FLOAT_DTYPE)


class AdamOptimizer:
    """Adam 优化器

    持有一组具名参数与其 AdamState
    """

    def __init__(self, params: Iterable[Tuple[str, Tensor]], learningRate: float = 0.001,
                 beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self._params: Dict[str, Tensor] = dict(params)
        self._state = AdamState(
            LearningRate=learningRate, Beta1=beta1, Beta2=beta2, Epsilon=epsilon
        )

    @property
    def State(self) -> AdamState:
        return self._state

    @property
    def Params(self) -> Dict[str, Tensor]:
        return self._params

    def Step(self) -> None:
        AdamStep(self._params, self._state)

    def ZeroGrad(self) -> None:
        for param in self._params.values():
            param.ZeroGrad()
