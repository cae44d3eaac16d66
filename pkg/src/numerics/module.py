# -*- coding: utf-8 -*-
"""
模块基类
管理具名参数、具名缓冲与训练/评估模式
"""

from collections import OrderedDict
from typing import Dict, Iterator, List, Tuple

import numpy as np

from .interfaces import FLOAT_DTYPE, ShapeMismatchError
from .tensor import Tensor


class Module:
    """网络模块基类

    参数按注册顺序保存；子模块的名称以 "." 连接。
    """

    def __init__(self):
        self._parameters: "OrderedDict[str, Tensor]" = OrderedDict()
        self._buffers: "OrderedDict[str, np.ndarray]" = OrderedDict()
        self._children: "OrderedDict[str, Module]" = OrderedDict()
        self._training = True
        self._frozen = False

    #region 注册

    def RegisterParameter(self, name: str, data: np.ndarray) -> Tensor:
        param = Tensor(np.asarray(data, dtype=FLOAT_DTYPE), requiresGrad=True, name=name)
        self._parameters[name] = param
        return param

    def RegisterBuffer(self, name: str, data: np.ndarray) -> np.ndarray:
        buffer = np.array(data, dtype=FLOAT_DTYPE)
        self._buffers[name] = buffer
        return buffer

    def RegisterModule(self, name: str, module: 'Module') -> 'Module':
        self._children[name] = module
        return module

    #endregion

    #region 遍历

    def NamedParameters(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for name, param in self._parameters.items():
            yield prefix + name, param
        for childName, child in self._children.items():
            yield from child.NamedParameters(prefix + childName + ".")

    def NamedBuffers(self, prefix: str = "") -> Iterator[Tuple[str, np.ndarray]]:
        for name, buffer in self._buffers.items():
            yield prefix + name, buffer
        for childName, child in self._children.items():
            yield from child.NamedBuffers(prefix + childName + ".")

    def Parameters(self) -> List[Tensor]:
        return [param for _, param in self.NamedParameters()]

    def TrainableParameters(self, prefix: str = "") -> Dict[str, Tensor]:
        return {name: p for name, p in self.NamedParameters(prefix) if p.RequiresGrad}

    def ParameterCount(self) -> int:
        return int(sum(param.Size for param in self.Parameters()))

    def NamedTensors(self, prefix: str = "") -> Dict[str, np.ndarray]:
        """参数与缓冲的数组快照，用于持久化"""
        tensors = {name: param.Data.copy() for name, param in self.NamedParameters(prefix)}
        tensors.update({name: buffer.copy() for name, buffer in self.NamedBuffers(prefix)})
        return tensors

    def LoadNamedTensors(self, tensors: Dict[str, np.ndarray], prefix: str = "") -> None:
        """按名称写回参数与缓冲，名称缺失或形状不符时报错"""
        for name, param in self.NamedParameters(prefix):
            if name not in tensors:
                raise KeyError(f"缺少参数: {name}")
            data = np.asarray(tensors[name], dtype=FLOAT_DTYPE)
            if data.shape != param.Shape:
                raise ShapeMismatchError("load", param.Shape, data.shape, name)
            param.Data = data.copy()
            param.ZeroGrad()
        for name, buffer in self.NamedBuffers(prefix):
            if name not in tensors:
                raise KeyError(f"缺少缓冲: {name}")
            data = np.asarray(tensors[name], dtype=FLOAT_DTYPE)
            if data.shape != buffer.shape:
                raise ShapeMismatchError("load", buffer.shape, data.shape, name)
            buffer[...] = data

    #endregion

    #region 模式

    @property
    def IsTraining(self) -> bool:
        return self._training and not self._frozen

    @property
    def IsFrozen(self) -> bool:
        return self._frozen

    def Train(self) -> 'Module':
        self._training = True
        for child in self._children.values():
            child.Train()
        return self

    def Eval(self) -> 'Module':
        self._training = False
        for child in self._children.values():
            child.Eval()
        return self

    def Freeze(self) -> 'Module':
        """冻结：参数不再接收梯度，批归一化只用运行统计"""
        self._frozen = True
        for param in self._parameters.values():
            param.RequiresGrad = False
            param.ZeroGrad()
        for child in self._children.values():
            child.Freeze()
        return self

    #endregion

    def Forward(self, *args, **kwargs):
        raise NotImplementedError

    def __call__(self, *args, **kwargs):
        return self.Forward(*args, **kwargs)
