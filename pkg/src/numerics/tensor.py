# -*- coding: utf-8 -*-
"""
张量与反向模式自动微分
所有网络运算都构建在本模块的 Tensor 之上
"""

from contextlib import contextmanager
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .interfaces import (
    GradientError,
    NonFiniteError,
    ShapeMismatchError,
    GetWorkingDtype,
    IsGradEnabled,
    SetGradEnabled,
    SetWorkingDtype,
)


ArrayLike = Union[np.ndarray, float, int, Sequence]


#region 辅助函数

def _AsArray(value: ArrayLike) -> np.ndarray:
    array = np.asarray(value, dtype=GetWorkingDtype())
    return array


def _Unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """把广播后的梯度规约回原始形状"""
    if grad.shape == shape:
        return grad
    # 先规约多出来的前导维度
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _BroadcastShape(opName: str, a: 'Tensor', b: 'Tensor') -> Tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.Shape, b.Shape)
    except ValueError:
        raise ShapeMismatchError(opName, a.Shape, b.Shape, "无法广播")

#endregion


#region 张量类

class Tensor:
    """带梯度追踪的 n 维浮点张量，默认 float32

    Data 在算子写入后视为不可变；Grad 与 Data 形状一致。
    """

    def __init__(self, data: ArrayLike, requiresGrad: bool = False, name: str = ""):
        self.Data: np.ndarray = _AsArray(data)
        self.RequiresGrad: bool = requiresGrad
        self.Grad: Optional[np.ndarray] = None
        self.Name: str = name
        self.Op: str = "leaf"
        self._parents: Tuple['Tensor', ...] = ()
        self._backwardFn: Optional[Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]] = None

    #region 基础属性

    @property
    def Shape(self) -> Tuple[int, ...]:
        return self.Data.shape

    @property
    def Size(self) -> int:
        return int(self.Data.size)

    @property
    def Ndim(self) -> int:
        return self.Data.ndim

    @property
    def IsLeaf(self) -> bool:
        return not self._parents

    def Numpy(self) -> np.ndarray:
        """返回底层数组的副本"""
        return self.Data.copy()

    def Item(self) -> float:
        if self.Data.size != 1:
            raise ShapeMismatchError("item", self.Shape, (1,), "只有单元素张量可以取标量")
        return float(self.Data.reshape(-1)[0])

    def Detach(self) -> 'Tensor':
        return Tensor(self.Data, requiresGrad=False)

    def __repr__(self):
        return f"Tensor(shape={self.Shape}, op={self.Op}, requiresGrad={self.RequiresGrad})"

    #endregion

    #region 图构建

    @staticmethod
    def _Make(data: np.ndarray, parents: Sequence['Tensor'], backwardFn, op: str) -> 'Tensor':
        """由算子创建输出张量，按需记录计算图"""
        out = Tensor.__new__(Tensor)
        out.Data = np.asarray(data, dtype=GetWorkingDtype())
        out.Grad = None
        out.Name = ""
        out.Op = op
        needsGrad = IsGradEnabled() and any(p.RequiresGrad for p in parents)
        out.RequiresGrad = needsGrad
        if needsGrad:
            out._parents = tuple(parents)
            out._backwardFn = backwardFn
        else:
            out._parents = ()
            out._backwardFn = None
        return out

    def ZeroGrad(self) -> None:
        self.Grad = None

    def _TopologicalOrder(self) -> List['Tensor']:
        """迭代式后序遍历，每个节点只访问一次"""
        order: List['Tensor'] = []
        visited = set()
        stack: List[Tuple['Tensor', bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.RequiresGrad and id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def Backward(self) -> None:
        """从标量损失反向传播

        叶子张量的梯度跨多次调用累加，需由调用方显式清零；
        中间张量的 Grad 记录本次传播的梯度。
        """
        if self.Data.size != 1:
            raise GradientError(f"backward 只能从标量调用，当前形状 {self.Shape}")
        if not self.RequiresGrad:
            raise GradientError("损失不依赖任何需要梯度的张量")

        order = self._TopologicalOrder()
        pending = {id(self): np.ones_like(self.Data)}

        for node in reversed(order):
            grad = pending.pop(id(node), None)
            if grad is None:
                continue
            if node.IsLeaf:
                node.Grad = grad.copy() if node.Grad is None else node.Grad + grad
                continue
            node.Grad = grad
            parentGrads = node._backwardFn(grad)
            for parent, parentGrad in zip(node._parents, parentGrads):
                if parentGrad is None or not parent.RequiresGrad:
                    continue
                parentGrad = np.asarray(parentGrad, dtype=GetWorkingDtype())
                if parentGrad.shape != parent.Shape:
                    raise GradientError(
                        f"{node.Op}: 梯度形状 {parentGrad.shape} 与输入形状 {parent.Shape} 不一致"
                    )
                key = id(parent)
                if key in pending:
                    pending[key] = pending[key] + parentGrad
                else:
                    pending[key] = parentGrad

    #endregion

    #region 运算符重载

    def __add__(self, other): return Add(self, other)
    def __radd__(self, other): return Add(other, self)
    def __sub__(self, other): return Sub(self, other)
    def __rsub__(self, other): return Sub(other, self)
    def __mul__(self, other): return Mul(self, other)
    def __rmul__(self, other): return Mul(other, self)
    def __truediv__(self, other): return Div(self, other)
    def __rtruediv__(self, other): return Div(other, self)
    def __neg__(self): return Neg(self)
    def __matmul__(self, other): return MatMul(self, other)
    def __abs__(self): return Abs(self)

    def __getitem__(self, key):
        return Slice(self, key)

    def Sum(self, axis=None, keepdims: bool = False) -> 'Tensor':
        return Sum(self, axis, keepdims)

    def Mean(self, axis=None, keepdims: bool = False) -> 'Tensor':
        return Mean(self, axis, keepdims)

    def Reshape(self, *shape) -> 'Tensor':
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Reshape(self, shape)

    def Transpose(self, *axes) -> 'Tensor':
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return Transpose(self, axes)

    def Abs(self) -> 'Tensor':
        return Abs(self)

    def Log(self) -> 'Tensor':
        return Log(self)

    #endregion

#endregion


#region 梯度上下文

@contextmanager
def NoGrad():
    """在上下文中不记录计算图"""
    previous = IsGradEnabled()
    SetGradEnabled(False)
    try:
        yield
    finally:
        SetGradEnabled(previous)


@contextmanager
def WorkingPrecision(dtype=np.float64):
    """在上下文中以指定精度构建张量、计算前向与反向"""
    previous = GetWorkingDtype()
    SetWorkingDtype(dtype)
    try:
        yield
    finally:
        SetWorkingDtype(previous)


def ZeroGrad(params: Iterable[Tensor]) -> None:
    """显式清零一组参数的梯度"""
    for param in params:
        param.ZeroGrad()


def AsTensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)

#endregion


#region 逐元素算子

def Add(a, b) -> Tensor:
    a, b = AsTensor(a), AsTensor(b)
    _BroadcastShape("add", a, b)
    shapeA, shapeB = a.Shape, b.Shape

    def backward(g):
        return _Unbroadcast(g, shapeA), _Unbroadcast(g, shapeB)

    return Tensor._Make(a.Data + b.Data, (a, b), backward, "add")


def Sub(a, b) -> Tensor:
    a, b = AsTensor(a), AsTensor(b)
    _BroadcastShape("sub", a, b)
    shapeA, shapeB = a.Shape, b.Shape

    def backward(g):
        return _Unbroadcast(g, shapeA), _Unbroadcast(-g, shapeB)

    return Tensor._Make(a.Data - b.Data, (a, b), backward, "sub")


def Mul(a, b) -> Tensor:
    a, b = AsTensor(a), AsTensor(b)
    _BroadcastShape("mul", a, b)
    dataA, dataB = a.Data, b.Data

    def backward(g):
        return _Unbroadcast(g * dataB, dataA.shape), _Unbroadcast(g * dataA, dataB.shape)

    return Tensor._Make(dataA * dataB, (a, b), backward, "mul")


def Div(a, b) -> Tensor:
    """逐元素除法

    分母中出现 0 或结果非有限时直接报错，不会静默产生 inf/nan。
    """
    a, b = AsTensor(a), AsTensor(b)
    _BroadcastShape("div", a, b)
    numerator, denominator = a.Data, b.Data
    if np.any(denominator == 0):
        raise NonFiniteError(f"div: 分母含 0 (形状 {b.Shape})")
    with np.errstate(over='ignore', invalid='ignore'):
        out = numerator / denominator
    if not np.all(np.isfinite(out)):
        raise NonFiniteError(f"div: 结果含非有限值 (形状 {a.Shape} / {b.Shape})")

    def backward(g):
        gradA = g / denominator
        gradB = -g * numerator / (denominator * denominator)
        return _Unbroadcast(gradA, numerator.shape), _Unbroadcast(gradB, denominator.shape)

    return Tensor._Make(out, (a, b), backward, "div")


def Neg(a) -> Tensor:
    a = AsTensor(a)
    return Tensor._Make(-a.Data, (a,), lambda g: (-g,), "neg")


def Abs(a) -> Tensor:
    """绝对值，在 0 处取次梯度 0"""
    a = AsTensor(a)
    sign = np.sign(a.Data)
    return Tensor._Make(np.abs(a.Data), (a,), lambda g: (g * sign,), "abs")


def Log(a) -> Tensor:
    a = AsTensor(a)
    if np.any(a.Data <= 0):
        raise NonFiniteError(f"log: 输入含非正值 (形状 {a.Shape})")
    data = a.Data
    return Tensor._Make(np.log(data), (a,), lambda g: (g / data,), "log")


def Exp(a) -> Tensor:
    a = AsTensor(a)
    out = np.exp(a.Data)
    if not np.all(np.isfinite(out)):
        raise NonFiniteError(f"exp: 结果溢出 (形状 {a.Shape})")
    return Tensor._Make(out, (a,), lambda g: (g * out,), "exp")

#endregion


#region 规约与形状算子

def _NormalizeAxes(axis, ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(sorted(ax % ndim for ax in axis))


def Sum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = AsTensor(a)
    axes = _NormalizeAxes(axis, a.Ndim)
    shape = a.Shape

    def backward(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, shape).copy(),)

    return Tensor._Make(a.Data.sum(axis=axes, keepdims=keepdims), (a,), backward, "sum")


def Mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = AsTensor(a)
    axes = _NormalizeAxes(axis, a.Ndim)
    count = int(np.prod([a.Shape[ax] for ax in axes])) if axes else 1
    shape = a.Shape

    def backward(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g / count, shape).copy(),)

    return Tensor._Make(a.Data.mean(axis=axes, keepdims=keepdims), (a,), backward, "mean")


def Reshape(a, shape: Tuple[int, ...]) -> Tensor:
    a = AsTensor(a)
    oldShape = a.Shape
    try:
        out = a.Data.reshape(shape)
    except ValueError:
        raise ShapeMismatchError("reshape", oldShape, shape)
    return Tensor._Make(out, (a,), lambda g: (g.reshape(oldShape),), "reshape")


def Transpose(a, axes: Tuple[int, ...]) -> Tensor:
    a = AsTensor(a)
    if not axes:
        axes = tuple(reversed(range(a.Ndim)))
    if sorted(axes) != list(range(a.Ndim)):
        raise ShapeMismatchError("transpose", a.Shape, axes, "轴排列无效")
    inverse = tuple(np.argsort(axes))
    return Tensor._Make(a.Data.transpose(axes), (a,), lambda g: (g.transpose(inverse),), "transpose")


def Slice(a, key) -> Tensor:
    """基础切片；反向把梯度散射回原位置"""
    a = AsTensor(a)
    shape = a.Shape

    def backward(g):
        full = np.zeros(shape, dtype=GetWorkingDtype())
        np.add.at(full, key, g)
        return (full,)

    return Tensor._Make(a.Data[key], (a,), backward, "slice")


def Concatenate(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [AsTensor(t) for t in tensors]
    if not tensors:
        raise ShapeMismatchError("concatenate", (), (), "输入为空")
    reference = tensors[0]
    ax = axis % reference.Ndim
    for other in tensors[1:]:
        if other.Ndim != reference.Ndim or any(
            other.Shape[i] != reference.Shape[i] for i in range(reference.Ndim) if i != ax
        ):
            raise ShapeMismatchError("concatenate", reference.Shape, other.Shape, f"axis={axis}")
    sizes = [t.Shape[ax] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def backward(g):
        grads = []
        for start, stop in zip(bounds[:-1], bounds[1:]):
            index = [slice(None)] * g.ndim
            index[ax] = slice(int(start), int(stop))
            grads.append(g[tuple(index)])
        return grads

    data = np.concatenate([t.Data for t in tensors], axis=ax)
    return Tensor._Make(data, tensors, backward, "concatenate")

#endregion


#region 矩阵乘法

def MatMul(a, b) -> Tensor:
    """矩阵乘法，支持 [..., M, K] @ [K, N] 与 [M, K] @ [K, N]"""
    a, b = AsTensor(a), AsTensor(b)
    if a.Ndim < 2 or b.Ndim != 2 or a.Shape[-1] != b.Shape[0]:
        raise ShapeMismatchError("matmul", a.Shape, b.Shape)
    dataA, dataB = a.Data, b.Data

    def backward(g):
        gradA = g @ dataB.T
        flatA = dataA.reshape(-1, dataA.shape[-1])
        flatG = g.reshape(-1, g.shape[-1])
        gradB = flatA.T @ flatG
        return gradA, gradB

    return Tensor._Make(dataA @ dataB, (a, b), backward, "matmul")

#endregion
