# -*- coding: utf-8 -*-
"""
Adam 优化器与 Module 基类单元测试
"""

import os
import sys
import unittest

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from src.numerics.interfaces import GradientError, ShapeMismatchError
from src.numerics.module import Module
from src.numerics.optimizer import AdamOptimizer
from src.numerics.tensor import Mean, Sum, Tensor


class _Affine(Module):
    """测试用小模块：一个参数一个缓冲一个子模块"""

    def __init__(self, withChild: bool = True):
        super().__init__()
        self.W = self.RegisterParameter("W", np.ones((2, 3)))
        self.Stat = self.RegisterBuffer("stat", np.zeros(3))
        if withChild:
            self.Child = self.RegisterModule("child", _Affine(withChild=False))

    def Forward(self, x):
        return x @ self.W


#region Adam

class TestAdamOptimizer(unittest.TestCase):
    """Adam 更新规则"""

    def test_Step_首步更新幅度为学习率(self):
        """偏差修正后首步 |Δ| ≈ lr"""
        p = Tensor([1.0, -2.0, 3.0], requiresGrad=True)
        optimizer = AdamOptimizer([("p", p)], learningRate=0.01)
        Sum(p * Tensor([5.0, -0.1, 2.0])).Backward()
        optimizer.Step()
        np.testing.assert_allclose(p.Data, [0.99, -1.99, 2.99], rtol=1e-5)
        self.assertEqual(optimizer.State.StepCount, 1)

    def test_Step_与手算公式一致(self):
        p = Tensor([0.5], requiresGrad=True)
        optimizer = AdamOptimizer([("p", p)], learningRate=0.1)
        m = v = 0.0
        value = 0.5
        for step in range(1, 4):
            optimizer.ZeroGrad()
            Sum(p * p).Backward()
            grad = 2.0 * value
            m = 0.9 * m + 0.1 * grad
            v = 0.999 * v + 0.001 * grad * grad
            value -= 0.1 * (m / (1 - 0.9 ** step)) / (np.sqrt(v / (1 - 0.999 ** step)) + 1e-8)
            optimizer.Step()
        self.assertAlmostEqual(float(p.Data[0]), value, places=5)

    def test_Step_无梯度报错(self):
        p = Tensor([1.0], requiresGrad=True)
        with self.assertRaises(GradientError):
            AdamOptimizer([("p", p)]).Step()

    def test_Step_最小化二次函数(self):
        p = Tensor([3.0, -4.0], requiresGrad=True)
        optimizer = AdamOptimizer([("p", p)], learningRate=0.05)
        for _ in range(500):
            optimizer.ZeroGrad()
            Mean(p * p).Backward()
            optimizer.Step()
        np.testing.assert_allclose(p.Data, [0.0, 0.0], atol=0.05)

#endregion


#region Module

class TestModule(unittest.TestCase):
    """参数注册、冻结与快照"""

    def setUp(self):
        self.module = _Affine()

    def test_NamedParameters_子模块以点号连接(self):
        names = [name for name, _ in self.module.NamedParameters()]
        self.assertEqual(names, ["W", "child.W"])
        self.assertEqual(self.module.ParameterCount(), 12)

    def test_NamedTensors_包含缓冲(self):
        tensors = self.module.NamedTensors("net.")
        self.assertEqual(sorted(tensors), ["net.W", "net.child.W", "net.child.stat", "net.stat"])

    def test_LoadNamedTensors_形状不符报错(self):
        tensors = self.module.NamedTensors()
        tensors["W"] = np.zeros((3, 3))
        with self.assertRaises(ShapeMismatchError):
            self.module.LoadNamedTensors(tensors)

    def test_LoadNamedTensors_写回数值(self):
        tensors = self.module.NamedTensors()
        tensors["child.stat"] = np.full(3, 7.0)
        self.module.LoadNamedTensors(tensors)
        np.testing.assert_array_equal(self.module.Child.Stat, np.full(3, 7.0))

    def test_Freeze_参数不再需要梯度(self):
        self.module.Freeze()
        self.assertTrue(self.module.IsFrozen)
        self.assertFalse(self.module.IsTraining)
        self.assertEqual(self.module.TrainableParameters(), {})
        out = self.module(Tensor(np.ones((1, 2))))
        self.assertFalse(out.RequiresGrad)

    def test_Eval_递归切换模式(self):
        self.module.Eval()
        self.assertFalse(self.module.Child.IsTraining)
        self.module.Train()
        self.assertTrue(self.module.Child.IsTraining)

#endregion


if __name__ == '__main__':
    unittest.main()
