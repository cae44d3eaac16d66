# -*- coding: utf-8 -*-
"""
训练损失单元测试
比值损失、两个对照损失、平滑目标与交叉熵
"""

import os
import sys
import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from src.model.network import TempoNetwork
from src.numerics.gradcheck import GradientCheck
from src.numerics.tensor import Tensor
from src.training.finetune import BpmToTarget, StretchLabeled
from src.training.interfaces import LabelRangeError, LossVariant
from src.training.losses import (
    EquivarianceLoss, PairLoss, SmoothedCrossEntropy, TrivialLossDoublePrime, TrivialLossPrime
)
from src.audio.interfaces import AudioClip, LabeledClip


#region 等变损失

class TestPairLosses(unittest.TestCase):
    """三种损失变体"""

    def setUp(self):
        self.zI = np.array([2.0, 1.0], dtype=np.float32)
        self.zJ = np.array([1.0, 1.0], dtype=np.float32)
        self.aI = np.array([1.2, 1.0], dtype=np.float32)
        self.aJ = np.array([1.0, 1.0], dtype=np.float32)

    def test_三种变体_手算值(self):
        for fn in (EquivarianceLoss, TrivialLossPrime, TrivialLossDoublePrime):
            result = fn(self.zI, self.zJ, self.aI, self.aJ)
            self.assertAlmostEqual(result.Loss.Item(), 0.4, places=5, msg=fn.__name__)

    def test_对照损失_零输出为平凡最优(self):
        zeros = np.zeros(2, dtype=np.float32)
        self.assertEqual(TrivialLossPrime(zeros, zeros, self.aI, self.aJ).Loss.Item(), 0.0)
        self.assertEqual(TrivialLossDoublePrime(zeros, zeros, self.aI, self.aJ).Loss.Item(), 0.0)

    def test_EquivarianceLoss_零输出不是最优且触发守护(self):
        zeros = np.zeros(2, dtype=np.float32)
        result = EquivarianceLoss(zeros, zeros, self.aI, self.aJ)
        self.assertAlmostEqual(result.Loss.Item(), (1.2 + 1.0) / 2, places=5)
        self.assertEqual(result.GuardHits, 2)

    def test_EquivarianceLoss_分母守护后梯度为零(self):
        zI = Tensor([1.0], requiresGrad=True)
        zJ = Tensor([1e-5], requiresGrad=True)
        result = EquivarianceLoss(zI, zJ, [1.0], [1.0])
        result.Loss.Backward()
        self.assertTrue(np.isfinite(result.Loss.Item()))
        np.testing.assert_array_equal(zJ.Grad, [0.0])
        np.testing.assert_allclose(zI.Grad, [1000.0], rtol=1e-4)

    def test_EquivarianceLoss_等变输出损失为零(self):
        z = np.array([0.7, -1.3, 2.0], dtype=np.float32)
        alphas = np.array([0.9, 1.1, 1.05], dtype=np.float32)
        other = np.array([1.0, 0.8, 1.2], dtype=np.float32)
        result = EquivarianceLoss(z * alphas, z * other, alphas, other)
        self.assertAlmostEqual(result.Loss.Item(), 0.0, places=5)

    def test_PairLoss_对称平均(self):
        result = PairLoss(LossVariant.MAIN, [2.0], [1.0], [1.0], [1.0], symmetric=True)
        self.assertAlmostEqual(result.Loss.Item(), 0.75, places=5)

    def test_PairLoss_按名称选择变体(self):
        zeros = np.zeros(2, dtype=np.float32)
        self.assertEqual(PairLoss("double-prime", zeros, zeros, self.aI, self.aJ).Loss.Item(), 0.0)
        with self.assertRaises(ValueError):
            PairLoss("unknown", zeros, zeros, self.aI, self.aJ)

    def test_EquivarianceLoss_成比例元组全部为零(self):
        rng = np.random.default_rng(5)
        c = rng.choice([-1.0, 1.0], size=1000) * rng.uniform(0.1, 10.0, size=1000)
        aI = rng.uniform(0.8, 1.2, size=1000)
        aJ = rng.uniform(0.8, 1.2, size=1000)
        result = EquivarianceLoss((c * aI).astype(np.float32), (c * aJ).astype(np.float32), aI, aJ)
        self.assertLess(result.Loss.Item(), 1e-6)
        self.assertEqual(result.GuardHits, 0)

    def test_EquivarianceLoss_常数输出有正下界(self):
        rng = np.random.default_rng(6)
        aI = rng.uniform(0.9, 1.1, size=10000)
        aJ = rng.uniform(0.9, 1.1, size=10000)
        for c in (1.0, -3.0, 1e-4, 0.0):
            z = np.full(10000, c, dtype=np.float32)
            self.assertGreater(EquivarianceLoss(z, z, aI, aJ).Loss.Item(), 0.05, msg=str(c))

    def test_EquivarianceLoss_对全局缩放不变(self):
        rng = np.random.default_rng(7)
        zI, zJ = rng.normal(size=(2, 16)).astype(np.float32)
        aI, aJ = rng.uniform(0.8, 1.2, size=(2, 16))
        base = EquivarianceLoss(zI, zJ, aI, aJ).Loss.Item()
        for scale in (0.5, 3.0):
            self.assertAlmostEqual(EquivarianceLoss(zI * scale, zJ * scale, aI, aJ).Loss.Item(), base, places=4)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.8, 1.2), st.floats(0.8, 1.2), st.floats(0.1, 10.0))
    def test_TrivialLossPrime_对乘性缩放不变(self, aI, aJ, scale):
        z = np.array([scale * aI], dtype=np.float32)
        other = np.array([scale * aJ], dtype=np.float32)
        self.assertLess(TrivialLossPrime(z, other, [aI], [aJ]).Loss.Item(), 1e-4 * max(scale, 1.0))

#endregion


#region 梯度检验

class TestNetworkGradient(unittest.TestCase):
    """完整编码器加比值损失的端到端梯度检验"""

    def test_GradientCheck_完整网络加比值损失(self):
        network = TempoNetwork(seed=0).Eval()
        rng = np.random.default_rng(0)
        specs = rng.normal(size=(4, 256, 81)).astype(np.float32)
        alphaI = np.array([0.9, 1.1], dtype=np.float32)
        alphaJ = np.array([1.05, 0.95], dtype=np.float32)

        def Loss():
            z = network(specs).Reshape(-1)
            return EquivarianceLoss(z[:2], z[2:], alphaI, alphaJ).Loss

        encoder = network.Encoder
        params = {
            'block1': encoder.Blocks[0].Conv.Weight,
            'block3': encoder.Blocks[2].Conv.Weight,
            'tcn0': encoder.TcnLayers[0].Conv.Weight,
            'tcn7': encoder.TcnLayers[-1].Conv.Weight,
            'tcn7_bias': encoder.TcnLayers[-1].Conv.Bias,
            'projection': network.Projection.Linear.Weight,
            'projection_bias': network.Projection.Linear.Bias,
        }
        result = GradientCheck(Loss, params, maxEntriesPerParam=8)
        self.assertEqual(len(encoder.TcnLayers), 8)
        self.assertGreaterEqual(result.PassRate(1e-3), 0.99, result.RelativeErrors)

#endregion


#region 平滑目标

class TestSmoothedTargets(unittest.TestCase):
    """BPM → 平滑目标"""

    def test_BpmToTarget_半数向上取整(self):
        target = BpmToTarget(119.5)
        self.assertEqual(target.CenterBin, 120)
        np.testing.assert_allclose(target.Weights[119:122], [0.25, 0.5, 0.25])
        self.assertAlmostEqual(float(target.Weights.sum()), 1.0, places=6)

    def test_BpmToTarget_边界截断(self):
        self.assertEqual(BpmToTarget(0.4).CenterBin, 1)
        self.assertEqual(BpmToTarget(299.7).CenterBin, 298)
        self.assertEqual(BpmToTarget(0.4).Weights[0], 0.25)

    def test_BpmToTarget_越界报错(self):
        for bpm in (0.0, -5.0, 300.0, 412.0):
            with self.assertRaises(LabelRangeError):
                BpmToTarget(bpm)

    def test_SmoothedCrossEntropy_均匀对数几率(self):
        logits = np.zeros((2, 300), dtype=np.float32)
        targets = np.stack([BpmToTarget(120).Weights, BpmToTarget(80).Weights])
        self.assertAlmostEqual(SmoothedCrossEntropy(logits, targets).Item(), np.log(300.0), places=4)

    def test_StretchLabeled_标注按拉伸率缩放(self):
        clip = AudioClip(np.random.default_rng(0).normal(size=44100).astype(np.float32))
        rng = np.random.default_rng(1)
        for _ in range(5):
            out = StretchLabeled(LabeledClip(clip, 100.0), 0.2, rng, length=44100)
            self.assertEqual(out.Clip.Length, 44100)
            self.assertGreaterEqual(out.TempoBpm, 80.0)
            self.assertLessEqual(out.TempoBpm, 120.0)

    def test_StretchLabeled_零强度保持标注(self):
        clip = AudioClip(np.ones(1000, dtype=np.float32))
        out = StretchLabeled(LabeledClip(clip, 97.0), 0.0, np.random.default_rng(0), length=500)
        self.assertEqual(out.TempoBpm, 97.0)
        self.assertEqual(out.Clip.Length, 500)

    def test_StretchLabeled_越界时重抽(self):
        clip = AudioClip(np.ones(4410, dtype=np.float32))
        rng = np.random.default_rng(2)
        for _ in range(10):
            out = StretchLabeled(LabeledClip(clip, 290.0), 0.2, rng)
            self.assertLess(out.TempoBpm, 300.0)

#endregion


if __name__ == '__main__':
    unittest.main()
