# -*- coding: utf-8 -*-
"""
TCN 编码器与输出头单元测试
形状、参数量、感受野、冻结语义与检查点
"""

import os
import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from src.model.encoder import TcnEncoder
from src.model.interfaces import InputTooShortError, MAX_PARAMETERS, MIN_FRAMES, ModelError
from src.model.network import (
    Classify, DecodeBpm, EmbedBatch, Encode, FreezeEncoder, LogParameterCounts, ParameterCount, Project,
    TempoNetwork
)
from src.numerics.tensor import NoGrad, Sum
from src.persist.checkpoint import SaveCheckpoint
from src.persist.interfaces import CheckpointCorruptError, FingerprintMismatchError


#region 基础测试类

class TestNetwork(unittest.TestCase):
    """网络测试基类"""

    @classmethod
    def setUpClass(cls):
        cls.network = TempoNetwork(seed=0)

    def setUp(self):
        self.rng = np.random.default_rng(0)
        self.network.Eval()

    def _Batch(self, batch=2, frames=MIN_FRAMES):
        return self.rng.normal(size=(batch, frames, 81)).astype(np.float32)

#endregion


#region 形状与参数

class TestShapes(TestNetwork):
    """前向形状"""

    def test_Encode_Project_Classify_形状(self):
        with NoGrad():
            h = Encode(self.network.Encoder, self._Batch())
            z = Project(self.network.Projection, h)
            probs = Classify(self.network.Classifier, h)
        self.assertEqual(h.Shape, (2, 16))
        self.assertEqual(z.Shape, (2, 1))
        self.assertEqual(probs.Shape, (2, 300))
        np.testing.assert_allclose(probs.Data.sum(axis=1), [1.0, 1.0], rtol=1e-5)

    def test_Encode_输入过短报错(self):
        with self.assertRaises(InputTooShortError):
            Encode(self.network.Encoder, self._Batch(frames=MIN_FRAMES - 1))

    def test_Encode_梅尔维度错误报错(self):
        with self.assertRaises(ModelError):
            Encode(self.network.Encoder, np.zeros((1, 300, 80), dtype=np.float32))

    def test_ParameterCount_精确值且低于上限(self):
        counts = LogParameterCounts(self.network)
        self.assertEqual(counts['encoder'], 162 + 160 + 2320 + 2064 + 8 * 1296)
        self.assertEqual(counts['projection'], 17)
        self.assertEqual(counts['classifier'], 16 * 300 + 300)
        self.assertEqual(counts['total'], ParameterCount(self.network))
        self.assertLess(counts['total'], MAX_PARAMETERS)

    def test_DecodeBpm_不选零号类别(self):
        probs = np.zeros((2, 300), dtype=np.float32)
        probs[0, 0] = 1.0
        probs[0, 87] = 0.5
        probs[1, 299] = 1.0
        np.testing.assert_array_equal(DecodeBpm(probs), [87.0, 299.0])

#endregion


#region 指纹与确定性

class TestFingerprint(TestNetwork):
    """架构指纹与初始化"""

    def test_Fingerprint_与种子无关(self):
        self.assertEqual(TempoNetwork(seed=5).Fingerprint, self.network.Fingerprint)
        self.assertEqual(len(self.network.Fingerprint), 64)

    def test_Fingerprint_截断变体不同(self):
        self.assertNotEqual(TempoNetwork(seed=0, nTcnLayers=4).Fingerprint, self.network.Fingerprint)

    def test_Init_相同种子相同权重(self):
        other = TempoNetwork(seed=0)
        for name, value in self.network.NamedTensors().items():
            np.testing.assert_array_equal(other.NamedTensors()[name], value, err_msg=name)

    def test_Init_偏置为零(self):
        for name, value in TempoNetwork(seed=1).NamedTensors().items():
            if name.endswith(".bias"):
                self.assertFalse(np.any(value), name)

    def test_EmbedBatch_评估模式可复现(self):
        batch = self._Batch()
        first = EmbedBatch(self.network, batch)
        second = EmbedBatch(self.network, batch)
        np.testing.assert_array_equal(first['h'], second['h'])
        np.testing.assert_array_equal(first['z'], second['z'])

#endregion


#region 感受野

class TestReceptiveField(unittest.TestCase):
    """时间感受野"""

    def test_ReceptiveField_完整编码器超过1024帧(self):
        self.assertGreater(TcnEncoder(0).ReceptiveField, 2 ** 10)

    def test_EncodeSequence_截断变体感受野外不变(self):
        """2 层截断变体感受野 17 帧：扰动一帧只改变 ±8 帧内的输出"""
        encoder = TcnEncoder(0, nTcnLayers=2).Eval()
        self.assertEqual(encoder.ReceptiveField, 17)
        x = np.random.default_rng(3).normal(size=(1, 300, 81)).astype(np.float32)
        perturbed = x.copy()
        perturbed[0, 150, :] += 5.0
        with NoGrad():
            base = encoder.EncodeSequence(x).Data
            moved = encoder.EncodeSequence(perturbed).Data
        changed = np.where(np.any(base != moved, axis=1)[0])[0]
        self.assertGreater(changed.size, 0)
        self.assertGreaterEqual(changed.min(), 150 - 8)
        self.assertLessEqual(changed.max(), 150 + 8)

    def test_Encode_单帧扰动改变嵌入(self):
        encoder = TcnEncoder(0).Eval()
        x = np.random.default_rng(4).normal(size=(1, 300, 81)).astype(np.float32)
        perturbed = x.copy()
        perturbed[0, 10, :] += 5.0
        with NoGrad():
            self.assertFalse(np.array_equal(encoder(x).Data, encoder(perturbed).Data))

#endregion


#region 冻结

class TestFreeze(unittest.TestCase):
    """冻结编码器"""

    def test_FreezeEncoder_无梯度且不更新运行统计(self):
        network = TempoNetwork(seed=2)
        FreezeEncoder(network.Encoder)
        before = network.Encoder.NamedTensors()
        network.Classifier.Train()
        x = np.random.default_rng(0).normal(size=(3, MIN_FRAMES, 81)).astype(np.float32)
        probs = network.Classifier(network.Encoder(x))
        Sum(probs * np.arange(300, dtype=np.float32)).Backward()
        for name, param in network.Encoder.NamedParameters():
            self.assertIsNone(param.Grad, name)
        self.assertIsNotNone(network.Classifier.Linear.Weight.Grad)
        for name, value in network.Encoder.NamedTensors().items():
            np.testing.assert_array_equal(value, before[name], err_msg=name)

#endregion


#region 检查点

class TestCheckpoint(unittest.TestCase):
    """网络检查点"""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_SaveLoad_输出一致(self):
        network = TempoNetwork(seed=7)
        path = network.Save(self.dir / "net.ckpt", {'phase': 'pretrain'})
        loaded = TempoNetwork.Load(path, seed=99)
        x = np.random.default_rng(1).normal(size=(2, MIN_FRAMES, 81)).astype(np.float32)
        np.testing.assert_array_equal(EmbedBatch(network, x)['z'], EmbedBatch(loaded, x)['z'])

    def test_Load_架构不符报错(self):
        path = TempoNetwork(seed=0, nTcnLayers=3).Save(self.dir / "small.ckpt")
        with self.assertRaises(FingerprintMismatchError):
            TempoNetwork.Load(path)

    def test_Load_缺少张量报损坏(self):
        checkpoint = TempoNetwork(seed=0).ToCheckpoint()
        del checkpoint.Tensors['projection.linear.bias']
        path = SaveCheckpoint(checkpoint, self.dir / "missing.ckpt")
        with self.assertRaises(CheckpointCorruptError) as context:
            TempoNetwork.Load(path)
        self.assertIn('projection.linear.bias', str(context.exception))

    def test_LoadFromCheckpoint_形状不符报损坏(self):
        checkpoint = TempoNetwork(seed=0).ToCheckpoint()
        checkpoint.Tensors['projection.linear.bias'] = np.zeros(2, dtype=np.float32)
        with self.assertRaises(CheckpointCorruptError):
            TempoNetwork(seed=0).LoadFromCheckpoint(checkpoint)

#endregion


if __name__ == '__main__':
    unittest.main()
