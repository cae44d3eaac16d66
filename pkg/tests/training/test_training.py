# -*- coding: utf-8 -*-
"""
预训练与微调集成测试
在几秒长的小型合成语料上跑完整流程，检查可复现性与冻结语义
"""

import json
import os
import sys
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from src.model.network import TempoNetwork
from src.numerics.tensor import Tensor
from src.persist.checkpoint import ReadHeader
from src.persist.interfaces import Manifest
from src.persist.manifest import ReadManifest
from src.synthdata.corpus import MakeCorpus
from src.training.finetune import Finetune, FitClassifierHead
from src.training.interfaces import (
    CollapseMonitor, CollapseVerdict, EmptyCorpusError, EpochRecord, FinetuneConfig, LabelRangeError,
    LossVariant, NumericalFailure, SslConfig
)
from src.training.losses import LossResult
from src.training.ssl import Pretrain


LENGTH = 132300


#region 基础测试类

class TestTrainingBase(unittest.TestCase):
    """共享一份 8 个片段的合成语料"""

    @classmethod
    def setUpClass(cls):
        cls._tmp = tempfile.TemporaryDirectory()
        cls.root = Path(cls._tmp.name)
        splits = MakeCorpus(cls.root / "corpus", n=8, splitWeights=(1, 1, 0), seed=0, durationSeconds=3.0)
        cls.pretrainManifest = ReadManifest(splits.PretrainManifest)
        cls.finetuneManifest = ReadManifest(splits.FinetuneManifest)

    @classmethod
    def tearDownClass(cls):
        cls._tmp.cleanup()

    def _SslConfig(self, **overrides) -> SslConfig:
        values = dict(epochs=2, batch_size=2, excerpt_length=LENGTH, seed=3, workers=1)
        values.update(overrides)
        return SslConfig(**values)

    def _FinetuneConfig(self, **overrides) -> FinetuneConfig:
        values = dict(epochs=2, batch_size=2, excerpt_length=LENGTH, seed=3, workers=1)
        values.update(overrides)
        return FinetuneConfig(**values)

#endregion


#region 预训练

class TestPretrain(TestTrainingBase):
    """自监督预训练"""

    def test_Pretrain_相同配置检查点逐字节相同(self):
        first = Pretrain(self.pretrainManifest, self._SslConfig(), outPath=self.root / "a.ckpt")
        second = Pretrain(self.pretrainManifest, self._SslConfig(), outPath=self.root / "b.ckpt")
        self.assertEqual(first.CheckpointPath.read_bytes(), second.CheckpointPath.read_bytes())

    def test_Pretrain_线程数不影响权重(self):
        one = Pretrain(self.pretrainManifest, self._SslConfig(workers=1)).Network.NamedTensors()
        two = Pretrain(self.pretrainManifest, self._SslConfig(workers=2)).Network.NamedTensors()
        for name, value in one.items():
            np.testing.assert_array_equal(two[name], value, err_msg=name)

    def test_Pretrain_记录与元数据(self):
        logPath = self.root / "pretrain.log.jsonl"
        result = Pretrain(self.pretrainManifest, self._SslConfig(), outPath=self.root / "c.ckpt", logPath=logPath)
        self.assertEqual(len(result.Monitor.Records), 2)
        lines = [json.loads(line) for line in logPath.read_text(encoding='utf-8').splitlines()]
        self.assertEqual([line['epoch'] for line in lines], [1, 2])
        for line in lines:
            self.assertTrue(np.isfinite(line['loss_mean']))
            self.assertIn('rss_mb', line)
        header = ReadHeader(result.CheckpointPath)
        self.assertEqual(header.Phase, 'pretrain')
        self.assertEqual(header.Metadata['config']['r_p'], 0.2)
        self.assertIn('pretrain', header.Metadata['corpora'])
        self.assertIn(header.Metadata['verdict'], [v.value for v in CollapseVerdict])

    def test_Pretrain_更新编码器与投影头但不更新分类头(self):
        initial = TempoNetwork(seed=3).NamedTensors()
        trained = Pretrain(self.pretrainManifest, self._SslConfig(epochs=1)).Network.NamedTensors()
        self.assertFalse(np.array_equal(initial['projection.linear.weight'], trained['projection.linear.weight']))
        self.assertFalse(np.array_equal(initial['encoder.tcn0.conv.weight'], trained['encoder.tcn0.conv.weight']))
        np.testing.assert_array_equal(initial['classifier.linear.weight'], trained['classifier.linear.weight'])

    def test_Pretrain_零轮等于初始化(self):
        result = Pretrain(self.pretrainManifest, self._SslConfig(epochs=0))
        initial = TempoNetwork(seed=3).NamedTensors()
        for name, value in result.Network.NamedTensors().items():
            np.testing.assert_array_equal(value, initial[name], err_msg=name)
        self.assertEqual(result.Monitor.Verdict(), CollapseVerdict.INCONCLUSIVE)

    def test_Pretrain_启动日志含线程数与系统信息(self):
        with self.assertLogs('src.training.ssl', level='INFO') as logs:
            Pretrain(self.pretrainManifest, self._SslConfig(epochs=0))
        output = "\n".join(logs.output)
        self.assertIn("workers=1", output)
        self.assertIn("physical_cores", output)

    def test_Pretrain_空语料报错(self):
        empty = Manifest(self.root / "empty.csv", [], False)
        with self.assertRaises(EmptyCorpusError):
            Pretrain(empty, self._SslConfig())

    def test_Pretrain_非有限损失携带片段标识(self):
        def NanLoss(*args, **kwargs):
            return LossResult(Tensor(np.float32(np.nan), requiresGrad=True))

        with patch('src.training.ssl.PairLoss', side_effect=NanLoss):
            with self.assertRaises(NumericalFailure) as context:
                Pretrain(self.pretrainManifest, self._SslConfig(epochs=1))
        diagnostic = context.exception.Diagnostic()
        self.assertEqual(diagnostic['epoch'], 1)
        self.assertEqual(diagnostic['batch_index'], 0)
        self.assertEqual(len(diagnostic['batch_ids']), 2)

#endregion


#region 坍缩监视

class TestCollapseMonitor(unittest.TestCase):
    """坍缩判定"""

    def _Monitor(self, zAbs, losses) -> CollapseMonitor:
        monitor = CollapseMonitor()
        for epoch, (z, loss) in enumerate(zip(zAbs, losses), start=1):
            monitor.Record(EpochRecord(epoch=epoch, loss_mean=loss, z_abs_mean=z))
        return monitor

    def test_Verdict_早期跌破阈值为坍缩(self):
        monitor = self._Monitor([0.5, 0.05, 0.004, 0.001], [1.0, 0.5, 0.1, 0.0])
        self.assertEqual(monitor.Verdict(), CollapseVerdict.COLLAPSED)

    def test_Verdict_稳定(self):
        monitor = self._Monitor([0.5, 0.6, 0.7], [1.0, 0.5, 0.2])
        self.assertEqual(monitor.Verdict(), CollapseVerdict.STABLE)

    def test_Verdict_其余为不确定(self):
        self.assertEqual(self._Monitor([0.5, 0.6], [1.0, 0.9]).Verdict(), CollapseVerdict.INCONCLUSIVE)
        self.assertEqual(CollapseMonitor().Verdict(), CollapseVerdict.INCONCLUSIVE)
        late = self._Monitor([0.5] * 5 + [0.001], [1.0] * 5 + [0.1])
        self.assertEqual(late.Verdict(), CollapseVerdict.INCONCLUSIVE)


class TestCollapseSmallScale(unittest.TestCase):
    """24 个短片段、截断编码器上三种损失的 |z| 走向"""

    EPOCHS = 8

    @classmethod
    def setUpClass(cls):
        cls._tmp = tempfile.TemporaryDirectory()
        splits = MakeCorpus(Path(cls._tmp.name) / "corpus", n=24, splitWeights=(1, 0, 0), seed=5,
                            durationSeconds=3.0)
        manifest = ReadManifest(splits.PretrainManifest)
        cls.curves = {}
        for variant in LossVariant:
            cfg = SslConfig(loss_variant=variant.value, epochs=cls.EPOCHS, batch_size=2,
                            excerpt_length=LENGTH, seed=5, workers=1)
            result = Pretrain(manifest, cfg, TempoNetwork(seed=5, nTcnLayers=2))
            cls.curves[variant] = result.Monitor.ZAbsCurve

    @classmethod
    def tearDownClass(cls):
        cls._tmp.cleanup()

    def test_对照损失的z持续缩小(self):
        for variant in (LossVariant.PRIME, LossVariant.DOUBLE_PRIME):
            curve = self.curves[variant]
            self.assertEqual(len(curve), self.EPOCHS)
            self.assertLess(curve[-1], 0.5 * curve[0], (variant, curve))

    def test_比值损失的z不缩向零(self):
        curve = self.curves[LossVariant.MAIN]
        self.assertGreater(min(curve), 0.5 * curve[0], curve)

    def test_对照损失的z远低于比值损失(self):
        main = self.curves[LossVariant.MAIN][-1]
        for variant in (LossVariant.PRIME, LossVariant.DOUBLE_PRIME):
            self.assertLess(self.curves[variant][-1], 0.25 * main, (variant, self.curves))

#endregion


#region 微调

class TestFinetune(TestTrainingBase):
    """线性探针微调"""

    def test_Finetune_编码器逐字节不变(self):
        network = TempoNetwork(seed=0)
        before = network.Encoder.NamedTensors()
        classifierBefore = network.Classifier.NamedTensors()
        result = Finetune(network, self.finetuneManifest, self._FinetuneConfig(), outPath=self.root / "ft.ckpt")
        after = result.Network.Encoder.NamedTensors()
        for name, value in before.items():
            np.testing.assert_array_equal(after[name], value, err_msg=name)
        self.assertFalse(np.array_equal(classifierBefore['linear.weight'],
                                        result.Network.Classifier.NamedTensors()['linear.weight']))
        self.assertEqual(len(result.History), 2)
        self.assertEqual(ReadHeader(result.CheckpointPath).Phase, 'finetune')

    def test_Finetune_记录父检查点配置与语料(self):
        parent = {'config': {'r_p': 0.3}, 'corpora': {'pretrain': {'manifest_sha256': 'x', 'clip_digests': []}}}
        result = Finetune(TempoNetwork(seed=0), self.finetuneManifest, self._FinetuneConfig(r_f=0.0, epochs=1),
                          parentMetadata=parent)
        self.assertEqual(result.Metadata['pretrain_config'], {'r_p': 0.3})
        self.assertEqual(set(result.Metadata['corpora']), {'pretrain', 'finetune'})

    def test_Finetune_可复现(self):
        cfg = self._FinetuneConfig()
        a = Finetune(TempoNetwork(seed=0), self.finetuneManifest, cfg).Network.Classifier.NamedTensors()
        b = Finetune(TempoNetwork(seed=0), self.finetuneManifest, cfg).Network.Classifier.NamedTensors()
        np.testing.assert_array_equal(a['linear.weight'], b['linear.weight'])

    def test_Finetune_无标注清单报错(self):
        with self.assertRaises(LabelRangeError):
            Finetune(TempoNetwork(seed=0), self.pretrainManifest, self._FinetuneConfig())

    def test_Finetune_空清单报错(self):
        with self.assertRaises(EmptyCorpusError):
            Finetune(TempoNetwork(seed=0), Manifest(self.root / "none.csv", [], True), self._FinetuneConfig())

    def test_FitClassifierHead_可分嵌入上损失下降(self):
        network = TempoNetwork(seed=0)
        rng = np.random.default_rng(0)
        embeddings = rng.normal(size=(32, 16)).astype(np.float32)
        bins = np.where(embeddings[:, 0] > 0, 150, 80)
        targets = np.zeros((32, 300), dtype=np.float32)
        targets[np.arange(32), bins] = 1.0
        history = FitClassifierHead(network.Classifier, embeddings, targets, epochs=30, learningRate=0.01)
        self.assertLess(history[-1], history[0])

#endregion


if __name__ == '__main__':
    unittest.main()
