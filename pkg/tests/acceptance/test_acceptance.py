# -*- coding: utf-8 -*-
"""
合成语料上的验收实验
耗时较长，只在 TEMPO_RUN_SLOW=1 时运行
"""

import os
import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from src.evaluation.evaluate import Evaluate, EvaluateOracle, PseudoTempoDiagnostics
from src.evaluation.interfaces import EvaluateConfig
from src.model.network import TempoNetwork
from src.persist.manifest import ReadManifest
from src.synthdata.corpus import MakeCorpus
from src.training.finetune import Finetune
from src.training.interfaces import CollapseVerdict, FinetuneConfig, LossVariant, SslConfig
from src.training.ssl import Pretrain


RUN_SLOW = os.environ.get("TEMPO_RUN_SLOW") == "1"


@pytest.mark.slow
@unittest.skipUnless(RUN_SLOW, "慢速测试，设置 TEMPO_RUN_SLOW=1 运行")
class TestCollapseReproduction(unittest.TestCase):
    """200 个片段上三种损失变体的坍缩对照"""

    @classmethod
    def setUpClass(cls):
        cls._tmp = tempfile.TemporaryDirectory()
        splits = MakeCorpus(Path(cls._tmp.name) / "corpus", n=200, splitWeights=(1, 0, 0), seed=11, workers=4)
        cls.manifest = ReadManifest(splits.PretrainManifest)
        cls.monitors = {}
        cls.checkpoints = {}
        for variant in LossVariant:
            cfg = SslConfig(loss_variant=variant.value, epochs=20, seed=11, workers=4)
            path = Path(cls._tmp.name) / f"{variant.value}.ckpt"
            result = Pretrain(cls.manifest, cfg, TempoNetwork(11), outPath=path)
            cls.monitors[variant] = result.Monitor
            cls.checkpoints[variant] = path

    @classmethod
    def tearDownClass(cls):
        cls._tmp.cleanup()

    def test_对照损失坍缩(self):
        for variant in (LossVariant.PRIME, LossVariant.DOUBLE_PRIME):
            monitor = self.monitors[variant]
            self.assertTrue(any(z < 0.01 for z in monitor.ZAbsCurve[:5]), variant)
            self.assertEqual(monitor.Verdict(), CollapseVerdict.COLLAPSED)

    def test_比值损失稳定(self):
        monitor = self.monitors[LossVariant.MAIN]
        self.assertTrue(all(z > 0.1 for z in monitor.ZAbsCurve))
        self.assertLess(monitor.Records[-1].loss_mean, 0.25 * monitor.Records[0].loss_mean)
        self.assertEqual(monitor.Verdict(), CollapseVerdict.STABLE)

    def test_相同种子重跑逐字节相同(self):
        cfg = SslConfig(loss_variant="main", epochs=20, seed=11, workers=2)
        path = Path(self._tmp.name) / "rerun.ckpt"
        Pretrain(self.manifest, cfg, TempoNetwork(11), outPath=path, configEcho=SslConfig(
            loss_variant="main", epochs=20, seed=11, workers=4).Echo())
        self.assertEqual(path.read_bytes(), self.checkpoints[LossVariant.MAIN].read_bytes())


@pytest.mark.slow
@unittest.skipUnless(RUN_SLOW, "慢速测试，设置 TEMPO_RUN_SLOW=1 运行")
class TestEndToEndBenchmark(unittest.TestCase):
    """2000 / 500 / 200 的完整合成基准"""

    @classmethod
    def setUpClass(cls):
        cls._tmp = tempfile.TemporaryDirectory()
        splits = MakeCorpus(Path(cls._tmp.name) / "corpus", n=2700, seed=0, workers=4)
        cls.pretrain = ReadManifest(splits.PretrainManifest)
        cls.finetune = ReadManifest(splits.FinetuneManifest)
        cls.eval = ReadManifest(splits.EvalManifest)
        cls.pretrained = Pretrain(cls.pretrain, SslConfig(r_p=0.2, epochs=20, seed=0))

    @classmethod
    def tearDownClass(cls):
        cls._tmp.cleanup()

    def test_预言机先决条件(self):
        self.assertGreaterEqual(EvaluateOracle(self.eval).acc1, 0.95)

    def test_仅预训练的伪节奏质量(self):
        report = PseudoTempoDiagnostics(self.pretrained.Network, self.eval)
        self.assertFalse(report.degenerate)
        self.assertGreaterEqual(abs(report.spearman_rho), 0.8)
        for alpha, error in report.median_equivariance_error.items():
            self.assertLess(error, 0.05, alpha)

    def test_微调后准确率(self):
        network = TempoNetwork(0)
        network.LoadNamedTensors(self.pretrained.Network.NamedTensors())
        result = Finetune(network, self.finetune, FinetuneConfig(r_f=0.2, epochs=100, seed=0),
                          parentMetadata=self.pretrained.Metadata)
        report = Evaluate(result.Network, result.Metadata, self.eval, EvaluateConfig())
        self.assertGreaterEqual(report.acc1, 0.75)
        self.assertGreaterEqual(report.acc2, 0.90)
        self.assertEqual(report.n_items, 200)


if __name__ == '__main__':
    unittest.main()
