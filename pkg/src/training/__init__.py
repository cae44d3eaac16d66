# -*- coding: utf-8 -*-
"""
训练模块

提供两阶段训练：
- 等变自监督预训练与坍缩监视
- 冻结编码器的线性探针微调
- 并行样本生产与资源监视
"""

# 配置、记录与异常
from .interfaces import (
    LossVariant, CollapseVerdict, SslConfig, FinetuneConfig, EpochRecord, CollapseMonitor,
    SmoothedTarget, IResourceMonitor,
    TrainingError, EmptyCorpusError, LabelRangeError, NumericalFailure
)

# 损失
from .losses import (
    GUARD_THRESHOLD, LossResult, EquivarianceLoss, TrivialLossPrime, TrivialLossDoublePrime,
    PairLoss, SmoothedCrossEntropy
)

# 流水线与资源
from .pipeline import ProducerPool, PreparedPair, PreparePair, PrepareEvalSpectrogram, SampleRng, EpochOrder
from .resources import ResourceMonitor

# 训练
from .ssl import Pretrain, PretrainResult
from .finetune import (
    BpmToTarget, StretchLabeled, FitClassifierHead, Finetune, FinetuneResult, MAX_STRETCH_RETRIES
)

__all__ = [
    'LossVariant', 'CollapseVerdict', 'SslConfig', 'FinetuneConfig', 'EpochRecord', 'CollapseMonitor',
    'SmoothedTarget', 'IResourceMonitor',
    'TrainingError', 'EmptyCorpusError', 'LabelRangeError', 'NumericalFailure',
    'GUARD_THRESHOLD', 'LossResult', 'EquivarianceLoss', 'TrivialLossPrime', 'TrivialLossDoublePrime',
    'PairLoss', 'SmoothedCrossEntropy',
    'ProducerPool', 'PreparedPair', 'PreparePair', 'PrepareEvalSpectrogram', 'SampleRng', 'EpochOrder',
    'ResourceMonitor',
    'Pretrain', 'PretrainResult',
    'BpmToTarget', 'StretchLabeled', 'FitClassifierHead', 'Finetune', 'FinetuneResult',
    'MAX_STRETCH_RETRIES'
]
