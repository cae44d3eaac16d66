# -*- coding: utf-8 -*-
"""
合成数据模块

提供带精确节奏标注的合成语料：
- 点击、鼓组、重音 4/4 节奏型
- 自相关节奏预言机
- 三份互不相交的语料划分
"""

from .interfaces import SynthPattern, SynthSpec, OracleEstimate, CorpusSplits, SynthError
from .generator import OnsetTimes, Synthesize, Generate
from .oracle import OnsetEnvelope, OracleEstimateTempo, OracleTempo
from .corpus import SplitCounts, ParseSplits, DrawSpec, MakeCorpus, SPLIT_NAMES

__all__ = [
    'SynthPattern', 'SynthSpec', 'OracleEstimate', 'CorpusSplits', 'SynthError',
    'OnsetTimes', 'Synthesize', 'Generate',
    'OnsetEnvelope', 'OracleEstimateTempo', 'OracleTempo',
    'SplitCounts', 'ParseSplits', 'DrawSpec', 'MakeCorpus', 'SPLIT_NAMES'
]
