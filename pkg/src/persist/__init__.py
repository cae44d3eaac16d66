# -*- coding: utf-8 -*-
"""
持久化模块

提供运行产物的序列化：
- 位精确的检查点容器
- 语料清单读写
- 语料身份与重叠检测
"""

# 数据结构与异常
from .interfaces import (
    Checkpoint, CheckpointHeader, TensorEntry, Manifest, ManifestEntry, CorpusIdentity,
    PersistError, CheckpointCorruptError, FingerprintMismatchError, FormatVersionError, ManifestError,
    CHECKPOINT_FORMAT_VERSION
)

# 检查点
from .checkpoint import EncodeCheckpoint, SaveCheckpoint, LoadCheckpoint, ReadHeader

# 清单
from .manifest import (
    ReadManifest, WriteManifest, ManifestDigest, ClipDigest, ComputeCorpusIdentity, FindOverlap
)

__all__ = [
    'Checkpoint', 'CheckpointHeader', 'TensorEntry', 'Manifest', 'ManifestEntry', 'CorpusIdentity',
    'PersistError', 'CheckpointCorruptError', 'FingerprintMismatchError', 'FormatVersionError',
    'ManifestError', 'CHECKPOINT_FORMAT_VERSION',
    'EncodeCheckpoint', 'SaveCheckpoint', 'LoadCheckpoint', 'ReadHeader',
    'ReadManifest', 'WriteManifest', 'ManifestDigest', 'ClipDigest', 'ComputeCorpusIdentity',
    'FindOverlap'
]
