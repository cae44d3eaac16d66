# -*- coding: utf-8 -*-
"""
持久化模块接口定义
定义检查点、语料清单的数据结构与异常类
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


#region 格式常量

CHECKPOINT_FORMAT_VERSION = 1
CHECKPOINT_ALIGNMENT = 64
HEADER_LENGTH_BYTES = 8
TENSOR_DTYPE = '<f4'

#endregion


#region 数据结构定义

@dataclass(frozen=True)
class TensorEntry:
    """张量目录项，Offset 相对数据区起点"""
    Name: str
    Shape: Tuple[int, ...]
    Offset: int
    NumBytes: int
    Sha256: str

    def ToJson(self) -> Dict[str, Any]:
        return {
            'name': self.Name,
            'shape': list(self.Shape),
            'dtype': TENSOR_DTYPE,
            'offset': self.Offset,
            'nbytes': self.NumBytes,
            'sha256': self.Sha256,
        }


@dataclass
class CheckpointHeader:
    """检查点头部：无需读取张量数据即可查看"""
    FormatVersion: int
    Fingerprint: str
    Metadata: Dict[str, Any]
    Tensors: List[TensorEntry]
    DataStart: int

    @property
    def Phase(self) -> Optional[str]:
        return self.Metadata.get('phase')

    def TensorNames(self) -> List[str]:
        return [entry.Name for entry in self.Tensors]


@dataclass
class Checkpoint:
    """完整检查点：具名张量、架构指纹与训练元数据"""
    Tensors: Dict[str, np.ndarray]
    Fingerprint: str
    Metadata: Dict[str, Any] = field(default_factory=dict)
    FormatVersion: int = CHECKPOINT_FORMAT_VERSION

    def Subset(self, prefix: str) -> Dict[str, np.ndarray]:
        """取出以 prefix 开头的张量，键中去掉前缀"""
        return {name[len(prefix):]: value for name, value in self.Tensors.items()
                if name.startswith(prefix)}


@dataclass(frozen=True)
class ManifestEntry:
    """清单中的一条：绝对路径与可选节奏标注"""
    Path: Path
    Bpm: Optional[float] = None

    @property
    def ClipId(self) -> str:
        return self.Path.stem


@dataclass
class Manifest:
    """语料清单，CSV 表头为 `path,bpm` 或 `path`"""
    Path: Path
    Entries: List[ManifestEntry]
    Labeled: bool

    def __len__(self) -> int:
        return len(self.Entries)


@dataclass
class CorpusIdentity:
    """语料身份：清单字节哈希与每个片段的内容摘要"""
    ManifestSha256: str
    ClipDigests: List[str]

    def ToJson(self) -> Dict[str, Any]:
        return {'manifest_sha256': self.ManifestSha256, 'clip_digests': sorted(self.ClipDigests)}

    @staticmethod
    def FromJson(data: Dict[str, Any]) -> 'CorpusIdentity':
        return CorpusIdentity(data['manifest_sha256'], list(data.get('clip_digests', [])))

#endregion


#region 异常类

class PersistError(Exception):
    """持久化异常基类"""

    def __init__(self, message: str, error_code: Optional[int] = None):
        super().__init__(message)
        self._error_code = error_code

    @property
    def ErrorCode(self) -> Optional[int]:
        return self._error_code


class CheckpointCorruptError(PersistError):
    """检查点截断或内容损坏"""
    pass


class FingerprintMismatchError(PersistError):
    """架构指纹不一致"""
    pass


class FormatVersionError(PersistError):
    """不支持的格式版本"""
    pass


class ManifestError(PersistError):
    """清单格式错误"""
    pass

#endregion
