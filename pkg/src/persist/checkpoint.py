# -*- coding: utf-8 -*-
"""
检查点读写

文件布局（全部小端）：
  [0, 8)            uint64 头部长度 H
  [8, 8 + H)        UTF-8 JSON 头部，键排序，以空格填充使 8 + H 为 64 的倍数
  [8 + H, ...)      数据区，各张量 '<f4' 行优先字节，偏移相对数据区起点且 64 字节对齐

同一状态总是写出相同字节。
"""

import hashlib
import json
import logging
import os
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from .interfaces import (
    Checkpoint, CheckpointHeader, TensorEntry,
    CheckpointCorruptError, FingerprintMismatchError, FormatVersionError, PersistError,
    CHECKPOINT_ALIGNMENT, CHECKPOINT_FORMAT_VERSION, HEADER_LENGTH_BYTES, TENSOR_DTYPE
)


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _AlignUp(value: int) -> int:
    return (value + CHECKPOINT_ALIGNMENT - 1) // CHECKPOINT_ALIGNMENT * CHECKPOINT_ALIGNMENT


def _DumpJson(data: Dict[str, Any]) -> bytes:
    return json.dumps(data, sort_keys=True, separators=(',', ':'), ensure_ascii=True,
                      allow_nan=False).encode('utf-8')


#region 写入

def EncodeCheckpoint(checkpoint: Checkpoint) -> bytes:
    """把检查点编码为字节串"""
    entries = []
    payloads = []
    offset = 0
    for name in sorted(checkpoint.Tensors):
        array = np.ascontiguousarray(checkpoint.Tensors[name], dtype=TENSOR_DTYPE)
        payload = array.tobytes(order='C')
        entries.append(TensorEntry(
            Name=name,
            Shape=tuple(int(d) for d in array.shape),
            Offset=offset,
            NumBytes=len(payload),
            Sha256=hashlib.sha256(payload).hexdigest(),
        ))
        payloads.append((offset, payload))
        offset = _AlignUp(offset + len(payload))

    header = _DumpJson({
        'format_version': checkpoint.FormatVersion,
        'fingerprint': checkpoint.Fingerprint,
        'metadata': checkpoint.Metadata,
        'tensors': [entry.ToJson() for entry in entries],
    })
    headerLength = _AlignUp(HEADER_LENGTH_BYTES + len(header)) - HEADER_LENGTH_BYTES
    header = header + b' ' * (headerLength - len(header))

    data = bytearray(offset)
    for start, payload in payloads:
        data[start:start + len(payload)] = payload
    return struct.pack('<Q', headerLength) + header + bytes(data)


def SaveCheckpoint(checkpoint: Checkpoint, path: PathLike) -> Path:
    """写入检查点（先写临时文件再替换）

    Raises:
        PersistError: 写入失败，消息中带路径
    """
    path = Path(path)
    blob = EncodeCheckpoint(checkpoint)
    temporary = path.with_name(path.name + '.tmp')
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with open(temporary, 'wb') as handle:
            handle.write(blob)
        os.replace(temporary, path)
    except OSError as e:
        raise PersistError(f"写入检查点失败 {path}: {e}")
    logger.info("检查点已保存: %s (%d 个张量, %d 字节)", path, len(checkpoint.Tensors), len(blob))
    return path

#endregion


#region 读取

def _ParseHeader(raw: bytes, path: Path, fileSize: int) -> CheckpointHeader:
    try:
        data = json.loads(raw.decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointCorruptError(f"检查点头部无法解析 {path}: {e}")
    try:
        version = int(data['format_version'])
        if version != CHECKPOINT_FORMAT_VERSION:
            raise FormatVersionError(
                f"检查点 {path} 的格式版本 {version} 不受支持（当前 {CHECKPOINT_FORMAT_VERSION}）"
            )
        entries = []
        for item in data['tensors']:
            if item.get('dtype') != TENSOR_DTYPE:
                raise CheckpointCorruptError(f"张量 {item.get('name')} 的类型 {item.get('dtype')} 不受支持")
            entries.append(TensorEntry(
                Name=item['name'],
                Shape=tuple(int(d) for d in item['shape']),
                Offset=int(item['offset']),
                NumBytes=int(item['nbytes']),
                Sha256=item['sha256'],
            ))
        header = CheckpointHeader(
            FormatVersion=version,
            Fingerprint=data['fingerprint'],
            Metadata=data['metadata'],
            Tensors=entries,
            DataStart=HEADER_LENGTH_BYTES + len(raw),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointCorruptError(f"检查点头部字段缺失或非法 {path}: {e}")

    for entry in header.Tensors:
        expected = int(np.prod(entry.Shape, dtype=np.int64)) * 4
        if entry.NumBytes != expected:
            raise CheckpointCorruptError(f"张量 {entry.Name} 的字节数 {entry.NumBytes} 与形状 {entry.Shape} 不符")
        if entry.Offset % CHECKPOINT_ALIGNMENT != 0:
            raise CheckpointCorruptError(f"张量 {entry.Name} 的偏移 {entry.Offset} 未按 64 字节对齐")
        if header.DataStart + entry.Offset + entry.NumBytes > fileSize:
            raise CheckpointCorruptError(f"检查点 {path} 被截断：张量 {entry.Name} 超出文件末尾")
    return header


def ReadHeader(path: PathLike) -> CheckpointHeader:
    """只读取头部，不读取张量数据"""
    path = Path(path)
    try:
        fileSize = path.stat().st_size
        with open(path, 'rb') as handle:
            prefix = handle.read(HEADER_LENGTH_BYTES)
            if len(prefix) < HEADER_LENGTH_BYTES:
                raise CheckpointCorruptError(f"检查点 {path} 过短，缺少头部长度")
            (headerLength,) = struct.unpack('<Q', prefix)
            if HEADER_LENGTH_BYTES + headerLength > fileSize:
                raise CheckpointCorruptError(f"检查点 {path} 被截断：头部长度 {headerLength} 超出文件")
            raw = handle.read(headerLength)
    except OSError as e:
        raise PersistError(f"读取检查点失败 {path}: {e}")
    return _ParseHeader(raw, path, fileSize)


def LoadCheckpoint(path: PathLike, expectedFingerprint: Optional[str] = None) -> Checkpoint:
    """读取并校验检查点

    Raises:
        CheckpointCorruptError: 截断或摘要不符
        FormatVersionError: 版本不符
        FingerprintMismatchError: 与 expectedFingerprint 不符
    """
    path = Path(path)
    header = ReadHeader(path)
    if expectedFingerprint is not None and header.Fingerprint != expectedFingerprint:
        raise FingerprintMismatchError(
            f"检查点 {path} 的架构指纹 {header.Fingerprint[:12]} 与当前模型 {expectedFingerprint[:12]} 不一致"
        )
    try:
        with open(path, 'rb') as handle:
            handle.seek(header.DataStart)
            data = handle.read()
    except OSError as e:
        raise PersistError(f"读取检查点失败 {path}: {e}")

    tensors: Dict[str, np.ndarray] = {}
    for entry in header.Tensors:
        payload = data[entry.Offset:entry.Offset + entry.NumBytes]
        if len(payload) != entry.NumBytes:
            raise CheckpointCorruptError(f"检查点 {path} 被截断：张量 {entry.Name}")
        if hashlib.sha256(payload).hexdigest() != entry.Sha256:
            raise CheckpointCorruptError(f"检查点 {path} 中张量 {entry.Name} 的摘要不符")
        tensors[entry.Name] = np.frombuffer(payload, dtype=TENSOR_DTYPE).reshape(entry.Shape).astype(np.float32)
    return Checkpoint(tensors, header.Fingerprint, header.Metadata, header.FormatVersion)

#endregion
