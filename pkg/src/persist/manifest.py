# -*- coding: utf-8 -*-
"""
语料清单读写与语料身份
清单为 CSV，表头 `path,bpm`（有标注）或 `path`（无标注），路径相对清单文件
"""

import csv
import hashlib
import logging
import os
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from .interfaces import CorpusIdentity, Manifest, ManifestEntry, ManifestError, PersistError


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CLIP_DIGEST_LENGTH = 16
_READ_CHUNK = 1 << 20


#region 清单读写

def ReadManifest(path: PathLike) -> Manifest:
    """读取清单，路径解析为相对清单所在目录的绝对路径

    Raises:
        ManifestError: 表头不符、bpm 无法解析或清单为空
    """
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8', newline='') as handle:
            rows = list(csv.reader(handle))
    except OSError as e:
        raise ManifestError(f"无法读取清单 {path}: {e}")
    if not rows:
        raise ManifestError(f"清单为空: {path}")

    header = [cell.strip() for cell in rows[0]]
    if header == ['path', 'bpm']:
        labeled = True
    elif header == ['path']:
        labeled = False
    else:
        raise ManifestError(f"清单 {path} 表头必须为 'path,bpm' 或 'path'，当前 {','.join(header)}")

    base = path.parent
    entries: List[ManifestEntry] = []
    for lineNumber, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ManifestError(f"清单 {path} 第 {lineNumber} 行列数不符")
        bpm: Optional[float] = None
        if labeled:
            try:
                bpm = float(row[1])
            except ValueError:
                raise ManifestError(f"清单 {path} 第 {lineNumber} 行 bpm 无法解析: {row[1]!r}")
        entries.append(ManifestEntry((base / row[0].strip()).resolve(), bpm))
    return Manifest(path.resolve(), entries, labeled)


def WriteManifest(path: PathLike, entries: Sequence[ManifestEntry], labeled: bool) -> Path:
    """写出清单，路径写成相对清单目录的 POSIX 形式"""
    path = Path(path)
    base = path.parent.resolve()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(['path', 'bpm'] if labeled else ['path'])
            for entry in entries:
                relative = Path(os.path.relpath(Path(entry.Path).resolve(), base)).as_posix()
                if labeled:
                    if entry.Bpm is None:
                        raise ManifestError(f"有标注清单中的 {relative} 缺少 bpm")
                    writer.writerow([relative, repr(float(entry.Bpm))])
                else:
                    writer.writerow([relative])
    except OSError as e:
        raise PersistError(f"写入清单失败 {path}: {e}")
    return path

#endregion


#region 语料身份

def _FileSha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as handle:
        for chunk in iter(lambda: handle.read(_READ_CHUNK), b''):
            digest.update(chunk)
    return digest.hexdigest()


def ManifestDigest(path: PathLike) -> str:
    """清单文件字节的 SHA-256"""
    try:
        return _FileSha256(Path(path))
    except OSError as e:
        raise ManifestError(f"无法读取清单 {path}: {e}")


def ClipDigest(path: PathLike) -> Optional[str]:
    """片段文件内容摘要（SHA-256 前 16 位十六进制），文件不可读时返回 None"""
    try:
        return _FileSha256(Path(path))[:CLIP_DIGEST_LENGTH]
    except OSError as e:
        logger.warning("无法计算片段摘要 %s: %s", path, e)
        return None


def ComputeCorpusIdentity(manifest: Manifest) -> CorpusIdentity:
    """计算语料身份，用于检查训练与评估语料是否重叠"""
    digests = [ClipDigest(entry.Path) for entry in manifest.Entries]
    return CorpusIdentity(ManifestDigest(manifest.Path), sorted(d for d in digests if d is not None))


def FindOverlap(candidate: CorpusIdentity, seen: Iterable[CorpusIdentity]) -> List[str]:
    """返回与已见语料共享的片段摘要；清单字节相同时返回全部摘要"""
    shared = set()
    candidateDigests = set(candidate.ClipDigests)
    for identity in seen:
        if identity.ManifestSha256 == candidate.ManifestSha256:
            shared |= candidateDigests or {identity.ManifestSha256}
        shared |= candidateDigests & set(identity.ClipDigests)
    return sorted(shared)

#endregion
