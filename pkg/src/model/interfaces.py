# -*- coding: utf-8 -*-
"""
模型模块接口定义
定义网络尺寸常量、层规格与异常类
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple


#region 网络常量

N_MEL_BINS = 81
N_FILTERS = 16
EMBEDDING_DIM = 16
N_TCN_LAYERS = 8
TCN_KERNEL = 5
N_TEMPO_CLASSES = 300
MIN_FRAMES = 256
DROPOUT_RATE = 0.1
BN_MOMENTUM = 0.9
BN_EPSILON = 1e-5
MAX_PARAMETERS = 100_000

#endregion


#region 数据结构定义

@dataclass(frozen=True)
class LayerSpec:
    """层规格，所有层规格的 JSON 列表决定架构指纹"""
    Kind: str
    Params: Tuple[Tuple[str, Any], ...] = field(default_factory=tuple)

    @staticmethod
    def Of(kind: str, **params) -> 'LayerSpec':
        return LayerSpec(kind, tuple(sorted(params.items())))

    def ToJson(self) -> Dict[str, Any]:
        data = {'kind': self.Kind}
        data.update({key: list(value) if isinstance(value, tuple) else value for key, value in self.Params})
        return data

#endregion


#region 异常类

class ModelError(Exception):
    """模型异常基类"""

    def __init__(self, message: str, error_code: Optional[int] = None):
        super().__init__(message)
        self._error_code = error_code

    @property
    def ErrorCode(self) -> Optional[int]:
        return self._error_code


class InputTooShortError(ModelError):
    """输入帧数少于感受野下限"""

    def __init__(self, frames: int, minimum: int = MIN_FRAMES):
        super().__init__(f"输入只有 {frames} 帧，编码器至少需要 {minimum} 帧")
        self.Frames = frames
        self.Minimum = minimum

#endregion
