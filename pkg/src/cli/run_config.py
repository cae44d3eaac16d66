# -*- coding: utf-8 -*-
"""
运行配置管理
默认值 < key=value 配置文件 < 命令行参数，未知键报错，解析结果回显到所有产物
"""

import logging
from dataclasses import asdict, fields, is_dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Type, Union

from .interfaces import (
    CollapseDemoConfig, EmbedConfig, EvaluateCommandConfig, FinetuneCommandConfig, OracleConfig,
    PretrainCommandConfig, SweepConfig, SynthConfig, UsageError
)


logger = logging.getLogger(__name__)

_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}


class RunConfigManager:
    """命令配置管理器"""

    def __init__(self):
        self._profiles: Dict[str, Type] = {}
        self._InitializeProfiles()

    #region 配置注册

    def _InitializeProfiles(self) -> None:
        """注册每个命令的配置结构"""
        self._profiles["synth-data"] = SynthConfig
        self._profiles["pretrain"] = PretrainCommandConfig
        self._profiles["finetune"] = FinetuneCommandConfig
        self._profiles["evaluate"] = EvaluateCommandConfig
        self._profiles["embed"] = EmbedConfig
        self._profiles["collapse-demo"] = CollapseDemoConfig
        self._profiles["sweep"] = SweepConfig
        self._profiles["oracle"] = OracleConfig

    def GetProfile(self, command: str) -> Type:
        if command not in self._profiles:
            raise UsageError(f"未知命令: {command}")
        return self._profiles[command]

    def GetAvailableCommands(self) -> list:
        return list(self._profiles.keys())

    def GetDefaults(self, command: str) -> Dict[str, Any]:
        return asdict(self.GetProfile(command)())

    #endregion

    #region 配置文件

    @staticmethod
    def LoadConfigFile(path: Union[str, Path]) -> Dict[str, str]:
        """读取扁平 key=value 文件，# 开头为注释

        Raises:
            UsageError: 文件不可读或行格式错误
        """
        path = Path(path)
        try:
            lines = path.read_text(encoding='utf-8').splitlines()
        except OSError as e:
            raise UsageError(f"无法读取配置文件 {path}: {e}")
        values: Dict[str, str] = {}
        for lineNumber, line in enumerate(lines, start=1):
            text = line.strip()
            if not text or text.startswith('#'):
                continue
            if '=' not in text:
                raise UsageError(f"配置文件 {path} 第 {lineNumber} 行缺少 '=': {line!r}")
            key, value = text.split('=', 1)
            values[key.strip().replace('-', '_')] = value.strip()
        return values

    #endregion

    #region 解析

    @staticmethod
    def _Coerce(name: str, fieldType: Any, value: Any) -> Any:
        if isinstance(value, str):
            text = value.strip()
            if fieldType is bool:
                lowered = text.lower()
                if lowered in _TRUE:
                    return True
                if lowered in _FALSE:
                    return False
                raise UsageError(f"配置项 {name} 需要布尔值: {value!r}")
            try:
                if fieldType is int:
                    return int(text)
                if fieldType is float:
                    return float(text)
            except ValueError:
                raise UsageError(f"配置项 {name} 需要 {fieldType.__name__}: {value!r}")
            return text
        if fieldType is float and isinstance(value, int) and not isinstance(value, bool):
            return float(value)
        return value

    def Resolve(self, command: str, fileValues: Optional[Dict[str, Any]] = None,
                flagValues: Optional[Dict[str, Any]] = None):
        """合并三层配置并构造配置对象

        Raises:
            UsageError: 未知键、类型错误或取值非法
        """
        profile = self.GetProfile(command)
        fieldTypes = {f.name: f.type for f in fields(profile)}
        merged: Dict[str, Any] = {}
        for layer, source in (("配置文件", fileValues or {}), ("命令行", flagValues or {})):
            for key, value in source.items():
                if key not in fieldTypes:
                    raise UsageError(f"{layer}中存在命令 {command} 不认识的配置项: {key}")
                merged[key] = self._Coerce(key, fieldTypes[key], value)
        try:
            config = profile(**merged)
        except ValueError as e:
            raise UsageError(f"{command} 配置非法: {e}")
        logger.info("%s 解析后的配置: %s", command, self.Echo(command, config))
        return config

    @staticmethod
    def Echo(command: str, config) -> Dict[str, Any]:
        """可嵌入产物的完整配置回显"""
        data = asdict(config) if is_dataclass(config) else dict(config)
        data['command'] = command
        return data

    #endregion


# 全局配置管理器
run_config_manager = RunConfigManager()
