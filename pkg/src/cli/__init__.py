# -*- coding: utf-8 -*-
"""
命令行模块

提供面向操作者的命令：
- synth-data / pretrain / finetune / evaluate / embed
- collapse-demo / sweep / oracle
- 分层运行配置与日志配置
"""

from .interfaces import (
    ExitCode, SynthConfig, PretrainCommandConfig, FinetuneCommandConfig, EvaluateCommandConfig,
    EmbedConfig, CollapseDemoConfig, SweepConfig, OracleConfig, CliError, UsageError
)
from .run_config import RunConfigManager, run_config_manager
from .logging_setup import ConfigureLogging, JsonLinesFormatter
from .commands import BuildParser, EmbedManifest, Main, COMMANDS

__all__ = [
    'ExitCode', 'SynthConfig', 'PretrainCommandConfig', 'FinetuneCommandConfig', 'EvaluateCommandConfig',
    'EmbedConfig', 'CollapseDemoConfig', 'SweepConfig', 'OracleConfig', 'CliError', 'UsageError',
    'RunConfigManager', 'run_config_manager',
    'ConfigureLogging', 'JsonLinesFormatter',
    'BuildParser', 'EmbedManifest', 'Main', 'COMMANDS'
]
