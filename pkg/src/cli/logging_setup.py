# -*- coding: utf-8 -*-
"""
日志配置
所有日志写到标准错误；产物只写文件
"""

import json
import logging
import sys
from typing import Optional, TextIO

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'
_ROOT_LOGGER = 'src'


class JsonLinesFormatter(logging.Formatter):
    """每条日志一行 JSON"""

    def format(self, record: logging.LogRecord) -> str:
        payload = {
            'time': self.formatTime(record),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
        }
        if record.exc_info:
            payload['exception'] = self.formatException(record.exc_info)
        return json.dumps(payload, ensure_ascii=False)


def ConfigureLogging(level: str = "INFO", jsonLines: bool = False,
                     stream: Optional[TextIO] = None) -> logging.Logger:
    """在 src 日志层级上安装唯一的标准错误处理器"""
    logger = logging.getLogger(_ROOT_LOGGER)
    numeric = logging.getLevelName(str(level).upper())
    if not isinstance(numeric, int):
        raise ValueError(f"未知日志级别: {level}")
    logger.setLevel(numeric)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(JsonLinesFormatter() if jsonLines else logging.Formatter(LOG_FORMAT))
    logger.addHandler(handler)
    logger.propagate = False
    return logger
