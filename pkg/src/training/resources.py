# -*- coding: utf-8 -*-
"""
进程资源监视
确定生产者线程数、记录驻留内存与系统信息
"""

import logging
import platform
import threading
from typing import Any, Dict, Optional

import psutil

from .interfaces import IResourceMonitor


logger = logging.getLogger(__name__)


class ResourceMonitor(IResourceMonitor):
    """基于 psutil 的进程资源监视器"""

    def __init__(self):
        self._lock = threading.RLock()
        self._process = psutil.Process()
        self._systemInfo: Optional[Dict[str, Any]] = None

    def RssMb(self) -> float:
        """当前驻留内存（MB）"""
        try:
            return self._process.memory_info().rss / 1024 / 1024
        except psutil.Error as e:
            logger.debug("读取驻留内存失败: %s", e)
            return 0.0

    def ResolveWorkerCount(self, requested: int = 0) -> int:
        """requested > 0 时直接采用，否则取物理核数（至少 1）"""
        if requested and requested > 0:
            return int(requested)
        return max(1, psutil.cpu_count(logical=False) or psutil.cpu_count() or 1)

    def GetSystemInfo(self) -> Dict[str, Any]:
        """系统信息，首次调用后缓存"""
        with self._lock:
            if self._systemInfo is None:
                memory = psutil.virtual_memory()
                self._systemInfo = {
                    'platform': platform.platform(),
                    'python_version': platform.python_version(),
                    'physical_cores': psutil.cpu_count(logical=False),
                    'logical_cores': psutil.cpu_count(),
                    'total_memory_gb': round(memory.total / 1024 / 1024 / 1024, 2),
                    'available_memory_gb': round(memory.available / 1024 / 1024 / 1024, 2),
                }
            return dict(self._systemInfo)
