# -*- coding: utf-8 -*-
"""
ResourceMonitor 单元测试
psutil 以模拟对象替代
"""

import os
import sys
import unittest
from unittest.mock import Mock, patch

import psutil

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from src.training.resources import ResourceMonitor


class TestResourceMonitor(unittest.TestCase):
    """ResourceMonitor 测试类"""

    #region 测试初始化

    def setUp(self):
        with patch('src.training.resources.psutil.Process'):
            self._monitor = ResourceMonitor()
        self._mock_process = Mock()
        self._monitor._process = self._mock_process

    #endregion

    #region 内存

    def test_RssMb_Success(self):
        memory = Mock()
        memory.rss = 64 * 1024 * 1024
        self._mock_process.memory_info.return_value = memory
        self.assertEqual(self._monitor.RssMb(), 64.0)

    def test_RssMb_读取失败返回零(self):
        self._mock_process.memory_info.side_effect = psutil.AccessDenied()
        self.assertEqual(self._monitor.RssMb(), 0.0)

    #endregion

    #region 线程数

    def test_ResolveWorkerCount_显式值(self):
        self.assertEqual(self._monitor.ResolveWorkerCount(3), 3)

    @patch('src.training.resources.psutil.cpu_count')
    def test_ResolveWorkerCount_自动取物理核数(self, mock_cpu_count):
        mock_cpu_count.side_effect = lambda logical=True: 4 if not logical else 8
        self.assertEqual(self._monitor.ResolveWorkerCount(0), 4)

    @patch('src.training.resources.psutil.cpu_count')
    def test_ResolveWorkerCount_核数未知时为一(self, mock_cpu_count):
        mock_cpu_count.return_value = None
        self.assertEqual(self._monitor.ResolveWorkerCount(-1), 1)

    #endregion

    #region 系统信息

    @patch('src.training.resources.psutil.virtual_memory')
    def test_GetSystemInfo_缓存(self, mock_memory):
        mock_memory.return_value = Mock(total=8 * 1024 ** 3, available=2 * 1024 ** 3)
        first = self._monitor.GetSystemInfo()
        self._monitor.GetSystemInfo()
        self.assertEqual(first['total_memory_gb'], 8.0)
        self.assertEqual(mock_memory.call_count, 1)

    @patch('src.training.resources.psutil.cpu_count')
    @patch('src.training.resources.psutil.virtual_memory')
    def test_GetSystemInfo_包含核数与内存(self, mock_memory, mock_cpu_count):
        mock_memory.return_value = Mock(total=16 * 1024 ** 3, available=4 * 1024 ** 3)
        mock_cpu_count.side_effect = lambda logical=True: 8 if logical else 4
        info = self._monitor.GetSystemInfo()
        self.assertEqual(info['physical_cores'], 4)
        self.assertEqual(info['logical_cores'], 8)
        self.assertEqual(info['available_memory_gb'], 4.0)
        self.assertIn('python_version', info)

    #endregion


if __name__ == '__main__':
    unittest.main()
