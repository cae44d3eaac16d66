# -*- coding: utf-8 -*-
"""
pytest 公共配置
慢速验收测试默认跳过，设置 TEMPO_RUN_SLOW=1 后运行
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

SLOW_ENV = "TEMPO_RUN_SLOW"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 长时间验收测试，需要 TEMPO_RUN_SLOW=1")


def pytest_collection_modifyitems(config, items):
    if os.environ.get(SLOW_ENV) == "1":
        return
    skipSlow = pytest.mark.skip(reason=f"慢速测试，设置 {SLOW_ENV}=1 运行")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skipSlow)
