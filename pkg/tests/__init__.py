# -*- coding: utf-8 -*-
"""
TempoEquivariance 测试包
目录与 src 同构，运行方式见 tests/README.md
"""
