# -*- coding: utf-8 -*-
"""
TempoEquivariance 进程入口

用法: python -m src.main <command> [flags]
"""

import os
import sys

# BLAS 线程数只能在 numpy 首次导入前固定
if '--deterministic' in sys.argv[1:]:
    for _name in ('OMP_NUM_THREADS', 'OPENBLAS_NUM_THREADS', 'MKL_NUM_THREADS',
                  'VECLIB_MAXIMUM_THREADS', 'NUMEXPR_NUM_THREADS'):
        os.environ[_name] = '1'

from src.cli.commands import Main  # noqa: E402


if __name__ == "__main__":
    sys.exit(Main(sys.argv[1:]))
