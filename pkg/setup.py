#!/usr/bin/env python3
"""
Instalação do cascade-ge
"""

import re
from pathlib import Path

from setuptools import find_packages, setup

HERE = Path(__file__).parent
VERSION = re.search(r"^VERSION = '([^']+)'",
                    (HERE / 'config.py').read_text(encoding='utf-8'), re.M).group(1)

with open(HERE / 'requirements.txt', encoding='utf-8') as f:
    requirements = [line.strip() for line in f
                    if line.strip() and not line.startswith(('#', 'pytest', 'hypothesis'))]

setup(
    name='cascade-ge',
    version=VERSION,
    description='Produção CES em cascata sobre tabelas insumo-produto ligadas',
    python_requires='>=3.9',
    py_modules=['cli', 'config', 'errors', 'output_files'],
    packages=find_packages(exclude=['tests', 'tests.*', 'examples', 'examples.*']),
    install_requires=requirements,
    extras_require={'test': ['pytest>=7.4', 'hypothesis>=6.88']},
    entry_points={'console_scripts': ['cascade-ge=cli:main']},
)
