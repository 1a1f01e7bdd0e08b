"""
Fixtures compartilhadas: economias sintéticas e uma tabela pequena montada à mão
"""

import numpy as np
import pytest

from iotable.linked_table import make_table, save_table
from synthetic.generator import generate_economy


def two_sector_table(p0=(1.0, 1.0), r0=1.0, w0=1.0, x0=None):
    """
    Tabela balanceada de 2 setores

    x = [[0, 20], [10, 0]], y = (100, 80), rK = (30, 20), wL = (60, 40).
    Participações em t=1: s_01 = 0.25, s_10 = 0.1, s_K = (0.3, 0.25), s_L = (0.6, 0.5).
    """
    x1 = np.array([[0.0, 20.0], [10.0, 0.0]])
    x = np.stack([x1 if x0 is None else np.asarray(x0, float), x1])
    y = np.array([[100.0, 80.0], [100.0, 80.0]])
    rK = np.array([[30.0, 20.0], [30.0, 20.0]])
    wL = y - x.sum(axis=1) - rK
    f = y - x.sum(axis=2)
    h = 0.5 * f
    g = 0.375 * f
    m = f - h - g
    return make_table(('a', 'b'), x=x, y=y, rK=rK, wL=wL, h=h, g=g, m=m,
                      p=np.vstack([p0, [1.0, 1.0]]), r=[r0, 1.0], w=[w0, 1.0])


@pytest.fixture
def small_table():
    return two_sector_table()


@pytest.fixture(scope='session')
def synth3():
    return generate_economy(3, seed=3)


@pytest.fixture(scope='session')
def synth8():
    return generate_economy(8, seed=8)


@pytest.fixture(scope='session')
def synth20():
    return generate_economy(20, seed=20)


@pytest.fixture
def table_csv(tmp_path, synth8):
    path = tmp_path / 'table8.csv'
    save_table(synth8.table, path)
    return path
