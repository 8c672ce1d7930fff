import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from models.domain import ContextSeries, PartitionMatrix

INCOME = [28000.0, 40000.0, 35100.0, 65000.0, 20000.0, 52520.0, 21000.0, 75000.0]

# FCM memberships of the income series (c=3, m=2) from the worked example.
INCOME_PARTITION = np.array([
    [0.830213, 0.013943, 0.155844],
    [0.000256, 0.000091, 0.999653],
    [0.145173, 0.019431, 0.835396],
    [0.008823, 0.965323, 0.025853],
    [0.979944, 0.002928, 0.017128],
    [0.098034, 0.319610, 0.582355],
    [0.991251, 0.001213, 0.007536],
    [0.012425, 0.959367, 0.028209],
])


@pytest.fixture
def income_series() -> ContextSeries:
    return ContextSeries(values=np.array(INCOME), name="Income")


@pytest.fixture
def income_partition() -> PartitionMatrix:
    return PartitionMatrix(u=INCOME_PARTITION, row_target=INCOME_PARTITION.sum(axis=1))


@pytest.fixture
def survey_path() -> Path:
    return ROOT / "data" / "survey.csv"
