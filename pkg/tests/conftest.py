import numpy as np
import pandas as pd
import pytest

from attnvol.calendars import TradingCalendar


@pytest.fixture
def weekday_calendar():
    """Weekday trading calendar for June-July 2021, UTC+1."""
    days = pd.bdate_range("2021-06-01", "2021-07-30")
    return TradingCalendar("XX", days, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
