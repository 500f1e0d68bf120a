import filecmp

import pandas as pd
import pytest

from attnvol.simulate import COUNTRIES, simulate_dataset


@pytest.fixture(scope="module")
def small_sim(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    simulate_dataset(out, seed=3, n_countries=4)
    return out


def test_country_table_is_complete():
    assert len(COUNTRIES) == 51
    codes = [c[0] for c in COUNTRIES]
    assert len(set(codes)) == 51
    assert "LV" in codes


def test_expected_files(small_sim):
    names = {p.name for p in small_sim.iterdir()}
    assert {"countries.csv", "conflict.csv", "general.csv", "run.cfg"} <= names
    meta = pd.read_csv(small_sim / "countries.csv")
    for iso2 in meta["iso2"]:
        assert f"{iso2}.csv" in names
        assert f"{iso2}_calendar.csv" in names


def test_ohlc_internally_consistent(small_sim):
    meta = pd.read_csv(small_sim / "countries.csv")
    for iso2 in meta["iso2"]:
        bars = pd.read_csv(small_sim / f"{iso2}.csv")
        assert (bars["high"] >= bars[["open", "close"]].max(axis=1) - 1e-9).all()
        assert (bars["low"] <= bars[["open", "close"]].min(axis=1) + 1e-9).all()
        assert (bars["low"] > 0).all()


def test_svi_within_bounds(small_sim):
    for name in ("conflict.csv", "general.csv"):
        long = pd.read_csv(small_sim / name)
        assert long["value"].between(0, 100).all()


def test_same_seed_reproduces_files(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    simulate_dataset(a, seed=5, n_countries=3)
    simulate_dataset(b, seed=5, n_countries=3)
    for path in sorted(a.iterdir()):
        assert filecmp.cmp(path, b / path.name, shallow=False), path.name


def test_different_seed_differs(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    simulate_dataset(a, seed=5, n_countries=2)
    simulate_dataset(b, seed=6, n_countries=2)
    iso2 = pd.read_csv(a / "countries.csv")["iso2"].iloc[0]
    assert not filecmp.cmp(a / f"{iso2}.csv", b / f"{iso2}.csv", shallow=False)
