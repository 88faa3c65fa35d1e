import math
from datetime import date, timedelta

import numpy as np
import pytest

import stockcnn


def make_csv(n, drift=0.01, seed=3):
    rng = np.random.default_rng(seed)
    lines = ["Date,Open,High,Low,Close,Adj Close,Volume"]
    day = date(2018, 1, 1)
    close = 100.0
    for _ in range(n):
        while day.weekday() >= 5:
            day += timedelta(days=1)
        open_ = close
        close = open_ * math.exp(drift + 0.004 * rng.standard_normal())
        high = max(open_, close) * 1.002
        low = min(open_, close) * 0.998
        lines.append(f"{day},{open_:.6f},{high:.6f},{low:.6f},{close:.6f},{close:.6f},{1000 + int(rng.integers(9000))}")
        day += timedelta(days=1)
    return "\n".join(lines) + "\n"


def test_csv_round_trip():
    series = stockcnn.parse_csv(make_csv(150), "SYN")
    assert len(series) == 150
    assert series.ticker == "SYN"
    assert stockcnn.validate(series) == []
    again = stockcnn.parse_csv(series.to_csv(), "SYN")
    np.testing.assert_array_equal(again.closes, series.closes)


def test_malformed_csv_raises():
    with pytest.raises(stockcnn.Error, match="MalformedRow"):
        stockcnn.parse_csv("Date,Open,High,Low,Close,Adj Close,Volume\n2019-01-02,1,2,x,1,1,5\n")


def test_indicators():
    closes = np.array([1.0, 2.0, 3.0, 4.0])
    s = stockcnn.sma(closes, 2)
    assert math.isnan(s[0])
    np.testing.assert_allclose(s[1:], [1.5, 2.5, 3.5])
    e = stockcnn.ema(closes, 2)
    np.testing.assert_allclose(e[1:], [1.5, 2.5, 3.5])
    line, signal, hist = stockcnn.macd(np.full(40, 7.0))
    assert line[-1] == 0.0 and signal[-1] == 0.0 and hist[-1] == 0.0


def test_gaf_identities():
    x = np.random.default_rng(1).uniform(-5, 5, 60)
    g = stockcnn.gaf(x)
    np.testing.assert_allclose(g, g.T, atol=1e-12)
    r = (2 * x - x.max() - x.min()) / (x.max() - x.min())
    np.testing.assert_allclose(np.diag(g), 2 * r * r - 1, atol=1e-12)


def test_render_and_samples():
    series = stockcnn.parse_csv(make_csv(150), "SYN")
    img = stockcnn.render(series, 119, "macd_ma")
    assert img.shape == (96, 96, 3) and img.dtype == np.uint8
    samples = stockcnn.build_samples(series, 20, "no_volume", 32, 32)
    assert len(samples) == stockcnn.sample_count(150, 20) == 11
    assert all(s["label"] == 1 for s in samples)
    assert samples[0]["image"].shape == (32, 32, 3)


def test_splits_and_metrics():
    train, test = stockcnn.split_random(10, 0.2, 7)
    assert sorted(train + test) == list(range(10)) and len(test) == 2
    assert stockcnn.split_automatic(10, 0.8) == (list(range(8)), [8, 9])
    train, test = stockcnn.split_time(["2018-12-31", "2019-01-01", "2018-06-01"], "2019-01-01")
    assert train == [0, 2] and test == [1]
    assert stockcnn.confusion([1, 1, 0, 0], [1, 0, 0, 1]) == (1, 1, 1, 1)
    s = stockcnn.scores(3, 1, 4, 2)
    assert s["accuracy"] == pytest.approx(0.7, abs=1e-12)
    assert s["mcc"] == pytest.approx(10 / math.sqrt(600), abs=1e-12)


def test_model_size():
    assert stockcnn.parameter_count() == 983378
    assert set(stockcnn.VARIANTS) == {"no_volume", "volume", "macd_ma", "gaf", "macd_volume_lower"}
