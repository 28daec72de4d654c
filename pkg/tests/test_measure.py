import math

import numpy as np
import pytest

from tribilliard.errors import ZeroPolynomial
from tribilliard.measure import (DEFAULT_R, MeasureEstimate, SamplerConfig, closed_form_cos_measure,
                                 decay_experiment, sample_angles, sublevel_fraction, threshold)
from tribilliard.trigpoly import TrigPoly

SMALL = SamplerConfig(sample_count=20_000)


def test_constant_polynomial():
    est = sublevel_fraction(TrigPoly.const(1), 0.5, SMALL)
    assert est.fraction == 0 and est.standard_error == 0


def test_zero_polynomial_rejected():
    with pytest.raises(ZeroPolynomial):
        sublevel_fraction(TrigPoly(), 0.1, SMALL)


def test_cos_closed_form_within_three_standard_errors():
    cfg = SamplerConfig(sample_count=1_000_000)
    est = sublevel_fraction(TrigPoly.cos(1, 0), 0.01, cfg)
    truth = closed_form_cos_measure(1, 0.01)
    assert truth == pytest.approx(0.006366, abs=1e-6)
    assert abs(est.fraction - truth) <= 3 * est.standard_error


@pytest.mark.parametrize("m", [2, 5])
def test_cos_m_closed_form(m):
    cfg = SamplerConfig(sample_count=200_000, seed=3)
    est = sublevel_fraction(TrigPoly.cos(m, 0), 0.05, cfg)
    assert abs(est.fraction - closed_form_cos_measure(m, 0.05)) <= 3 * est.standard_error


def test_grid_mode_is_close():
    est = sublevel_fraction(TrigPoly.cos(0, 1), 0.05, SamplerConfig(sample_count=250_000, mode="grid"))
    assert est.fraction == pytest.approx(closed_form_cos_measure(1, 0.05), abs=2e-3)


def test_determinism_and_sharding():
    p = TrigPoly.cos(1, 1) + TrigPoly.sin(2, -1)
    cfg = SamplerConfig(sample_count=150_000, seed=9)
    assert sublevel_fraction(p, 0.1, cfg) == sublevel_fraction(p, 0.1, cfg)
    shards = list(sample_angles(cfg))
    assert sum(a.size for a, _ in shards) == 150_000
    again = list(sample_angles(cfg))
    assert all(np.array_equal(x[0], y[0]) for x, y in zip(shards, again))


def test_monotone_in_eps():
    p = TrigPoly.cos(1, 1) + TrigPoly.sin(2, -1)
    fracs = [sublevel_fraction(p, e, SMALL).fraction for e in (0.01, 0.05, 0.1, 0.5)]
    assert fracs == sorted(fracs)


def test_standard_error_formula():
    est = MeasureEstimate.from_count(25, 100)
    assert est.standard_error == pytest.approx(math.sqrt(0.25 * 0.75 / 100))


def test_admissible_domain():
    cfg = SamplerConfig(sample_count=10_000, domain="admissible", delta=0.05)
    for a, b in sample_angles(cfg):
        assert (a > 0.05).all() and (b > 0.05).all() and (a + b < math.pi - 0.05).all()


def test_config_validation():
    for bad in ({"sample_count": 0}, {"mode": "sobol"}, {"domain": "disk"}):
        with pytest.raises(ValueError):
            SamplerConfig(**bad)


def test_single_polynomial_experiment():
    p = TrigPoly.cos(2, 1)
    table = decay_experiment([3], R=0.1, families={3: [p]}, sampler=SMALL)
    (row,) = table.rows
    assert row.worst_fraction == sublevel_fraction(p, threshold(3, 0.1), SMALL).fraction
    assert row.family_size == 1


def test_zero_polynomials_are_skipped():
    table = decay_experiment([2], R=0.1, families={2: [TrigPoly(), TrigPoly.cos(1, 0)]}, sampler=SMALL)
    assert table.rows[0].skipped_zero == 1


def test_underflow_row():
    table = decay_experiment([40], R=1.0, families={40: [TrigPoly.cos(1, 0)]}, sampler=SMALL)
    row = table.rows[0]
    assert row.underflow and row.worst_fraction == 0.0 and row.eps == 0.0


def test_default_threshold_does_not_underflow():
    assert threshold(64, DEFAULT_R) > 0


def test_decay_on_area_families():
    table = decay_experiment([4, 8], sampler=SamplerConfig(sample_count=20_000), family_count=20)
    eps = [r.eps for r in table.rows]
    assert eps[0] > eps[1]
    assert table.nonincreasing()
    csv_text = table.to_csv()
    assert csv_text.splitlines()[0] == "m,eps,worst_fraction,family_size,exp_minus_cm,underflow"
    assert len(csv_text.splitlines()) == 3
    assert table.to_json()["rows"][0]["degree"] == 4
