
import pytest
from hypothesis import given, strategies as st

from lpwan_lifetime.battery import (Battery, charge_from_current_time, energy_from_charge,
                                    energy_wh_from_amp_hours, remaining_capacity_exponential,
                                    remaining_capacity_linear, wh_to_j)
from lpwan_lifetime.errors import ConfigError, DomainError


class TestConversions:
    def test_zero_current(self):
        assert charge_from_current_time(0.0, 1234.0) == 0.0

    def test_one_amp_hour(self):
        assert charge_from_current_time(1.0, 3600.0) == 3600.0

    def test_quarter_amp_two_hours(self):
        assert charge_from_current_time(0.25, 7200.0) == 1800.0

    @pytest.mark.parametrize("args", [(-1.0, 1.0), (1.0, -1.0)])
    def test_negative_rejected(self, args):
        with pytest.raises(DomainError):
            charge_from_current_time(*args)
        with pytest.raises(DomainError):
            energy_from_charge(*args)

    def test_energy(self):
        assert energy_from_charge(0.0, 3.6) == 0.0
        assert energy_from_charge(3600.0, 1.0) == 3600.0

    def test_amp_hours_to_watt_hours(self):
        assert energy_wh_from_amp_hours(2.0, 3.6) == pytest.approx(7.2)
        assert wh_to_j(energy_wh_from_amp_hours(2.0, 3.6)) == pytest.approx(25920.0)

    def test_from_ah(self):
        b = Battery.from_ah(2.0, 3.6)
        assert b.capacity_j == pytest.approx(25920.0)


class TestBatteryValidation:
    @pytest.mark.parametrize("kwargs", [
        dict(capacity_j=0.0), dict(capacity_j=-1.0),
        dict(capacity_j=1.0, self_discharge_rate=1.0),
        dict(capacity_j=1.0, self_discharge_rate=-0.1),
        dict(capacity_j=1.0, usable_fraction=0.0),
        dict(capacity_j=1.0, usable_fraction=1.5),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            Battery(**kwargs)

    def test_from_dict_percent(self):
        b = Battery.from_dict({"capacity_wh": 5.0, "self_discharge_pct_per_month": 0.5,
                               "usable_fraction": 0.9})
        assert b.capacity_j == 18000.0
        assert b.self_discharge_rate == pytest.approx(0.005)
        assert b.effective_capacity_j == pytest.approx(16200.0)

    def test_from_dict_errors_name_field(self):
        with pytest.raises(ConfigError, match="battery.capacity_wh"):
            Battery.from_dict({"self_discharge_pct_per_month": 0.5})
        with pytest.raises(ConfigError, match="battery.colour"):
            Battery.from_dict({"capacity_wh": 1, "colour": "red"})


class TestCapacityCurves:
    def test_identity_at_zero(self, battery_5wh):
        assert remaining_capacity_exponential(battery_5wh, 0) == 18000.0
        assert remaining_capacity_linear(battery_5wh, 0) == 18000.0

    def test_exponential_four_and_eight_years(self, battery_5wh):
        e48 = remaining_capacity_exponential(battery_5wh, 48)
        e96 = remaining_capacity_exponential(battery_5wh, 96)
        assert e48 / 3600 == pytest.approx(3.93, abs=0.005)
        assert e96 / 3600 == pytest.approx(3.09, abs=0.005)
        assert e48 == pytest.approx(18000 * 0.995 ** 48, rel=1e-13)

    def test_linear_examples(self, battery_5wh):
        assert remaining_capacity_linear(battery_5wh, 100) == pytest.approx(9000.0)
        assert remaining_capacity_linear(battery_5wh, 200) == 0.0
        assert remaining_capacity_linear(battery_5wh, 500) == 0.0

    def test_negative_time(self, battery_5wh):
        with pytest.raises(DomainError):
            remaining_capacity_exponential(battery_5wh, -1)
        with pytest.raises(DomainError):
            remaining_capacity_linear(battery_5wh, -1)

    def test_no_discharge_constant(self):
        b = Battery(100.0, 0.0)
        for t in (0, 1, 10, 1e4):
            assert remaining_capacity_exponential(b, t) == 100.0
            assert remaining_capacity_linear(b, t) == 100.0

    @given(d=st.floats(1e-6, 0.5), t1=st.floats(0, 1000), t2=st.floats(0, 1000))
    def test_monotone_non_increasing(self, d, t1, t2):
        b = Battery(1.0, d)
        lo, hi = sorted((t1, t2))
        assert remaining_capacity_exponential(b, hi) <= remaining_capacity_exponential(b, lo)
        assert remaining_capacity_linear(b, hi) <= remaining_capacity_linear(b, lo)
        assert remaining_capacity_exponential(b, hi) > 0

    @pytest.mark.parametrize("d", [0.001, 0.005, 0.02, 0.1, 0.5])
    @pytest.mark.parametrize("t", [0.1, 0.5, 0.99, 1.0, 1.5, 12, 48, 150])
    def test_bernoulli_ordering(self, d, t):
        b = Battery(1.0, d)
        expo = remaining_capacity_exponential(b, t)
        lin = remaining_capacity_linear(b, t)
        if t >= 1:
            assert expo >= lin * (1 - 1e-15)
        else:
            assert expo <= lin * (1 + 1e-15)

    @given(eta=st.floats(0.01, 1.0), d=st.floats(0, 0.2), t=st.floats(0, 300))
    def test_usable_fraction_scales(self, eta, d, t):
        full = Battery(10.0, d)
        part = Battery(10.0, d, eta)
        assert remaining_capacity_exponential(part, t) == pytest.approx(
            eta * remaining_capacity_exponential(full, t), rel=1e-12)
        assert remaining_capacity_linear(part, t) == pytest.approx(
            eta * remaining_capacity_linear(full, t), rel=1e-12, abs=1e-12)

    def test_linear_reaches_zero_exactly_at_one_over_d(self):
        b = Battery(1.0, 0.25)
        assert remaining_capacity_linear(b, 4.0) == 0.0
        assert remaining_capacity_linear(b, 3.999) > 0
