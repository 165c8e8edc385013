import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpwan_lifetime.battery import Battery
from lpwan_lifetime.duty_cycle import ActivationCycle, PowerProfile, average_power
from lpwan_lifetime.errors import DomainError, InfeasibleCycleError
from lpwan_lifetime.lifetime import ModelConstants, decay_rate, lifetime_exponential
from lpwan_lifetime.simulator import (DischargeMode, SimConfig, Termination,
                                      apply_retransmissions, simulate)

from conftest import brute_force_simulate

# compressed month so self-discharge matters within a desk-scale run
FAST = ModelConstants(k_spm=7200.0)
DESK = Battery(5.0, 0.5)
BURSTY = PowerProfile(p_tx=2e-3, p_rx=1e-3, p_proc=5e-4, p_idle=2e-5)
CYCLE_64 = ActivationCycle(64.0, 8 / 64, 4 / 64, 4 / 64)


def compound_analytic(battery, p, constants):
    lam = decay_rate(battery, constants)
    return math.log1p(lam * battery.effective_capacity_j / p) / lam


class TestRetransmissions:
    def test_identity(self, ref_cycle):
        assert apply_retransmissions(ref_cycle, 1.0) == ref_cycle

    def test_doubling(self, ref_cycle):
        c = apply_retransmissions(ref_cycle, 2.0)
        assert c.alpha_tx == pytest.approx(0.002)
        assert c.alpha_idle == pytest.approx(ref_cycle.alpha_idle - 0.001)
        assert (c.alpha_rx, c.alpha_proc) == (ref_cycle.alpha_rx, ref_cycle.alpha_proc)

    def test_infeasible(self):
        with pytest.raises(InfeasibleCycleError):
            apply_retransmissions(ActivationCycle(10, 0.6, 0, 0), 2.0)

    def test_below_one(self, ref_cycle):
        with pytest.raises(DomainError):
            apply_retransmissions(ref_cycle, 0.5)


class TestSimConfig:
    @pytest.mark.parametrize("kwargs", [dict(time_step_s=0), dict(retransmission_factor=0.9),
                                        dict(max_sim_time_s=-1), dict(trajectory_stride=0)])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            SimConfig(**kwargs)

    def test_mode_from_string(self):
        assert SimConfig(discharge_mode="compound_decay").discharge_mode is DischargeMode.COMPOUND_DECAY


class TestAgainstBruteForce:
    """The closed-form stepping must reproduce a literal step-by-step walk."""

    @pytest.mark.parametrize("mode", ["paper_balance", "compound_decay"])
    @pytest.mark.parametrize("dt", [0.7, 1.0, 3.0])
    def test_lifetime_and_trajectory(self, mode, dt):
        battery = Battery(1.0, 0.3)
        res = simulate(battery, BURSTY, CYCLE_64,
                       SimConfig(time_step_s=dt, discharge_mode=mode, trajectory_stride=1), FAST)
        ref, points = brute_force_simulate(battery, BURSTY, CYCLE_64, dt, FAST.k_spm, mode)
        assert res.termination is Termination.DEPLETED
        assert res.lifetime_s == pytest.approx(ref, rel=1e-10)
        traj = res.trajectory[:-1]
        assert traj.shape == (len(points), 3)
        np.testing.assert_allclose(traj, np.array(points), rtol=1e-9, atol=1e-12)

    def test_retransmissions_match(self):
        battery = Battery(1.0, 0.1)
        res = simulate(battery, BURSTY, CYCLE_64,
                       SimConfig(time_step_s=2.0, retransmission_factor=3.0), FAST)
        ref, _ = brute_force_simulate(battery, BURSTY, CYCLE_64, 2.0, FAST.k_spm, r=3.0)
        assert res.lifetime_s == pytest.approx(ref, rel=1e-10)


class TestClosedFormAgreement:
    def test_constant_drain_no_discharge(self):
        b = Battery(3.0, 0.0)
        res = simulate(b, PowerProfile.constant(1e-3), CYCLE_64, SimConfig(time_step_s=1.0))
        assert abs(res.lifetime_s - 3000.0) <= 1.0

    @pytest.mark.parametrize("dt", [4.0, 2.0, 1.0, 0.5])
    def test_paper_balance_constant_power(self, dt):
        res = simulate(DESK, PowerProfile.constant(1e-4), CYCLE_64, SimConfig(time_step_s=dt), FAST)
        closed = lifetime_exponential(DESK, 1e-4, FAST).lifetime_s
        assert abs(res.lifetime_s - closed) <= 2 * dt

    @pytest.mark.parametrize("dt", [4.0, 2.0, 1.0, 0.5])
    def test_compound_constant_power(self, dt):
        cfg = SimConfig(time_step_s=dt, discharge_mode="compound_decay")
        res = simulate(DESK, PowerProfile.constant(1e-4), CYCLE_64, cfg, FAST)
        assert abs(res.lifetime_s - compound_analytic(DESK, 1e-4, FAST)) <= 2 * dt

    def test_paper_balance_bursty_within_one_cycle(self, battery_5wh, ref_profile, ref_cycle):
        res = simulate(battery_5wh, ref_profile, ref_cycle, SimConfig(time_step_s=1.0))
        closed = lifetime_exponential(battery_5wh, average_power(ref_profile, ref_cycle))
        assert abs(res.lifetime_s - closed.lifetime_s) <= 2 * 1.0 + ref_cycle.t_activation

    @settings(max_examples=30, deadline=None)
    @given(p=st.floats(1e-5, 1e-3), d=st.floats(0, 0.9), dt=st.sampled_from([0.5, 1.0, 2.5]))
    def test_paper_balance_constant_power_random(self, p, d, dt):
        b = Battery(2.0, d)
        res = simulate(b, PowerProfile.constant(p), CYCLE_64, SimConfig(time_step_s=dt), FAST)
        closed = lifetime_exponential(b, p, FAST).lifetime_s
        assert abs(res.lifetime_s - closed) <= 2 * dt


class TestTermination:
    def test_compound_no_load_hits_cap(self, battery_5wh, ref_cycle):
        cfg = SimConfig(discharge_mode="compound_decay")
        res = simulate(battery_5wh, PowerProfile.constant(0.0), ref_cycle, cfg)
        assert res.termination is Termination.TIME_CAP_REACHED
        assert res.lifetime_s == cfg.max_sim_time_s
        assert res.trajectory[-1, 1] > 0

    def test_short_cap(self):
        cfg = SimConfig(max_sim_time_s=100.0)
        res = simulate(DESK, PowerProfile.constant(1e-4), CYCLE_64, cfg, FAST)
        assert res.termination is Termination.TIME_CAP_REACHED
        assert res.lifetime_s == 100.0
        assert res.trajectory[-1, 0] == 100.0

    def test_cycles_completed(self):
        res = simulate(Battery(3.0, 0.0), PowerProfile.constant(1e-3), CYCLE_64)
        assert res.cycles_completed == int(3000.0 // 64)


class TestMonotonicity:
    def run(self, battery=Battery(1.0, 0.2), profile=BURSTY, r=1.0):
        cfg = SimConfig(time_step_s=1.0, retransmission_factor=r)
        return simulate(battery, profile, CYCLE_64, cfg, FAST).lifetime_s

    def test_retransmissions_shorten(self):
        assert self.run(r=2.0) < self.run(r=1.0)
        assert self.run(r=4.0) < self.run(r=2.0)

    @pytest.mark.parametrize("field", ["p_tx", "p_rx", "p_proc", "p_idle"])
    def test_more_power_shortens(self, field):
        bigger = PowerProfile(**{**BURSTY.__dict__, field: getattr(BURSTY, field) * 2})
        assert self.run(profile=bigger) < self.run()

    def test_capacity_lengthens(self):
        assert self.run(battery=Battery(2.0, 0.2)) > self.run()
        assert self.run(battery=Battery(2.0, 0.2, 0.5)) < self.run(battery=Battery(2.0, 0.2))

    def test_usable_fraction_equivalence(self):
        for mode in DischargeMode:
            cfg = SimConfig(time_step_s=1.0, discharge_mode=mode)
            a = simulate(Battery(2.0, 0.2, 0.5), BURSTY, CYCLE_64, cfg, FAST).lifetime_s
            b = simulate(Battery(1.0, 0.2), BURSTY, CYCLE_64, cfg, FAST).lifetime_s
            assert a == b


class TestTrajectory:
    def test_invariants(self, battery_5wh, ref_profile, ref_cycle):
        res = simulate(battery_5wh, ref_profile, ref_cycle)
        t, avail, used = res.trajectory.T
        assert len(t) <= 100_001
        assert np.all(np.diff(t) > 0)
        assert np.all(np.diff(used) >= 0)
        assert np.all(np.diff(avail) <= 0)

    def test_consumed_is_integral_of_state_power(self):
        dt = 1.5
        res = simulate(DESK, BURSTY, CYCLE_64, SimConfig(time_step_s=dt, trajectory_stride=7), FAST)

        def integral(t):
            n, r = divmod(t, 64.0)
            energy = n * 64.0 * average_power(BURSTY, CYCLE_64)
            for power, d in ((BURSTY.p_proc, 4.0), (BURSTY.p_tx, 8.0), (BURSTY.p_rx, 4.0),
                             (BURSTY.p_idle, 48.0)):
                energy += power * min(max(r, 0.0), d)
                r -= d
            return energy

        for t, _, used in res.trajectory:
            assert abs(used - integral(t)) <= BURSTY.p_tx * dt

    def test_csv_export(self):
        res = simulate(Battery(3.0, 0.0), PowerProfile.constant(1e-3), CYCLE_64,
                       SimConfig(trajectory_stride=500))
        buf = io.StringIO()
        res.write_trajectory_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "time_s,available_j,consumed_j"
        assert len(lines) == len(res.trajectory) + 1
        assert [float(v) for v in lines[1].split(",")] == [0.0, 3.0, 0.0]

    def test_deterministic(self, battery_5wh, ref_profile, ref_cycle):
        a = simulate(battery_5wh, ref_profile, ref_cycle)
        b = simulate(battery_5wh, ref_profile, ref_cycle)
        assert a.lifetime_s == b.lifetime_s
        assert np.array_equal(a.trajectory, b.trajectory)
