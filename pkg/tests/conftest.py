import math

import pytest

from lpwan_lifetime.battery import Battery
from lpwan_lifetime.duty_cycle import ActivationCycle, PowerProfile
from lpwan_lifetime.simulator import apply_retransmissions


@pytest.fixture
def battery_5wh():
    return Battery.from_wh(5.0, 0.005)


@pytest.fixture
def ref_profile():
    return PowerProfile(p_tx=0.1, p_rx=0.05, p_proc=0.01, p_idle=1e-6)


@pytest.fixture
def ref_cycle():
    return ActivationCycle(3600.0, alpha_tx=0.001, alpha_rx=0.001, alpha_proc=0.008)


def bisect_root(f, lo, hi, iterations=200):
    """Plain bisection for f(lo) < 0 <= f(hi); used as an independent oracle."""
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def brute_force_simulate(battery, profile, cycle, dt, k_spm, mode="paper_balance",
                         r=1.0, t_cap=math.inf):
    """Walk the steps one at a time. Returns (lifetime, list of (t, available, consumed))."""
    cycle = apply_retransmissions(cycle, r)
    lam = -math.log1p(-battery.self_discharge_rate) / k_spm
    e0 = battery.effective_capacity_j
    busy = [cycle.duration(s) for s in ("proc", "tx", "rx")]
    segments = list(zip((profile.p_proc, profile.p_tx, profile.p_rx, profile.p_idle),
                        busy + [cycle.t_activation - sum(busy)]))
    t = consumed = 0.0
    avail = e0
    points = [(t, avail, consumed)]
    n = 0
    while True:
        start = n * cycle.t_activation
        for power, d in segments:
            if d <= 0:
                continue
            steps = max(1, math.ceil(d / dt - 1e-9))
            for k in range(steps):
                h = dt if k < steps - 1 else d - (steps - 1) * dt
                t_prev, a_prev = t, avail
                t = start + (k + 1) * dt if k < steps - 1 else start + d
                consumed += power * h
                if mode == "paper_balance":
                    avail = e0 * math.exp(-lam * t) - consumed
                else:
                    avail = avail * math.exp(-lam * h) - power * h
                if avail <= 0:
                    frac = a_prev / (a_prev - avail)
                    return t_prev + (t - t_prev) * frac, points
                points.append((t, avail, consumed))
                if t >= t_cap:
                    return None, points
            start += d
        n += 1


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record a criterion outcome; the lines are echoed in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(number, title, ok, detail):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
