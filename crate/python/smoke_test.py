"""Smoke test for the ehaoi extension module.

Build and install first:  maturin develop -m crates/py/Cargo.toml
"""

import math

import ehaoi


def close(a, b, rel):
    return abs(a - b) <= rel * abs(b)


def main():
    p = ehaoi.SystemParams(0.5, 1.0, 5, 1)
    assert p.theta == 0.5 and p.buffer == 5 and p.battery == 1

    for d in ("fcfs", "lcfs"):
        stats = ehaoi.update_stats(p, d)
        for pen in (ehaoi.Penalty.linear(), ehaoi.Penalty.exponential(0.2), ehaoi.Penalty.step(2.0)):
            closed = ehaoi.closed_form_penalty(p, d, pen)
            value, method, _ = stats.average_penalty(pen)
            assert method == "exact"
            assert close(closed, value, 1e-9), (d, pen, closed, value)
        assert stats.sojourn.cdf(0.0) == stats.sojourn.atom_at_zero

    # LCFS never does worse than FCFS.
    lin = ehaoi.Penalty.linear()
    assert ehaoi.closed_form_penalty(p, "lcfs", lin) <= ehaoi.closed_form_penalty(p, "fcfs", lin)

    try:
        ehaoi.closed_form_penalty(p, "fcfs", ehaoi.Penalty.exponential(0.6))
    except ehaoi.PenaltyDivergesError as e:
        assert "alpha must be < lambda" in str(e)
    else:
        raise AssertionError("expected divergence")

    try:
        ehaoi.SystemParams(2.0, 1.0, 1, 1)
    except ehaoi.InvalidParameterError:
        pass
    else:
        raise AssertionError("expected invalid parameters")

    far = ehaoi.SystemParams(0.5, 1.0, 200, 3)
    assert close(ehaoi.asymptotic_penalty(far, "fcfs", lin), ehaoi.closed_form_penalty(far, "fcfs", lin), 1e-6)
    assert close(ehaoi.battery_decay_rate(far, "lcfs", lin), 0.5, 1e-9)
    assert ehaoi.min_battery_for_aoi(0.8, 1.0, 3, 2.0) >= 1

    q = ehaoi.qbd_analyze(ehaoi.SystemParams(0.4, 0.8, 0, 5, mu=1.0))
    assert q["residual"] < 1e-7 and math.isfinite(q["avg_peak_aoi"])

    sim = ehaoi.simulate(p, "fcfs", valid_updates=200_000, seed=3, penalties=[ehaoi.Penalty.step(2.0)])
    aoi = sim["time_avg_penalty"]["linear"]
    exact = ehaoi.closed_form_penalty(p, "fcfs", lin)
    assert abs(aoi["value"] - exact) <= 4 * aoi["std_error"], (aoi, exact)
    assert sim == ehaoi.simulate(p, "fcfs", valid_updates=200_000, seed=3, penalties=[ehaoi.Penalty.step(2.0)])

    small = ehaoi.SystemParams(0.5, 1.0, 1, 1)
    law = ehaoi.collapsed_state_law(small)
    occ = ehaoi.state_occupancy(small, "fcfs", valid_updates=200_000, seed=1)
    assert sorted(law) == [-1, 0, 1]
    assert all(abs(occ[s] - law[s]) < 0.01 for s in law)

    print("ok")


if __name__ == "__main__":
    main()
