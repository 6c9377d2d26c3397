"""Smoke test for the satroute extension. Run after `pip install --no-build-isolation -e crates/python`."""

import math

import satroute


def close(a, b, rel):
    return abs(a - b) <= rel * abs(b)


def main():
    g = satroute.Geometry.from_altitude(1000e3, 200)
    assert close(g.sphere_radius_m, 7371e3, 1e-15)
    assert close(g.chord_for_angle(math.pi / 2), math.sqrt(2) * 7371e3, 1e-12)

    # Nearest of N uniform points lies within polar angle t of a pole with
    # probability 1 - (1 - sin^2(t/2))^N.
    t = 0.2
    assert close(satroute.nearest_neighbor_cdf(g, t), 1 - (1 - math.sin(t / 2) ** 2) ** 200, 1e-12)

    ch = satroute.Channel()
    assert close(ch.as_dict()["tx_power_w"], 10 ** 1.5, 1e-12)
    try:
        satroute.Channel(bandwidth_hz=-1.0)
        raise AssertionError("negative bandwidth accepted")
    except ValueError:
        pass

    n, table = satroute.optimize(g, ch, math.pi / 2)
    assert n == 2 and table[0][0] == 2

    m = satroute.analyze(g, ch, math.pi / 2, n)
    assert 1.0 <= m["alpha1"] < 1.1
    assert 0.0 < m["routing_coverage"] <= 1.0
    assert m["t_tx_exact_s"] > m["t_tx_approx_s"] > 0.0

    mc = satroute.simulate(g, ch, math.pi / 2, n, realizations=2000, seed=7)
    mean, se = mc["routing_coverage"]
    assert abs(mean - m["routing_coverage"]) <= 4 * se + 1e-9, (mean, se, m["routing_coverage"])
    mean, se = mc["availability"]
    assert abs(mean - m["availability"]) <= 4 * se + 1e-9, (mean, se, m["availability"])

    route = satroute.plan_route(g, 3, math.pi / 2, n)
    assert len(route["raw_hop_chords_m"]) == n
    assert len(satroute.sample_topology(g, 3)) == 200

    try:
        satroute.optimize(g, ch, math.pi / 2, epsilon=1e-9)
        raise AssertionError("expected infeasible")
    except satroute.InfeasibleError:
        pass

    print("satroute smoke test: ok")


if __name__ == "__main__":
    main()
