"""Smoke test for the repday extension module."""

import json

import repday


def main():
    data = repday.generate(n_days=20, seed=3)
    assert data.n_days == 20 and len(data.values("heat_demand")) == 480
    print(data)

    config = repday.RunConfig(k=4, n_init=50, method="slack", grid_fraction=0.5)
    report = repday.run(data, config)
    assert report.feasible_full_year
    assert report.max_slack <= 1e-6
    assert set(report.design) == {"p_hp", "p_eh", "p_pv", "p_bat", "e_bat"}
    assert json.loads(report.to_json())["k"] == 4
    print(report, report.extreme_days)

    sweep = repday.sweep(data, [1.0, 0.0], repday.RunConfig(k=4, n_init=50))
    assert sweep.all_ok() and sweep.cost_monotone()
    zero = [r for f, r, _ in sweep.rows if f == 0.0][0]
    assert zero.opex_share == 0.0
    print(sweep.to_csv(), end="")

    centroids, assignments, ssd = repday.kmeans([[0.0], [0.1], [5.0], [5.1]], k=2, seed=1)
    assert ssd < 0.011 and assignments[0] == assignments[1] != assignments[2]

    lp = repday.LinearProgram()
    x = lp.add_variable("x", 0.0, 4.0, cost=-1.0)
    y = lp.add_variable("y", 0.0, 4.0, cost=-2.0)
    lp.add_constraint([(x, 1.0), (y, 1.0)], "<=", 5.0)
    sol = lp.solve()
    assert sol["status"] == "optimal" and abs(sol["objective"] + 9.0) < 1e-9
    assert sol["duality_gap"] <= 1e-9

    try:
        repday.RunConfig(method="bogus")
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("bad method accepted")
    print("smoke ok")


if __name__ == "__main__":
    main()
