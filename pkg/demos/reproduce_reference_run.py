# reproduce_reference_run.py
#
# Run the bundled reference scenario once through the library API, compare
# the gradient agents against the k-means baseline, and drop the full
# output bundle (CSV + SVG maps) into ./reference_out.

from airbs_sgd import (
    Position,
    coverage_map,
    init_scenario,
    kmeans_placement,
    render_outputs,
    run,
    served_count,
)
from airbs_sgd.cli import reference_scenario


def main():
    s = reference_scenario()
    print(f"scenario: {s.num_airbs} AirBSs, {s.total_mus} users, "
          f"{s.iterations} iterations x {s.schedule.minibatch_size} packets, "
          f"seed {s.seed}")

    log, report = run(s)
    print(f"served initially: {report.initial.served_count}/{report.initial.total_mus}")
    print(f"served finally:   {report.final.served_count}/{report.final.total_mus}")
    print(f"oracle utility:   {log.oracle_utility[0]:.4f} -> {log.oracle_utility[-1]:.4f}")

    # same user draw, centralized clustering instead of gradient agents
    world = init_scenario(s)
    params = s.agent_channel_params()
    km = kmeans_placement(world.mus, s.num_airbs, seed=s.seed,
                          height_m=s.fixed_height_m)
    km_served = served_count(km.centroids, world.mus, params, s.utility.p_min_dbm)
    print(f"k-means baseline: {km_served}/{report.final.total_mus} served "
          f"({report.final.total_mus - km_served} unserved)")

    final = [Position(float(x), float(y), float(z)) for x, y, z in log.positions[-1]]
    cov = coverage_map(final, s.area, 70, params)
    paths = render_outputs(log, report, cov, "reference_out", s.area, mus=world.mus)
    print("wrote:")
    for name in sorted(paths):
        print(f"  {paths[name]}")


if __name__ == "__main__":
    main()
