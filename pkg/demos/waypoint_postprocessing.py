"""Turn a raw optimization trajectory into a flyable waypoint list.

The optimizer's per-iteration positions jitter (stochastic gradients) and
early steps can be long. Post-processing smooths the jitter with a moving
average and clamps the per-leg distance to a speed limit.
"""

import math

from airbs_sgd import (
    ChannelParams,
    Position,
    Rect,
    Scenario,
    StepSchedule,
    UtilityConfig,
    UtilityFamily,
    clamp_speed,
    run,
    smooth_waypoints,
)


def leg_lengths(path):
    return [math.dist((a.x, a.y, a.z), (b.x, b.y, b.z))
            for a, b in zip(path, path[1:])]


def main():
    s = Scenario(
        area=Rect(0.0, 0.0, 4000.0, 4000.0),
        num_airbs=2,
        tx_powers_dbm=(9.0, 12.0),
        init_region=Rect(0.0, 0.0, 1500.0, 1500.0),
        fixed_height_m=30.0,
        num_mus=60,
        utility=UtilityConfig(UtilityFamily.THRESHOLD_SIGMOID_UNICAST,
                              noise_dbm=-112.4, p_min_dbm=-91.0, delta_db=2.0),
        schedule=StepSchedule(eta0=5.0, minibatch_size=10, eta_scale=1e6),
        iterations=120,
        seed=14,
        channel=ChannelParams(-94.0, 1000.0, 0.0),
    )
    log, _ = run(s)

    agent = 0
    raw = [Position(float(x), float(y), float(z)) for x, y, z in log.positions[:, agent]]
    legs = leg_lengths(raw)
    print(f"raw trajectory of agent {agent}: {len(raw)} waypoints, "
          f"total {sum(legs):.0f} m, longest leg {max(legs):.1f} m")

    for window in (3, 7, 15):
        sm = smooth_waypoints(raw, window)
        legs = leg_lengths(sm)
        print(f"  window {window:2d}: total {sum(legs):.0f} m, "
              f"longest leg {max(legs):.1f} m (endpoints kept)")

    # fly the smoothed plan: keep stepping toward each waypoint under a
    # 20 m-per-step speed cap until it is reached
    vmax = 20.0
    plan = smooth_waypoints(raw, 7)
    pos = plan[0]
    flown = [pos]
    for target in plan[1:]:
        while (pos.x, pos.y, pos.z) != (target.x, target.y, target.z):
            pos = clamp_speed(pos, target, vmax)
            flown.append(pos)
    legs = leg_lengths(flown)
    print(f"clamped flight at vmax {vmax:.0f} m/step: {len(flown)} steps, "
          f"longest leg {max(legs):.1f} m, "
          f"end miss vs plan {math.dist((pos.x, pos.y, pos.z), (plan[-1].x, plan[-1].y, plan[-1].z)):.1f} m")


if __name__ == "__main__":
    main()
