"""One AirBS chasing one user.

The cleanest view of the update rule: with a single agent and a single
packet source, the minibatch gradient points (in expectation, here
exactly) at the user, and the agent walks straight to it. A wide sigmoid
transition keeps the whole 100 m box inside the active slope.
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
    free_space_power_dbm,
    init_scenario,
    run,
)


def main():
    # strongest possible reception: agent directly overhead at 30 m
    p_top = free_space_power_dbm(Position(0, 0, 30.0), Position(0, 0, 0.0),
                                 ChannelParams(-94.0, 1000.0, 12.0))
    print(f"power directly under the AirBS: {p_top:.2f} dBm")

    s = Scenario(
        area=Rect(0.0, 0.0, 100.0, 100.0),
        num_airbs=1,
        tx_powers_dbm=(12.0,),
        init_region=Rect(0.0, 0.0, 100.0, 100.0),
        fixed_height_m=30.0,
        num_mus=1,
        utility=UtilityConfig(UtilityFamily.THRESHOLD_SIGMOID_UNICAST,
                              noise_dbm=-112.4, p_min_dbm=p_top - 10.0,
                              delta_db=20.0),
        schedule=StepSchedule(eta0=1.0, minibatch_size=10, eta_scale=1000.0),
        iterations=60,
        seed=4,
        channel=ChannelParams(-94.0, 1000.0, 0.0),
    )
    log, _ = run(s)
    mu = init_scenario(s).mus[0]
    print(f"user at ({mu.x:.1f}, {mu.y:.1f}), "
          f"agent starts at ({log.positions[0,0,0]:.1f}, {log.positions[0,0,1]:.1f})")

    print("\n iter   distance(m)   utility")
    for i in range(0, s.iterations + 1, 5):
        x, y, _ = log.positions[i, 0]
        d = math.hypot(x - mu.x, y - mu.y)
        print(f"  {i:3d}   {d:10.2f}   {log.oracle_utility[i]:.6f}")

    x, y, _ = log.positions[-1, 0]
    print(f"\nfinal horizontal miss: {math.hypot(x - mu.x, y - mu.y):.3f} m")


if __name__ == "__main__":
    main()
