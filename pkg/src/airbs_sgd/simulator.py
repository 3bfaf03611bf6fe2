"""Scenario description, world construction, and the simulation loop.

One iteration of the loop is: draw Q packet recipients from the traffic
profile, broadcast each resulting control packet to every agent (each
accumulates its own chain-rule gradient), then let all agents apply one
synchronous minibatch step. Positions and the full-information oracle
utility are logged once per iteration, plus the initial state.

All randomness flows from the scenario seed through a single generator,
in a fixed draw order: agent initial positions first, then user
positions, then per-packet recipient draws (and measurement noise, when
enabled). Identical scenario and seed give bit-identical results.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .channel import FREE_SPACE, ChannelModel, ChannelParams, Position, positions_to_array
from .navigator import AirBsAgent, StepSchedule, apply_update, accumulate, packet_gradients
from .traffic import TrafficProfile, make_control_packet, sample_recipient
from .utility import UtilityConfig, user_utility


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in meters. Degenerate (zero-area) allowed."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise ValueError("rectangle must have x_max >= x_min and y_max >= y_min")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class Scenario:
    """Complete, self-contained description of one simulation.

    ``tx_powers_dbm`` gives each transmitter its own power; the power in
    ``channel`` is a base value that these override. ``traffic`` may be
    None, meaning uniform shares over all users (including the extras).
    ``measurement_noise_db`` adds Gaussian error to reported packet powers
    and is 0 for the exact baseline.
    """

    area: Rect
    num_airbs: int
    tx_powers_dbm: tuple
    init_region: Rect
    fixed_height_m: float
    num_mus: int
    extra_mu_positions: tuple = ()
    traffic: TrafficProfile | None = None
    utility: UtilityConfig = None
    schedule: StepSchedule = None
    iterations: int = 100
    seed: int = 0
    channel: ChannelParams = None
    measurement_noise_db: float = 0.0

    def __post_init__(self):
        if self.num_airbs < 1:
            raise ValueError("need at least one transmitter")
        if self.num_mus < 1:
            raise ValueError("need at least one user")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")
        powers = tuple(float(p) for p in self.tx_powers_dbm)
        if len(powers) != self.num_airbs:
            raise ValueError("tx_powers_dbm length must equal num_airbs")
        object.__setattr__(self, "tx_powers_dbm", powers)
        extras = tuple(
            p if isinstance(p, Position) else Position(float(p[0]), float(p[1]), float(p[2]))
            for p in self.extra_mu_positions
        )
        object.__setattr__(self, "extra_mu_positions", extras)
        if self.traffic is None:
            object.__setattr__(self, "traffic", TrafficProfile.uniform(self.total_mus))
        elif len(self.traffic.pi) != self.total_mus:
            raise ValueError("traffic profile length must equal the total user count")
        if not isinstance(self.utility, UtilityConfig):
            raise ValueError("utility config required")
        if not isinstance(self.schedule, StepSchedule):
            raise ValueError("step schedule required")
        if not isinstance(self.channel, ChannelParams):
            raise ValueError("channel params required")
        if self.measurement_noise_db < 0.0:
            raise ValueError("measurement_noise_db must be nonnegative")

    @property
    def total_mus(self) -> int:
        return self.num_mus + len(self.extra_mu_positions)

    def agent_channel_params(self) -> list:
        """Per-transmitter channel params: base channel with power overridden."""
        return [dataclasses.replace(self.channel, tx_power_dbm=p) for p in self.tx_powers_dbm]


@dataclass
class World:
    """Mutable simulation state, fully determined by (Scenario, seed)."""

    agents: list
    mus: list
    profile: TrafficProfile
    rng: np.random.Generator
    iteration: int = 0


@dataclass
class TrajectoryLog:
    """Per-iteration placement snapshots and oracle diagnostics.

    ``positions`` has shape (I+1, B, 3): entry 0 is the initial state and
    entry i+1 follows iteration i's update. ``oracle_utility`` and
    ``served`` are the full-information network utility and the exact
    served-user count at each snapshot, evaluated with the true (not
    surrogate) max-power criterion. When packets were kept, ``packets[i]``
    holds iteration i's minibatch in draw order.
    """

    positions: np.ndarray
    oracle_utility: np.ndarray
    served: np.ndarray
    packets: list | None = None

    @property
    def num_iterations(self) -> int:
        return self.positions.shape[0] - 1

    @property
    def num_agents(self) -> int:
        return self.positions.shape[1]

    def to_csv_text(self) -> str:
        """CSV with columns: iteration, agent index, x, y, z, oracle utility.

        One row per (iteration, agent); the oracle utility of the snapshot
        is repeated on each agent row. Floats are shortest round-trip
        decimals, so the text is byte-stable.
        """
        lines = ["iteration,agent_index,x,y,z,oracle_utility"]
        for i in range(self.positions.shape[0]):
            u = repr(float(self.oracle_utility[i]))
            for b in range(self.positions.shape[1]):
                x, y, z = (repr(float(v)) for v in self.positions[i, b])
                lines.append(f"{i},{b},{x},{y},{z},{u}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "num_iterations": int(self.num_iterations),
            "num_agents": int(self.num_agents),
            "positions": [[list(map(float, row)) for row in snap] for snap in self.positions],
            "oracle_utility": [float(v) for v in self.oracle_utility],
            "served": [int(v) for v in self.served],
        }


def init_scenario(s: Scenario) -> World:
    """Build the initial world: agents first, then users, from one generator."""
    rng = np.random.default_rng(int(s.seed))
    r = s.init_region
    axy = rng.uniform((r.x_min, r.y_min), (r.x_max, r.y_max), size=(s.num_airbs, 2))
    params = s.agent_channel_params()
    agents = [
        AirBsAgent(index=b,
                   position=Position(float(axy[b, 0]), float(axy[b, 1]), float(s.fixed_height_m)),
                   channel_params=params[b],
                   fixed_height=float(s.fixed_height_m))
        for b in range(s.num_airbs)
    ]
    a = s.area
    mxy = rng.uniform((a.x_min, a.y_min), (a.x_max, a.y_max), size=(s.num_mus, 2))
    mus = [Position(float(mxy[m, 0]), float(mxy[m, 1]), 0.0) for m in range(s.num_mus)]
    mus.extend(s.extra_mu_positions)
    return World(agents=agents, mus=mus, profile=s.traffic, rng=rng)


def _oracle_eval(placements, params, mu_array, weights, cfg: UtilityConfig,
                 p_min_dbm: float, model: ChannelModel):
    # same op sequence as utility.network_utility so logged values match it bitwise
    from .channel import received_power_matrix

    powers = received_power_matrix(placements, params, mu_array, model)
    util = float(np.dot(weights, user_utility(powers, cfg)))
    served = int(np.sum(np.max(powers, axis=1) >= p_min_dbm))
    return util, served


def run(s: Scenario, *, keep_packets: bool = False,
        model: ChannelModel = FREE_SPACE):
    """Execute the scenario; returns ``(TrajectoryLog, MetricsReport)``.

    Each of the I iterations draws Q recipients, broadcasts each packet to
    all agents, and applies one synchronous update per agent. Agents never
    see each other's state; they share only the packet stream.
    """
    from .report import build_metrics_report

    world = init_scenario(s)
    agents = world.agents
    params = s.agent_channel_params()
    cfg = s.utility
    q = s.schedule.minibatch_size
    mu_array = positions_to_array(world.mus)
    weights = world.profile.as_array()

    n_snap = s.iterations + 1
    positions = np.empty((n_snap, s.num_airbs, 3))
    utilities = np.empty(n_snap)
    served = np.empty(n_snap, dtype=int)
    kept = [] if keep_packets else None

    def snapshot(i):
        placements = [a.position for a in agents]
        positions[i] = [(p.x, p.y, p.z) for p in placements]
        utilities[i], served[i] = _oracle_eval(
            placements, params, mu_array, weights, cfg, cfg.p_min_dbm, model)

    snapshot(0)
    initial_positions = [a.position for a in agents]
    for i in range(s.iterations):
        batch = [] if keep_packets else None
        placements = [a.position for a in agents]
        for _ in range(q):
            m = sample_recipient(world.profile, world.rng)
            pkt = make_control_packet(
                m, world.mus, placements, params, model,
                noise_sigma_db=s.measurement_noise_db,
                rng=world.rng if s.measurement_noise_db > 0.0 else None)
            for a, g in zip(agents, packet_gradients(agents, pkt, cfg, model)):
                accumulate(a, g)
            if keep_packets:
                batch.append(pkt)
        eta_i = s.schedule.eta(i)
        for a in agents:
            apply_update(a, eta_i)
        world.iteration = i + 1
        if keep_packets:
            kept.append(batch)
        snapshot(i + 1)

    log = TrajectoryLog(positions=positions, oracle_utility=utilities,
                        served=served, packets=kept)
    report = build_metrics_report(
        initial_placements=initial_positions,
        final_placements=[a.position for a in agents],
        params=params, mus=world.mus, p_min_dbm=cfg.p_min_dbm, model=model)
    return log, report


def coverage_axes(area: Rect, grid_resolution) -> tuple:
    """Grid-point coordinates used by :func:`coverage_map` (xs, ys)."""
    try:
        nx, ny = grid_resolution
    except TypeError:
        nx = ny = int(grid_resolution)
    if nx < 2 or ny < 2:
        raise ValueError("grid resolution must be at least 2 per axis")
    return np.linspace(area.x_min, area.x_max, nx), np.linspace(area.y_min, area.y_max, ny)


def coverage_map(placements, area: Rect, grid_resolution, params,
                 clip=(-100.0, -80.0), model: ChannelModel = FREE_SPACE,
                 ground_z: float = 0.0) -> np.ndarray:
    """Strongest received power on a ground grid, clipped to ``clip`` dBm.

    Returns shape (ny, nx): rows run south to north, columns west to east,
    matching ``coverage_axes``.
    """
    lo, hi = float(clip[0]), float(clip[1])
    if hi < lo:
        raise ValueError("clip range must have hi >= lo")
    xs, ys = coverage_axes(area, grid_resolution)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel(), np.full(gx.size, float(ground_z))])
    best = np.full(pts.shape[0], -np.inf)
    for l_b, prm in zip(placements, params):
        np.maximum(best, model.power_dbm_points(l_b, prm, pts), out=best)
    return np.clip(best, lo, hi).reshape(gy.shape)


def scenario_to_dict(s: Scenario) -> dict:
    """Fully resolved JSON-ready form; round-trips via scenario_from_dict."""
    def rect(r):
        return {"x_min": r.x_min, "y_min": r.y_min, "x_max": r.x_max, "y_max": r.y_max}

    return {
        "area": rect(s.area),
        "num_airbs": s.num_airbs,
        "tx_powers_dbm": list(s.tx_powers_dbm),
        "init_region": rect(s.init_region),
        "fixed_height_m": s.fixed_height_m,
        "num_mus": s.num_mus,
        "extra_mu_positions": [[p.x, p.y, p.z] for p in s.extra_mu_positions],
        "traffic": {"pi": list(s.traffic.pi)},
        "utility": {
            "family": s.utility.family.value,
            "noise_dbm": s.utility.noise_dbm,
            "p_min_dbm": s.utility.p_min_dbm,
            "delta_db": s.utility.delta_db,
            "softmax_alpha": s.utility.softmax_alpha,
        },
        "schedule": {
            "eta0": s.schedule.eta0,
            "minibatch_size": s.schedule.minibatch_size,
            "eta_scale": s.schedule.eta_scale,
            "decay": s.schedule.decay,
        },
        "iterations": s.iterations,
        "seed": int(s.seed),
        "channel": {
            "ref_gain_db": s.channel.ref_gain_db,
            "ref_distance_m": s.channel.ref_distance_m,
            "tx_power_dbm": s.channel.tx_power_dbm,
        },
        "measurement_noise_db": s.measurement_noise_db,
    }


def scenario_from_dict(d: dict) -> Scenario:
    """Inverse of :func:`scenario_to_dict`; absent optional keys get defaults."""
    def rect(v):
        return Rect(float(v["x_min"]), float(v["y_min"]), float(v["x_max"]), float(v["y_max"]))

    traffic = d.get("traffic")
    if traffic is not None:
        traffic = TrafficProfile(pi=tuple(traffic["pi"]))
    u = d["utility"]
    ch = d["channel"]
    sch = d["schedule"]
    return Scenario(
        area=rect(d["area"]),
        num_airbs=int(d["num_airbs"]),
        tx_powers_dbm=tuple(d["tx_powers_dbm"]),
        init_region=rect(d["init_region"]),
        fixed_height_m=float(d["fixed_height_m"]),
        num_mus=int(d["num_mus"]),
        extra_mu_positions=tuple(tuple(map(float, p)) for p in d.get("extra_mu_positions", ())),
        traffic=traffic,
        utility=UtilityConfig(
            family=u["family"],
            noise_dbm=float(u["noise_dbm"]),
            p_min_dbm=float(u["p_min_dbm"]),
            delta_db=float(u["delta_db"]),
            softmax_alpha=float(u.get("softmax_alpha", 1.0)),
        ),
        schedule=StepSchedule(
            eta0=float(sch["eta0"]),
            minibatch_size=int(sch["minibatch_size"]),
            eta_scale=float(sch.get("eta_scale", 1.0)),
            decay=sch.get("decay", "constant"),
        ),
        iterations=int(d["iterations"]),
        seed=int(d["seed"]),
        channel=ChannelParams(
            ref_gain_db=float(ch["ref_gain_db"]),
            ref_distance_m=float(ch["ref_distance_m"]),
            tx_power_dbm=float(ch["tx_power_dbm"]),
        ),
        measurement_noise_db=float(d.get("measurement_noise_db", 0.0)),
    )
