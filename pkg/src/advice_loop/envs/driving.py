"""Top-down self-driving car with boolean collision sensors.

World frame: x to the right, y up, heading in degrees counterclockwise from
the +x axis. Car frame for sensor probes: +y forward, +x to the car's right.
The agent observes only the eight sensor booleans and its velocity; pose is
hidden. Reward each step equals the current velocity; collisions cost -100
and, in the default mode, end the episode.
"""

from __future__ import annotations

import json
import math
from enum import IntEnum
from typing import NamedTuple

from ..cases import SDC_SCHEMA, SDC_SENSOR_NAMES, Case
from ..rdr import ActionVocab
from .base import RespawnExhausted, Transition

VEL_MIN, VEL_MAX, VEL_STEP = 1.0, 5.0, 0.5
N_VELS = 9
N_OBSERVATIONS = 256 * N_VELS  # 2304
TURN_DEG = 5.0
DT = 0.2
CAR_RADIUS = 1.0
STEP_CAP = 3000
COLLISION_PENALTY = -100.0
RAY_COUNT = 72
RAY_STEP = 0.1
RAY_MAX = 100.0
RESPAWN_ATTEMPTS = 1000

# car-frame probe offsets (+x right, +y forward), in meters
DEFAULT_SENSOR_OFFSETS = {
    "front-close": (0.0, 2.0),
    "front-far": (0.0, 5.0),
    "left-front-close": (-1.5, 2.0),
    "right-front-close": (1.5, 2.0),
    "left-front-far": (-3.0, 4.0),
    "right-front-far": (3.0, 4.0),
    "left": (-2.0, 0.0),
    "right": (2.0, 0.0),
}


class SDCAction(IntEnum):
    ACCELERATE = 0
    DECELERATE = 1
    TURN_LEFT = 2
    TURN_RIGHT = 3
    NOTHING = 4


SDC_VOCAB = ActionVocab(
    tokens=("ACCELERATE", "DECELERATE", "TURN LEFT", "TURN RIGHT", "DO NOTHING"),
    aliases={"NOTHING": 4},
)


class Pose(NamedTuple):
    x: float
    y: float
    heading: float  # degrees in [0, 360)


class Rect(NamedTuple):
    x: float
    y: float
    w: float
    h: float


class MapError(ValueError):
    pass


class ObstacleMap:
    """Axis-aligned rectangular obstacles inside an implicit walled world."""

    def __init__(self, width: float, height: float, obstacles):
        if width <= 0 or height <= 0:
            raise MapError("map extents must be positive")
        self.width = float(width)
        self.height = float(height)
        self.obstacles = tuple(Rect(*r) for r in obstacles)
        for r in self.obstacles:
            if r.w < 0 or r.h < 0:
                raise MapError(f"obstacle {r} has negative extent")
            if r.x < 0 or r.y < 0 or r.x + r.w > self.width or r.y + r.h > self.height:
                raise MapError(f"obstacle {r} is out of bounds")

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ObstacleMap":
        try:
            rects = [(o["x"], o["y"], o["w"], o["h"]) for o in obj["obstacles"]]
            return cls(obj["width_m"], obj["height_m"], rects)
        except KeyError as e:
            raise MapError(f"map document missing field {e}") from None

    @classmethod
    def load(cls, path) -> "ObstacleMap":
        with open(path, encoding="utf-8") as f:
            return cls.from_json_obj(json.load(f))

    def to_json_obj(self) -> dict:
        return {
            "width_m": self.width,
            "height_m": self.height,
            "obstacles": [{"x": r.x, "y": r.y, "w": r.w, "h": r.h} for r in self.obstacles],
        }

    def point_blocked(self, px: float, py: float) -> bool:
        if px < 0.0 or px > self.width or py < 0.0 or py > self.height:
            return True
        for r in self.obstacles:
            if r.x <= px <= r.x + r.w and r.y <= py <= r.y + r.h:
                return True
        return False

    def circle_blocked(self, px: float, py: float, radius: float) -> bool:
        if px - radius < 0.0 or px + radius > self.width:
            return True
        if py - radius < 0.0 or py + radius > self.height:
            return True
        for r in self.obstacles:
            nx = min(max(px, r.x), r.x + r.w)
            ny = min(max(py, r.y), r.y + r.h)
            dx, dy = px - nx, py - ny
            if dx * dx + dy * dy <= radius * radius:
                return True
        return False


def default_map() -> ObstacleMap:
    """60m x 60m arena: narrow top/right/bottom corridors, open left half."""
    return ObstacleMap(
        60.0,
        60.0,
        [
            (24.0, 8.0, 28.0, 44.0),  # central block forming the corridors
            (0.0, 27.0, 10.0, 6.0),  # divider splitting the open left area
        ],
    )


def sensor_points(pose: Pose, offsets=None):
    """World coordinates of each probe point, rotated by the car heading."""
    offsets = DEFAULT_SENSOR_OFFSETS if offsets is None else offsets
    rad = math.radians(pose.heading)
    cos_h, sin_h = math.cos(rad), math.sin(rad)
    pts = {}
    for name in SDC_SENSOR_NAMES:
        dx, dy = offsets[name]
        pts[name] = (pose.x + dx * sin_h + dy * cos_h, pose.y - dx * cos_h + dy * sin_h)
    return pts


def sdc_sense(pose: Pose, omap: ObstacleMap, offsets=None) -> dict:
    """Boolean reading per sensor: probe point inside an obstacle or off-world."""
    offsets = DEFAULT_SENSOR_OFFSETS if offsets is None else offsets
    rad = math.radians(pose.heading)
    cos_h, sin_h = math.cos(rad), math.sin(rad)
    px, py = pose.x, pose.y
    out = {}
    for name in SDC_SENSOR_NAMES:
        dx, dy = offsets[name]
        out[name] = omap.point_blocked(px + dx * sin_h + dy * cos_h, py - dx * cos_h + dy * sin_h)
    return out


def sdc_case(sensors: dict, velocity: float) -> Case:
    case = dict(sensors)
    case["velocity"] = velocity
    return case


def raycast(omap: ObstacleMap, x: float, y: float, angle_deg: float,
            step: float = RAY_STEP, max_dist: float = RAY_MAX) -> float:
    rad = math.radians(angle_deg)
    cx, cy = math.cos(rad), math.sin(rad)
    t = step
    while t <= max_dist:
        if omap.point_blocked(x + t * cx, y + t * cy):
            return t
        t += step
    return max_dist


def sample_free_position(omap: ObstacleMap, rng, radius: float = CAR_RADIUS,
                         attempts: int = RESPAWN_ATTEMPTS):
    for _ in range(attempts):
        x = radius + rng.random() * (omap.width - 2 * radius)
        y = radius + rng.random() * (omap.height - 2 * radius)
        if not omap.circle_blocked(x, y, radius):
            return x, y
    raise RespawnExhausted(f"no free pose found in {attempts} attempts")


def longest_ray_heading(omap: ObstacleMap, x: float, y: float,
                        ray_count: int = RAY_COUNT, step: float = RAY_STEP,
                        max_dist: float = RAY_MAX) -> float:
    """Direction with the longest cast distance; ties go to the lowest angle."""
    best_angle, best_dist = 0.0, -1.0
    for k in range(ray_count):
        angle = k * (360.0 / ray_count)
        d = raycast(omap, x, y, angle, step, max_dist)
        if d > best_dist:
            best_angle, best_dist = angle, d
    return best_angle


def sdc_respawn(omap: ObstacleMap, rng, radius: float = CAR_RADIUS) -> Pose:
    """Safe pose facing the direction with the most open space; pairs with v=1.0."""
    x, y = sample_free_position(omap, rng, radius)
    return Pose(x, y, longest_ray_heading(omap, x, y))


def sdc_reset(omap: ObstacleMap, rng, *, radius: float = CAR_RADIUS,
              start_velocity: str = "random", heading_mode: str = "longest-ray",
              offsets=None) -> tuple[Pose, Case]:
    """Fresh-episode pose and observation."""
    x, y = sample_free_position(omap, rng, radius)
    if heading_mode == "random":
        heading = (360.0 / RAY_COUNT) * rng.randrange(RAY_COUNT)
    else:
        heading = longest_ray_heading(omap, x, y)
    pose = Pose(x, y, heading)
    if start_velocity == "min":
        velocity = VEL_MIN
    else:
        velocity = VEL_MIN + VEL_STEP * rng.randrange(N_VELS)
    return pose, sdc_case(sdc_sense(pose, omap, offsets), velocity)


def sdc_step(pose: Pose, velocity: float, action: int, omap: ObstacleMap, *,
             dt: float = DT, radius: float = CAR_RADIUS, offsets=None
             ) -> tuple[Transition, Pose, float, bool]:
    """Advance one step; returns (transition, new pose, new velocity, collided).

    The transition's terminal flag reflects the default terminate-on-crash
    mode; the caller owning the episode may override it when running in
    respawn-in-episode mode.
    """
    v = velocity
    heading = pose.heading
    if action == SDCAction.ACCELERATE:
        v = min(v + VEL_STEP, VEL_MAX)
    elif action == SDCAction.DECELERATE:
        v = max(v - VEL_STEP, VEL_MIN)
    elif action == SDCAction.TURN_LEFT:
        heading = (heading + TURN_DEG) % 360.0
    elif action == SDCAction.TURN_RIGHT:
        heading = (heading - TURN_DEG) % 360.0
    rad = math.radians(heading)
    nx = pose.x + v * dt * math.cos(rad)
    ny = pose.y + v * dt * math.sin(rad)
    new_pose = Pose(nx, ny, heading)
    before = sdc_case(sdc_sense(pose, omap, offsets), velocity)
    collided = omap.circle_blocked(nx, ny, radius)
    after = sdc_case(sdc_sense(new_pose, omap, offsets), v)
    reward = COLLISION_PENALTY if collided else v
    return Transition(before, action, reward, after, collided), new_pose, v, collided


def velocity_index(velocity: float) -> int:
    idx = round((velocity - VEL_MIN) / VEL_STEP)
    if idx < 0 or idx >= N_VELS or abs(VEL_MIN + idx * VEL_STEP - velocity) > 1e-9:
        raise ValueError(f"velocity {velocity} is not on the {VEL_STEP} grid")
    return idx


def sdc_encode(case: Case) -> int:
    """Bijective (sensor mask, velocity level) -> id in [0, 2304)."""
    mask = 0
    for i, name in enumerate(SDC_SENSOR_NAMES):
        if case[name]:
            mask |= 1 << i
    return mask * N_VELS + velocity_index(case["velocity"])


def sdc_decode(state_id: int) -> Case:
    if not 0 <= state_id < N_OBSERVATIONS:
        raise ValueError(f"state id {state_id} out of range")
    mask, vel_idx = divmod(state_id, N_VELS)
    case = {name: bool(mask & (1 << i)) for i, name in enumerate(SDC_SENSOR_NAMES)}
    case["velocity"] = VEL_MIN + VEL_STEP * vel_idx
    return case


class DrivingEnv:
    """Episode-oriented wrapper owning pose, velocity, and the random stream."""

    n_states = N_OBSERVATIONS
    n_actions = 5
    schema = SDC_SCHEMA
    vocab = SDC_VOCAB
    action_enum = SDCAction

    def __init__(self, rng, omap: ObstacleMap | None = None, *, dt: float = DT,
                 car_radius: float = CAR_RADIUS, collision_mode: str = "terminate",
                 start_velocity: str = "random", heading_mode: str = "longest-ray",
                 sensor_offsets=None, step_cap: int = STEP_CAP):
        if collision_mode not in ("terminate", "respawn"):
            raise ValueError(f"unknown collision mode {collision_mode!r}")
        self.rng = rng
        self.map = omap if omap is not None else default_map()
        self.dt = dt
        self.car_radius = car_radius
        self.collision_mode = collision_mode
        self.start_velocity = start_velocity
        self.heading_mode = heading_mode
        self.offsets = dict(DEFAULT_SENSOR_OFFSETS if sensor_offsets is None else sensor_offsets)
        self.step_cap = step_cap
        self.pose = Pose(0.0, 0.0, 0.0)
        self.velocity = VEL_MIN
        self.state_id = 0
        self._last_episode_collided = False

    def reset(self) -> Case:
        if self._last_episode_collided and self.collision_mode == "terminate":
            self.pose = sdc_respawn(self.map, self.rng, self.car_radius)
            self.velocity = VEL_MIN
            case = sdc_case(sdc_sense(self.pose, self.map, self.offsets), self.velocity)
        else:
            self.pose, case = sdc_reset(
                self.map, self.rng, radius=self.car_radius,
                start_velocity=self.start_velocity, heading_mode=self.heading_mode,
                offsets=self.offsets)
            self.velocity = case["velocity"]
        self._last_episode_collided = False
        self.state_id = sdc_encode(case)
        return case

    def step(self, action: int) -> Transition:
        transition, pose, velocity, collided = sdc_step(
            self.pose, self.velocity, action, self.map,
            dt=self.dt, radius=self.car_radius, offsets=self.offsets)
        if collided:
            self._last_episode_collided = True
            if self.collision_mode == "respawn":
                self.pose = sdc_respawn(self.map, self.rng, self.car_radius)
                self.velocity = VEL_MIN
                after = sdc_case(sdc_sense(self.pose, self.map, self.offsets), self.velocity)
                transition = transition._replace(state_after=after, terminal=False)
            else:
                self.pose, self.velocity = pose, velocity
        else:
            self.pose, self.velocity = pose, velocity
        self.state_id = sdc_encode(transition.state_after)
        return transition
