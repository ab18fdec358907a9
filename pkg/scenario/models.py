from dataclasses import dataclass, field, replace
import math

from django.conf import settings
from django.db import models

MPH = 0.44704


class AggressivenessLevel(models.TextChoices):
    LOW = 'Low', 'Low (yields)'
    MEDIUM = 'Medium', 'Medium (1.5 s headway)'
    HIGH = 'High', 'High (0.5 s headway)'

    @property
    def target_headway(self):
        """Seconds by which the aggressive vehicle precedes the ego at the conflict point"""
        return {'Low': None, 'Medium': 1.5, 'High': 0.5}[self.value]


class WarningLead(models.TextChoices):
    NONE = 'None', 'No warning'
    ONE_SECOND = 'OneSecond', '1 s warning'
    TWO_SECONDS = 'TwoSeconds', '2 s warning'

    @property
    def seconds(self):
        return {'None': None, 'OneSecond': 1.0, 'TwoSeconds': 2.0}[self.value]


class Decision(models.TextChoices):
    STOP = 'Stop', 'Stop'
    GO = 'Go', 'Go'
    RULE = 'Rule', 'Headway threshold rule'


@dataclass(frozen=True)
class DriverModel:
    """
    Parametric ego driver. Decelerations are negative.

    The driver notices the aggressive vehicle once the predicted collision
    is ``visual_detection_ttc`` seconds away (earlier if warned) and acts
    ``reaction_time`` later. A Stop ramps towards ``comfortable_decel``;
    when the net distance projected at that level falls below
    ``escalation_net_distance`` the braking escalates towards
    ``emergency_decel`` in proportion to the shortfall.
    """
    reaction_time: float = 0.3
    decision: str = Decision.STOP
    comfortable_decel: float = -7.8
    emergency_decel: float = -10.5
    go_accel: float = 2.0
    approach_speed_limit: float = round(45 * MPH, 2)
    circulating_speed_limit: float = round(15 * MPH, 2)
    go_headway_threshold: float = -0.8
    visual_detection_ttc: float = 0.8
    ramp_time: float = 0.3
    stop_clearance: float = 4.5
    escalation_net_distance: float = 5.0
    speed_gain: float = 0.5
    max_accel: float = 2.0
    max_normal_decel: float = -3.0
    anticipation_decel: float = 1.5
    anticipation_margin: float = 15.0
    time_gap: float = 1.0
    standstill_gap: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, 'decision', Decision(self.decision))
        if self.reaction_time < 0:
            raise ValueError(f"reaction_time must be >= 0, got {self.reaction_time}")
        if not self.emergency_decel <= self.comfortable_decel < 0:
            raise ValueError("decelerations must satisfy emergency_decel <= comfortable_decel < 0")
        if self.go_accel <= 0:
            raise ValueError(f"go_accel must be > 0, got {self.go_accel}")
        if not 0 < self.circulating_speed_limit <= self.approach_speed_limit:
            raise ValueError("speed limits must satisfy 0 < circulating <= approach")
        if self.visual_detection_ttc < 0:
            raise ValueError(f"visual_detection_ttc must be >= 0, got {self.visual_detection_ttc}")
        if self.escalation_net_distance <= 0:
            raise ValueError(f"escalation_net_distance must be > 0, got {self.escalation_net_distance}")
        if self.ramp_time <= 0 or self.speed_gain <= 0 or self.time_gap <= 0:
            raise ValueError("ramp_time, speed_gain and time_gap must be > 0")

    def escalates(self, net_distance):
        return net_distance < self.escalation_net_distance

    def braking_decel(self, net_distance):
        """
        Braking level (positive, m/s^2) for a Stop whose projected net
        distance at comfortable braking is ``net_distance`` metres
        """
        comfortable, emergency = -self.comfortable_decel, -self.emergency_decel
        shortfall = (self.escalation_net_distance - net_distance) / self.escalation_net_distance
        shortfall = min(max(shortfall, 0.0), 1.0)
        return comfortable + (emergency - comfortable) * shortfall


@dataclass(frozen=True)
class GeometrySpec:
    """Idealized single-lane roundabout; lengths in metres"""
    radius: float = 20.0
    ego_approach_length: float = 160.0
    aggressive_approach_length: float = 90.0
    exit_length: float = 30.0
    yield_setback: float = 6.5
    sample_spacing: float = 0.1

    def __post_init__(self):
        for name in ('radius', 'ego_approach_length', 'aggressive_approach_length', 'exit_length', 'sample_spacing'):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0 < self.yield_setback < self.aggressive_approach_length:
            raise ValueError("yield_setback must lie on the aggressive approach")


@dataclass(frozen=True)
class ScenarioConfig:
    aggressiveness: str = AggressivenessLevel.HIGH
    warning_lead: str = WarningLead.NONE
    driver: DriverModel = field(default_factory=DriverModel)
    geometry: GeometrySpec = field(default_factory=GeometrySpec)
    dt: float = None
    seed: int = 0
    aggressive_speed: float = 4.5
    jitter_fraction: float = None
    warning_latency: float = None

    def __post_init__(self):
        object.__setattr__(self, 'aggressiveness', AggressivenessLevel(self.aggressiveness))
        object.__setattr__(self, 'warning_lead', WarningLead(self.warning_lead))
        if self.dt is None:
            object.__setattr__(self, 'dt', settings.SIM_DT)
        if self.jitter_fraction is None:
            object.__setattr__(self, 'jitter_fraction', settings.JITTER_FRACTION)
        if self.warning_latency is None:
            object.__setattr__(self, 'warning_latency', settings.WARNING_LATENCY_S)
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.aggressive_speed <= 0:
            raise ValueError(f"aggressive_speed must be > 0, got {self.aggressive_speed}")
        if self.jitter_fraction < 0 or self.warning_latency < 0:
            raise ValueError("jitter_fraction and warning_latency must be >= 0")

    def with_cell(self, aggressiveness, warning_lead, driver=None):
        return replace(self, aggressiveness=aggressiveness, warning_lead=warning_lead, driver=driver or self.driver)


@dataclass
class TrialResult:
    """
    Everything one simulated trial produced. ``ego_s``/``aggressive_s`` are
    the along-path positions behind the recorded trajectories.
    """
    trial_id: str
    config: ScenarioConfig
    ego: object
    aggressive: object
    ego_s: list
    aggressive_s: list
    warning: object = None
    outcome: str = None
    collision: bool = False
    t_contact: float = None
    entry_time: float = None
    cue_time: float = None
    action_time: float = None
    escalated: bool = False
    predicted_net: float = None
    nominal_ego_arrival: float = None
    planned_aggressive_arrival: float = None
    realized_headway: float = None
    subject: str = ''

    @property
    def aggressiveness(self):
        return self.config.aggressiveness

    @property
    def warning_lead(self):
        return self.config.warning_lead

    @property
    def ego_max_speed(self):
        return float(max(self.ego.v)) if len(self.ego) else math.nan
