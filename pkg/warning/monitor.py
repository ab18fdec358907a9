import logging

from django.conf import settings

from scenario.geometry import path_point

from .models import WarningEvent
from .prediction import collision_time_along_paths

logger = logging.getLogger(__name__)

# issue test tolerance against float drift of the step clock
ISSUE_TOLERANCE_S = 1e-9


class WarningMonitor:
    """
    Per-trial warning state. ``step`` re-predicts the potential collision
    time at every simulation step and emits at most one WarningEvent, at the
    first step where the predicted collision is ``lead`` seconds away or
    closer. A ``lead`` of None disables the monitor.
    """

    def __init__(self, lead, geometry, contact_distance, horizon=None, latency=None):
        self.lead = lead
        self.geometry = geometry
        self.contact_distance = contact_distance
        self.horizon = settings.WARNING_HORIZON_S if horizon is None else horizon
        self.latency = settings.WARNING_LATENCY_S if latency is None else latency
        self.event = None
        self.last_prediction = None

    @property
    def enabled(self):
        return self.lead is not None

    def predict(self, t, s_ego, v_ego, s_agg, v_agg):
        if not self.geometry.conflict_open(s_ego, s_agg):
            return None
        return collision_time_along_paths(
            self.geometry, s_ego, v_ego, s_agg, v_agg, self.contact_distance, t, self.horizon,
        )

    def step(self, t, s_ego, v_ego, a_ego, s_agg, v_agg, a_agg):
        """Returns the WarningEvent on the step it is issued, else None"""
        if not self.enabled or self.event is not None:
            return None
        self.last_prediction = self.predict(t, s_ego, v_ego, s_agg, v_agg)
        if self.last_prediction is None:
            return None
        if self.last_prediction - t > self.lead + ISSUE_TOLERANCE_S:
            return None
        self.event = WarningEvent(
            t_issue=t,
            t_predicted_collision=self.last_prediction,
            lead=self.lead,
            ego_state_at_issue=path_point(self.geometry.ego_path, t, s_ego, v_ego, a_ego),
            aggressive_state_at_issue=path_point(self.geometry.aggressive_path, t, s_agg, v_agg, a_agg),
            t_delivery=t + self.latency,
        )
        logger.debug(
            "Warning issued at t=%.2f for predicted collision at t=%.2f (lead %.1f s)",
            t, self.last_prediction, self.lead,
        )
        return self.event


def monitor_trace(trace, lead, geometry, contact_distance, horizon=None, latency=None):
    """
    Run a monitor over a recorded trace of ``(t, s_ego, v_ego, s_agg, v_agg)``
    rows and return the WarningEvent or None
    """
    monitor = WarningMonitor(lead, geometry, contact_distance, horizon, latency)
    for t, s_ego, v_ego, s_agg, v_agg in trace:
        event = monitor.step(t, s_ego, v_ego, 0.0, s_agg, v_agg, 0.0)
        if event is not None:
            return event
    return None
