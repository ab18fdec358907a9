"""
Path-constrained constant-speed prediction of the ego/aggressive pair.
"""
import numpy as np
from django.conf import settings

PREDICTION_STEP_S = 0.01


def _horizon(horizon):
    return settings.WARNING_HORIZON_S if horizon is None else horizon


def _ego_positions(s, v, accel, tau):
    """Arclengths after tau seconds at constant acceleration, stopping at zero speed"""
    if accel >= 0:
        return s + v * tau + 0.5 * accel * tau ** 2
    t_stop = v / -accel
    tau = np.minimum(tau, t_stop)
    return s + v * tau + 0.5 * accel * tau ** 2


def predicted_distances(geometry, s_ego, v_ego, s_agg, v_agg, horizon=None, ego_accel=0.0, step=PREDICTION_STEP_S):
    """(offsets, centre distances) over the prediction grid"""
    tau = np.arange(0.0, _horizon(horizon) + step / 2, step)
    ego = _ego_positions(s_ego, v_ego, ego_accel, tau)
    agg = s_agg + v_agg * tau
    return tau, geometry.center_distance(ego, agg)


def collision_time_along_paths(geometry, s_ego, v_ego, s_agg, v_agg, contact_distance, now,
                               horizon=None, step=PREDICTION_STEP_S):
    """
    Earliest time at which the predicted centre distance drops to the sum of
    radii, or None within the horizon
    """
    tau, dist = predicted_distances(geometry, s_ego, v_ego, s_agg, v_agg, horizon, step=step)
    hits = np.flatnonzero(dist <= contact_distance)
    if hits.size == 0:
        return None
    return now + float(tau[hits[0]])


def min_net_distance(geometry, s_ego, v_ego, ego_accel, s_agg, v_agg, contact_distance, horizon=None):
    """Smallest predicted net distance with the ego braking at ``ego_accel``"""
    _, dist = predicted_distances(geometry, s_ego, v_ego, s_agg, v_agg, horizon, ego_accel=ego_accel)
    return float(dist.min()) - contact_distance


def predict_collision_time(ego, agg, geometry, specs, horizon=None):
    """
    Potential collision time for two TrajectoryPoints. Both samples are
    projected onto their paths and extrapolated at their current speeds;
    the result is an absolute time (first contact) or None.
    """
    spec_i, spec_j = specs
    s_ego = geometry.ego_path.project(ego.x, ego.y)
    s_agg = geometry.aggressive_path.project(agg.x, agg.y)
    return collision_time_along_paths(
        geometry, s_ego, ego.v, s_agg, agg.v, spec_i.radius + spec_j.radius, ego.t, horizon,
    )
