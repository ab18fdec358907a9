from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class WarningEvent:
    """
    Infrastructure warning. ``t_delivery`` is when the driver receives it
    (issue time plus transmission latency).
    """
    t_issue: float
    t_predicted_collision: float
    lead: float
    ego_state_at_issue: object
    aggressive_state_at_issue: object
    t_delivery: float = None

    def __post_init__(self):
        if self.lead not in (1.0, 2.0):
            raise ValueError(f"warning lead must be 1.0 or 2.0 s, got {self.lead}")
        if self.t_delivery is None:
            object.__setattr__(self, 't_delivery', self.t_issue)

    def to_dict(self):
        return asdict(self)
