from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class FactorialSample:
    """One metric reading of a subject in a warning x aggressiveness cell"""
    subject_id: str
    warning_level: str
    aggressiveness: str
    value: float


@dataclass(frozen=True)
class EffectRow:
    effect: str
    df: int
    error_df: int
    sum_of_squares: float
    mean_square: float
    error_mean_square: float
    F: float
    p: float
    partial_eta_sq: float
    degenerate: bool = False


@dataclass
class AnovaResult:
    """
    Two-way within-subjects ANOVA table. ``ss`` holds every component of the
    total sum of squares, subjects and error strata included.
    """
    warning: EffectRow
    aggressiveness: EffectRow
    interaction: EffectRow
    n_subjects: int
    ss: dict = field(default_factory=dict)

    TABLE_COLUMNS = ('effect', 'df', 'error_df', 'mean_square', 'F', 'p', 'partial_eta_sq')

    @property
    def rows(self):
        return [self.warning, self.aggressiveness, self.interaction]

    def table(self):
        return [{name: asdict(row)[name] for name in self.TABLE_COLUMNS} for row in self.rows]

    def to_dict(self):
        return {
            'n_subjects': self.n_subjects,
            'effects': [asdict(row) for row in self.rows],
            'sum_of_squares': dict(self.ss),
        }


@dataclass(frozen=True)
class ContrastResult:
    factor: str
    group_a: tuple
    group_b: tuple
    F: float
    df1: int
    df2: int
    p: float
    mean_difference: float
