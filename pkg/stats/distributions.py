import math

from scipy import stats


def f_upper_tail(F, df1, df2):
    """P(X > F) for X ~ F(df1, df2)"""
    if F < 0 or df1 < 1 or df2 <= 0:
        raise ValueError(f"invalid F tail arguments F={F}, df1={df1}, df2={df2}")
    if math.isinf(F):
        return 0.0
    return float(stats.f.sf(F, df1, df2))
