"""Forecast verification: contingency-table scores and continuous error metrics.

For the definition of the categorical scores see
https://www.cawcr.gov.au/projects/verification/verif_web_page.html
A zero denominator yields MetricValue.undefined() rather than 0 or NaN.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from atloss.config import PSNR_CAP_DB
from atloss.core.exceptions import InvalidParameterError
from atloss.core.loss import ArrayOrField, as_array, check_same_shape, indicator
from atloss.core.models import ContingencyTable, MetricValue

logger = logging.getLogger(__name__)


def contingency(x_field: ArrayOrField, y_field: ArrayOrField, theta: float) -> ContingencyTable:
    """
    Classifies every cell by (f(x), f(y)).

    Args:
        x_field: Observation.
        y_field: Forecast.
        theta: Threshold (mm/h).
    """
    x = as_array(x_field)
    y = as_array(y_field)
    check_same_shape(x, y)
    observed = indicator(x, theta).astype(bool)
    forecast = indicator(y, theta).astype(bool)
    return ContingencyTable(
        hits=int(np.count_nonzero(observed & forecast)),
        misses=int(np.count_nonzero(observed & ~forecast)),
        false_alarms=int(np.count_nonzero(~observed & forecast)),
        correct_negatives=int(np.count_nonzero(~observed & ~forecast)),
    )


def csi(t: ContingencyTable) -> MetricValue:
    """Critical success index h / (h + m + fa); undefined when nothing is observed or forecast."""
    return MetricValue.ratio(t.hits, t.hits + t.misses + t.false_alarms)


def pod_far_hss(t: ContingencyTable) -> tuple[MetricValue, MetricValue, MetricValue]:
    """Probability of detection, false alarm ratio, Heidke skill score."""
    h, m, fa, cn = t.hits, t.misses, t.false_alarms, t.correct_negatives
    pod = MetricValue.ratio(h, h + m)
    far = MetricValue.ratio(fa, h + fa)
    hss = MetricValue.ratio(2 * (h * cn - m * fa), (h + m) * (m + cn) + (h + fa) * (fa + cn))
    return pod, far, hss


def frequency_bias(t: ContingencyTable) -> MetricValue:
    """Forecast over observed event frequency, (h + fa) / (h + m)."""
    return MetricValue.ratio(t.hits + t.false_alarms, t.hits + t.misses)


def accuracy(t: ContingencyTable) -> MetricValue:
    """Fraction correct, (h + cn) / n."""
    return MetricValue.ratio(t.hits + t.correct_negatives, t.n)


def mae_psnr(
    a: ArrayOrField, b: ArrayOrField, peak: float, cap_db: float = PSNR_CAP_DB
) -> tuple[float, float]:
    """
    Mean absolute error and peak signal-to-noise ratio between two fields.

    Identical inputs return cap_db as the PSNR.
    """
    if not (math.isfinite(peak) and peak > 0):
        raise InvalidParameterError(f"peak must be > 0, got {peak}")
    x = as_array(a)
    y = as_array(b)
    check_same_shape(x, y)
    diff = x - y
    mae = float(np.mean(np.abs(diff)))
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return mae, cap_db
    return mae, float(min(10.0 * math.log10(peak * peak / mse), cap_db))


def aggregate(values: Iterable[MetricValue]) -> tuple[MetricValue, int]:
    """Mean over defined values and the number of undefined ones excluded."""
    defined = []
    excluded = 0
    for v in values:
        if v.is_defined:
            defined.append(v.value)
        else:
            excluded += 1
    if not defined:
        return MetricValue.undefined(), excluded
    return MetricValue(float(np.mean(defined))), excluded


@dataclass
class MetricRow:
    """One verification row: categorical scores plus continuous errors."""

    threshold: float
    lead_time: float
    csi: MetricValue
    hss: MetricValue
    pod: MetricValue
    far: MetricValue
    mae: float
    psnr: float
    excluded: int = 0

    @classmethod
    def from_table(
        cls,
        table: ContingencyTable,
        threshold: float,
        lead_time: float,
        mae: float,
        psnr: float,
    ) -> MetricRow:
        pod, far, hss = pod_far_hss(table)
        return cls(threshold, lead_time, csi(table), hss, pod, far, mae, psnr)


@dataclass
class CategoricalScores:
    """Per-field categorical scores averaged over a stack, with exclusion counts."""

    csi: MetricValue
    hss: MetricValue
    pod: MetricValue
    far: MetricValue
    excluded: int
    pooled: ContingencyTable


def score_stack(observed: np.ndarray, forecast: np.ndarray, theta: float) -> CategoricalScores:
    """
    Scores each (observed[i], forecast[i]) pair and averages the defined values.

    excluded counts the pairs whose CSI is undefined (all-dry in both fields).
    """
    check_same_shape(np.asarray(observed), np.asarray(forecast))
    tables = [contingency(o, f, theta) for o, f in zip(observed, forecast)]
    per_field = [(csi(t), *pod_far_hss(t)) for t in tables]
    mean_csi, excluded = aggregate(p[0] for p in per_field)
    mean_pod, _ = aggregate(p[1] for p in per_field)
    mean_far, _ = aggregate(p[2] for p in per_field)
    mean_hss, _ = aggregate(p[3] for p in per_field)
    pooled = ContingencyTable(0, 0, 0, 0)
    for t in tables:
        pooled = pooled + t
    return CategoricalScores(mean_csi, mean_hss, mean_pod, mean_far, excluded, pooled)
