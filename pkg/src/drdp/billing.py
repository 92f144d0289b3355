"""Grid-utility side: noise adjustment, regional peak detection, and
per-home dynamic billing.

The utility never sees true readings. It works from the protected reports:
it subtracts fresh noise magnitudes, sums the region to decide whether a
peak is in place, and bills each home against the fair per-home share of
the peak threshold — homes at or above the share pay the peak price, homes
below it keep the base price.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .metering import ProtectedReading, Scenario, report_slot
from .noise import PrivacyParams, adjust_reading, spawn_streams

__all__ = [
    "Tariff",
    "MeterSlotBill",
    "SlotBillingResult",
    "ScenarioResult",
    "OpCounter",
    "adjust_slot",
    "detect_peak",
    "bill_slot",
    "run_scenario",
    "baseline_flat_peak_bill",
]


@dataclass(frozen=True)
class Tariff:
    """Pricing parameters: base and peak price per Wh, and the regional
    consumption threshold (in Wh) at which a slot counts as a peak."""

    unit_price: float = 10.0
    peak_price: float = 25.0
    peak_factor: float = 12000.0

    def __post_init__(self) -> None:
        if self.unit_price <= 0:
            raise ValueError(f"unit_price must be positive, got {self.unit_price}")
        if self.peak_price <= 0:
            raise ValueError(f"peak_price must be positive, got {self.peak_price}")
        if self.peak_factor <= 0:
            raise ValueError(f"peak_factor must be positive, got {self.peak_factor}")
        if self.peak_price <= self.unit_price:
            warnings.warn(
                f"peak_price {self.peak_price} does not exceed unit_price "
                f"{self.unit_price}; peak slots carry no surcharge",
                stacklevel=2,
            )


@dataclass(frozen=True)
class MeterSlotBill:
    """One home's bill for one slot.

    ``d_f`` is the Wh distance from the slot's fair share, only defined
    while a peak is in place.
    """

    meter_id: int
    b_r: float
    charged_peak: bool
    i_b: float
    d_f: float | None


@dataclass(frozen=True)
class SlotBillingResult:
    """Outcome of billing one slot across the whole region."""

    slot: int
    peak_in_place: bool
    regional_sum: float
    average: float | None
    bills: tuple[MeterSlotBill, ...]


@dataclass(frozen=True)
class ScenarioResult:
    """All per-slot outcomes of a scenario, plus dense matrices for analysis.

    Row order in every matrix matches ``scenario.meter_ids``.
    """

    scenario: Scenario
    slots: tuple[SlotBillingResult, ...]
    totals_cents: np.ndarray
    bills_cents: np.ndarray
    protected: np.ndarray
    adjusted: np.ndarray

    @property
    def peak_slot_count(self) -> int:
        return sum(1 for s in self.slots if s.peak_in_place)

    @property
    def total_adjusted_wh(self) -> float:
        return float(self.adjusted.sum())


@dataclass
class OpCounter:
    """Tally of per-meter sub-operations, for scaling measurements."""

    protect: int = 0
    adjust: int = 0
    sum_terms: int = 0
    bill: int = 0

    @property
    def total(self) -> int:
        return self.protect + self.adjust + self.sum_terms + self.bill


def adjust_slot(
    protected: list[ProtectedReading],
    grid_params: PrivacyParams,
    rng: np.random.Generator,
) -> list[tuple[int, float]]:
    """Subtract a fresh noise magnitude from each protected report.

    Returns ``(meter_id, b_r)`` pairs in report order; each b_r is the
    billing basis for that home.
    """
    return [
        (record.meter_id, adjust_reading(record.p_v, grid_params, rng))
        for record in protected
    ]


def detect_peak(adjusted: list[float], tariff: Tariff) -> tuple[bool, float | None]:
    """Decide the regional peak state for one slot.

    A peak is in place when the summed billing bases reach the threshold
    (inclusive). In that case the per-home fair share — threshold divided
    by number of homes — is returned as the comparison average; otherwise
    the average is None.
    """
    if len(adjusted) == 0:
        raise ValueError("cannot detect a peak over zero meters")
    total = float(sum(adjusted))
    if total >= tariff.peak_factor:
        return True, tariff.peak_factor / len(adjusted)
    return False, None


def bill_slot(
    slot: int,
    adjusted: list[tuple[int, float]],
    peak_in_place: bool,
    average: float | None,
    tariff: Tariff,
) -> SlotBillingResult:
    """Price one slot for every home.

    Off-peak, everyone pays ``b_r * unit_price``. During a peak, homes at or
    above the fair share pay ``b_r * peak_price`` and the rest stay at the
    base price, so staying below the share is always the cheaper outcome.
    """
    if peak_in_place != (average is not None):
        raise ValueError("average must be present exactly when a peak is in place")
    bills = []
    regional_sum = 0.0
    for meter_id, b_r in adjusted:
        regional_sum += b_r
        if not peak_in_place:
            bills.append(MeterSlotBill(meter_id, b_r, False, b_r * tariff.unit_price, None))
        elif b_r >= average:
            bills.append(
                MeterSlotBill(meter_id, b_r, True, b_r * tariff.peak_price, b_r - average)
            )
        else:
            bills.append(
                MeterSlotBill(meter_id, b_r, False, b_r * tariff.unit_price, average - b_r)
            )
    return SlotBillingResult(
        slot=slot,
        peak_in_place=peak_in_place,
        regional_sum=regional_sum,
        average=average,
        bills=tuple(bills),
    )


def run_scenario(
    scenario: Scenario,
    *,
    noisy: bool = True,
    counter: OpCounter | None = None,
) -> ScenarioResult:
    """Run the full report-adjust-detect-bill pipeline over every slot.

    With ``noisy=False`` both perturbation stages are skipped and billing
    operates on the true readings; everything else is unchanged. Pass an
    ``OpCounter`` to tally per-meter sub-operations.
    """
    _, grid_rng, meter_rngs = spawn_streams(scenario.seed, scenario.n_meters)
    n_meters, n_slots = scenario.n_meters, scenario.n_slots
    protected = np.empty((n_meters, n_slots))
    adjusted = np.empty((n_meters, n_slots))
    bills_cents = np.empty((n_meters, n_slots))
    slot_results = []
    for slot in range(n_slots):
        if noisy:
            reports = report_slot(scenario, slot, meter_rngs)
            pairs = adjust_slot(reports, scenario.grid_params, grid_rng)
        else:
            reports = [
                ProtectedReading(meter_id, slot, float(scenario.readings[index, slot]))
                for index, meter_id in enumerate(scenario.meter_ids)
            ]
            pairs = [(record.meter_id, record.p_v) for record in reports]
        peak_in_place, average = detect_peak([b_r for _, b_r in pairs], scenario.tariff)
        result = bill_slot(slot, pairs, peak_in_place, average, scenario.tariff)
        if counter is not None:
            counter.protect += n_meters
            counter.adjust += n_meters
            counter.sum_terms += n_meters
            counter.bill += n_meters
        slot_results.append(result)
        for index, bill in enumerate(result.bills):
            protected[index, slot] = reports[index].p_v
            adjusted[index, slot] = bill.b_r
            bills_cents[index, slot] = bill.i_b
    return ScenarioResult(
        scenario=scenario,
        slots=tuple(slot_results),
        totals_cents=bills_cents.sum(axis=1),
        bills_cents=bills_cents,
        protected=protected,
        adjusted=adjusted,
    )


def baseline_flat_peak_bill(readings: np.ndarray, tariff: Tariff) -> np.ndarray:
    """Reference pricing without per-home differentiation.

    Whenever the regional sum reaches the threshold, every home pays the
    peak price for that slot — including homes consuming well below the
    fair share. Returns accumulated per-meter totals in cents, using the
    same peak rule and accumulation as the main pipeline so the comparison
    isolates the billing policy.
    """
    readings = np.asarray(readings, dtype=float)
    if readings.ndim != 2:
        raise ValueError(f"expected a meter-by-slot matrix, got shape {readings.shape}")
    n_meters, n_slots = readings.shape
    bills_cents = np.empty_like(readings)
    for slot in range(n_slots):
        column = [float(v) for v in readings[:, slot]]
        peak_in_place, _ = detect_peak(column, tariff)
        price = tariff.peak_price if peak_in_place else tariff.unit_price
        for index, b_r in enumerate(column):
            bills_cents[index, slot] = b_r * price
    return bills_cents.sum(axis=1)
