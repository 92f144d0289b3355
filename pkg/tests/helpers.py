"""Shared scenario builders for the test suite."""
import numpy as np

from drdp import LoadProfile, PrivacyParams, Scenario, Tariff, spawn_streams, synthesize


def synth_scenario(
    n_meters=10,
    n_days=3,
    *,
    epsilon=0.5,
    epsilon2=None,
    mu=0.0,
    delta_f=1.0,
    seed=42,
    peak_factor=12000.0,
    unit_price=10.0,
    peak_price=25.0,
    amplitude_scale=None,
):
    """Synthetic household scenario with the standard two-peak profile."""
    profile = LoadProfile(amplitude_scale=amplitude_scale)
    synthesis_rng, _, _ = spawn_streams(seed, n_meters)
    readings = synthesize(n_meters, n_days, profile, synthesis_rng)
    return Scenario(
        n_meters=n_meters,
        n_slots=readings.shape[1],
        readings=readings,
        tariff=Tariff(unit_price, peak_price, peak_factor),
        meter_params=PrivacyParams(epsilon, mu, delta_f),
        grid_params=PrivacyParams(epsilon if epsilon2 is None else epsilon2, mu, delta_f),
        seed=seed,
    )


def matrix_scenario(
    readings,
    *,
    epsilon=0.5,
    seed=7,
    peak_factor=12000.0,
    unit_price=10.0,
    peak_price=25.0,
    delta_f=1.0,
):
    """Scenario wrapping an explicit meter-by-slot readings matrix."""
    readings = np.asarray(readings, dtype=float)
    return Scenario(
        n_meters=readings.shape[0],
        n_slots=readings.shape[1],
        readings=readings,
        tariff=Tariff(unit_price, peak_price, peak_factor),
        meter_params=PrivacyParams(epsilon, 0.0, delta_f),
        grid_params=PrivacyParams(epsilon, 0.0, delta_f),
        seed=seed,
    )
