//! Synthetic outdoor temperature signals.
//!
//! Each day gets a sinusoidal diurnal cycle (trough near 4:30 AM, peak near
//! 4:30 PM) plus a seeded day-to-day offset. Values are produced at hourly
//! resolution and then linearly interpolated down to one-minute steps; the
//! two signals (residential and commercial region) use independent offsets.

use rand::Rng;

use crate::plant::rng_for;
use crate::series::{TimeSeries, STEPS_PER_DAY};

const STREAM_WEATHER_RES: u64 = 2;
const STREAM_WEATHER_COM: u64 = 3;

/// Diurnal shape parameters of one region's temperature signal.
#[derive(Debug, Clone, Copy)]
struct Region {
    mean_f: f64,
    amplitude_f: f64,
    day_offset_f: f64,
    peak_hour: f64,
}

const RES_REGION: Region = Region {
    mean_f: 88.0,
    amplitude_f: 9.0,
    day_offset_f: 1.5,
    peak_hour: 16.5,
};

const COM_REGION: Region = Region {
    mean_f: 72.0,
    amplitude_f: 10.0,
    day_offset_f: 4.0,
    peak_hour: 16.5,
};

fn hourly_profile(region: &Region, offset: f64) -> [f64; 25] {
    let mut hourly = [0.0; 25];
    for (h, slot) in hourly.iter_mut().enumerate() {
        let phase = std::f64::consts::TAU * (h as f64 - region.peak_hour) / 24.0;
        *slot = region.mean_f + offset + region.amplitude_f * phase.cos();
    }
    hourly
}

fn interpolate_to_minutes(hourly: &[f64; 25]) -> Vec<f64> {
    let mut out = Vec::with_capacity(STEPS_PER_DAY);
    for minute in 0..STEPS_PER_DAY {
        let h = minute / 60;
        let frac = (minute % 60) as f64 / 60.0;
        out.push(hourly[h] * (1.0 - frac) + hourly[h + 1] * frac);
    }
    out
}

fn region_day(region: &Region, day_index: usize, seed: u64, stream: u64) -> TimeSeries {
    let mut rng = rng_for(seed, (stream << 32) | day_index as u64);
    let offset = rng.random_range(-region.day_offset_f..=region.day_offset_f);
    TimeSeries::from_day(interpolate_to_minutes(&hourly_profile(region, offset)))
}

/// Generates the residential and commercial temperature signals for one day.
pub fn synth_weather(day_index: usize, seed: u64) -> (TimeSeries, TimeSeries) {
    (
        region_day(&RES_REGION, day_index, seed, STREAM_WEATHER_RES),
        region_day(&COM_REGION, day_index, seed, STREAM_WEATHER_COM),
    )
}
