//! Seeded synthetic data: metered demand panels, grid carbon intensity,
//! and complete scheduling instances.
//!
//! Every generator is a pure function of [`GenParams`]; each component
//! draws from its own derived stream (see [`crate::rng::derive_seed`]),
//! so e.g. changing the number of customers never perturbs the carbon
//! series produced for the same seed.
//!
//! Scheduling instances are built "commitment-first": the generator
//! first picks, per interval, how many fleet units run (chasing a
//! sinusoidal utilization curve) and which intervals host curtailment
//! events, then *defines* the demand as the exact sum of those
//! commitments. Demand response is event-based: the operator calls a
//! handful of event intervals and every enrolled load curtails in all
//! of them, so each load's contracted activation count equals the
//! number of events.
//!
//! The fleet is standardized — every unit shares one capacity rating
//! and one energy rating, both drawn once per instance, so units are
//! interchangeable and every minimum-cost schedule carries the same
//! carbon figure.
//! All flow quantities are integer multiples of a common 5 kWh quantum
//! and the total curtailable load is strictly smaller than one unit's
//! capacity, which makes the per-interval decomposition of demand into
//! (units running, event or not) unique: a zero-residual schedule
//! exists by construction, and — with
//! [`crate::scheduler::calibrate_penalties`] — the QUBO optimum is
//! violation-free.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::carbon::{CarbonIntensitySeries, EnergySeries};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, SplitMix64};
use crate::scheduler::{Compressor, DrLoad, SchedulingInstance};

/// Generator configuration. Defaults describe a 60-day, 50-node,
/// 200-customer panel at 15-minute metering, and a one-day hourly
/// scheduling instance with 4 compressors and 8 curtailable loads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    pub seed: u64,
    /// Days covered by the demand/consumption panels.
    pub days: usize,
    /// Pipeline nodes in the synthetic network panel.
    pub nodes: usize,
    /// Metered customers in the consumption panel.
    pub customers: usize,
    /// Metering intervals per day (96 = 15-minute).
    pub intervals_per_day: usize,
    /// Compressor units in the scheduling instance.
    pub compressors: usize,
    /// Curtailable loads in the scheduling instance.
    pub dr_loads: usize,
    /// Scheduling horizon in hourly intervals.
    pub horizon: usize,
    /// Carbon-intensity bounds in gCO2/kWh.
    pub carbon_min: f64,
    pub carbon_max: f64,
    /// Gaussian noise on the demand/consumption shapes (kWh).
    pub demand_noise_std: f64,
    /// Gaussian noise on the carbon sinusoid (gCO2/kWh).
    pub carbon_noise_std: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: crate::DEFAULT_SEED,
            days: 60,
            nodes: 50,
            customers: 200,
            intervals_per_day: 96,
            compressors: 4,
            dr_loads: 8,
            horizon: 24,
            carbon_min: 100.0,
            carbon_max: 600.0,
            demand_noise_std: 0.05,
            carbon_noise_std: 25.0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        for (v, what) in [
            (self.days, "days"),
            (self.nodes, "nodes"),
            (self.customers, "customers"),
            (self.intervals_per_day, "intervals_per_day"),
            (self.compressors, "compressors"),
            (self.horizon, "horizon"),
        ] {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{what} must be >= 1")));
            }
        }
        if !self.carbon_min.is_finite() || !self.carbon_max.is_finite() {
            return Err(Error::InvalidParameter("carbon bounds must be finite".into()));
        }
        if self.carbon_min < 0.0 || self.carbon_min > self.carbon_max {
            return Err(Error::InvalidParameter(format!(
                "carbon bounds must satisfy 0 <= min <= max, got [{}, {}]",
                self.carbon_min, self.carbon_max
            )));
        }
        for (v, what) in [
            (self.demand_noise_std, "demand_noise_std"),
            (self.carbon_noise_std, "carbon_noise_std"),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{what} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Derived-stream tags, one per independent generator component.
mod stream {
    pub const DEMAND: u64 = 1;
    pub const CARBON: u64 = 2;
    pub const PRICE: u64 = 3;
    pub const FLEET: u64 = 4;
    pub const EVENTS: u64 = 5;
    pub const SCHED_CARBON: u64 = 6;
    pub const TARGET: u64 = 7;
    pub const CUSTOMER_BASE: u64 = 0x1000;
    pub const NODE_BASE: u64 = 0x10_0000;
}

/// Double-peaked intraday load shape in [-1, 1]; `pos` is the fraction
/// of the day elapsed.
fn daily_shape(pos: f64) -> f64 {
    0.6 * (TAU * pos - 2.6).sin() + 0.4 * (2.0 * TAU * pos - 0.9).sin()
}

/// Weekday/weekend modulation (days 5 and 6 of each week are quieter).
fn weekend_factor(day: usize) -> f64 {
    if day % 7 >= 5 {
        0.85
    } else {
        1.0
    }
}

/// Synthetic metered demand over the full panel window, kWh per
/// interval: daily double peak, weekly modulation, Gaussian noise,
/// clipped at zero.
pub fn gen_demand(params: &GenParams) -> Result<Vec<f64>> {
    params.validate()?;
    let mut rng = SplitMix64::new(derive_seed(params.seed, stream::DEMAND));
    Ok(shaped_series(
        params,
        &mut rng,
        0.25,
        0.15,
        params.demand_noise_std,
    ))
}

/// One value per interval of the panel window, built from the shared
/// intraday/weekly shape: `(base + amp * shape) * weekend + noise`,
/// clipped at zero. Always consumes one normal draw per interval so the
/// stream layout does not depend on the noise level.
fn shaped_series(
    params: &GenParams,
    rng: &mut SplitMix64,
    base: f64,
    amp: f64,
    noise_std: f64,
) -> Vec<f64> {
    let ipd = params.intervals_per_day;
    let mut values = Vec::with_capacity(params.days * ipd);
    for day in 0..params.days {
        for i in 0..ipd {
            let pos = i as f64 / ipd as f64;
            let v = (base + amp * daily_shape(pos)) * weekend_factor(day)
                + noise_std * rng.normal();
            values.push(v.max(0.0));
        }
    }
    values
}

/// Synthetic grid carbon intensity over the panel window: a diurnal
/// sinusoid between the configured bounds (low overnight, peaking
/// midday) plus Gaussian noise, clamped to the bounds.
pub fn gen_carbon_intensity(params: &GenParams) -> Result<CarbonIntensitySeries> {
    params.validate()?;
    let mut rng = SplitMix64::new(derive_seed(params.seed, stream::CARBON));
    let ipd = params.intervals_per_day;
    let values = carbon_values(params, &mut rng, params.days * ipd, ipd);
    CarbonIntensitySeries::new(values, 24.0 / ipd as f64, 0)
}

fn carbon_values(
    params: &GenParams,
    rng: &mut SplitMix64,
    len: usize,
    intervals_per_day: usize,
) -> Vec<f64> {
    let mid = 0.5 * (params.carbon_min + params.carbon_max);
    let amp = 0.5 * (params.carbon_max - params.carbon_min);
    (0..len)
        .map(|i| {
            let pos = (i % intervals_per_day) as f64 / intervals_per_day as f64;
            let v = mid - amp * (TAU * pos).cos() + params.carbon_noise_std * rng.normal();
            v.clamp(params.carbon_min, params.carbon_max)
        })
        .collect()
}

/// Per-customer consumption panel: each customer scales the shared load
/// shape by its own factor in [0.5, 2.0) and adds its own noise.
pub fn gen_consumption_panel(params: &GenParams) -> Result<Vec<EnergySeries>> {
    params.validate()?;
    let interval_hours = 24.0 / params.intervals_per_day as f64;
    (0..params.customers)
        .map(|cust| {
            let mut rng = SplitMix64::new(derive_seed(
                params.seed,
                stream::CUSTOMER_BASE + cust as u64,
            ));
            let scale = rng.uniform(0.5, 2.0);
            let values = shaped_series(
                params,
                &mut rng,
                0.25 * scale,
                0.15 * scale,
                params.demand_noise_std * scale,
            );
            EnergySeries::new(values, interval_hours, 0)
        })
        .collect()
}

/// Per-node pipeline flow panel (flow units per interval), one series
/// per network node.
pub fn gen_node_panel(params: &GenParams) -> Result<Vec<Vec<f64>>> {
    params.validate()?;
    Ok((0..params.nodes)
        .map(|node| {
            let mut rng =
                SplitMix64::new(derive_seed(params.seed, stream::NODE_BASE + node as u64));
            let scale = rng.uniform(50.0, 200.0);
            shaped_series(params, &mut rng, scale, 0.3 * scale, 0.02 * scale)
        })
        .collect())
}

/// Curtailment per load in kWh. One 5 kWh quantum: balance residuals
/// then come only in steps of 5, which removes off-by-one
/// near-feasible traps from the penalty landscape and lets
/// [`crate::scheduler::calibrate_penalties`] divide the pressure
/// weight by the squared quantum (see its docs).
const CURTAIL_KWH: f64 = 5.0;

/// Generate one scheduling instance (hourly intervals, commitment-first
/// demand, event-based demand response; see the module docs).
pub fn gen_scheduling_instance(params: &GenParams) -> Result<SchedulingInstance> {
    params.validate()?;
    let horizon = params.horizon;
    let n_units = params.compressors;

    // Standardized fleet: interchangeable units sharing one capacity
    // rating and one energy rating, both drawn once per instance. The
    // capacity is kept at least two quanta above the total curtailable
    // load: demand then decomposes uniquely into (units running, event
    // or not) per interval, and absorbing an event block into a spare
    // unit is never a near-feasible trap. Interchangeable units also
    // make every minimum-cost schedule carry the same carbon figure,
    // so solver comparisons measure scheduling quality, not luck in
    // breaking ties between units.
    let mut fleet_rng = SplitMix64::new(derive_seed(params.seed, stream::FLEET));
    let rating_lo = 6.max(params.dr_loads + 2) as i64;
    let capacity = CURTAIL_KWH * fleet_rng.int_range(rating_lo, rating_lo + 1) as f64;
    let energy_per_interval = fleet_rng.int_range(40, 90) as f64;
    let compressors: Vec<Compressor> = (0..n_units)
        .map(|_| Compressor { capacity, energy_per_interval })
        .collect();

    // Hourly price curve: evening peak plus noise.
    let mut price_rng = SplitMix64::new(derive_seed(params.seed, stream::PRICE));
    let price: Vec<f64> = (0..horizon)
        .map(|t| {
            let pos = (t % 24) as f64 / 24.0;
            (0.22 + 0.12 * (TAU * pos - 2.4).sin() + 0.02 * price_rng.normal())
                .clamp(0.05, 0.60)
        })
        .collect();

    // Hourly carbon intensity aligned with the scheduling horizon.
    let mut carbon_rng = SplitMix64::new(derive_seed(params.seed, stream::SCHED_CARBON));
    let carbon = CarbonIntensitySeries::new(
        carbon_values(params, &mut carbon_rng, horizon, 24),
        1.0,
        0,
    )?;

    // Committed unit counts: chase a sinusoidal utilization curve that
    // dips low overnight, always holding one unit back as spinning
    // reserve (so every interval keeps headroom for an event block or
    // an outage).
    let reserve_cap = n_units.saturating_sub(1);
    let mut target_rng = SplitMix64::new(derive_seed(params.seed, stream::TARGET));
    let mut counts: Vec<usize> = (0..horizon)
        .map(|t| {
            let pos = (t % 24) as f64 / 24.0;
            let frac = 0.15
                + 0.65 * (0.5 + 0.5 * (TAU * pos - 2.0).sin())
                + 0.05 * target_rng.next_f64();
            ((n_units as f64 * frac).round() as usize).min(reserve_cap)
        })
        .collect();

    // Curtailment events: every load curtails at once, so each load's
    // contracted activation count is the number of events. Events are
    // placed only at intervals that are committed but not saturated
    // (at least one unit running, at least one idle): the idle unit
    // keeps a no-DR baseline feasible, and the running base load
    // anchors the interval so the event block is never an isolated
    // demand island.
    let mut n_events = 0;
    let mut is_event = vec![false; horizon];
    if params.dr_loads > 0 {
        let mut events_rng = SplitMix64::new(derive_seed(params.seed, stream::EVENTS));
        let lo = 2.min(horizon) as i64;
        let hi = 4.min(horizon) as i64;
        n_events = events_rng.int_range(lo, hi) as usize;
        // A single-unit fleet has no partially-loaded intervals; fall
        // back to idle ones.
        let hosts = |c: usize| {
            if n_units == 1 {
                c == 0
            } else {
                (1..n_units).contains(&c)
            }
        };
        let mut eligible: Vec<usize> = (0..horizon).filter(|&t| hosts(counts[t])).collect();
        // If the utilization curve leaves too few such intervals,
        // nudge the earliest non-hosting intervals into range.
        for t in 0..horizon {
            if eligible.len() >= n_events {
                break;
            }
            if !hosts(counts[t]) {
                counts[t] = if counts[t] == 0 { 1 } else { counts[t] - 1 };
                eligible.push(t);
            }
        }
        eligible.sort_unstable();
        events_rng.shuffle(&mut eligible);
        for &t in eligible.iter().take(n_events) {
            is_event[t] = true;
        }
    }
    let dr_loads: Vec<DrLoad> = (0..params.dr_loads)
        .map(|_| DrLoad { curtail_kwh: CURTAIL_KWH, target_intervals: n_events })
        .collect();

    // Demand is the exact sum of the commitments (integers, so exact
    // in floating point): the committed schedule has zero residual.
    let event_kwh = CURTAIL_KWH * params.dr_loads as f64;
    let demand: Vec<f64> = (0..horizon)
        .map(|t| capacity * counts[t] as f64 + if is_event[t] { event_kwh } else { 0.0 })
        .collect();

    SchedulingInstance::new(horizon, 1.0, compressors, dr_loads, price, demand, carbon)
}
