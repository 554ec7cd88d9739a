//! Deterministic carbon accounting: attribute emissions to metered
//! energy with interval-level grid intensities, aggregate them into
//! reporting buckets, and score schedules by their net footprint.
//!
//! All arithmetic is plain elementwise work on aligned series; there is
//! no randomness and no tolerance anywhere in this module.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheduler::{ScheduleDecision, SchedulingInstance};

/// Grid carbon intensity per interval, in gCO2 per kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarbonIntensitySeries {
    /// One intensity per interval.
    pub values: Vec<f64>,
    /// Interval length in hours (e.g. 0.25 for 15-minute metering).
    pub interval_hours: f64,
    /// Index of the first interval relative to midnight of day 0; lets a
    /// series start mid-day while day buckets stay calendar-aligned.
    pub start_index: i64,
}

/// Metered energy per interval, in kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySeries {
    pub values: Vec<f64>,
    pub interval_hours: f64,
    pub start_index: i64,
}

/// Attributed emissions per interval, in gCO2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionSeries {
    pub values: Vec<f64>,
    pub interval_hours: f64,
    pub start_index: i64,
}

fn check_series(context: &'static str, values: &[f64], interval_hours: f64) -> Result<()> {
    if !(interval_hours > 0.0) || !interval_hours.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{context}: interval_hours must be finite and > 0, got {interval_hours}"
        )));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context, index: i });
    }
    Ok(())
}

impl CarbonIntensitySeries {
    pub fn new(values: Vec<f64>, interval_hours: f64, start_index: i64) -> Result<Self> {
        check_series("carbon intensity series", &values, interval_hours)?;
        if let Some(i) = values.iter().position(|&v| v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "carbon intensity at interval {i} is negative ({})",
                values[i]
            )));
        }
        Ok(CarbonIntensitySeries { values, interval_hours, start_index })
    }
}

impl EnergySeries {
    pub fn new(values: Vec<f64>, interval_hours: f64, start_index: i64) -> Result<Self> {
        check_series("energy series", &values, interval_hours)?;
        Ok(EnergySeries { values, interval_hours, start_index })
    }
}

/// Attribute emissions interval by interval: `emissions[i] = energy[i] *
/// intensity[i]`. The two series must be aligned (same length, interval
/// width and start index).
pub fn attribute(
    energy: &EnergySeries,
    intensity: &CarbonIntensitySeries,
) -> Result<EmissionSeries> {
    if energy.values.len() != intensity.values.len() {
        return Err(Error::DimensionMismatch {
            context: "attribute series length",
            expected: energy.values.len(),
            got: intensity.values.len(),
        });
    }
    if energy.interval_hours != intensity.interval_hours {
        return Err(Error::InvalidParameter(format!(
            "attribute: interval widths differ ({} vs {})",
            energy.interval_hours, intensity.interval_hours
        )));
    }
    if energy.start_index != intensity.start_index {
        return Err(Error::InvalidParameter(format!(
            "attribute: start indices differ ({} vs {})",
            energy.start_index, intensity.start_index
        )));
    }
    let values = energy
        .values
        .iter()
        .zip(&intensity.values)
        .map(|(&e, &lambda)| e * lambda)
        .collect();
    Ok(EmissionSeries {
        values,
        interval_hours: energy.interval_hours,
        start_index: energy.start_index,
    })
}

/// Reporting granularity for [`aggregate`]. Months are synthetic 30-day
/// blocks (day 0-29 is month 0, and so on).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Daily,
    Monthly,
    Total,
}

impl FromStr for Bucket {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "daily" => Ok(Bucket::Daily),
            "monthly" => Ok(Bucket::Monthly),
            "total" => Ok(Bucket::Total),
            other => Err(Error::InvalidParameter(format!(
                "unknown bucket '{other}' (expected daily, monthly or total)"
            ))),
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bucket::Daily => "daily",
            Bucket::Monthly => "monthly",
            Bucket::Total => "total",
        })
    }
}

/// Sum an emission series into labelled buckets, in chronological
/// order. Within each bucket, values are added in interval order, so a
/// recomputation over the same indices reproduces the sums bit-exactly.
pub fn aggregate(emissions: &EmissionSeries, bucket: Bucket) -> Vec<(String, f64)> {
    let mut sums: BTreeMap<i64, f64> = BTreeMap::new();
    for (i, &v) in emissions.values.iter().enumerate() {
        let key = match bucket {
            Bucket::Total => 0,
            Bucket::Daily => day_of_interval(emissions, i),
            Bucket::Monthly => day_of_interval(emissions, i).div_euclid(30),
        };
        *sums.entry(key).or_insert(0.0) += v;
    }
    sums.into_iter()
        .map(|(k, v)| {
            let label = match bucket {
                Bucket::Total => "total".to_string(),
                Bucket::Daily => format!("day {k}"),
                Bucket::Monthly => format!("month {k}"),
            };
            (label, v)
        })
        .collect()
}

/// Calendar day containing interval `i` of the series.
fn day_of_interval(em: &EmissionSeries, i: usize) -> i64 {
    let hours = (em.start_index + i as i64) as f64 * em.interval_hours;
    (hours / 24.0).floor() as i64
}

/// Net attributed footprint of a schedule, in gCO2.
///
/// For each interval the compressor fleet consumes the energy of its
/// ON units; activated demand-response curtailments offset that
/// consumption, floored at zero (curtailment can cancel local load but
/// never exports negative emissions). The net energy is then attributed
/// with the instance's intensity series and summed.
pub fn policy_carbon(decision: &ScheduleDecision, instance: &SchedulingInstance) -> Result<f64> {
    instance.check_decision_shape(decision)?;
    let horizon = instance.horizon;
    let mut net = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let consumed: f64 = instance
            .compressors
            .iter()
            .zip(&decision.compressor_on)
            .map(|(c, row)| c.energy_per_interval * f64::from(row[t]))
            .sum();
        let curtailed: f64 = instance
            .dr_loads
            .iter()
            .zip(&decision.dr_active)
            .map(|(d, row)| d.curtail_kwh * f64::from(row[t]))
            .sum();
        net.push((consumed - curtailed).max(0.0));
    }
    let energy = EnergySeries::new(
        net,
        instance.carbon.interval_hours,
        instance.carbon.start_index,
    )?;
    let emissions = attribute(&energy, &instance.carbon)?;
    let buckets = aggregate(&emissions, Bucket::Total);
    Ok(buckets.into_iter().map(|(_, v)| v).sum())
}

/// Read a two-column `interval,value` CSV into the value column.
pub fn read_series_csv<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, line)) => {
            let header = line?;
            if header.trim() != "interval,value" {
                return Err(Error::Parse(format!(
                    "expected header 'interval,value', got '{}'",
                    header.trim()
                )));
            }
        }
        None => return Err(Error::Parse("empty series file".into())),
    }
    for (lineno, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut cols = trimmed.splitn(2, ',');
        let _interval = cols
            .next()
            .ok_or_else(|| Error::Parse(format!("line {}: missing interval", lineno + 1)))?;
        let value: f64 = cols
            .next()
            .ok_or_else(|| Error::Parse(format!("line {}: missing value column", lineno + 1)))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: bad value ({e})", lineno + 1)))?;
        values.push(value);
    }
    Ok(values)
}

/// Write values as a two-column `interval,value` CSV.
pub fn write_series_csv<W: Write>(writer: &mut W, values: &[f64]) -> Result<()> {
    writeln!(writer, "interval,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(writer, "{i},{v}")?;
    }
    Ok(())
}
