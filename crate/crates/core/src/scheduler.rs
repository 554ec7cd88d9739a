//! Joint gas-compressor / demand-response scheduling encoded as a QUBO.
//!
//! The decision space is one bit per (compressor, interval) — run the
//! unit in that interval or not — and one bit per (curtailable load,
//! interval) — activate the curtailment or not. The objective combines:
//!
//! - electricity cost: `price_t * energy_k` for every ON compressor;
//! - a carbon term: `w_carbon * lambda_t * energy_k` for every ON
//!   compressor (curtailment credits are *not* part of the quadratic
//!   objective; they enter the reported footprint, see
//!   [`crate::carbon::policy_carbon`]);
//! - a pressure-balance penalty: in each interval, compressor capacity
//!   plus activated curtailment must exactly offset the demand,
//!   enforced as `w_pressure * (supply_t - demand_t)^2`;
//! - a comfort penalty: each curtailable load must be activated in
//!   exactly its contracted number of intervals, enforced as
//!   `w_comfort * (activations_d - target_d)^2`.
//!
//! Squared penalties expand to linear and pairwise binary terms, so the
//! whole objective is a QUBO plus a constant offset.

use serde::{Deserialize, Serialize};

use crate::carbon::CarbonIntensitySeries;
use crate::error::{Error, Result};
use crate::qubo::{BinaryVector, QuboMatrix};

/// Balance residuals smaller than this count as satisfied when tallying
/// violations (guards against float round-off on non-integer instances).
pub const PRESSURE_EPS: f64 = 1e-9;

/// A gas compressor unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compressor {
    /// Flow delivered per interval when the unit runs.
    pub capacity: f64,
    /// Electricity drawn per ON interval, in kWh.
    pub energy_per_interval: f64,
}

/// A curtailable demand-response load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrLoad {
    /// Demand removed per active interval (kWh-equivalent flow).
    pub curtail_kwh: f64,
    /// Contracted number of intervals the load must be curtailed.
    pub target_intervals: usize,
}

/// One scheduling problem over a fixed horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulingInstance {
    /// Number of scheduling intervals.
    pub horizon: usize,
    /// Interval length in hours.
    pub interval_hours: f64,
    pub compressors: Vec<Compressor>,
    pub dr_loads: Vec<DrLoad>,
    /// Electricity price per kWh, one entry per interval.
    pub price: Vec<f64>,
    /// Flow demand to balance, one entry per interval.
    pub demand: Vec<f64>,
    /// Grid carbon intensity over the same horizon.
    pub carbon: CarbonIntensitySeries,
}

/// Which family of decision bits an index addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitKind {
    Compressor,
    Dr,
}

/// A decoded schedule: 0/1 activation per unit per interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDecision {
    /// `compressor_on[k][t]` is 1 when compressor `k` runs in interval `t`.
    pub compressor_on: Vec<Vec<u8>>,
    /// `dr_active[d][t]` is 1 when load `d` is curtailed in interval `t`.
    pub dr_active: Vec<Vec<u8>>,
}

/// Physical/economic readout of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleMetrics {
    /// Electricity cost of the compressor fleet.
    pub energy_cost: f64,
    /// Net attributed footprint in gCO2: curtailment offsets compressor
    /// energy, floored at zero per interval before attribution.
    pub carbon_g: f64,
    /// Sum over intervals of the squared pressure-balance residual.
    pub pressure_deviation: f64,
    /// Sum over loads of the squared activation-count error.
    pub comfort_deviation: f64,
    /// Number of violated constraints: intervals whose balance residual
    /// exceeds [`PRESSURE_EPS`] plus loads missing their target count.
    pub violations: usize,
}

/// Penalty and objective weights for [`build_qubo`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    /// Price of carbon inside the objective (cost units per gCO2).
    pub w_carbon: f64,
    /// Weight of the squared pressure-balance penalty.
    pub w_pressure: f64,
    /// Weight of the squared comfort penalty.
    pub w_comfort: f64,
}

/// QUBO encoding of an instance: minimize `s^T Q s + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleQubo {
    pub matrix: QuboMatrix,
    /// Constant part of the objective (completed penalty squares).
    pub offset: f64,
}

impl SchedulingInstance {
    pub fn new(
        horizon: usize,
        interval_hours: f64,
        compressors: Vec<Compressor>,
        dr_loads: Vec<DrLoad>,
        price: Vec<f64>,
        demand: Vec<f64>,
        carbon: CarbonIntensitySeries,
    ) -> Result<Self> {
        let inst = SchedulingInstance {
            horizon,
            interval_hours,
            compressors,
            dr_loads,
            price,
            demand,
            carbon,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Check structural and feasibility invariants.
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be >= 1".into()));
        }
        if !(self.interval_hours > 0.0) || !self.interval_hours.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "interval_hours must be finite and > 0, got {}",
                self.interval_hours
            )));
        }
        for (len, what) in [
            (self.price.len(), "price series length"),
            (self.demand.len(), "demand series length"),
            (self.carbon.values.len(), "carbon series length"),
        ] {
            if len != self.horizon {
                return Err(Error::DimensionMismatch {
                    context: what,
                    expected: self.horizon,
                    got: len,
                });
            }
        }
        if self.carbon.interval_hours != self.interval_hours {
            return Err(Error::InvalidParameter(format!(
                "carbon series interval ({}) differs from instance interval ({})",
                self.carbon.interval_hours, self.interval_hours
            )));
        }
        for (i, p) in self.price.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "price at interval {i} must be finite and >= 0, got {p}"
                )));
            }
        }
        for (i, d) in self.demand.iter().enumerate() {
            if !d.is_finite() || *d < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "demand at interval {i} must be finite and >= 0, got {d}"
                )));
            }
        }
        for (k, c) in self.compressors.iter().enumerate() {
            if !c.capacity.is_finite() || c.capacity < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "compressor {k} capacity must be finite and >= 0"
                )));
            }
            if !c.energy_per_interval.is_finite() || c.energy_per_interval < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "compressor {k} energy must be finite and >= 0"
                )));
            }
        }
        let total_capacity: f64 = self.compressors.iter().map(|c| c.capacity).sum();
        for (t, d) in self.demand.iter().enumerate() {
            if *d > total_capacity {
                return Err(Error::Infeasible(format!(
                    "demand {d} at interval {t} exceeds total compressor capacity {total_capacity}"
                )));
            }
        }
        for (d, load) in self.dr_loads.iter().enumerate() {
            if !load.curtail_kwh.is_finite() || load.curtail_kwh < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "dr load {d} curtailment must be finite and >= 0"
                )));
            }
            if load.target_intervals > self.horizon {
                return Err(Error::Infeasible(format!(
                    "dr load {d} requires {} active intervals but the horizon is {}",
                    load.target_intervals, self.horizon
                )));
            }
        }
        Ok(())
    }

    pub fn n_compressors(&self) -> usize {
        self.compressors.len()
    }

    pub fn n_dr_loads(&self) -> usize {
        self.dr_loads.len()
    }

    /// Total number of decision bits.
    pub fn n_bits(&self) -> usize {
        (self.compressors.len() + self.dr_loads.len()) * self.horizon
    }

    /// Flat bit index of a decision variable. Compressor bits occupy
    /// `[0, n_compressors * horizon)` as `unit * horizon + t`; DR bits
    /// follow in the same unit-major order.
    pub fn bit_index(&self, kind: BitKind, unit: usize, t: usize) -> Result<usize> {
        if t >= self.horizon {
            return Err(Error::IndexOutOfRange {
                context: "bit_index interval",
                index: t,
                len: self.horizon,
            });
        }
        match kind {
            BitKind::Compressor => {
                if unit >= self.compressors.len() {
                    return Err(Error::IndexOutOfRange {
                        context: "bit_index compressor",
                        index: unit,
                        len: self.compressors.len(),
                    });
                }
                Ok(unit * self.horizon + t)
            }
            BitKind::Dr => {
                if unit >= self.dr_loads.len() {
                    return Err(Error::IndexOutOfRange {
                        context: "bit_index dr load",
                        index: unit,
                        len: self.dr_loads.len(),
                    });
                }
                Ok(self.compressors.len() * self.horizon + unit * self.horizon + t)
            }
        }
    }

    /// Unpack a flat bit vector into a schedule.
    pub fn decode(&self, s: &BinaryVector) -> Result<ScheduleDecision> {
        if s.len() != self.n_bits() {
            return Err(Error::DimensionMismatch {
                context: "decode state length",
                expected: self.n_bits(),
                got: s.len(),
            });
        }
        let bits = s.bits();
        let t = self.horizon;
        let compressor_on = (0..self.compressors.len())
            .map(|k| bits[k * t..(k + 1) * t].to_vec())
            .collect();
        let base = self.compressors.len() * t;
        let dr_active = (0..self.dr_loads.len())
            .map(|d| bits[base + d * t..base + (d + 1) * t].to_vec())
            .collect();
        Ok(ScheduleDecision { compressor_on, dr_active })
    }

    /// Pack a schedule into the flat bit vector; inverse of
    /// [`SchedulingInstance::decode`].
    pub fn encode(&self, decision: &ScheduleDecision) -> Result<BinaryVector> {
        self.check_decision_shape(decision)?;
        let mut bits = Vec::with_capacity(self.n_bits());
        for row in &decision.compressor_on {
            bits.extend_from_slice(row);
        }
        for row in &decision.dr_active {
            bits.extend_from_slice(row);
        }
        BinaryVector::from_bits(bits)
    }

    /// Validate that a decision has one 0/1 entry per unit per interval.
    pub fn check_decision_shape(&self, decision: &ScheduleDecision) -> Result<()> {
        if decision.compressor_on.len() != self.compressors.len() {
            return Err(Error::DimensionMismatch {
                context: "decision compressor rows",
                expected: self.compressors.len(),
                got: decision.compressor_on.len(),
            });
        }
        if decision.dr_active.len() != self.dr_loads.len() {
            return Err(Error::DimensionMismatch {
                context: "decision dr rows",
                expected: self.dr_loads.len(),
                got: decision.dr_active.len(),
            });
        }
        for row in decision.compressor_on.iter().chain(&decision.dr_active) {
            if row.len() != self.horizon {
                return Err(Error::DimensionMismatch {
                    context: "decision row length",
                    expected: self.horizon,
                    got: row.len(),
                });
            }
            if let Some(i) = row.iter().position(|&b| b > 1) {
                return Err(Error::InvalidParameter(format!(
                    "decision entry at interval {i} is {}, expected 0 or 1",
                    row[i]
                )));
            }
        }
        Ok(())
    }

    /// Score a schedule directly from its physical semantics (no QUBO
    /// involved): cost, net footprint, constraint residuals, violations.
    pub fn evaluate(&self, decision: &ScheduleDecision) -> Result<ScheduleMetrics> {
        self.check_decision_shape(decision)?;
        let mut energy_cost = 0.0;
        let mut carbon_g = 0.0;
        let mut pressure_deviation = 0.0;
        let mut violations = 0usize;
        for t in 0..self.horizon {
            let mut consumed = 0.0;
            let mut supply = 0.0;
            for (c, row) in self.compressors.iter().zip(&decision.compressor_on) {
                if row[t] == 1 {
                    consumed += c.energy_per_interval;
                    supply += c.capacity;
                    energy_cost += self.price[t] * c.energy_per_interval;
                }
            }
            let mut curtailed = 0.0;
            for (d, row) in self.dr_loads.iter().zip(&decision.dr_active) {
                if row[t] == 1 {
                    curtailed += d.curtail_kwh;
                }
            }
            let balance = supply + curtailed - self.demand[t];
            pressure_deviation += balance * balance;
            if balance.abs() > PRESSURE_EPS {
                violations += 1;
            }
            carbon_g += (consumed - curtailed).max(0.0) * self.carbon.values[t];
        }
        let mut comfort_deviation = 0.0;
        for (d, row) in self.dr_loads.iter().zip(&decision.dr_active) {
            let count = row.iter().map(|&b| b as i64).sum::<i64>();
            let err = count - d.target_intervals as i64;
            comfort_deviation += (err * err) as f64;
            if err != 0 {
                violations += 1;
            }
        }
        Ok(ScheduleMetrics {
            energy_cost,
            carbon_g,
            pressure_deviation,
            comfort_deviation,
            violations,
        })
    }
}

impl PenaltyWeights {
    pub fn validate_for(&self, instance: &SchedulingInstance) -> Result<()> {
        for (v, what) in [
            (self.w_carbon, "w_carbon"),
            (self.w_pressure, "w_pressure"),
            (self.w_comfort, "w_comfort"),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{what} must be finite and >= 0, got {v}"
                )));
            }
        }
        if self.w_pressure == 0.0 && instance.demand.iter().any(|&d| d > 0.0) {
            return Err(Error::InvalidParameter(
                "w_pressure must be > 0 when any interval has demand".into(),
            ));
        }
        if self.w_comfort == 0.0 && !instance.dr_loads.is_empty() {
            return Err(Error::InvalidParameter(
                "w_comfort must be > 0 when curtailable loads are present".into(),
            ));
        }
        Ok(())
    }
}

/// Build the QUBO encoding of an instance under the given weights.
///
/// Expanding the squared penalties over binary variables (`s^2 = s`)
/// yields, for matrix `Q` and constant `offset`:
/// `s^T Q s + offset = cost + w_carbon * compressor_carbon
///   + w_pressure * sum_t (supply_t - demand_t)^2
///   + w_comfort * sum_d (activations_d - target_d)^2`.
pub fn build_qubo(
    instance: &SchedulingInstance,
    weights: &PenaltyWeights,
) -> Result<ScheduleQubo> {
    instance.validate()?;
    weights.validate_for(instance)?;
    let horizon = instance.horizon;
    let mut q = QuboMatrix::zeros(instance.n_bits());
    let mut offset = 0.0;

    for t in 0..horizon {
        let demand = instance.demand[t];
        // Everything that adds to the pressure balance in interval t:
        // (flat bit, balance coefficient).
        let mut participants: Vec<(usize, f64)> = Vec::new();
        for (k, c) in instance.compressors.iter().enumerate() {
            let bit = instance.bit_index(BitKind::Compressor, k, t)?;
            q.add_term(
                bit,
                bit,
                (instance.price[t] + weights.w_carbon * instance.carbon.values[t])
                    * c.energy_per_interval,
            );
            participants.push((bit, c.capacity));
        }
        for (d, load) in instance.dr_loads.iter().enumerate() {
            let bit = instance.bit_index(BitKind::Dr, d, t)?;
            participants.push((bit, load.curtail_kwh));
        }
        // (sum_a coef_a s_a - demand)^2 expanded over binaries.
        for (idx, &(bit_a, coef_a)) in participants.iter().enumerate() {
            q.add_term(
                bit_a,
                bit_a,
                weights.w_pressure * (coef_a * coef_a - 2.0 * demand * coef_a),
            );
            for &(bit_b, coef_b) in &participants[idx + 1..] {
                q.add_term(bit_a, bit_b, 2.0 * weights.w_pressure * coef_a * coef_b);
            }
        }
        offset += weights.w_pressure * demand * demand;
    }

    for (d, load) in instance.dr_loads.iter().enumerate() {
        let target = load.target_intervals as f64;
        // (sum_t a_{d,t} - target)^2 expanded over binaries.
        for t in 0..horizon {
            let bit = instance.bit_index(BitKind::Dr, d, t)?;
            q.add_term(bit, bit, weights.w_comfort * (1.0 - 2.0 * target));
            for t2 in (t + 1)..horizon {
                let bit2 = instance.bit_index(BitKind::Dr, d, t2)?;
                q.add_term(bit, bit2, 2.0 * weights.w_comfort);
            }
        }
        offset += weights.w_comfort * target * target;
    }

    Ok(ScheduleQubo { matrix: q, offset })
}

/// Status-quo baseline: per interval, switch compressors on in order of
/// energy per unit of flow (most efficient first, ties by index) until
/// the demand is covered. Demand response is never used.
pub fn solve_greedy_schedule(instance: &SchedulingInstance) -> Result<ScheduleDecision> {
    instance.validate()?;
    let mut order: Vec<usize> = (0..instance.compressors.len()).collect();
    let ratio = |k: usize| {
        let c = &instance.compressors[k];
        if c.capacity > 0.0 {
            c.energy_per_interval / c.capacity
        } else {
            f64::INFINITY
        }
    };
    order.sort_by(|&a, &b| {
        ratio(a)
            .partial_cmp(&ratio(b))
            .expect("ratios are finite or +inf")
            .then(a.cmp(&b))
    });

    let mut compressor_on = vec![vec![0u8; instance.horizon]; instance.compressors.len()];
    for t in 0..instance.horizon {
        let mut covered = 0.0;
        for &k in &order {
            if covered >= instance.demand[t] {
                break;
            }
            compressor_on[k][t] = 1;
            covered += instance.compressors[k].capacity;
        }
        if covered < instance.demand[t] {
            return Err(Error::Infeasible(format!(
                "greedy could not cover demand {} at interval {t}",
                instance.demand[t]
            )));
        }
    }
    Ok(ScheduleDecision {
        compressor_on,
        dr_active: vec![vec![0u8; instance.horizon]; instance.dr_loads.len()],
    })
}

/// Greatest common divisor of the flow quantities (capacities,
/// curtailments, demands), when they are all integral.
///
/// Any pressure-balance residual is a signed combination of these
/// quantities, so their gcd is the smallest nonzero residual any
/// assignment can produce. Returns `None` when a quantity is not an
/// integer (to within 1e-9) or when every quantity is zero.
fn flow_quantum(instance: &SchedulingInstance) -> Option<u64> {
    let mut g: u64 = 0;
    let mut fold = |q: f64| -> bool {
        if q == 0.0 {
            return true;
        }
        let r = q.round();
        if (q - r).abs() > 1e-9 || r < 1.0 {
            return false;
        }
        let mut a = r as u64;
        let mut b = g;
        while b != 0 {
            (a, b) = (b, a % b);
        }
        g = a;
        true
    };
    for c in &instance.compressors {
        if !fold(c.capacity) {
            return None;
        }
    }
    for l in &instance.dr_loads {
        if !fold(l.curtail_kwh) {
            return None;
        }
    }
    for &d in &instance.demand {
        if !fold(d) {
            return None;
        }
    }
    if g == 0 {
        None
    } else {
        Some(g)
    }
}

/// Choose penalty weights that provably dominate the linear objective.
///
/// Each weight is set to ten times the largest possible linear
/// objective (every compressor ON in every interval) divided by the
/// smallest squared residual a violated constraint can carry. For the
/// comfort square that residual is one activation, so the divisor is 1.
/// For the pressure square it is the gcd of the flow quantities
/// (capacities, curtailments, demands) whenever those are integers: any
/// balance residual is a multiple of that quantum, so dividing by its
/// square keeps the guarantee while avoiding needlessly steep penalty
/// cliffs. On non-integral instances the pressure divisor conservatively
/// falls back to 1, which preserves the guarantee only when residuals
/// cannot drop below one flow unit.
pub fn calibrate_penalties(instance: &SchedulingInstance, w_carbon: f64) -> Result<PenaltyWeights> {
    instance.validate()?;
    if !w_carbon.is_finite() || w_carbon < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "w_carbon must be finite and >= 0, got {w_carbon}"
        )));
    }
    let mut range = 0.0;
    for t in 0..instance.horizon {
        let per_kwh = instance.price[t] + w_carbon * instance.carbon.values[t];
        for c in &instance.compressors {
            range += per_kwh * c.energy_per_interval;
        }
    }
    let mut w = 10.0 * range;
    if w <= 0.0 {
        // Degenerate zero-cost instance: any positive weight enforces
        // the constraints.
        w = 10.0;
    }
    let min_sq_pressure = match flow_quantum(instance) {
        Some(g) => (g as f64) * (g as f64),
        None => 1.0,
    };
    Ok(PenaltyWeights {
        w_carbon,
        w_pressure: w / min_sq_pressure,
        w_comfort: w,
    })
}

/// Serialized form of [`SchedulingInstance`] (adds a format version).
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    format_version: u32,
    horizon: usize,
    interval_hours: f64,
    compressors: Vec<Compressor>,
    dr_loads: Vec<DrLoad>,
    price: Vec<f64>,
    demand: Vec<f64>,
    carbon: CarbonIntensitySeries,
}

pub const INSTANCE_FORMAT_VERSION: u32 = 1;

impl SchedulingInstance {
    /// Parse and validate an instance from its JSON file form.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.format_version != INSTANCE_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported instance format_version {} (expected {})",
                file.format_version, INSTANCE_FORMAT_VERSION
            )));
        }
        SchedulingInstance::new(
            file.horizon,
            file.interval_hours,
            file.compressors,
            file.dr_loads,
            file.price,
            file.demand,
            file.carbon,
        )
    }

    /// Serialize to the JSON file form (pretty-printed, trailing newline).
    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            format_version: INSTANCE_FORMAT_VERSION,
            horizon: self.horizon,
            interval_hours: self.interval_hours,
            compressors: self.compressors.clone(),
            dr_loads: self.dr_loads.clone(),
            price: self.price.clone(),
            demand: self.demand.clone(),
            carbon: self.carbon.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file)?;
        text.push('\n');
        Ok(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::brute_force;
    use crate::carbon::policy_carbon;
    use crate::qubo::energy;
    use crate::rng::SplitMix64;

    fn flat_carbon(horizon: usize, value: f64) -> CarbonIntensitySeries {
        CarbonIntensitySeries::new(vec![value; horizon], 1.0, 0).unwrap()
    }

    /// Single compressor, single interval, hand-expanded coefficients.
    #[test]
    fn single_compressor_qubo_by_hand() {
        // price = 5, energy = 2, lambda = 500, w_carbon = 0.005,
        // capacity = 1, demand = 1, w_pressure = 100000:
        //   diag = 5*2 + 0.005*500*2 + 100000*(1 - 2) = 15 - 100000
        //   offset = 100000 * 1^2
        let inst = SchedulingInstance::new(
            1,
            1.0,
            vec![Compressor { capacity: 1.0, energy_per_interval: 2.0 }],
            vec![],
            vec![5.0],
            vec![1.0],
            flat_carbon(1, 500.0),
        )
        .unwrap();
        let weights = PenaltyWeights {
            w_carbon: 0.005,
            w_pressure: 100_000.0,
            w_comfort: 0.0,
        };
        let sq = build_qubo(&inst, &weights).unwrap();
        assert_eq!(sq.matrix.n(), 1);
        assert_eq!(sq.matrix.get(0, 0), 15.0 - 100_000.0);
        assert_eq!(sq.offset, 100_000.0);
        // Running the unit (cost 15) beats the idle penalty (100000).
        let (bits, e) = brute_force(&sq.matrix).unwrap();
        assert_eq!(bits.bits(), &[1]);
        assert_eq!(e + sq.offset, 15.0);
    }

    #[test]
    fn bit_layout() {
        let inst = SchedulingInstance::new(
            3,
            1.0,
            vec![
                Compressor { capacity: 1.0, energy_per_interval: 1.0 },
                Compressor { capacity: 1.0, energy_per_interval: 1.0 },
            ],
            vec![DrLoad { curtail_kwh: 1.0, target_intervals: 1 }],
            vec![0.0; 3],
            vec![0.0; 3],
            flat_carbon(3, 100.0),
        )
        .unwrap();
        assert_eq!(inst.n_bits(), 9);
        assert_eq!(inst.bit_index(BitKind::Compressor, 0, 0).unwrap(), 0);
        assert_eq!(inst.bit_index(BitKind::Compressor, 0, 2).unwrap(), 2);
        assert_eq!(inst.bit_index(BitKind::Compressor, 1, 0).unwrap(), 3);
        assert_eq!(inst.bit_index(BitKind::Dr, 0, 0).unwrap(), 6);
        assert_eq!(inst.bit_index(BitKind::Dr, 0, 2).unwrap(), 8);
        assert!(inst.bit_index(BitKind::Compressor, 2, 0).is_err());
        assert!(inst.bit_index(BitKind::Dr, 0, 3).is_err());
    }

    #[test]
    fn encode_decode_round_trip() {
        let inst = SchedulingInstance::new(
            2,
            1.0,
            vec![Compressor { capacity: 2.0, energy_per_interval: 1.0 }],
            vec![DrLoad { curtail_kwh: 1.0, target_intervals: 1 }],
            vec![0.5, 0.5],
            vec![2.0, 0.0],
            flat_carbon(2, 100.0),
        )
        .unwrap();
        let decision = ScheduleDecision {
            compressor_on: vec![vec![1, 0]],
            dr_active: vec![vec![0, 1]],
        };
        let bits = inst.encode(&decision).unwrap();
        assert_eq!(bits.bits(), &[1, 0, 0, 1]);
        assert_eq!(inst.decode(&bits).unwrap(), decision);

        let bad = ScheduleDecision {
            compressor_on: vec![vec![1]],
            dr_active: vec![vec![0, 1]],
        };
        assert!(inst.encode(&bad).is_err());
        assert!(inst.decode(&BinaryVector::zeros(3)).is_err());
    }

    /// The QUBO must reproduce the physically computed objective on
    /// every assignment of a small instance.
    #[test]
    fn qubo_matches_direct_objective_exhaustively() {
        let inst = SchedulingInstance::new(
            2,
            1.0,
            vec![Compressor { capacity: 3.0, energy_per_interval: 2.0 }],
            vec![DrLoad { curtail_kwh: 1.0, target_intervals: 1 }],
            vec![0.3, 0.6],
            vec![3.0, 1.0],
            CarbonIntensitySeries::new(vec![200.0, 450.0], 1.0, 0).unwrap(),
        )
        .unwrap();
        let weights = PenaltyWeights {
            w_carbon: 0.002,
            w_pressure: 17.0,
            w_comfort: 11.0,
        };
        let sq = build_qubo(&inst, &weights).unwrap();
        for code in 0..(1u64 << inst.n_bits()) {
            let s = BinaryVector::from_encoding(code, inst.n_bits());
            let decision = inst.decode(&s).unwrap();
            // Independent route: objective from schedule semantics.
            let mut want = 0.0;
            for t in 0..inst.horizon {
                let mut supply = 0.0;
                for (k, c) in inst.compressors.iter().enumerate() {
                    if decision.compressor_on[k][t] == 1 {
                        want += (inst.price[t] + weights.w_carbon * inst.carbon.values[t])
                            * c.energy_per_interval;
                        supply += c.capacity;
                    }
                }
                for (d, load) in inst.dr_loads.iter().enumerate() {
                    if decision.dr_active[d][t] == 1 {
                        supply += load.curtail_kwh;
                    }
                }
                let bal = supply - inst.demand[t];
                want += weights.w_pressure * bal * bal;
            }
            for (d, load) in inst.dr_loads.iter().enumerate() {
                let count: i64 = decision.dr_active[d].iter().map(|&b| b as i64).sum();
                let err = count as f64 - load.target_intervals as f64;
                want += weights.w_comfort * err * err;
            }
            let got = energy(&sq.matrix, &s).unwrap() + sq.offset;
            assert!(
                (got - want).abs() <= 1e-9 * (1.0 + want.abs()),
                "state {code:b}: qubo {got} vs direct {want}"
            );
        }
    }

    #[test]
    fn evaluate_hand_metrics() {
        let inst = SchedulingInstance::new(
            2,
            1.0,
            vec![Compressor { capacity: 2.0, energy_per_interval: 10.0 }],
            vec![DrLoad { curtail_kwh: 3.0, target_intervals: 1 }],
            vec![0.5, 1.0],
            vec![2.0, 0.0],
            CarbonIntensitySeries::new(vec![500.0, 100.0], 1.0, 0).unwrap(),
        )
        .unwrap();
        // Compressor on at t=0 (balances demand 2). DR active at t=1:
        // balance there is +3 (violation), and curtailment exceeds
        // consumption so the net footprint floors at zero for t=1.
        let decision = ScheduleDecision {
            compressor_on: vec![vec![1, 0]],
            dr_active: vec![vec![0, 1]],
        };
        let m = inst.evaluate(&decision).unwrap();
        assert_eq!(m.energy_cost, 5.0); // 0.5 * 10
        assert_eq!(m.carbon_g, 5000.0); // t0: 10 kWh * 500; t1 floored
        assert_eq!(m.pressure_deviation, 9.0); // t1 balance 3
        assert_eq!(m.comfort_deviation, 0.0);
        assert_eq!(m.violations, 1);
    }

    #[test]
    fn evaluate_agrees_with_policy_carbon_on_random_decisions() {
        let mut rng = SplitMix64::new(31337);
        let inst = SchedulingInstance::new(
            6,
            1.0,
            vec![
                Compressor { capacity: 30.0, energy_per_interval: 55.0 },
                Compressor { capacity: 45.0, energy_per_interval: 60.0 },
            ],
            vec![
                DrLoad { curtail_kwh: 7.0, target_intervals: 2 },
                DrLoad { curtail_kwh: 4.0, target_intervals: 3 },
            ],
            vec![0.2, 0.3, 0.1, 0.4, 0.25, 0.15],
            vec![30.0, 45.0, 0.0, 75.0, 30.0, 45.0],
            CarbonIntensitySeries::new(
                vec![120.0, 300.0, 580.0, 240.0, 90.0, 410.0],
                1.0,
                0,
            )
            .unwrap(),
        )
        .unwrap();
        for _ in 0..200 {
            let s = BinaryVector::from_encoding(
                rng.below(1 << inst.n_bits()),
                inst.n_bits(),
            );
            let decision = inst.decode(&s).unwrap();
            let via_eval = inst.evaluate(&decision).unwrap().carbon_g;
            let via_pipeline = policy_carbon(&decision, &inst).unwrap();
            assert!(
                (via_eval - via_pipeline).abs() <= 1e-9 * (1.0 + via_eval.abs()),
                "evaluate {via_eval} vs policy_carbon {via_pipeline}"
            );
        }
    }

    #[test]
    fn greedy_prefers_efficient_units_and_ignores_dr() {
        let inst = SchedulingInstance::new(
            2,
            1.0,
            vec![
                // Inefficient: 10 kWh per unit flow.
                Compressor { capacity: 10.0, energy_per_interval: 100.0 },
                // Efficient: 1 kWh per unit flow.
                Compressor { capacity: 10.0, energy_per_interval: 10.0 },
            ],
            vec![DrLoad { curtail_kwh: 5.0, target_intervals: 1 }],
            vec![1.0, 1.0],
            vec![10.0, 15.0],
            flat_carbon(2, 100.0),
        )
        .unwrap();
        let d = solve_greedy_schedule(&inst).unwrap();
        // t=0: efficient unit alone suffices; t=1 needs both.
        assert_eq!(d.compressor_on, vec![vec![0, 1], vec![1, 1]]);
        assert_eq!(d.dr_active, vec![vec![0, 0]]);
        let m = inst.evaluate(&d).unwrap();
        // Greedy overshoots at t=1 (20 vs 15) and never meets DR targets.
        assert!(m.violations >= 1);
    }

    #[test]
    fn greedy_covers_demand_exactly_when_units_fit() {
        let inst = SchedulingInstance::new(
            1,
            1.0,
            vec![
                Compressor { capacity: 4.0, energy_per_interval: 4.0 },
                Compressor { capacity: 2.0, energy_per_interval: 2.0 },
            ],
            vec![],
            vec![1.0],
            vec![4.0],
            flat_carbon(1, 100.0),
        )
        .unwrap();
        let d = solve_greedy_schedule(&inst).unwrap();
        // Equal ratios tie-break by index: unit 0 first, covers demand.
        assert_eq!(d.compressor_on, vec![vec![1], vec![0]]);
    }

    #[test]
    fn calibration_scales_with_prices() {
        let make = |price_scale: f64| {
            SchedulingInstance::new(
                2,
                1.0,
                vec![Compressor { capacity: 5.0, energy_per_interval: 40.0 }],
                vec![],
                vec![0.2 * price_scale, 0.4 * price_scale],
                vec![5.0, 5.0],
                flat_carbon(2, 300.0),
            )
            .unwrap()
        };
        let w1 = calibrate_penalties(&make(1.0), 0.0).unwrap();
        let w2 = calibrate_penalties(&make(2.0), 0.0).unwrap();
        // Comfort residuals come in whole activations.
        assert_eq!(w1.w_comfort, 10.0 * (0.2 * 40.0 + 0.4 * 40.0));
        // Every flow quantity is a multiple of 5, so the smallest
        // possible balance residual is 5 and its square divides out.
        assert_eq!(w1.w_pressure, w1.w_comfort / 25.0);
        assert_eq!(w2.w_pressure, 2.0 * w1.w_pressure);
        assert_eq!(w2.w_comfort, 2.0 * w1.w_comfort);
    }

    #[test]
    fn calibration_quantum_falls_back_on_fractional_flows() {
        let inst = SchedulingInstance::new(
            1,
            1.0,
            vec![Compressor { capacity: 2.5, energy_per_interval: 40.0 }],
            vec![],
            vec![0.2],
            vec![2.5],
            flat_carbon(1, 300.0),
        )
        .unwrap();
        let w = calibrate_penalties(&inst, 0.0).unwrap();
        // 2.5 is not integral, so the pressure divisor falls back to 1.
        assert_eq!(w.w_pressure, w.w_comfort);
        assert_eq!(w.w_comfort, 10.0 * 0.2 * 40.0);
    }

    #[test]
    fn calibrated_optimum_is_violation_free() {
        // Demand is an exact subset sum, so a feasible schedule exists;
        // calibrated penalties must make the optimum feasible.
        let inst = SchedulingInstance::new(
            3,
            1.0,
            vec![
                Compressor { capacity: 3.0, energy_per_interval: 50.0 },
                Compressor { capacity: 5.0, energy_per_interval: 70.0 },
            ],
            vec![DrLoad { curtail_kwh: 2.0, target_intervals: 1 }],
            vec![0.3, 0.1, 0.5],
            // Each entry is an exact commitment sum: {5}, {3,5}, {3}+2.
            vec![5.0, 8.0, 5.0],
            CarbonIntensitySeries::new(vec![150.0, 420.0, 330.0], 1.0, 0).unwrap(),
        )
        .unwrap();
        let weights = calibrate_penalties(&inst, 1e-3).unwrap();
        let sq = build_qubo(&inst, &weights).unwrap();
        let (bits, _) = brute_force(&sq.matrix).unwrap();
        let m = inst.evaluate(&inst.decode(&bits).unwrap()).unwrap();
        assert_eq!(m.violations, 0, "metrics: {m:?}");
    }

    /// Raising the carbon price never increases the optimal footprint.
    #[test]
    fn carbon_weight_steers_optimum_monotonically() {
        // Two compressors (only the efficient one is ever needed) and
        // one curtailable load. Prices peak where intensity is lowest,
        // so the cost-optimal and carbon-optimal curtailment windows
        // differ; sweeping w_carbon flips the placement.
        let horizon = 6;
        let inst = SchedulingInstance::new(
            horizon,
            1.0,
            vec![
                Compressor { capacity: 2.0, energy_per_interval: 1.0 },
                Compressor { capacity: 2.0, energy_per_interval: 3.0 },
            ],
            vec![DrLoad { curtail_kwh: 2.0, target_intervals: 2 }],
            vec![10.0, 1.0, 1.0, 1.0, 1.0, 10.0],
            vec![2.0; 6],
            CarbonIntensitySeries::new(
                vec![100.0, 600.0, 600.0, 100.0, 100.0, 100.0],
                1.0,
                0,
            )
            .unwrap(),
        )
        .unwrap();
        let mut last = f64::INFINITY;
        let mut footprints = Vec::new();
        for w_carbon in [0.0, 1e-3, 1e-2, 0.1, 1.0] {
            let weights = calibrate_penalties(&inst, w_carbon).unwrap();
            let sq = build_qubo(&inst, &weights).unwrap();
            let (bits, _) = brute_force(&sq.matrix).unwrap();
            let m = inst.evaluate(&inst.decode(&bits).unwrap()).unwrap();
            assert_eq!(m.violations, 0);
            assert!(
                m.carbon_g <= last + 1e-9,
                "footprint rose from {last} to {} at w_carbon={w_carbon}",
                m.carbon_g
            );
            last = m.carbon_g;
            footprints.push(m.carbon_g);
        }
        // The sweep must actually bite at some point.
        assert!(footprints.last().unwrap() < footprints.first().unwrap());
    }

    #[test]
    fn infeasible_and_invalid_instances_rejected() {
        let base_carbon = flat_carbon(2, 100.0);
        // Demand above total capacity.
        assert!(matches!(
            SchedulingInstance::new(
                2,
                1.0,
                vec![Compressor { capacity: 1.0, energy_per_interval: 1.0 }],
                vec![],
                vec![0.1, 0.1],
                vec![5.0, 0.0],
                base_carbon.clone(),
            ),
            Err(Error::Infeasible(_))
        ));
        // DR target beyond the horizon.
        assert!(matches!(
            SchedulingInstance::new(
                2,
                1.0,
                vec![Compressor { capacity: 9.0, energy_per_interval: 1.0 }],
                vec![DrLoad { curtail_kwh: 1.0, target_intervals: 3 }],
                vec![0.1, 0.1],
                vec![1.0, 1.0],
                base_carbon.clone(),
            ),
            Err(Error::Infeasible(_))
        ));
        // Series length mismatch.
        assert!(SchedulingInstance::new(
            2,
            1.0,
            vec![Compressor { capacity: 9.0, energy_per_interval: 1.0 }],
            vec![],
            vec![0.1],
            vec![1.0, 1.0],
            base_carbon.clone(),
        )
        .is_err());
        // Carbon interval width mismatch.
        assert!(SchedulingInstance::new(
            2,
            0.5,
            vec![Compressor { capacity: 9.0, energy_per_interval: 1.0 }],
            vec![],
            vec![0.1, 0.1],
            vec![1.0, 1.0],
            base_carbon,
        )
        .is_err());
    }

    #[test]
    fn weights_validated_against_instance() {
        let inst = SchedulingInstance::new(
            1,
            1.0,
            vec![Compressor { capacity: 2.0, energy_per_interval: 1.0 }],
            vec![DrLoad { curtail_kwh: 1.0, target_intervals: 1 }],
            vec![0.1],
            vec![1.0],
            flat_carbon(1, 100.0),
        )
        .unwrap();
        let no_pressure = PenaltyWeights { w_carbon: 0.0, w_pressure: 0.0, w_comfort: 1.0 };
        assert!(build_qubo(&inst, &no_pressure).is_err());
        let no_comfort = PenaltyWeights { w_carbon: 0.0, w_pressure: 1.0, w_comfort: 0.0 };
        assert!(build_qubo(&inst, &no_comfort).is_err());
    }

    #[test]
    fn instance_json_round_trip_and_versioning() {
        let inst = SchedulingInstance::new(
            2,
            1.0,
            vec![Compressor { capacity: 3.0, energy_per_interval: 2.5 }],
            vec![DrLoad { curtail_kwh: 1.5, target_intervals: 1 }],
            vec![0.25, 0.75],
            vec![3.0, 0.0],
            flat_carbon(2, 250.0),
        )
        .unwrap();
        let text = inst.to_json().unwrap();
        assert!(text.contains("\"format_version\": 1"));
        let back = SchedulingInstance::from_json(&text).unwrap();
        assert_eq!(inst, back);

        let bumped = text.replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(SchedulingInstance::from_json(&bumped).is_err());
        // Invalid content is rejected even when well-formed JSON.
        let negative = text.replace("0.25", "-0.25");
        assert!(SchedulingInstance::from_json(&negative).is_err());
    }
}
