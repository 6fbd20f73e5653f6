//! Heat load on the 3 K stage from cabling: conduction along the flex
//! wires and the RF coax, I^2 R in supply wires, and RF power dissipated in
//! the coax and its termination. Radiation is ignored.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermalError {
    #[error("conductivity table: {0}")]
    Table(String),
    #[error("table covers [{t_min}, {t_max}] K but [{t_lo}, {t_hi}] K was requested")]
    Coverage {
        t_min: f64,
        t_max: f64,
        t_lo: f64,
        t_hi: f64,
    },
    #[error("invalid thermal parameter: {0}")]
    Invalid(String),
}

/// OFHC copper (RRR = 50) conductivity generated from the NIST cryogenic
/// material-property correlation.
pub const COPPER_RRR50_CSV: &str = include_str!("../data/copper_ofhc_rrr50.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConductivityTable {
    rows: Vec<(f64, f64)>,
    source: String,
}

#[derive(Debug, Deserialize)]
struct KRow {
    t_k: f64,
    k_w_per_mk: f64,
}

impl Default for ConductivityTable {
    fn default() -> Self {
        Self::from_csv(COPPER_RRR50_CSV.as_bytes(), "NIST OFHC copper RRR=50")
            .expect("bundled table")
    }
}

impl ConductivityTable {
    pub fn new(rows: Vec<(f64, f64)>, source: impl Into<String>) -> Result<Self, ThermalError> {
        if rows.len() < 2 {
            return Err(ThermalError::Table("need at least two rows".into()));
        }
        if rows.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(ThermalError::Table("temperatures must strictly increase".into()));
        }
        if rows.iter().any(|&(t, k)| !(k > 0.0) || !t.is_finite() || !k.is_finite()) {
            return Err(ThermalError::Table("conductivities must be positive".into()));
        }
        Ok(Self {
            rows,
            source: source.into(),
        })
    }

    /// Reads `t_k,k_w_per_mk` rows.
    pub fn from_csv<R: io::Read>(r: R, source: impl Into<String>) -> Result<Self, ThermalError> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let mut rows = Vec::new();
        for row in rd.deserialize::<KRow>() {
            let row = row.map_err(|e| ThermalError::Table(e.to_string()))?;
            rows.push((row.t_k, row.k_w_per_mk));
        }
        Self::new(rows, source)
    }

    /// Constant conductivity over `[t_lo, t_hi]`.
    pub fn constant(k_w_per_mk: f64, t_lo: f64, t_hi: f64) -> Result<Self, ThermalError> {
        Self::new(vec![(t_lo, k_w_per_mk), (t_hi, k_w_per_mk)], "constant")
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn k_at(&self, t_k: f64) -> Option<f64> {
        let r = &self.rows;
        if t_k < r[0].0 || t_k > r[r.len() - 1].0 {
            return None;
        }
        let i = r.partition_point(|&(t, _)| t <= t_k).clamp(1, r.len() - 1);
        let (t0, k0) = r[i - 1];
        let (t1, k1) = r[i];
        Some(k0 + (k1 - k0) * (t_k - t0) / (t1 - t0))
    }

    /// Trapezoid integral of k(T) over `[t_lo, t_hi]` in W/m, using the
    /// tabulated points plus linearly interpolated end points.
    pub fn integral(&self, t_lo: f64, t_hi: f64) -> Result<f64, ThermalError> {
        let (t_min, t_max) = (self.rows[0].0, self.rows[self.rows.len() - 1].0);
        if t_lo < t_min || t_hi > t_max || t_lo > t_hi {
            return Err(ThermalError::Coverage {
                t_min,
                t_max,
                t_lo,
                t_hi,
            });
        }
        let mut pts = vec![(t_lo, self.k_at(t_lo).expect("covered"))];
        pts.extend(self.rows.iter().copied().filter(|&(t, _)| t > t_lo && t < t_hi));
        pts.push((t_hi, self.k_at(t_hi).expect("covered")));
        Ok(pts
            .windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
            .sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlexCableSpec {
    pub n_wires: u32,
    pub area_m2: f64,
    pub length_m: f64,
    pub t_cold_k: f64,
    pub t_hot_k: f64,
}

impl Default for FlexCableSpec {
    fn default() -> Self {
        Self {
            n_wires: 35,
            area_m2: 1.75e-9,
            length_m: 0.4,
            t_cold_k: 3.0,
            t_hot_k: 60.0,
        }
    }
}

impl FlexCableSpec {
    fn validate(&self) -> Result<(), ThermalError> {
        if !(self.area_m2 >= 0.0) || !(self.length_m > 0.0) {
            return Err(ThermalError::Invalid("flex geometry must be positive".into()));
        }
        if !(self.t_cold_k < self.t_hot_k) {
            return Err(ThermalError::Invalid("t_cold must be below t_hot".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoaxSpec {
    /// Conduction per cable, W/K.
    pub rho_c_w_per_k: f64,
    pub delta_t_k: f64,
    pub cable_loss_db: f64,
    pub delivered_power_w: f64,
    pub termination_ohm: f64,
}

impl Default for CoaxSpec {
    fn default() -> Self {
        Self {
            rho_c_w_per_k: 1.088e-4,
            delta_t_k: 57.0,
            cable_loss_db: 2.0,
            delivered_power_w: 1e-4,
            termination_ohm: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoaxLoad {
    pub passive_w: f64,
    /// Cable loss plus the power absorbed in the termination.
    pub rf_w: f64,
}

pub fn coax_load(spec: &CoaxSpec) -> Result<CoaxLoad, ThermalError> {
    if !(spec.cable_loss_db >= 0.0) || !(spec.delivered_power_w >= 0.0) || !(spec.delta_t_k >= 0.0)
    {
        return Err(ThermalError::Invalid(
            "coax loss, power and temperature difference must be >= 0".into(),
        ));
    }
    Ok(CoaxLoad {
        passive_w: spec.rho_c_w_per_k * spec.delta_t_k,
        rf_w: spec.delivered_power_w * 10f64.powf(spec.cable_loss_db / 10.0),
    })
}

pub const COPPER_RESISTIVITY_OHM_M: f64 = 1.72e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActiveLoadSpec {
    pub supply_currents_a: Vec<f64>,
    pub wire_resistance_ohm: f64,
}

impl Default for ActiveLoadSpec {
    fn default() -> Self {
        Self::from_geometry(
            vec![25e-3, 20e-3, 15e-3, 10e-3, 5e-3],
            COPPER_RESISTIVITY_OHM_M,
            &FlexCableSpec::default(),
        )
    }
}

impl ActiveLoadSpec {
    pub fn from_geometry(currents: Vec<f64>, resistivity_ohm_m: f64, flex: &FlexCableSpec) -> Self {
        Self {
            supply_currents_a: currents,
            wire_resistance_ohm: resistivity_ohm_m * flex.length_m / flex.area_m2,
        }
    }

    pub fn dissipation_w(&self) -> Result<f64, ThermalError> {
        if self.supply_currents_a.iter().any(|&i| !(i >= 0.0)) || !(self.wire_resistance_ohm >= 0.0) {
            return Err(ThermalError::Invalid("currents and resistance must be >= 0".into()));
        }
        Ok(self
            .supply_currents_a
            .iter()
            .map(|i| i * i * self.wire_resistance_ohm)
            .sum())
    }
}

pub fn passive_flex_load(flex: &FlexCableSpec, table: &ConductivityTable) -> Result<f64, ThermalError> {
    flex.validate()?;
    let k_int = table.integral(flex.t_cold_k, flex.t_hot_k)?;
    Ok(flex.n_wires as f64 * flex.area_m2 / flex.length_m * k_int)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalReport {
    pub flex_passive_w: f64,
    pub coax_passive_w: f64,
    pub active_w: f64,
    pub rf_w: f64,
    pub total_w: f64,
    pub cooling_budget_w: f64,
    pub fraction_of_budget: f64,
}

pub const DEFAULT_COOLING_BUDGET_W: f64 = 1.5;

pub fn total_load(
    flex: &FlexCableSpec,
    coax: &CoaxSpec,
    active: &ActiveLoadSpec,
    table: &ConductivityTable,
    cooling_budget_w: f64,
) -> Result<ThermalReport, ThermalError> {
    if !(cooling_budget_w > 0.0) {
        return Err(ThermalError::Invalid("cooling budget must be positive".into()));
    }
    let flex_passive_w = passive_flex_load(flex, table)?;
    let c = coax_load(coax)?;
    let active_w = active.dissipation_w()?;
    let total_w = flex_passive_w + c.passive_w + active_w + c.rf_w;
    Ok(ThermalReport {
        flex_passive_w,
        coax_passive_w: c.passive_w,
        active_w,
        rf_w: c.rf_w,
        total_w,
        cooling_budget_w,
        fraction_of_budget: total_w / cooling_budget_w,
    })
}

/// How the wiring and supply load grow with the qubit array.
///
/// Detector count is linear in the multiplier through `(1, base_detectors)`
/// and `(10, detectors_at_10x)`; every detector adds `analog_wires_per_detector`
/// signal wires unless digitization is on chip; active dissipation scales as
/// `multiplier^active_exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingRule {
    pub digital_wires: u32,
    pub ground_wires: u32,
    pub base_detectors: u32,
    pub detectors_at_10x: u32,
    pub analog_wires_per_detector: u32,
    pub active_exponent: f64,
    pub on_chip_adc: bool,
}

impl Default for ScalingRule {
    fn default() -> Self {
        Self {
            digital_wires: 14,
            ground_wires: 5,
            base_detectors: 8,
            detectors_at_10x: 160,
            analog_wires_per_detector: 2,
            active_exponent: 1.0,
            on_chip_adc: false,
        }
    }
}

impl ScalingRule {
    pub fn detectors(&self, multiplier: f64) -> u32 {
        let slope = (self.detectors_at_10x as f64 - self.base_detectors as f64) / 9.0;
        (self.base_detectors as f64 + (multiplier - 1.0) * slope).round() as u32
    }

    pub fn signal_wires(&self, multiplier: f64) -> u32 {
        let analog = if self.on_chip_adc {
            0
        } else {
            self.detectors(multiplier) * self.analog_wires_per_detector
        };
        self.digital_wires + analog
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalScenario {
    pub flex: FlexCableSpec,
    pub coax: CoaxSpec,
    pub active: ActiveLoadSpec,
    pub cooling_budget_w: f64,
    pub scaling: ScalingRule,
}

impl Default for ThermalScenario {
    fn default() -> Self {
        Self {
            flex: FlexCableSpec::default(),
            coax: CoaxSpec::default(),
            active: ActiveLoadSpec::default(),
            cooling_budget_w: DEFAULT_COOLING_BUDGET_W,
            scaling: ScalingRule::default(),
        }
    }
}

impl ThermalScenario {
    pub fn report(&self, table: &ConductivityTable) -> Result<ThermalReport, ThermalError> {
        total_load(&self.flex, &self.coax, &self.active, table, self.cooling_budget_w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub multiplier: f64,
    pub detectors: u32,
    pub signal_wires: u32,
    pub n_wires: u32,
    pub report: ThermalReport,
}

/// Applies the scenario's scaling rule at each multiplier. With the
/// on-chip ADC flag clear, multiplier 1 reproduces the base report.
pub fn scaling_study(
    base: &ThermalScenario,
    table: &ConductivityTable,
    multipliers: &[f64],
) -> Result<Vec<ScalingPoint>, ThermalError> {
    multipliers
        .iter()
        .map(|&m| {
            if !(m >= 1.0) {
                return Err(ThermalError::Invalid(format!("multiplier must be >= 1, got {m}")));
            }
            let rule = &base.scaling;
            let signal_wires = rule.signal_wires(m);
            let n_wires = signal_wires + rule.ground_wires;
            let flex = FlexCableSpec {
                n_wires,
                ..base.flex
            };
            let factor = m.powf(rule.active_exponent);
            let active = ActiveLoadSpec {
                supply_currents_a: base.active.supply_currents_a.clone(),
                wire_resistance_ohm: base.active.wire_resistance_ohm * factor,
            };
            let report = total_load(&flex, &base.coax, &active, table, base.cooling_budget_w)?;
            Ok(ScalingPoint {
                multiplier: m,
                detectors: rule.detectors(m),
                signal_wires,
                n_wires,
                report,
            })
        })
        .collect()
}
