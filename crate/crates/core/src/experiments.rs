//! The eight built-in studies: stimulus family, condition variants, default
//! sweep grid and the published per-study parameters.
//!
//! Sweep grids follow the axis ranges of the original data; they are defaults
//! and can be replaced with [`ExperimentDef::with_sweep`].

use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::detection::DetectionParams;
use crate::fit::{r_squared, Observation};
use crate::periphery::PeripheryFilter;
use crate::stimulus::{build_condition, Condition, Family, FixedParams};
use crate::threshold::{solve_threshold, PreparedCondition, ThresholdResult};
use crate::{Error, Result};

/// Identifier of a built-in experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentId {
    Pt1959,
    Rj1963,
    Bt2014,
    Lj1964,
    Vht1999,
    Rab1966,
    Bt2020,
    Vpk1999,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::Pt1959,
        ExperimentId::Rj1963,
        ExperimentId::Bt2014,
        ExperimentId::Lj1964,
        ExperimentId::Vht1999,
        ExperimentId::Rab1966,
        ExperimentId::Bt2020,
        ExperimentId::Vpk1999,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentId::Pt1959 => "pt1959",
            ExperimentId::Rj1963 => "rj1963",
            ExperimentId::Bt2014 => "bt2014",
            ExperimentId::Lj1964 => "lj1964",
            ExperimentId::Vht1999 => "vht1999",
            ExperimentId::Rab1966 => "rab1966",
            ExperimentId::Bt2020 => "bt2020",
            ExperimentId::Vpk1999 => "vpk1999",
        }
    }

    pub fn study(&self) -> &'static str {
        match self {
            ExperimentId::Pt1959 => "Pollack & Trittipoe 1959",
            ExperimentId::Rj1963 => "Robinson & Jeffress 1963",
            ExperimentId::Bt2014 => "Bernstein & Trahiotis 2014",
            ExperimentId::Lj1964 => "Langford & Jeffress 1964",
            ExperimentId::Vht1999 => "van der Heijden & Trahiotis 1999",
            ExperimentId::Rab1966 => "Rabiner et al. 1966",
            ExperimentId::Bt2020 => "Bernstein & Trahiotis 2020",
            ExperimentId::Vpk1999 => "van de Par & Kohlrausch 1999",
        }
    }

    pub fn family(&self) -> Family {
        match self {
            ExperimentId::Pt1959 => Family::PollackTrittipoe,
            ExperimentId::Rj1963 => Family::RobinsonJeffress,
            ExperimentId::Bt2014 => Family::BernsteinTrahiotis2014,
            ExperimentId::Lj1964 => Family::LangfordJeffress,
            ExperimentId::Vht1999 => Family::VanDerHeijdenTrahiotis,
            ExperimentId::Rab1966 => Family::RabinerEtAl,
            ExperimentId::Bt2020 => Family::BernsteinTrahiotis2020,
            ExperimentId::Vpk1999 => Family::VanDeParKohlrausch,
        }
    }

    /// Per-study `(ρ̂, σ_bin, σ_mon)`.
    pub fn table1_values(&self) -> (f64, f64, Option<f64>) {
        match self {
            ExperimentId::Pt1959 => (0.92, 0.42, None),
            ExperimentId::Rj1963 => (0.92, 0.31, Some(0.76)),
            ExperimentId::Bt2014 => (0.97, 0.54, Some(0.76)),
            ExperimentId::Lj1964 => (0.95, 0.33, Some(0.70)),
            ExperimentId::Vht1999 => (0.90, 0.19, Some(0.61)),
            ExperimentId::Rab1966 => (0.85, 0.24, Some(0.71)),
            ExperimentId::Bt2020 => (0.89, 0.52, Some(0.93)),
            ExperimentId::Vpk1999 => (0.97, 0.38, Some(0.76)),
        }
    }

    /// Published coefficient of determination for the per-study fit.
    pub fn table1_r_squared(&self) -> f64 {
        match self {
            ExperimentId::Pt1959 => 0.97,
            ExperimentId::Rj1963 => 0.98,
            ExperimentId::Bt2014 => 0.97,
            ExperimentId::Lj1964 => 0.96,
            ExperimentId::Vht1999 => 0.95,
            ExperimentId::Rab1966 => 0.95,
            ExperimentId::Bt2020 => 0.96,
            ExperimentId::Vpk1999 => 0.91,
        }
    }

    pub fn table1_params(&self) -> DetectionParams {
        let (rho_hat, sigma_bin, sigma_mon) = self.table1_values();
        DetectionParams::new(rho_hat, sigma_bin, sigma_mon).expect("published parameters are valid")
    }

    /// The single parameter set fitted across all studies, with the monaural
    /// branch dropped for the tone-free Pollack experiment.
    pub fn global_params(&self) -> DetectionParams {
        let (rho_hat, sigma_bin, sigma_mon) = GLOBAL_PARAMS;
        let sigma_mon = match self {
            ExperimentId::Pt1959 => None,
            _ => Some(sigma_mon),
        };
        DetectionParams::new(rho_hat, sigma_bin, sigma_mon).expect("published parameters are valid")
    }

    pub fn ordinate(&self) -> Ordinate {
        match self {
            ExperimentId::Pt1959 => Ordinate::DeltaRho,
            _ => Ordinate::SnrDb,
        }
    }
}

/// `(ρ̂, σ_bin, σ_mon)` of the single parameter set for all studies.
pub const GLOBAL_PARAMS: (f64, f64, f64) = (0.96, 0.40, 0.74);

/// Published pooled R² with per-study parameters.
pub const POOLED_R_SQUARED: f64 = 0.98;
/// Published pooled R² with [`GLOBAL_PARAMS`].
pub const GLOBAL_R_SQUARED: f64 = 0.93;

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    /// Accepts the short id (`rj1963`) or the family name (`robinson`).
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name() == key || id.family().name() == key)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Threshold axis of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordinate {
    SnrDb,
    DeltaRho,
}

impl Ordinate {
    /// Unit tag used in data files.
    pub fn units(&self) -> &'static str {
        match self {
            Ordinate::SnrDb => "db",
            Ordinate::DeltaRho => "delta_rho",
        }
    }
}

/// One curve of an experiment: fixed parameters held along the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionVariant {
    pub id: String,
    pub fixed: FixedParams,
}

impl ConditionVariant {
    fn new(id: impl Into<String>, fixed: FixedParams) -> Self {
        Self { id: id.into(), fixed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentDef {
    pub id: ExperimentId,
    pub family: Family,
    pub sweep: Vec<f64>,
    pub conditions: Vec<ConditionVariant>,
    pub table1_params: DetectionParams,
    pub ordinate: Ordinate,
}

fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
        .collect()
}

fn logspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    let (a, b) = (libm::log10(start), libm::log10(stop));
    linspace(a, b, n).into_iter().map(|e| libm::pow(10.0, e)).collect()
}

fn tone_pair() -> Vec<ConditionVariant> {
    alloc::vec![
        ConditionVariant::new("S0", FixedParams::default().tone(0.0)),
        ConditionVariant::new("Spi", FixedParams::default().tone(PI)),
    ]
}

impl ExperimentDef {
    pub fn builtin(id: ExperimentId) -> Self {
        let (sweep, conditions) = match id {
            ExperimentId::Pt1959 => (
                linspace(0.0, 0.8, 9),
                alloc::vec![ConditionVariant::new("dprime1", FixedParams::default())],
            ),
            ExperimentId::Rj1963 => (linspace(-1.0, 1.0, 21), tone_pair()),
            ExperimentId::Bt2014 => (
                linspace(-1.0, 1.0, 21),
                [25.0, 50.0, 100.0, 200.0, 400.0, 900.0]
                    .into_iter()
                    .map(|bw| {
                        ConditionVariant::new(alloc::format!("bw{bw}"), FixedParams::default().bandwidth(bw).tone(PI))
                    })
                    .collect(),
            ),
            ExperimentId::Lj1964 => (linspace(0.0, 9.0, 37), tone_pair()),
            ExperimentId::Vht1999 => (linspace(0.0, 4.0, 33), tone_pair()),
            ExperimentId::Rab1966 => (
                linspace(0.0, 9.0, 19),
                alloc::vec![ConditionVariant::new("Spi", FixedParams::default().tone(PI))],
            ),
            ExperimentId::Bt2020 => {
                let mut conditions = Vec::new();
                for bw in [100.0, 900.0] {
                    for rho in [1.0, 0.992, 0.96, 0.92, 0.8, 0.498] {
                        conditions.push(ConditionVariant::new(
                            alloc::format!("bw{bw}_rho{rho}"),
                            FixedParams::default().bandwidth(bw).rho(rho).tone(PI),
                        ));
                    }
                    conditions.push(ConditionVariant::new(
                        alloc::format!("bw{bw}_N0S0"),
                        FixedParams::default().bandwidth(bw).rho(1.0).tone(0.0),
                    ));
                }
                (linspace(0.0, 4.0, 17), conditions)
            }
            ExperimentId::Vpk1999 => (
                logspace(5.0, 1000.0, 17),
                alloc::vec![
                    ConditionVariant::new("N0S0", FixedParams::default().noise_phase(0.0).tone(0.0)),
                    ConditionVariant::new("N0Spi", FixedParams::default().noise_phase(0.0).tone(PI)),
                    ConditionVariant::new("NpiS0", FixedParams::default().noise_phase(PI).tone(0.0)),
                ],
            ),
        };
        Self {
            id,
            family: id.family(),
            sweep,
            conditions,
            table1_params: id.table1_params(),
            ordinate: id.ordinate(),
        }
    }

    pub fn all() -> Vec<Self> {
        ExperimentId::ALL.into_iter().map(Self::builtin).collect()
    }

    pub fn with_sweep(mut self, sweep: Vec<f64>) -> Self {
        self.sweep = sweep;
        self
    }

    pub fn variant(&self, condition_id: &str) -> Option<&ConditionVariant> {
        self.conditions.iter().find(|c| c.id == condition_id)
    }

    /// Stimulus pair for `condition_id` at sweep position `x`.
    pub fn condition(&self, condition_id: &str, x: f64) -> Result<Condition> {
        let variant = self.variant(condition_id).ok_or_else(|| {
            Error::InvalidStimulus(alloc::format!(
                "experiment {} has no condition `{condition_id}`",
                self.id
            ))
        })?;
        build_condition(self.family, x, &variant.fixed)
    }

    /// Every `(condition id, sweep value)` pair, condition-major.
    pub fn grid(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.conditions
            .iter()
            .flat_map(move |c| self.sweep.iter().map(move |&x| (c.id.as_str(), x)))
    }
}

/// Threshold of one grid point; failures are kept per point.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPoint {
    pub condition: String,
    pub sweep_value: f64,
    pub outcome: Result<ThresholdResult>,
}

/// Solves one grid point.
pub fn run_point(
    def: &ExperimentDef,
    condition_id: &str,
    x: f64,
    params: &DetectionParams,
    filter: &PeripheryFilter,
) -> ExperimentPoint {
    let outcome = def
        .condition(condition_id, x)
        .and_then(|c| PreparedCondition::new(&c, filter))
        .and_then(|p| solve_threshold(&p, params));
    ExperimentPoint {
        condition: condition_id.to_string(),
        sweep_value: x,
        outcome,
    }
}

/// Thresholds for the whole grid of `def`, in grid order.
pub fn run_experiment(def: &ExperimentDef, params: &DetectionParams, filter: &PeripheryFilter) -> Vec<ExperimentPoint> {
    def.grid()
        .map(|(id, x)| run_point(def, id, x, params, filter))
        .collect()
}

/// Builds fit observations from `(condition id, x, y)` triples.
pub fn observations<'a, I>(def: &ExperimentDef, data: I, filter: &PeripheryFilter) -> Result<Vec<Observation>>
where
    I: IntoIterator<Item = (&'a str, f64, f64)>,
{
    data.into_iter()
        .map(|(id, x, y)| {
            let condition = PreparedCondition::new(&def.condition(id, x)?, filter)?;
            Ok(Observation { condition, y })
        })
        .collect()
}

/// R² of model thresholds at the data points of one experiment.
pub fn experiment_r_squared(observations: &[Observation], params: &DetectionParams) -> Result<f64> {
    let y: Vec<f64> = observations.iter().map(|o| o.y).collect();
    let f: Vec<f64> = observations
        .iter()
        .map(|o| crate::fit::predict(&o.condition, params))
        .collect();
    r_squared(&y, &f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_grid_point_builds() {
        for def in ExperimentDef::all() {
            assert!(!def.sweep.is_empty() && !def.conditions.is_empty());
            for (id, x) in def.grid() {
                def.condition(id, x)
                    .unwrap_or_else(|e| panic!("{} {id} {x}: {e}", def.id));
            }
        }
    }

    #[test]
    fn published_parameters() {
        let p = ExperimentId::Vht1999.table1_params();
        assert_eq!((p.rho_hat(), p.sigma_bin(), p.sigma_mon()), (0.90, 0.19, Some(0.61)));
        assert_eq!(ExperimentId::Pt1959.table1_params().sigma_mon(), None);
        assert_eq!(ExperimentId::Pt1959.ordinate(), Ordinate::DeltaRho);
        let g = ExperimentId::Rj1963.global_params();
        assert_eq!((g.rho_hat(), g.sigma_bin(), g.sigma_mon()), (0.96, 0.40, Some(0.74)));
    }

    #[test]
    fn ids_parse() {
        for id in ExperimentId::ALL {
            assert_eq!(id.name().parse::<ExperimentId>().unwrap(), id);
            assert_eq!(id.family().name().parse::<ExperimentId>().unwrap(), id);
        }
        assert!("rj1962".parse::<ExperimentId>().is_err());
    }

    #[test]
    fn unknown_condition_is_an_error() {
        let def = ExperimentDef::builtin(ExperimentId::Rj1963);
        assert!(def.condition("Sx", 0.0).is_err());
    }

    #[test]
    fn van_de_par_grid_spans_5_to_1000_hz() {
        let def = ExperimentDef::builtin(ExperimentId::Vpk1999);
        assert!((def.sweep[0] - 5.0).abs() < 1e-12);
        assert!((def.sweep.last().unwrap() - 1000.0).abs() < 1e-9);
    }
}
