//! JSON experiment configuration: the system, its observables and the
//! parameters of every pipeline, with defaults filled in on load.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circle::CirclePoint;
use crate::diagnostics::DualMode;
use crate::error::{IfsError, Result};
use crate::homeo::Homeo;
use crate::ifs::{Ifs, DEFAULT_ATOM_CAP, DEFAULT_NODE_BUDGET};
use crate::observable::{Observable, ObservableShape};

/// Grid used when validating maps and observables.
pub const VALIDATION_GRID: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MapSpec {
    Rotation { theta: f64 },
    Arnold { theta: f64, eps: f64 },
    /// Circle pairs `(x, g(x))` of a piecewise-linear homeomorphism.
    Pwl { points: Vec<[f64; 2]> },
    Inverse { of: Box<MapSpec> },
}

impl MapSpec {
    pub fn build(&self) -> Result<Homeo> {
        Ok(match self {
            MapSpec::Rotation { theta } => Homeo::rotation(*theta),
            MapSpec::Arnold { theta, eps } => Homeo::arnold(*theta, *eps),
            MapSpec::Pwl { points } => Homeo::piecewise_linear(points)?,
            MapSpec::Inverse { of } => of.build()?.inverse(),
        })
    }
}

/// An observable; the Lipschitz constant is derived from the parameters
/// unless declared, in which case the declaration is checked on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    #[serde(flatten)]
    pub shape: ObservableShape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

impl ObservableSpec {
    pub fn build(&self) -> Result<Observable> {
        let mut o = match &self.shape {
            ObservableShape::Harmonic { cos, sin } => Observable::harmonic(cos.clone(), sin.clone()),
            ObservableShape::Pwl { points } => Observable::piecewise_linear(points)?,
        };
        if let Some(l) = self.lipschitz {
            o.lipschitz = l;
        }
        Ok(o)
    }
}

fn cos1_spec() -> Vec<ObservableSpec> {
    vec![ObservableSpec { shape: ObservableShape::Harmonic { cos: vec![1.0], sin: vec![] }, lipschitz: None }]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub node_budget: u64,
    pub atom_cap: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { node_budget: DEFAULT_NODE_BUDGET, atom_cap: DEFAULT_ATOM_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    pub n: usize,
    pub paths: usize,
}

impl Default for SimulateParams {
    fn default() -> Self {
        SimulateParams { n: 1000, paths: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationaryParams {
    pub burn_in: usize,
    pub count: usize,
    pub thinning: usize,
    pub chains: usize,
}

impl Default for StationaryParams {
    fn default() -> Self {
        StationaryParams { burn_in: 1000, count: 100_000, thinning: 1, chains: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualParams {
    pub points: Vec<f64>,
    pub n: usize,
    pub mode: DualMode,
    pub samples: usize,
    pub observable: usize,
}

impl Default for DualParams {
    fn default() -> Self {
        DualParams { points: vec![0.0, 0.25, 0.5, 0.75], n: 12, mode: DualMode::Exact, samples: 10_000, observable: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpropParams {
    pub x: f64,
    pub deltas: Vec<f64>,
    pub n_max: usize,
    pub mode: DualMode,
    pub samples: usize,
    pub observable: usize,
}

impl Default for EpropParams {
    fn default() -> Self {
        EpropParams { x: 0.3, deltas: vec![1e-1, 1e-2, 1e-3, 1e-4], n_max: 16, mode: DualMode::Exact, samples: 10_000, observable: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyncParams {
    pub arcs: usize,
    pub arc_length: f64,
    pub depth: usize,
    pub trials: usize,
    pub m_max: usize,
    pub x_grid: usize,
    pub minimality_depth: usize,
    pub minimality_eps: f64,
    pub minimality_points: usize,
}

impl Default for SyncParams {
    fn default() -> Self {
        SyncParams {
            arcs: 16,
            arc_length: 0.1,
            depth: 64,
            trials: 4000,
            m_max: 20,
            x_grid: 4096,
            minimality_depth: 14,
            minimality_eps: 0.01,
            minimality_points: 1 << 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityParams {
    pub x: f64,
    pub y: f64,
    pub n_list: Vec<usize>,
    pub samples: usize,
}

impl Default for StabilityParams {
    fn default() -> Self {
        StabilityParams { x: 0.2, y: 0.7, n_list: vec![0, 1, 2, 5, 10, 20, 50, 100, 200], samples: 10_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniqueParams {
    pub starts: Vec<f64>,
    pub n: usize,
}

impl Default for UniqueParams {
    fn default() -> Self {
        UniqueParams { starts: vec![0.0, 0.2, 0.4, 0.6, 0.8], n: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MwParams {
    pub n_list: Vec<usize>,
    pub x_count: usize,
    pub mode: DualMode,
    pub mc_samples: usize,
    pub centering_count: usize,
    /// Points compared by the partial-sum gap.
    pub pair: [f64; 2],
    pub observable: usize,
}

impl Default for MwParams {
    fn default() -> Self {
        MwParams {
            n_list: (1..=18).collect(),
            x_count: 256,
            mode: DualMode::Exact,
            mc_samples: 10_000,
            centering_count: 1 << 22,
            pair: [0.0, 0.5],
            observable: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CltParams {
    /// Sum lengths for the variance and normality reports.
    pub n_list: Vec<usize>,
    pub replicates: usize,
    pub burn_in: usize,
    pub fixed_x: f64,
    pub t_list: Vec<f64>,
    pub charfn_n_list: Vec<usize>,
    /// States in each of the two independent centring samples.
    pub centering_count: usize,
    pub observable: usize,
}

impl Default for CltParams {
    fn default() -> Self {
        CltParams {
            n_list: vec![10_000, 40_000],
            replicates: 2000,
            burn_in: 1000,
            fixed_x: 0.3,
            t_list: vec![0.5, 1.0, 2.0],
            charfn_n_list: vec![100, 1000, 10_000],
            centering_count: 1 << 25,
            observable: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoupleParams {
    pub x: f64,
    pub y: f64,
    pub n: usize,
    pub transcripts: usize,
    pub tail_horizon: usize,
    pub l_max: usize,
    pub gap_n_list: Vec<usize>,
    pub gap_replicates: usize,
    /// Transcripts written out in full.
    pub dump: usize,
    pub observable: usize,
}

impl Default for CoupleParams {
    fn default() -> Self {
        CoupleParams {
            x: 0.0,
            y: 0.5,
            n: 200,
            transcripts: 10_000,
            tail_horizon: 64,
            l_max: 20,
            gap_n_list: vec![5, 10, 18, 50, 100, 200, 500, 1000, 2000],
            gap_replicates: 10_000,
            dump: 5,
            observable: 0,
        }
    }
}

/// A complete experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default)]
    pub name: String,
    pub maps: Vec<MapSpec>,
    pub probs: Vec<f64>,
    /// Denominators certifying rational probabilities, used to uniformize
    /// unequal weights for the coupling.
    #[serde(default)]
    pub denominators: Option<Vec<u64>>,
    #[serde(default = "cos1_spec")]
    pub observables: Vec<ObservableSpec>,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub simulate: SimulateParams,
    #[serde(default)]
    pub stationary: StationaryParams,
    #[serde(default)]
    pub dual: DualParams,
    #[serde(default)]
    pub eprop: EpropParams,
    #[serde(default)]
    pub sync: SyncParams,
    #[serde(default)]
    pub stability: StabilityParams,
    #[serde(default)]
    pub unique: UniqueParams,
    #[serde(default)]
    pub mw: MwParams,
    #[serde(default)]
    pub clt: CltParams,
    #[serde(default)]
    pub couple: CoupleParams,
}

impl SystemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SystemSpec = serde_json::from_str(text)
            .map_err(|e| IfsError::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
        spec.validate()?;
        Ok(spec)
    }

    /// The spec with every default written out.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// SHA-256 of the canonical compact JSON form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(serde_json::to_string(self).expect("spec serializes").as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn build_ifs(&self) -> Result<Ifs> {
        let maps = self.maps.iter().map(MapSpec::build).collect::<Result<Vec<_>>>()?;
        Ifs::new(maps, self.probs.clone()).map_err(|e| IfsError::Validation(e.to_string()))
    }

    pub fn observable(&self, index: usize) -> Result<Observable> {
        self.observables
            .get(index)
            .ok_or_else(|| IfsError::Validation(format!("observable index {index} out of range ({} defined)", self.observables.len())))?
            .build()
    }

    pub fn x0(&self) -> CirclePoint {
        CirclePoint::new(self.x0)
    }

    /// Checks every invariant and names the first one that fails.
    pub fn validate(&self) -> Result<()> {
        for (i, m) in self.maps.iter().enumerate() {
            let report = m.build().map_err(|e| IfsError::Validation(format!("maps[{i}]: {e}")))?.validate(VALIDATION_GRID);
            if !report.passed {
                return Err(IfsError::Validation(format!("maps[{i}]: {}", report.reason.unwrap_or_default())));
            }
        }
        self.build_ifs()?;
        if self.observables.is_empty() {
            return Err(IfsError::Validation("at least one observable is required".into()));
        }
        for (i, o) in self.observables.iter().enumerate() {
            o.build()
                .and_then(|o| o.validate(VALIDATION_GRID))
                .map_err(|e| IfsError::Validation(format!("observables[{i}]: {e}")))?;
        }
        let positive = [
            ("budgets.node_budget", self.budgets.node_budget as usize),
            ("budgets.atom_cap", self.budgets.atom_cap),
            ("stationary.count", self.stationary.count),
            ("stationary.thinning", self.stationary.thinning),
            ("stationary.chains", self.stationary.chains),
            ("simulate.paths", self.simulate.paths),
            ("dual.samples", self.dual.samples),
            ("eprop.samples", self.eprop.samples),
            ("sync.trials", self.sync.trials),
            ("sync.x_grid", self.sync.x_grid),
            ("sync.arcs", self.sync.arcs),
            ("sync.minimality_points", self.sync.minimality_points),
            ("stability.samples", self.stability.samples),
            ("unique.n", self.unique.n),
            ("mw.x_count", self.mw.x_count),
            ("mw.centering_count", self.mw.centering_count),
            ("clt.replicates", self.clt.replicates),
            ("clt.centering_count", self.clt.centering_count),
            ("couple.n", self.couple.n),
            ("couple.transcripts", self.couple.transcripts),
            ("couple.tail_horizon", self.couple.tail_horizon),
            ("couple.gap_replicates", self.couple.gap_replicates),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(IfsError::Validation(format!("{name} must be positive")));
        }
        if !(self.sync.arc_length > 0.0 && self.sync.arc_length < 1.0) {
            return Err(IfsError::Validation("sync.arc_length must lie in (0, 1)".into()));
        }
        if self.unique.starts.len() < 2 {
            return Err(IfsError::Validation("unique.starts needs at least two points".into()));
        }
        if self.mw.n_list.is_empty() || self.mw.n_list.contains(&0) || self.clt.n_list.contains(&0) {
            return Err(IfsError::Validation("mw.n_list and clt.n_list need positive entries".into()));
        }
        if let Some(d) = &self.denominators {
            if d.is_empty() || d.contains(&0) {
                return Err(IfsError::Validation("denominators must be positive".into()));
            }
        }
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<SystemSpec> {
    let text = fs::read_to_string(path)?;
    SystemSpec::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"maps": [{"type": "arnold", "theta": 0.0, "eps": 0.9}, {"type": "rotation", "theta": 0.3}], "probs": [0.5, 0.5]}"#;

    #[test]
    fn defaults_are_filled_and_round_trip() {
        let spec = SystemSpec::from_json(MINIMAL).unwrap();
        assert_eq!(spec.sync, SyncParams::default());
        assert_eq!(spec.observables.len(), 1);
        let again = SystemSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(again, spec);
        assert_eq!(again.hash(), spec.hash());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad_sum = MINIMAL.replace("[0.5, 0.5]", "[0.5, 0.6]");
        assert!(matches!(SystemSpec::from_json(&bad_sum), Err(IfsError::Validation(_))));
        let bad_eps = MINIMAL.replace("\"eps\": 0.9", "\"eps\": 1.2");
        let err = SystemSpec::from_json(&bad_eps).unwrap_err();
        assert!(matches!(&err, IfsError::Validation(m) if m.contains("maps[0]")), "{err}");
        let unknown = MINIMAL.replace("\"probs\"", "\"probz\"");
        assert!(matches!(SystemSpec::from_json(&unknown), Err(IfsError::Parse(_))));
        let zero = MINIMAL.replace("}]", "}], \"clt\": {\"replicates\": 0}");
        assert!(matches!(SystemSpec::from_json(&zero), Err(IfsError::Validation(m)) if m.contains("clt.replicates")));
    }

    #[test]
    fn declared_lipschitz_is_checked() {
        let low = MINIMAL.replace("}]", "}], \"observables\": [{\"type\": \"harmonic\", \"cos\": [1.0], \"lipschitz\": 1.0}]");
        assert!(matches!(SystemSpec::from_json(&low), Err(IfsError::Validation(_))));
    }
}
