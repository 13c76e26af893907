//! Declarative experiment configuration: TOML with `include` and load-time
//! validation of the theorem hypotheses.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bernstein::{fit_a3, BernsteinFunction, Family, FamilySpec, ScalingGrid};
use crate::error::{LabError, Result};
use crate::exterior::{ExteriorFunction, ExteriorKind};
use crate::geometry::{Domain, Profile, GRAPH_HALF_SIDE};
use crate::montecarlo::{ExitScheme, StepControl, DEFAULT_C_TIME, DEFAULT_EPS, DEFAULT_JUMP_CUT, DEFAULT_MAX_STEPS};
use crate::point::Point;

/// Nesting limit for `include` chains.
const MAX_INCLUDE_DEPTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    AssumptionsReport,
    KernelBounds,
    StableOracle,
    TangentialLimit,
    LemmaSuite,
}

impl ExperimentKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ExperimentKind::AssumptionsReport => "assumptions-report",
            ExperimentKind::KernelBounds => "kernel-bounds",
            ExperimentKind::StableOracle => "stable-oracle",
            ExperimentKind::TangentialLimit => "tangential-limit",
            ExperimentKind::LemmaSuite => "lemma-suite",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// `p` is written as a number or `inf`; reports spell infinity as the string "inf".
mod exponent {
    use super::*;

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Int(v) => Ok(v as f64),
            Raw::Text(t) if t == "inf" || t == "infinity" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got \"{t}\""))),
        }
    }
}

fn inf() -> f64 {
    f64::INFINITY
}
fn one() -> f64 {
    1.0
}

/// A family member; omitted parameters take the family defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

impl FamilyConfig {
    pub fn stable(alpha: f64) -> Self {
        FamilyConfig { family: Family::Stable, alpha: Some(alpha), kappa: None, m: None }
    }

    pub fn spec(&self) -> FamilySpec {
        let d = self.family.default_params();
        FamilySpec {
            family: self.family,
            alpha: self.alpha.unwrap_or(d.alpha),
            kappa: self.kappa.unwrap_or(d.kappa),
            m: self.m.unwrap_or(d.m),
        }
    }

    pub fn build(&self) -> Result<BernsteinFunction> {
        self.spec().build()
    }
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig::stable(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainConfig {
    Ball {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        radius: f64,
    },
    Graph {
        dim: usize,
        profile: Profile,
        #[serde(default = "graph_half_side")]
        half_side: f64,
    },
}

fn graph_half_side() -> f64 {
    GRAPH_HALF_SIDE
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig::Ball { dim: 2, center: None, radius: 1.0 }
    }
}

impl DomainConfig {
    pub fn dim(&self) -> usize {
        match self {
            DomainConfig::Ball { dim, .. } | DomainConfig::Graph { dim, .. } => *dim,
        }
    }

    pub fn build(&self) -> Result<Domain> {
        match self {
            DomainConfig::Ball { dim, center, radius } => {
                let c = match center {
                    Some(c) => point(c, *dim, "domain.center")?,
                    None => Point::zeros(*dim),
                };
                Domain::ball(c, *radius)
            }
            DomainConfig::Graph { dim, profile, half_side } => Domain::graph(*dim, *profile, *half_side),
        }
    }

    pub fn is_ball(&self) -> bool {
        matches!(self, DomainConfig::Ball { .. })
    }
}

fn point(xs: &[f64], dim: usize, what: &str) -> Result<Point> {
    if xs.len() != dim {
        return Err(LabError::Config(format!("{what} has {} coordinates, expected {dim}", xs.len())));
    }
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(LabError::Config(format!("{what} has non-finite coordinates")));
    }
    Ok(Point::from_slice(xs))
}

/// Approach-region parameters and the boundary points ξ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionConfig {
    pub gamma: f64,
    pub a: f64,
    /// Stolz aperture M.
    pub m: f64,
    /// Boundary points; empty means `generic` points chosen off the symmetry axes.
    pub xi: Vec<Vec<f64>>,
    pub generic: usize,
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig { gamma: 0.3, a: 1.0, m: 2.0, xi: Vec::new(), generic: GENERIC_POINTS }
    }
}

/// Default number of generic boundary points.
pub const GENERIC_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExteriorTag {
    Constant,
    Power,
    VerticalPower,
    HalfspaceIndicator,
    BallIndicator,
    MollifiedIndicator,
    Singular,
}

/// Exterior data f with its declared class Λ^p_β.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExteriorConfig {
    pub kind: ExteriorTag,
    #[serde(default = "inf", with = "exponent")]
    pub p: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "one")]
    pub cap: f64,
    #[serde(default = "one")]
    pub value: f64,
    /// Defaults to ξ for the centred kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<Vec<f64>>,
    #[serde(default)]
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

impl Default for ExteriorConfig {
    fn default() -> Self {
        ExteriorConfig {
            kind: ExteriorTag::Power,
            p: f64::INFINITY,
            beta: 0.8,
            cap: 1.0,
            value: 1.0,
            center: None,
            normal: None,
            offset: 0.0,
            radius: None,
            width: None,
        }
    }
}

impl ExteriorConfig {
    /// f for the boundary point ξ.
    pub fn build(&self, xi: &Point) -> Result<ExteriorFunction> {
        let d = xi.dim();
        let center = match &self.center {
            Some(c) => point(c, d, "exterior.center")?,
            None => *xi,
        };
        let normal = || -> Result<Point> {
            let n = point(self.normal.as_deref().unwrap_or(&[]), d, "exterior.normal")?;
            if !(n.norm() > 0.0) {
                return Err(LabError::Config("exterior.normal must be nonzero".into()));
            }
            Ok(n.normalized())
        };
        let need = |v: Option<f64>, what: &str| v.ok_or_else(|| LabError::Config(format!("exterior.{what} is required")));
        let kind = match self.kind {
            ExteriorTag::Constant => return Ok(ExteriorFunction::constant(self.value)),
            ExteriorTag::Power => ExteriorKind::Power { center, cap: self.cap },
            ExteriorTag::VerticalPower => ExteriorKind::VerticalPower { cap: self.cap },
            ExteriorTag::HalfspaceIndicator => ExteriorKind::HalfspaceIndicator { normal: normal()?, offset: self.offset },
            ExteriorTag::BallIndicator => ExteriorKind::BallIndicator { center, radius: need(self.radius, "radius")? },
            ExteriorTag::MollifiedIndicator => {
                ExteriorKind::MollifiedIndicator { normal: normal()?, offset: self.offset, width: need(self.width, "width")? }
            }
            ExteriorTag::Singular => return ExteriorFunction::singular(center, self.p, self.beta),
        };
        ExteriorFunction::new(kind, self.p, self.beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub n: usize,
    pub seed: u64,
    pub eps: f64,
    pub c_time: f64,
    pub jump_cut: f64,
    pub max_steps: u64,
    pub scheme: ExitScheme,
    /// Worker threads, 0 for all cores. Never echoed: reports must not depend on it.
    #[serde(skip_serializing)]
    pub workers: usize,
    /// Histogram layout around ball domains.
    pub shells: usize,
    pub sectors: usize,
    /// Write the raw exits of histogram runs as a binary spool.
    pub spool: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n: 100_000,
            seed: 2024,
            eps: DEFAULT_EPS,
            c_time: DEFAULT_C_TIME,
            jump_cut: DEFAULT_JUMP_CUT,
            max_steps: DEFAULT_MAX_STEPS,
            scheme: ExitScheme::default(),
            workers: 0,
            shells: 8,
            sectors: 4,
            spool: false,
        }
    }
}

impl McConfig {
    pub fn control(&self) -> StepControl {
        StepControl { c_time: self.c_time, max_steps: self.max_steps, eps: self.eps, scheme: self.scheme, jump_cut: self.jump_cut }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssumptionsConfig {
    pub dims: Vec<usize>,
    pub lambda0: f64,
    pub theta: f64,
    pub lambda_max: f64,
    pub t_max: f64,
    pub per_decade: usize,
    /// Also check that (A-6) fails for φ(λ) = λ in d = 2.
    pub edge_case: bool,
}

impl Default for AssumptionsConfig {
    fn default() -> Self {
        AssumptionsConfig {
            dims: vec![2, 3],
            lambda0: 1.0,
            theta: 0.5,
            lambda_max: 1e6,
            t_max: 1e6,
            per_decade: 200,
            edge_case: true,
        }
    }
}

impl AssumptionsConfig {
    pub fn grid(&self) -> ScalingGrid {
        ScalingGrid { lambda_max: self.lambda_max, t_max: self.t_max, per_decade: self.per_decade }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    /// Interior start points; empty means the centre of the ball.
    pub points: Vec<Vec<f64>>,
    pub delta_window: [f64; 2],
    /// Refit the sandwich constant from an independent run with 2N exits.
    pub doubling: bool,
    /// Largest acceptable sandwich constant.
    pub c_max: f64,
    /// Comparability grid r ∈ [r_min, r_max].
    pub r_min: f64,
    pub r_max: f64,
    pub per_decade: usize,
    /// Largest tail mass accepted for start points with δ_D(x) ≤ near_delta.
    pub tail_max: f64,
    pub near_delta: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            points: Vec::new(),
            delta_window: [0.05, 0.5],
            doubling: true,
            c_max: 20.0,
            r_min: 1e-3,
            r_max: 1.0,
            per_decade: 20,
            tail_max: 0.2,
            near_delta: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Start point; defaults to the centre.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    pub delta_window: [f64; 2],
    pub doubling: bool,
    /// Largest acceptable relative change of the sandwich constant under doubling.
    pub doubling_tol: f64,
    pub max_censored: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { x: None, delta_window: [0.05, 0.5], doubling: true, doubling_tol: 0.1, max_censored: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TangentialConfig {
    /// Curve points at |x_k − ξ| = 2^{−k}.
    pub levels: Vec<i32>,
    /// Radius of the far set in u₂.
    pub r0: f64,
    pub boundary_k_max: u32,
    pub boundary_nodes: usize,
    pub companion: bool,
    /// Quadrature nodes for the near and intermediate sums.
    pub diag_angles: usize,
    pub diag_panels: usize,
}

impl Default for TangentialConfig {
    fn default() -> Self {
        TangentialConfig {
            levels: vec![5, 10, 15, 20, 25, 30],
            r0: 0.5,
            boundary_k_max: 30,
            boundary_nodes: 20_000,
            companion: true,
            diag_angles: 256,
            diag_panels: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaConfig {
    /// Exponents q; empty means {1, midpoint of [1, 1/(1−δ)) capped at 2}.
    pub q: Vec<f64>,
    /// Slab scales r = 2^{−k}.
    pub levels: Vec<i32>,
    /// Slab half-width; defaults to R_Lip/2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub m: f64,
    pub lambda0: f64,
    /// Largest max/min ratio accepted as "bounded".
    pub bounded_factor: f64,
    /// Oscillation scales r = 2^{−k}.
    pub osc_levels: Vec<i32>,
    pub osc_pairs: usize,
    pub boundary_k_max: u32,
    pub boundary_nodes: usize,
    /// Run the Monte Carlo decay of u₂ along the normal.
    pub decay: bool,
    pub decay_r0: f64,
    pub decay_levels: Vec<i32>,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig {
            q: Vec::new(),
            levels: (4..=10).collect(),
            s: None,
            m: 1.0,
            lambda0: 1.0,
            bounded_factor: 3.0,
            osc_levels: (3..=8).collect(),
            osc_pairs: 40_000,
            boundary_k_max: 20,
            boundary_nodes: 20_000,
            decay: true,
            decay_r0: 1.0,
            decay_levels: (4..=8).collect(),
        }
    }
}

/// One experiment: which runner, the components it composes and their knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Run even though the theorem hypotheses fail; affected checks are marked as expected violations.
    #[serde(default)]
    pub counterexample: bool,
    /// Output directory. Not echoed into reports.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub family: FamilyConfig,
    /// Families for the assumptions report and the lemma suite.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub families: Vec<FamilyConfig>,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub region: RegionConfig,
    #[serde(default)]
    pub exterior: ExteriorConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub assumptions: AssumptionsConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub tangential: TangentialConfig,
    #[serde(default)]
    pub lemma: LemmaConfig,
}

/// Hypothesis failures tolerated in counterexample mode.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HypothesisStatus {
    pub violations: Vec<String>,
}

impl HypothesisStatus {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            counterexample: false,
            out: None,
            family: FamilyConfig::default(),
            families: Vec::new(),
            domain: DomainConfig::default(),
            region: RegionConfig::default(),
            exterior: ExteriorConfig::default(),
            mc: McConfig::default(),
            assumptions: AssumptionsConfig::default(),
            kernel: KernelConfig::default(),
            oracle: OracleConfig::default(),
            tangential: TangentialConfig::default(),
            lemma: LemmaConfig::default(),
        }
    }

    /// Parses a file, resolving includes relative to each including file, and validates it.
    pub fn load(path: &Path) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let table = load_table(path, &mut seen, 0)?;
        let cfg = Self::from_table(table)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses TOML text without includes and validates it.
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e| LabError::Config(format!("{e}")))?;
        if table.contains_key("include") {
            return Err(LabError::Config("include needs a file path to resolve against; use load".into()));
        }
        let cfg = Self::from_table(table)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| LabError::Config(e.message().to_string()))
    }

    /// Families the runner iterates over: `families` if set, otherwise `family`.
    /// The lemma suite instead defaults to stable α ∈ {0.5, 1, 1.5} and geometric α = 1.
    pub fn family_list(&self) -> Vec<FamilyConfig> {
        if self.families.is_empty() && self.experiment == ExperimentKind::LemmaSuite {
            let mut v: Vec<FamilyConfig> = [0.5, 1.0, 1.5].iter().map(|&a| FamilyConfig::stable(a)).collect();
            v.push(FamilyConfig { family: Family::Geometric, alpha: Some(1.0), kappa: None, m: None });
            v
        } else if self.families.is_empty() {
            vec![self.family]
        } else {
            self.families.clone()
        }
    }

    /// Boundary points, either configured (projected onto ∂D) or `region.generic` generic ones.
    pub fn boundary_points(&self, domain: &Domain) -> Result<Vec<Point>> {
        let d = domain.dim();
        if self.region.xi.is_empty() {
            return generic_boundary_points(domain, self.region.generic);
        }
        self.region
            .xi
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let p = point(c, d, &format!("region.xi[{i}]"))?;
                let sd = domain.signed_distance(&p);
                if sd.abs() > 1e-6 {
                    return Err(LabError::Config(format!("region.xi[{i}] is at distance {:e} from the boundary", sd.abs())));
                }
                Ok(domain.project(&p))
            })
            .collect()
    }

    /// Structural checks plus the hypothesis set; hypothesis failures are errors unless
    /// `counterexample` is set.
    pub fn validate(&self) -> Result<HypothesisStatus> {
        let bad = |m: String| Err(LabError::Config(m));
        let d = self.domain.dim();
        if !(2..=crate::point::MAX_DIM).contains(&d) {
            return bad(format!("domain.dim = {d} outside 2..=4"));
        }
        let domain = self.domain.build().map_err(as_config)?;
        for fc in self.family_list() {
            fc.build().map_err(as_config)?;
        }
        let mc = &self.mc;
        if mc.n == 0 {
            return bad("mc.n must be positive".into());
        }
        mc.control().validate().map_err(as_config)?;
        if mc.shells == 0 || mc.sectors == 0 {
            return bad("mc.shells and mc.sectors must be positive".into());
        }
        let xis = self.boundary_points(&domain)?;
        let mut status = HypothesisStatus::default();
        match self.experiment {
            ExperimentKind::AssumptionsReport => {
                let a = &self.assumptions;
                if a.dims.is_empty() || a.dims.iter().any(|d| !(2..=4).contains(d)) {
                    return bad("assumptions.dims must list dimensions in 2..=4".into());
                }
                if !(a.lambda0 > 0.0 && a.theta > 0.0 && a.per_decade > 0 && a.lambda_max > a.lambda0 && a.t_max > 1.0) {
                    return bad("assumptions grid parameters out of range".into());
                }
            }
            ExperimentKind::KernelBounds | ExperimentKind::StableOracle => {
                if !self.domain.is_ball() {
                    return bad(format!("{} needs a ball domain", self.experiment));
                }
                let k = &self.kernel;
                let w = if self.experiment == ExperimentKind::KernelBounds { k.delta_window } else { self.oracle.delta_window };
                if !(w[0] > 0.0 && w[0] < w[1]) {
                    return bad("delta_window must satisfy 0 < lo < hi".into());
                }
                if !(k.r_min > 0.0 && k.r_min < k.r_max && k.per_decade > 0) {
                    return bad("kernel comparability grid out of range".into());
                }
                if mc.n < crate::montecarlo::MIN_HISTOGRAM_SAMPLES {
                    return bad(format!("histograms need mc.n >= {}", crate::montecarlo::MIN_HISTOGRAM_SAMPLES));
                }
                if self.experiment == ExperimentKind::StableOracle && self.family.family != Family::Stable {
                    return bad("stable-oracle needs the stable family".into());
                }
                let pts: Vec<Vec<f64>> = match self.experiment {
                    ExperimentKind::KernelBounds => k.points.clone(),
                    _ => self.oracle.x.clone().into_iter().collect(),
                };
                for (i, c) in pts.iter().enumerate() {
                    if !domain.contains(&point(c, d, &format!("start point {i}"))?) {
                        return bad(format!("start point {i} is not in D"));
                    }
                }
            }
            ExperimentKind::TangentialLimit | ExperimentKind::LemmaSuite => {
                let r = &self.region;
                if !(r.a > 0.0 && r.m > 1.0) {
                    return bad("region needs a > 0 and m > 1".into());
                }
                if self.experiment == ExperimentKind::TangentialLimit {
                    let t = &self.tangential;
                    if t.levels.len() < 2 || t.levels.windows(2).any(|w| w[1] <= w[0]) {
                        return bad("tangential.levels must be increasing with at least two entries".into());
                    }
                    let (big_r, _) = domain.c11();
                    if 2f64.powi(-t.levels[0]) >= big_r / 8.0 {
                        return bad(format!("tangential.levels[0] = {} gives a point outside B(xi, R/8)", t.levels[0]));
                    }
                    if 2f64.powi(-t.levels[0]) >= t.r0 / 8.0 {
                        return bad("tangential.r0 must exceed 8·2^{-levels[0]}".into());
                    }
                    if mc.n < crate::montecarlo::MIN_SAMPLES {
                        return bad(format!("mc.n must be at least {}", crate::montecarlo::MIN_SAMPLES));
                    }
                } else {
                    let l = &self.lemma;
                    if l.levels.is_empty() || l.osc_levels.len() < 2 || l.m < 1.0 || l.osc_pairs == 0 {
                        return bad("lemma levels, m >= 1 and osc_pairs > 0 are required".into());
                    }
                    if l.decay && mc.n < crate::montecarlo::MIN_SAMPLES {
                        return bad(format!("mc.n must be at least {} for the decay check", crate::montecarlo::MIN_SAMPLES));
                    }
                }
                status = self.check_hypotheses(&xis)?;
                if !status.holds() && !self.counterexample {
                    return Err(LabError::Hypothesis(status.violations.join("; ")));
                }
            }
        }
        Ok(status)
    }

    /// p ∈ (1, ∞], β > 1/p, 0 < γ < β − 1/p, and δ > 1/p for the fitted (A-3) exponent;
    /// for the lemma suite also q ∈ [1, 1/(1−δ)). Structural failures are always errors.
    fn check_hypotheses(&self, xis: &[Point]) -> Result<HypothesisStatus> {
        let e = &self.exterior;
        let mut v = Vec::new();
        if !(e.p > 1.0) {
            return Err(LabError::Hypothesis(format!("p = {} must lie in (1, inf]", e.p)));
        }
        for xi in xis {
            // constructs f, which rejects beta <= 1/p
            e.build(xi)?;
        }
        let f = e.build(&xis[0])?;
        let gamma = self.region.gamma;
        if !(gamma > 0.0) {
            return Err(LabError::Hypothesis(format!("gamma = {gamma} must be positive")));
        }
        if !f.is_constant() && !f.admits_gamma(gamma) {
            v.push(format!("gamma = {gamma} must lie below beta - 1/p = {}", e.beta - 1.0 / e.p));
        }
        let lambda0 = if self.experiment == ExperimentKind::LemmaSuite { self.lemma.lambda0 } else { 1.0 };
        for fc in self.family_list() {
            let phi = fc.build()?;
            let up = fit_a3(&phi, lambda0, &ScalingGrid::default())?;
            if !f.is_constant() && up.delta <= 1.0 / e.p {
                v.push(format!("{}: delta = {} from (A-3) must exceed 1/p = {}", phi.describe(), up.delta, 1.0 / e.p));
            }
            if self.experiment == ExperimentKind::LemmaSuite {
                let q_max = q_limit(up.delta);
                for &q in &self.lemma.q {
                    if !(q >= 1.0 && q < q_max) {
                        return Err(LabError::Hypothesis(format!(
                            "{}: q = {q} must lie in [1, 1/(1-delta)) = [1, {q_max})",
                            phi.describe()
                        )));
                    }
                }
            }
        }
        Ok(HypothesisStatus { violations: v })
    }
}

/// 1/(1−δ), infinite for δ ≥ 1.
pub fn q_limit(delta: f64) -> f64 {
    if delta >= 1.0 {
        f64::INFINITY
    } else {
        1.0 / (1.0 - delta)
    }
}

fn as_config(e: LabError) -> LabError {
    match e {
        LabError::Config(_) | LabError::Hypothesis(_) => e,
        other => LabError::Config(other.to_string()),
    }
}

/// Polar angles of the generic directions in the plane, each at least 0.3 rad from an axis.
const GENERIC_ANGLES: [f64; 5] = [0.7, 2.0, 3.6, 4.4, 5.9];
/// Colatitudes used in d ≥ 3 for the directions after the first.
const GENERIC_COLAT: [f64; 5] = [0.0, 0.6, 2.2, 1.9, 2.6];

/// Unit direction number j, away from every coordinate axis and plane.
fn generic_direction(d: usize, j: usize) -> Point {
    const DIR: [f64; 4] = [0.764_842_187_284_488_9, 0.644_217_687_237_691, 0.31, 0.17];
    let mut v = Point::from_slice(&DIR[..d]);
    let k = j % GENERIC_ANGLES.len();
    let t = GENERIC_ANGLES[k];
    if d == 2 {
        v[0] = t.cos();
        v[1] = t.sin();
    } else if k > 0 {
        let c = GENERIC_COLAT[k];
        v[0] = t.cos() * c.sin();
        v[1] = t.sin() * c.sin();
        v[2] = c.cos();
    }
    v.normalized()
}

/// A boundary point away from coordinate axes, so that no symmetry of the setup is hit.
pub fn generic_boundary_point(domain: &Domain) -> Point {
    generic_point(domain, 0)
}

fn generic_point(domain: &Domain, j: usize) -> Point {
    let d = domain.dim();
    let v = generic_direction(d, j);
    match &domain.shape {
        crate::geometry::Shape::Graph { profile, .. } => {
            let mut x = Point::zeros(d);
            let mut s2 = 0.0;
            for i in 0..d - 1 {
                x[i] = 0.05 * v[i];
                s2 += x[i] * x[i];
            }
            x[d - 1] = profile.g(s2.sqrt());
            x
        }
        crate::geometry::Shape::Ball { center, radius } => *center + v * *radius,
        crate::geometry::Shape::Localized(l) => domain.project(&(l.xi + v)),
    }
}

/// The first `count` generic boundary points (at most 5).
pub fn generic_boundary_points(domain: &Domain, count: usize) -> Result<Vec<Point>> {
    if count == 0 || count > GENERIC_ANGLES.len() {
        return Err(LabError::Config(format!("region.generic must lie in [1, {}], got {count}", GENERIC_ANGLES.len())));
    }
    Ok((0..count).map(|j| generic_point(domain, j)).collect())
}

/// Reads a TOML file and merges its includes underneath it.
fn load_table(path: &Path, seen: &mut BTreeSet<PathBuf>, depth: usize) -> Result<toml::Table> {
    if depth > MAX_INCLUDE_DEPTH {
        return Err(LabError::Config(format!("include depth exceeds {MAX_INCLUDE_DEPTH} at {}", path.display())));
    }
    let canon = path.canonicalize().map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
    if !seen.insert(canon.clone()) {
        return Err(LabError::Config(format!("include cycle through {}", path.display())));
    }
    let text = std::fs::read_to_string(&canon).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
    let mut table: toml::Table = text.parse().map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
    let includes = match table.remove("include") {
        None => Vec::new(),
        Some(toml::Value::String(s)) => vec![s],
        Some(toml::Value::Array(a)) => a
            .into_iter()
            .map(|v| match v {
                toml::Value::String(s) => Ok(s),
                _ => Err(LabError::Config(format!("{}: include entries must be strings", path.display()))),
            })
            .collect::<Result<_>>()?,
        Some(_) => return Err(LabError::Config(format!("{}: include must be a string or array", path.display()))),
    };
    let base = canon.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut merged = toml::Table::new();
    for inc in includes {
        let sub = load_table(&base.join(inc), seen, depth + 1)?;
        merge(&mut merged, sub);
    }
    merge(&mut merged, table);
    seen.remove(&canon);
    Ok(merged)
}

/// Deep merge: tables merge key by key, anything else in `top` replaces `base`.
pub fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
