//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "fig3"
//! system = "multistream"          # or "tandem"
//! replications = 20
//! horizon = 1e5
//! root_seed = 7
//! tolerance = 0.1                 # discrepancy-report threshold (relative)
//!
//! [spatial]                       # all optional
//! window = 200.0                  # square side, meters
//! m1 = 0.5
//! lambda1 = 0.01
//! m2 = 0.5
//! lambda_p2 = 0.002
//! lambda_c2 = 0.015
//! r_c = 5.0
//! lambda_a = 0.0005
//!
//! [channel]                       # all optional
//! alpha = 4.0
//! noise = 1e-6
//! theta_db = 0.0
//! samples = 2000                  # Monte Carlo samples per source node
//! sources = 64                    # source nodes averaged over
//!
//! [flows]                         # system = "multistream"
//! count = 3                       # M; with total_rate and xi1
//! total_rate = 3.0
//! xi1 = 1.0                       # or: rates = [1.0, 1.0, 1.0]
//! success_prob = 0.8              # or "estimated"
//! analytic = "mm11"               # or "mg11"; default follows the service law
//! [flows.service]
//! dist = "exponential"            # or "gamma"
//! rate = 4.0
//! scv = 1.0
//!
//! [chain]                         # system = "tandem"
//! xi = 0.5
//! p_a = 0.9
//! hops = 2                        # with [chain.node]; or [[chain.nodes]]
//! [chain.node]
//! mu = 1.0
//! eps = 0.05
//! theta = 0.1
//! psi = 0.5
//! servers = 1
//!
//! [sweep]
//! parameter = "flows.xi1"
//! values = [0.5, 1.0, 1.5]
//!
//! [family]                        # optional; one output file per value
//! parameter = "flows.service.rate"
//! values = [4.0, 8.0]
//! ```

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use super::HarnessError;
use crate::analytic::{FlowSet, SatelliteChain, SatelliteNode, ServiceDist, ServiceSpec};
use crate::channel::{db_to_linear, ChannelConfig};
use crate::spatial::{SpatialConfig, Window};

pub const DEFAULT_TOLERANCE: f64 = 0.1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: Option<String>,
    system: SystemKind,
    replications: Option<usize>,
    horizon: Option<f64>,
    root_seed: Option<u64>,
    tolerance: Option<f64>,
    #[serde(default)]
    spatial: SpatialFile,
    #[serde(default)]
    channel: ChannelFile,
    flows: Option<FlowsFile>,
    chain: Option<ChainFile>,
    sweep: SweepFile,
    family: Option<SweepFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Multistream,
    Tandem,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SpatialFile {
    window: f64,
    m1: f64,
    lambda1: f64,
    m2: f64,
    lambda_p2: f64,
    lambda_c2: f64,
    r_c: f64,
    lambda_a: f64,
}

impl Default for SpatialFile {
    fn default() -> Self {
        Self { window: 200.0, m1: 0.5, lambda1: 0.01, m2: 0.5, lambda_p2: 0.002, lambda_c2: 0.015, r_c: 5.0, lambda_a: 0.0005 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ChannelFile {
    alpha: f64,
    noise: f64,
    theta_db: f64,
    samples: usize,
    sources: usize,
}

impl Default for ChannelFile {
    fn default() -> Self {
        Self { alpha: 4.0, noise: 1e-6, theta_db: 0.0, samples: 2000, sources: 64 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SuccessProbFile {
    Fixed(f64),
    Mode(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowsFile {
    rates: Option<Vec<f64>>,
    count: Option<usize>,
    total_rate: Option<f64>,
    xi1: Option<f64>,
    success_prob: SuccessProbFile,
    analytic: Option<AnalyticModel>,
    service: ServiceFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ServiceFile {
    dist: DistFile,
    rate: f64,
    scv: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum DistFile {
    Exponential,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalyticModel {
    /// Exponential-service departure-moment route.
    Mm11,
    /// General-service closed form.
    Mg11,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainFile {
    xi: f64,
    p_a: f64,
    hops: Option<usize>,
    node: Option<NodeFile>,
    nodes: Option<Vec<NodeFile>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeFile {
    mu: f64,
    #[serde(default)]
    eps: f64,
    #[serde(default)]
    theta: f64,
    #[serde(default)]
    psi: f64,
    #[serde(default = "one")]
    servers: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    parameter: String,
    values: Vec<f64>,
}

/// A scalar knob a sweep or family can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    FlowsXi1,
    FlowsTotalRate,
    FlowsSuccessProb,
    ServiceRate,
    ServiceScv,
    SpatialLambda1,
    SpatialLambdaP2,
    SpatialLambdaC2,
    SpatialLambdaA,
    ChannelThetaDb,
    ChannelNoise,
    ChainXi,
    ChainPa,
    ChainHops,
    NodeMu,
    NodeEps,
    NodeTheta,
    NodePsi,
}

const PARAMS: &[(&str, Param)] = &[
    ("flows.xi1", Param::FlowsXi1),
    ("flows.total_rate", Param::FlowsTotalRate),
    ("flows.success_prob", Param::FlowsSuccessProb),
    ("flows.service.rate", Param::ServiceRate),
    ("flows.service.scv", Param::ServiceScv),
    ("spatial.lambda1", Param::SpatialLambda1),
    ("spatial.lambda_p2", Param::SpatialLambdaP2),
    ("spatial.lambda_c2", Param::SpatialLambdaC2),
    ("spatial.lambda_a", Param::SpatialLambdaA),
    ("channel.theta_db", Param::ChannelThetaDb),
    ("channel.noise", Param::ChannelNoise),
    ("chain.xi", Param::ChainXi),
    ("chain.p_a", Param::ChainPa),
    ("chain.hops", Param::ChainHops),
    ("chain.node.mu", Param::NodeMu),
    ("chain.node.eps", Param::NodeEps),
    ("chain.node.theta", Param::NodeTheta),
    ("chain.node.psi", Param::NodePsi),
];

impl Param {
    pub fn parse(path: &str) -> Option<Self> {
        PARAMS.iter().find(|(p, _)| *p == path).map(|(_, v)| *v)
    }

    pub fn path(&self) -> &'static str {
        PARAMS.iter().find(|(_, v)| v == self).map(|(p, _)| *p).expect("every param is listed")
    }

    /// Last path segment, used in output file names.
    pub fn short_name(&self) -> &'static str {
        self.path().rsplit('.').next().unwrap_or("value")
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.path())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: Param,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuccessProb {
    Fixed(f64),
    /// Averaged Monte Carlo estimate over the spatial and channel models.
    Estimated,
}

/// How the per-flow rates are laid out.
#[derive(Debug, Clone, PartialEq)]
pub enum RateLayout {
    Explicit(Vec<f64>),
    /// Flow 1 gets `xi1`; the other `count - 1` flows split the rest evenly.
    Split { count: usize, total: f64, xi1: f64 },
}

impl RateLayout {
    pub fn rates(&self) -> Vec<f64> {
        match self {
            RateLayout::Explicit(r) => r.clone(),
            RateLayout::Split { count, total, xi1 } => {
                let mut r = vec![*xi1];
                r.extend(std::iter::repeat_n((total - xi1) / (*count as f64 - 1.0), count - 1));
                r
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTemplate {
    pub layout: RateLayout,
    pub success: SuccessProb,
    pub service: ServiceSpec,
    pub analytic: AnalyticModel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainLayout {
    Explicit(Vec<SatelliteNode>),
    Uniform { node: SatelliteNode, hops: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTemplate {
    pub layout: ChainLayout,
    pub p_a: f64,
    pub xi: f64,
}

impl ChainTemplate {
    pub fn chain(&self) -> SatelliteChain {
        let nodes = match &self.layout {
            ChainLayout::Explicit(n) => n.clone(),
            ChainLayout::Uniform { node, hops } => vec![*node; *hops],
        };
        SatelliteChain { nodes, p_a: self.p_a }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSettings {
    pub config: ChannelConfig,
    pub theta_db: f64,
    pub samples: usize,
    pub sources: usize,
}

/// A validated scenario with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub system: SystemKind,
    pub spatial: SpatialConfig,
    pub window: Window,
    pub channel: ChannelSettings,
    pub flows: Option<FlowTemplate>,
    pub chain: Option<ChainTemplate>,
    pub sweep: Sweep,
    pub family: Option<Sweep>,
    pub replications: usize,
    pub horizon: f64,
    pub root_seed: u64,
    pub tolerance: f64,
}

fn invalid(field: &str, constraint: impl Into<String>) -> HarnessError {
    HarnessError::Validation { field: field.to_string(), constraint: constraint.into() }
}

fn service_from(file: &ServiceFile) -> Result<ServiceSpec, HarnessError> {
    let spec = match file.dist {
        DistFile::Exponential => {
            if file.scv.is_some_and(|c| c != 1.0) {
                return Err(invalid("flows.service.scv", "exponential service has scv = 1"));
            }
            ServiceSpec { dist: ServiceDist::Exponential, rate: file.rate, scv: 1.0 }
        }
        DistFile::Gamma => ServiceSpec { dist: ServiceDist::Gamma, rate: file.rate, scv: file.scv.unwrap_or(1.0) },
    };
    spec.validate().map_err(|e| invalid("flows.service", e.to_string()))?;
    Ok(spec)
}

fn node_from(n: &NodeFile) -> SatelliteNode {
    SatelliteNode { mu: n.mu, eps: n.eps, theta: n.theta, psi: n.psi, servers: n.servers }
}

impl ScenarioConfig {
    fn from_file(file: ScenarioFile) -> Result<Self, HarnessError> {
        let s = &file.spatial;
        let spatial = SpatialConfig {
            m1: s.m1,
            lambda1: s.lambda1,
            m2: s.m2,
            lambda_p2: s.lambda_p2,
            lambda_c2: s.lambda_c2,
            r_c: s.r_c,
            lambda_a: s.lambda_a,
        };
        let window = Window::square(s.window).map_err(|e| invalid("spatial.window", e.to_string()))?;
        let c = &file.channel;
        let channel = ChannelSettings {
            config: ChannelConfig { alpha: c.alpha, noise: c.noise, theta: db_to_linear(c.theta_db) },
            theta_db: c.theta_db,
            samples: c.samples,
            sources: c.sources,
        };

        let flows = match (&file.flows, file.system) {
            (Some(f), _) => {
                let layout = match (&f.rates, f.count, f.total_rate, f.xi1) {
                    (Some(r), None, None, None) => RateLayout::Explicit(r.clone()),
                    (None, Some(count), Some(total), Some(xi1)) => RateLayout::Split { count, total, xi1 },
                    _ => return Err(invalid("flows", "give either `rates` or all of `count`, `total_rate`, `xi1`")),
                };
                let success = match &f.success_prob {
                    SuccessProbFile::Fixed(p) => SuccessProb::Fixed(*p),
                    SuccessProbFile::Mode(m) if m == "estimated" => SuccessProb::Estimated,
                    SuccessProbFile::Mode(m) => {
                        return Err(invalid("flows.success_prob", format!("expected a probability or \"estimated\", got {m:?}")))
                    }
                };
                let service = service_from(&f.service)?;
                let analytic = f.analytic.unwrap_or(match service.dist {
                    ServiceDist::Exponential => AnalyticModel::Mm11,
                    ServiceDist::Gamma => AnalyticModel::Mg11,
                });
                Some(FlowTemplate { layout, success, service, analytic })
            }
            (None, SystemKind::Multistream) => return Err(invalid("flows", "required for a multistream scenario")),
            (None, SystemKind::Tandem) => None,
        };

        let chain = match (&file.chain, file.system) {
            (Some(ch), _) => {
                let layout = match (&ch.node, &ch.nodes, ch.hops) {
                    (Some(n), None, Some(hops)) => ChainLayout::Uniform { node: node_from(n), hops },
                    (None, Some(list), None) => ChainLayout::Explicit(list.iter().map(node_from).collect()),
                    _ => return Err(invalid("chain", "give either `hops` with [chain.node] or a [[chain.nodes]] list")),
                };
                Some(ChainTemplate { layout, p_a: ch.p_a, xi: ch.xi })
            }
            (None, SystemKind::Tandem) => return Err(invalid("chain", "required for a tandem scenario")),
            (None, SystemKind::Multistream) => None,
        };

        let sweep = Self::sweep_from(&file.sweep, "sweep")?;
        let family = file.family.as_ref().map(|f| Self::sweep_from(f, "family")).transpose()?;

        let cfg = Self {
            name: file.name.unwrap_or_else(|| "scenario".to_string()),
            system: file.system,
            spatial,
            window,
            channel,
            flows,
            chain,
            sweep,
            family,
            replications: file.replications.unwrap_or(20),
            horizon: file.horizon.unwrap_or(1e5),
            root_seed: file.root_seed.unwrap_or(0),
            tolerance: file.tolerance.unwrap_or(DEFAULT_TOLERANCE),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn sweep_from(file: &SweepFile, section: &str) -> Result<Sweep, HarnessError> {
        let param = Param::parse(&file.parameter).ok_or_else(|| {
            let known: Vec<&str> = PARAMS.iter().map(|(p, _)| *p).collect();
            invalid(&format!("{section}.parameter"), format!("unknown parameter {:?}; known: {}", file.parameter, known.join(", ")))
        })?;
        if file.values.is_empty() {
            return Err(invalid(&format!("{section}.values"), "must not be empty"));
        }
        Ok(Sweep { param, values: file.values.clone() })
    }

    /// Checks the base config and every sweep/family point against the type
    /// invariants. Stability is a per-row outcome and is not checked here.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.replications == 0 {
            return Err(invalid("replications", "must be >= 1"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid("horizon", "must be positive"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(invalid("tolerance", "must be >= 0"));
        }
        for (label, sweep) in std::iter::once(("sweep", &self.sweep)).chain(self.family.iter().map(|f| ("family", f))) {
            let relevant = match sweep.param {
                Param::FlowsXi1 | Param::FlowsTotalRate | Param::FlowsSuccessProb | Param::ServiceRate | Param::ServiceScv => {
                    self.flows.is_some()
                }
                Param::ChainXi | Param::ChainPa | Param::ChainHops | Param::NodeMu | Param::NodeEps | Param::NodeTheta | Param::NodePsi => {
                    self.chain.is_some()
                }
                _ => true,
            };
            if !relevant {
                return Err(invalid(&format!("{label}.parameter"), format!("{} does not apply to this system", sweep.param)));
            }
        }
        let family_values = self.family.as_ref().map(|f| f.values.clone()).unwrap_or_else(|| vec![f64::NAN]);
        for &fv in &family_values {
            let base = match &self.family {
                Some(f) => self.with(f.param, fv).map_err(|e| e.within("family"))?,
                None => self.clone(),
            };
            base.validate_point().map_err(|e| e.within("family"))?;
            for &sv in &self.sweep.values {
                base.with(self.sweep.param, sv)
                    .and_then(|p| p.validate_point())
                    .map_err(|e| e.within("sweep"))?;
            }
        }
        Ok(())
    }

    fn validate_point(&self) -> Result<(), HarnessError> {
        self.spatial.validate().map_err(|e| invalid("spatial", e.to_string()))?;
        self.channel.config.validate().map_err(|e| invalid("channel", e.to_string()))?;
        if self.channel.samples == 0 || self.channel.sources == 0 {
            return Err(invalid("channel", "samples and sources must be >= 1"));
        }
        if let Some(f) = &self.flows {
            if let RateLayout::Split { count, total, xi1 } = f.layout {
                if count < 2 {
                    return Err(invalid("flows.count", "split layout needs at least 2 flows"));
                }
                if !(xi1 > 0.0 && xi1 < total) {
                    return Err(invalid("flows.xi1", format!("{xi1} must lie in (0, total_rate = {total})")));
                }
            }
            let p = match f.success {
                SuccessProb::Fixed(p) => p,
                SuccessProb::Estimated => 0.5,
            };
            FlowSet { rates: f.layout.rates(), p_success: p, service: f.service }
                .validate()
                .map_err(|e| invalid("flows", e.to_string()))?;
        }
        if let Some(c) = &self.chain {
            c.chain().validate().map_err(|e| invalid("chain", e.to_string()))?;
            if !(c.xi > 0.0 && c.xi.is_finite()) {
                return Err(invalid("chain.xi", "must be positive"));
            }
        }
        Ok(())
    }

    /// Copy of the config with one parameter replaced.
    pub fn with(&self, param: Param, value: f64) -> Result<Self, HarnessError> {
        let mut c = self.clone();
        let field = param.path();
        fn flows<'a>(c: &'a mut ScenarioConfig, field: &str) -> Result<&'a mut FlowTemplate, HarnessError> {
            c.flows.as_mut().ok_or_else(|| invalid(field, "no [flows] section"))
        }
        fn chain<'a>(c: &'a mut ScenarioConfig, field: &str) -> Result<&'a mut ChainTemplate, HarnessError> {
            c.chain.as_mut().ok_or_else(|| invalid(field, "no [chain] section"))
        }
        match param {
            Param::FlowsXi1 | Param::FlowsTotalRate => match &mut flows(&mut c, field)?.layout {
                RateLayout::Split { xi1, total, .. } => {
                    *(if param == Param::FlowsXi1 { xi1 } else { total }) = value;
                }
                RateLayout::Explicit(_) => return Err(invalid(field, "needs the count/total_rate/xi1 layout")),
            },
            Param::FlowsSuccessProb => flows(&mut c, field)?.success = SuccessProb::Fixed(value),
            Param::ServiceRate => flows(&mut c, field)?.service.rate = value,
            Param::ServiceScv => {
                let s = &mut flows(&mut c, field)?.service;
                if s.dist == ServiceDist::Exponential && value != 1.0 {
                    return Err(invalid(field, "exponential service has scv = 1; use dist = \"gamma\""));
                }
                s.scv = value;
            }
            Param::SpatialLambda1 => c.spatial.lambda1 = value,
            Param::SpatialLambdaP2 => c.spatial.lambda_p2 = value,
            Param::SpatialLambdaC2 => c.spatial.lambda_c2 = value,
            Param::SpatialLambdaA => c.spatial.lambda_a = value,
            Param::ChannelThetaDb => {
                c.channel.theta_db = value;
                c.channel.config.theta = db_to_linear(value);
            }
            Param::ChannelNoise => c.channel.config.noise = value,
            Param::ChainXi => chain(&mut c, field)?.xi = value,
            Param::ChainPa => chain(&mut c, field)?.p_a = value,
            Param::ChainHops => match &mut chain(&mut c, field)?.layout {
                ChainLayout::Uniform { hops, .. } => {
                    if !(value >= 1.0 && value.fract() == 0.0) {
                        return Err(invalid(field, format!("{value} is not a positive integer")));
                    }
                    *hops = value as usize;
                }
                ChainLayout::Explicit(_) => return Err(invalid(field, "needs the hops + [chain.node] layout")),
            },
            Param::NodeMu | Param::NodeEps | Param::NodeTheta | Param::NodePsi => {
                let set = |n: &mut SatelliteNode| match param {
                    Param::NodeMu => n.mu = value,
                    Param::NodeEps => n.eps = value,
                    Param::NodeTheta => n.theta = value,
                    _ => n.psi = value,
                };
                match &mut chain(&mut c, field)?.layout {
                    ChainLayout::Uniform { node, .. } => set(node),
                    ChainLayout::Explicit(nodes) => nodes.iter_mut().for_each(set),
                }
            }
        }
        Ok(c)
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str, origin: &str) -> Result<ScenarioConfig, HarnessError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| HarnessError::Parse {
        path: origin.to_string(),
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    ScenarioConfig::from_file(file)
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Parse {
        path: path.display().to_string(),
        line: None,
        message: e.to_string(),
    })?;
    parse_scenario(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
system = "multistream"
[flows]
count = 3
total_rate = 3.0
xi1 = 1.0
success_prob = 0.8
[flows.service]
dist = "exponential"
rate = 4.0
[sweep]
parameter = "flows.xi1"
values = [0.5, 1.0]
"#;

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = parse_scenario(MINIMAL, "inline").unwrap();
        assert_eq!(cfg.replications, 20);
        assert_eq!(cfg.horizon, 1e5);
        assert_eq!(cfg.spatial.lambda_c2, 0.015);
        assert_eq!(cfg.spatial.r_c, 5.0);
        assert_eq!(cfg.window.area(), 40_000.0);
        let f = cfg.flows.as_ref().unwrap();
        assert_eq!(f.analytic, AnalyticModel::Mm11);
        assert_eq!(f.layout.rates(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn split_layout_keeps_total() {
        let layout = RateLayout::Split { count: 3, total: 3.0, xi1: 0.3 };
        let r = layout.rates();
        assert_eq!(r.len(), 3);
        assert!((r.iter().sum::<f64>() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bad_mixture_is_a_validation_error() {
        let text = format!("{MINIMAL}\n[spatial]\nm1 = 0.6\nm2 = 0.6\n");
        match parse_scenario(&text, "inline") {
            Err(HarnessError::Validation { field, .. }) => assert!(field.contains("spatial"), "{field}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = "system = \"multistream\"\n[flows\n";
        match parse_scenario(text, "inline") {
            Err(HarnessError::Parse { line: Some(2), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_a_parse_error() {
        let text = MINIMAL.replace("rate = 4.0", "rate = 4.0\nspeed = 2");
        assert!(matches!(parse_scenario(&text, "inline"), Err(HarnessError::Parse { .. })));
    }

    #[test]
    fn missing_file_is_a_parse_error() {
        assert!(matches!(load_scenario(Path::new("/nonexistent/x.scenario")), Err(HarnessError::Parse { .. })));
    }

    #[test]
    fn invalid_sweep_values_are_rejected() {
        let text = MINIMAL.replace("values = [0.5, 1.0]", "values = [0.5, 3.5]");
        assert!(matches!(parse_scenario(&text, "inline"), Err(HarnessError::Validation { .. })));
        let text = MINIMAL.replace("values = [0.5, 1.0]", "values = []");
        assert!(matches!(parse_scenario(&text, "inline"), Err(HarnessError::Validation { .. })));
        let text = MINIMAL.replace("\"flows.xi1\"", "\"flows.bogus\"");
        assert!(matches!(parse_scenario(&text, "inline"), Err(HarnessError::Validation { .. })));
        let text = MINIMAL.replace("\"flows.xi1\"", "\"chain.xi\"");
        assert!(matches!(parse_scenario(&text, "inline"), Err(HarnessError::Validation { .. })));
    }

    #[test]
    fn params_roundtrip_through_paths() {
        for (path, p) in PARAMS {
            assert_eq!(Param::parse(path), Some(*p));
            assert_eq!(p.path(), *path);
        }
    }

    #[test]
    fn with_updates_theta_in_linear_units() {
        let cfg = parse_scenario(MINIMAL, "inline").unwrap();
        let c = cfg.with(Param::ChannelThetaDb, 10.0).unwrap();
        assert!((c.channel.config.theta - 10.0).abs() < 1e-12);
    }
}
