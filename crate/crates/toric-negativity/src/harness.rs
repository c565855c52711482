//! Configuration sweeps: run the oracle and the closed forms side by side and
//! emit comparison reports.

use crate::closedform::{classify, predict_log_negativity, predict_long_range_term, predict_schmidt, ClassifyError, SettingClass};
use crate::entanglement::{
    check_classical_structure, log_negativity_from_state, mutual_information, reduce_state, renyi_from,
    EntanglementError, OracleCaps, OracleMethod, DENSE_CAP,
};
use crate::groundstate::{
    generic_state_with, psi0_with, schmidt_spectrum, Convention, Flux, FluxCoefficients, GroundStateError, StateVector,
    DEFAULT_MAX_QUBITS,
};
use crate::kernels::Exec;
use crate::lattice::{Lattice, LatticeError, Region, Topology};
use crate::linalg::C64;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// Default absolute tolerance on E_N and entropies.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unsupported schema version {0}, expected {SCHEMA_VERSION}")]
    SchemaVersion(u32),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("setting ({setting}) needs Lx ≥ {need} on a torus, got {lattice}")]
    TooSmall { setting: String, need: usize, lattice: String },
    #[error("unknown setting id {0:?}")]
    UnknownSetting(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    GroundState(#[from] GroundStateError),
    #[error(transparent)]
    Entanglement(#[from] EntanglementError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub topology: Topology,
    #[serde(rename = "Lx")]
    pub lx: usize,
    #[serde(rename = "Ly")]
    pub ly: usize,
}

impl LatticeSpec {
    pub fn torus(lx: usize, ly: usize) -> Self {
        LatticeSpec { topology: Topology::Torus, lx, ly }
    }

    pub fn build(&self) -> Result<Lattice, LatticeError> {
        Lattice::build(self.topology, self.lx, self.ly)
    }

    pub fn n(&self) -> usize {
        match self.topology {
            Topology::Torus => 2 * self.lx * self.ly,
            Topology::Planar => (self.lx - 1) * self.ly + self.lx * (self.ly - 1),
        }
    }
}

impl std::fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let t = match self.topology {
            Topology::Torus => "torus",
            Topology::Planar => "planar",
        };
        write!(f, "{t}({},{})", self.lx, self.ly)
    }
}

/// A lattice plus named edge regions, the on-disk partition format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionDoc {
    #[serde(flatten)]
    pub lattice: LatticeSpec,
    pub regions: BTreeMap<String, Vec<usize>>,
}

/// Regions A, B and traced C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
    #[serde(rename = "C", default)]
    pub c: Vec<usize>,
}

impl Triple {
    pub fn regions(&self) -> (Region, Region, Region) {
        (Region::new("A", self.a.iter().copied()), Region::new("B", self.b.iter().copied()), Region::new("C", self.c.iter().copied()))
    }

    fn from_regions(a: &Region, b: &Region, c: &Region) -> Self {
        Triple { a: a.iter().collect(), b: b.iter().collect(), c: c.iter().collect() }
    }

    /// Reads A and B from a partition document; C defaults to the complement.
    pub fn from_doc(doc: &PartitionDoc, lat: &Lattice) -> Result<Self, HarnessError> {
        let get = |k: &str| doc.regions.get(k).cloned().ok_or_else(|| HarnessError::Config(format!("region {k} missing")));
        let a = get("A")?;
        let b = get("B")?;
        let c = match doc.regions.get("C") {
            Some(c) => c.clone(),
            None => (0..lat.n()).filter(|e| !a.contains(e) && !b.contains(e)).collect(),
        };
        if let Some(e) = a.iter().chain(&b).chain(&c).find(|&&e| e >= lat.n()) {
            return Err(LatticeError::EdgeOutOfRange { edge: *e, n: lat.n() }.into());
        }
        Ok(Triple { a, b, c })
    }
}

/// Canonical regions for the partition sequence (a)–(g) on a torus.
pub fn generate_setting(lat: &Lattice, id: &str) -> Result<(Region, Region, Region), HarnessError> {
    let need = match id {
        "a" | "c" | "e" | "f" | "g" => 4,
        "b" | "d" => 5,
        _ => return Err(HarnessError::UnknownSetting(id.into())),
    };
    if lat.topology() != Topology::Torus || lat.lx() < need {
        let spec = LatticeSpec { topology: lat.topology(), lx: lat.lx(), ly: lat.ly() };
        return Err(HarnessError::TooSmall { setting: id.into(), need, lattice: spec.to_string() });
    }
    let lx = lat.lx() as isize;
    let cols = |xs: &mut dyn Iterator<Item = isize>| -> Vec<usize> { xs.flat_map(|x| lat.column(x)).collect() };
    let edge = |f: fn(&Lattice, isize, isize) -> Option<usize>, x, y| f(lat, x, y).expect("torus coordinates wrap");
    let (a, c): (Vec<usize>, Vec<usize>) = match id {
        "a" => (cols(&mut (0..2)), vec![]),
        "b" => (cols(&mut (0..2)), vec![edge(Lattice::h, 3, 0), edge(Lattice::v, 3, 0)]),
        "c" => (cols(&mut (0..2)), cols(&mut (lx - 1..lx))),
        "d" => (cols(&mut (0..2)), cols(&mut (3..4))),
        "e" => (cols(&mut (1..2)), cols(&mut (0..1))),
        "f" => (cols(&mut (0..1)), cols(&mut (1..2).chain(3..lx))),
        "g" => (vec![edge(Lattice::h, 0, 0), edge(Lattice::v, 0, 0)], vec![]),
        _ => unreachable!(),
    };
    let b: Vec<usize> = match id {
        "f" => cols(&mut (2..3)),
        "g" => vec![edge(Lattice::h, 2, 0), edge(Lattice::v, 2, 0)],
        _ => (0..lat.n()).filter(|e| !a.contains(e) && !c.contains(e)).collect(),
    };
    let a = Region::new("A", a);
    let b = Region::new("B", b);
    let c = a.union(&b, "AB").complement(lat, "C");
    Ok((a, b, c))
}

/// Ground state to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    /// Stabilized by every loop W^z; also the only choice on a planar patch.
    Psi0,
    Flux(Flux),
    Uniform,
    /// Explicit coefficients `[re, im]` in the order I, e, m, em.
    Coefficients { c: [[f64; 2]; 4] },
    /// `count` Gaussian directions drawn from the config seed.
    Random { count: usize },
}

/// One concrete state after random draws are expanded.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedState {
    pub label: String,
    pub spec: StateSpec,
    pub c: FluxCoefficients,
}

fn coefficients_of(c: &[[f64; 2]; 4]) -> Result<FluxCoefficients, GroundStateError> {
    FluxCoefficients::new(c.map(|[re, im]| C64::new(re, im)))
}

fn to_pairs(c: &FluxCoefficients) -> [[f64; 2]; 4] {
    c.as_array().map(|z| [z.re, z.im])
}

fn psi0_coefficients() -> FluxCoefficients {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    FluxCoefficients::new([C64::new(h, 0.0), C64::default(), C64::new(h, 0.0), C64::default()]).expect("unit norm")
}

/// Expands specs into concrete states, validating every coefficient vector.
pub fn resolve_states(specs: &[StateSpec], seed: u64) -> Result<Vec<ResolvedState>, HarnessError> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for spec in specs {
        match spec {
            StateSpec::Psi0 => out.push(ResolvedState { label: "psi0".into(), spec: spec.clone(), c: psi0_coefficients() }),
            StateSpec::Flux(f) => out.push(ResolvedState { label: format!("flux_{f}"), spec: spec.clone(), c: FluxCoefficients::single(*f) }),
            StateSpec::Uniform => out.push(ResolvedState { label: "uniform".into(), spec: spec.clone(), c: FluxCoefficients::uniform() }),
            StateSpec::Coefficients { c } => {
                let coeffs = coefficients_of(c)?;
                out.push(ResolvedState { label: "c".into(), spec: spec.clone(), c: coeffs });
            }
            StateSpec::Random { count } => {
                for i in 0..*count {
                    let c = FluxCoefficients::random(&mut rng);
                    out.push(ResolvedState {
                        label: format!("random_{i}"),
                        spec: StateSpec::Coefficients { c: to_pairs(&c) },
                        c,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Builds the state vector a resolved state describes.
pub fn build_state(lat: &Lattice, state: &ResolvedState, conv: Convention, cap: usize) -> Result<StateVector, GroundStateError> {
    match state.spec {
        StateSpec::Psi0 => psi0_with(lat, cap, Exec::default()),
        _ => generic_state_with(lat, &state.c, conv, cap, Exec::default()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingSpec {
    pub id: String,
    /// Overrides the config lattice for this setting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    /// Explicit regions; when absent the id names a generated setting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<Triple>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    LogNegativity,
    MutualInformation,
    Renyi,
    Schmidt,
    Classical,
}

fn default_quantities() -> Vec<Quantity> {
    vec![Quantity::LogNegativity]
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_max_qubits() -> usize {
    DEFAULT_MAX_QUBITS
}

fn default_renyi_orders() -> Vec<f64> {
    vec![0.5, 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub schema_version: u32,
    pub name: String,
    pub lattice: LatticeSpec,
    pub settings: Vec<SettingSpec>,
    pub states: Vec<StateSpec>,
    #[serde(default = "default_quantities")]
    pub quantities: Vec<Quantity>,
    #[serde(default = "default_renyi_orders")]
    pub renyi_orders: Vec<f64>,
    #[serde(default)]
    pub convention: Convention,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_qubits")]
    pub max_qubits: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub caps: OracleCaps,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: SweepConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checks everything that can be checked before any state is built.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::SchemaVersion(self.schema_version));
        }
        if !(self.tolerance > 0.0) {
            return Err(HarnessError::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        resolve_states(&self.states, self.seed)?;
        for s in &self.settings {
            let lat = s.lattice.unwrap_or(self.lattice).build()?;
            match &s.regions {
                Some(t) => {
                    if let Some(e) = t.a.iter().chain(&t.b).chain(&t.c).find(|&&e| e >= lat.n()) {
                        return Err(LatticeError::EdgeOutOfRange { edge: *e, n: lat.n() }.into());
                    }
                }
                None => {
                    generate_setting(&lat, &s.id)?;
                }
            }
        }
        Ok(())
    }

    /// The bundled partition sequence on torus(4,2); (b) and (d) need a fifth column.
    pub fn settings_sequence() -> Self {
        let wide = Some(LatticeSpec::torus(5, 2));
        let setting = |id: &str| SettingSpec {
            id: id.into(),
            lattice: if id == "b" || id == "d" { wide } else { None },
            regions: None,
        };
        SweepConfig {
            schema_version: SCHEMA_VERSION,
            name: "settings-torus-4x2".into(),
            lattice: LatticeSpec::torus(4, 2),
            settings: ["a", "b", "c", "d", "e", "f", "g"].into_iter().map(setting).collect(),
            states: vec![StateSpec::Coefficients { c: [[0.7, 0.0], [0.0, 0.1], [0.5, 0.0], [-0.3, 0.4]] }],
            quantities: vec![Quantity::LogNegativity, Quantity::MutualInformation, Quantity::Classical],
            renyi_orders: default_renyi_orders(),
            convention: Convention::default(),
            tolerance: DEFAULT_TOLERANCE,
            max_qubits: DEFAULT_MAX_QUBITS,
            seed: 0,
            caps: OracleCaps::default(),
        }
    }
}

/// Whether both engines ran for a row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Compared,
    PredictionOnly { reason: String },
    OracleOnly { reason: String },
}

/// Everything needed to recompute one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowConfig {
    pub lattice: LatticeSpec,
    pub regions: Triple,
    pub state: StateSpec,
    pub convention: Convention,
    pub tolerance: f64,
    pub max_qubits: usize,
    pub caps: OracleCaps,
    pub quantities: Vec<Quantity>,
    pub renyi_orders: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub setting: String,
    pub state: String,
    pub class: Option<SettingClass>,
    /// n^(m) for each A|B boundary component after absorption.
    pub boundary_counts: Vec<usize>,
    /// Traced region closes a loop along the flux direction.
    pub c_winds: Option<bool>,
    pub absorbed_edges: usize,
    pub boundary_term: Option<f64>,
    pub long_range_term: Option<f64>,
    pub predicted: Option<f64>,
    pub oracle: Option<f64>,
    pub method: Option<OracleMethod>,
    pub abs_diff: Option<f64>,
    pub pass: Option<bool>,
    pub status: RowStatus,
    /// Additional oracle quantities by name.
    pub extras: BTreeMap<String, f64>,
    pub config: RowConfig,
}

impl ComparisonRow {
    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }
}

/// Computes one row: classification and prediction, then the oracle if the state fits the cap.
pub fn run_row(setting: &str, label: &str, cfg: &RowConfig) -> Result<ComparisonRow, HarnessError> {
    let lat = cfg.lattice.build()?;
    let (a, b, c) = cfg.regions.regions();
    let coefficients = match &cfg.state {
        StateSpec::Psi0 => psi0_coefficients(),
        StateSpec::Flux(f) => FluxCoefficients::single(*f),
        StateSpec::Uniform => FluxCoefficients::uniform(),
        StateSpec::Coefficients { c } => coefficients_of(c)?,
        StateSpec::Random { .. } => return Err(HarnessError::Config("row states must be resolved".into())),
    };
    let classification = classify(&lat, &a, &b, &c, cfg.convention);
    let mut row = ComparisonRow {
        setting: setting.into(),
        state: label.into(),
        class: None,
        boundary_counts: Vec::new(),
        c_winds: None,
        absorbed_edges: 0,
        boundary_term: None,
        long_range_term: None,
        predicted: None,
        oracle: None,
        method: None,
        abs_diff: None,
        pass: None,
        status: RowStatus::Compared,
        extras: BTreeMap::new(),
        config: cfg.clone(),
    };
    let mut refusal: Option<String> = None;
    match &classification {
        Ok(cl) => {
            row.class = Some(cl.class);
            row.boundary_counts = cl.counts();
            row.c_winds = Some(cl.c_winds);
            row.absorbed_edges = cl.absorbed.iter().map(|x| x.edges.len()).sum();
            row.boundary_term = Some(cl.boundary_term());
            row.long_range_term = Some(if cl.class.has_long_range() { predict_long_range_term(&coefficients) } else { 0.0 });
            row.predicted = predict_log_negativity(cl, Some(&coefficients)).ok();
        }
        Err(e) => refusal = Some(classify_reason(e)),
    }

    if lat.n() > cfg.max_qubits {
        row.status = RowStatus::PredictionOnly {
            reason: format!("{} qubits exceeds the state-vector cap of {}", lat.n(), cfg.max_qubits),
        };
        return Ok(row);
    }
    let resolved = ResolvedState { label: label.into(), spec: cfg.state.clone(), c: coefficients };
    let psi = build_state(&lat, &resolved, cfg.convention, cfg.max_qubits)?;
    match log_negativity_from_state(&psi, &a, &b, cfg.caps) {
        Ok((v, m)) => {
            row.oracle = Some(v);
            row.method = Some(m);
        }
        Err(e) => {
            row.status = RowStatus::PredictionOnly { reason: e.to_string() };
            return Ok(row);
        }
    }
    extras(&mut row, &lat, &psi, &a, &b, &coefficients, cfg)?;
    match (row.predicted, row.oracle) {
        (Some(p), Some(o)) => {
            let d = (p - o).abs();
            row.abs_diff = Some(d);
            row.pass = Some(d <= cfg.tolerance);
        }
        _ => {
            row.status = RowStatus::OracleOnly { reason: refusal.unwrap_or_else(|| "no closed form for this setting".into()) }
        }
    }
    Ok(row)
}

fn classify_reason(e: &ClassifyError) -> String {
    format!("classification refused: {e}")
}

fn extras(
    row: &mut ComparisonRow,
    lat: &Lattice,
    psi: &StateVector,
    a: &Region,
    b: &Region,
    c: &FluxCoefficients,
    cfg: &RowConfig,
) -> Result<(), HarnessError> {
    let ab = a.union(b, "AB");
    for q in &cfg.quantities {
        match q {
            Quantity::LogNegativity => {
                if let Some(v) = row.oracle {
                    row.extras.insert("negativity".into(), (v.exp2() - 1.0) / 2.0);
                }
            }
            Quantity::MutualInformation if ab.len() <= DENSE_CAP => {
                let rho = reduce_state(psi, &ab)?;
                row.extras.insert("mutual_information".into(), mutual_information(&rho, a)?);
            }
            Quantity::Renyi => {
                let s = schmidt_spectrum(psi, a)?;
                for &order in &cfg.renyi_orders {
                    row.extras.insert(format!("renyi_A_{order}"), renyi_from(&s.probabilities, order));
                }
            }
            Quantity::Schmidt if row.class.is_some_and(SettingClass::is_pure) => {
                let cl = classify(lat, a, b, &Region::new("C", cfg.regions.c.iter().copied()), cfg.convention)
                    .expect("classified above");
                let want = predict_schmidt(&cl, Some(c)).expect("pure classes have a Schmidt form");
                let got = schmidt_spectrum(psi, a)?;
                row.extras.insert("schmidt_count".into(), got.len() as f64);
                row.extras.insert("schmidt_count_predicted".into(), want.len() as f64);
                let dev = if got.len() == want.len() {
                    got.probabilities.iter().zip(&want.probabilities).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
                } else {
                    f64::INFINITY
                };
                row.extras.insert("schmidt_max_deviation".into(), dev);
            }
            Quantity::Classical
                if matches!(
                    row.class,
                    Some(SettingClass::NoSharedBoundaryClassical | SettingClass::NoSharedBoundaryProduct)
                ) && ab.len() <= DENSE_CAP =>
            {
                let r = check_classical_structure(lat, a, b, c, cfg.convention, cfg.max_qubits)?;
                row.extras.insert("classical_reconstruction_deviation".into(), r.reconstruction_deviation);
                row.extras.insert("classical_overlap_deviation".into(), r.overlap_deviation);
                row.extras.insert("product_deviation".into(), r.product_deviation);
                row.extras.insert("min_pt_eigenvalue".into(), r.min_pt_eigenvalue);
            }
            _ => {}
        }
    }
    Ok(())
}

/// Machine-checked qualitative statements over the (a)–(g) rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualitativeFlags {
    /// Through (a)–(e) the oracle equals Σ(n^(m) − 1), plus the long-range term where present.
    pub boundary_terms_persist: bool,
    /// The oracle exceeds the boundary terms exactly when C does not wind.
    pub long_range_drops_when_c_winds: bool,
    /// E_N = 0 for (f) and (g).
    pub no_shared_boundary_vanishes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub name: String,
    pub tolerance: f64,
    pub rows: Vec<ComparisonRow>,
    pub flags: Option<QualitativeFlags>,
    pub all_pass: bool,
}

/// Runs every setting against every state in config order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport, HarnessError> {
    cfg.validate()?;
    let states = resolve_states(&cfg.states, cfg.seed)?;
    let mut rows = Vec::new();
    for s in &cfg.settings {
        let spec = s.lattice.unwrap_or(cfg.lattice);
        let lat = spec.build()?;
        let regions = match &s.regions {
            Some(t) => t.clone(),
            None => {
                let (a, b, c) = generate_setting(&lat, &s.id)?;
                Triple::from_regions(&a, &b, &c)
            }
        };
        for st in &states {
            let rc = RowConfig {
                lattice: spec,
                regions: regions.clone(),
                state: st.spec.clone(),
                convention: cfg.convention,
                tolerance: cfg.tolerance,
                max_qubits: cfg.max_qubits,
                caps: cfg.caps,
                quantities: cfg.quantities.clone(),
                renyi_orders: cfg.renyi_orders.clone(),
            };
            rows.push(run_row(&s.id, &st.label, &rc)?);
        }
    }
    let flags = qualitative_flags(&rows, cfg.tolerance);
    let all_pass = !rows.iter().any(ComparisonRow::failed) && flags.as_ref().is_none_or(QualitativeFlags::all);
    Ok(SweepReport { schema_version: SCHEMA_VERSION, name: cfg.name.clone(), tolerance: cfg.tolerance, rows, flags, all_pass })
}

impl QualitativeFlags {
    pub fn all(&self) -> bool {
        self.boundary_terms_persist && self.long_range_drops_when_c_winds && self.no_shared_boundary_vanishes
    }
}

/// Evaluates the flags when rows for all of (a)–(g) are present with oracle values.
pub fn qualitative_flags(rows: &[ComparisonRow], tol: f64) -> Option<QualitativeFlags> {
    let ids = ["a", "b", "c", "d", "e", "f", "g"];
    let picked: Vec<&ComparisonRow> = rows.iter().filter(|r| ids.contains(&r.setting.as_str())).collect();
    if ids.iter().any(|id| !picked.iter().any(|r| r.setting == *id)) || picked.iter().any(|r| r.oracle.is_none()) {
        return None;
    }
    let early: Vec<&&ComparisonRow> = picked.iter().filter(|r| "abcde".contains(r.setting.as_str())).collect();
    let late: Vec<&&ComparisonRow> = picked.iter().filter(|r| "fg".contains(r.setting.as_str())).collect();
    let boundary_terms_persist = early.iter().all(|r| {
        let (Some(o), Some(bt), Some(lr)) = (r.oracle, r.boundary_term, r.long_range_term) else { return false };
        bt > 0.0 && (o - bt - lr).abs() <= tol
    });
    let long_range_drops_when_c_winds = early.iter().all(|r| {
        let (Some(o), Some(bt), Some(w)) = (r.oracle, r.boundary_term, r.c_winds) else { return false };
        let has_long = o - bt > tol;
        let c_nonempty = !r.config.regions.c.is_empty() && r.absorbed_edges < r.config.regions.c.len();
        has_long == !(c_nonempty && w)
    });
    let no_shared_boundary_vanishes = late.iter().all(|r| r.oracle.is_some_and(|o| o.abs() <= tol));
    Some(QualitativeFlags { boundary_terms_persist, long_range_drops_when_c_winds, no_shared_boundary_vanishes })
}

/// Twelve significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// One CSV line per row, fixed column order and float formatting.
pub fn write_csv<W: std::io::Write>(report: &SweepReport, w: W) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "setting", "state", "lattice", "class", "boundary_counts", "c_winds", "absorbed_edges", "boundary_term",
        "long_range_term", "predicted", "oracle", "method", "abs_diff", "pass", "status", "extras",
    ])?;
    for r in &report.rows {
        let status = match &r.status {
            RowStatus::Compared => "compared".to_string(),
            RowStatus::PredictionOnly { reason } => format!("prediction_only: {reason}"),
            RowStatus::OracleOnly { reason } => format!("oracle_only: {reason}"),
        };
        let extras: Vec<String> = r.extras.iter().map(|(k, v)| format!("{k}={}", fmt_float(*v))).collect();
        out.write_record([
            r.setting.clone(),
            r.state.clone(),
            r.config.lattice.to_string(),
            r.class.map(|c| serde_json::to_value(c).expect("enum").as_str().unwrap_or_default().to_string()).unwrap_or_default(),
            r.boundary_counts.iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
            r.c_winds.map(|b| b.to_string()).unwrap_or_default(),
            r.absorbed_edges.to_string(),
            opt(r.boundary_term),
            opt(r.long_range_term),
            opt(r.predicted),
            opt(r.oracle),
            r.method.map(|m| serde_json::to_value(m).expect("enum").as_str().unwrap_or_default().to_string()).unwrap_or_default(),
            opt(r.abs_diff),
            r.pass.map(|b| b.to_string()).unwrap_or_default(),
            status,
            extras.join(" "),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `report.json` and `report.csv` into `dir`.
pub fn write_report(report: &SweepReport, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)? + "\n")?;
    write_csv(report, std::fs::File::create(dir.join("report.csv"))?)
}

/// Recomputes a row from its embedded config.
pub fn rerun_row(row: &ComparisonRow) -> Result<ComparisonRow, HarnessError> {
    run_row(&row.setting, &row.state, &row.config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_settings_classify_as_intended() {
        let small = Lattice::build_torus(4, 2).unwrap();
        let wide = Lattice::build_torus(5, 2).unwrap();
        let expect = [
            ("a", &small, SettingClass::PureNonContractible),
            ("b", &wide, SettingClass::PureNonContractible),
            ("c", &small, SettingClass::TraceOneSide),
            ("d", &wide, SettingClass::TraceSplit),
            ("e", &small, SettingClass::TraceOneSide),
            ("f", &small, SettingClass::NoSharedBoundaryClassical),
            ("g", &small, SettingClass::NoSharedBoundaryProduct),
        ];
        for (id, lat, class) in expect {
            let (a, b, c) = generate_setting(lat, id).unwrap();
            assert_eq!(classify(lat, &a, &b, &c, Convention::default()).unwrap().class, class, "setting {id}");
        }
        assert!(matches!(generate_setting(&small, "b"), Err(HarnessError::TooSmall { .. })));
        assert!(matches!(generate_setting(&small, "z"), Err(HarnessError::UnknownSetting(_))));
    }

    #[test]
    fn config_validation() {
        let mut cfg = SweepConfig::settings_sequence();
        cfg.states = vec![StateSpec::Coefficients { c: [[1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 0.0]] }];
        assert!(matches!(cfg.validate(), Err(HarnessError::GroundState(GroundStateError::Unnormalized(_)))));
        let mut cfg = SweepConfig::settings_sequence();
        cfg.schema_version = 99;
        assert!(matches!(cfg.validate(), Err(HarnessError::SchemaVersion(99))));
        let text = serde_json::to_string(&SweepConfig::settings_sequence()).unwrap();
        assert_eq!(SweepConfig::from_json(&text).unwrap(), SweepConfig::settings_sequence());
    }

    #[test]
    fn oversized_lattice_gives_prediction_only_rows() {
        let cfg = SweepConfig {
            lattice: LatticeSpec::torus(5, 3),
            settings: vec![SettingSpec { id: "a".into(), lattice: None, regions: None }],
            states: vec![StateSpec::Uniform],
            max_qubits: 20,
            ..SweepConfig::settings_sequence()
        };
        let report = run_sweep(&cfg).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert!(matches!(row.status, RowStatus::PredictionOnly { .. }));
        assert_eq!(row.predicted, Some(2.0 + 2.0 + 2.0));
        assert_eq!(row.pass, None);
        assert!(report.all_pass);
    }

    #[test]
    fn bundled_config_matches_builtin() {
        let text = include_str!("../configs/settings-torus-4x2.json");
        assert_eq!(SweepConfig::from_json(text).unwrap(), SweepConfig::settings_sequence());
    }

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(2.0), "2.00000000000e0");
        assert_eq!(fmt_float(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_float(-0.0), "0.00000000000e0");
    }
}
