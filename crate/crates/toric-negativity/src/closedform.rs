//! Entanglement predicted from lattice combinatorics alone, the setting
//! classifier, and the generic anyon-model calculator.

use crate::groundstate::{Convention, FluxCoefficients, SchmidtSpectrum};
use crate::lattice::{
    boundary_between, is_contractible, validate_two_region_rule, vertex_boundary, Contractibility, Face, Lattice,
    LatticeError, PairBoundary, Partition, Region, Violation, Winding,
};
use crate::pauli::{Direction, Gf2Matrix};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("region {0} is empty")]
    EmptyRegion(String),
    #[error(transparent)]
    Partition(#[from] LatticeError),
    #[error("stabilizers act on three or more regions: {0:?}")]
    TwoRegionRule(Vec<Violation>),
    #[error("configuration outside the supported settings: {0}")]
    Unsupported(String),
    #[error("boundary of {side} is irregular: independent boundary rank {rank}, expected {expected}")]
    Irregular { side: String, rank: usize, expected: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictError {
    #[error("setting {0:?} needs flux coefficients")]
    MissingCoefficients(SettingClass),
    #[error("no closed-form Schmidt spectrum for setting {0:?}")]
    NoSchmidtForm(SettingClass),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingClass {
    /// C empty, A or B contractible.
    PureContractible,
    /// Contractible cut after tracing bulk pieces of A and B.
    RefinedContractible,
    /// C empty, A and B annuli along the loop direction sharing two boundaries.
    PureNonContractible,
    /// C an annulus along the loop direction; A and B share one boundary.
    TraceOneSide,
    /// C an annulus along the loop direction; A and B still share two or more boundaries.
    TraceSplit,
    /// A and B share no boundary, neither is an annulus pair or contractible.
    TraceBothSides,
    /// A and B share no boundary and are both annuli along the loop direction.
    NoSharedBoundaryClassical,
    /// A and B share no boundary and one of them is contractible.
    NoSharedBoundaryProduct,
}

impl SettingClass {
    pub fn is_pure(self) -> bool {
        matches!(self, SettingClass::PureContractible | SettingClass::PureNonContractible)
    }

    /// Whether the long-range term survives.
    pub fn has_long_range(self) -> bool {
        self == SettingClass::PureNonContractible
    }
}

/// A traced component folded into the region whose bulk it sits in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absorption {
    pub edges: Vec<usize>,
    pub into: String,
}

/// Independent boundary-plaquette count seen from each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regularity {
    pub a_rank: usize,
    pub b_rank: usize,
    pub expected: usize,
}

impl Regularity {
    pub fn holds(&self) -> bool {
        self.a_rank == self.expected && self.b_rank == self.expected
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: SettingClass,
    /// Effective regions after absorbing bulk traces.
    pub a: Region,
    pub b: Region,
    pub c: Region,
    pub absorbed: Vec<Absorption>,
    /// A|B boundary of the effective regions.
    pub boundary: PairBoundary,
    pub a_shape: Contractibility,
    pub b_shape: Contractibility,
    pub c_shape: Option<Contractibility>,
    /// C closes a loop along the loop direction in both the direct and dual sense.
    pub c_winds: bool,
    /// Boundary plaquette counts between C and A, and C and B.
    pub traced_boundaries: (Vec<usize>, Vec<usize>),
    pub regularity: Regularity,
}

impl Classification {
    /// n^(m) for each A|B boundary component.
    pub fn counts(&self) -> Vec<usize> {
        self.boundary.counts()
    }

    /// Σ_m (n^(m) − 1).
    pub fn boundary_term(&self) -> f64 {
        self.counts().iter().map(|&n| n as f64 - 1.0).sum()
    }
}

fn winds(w: &Winding, d: Direction) -> bool {
    match d {
        Direction::Vertical => w.vertical,
        Direction::Horizontal => w.horizontal,
    }
}

/// Winds along `d` in both senses and in no other class.
fn annulus_along(c: &Contractibility, d: Direction) -> bool {
    let clean = |w: &Winding| winds(w, d) && !winds(w, d.other()) && !w.diagonal;
    clean(&c.direct) && clean(&c.dual)
}

/// Edge components of `r` under the shares-a-stabilizer relation.
fn stabilizer_components(lat: &Lattice, r: &Region) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..lat.n()).collect();
    fn find(p: &mut [usize], u: usize) -> usize {
        let mut u = u;
        while p[u] != u {
            p[u] = p[p[u]];
            u = p[u];
        }
        u
    }
    let supports = lat
        .vertices()
        .map(|v| lat.star_support(v).to_vec())
        .chain(lat.face_ids().map(|f| lat.plaquette_support(f).to_vec()));
    for s in supports {
        let inside: Vec<usize> = s.into_iter().filter(|&e| r.contains(e)).collect();
        for w in inside.windows(2) {
            let (x, y) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[x] = y;
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for e in r.iter() {
        groups.entry(find(&mut parent, e)).or_default().push(e);
    }
    groups.into_values().collect()
}

/// Regions other than `k`'s own edges met by stabilizers that touch `k`.
fn neighbours(lat: &Lattice, k: &BTreeSet<usize>, regions: &[&Region]) -> BTreeSet<usize> {
    let touching = lat
        .vertices()
        .map(|v| lat.star_support(v))
        .chain(lat.face_ids().map(|f| lat.plaquette_support(f)))
        .filter(|s| s.iter().any(|e| k.contains(e)));
    let mut out = BTreeSet::new();
    for s in touching {
        for &e in s {
            if let Some(i) = regions.iter().position(|r| r.contains(e)) {
                out.insert(i);
            }
        }
    }
    out
}

/// GF(2) rank of the vertex boundaries of `p ∩ side` over the boundary
/// plaquettes: the number of independent boundary plaquettes once cycles
/// inside `side` are factored out.
pub fn boundary_rank(lat: &Lattice, side: &Region, boundary: &PairBoundary) -> usize {
    let mut m = Gf2Matrix::new(lat.num_vertices());
    for f in boundary.faces() {
        let cut = lat.plaquette_support(Face(f)).iter().copied().filter(|&e| side.contains(e));
        m.push(vertex_boundary(lat, cut));
    }
    m.rank()
}

pub fn regularity(lat: &Lattice, a: &Region, b: &Region, boundary: &PairBoundary) -> Regularity {
    Regularity {
        a_rank: boundary_rank(lat, a, boundary),
        b_rank: boundary_rank(lat, b, boundary),
        expected: boundary.total_boundary_plaquettes - boundary.components.len(),
    }
}

/// Places `(A, B, C)` in the closed set of supported settings. Traced components
/// that sit in the bulk of a single region are first folded into it.
pub fn classify(
    lat: &Lattice,
    a: &Region,
    b: &Region,
    c: &Region,
    conv: Convention,
) -> Result<Classification, ClassifyError> {
    for r in [a, b] {
        if r.is_empty() {
            return Err(ClassifyError::EmptyRegion(r.label.clone()));
        }
    }
    let mut parts = vec![Region::new("A", a.iter()), Region::new("B", b.iter())];
    if !c.is_empty() {
        parts.push(Region::new("C", c.iter()));
    }
    let partition = Partition::new(lat, parts)?;
    validate_two_region_rule(lat, &partition).map_err(ClassifyError::TwoRegionRule)?;

    let mut eff_a: BTreeSet<usize> = a.iter().collect();
    let mut eff_b: BTreeSet<usize> = b.iter().collect();
    let mut eff_c = BTreeSet::new();
    let mut absorbed = Vec::new();
    for comp in stabilizer_components(lat, c) {
        let k: BTreeSet<usize> = comp.iter().copied().collect();
        let kr = Region::new("K", comp.iter().copied());
        let near = neighbours(lat, &k, &[a, b]);
        if is_contractible(lat, &kr).fully_contractible() && near.len() == 1 {
            let into = if near.contains(&0) { &mut eff_a } else { &mut eff_b };
            into.extend(&k);
            let label = if near.contains(&0) { "A" } else { "B" };
            absorbed.push(Absorption { edges: comp, into: label.into() });
        } else {
            eff_c.extend(k);
        }
    }
    let (ra, rb, rc) = (Region::new("A", eff_a), Region::new("B", eff_b), Region::new("C", eff_c));
    let boundary = boundary_between(lat, &ra, &rb);
    let a_shape = is_contractible(lat, &ra);
    let b_shape = is_contractible(lat, &rb);
    let c_shape = (!rc.is_empty()).then(|| is_contractible(lat, &rc));
    let d = conv.loop_direction;
    let c_winds = c_shape.as_ref().is_some_and(|s| annulus_along(s, d));
    let n_ab = boundary.total_boundary_plaquettes;
    let components = boundary.components.len();

    let class = if rc.is_empty() {
        if a_shape.fully_contractible() || b_shape.fully_contractible() {
            if absorbed.is_empty() {
                SettingClass::PureContractible
            } else {
                SettingClass::RefinedContractible
            }
        } else if annulus_along(&a_shape, d) && annulus_along(&b_shape, d) && components == 2 {
            SettingClass::PureNonContractible
        } else {
            return Err(ClassifyError::Unsupported(format!(
                "pure cut with non-contractible A and B that are not two annuli along the {d:?} loop direction \
                 sharing two boundaries (A {a_shape:?}, B {b_shape:?}, {components} boundary components)"
            )));
        }
    } else if n_ab == 0 {
        if annulus_along(&a_shape, d) && annulus_along(&b_shape, d) {
            SettingClass::NoSharedBoundaryClassical
        } else if a_shape.fully_contractible() || b_shape.fully_contractible() {
            SettingClass::NoSharedBoundaryProduct
        } else {
            SettingClass::TraceBothSides
        }
    } else if c_winds {
        if components == 1 {
            SettingClass::TraceOneSide
        } else {
            SettingClass::TraceSplit
        }
    } else {
        return Err(ClassifyError::Unsupported(format!(
            "traced region touches the A|B boundary region without winding along the {d:?} loop direction \
             (C {c_shape:?}, n_AB = {n_ab})"
        )));
    };

    let regularity = regularity(lat, &ra, &rb, &boundary);
    for (side, rank) in [("A", regularity.a_rank), ("B", regularity.b_rank)] {
        if rank != regularity.expected {
            return Err(ClassifyError::Irregular { side: side.into(), rank, expected: regularity.expected });
        }
    }
    let traced_boundaries = (boundary_between(lat, &rc, &ra).counts(), boundary_between(lat, &rc, &rb).counts());
    Ok(Classification {
        class,
        a: ra,
        b: rb,
        c: rc,
        absorbed,
        boundary,
        a_shape,
        b_shape,
        c_shape,
        c_winds,
        traced_boundaries,
        regularity,
    })
}

/// E_N^{long} = 2 log₂ Σ|c_i|, checked against S_{1/2}({|c_i|²}).
pub fn predict_long_range_term(c: &FluxCoefficients) -> f64 {
    let direct = 2.0 * c.abs_sum().log2();
    let renyi = 2.0 * c.probabilities().iter().map(|p| p.sqrt()).sum::<f64>().log2();
    assert!((direct - renyi).abs() <= 1e-12, "long-range term mismatch: {direct} vs {renyi}");
    direct
}

/// Predicted E_N(A|B) of ρ_AB.
pub fn predict_log_negativity(cl: &Classification, c: Option<&FluxCoefficients>) -> Result<f64, PredictError> {
    Ok(match cl.class {
        SettingClass::PureContractible
        | SettingClass::RefinedContractible
        | SettingClass::TraceOneSide
        | SettingClass::TraceSplit => cl.boundary_term(),
        SettingClass::PureNonContractible => {
            let c = c.ok_or(PredictError::MissingCoefficients(cl.class))?;
            cl.boundary_term() + predict_long_range_term(c)
        }
        SettingClass::TraceBothSides
        | SettingClass::NoSharedBoundaryClassical
        | SettingClass::NoSharedBoundaryProduct => 0.0,
    })
}

/// Schmidt probabilities across the effective A|B cut: `2^{Σ(n−1)}` copies of
/// each |c_i|² / 2^{Σ(n−1)} (a single flat level for contractible cuts).
pub fn predict_schmidt(cl: &Classification, c: Option<&FluxCoefficients>) -> Result<SchmidtSpectrum, PredictError> {
    let mult = 1usize << cl.counts().iter().map(|n| n - 1).sum::<usize>();
    match cl.class {
        SettingClass::PureContractible | SettingClass::RefinedContractible => Ok(SchmidtSpectrum::flat(mult)),
        SettingClass::PureNonContractible => {
            let c = c.ok_or(PredictError::MissingCoefficients(cl.class))?;
            let mut levels: Vec<f64> = c.probabilities().into_iter().filter(|&p| p > 0.0).collect();
            levels.sort_by(|x, y| y.total_cmp(x));
            let probabilities = levels.iter().flat_map(|&p| std::iter::repeat_n(p / mult as f64, mult)).collect();
            Ok(SchmidtSpectrum { probabilities })
        }
        other => Err(PredictError::NoSchmidtForm(other)),
    }
}

/// Flat-spectrum prediction for a contractible cut given only boundary counts.
pub fn schmidt_from_counts(counts: &[usize]) -> SchmidtSpectrum {
    SchmidtSpectrum::flat(1 << counts.iter().map(|n| n.saturating_sub(1)).sum::<usize>())
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnyonError {
    #[error("anyon model needs at least one anyon type")]
    Empty,
    #[error("quantum dimension {0} is below 1")]
    BadDimension(f64),
    #[error("{probabilities} flux probabilities for {anyons} anyon types")]
    Mismatch { probabilities: usize, anyons: usize },
    #[error("flux probabilities sum to {0}, expected 1")]
    Unnormalized(f64),
    #[error(
        "the half-Rényi split into boundary and long-range terms needs a flux-independent \
         spectrum of the fixed-flux reduced state, which requires an abelian model; quantum dimensions are {0:?}"
    )]
    NonAbelian(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnyonModel {
    pub name: String,
    pub d: Vec<f64>,
}

impl AnyonModel {
    pub fn new(name: impl Into<String>, d: Vec<f64>) -> Result<Self, AnyonError> {
        if d.is_empty() {
            return Err(AnyonError::Empty);
        }
        if let Some(&bad) = d.iter().find(|&&x| !(x >= 1.0)) {
            return Err(AnyonError::BadDimension(bad));
        }
        Ok(AnyonModel { name: name.into(), d })
    }

    /// Four abelian anyons 1, e, m, em.
    pub fn toric_code() -> Self {
        AnyonModel { name: "toric_code".into(), d: vec![1.0; 4] }
    }

    pub fn fibonacci() -> Self {
        AnyonModel { name: "fibonacci".into(), d: vec![1.0, (1.0 + 5f64.sqrt()) / 2.0] }
    }

    pub fn count(&self) -> usize {
        self.d.len()
    }

    /// 𝒟 = √(Σ d_i²).
    pub fn total_dimension(&self) -> f64 {
        self.d.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// γ = log₂ 𝒟.
    pub fn gamma(&self) -> f64 {
        self.total_dimension().log2()
    }

    /// γ_i = log₂(𝒟 / d_i).
    pub fn gamma_i(&self, i: usize) -> f64 {
        (self.total_dimension() / self.d[i]).log2()
    }

    pub fn is_abelian(&self) -> bool {
        self.d.iter().all(|&x| x == 1.0)
    }
}

/// Non-universal area-law constants; the defaults of 1 are arbitrary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaLaw {
    pub a: f64,
    pub a_prime: f64,
}

impl Default for AreaLaw {
    fn default() -> Self {
        AreaLaw { a: 1.0, a_prime: 1.0 }
    }
}

/// Which closed form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnyonQuantity {
    /// S(ρ_A) = Σ_m (a|Γ_m| − γ̄) + S({|c_i|²}).
    Entropy,
    /// Fixed flux i: E_N = Σ_m (a′|Γ_m| − γ_i).
    FixedFluxNegativity(usize),
    /// Generic state: E_N = Σ_m (a′|Γ_m| − γ) + S_{1/2}({|c_i|²}); abelian only.
    RenyiHalf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnyonReport {
    pub model: AnyonModel,
    pub total_dimension: f64,
    pub gamma_bar: f64,
    pub entropy: f64,
    pub fixed_flux_negativity: Vec<f64>,
    /// `None` for non-abelian models, with the reason in `renyi_half_refusal`.
    pub renyi_half_negativity: Option<f64>,
    pub renyi_half_refusal: Option<String>,
}

fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|x| -x * x.log2()).sum()
}

fn check_probabilities(model: &AnyonModel, p: &[f64]) -> Result<(), AnyonError> {
    if p.len() != model.count() {
        return Err(AnyonError::Mismatch { probabilities: p.len(), anyons: model.count() });
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(AnyonError::Unnormalized(total));
    }
    Ok(())
}

/// Evaluates one closed form for boundaries of sizes `boundaries` (|Γ_m|).
pub fn anyon_entropy(
    model: &AnyonModel,
    p: &[f64],
    boundaries: &[f64],
    law: AreaLaw,
    quantity: AnyonQuantity,
) -> Result<f64, AnyonError> {
    check_probabilities(model, p)?;
    Ok(match quantity {
        AnyonQuantity::Entropy => {
            let gamma_bar: f64 = p.iter().enumerate().map(|(i, pi)| pi * model.gamma_i(i)).sum();
            boundaries.iter().map(|g| law.a * g - gamma_bar).sum::<f64>() + shannon(p)
        }
        AnyonQuantity::FixedFluxNegativity(i) => {
            if i >= model.count() {
                return Err(AnyonError::Mismatch { probabilities: i + 1, anyons: model.count() });
            }
            boundaries.iter().map(|g| law.a_prime * g - model.gamma_i(i)).sum()
        }
        AnyonQuantity::RenyiHalf => {
            if !model.is_abelian() {
                return Err(AnyonError::NonAbelian(model.d.clone()));
            }
            let half = 2.0 * p.iter().map(|x| x.sqrt()).sum::<f64>().log2();
            boundaries.iter().map(|g| law.a_prime * g - model.gamma()).sum::<f64>() + half
        }
    })
}

/// All closed forms at once; the half-Rényi form is reported as refused for
/// non-abelian models.
pub fn anyon_report(model: &AnyonModel, p: &[f64], boundaries: &[f64], law: AreaLaw) -> Result<AnyonReport, AnyonError> {
    let entropy = anyon_entropy(model, p, boundaries, law, AnyonQuantity::Entropy)?;
    let fixed_flux_negativity = (0..model.count())
        .map(|i| anyon_entropy(model, p, boundaries, law, AnyonQuantity::FixedFluxNegativity(i)))
        .collect::<Result<_, _>>()?;
    let (renyi_half_negativity, renyi_half_refusal) =
        match anyon_entropy(model, p, boundaries, law, AnyonQuantity::RenyiHalf) {
            Ok(v) => (Some(v), None),
            Err(e @ AnyonError::NonAbelian(_)) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
    Ok(AnyonReport {
        model: model.clone(),
        total_dimension: model.total_dimension(),
        gamma_bar: p.iter().enumerate().map(|(i, pi)| pi * model.gamma_i(i)).sum(),
        entropy,
        fixed_flux_negativity,
        renyi_half_negativity,
        renyi_half_refusal,
    })
}
