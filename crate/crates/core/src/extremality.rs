//! Extreme points of the sets of channels and of entanglement-breaking
//! channels: the Kraus-product independence test, structural classes, and
//! the tetrahedron and trine builtins with their verification.

use std::fmt;

use crate::channels::{
    choi_of, holevo_from_rank1_kraus, kraus_from_choi, Channel, HolevoChannel, KrausChannel,
    QuantumChannel,
};
use crate::ebt::{classify, EbtVerdict};
use crate::error::{Error, Result};
use crate::linalg::{
    basis_vector, hermitian_eig, inner, real, real_vector, singular_values, ComplexMatrix,
    ComplexVector,
};
use crate::states::{DensityMatrix, PureState};

/// `tau = INDEPENDENCE_RTOL * sigma_max` separates independent from dependent.
pub const INDEPENDENCE_RTOL: f64 = 1e-8;
/// Relative eigenvalue bound for "rank one" and absolute bound for orthogonality.
pub const STRUCTURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CptExtreme {
    Yes,
    No,
    /// Smallest singular value within a factor ten below the threshold.
    Marginal,
}

impl fmt::Display for CptExtreme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CptExtreme::Yes => "yes",
            CptExtreme::No => "no",
            CptExtreme::Marginal => "numerically marginal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuralClass {
    Point,
    Cq,
    /// CQ with pure prepared states.
    ExtremeCq,
    Qc,
    BlockProjection,
    General,
}

impl StructuralClass {
    pub fn is_cq(self) -> bool {
        matches!(self, StructuralClass::Cq | StructuralClass::ExtremeCq)
    }
}

impl fmt::Display for StructuralClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StructuralClass::Point => "point",
            StructuralClass::Cq => "CQ",
            StructuralClass::ExtremeCq => "extreme CQ",
            StructuralClass::Qc => "QC",
            StructuralClass::BlockProjection => "block projection",
            StructuralClass::General => "general",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalityReport {
    pub cpt_extreme: CptExtreme,
    pub gram_min_singular_value: f64,
    pub gram_max_singular_value: f64,
    pub threshold: f64,
    /// Number of Kraus operators in the canonical set.
    pub kraus_rank: usize,
    pub structural_class: StructuralClass,
    /// `<psi_j, psi_k>` for extreme CQ channels.
    pub cq_overlap_matrix: Option<ComplexMatrix>,
}

/// Extremality among all channels: the operators `A_j^dagger A_k` of a
/// canonical Kraus set must be linearly independent.
pub fn cpt_extremality(k: &KrausChannel) -> ExtremalityReport {
    let canonical = kraus_from_choi(&choi_of(k)).unwrap_or_else(|_| k.clone());
    let ops = canonical.operators();
    let n = ops.len();
    let d = canonical.dim_in();
    let columns: Vec<ComplexVector> = ops
        .iter()
        .flat_map(|a| ops.iter().map(move |b| (a.adjoint() * b).vectorize()))
        .collect();
    let stacked = ComplexMatrix::from_fn(d * d, columns.len(), |r, c| columns[c][r]);
    let s = singular_values(&stacked);
    let sigma_max = s.first().copied().unwrap_or(0.0);
    let sigma_min = if n * n > d * d {
        0.0
    } else {
        s.last().copied().unwrap_or(0.0)
    };
    let threshold = INDEPENDENCE_RTOL * sigma_max;
    let cpt_extreme = if sigma_min > threshold {
        CptExtreme::Yes
    } else if sigma_min >= threshold / 10.0 {
        CptExtreme::Marginal
    } else {
        CptExtreme::No
    };
    let structure = analyze_structure(&Channel::Kraus(k.clone()));
    ExtremalityReport {
        cpt_extreme,
        gram_min_singular_value: sigma_min,
        gram_max_singular_value: sigma_max,
        threshold,
        kraus_rank: n,
        structural_class: structure.class,
        cq_overlap_matrix: structure.cq_overlaps(),
    }
}

/// Structural class together with the merged Holevo form it was read from.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    pub class: StructuralClass,
    pub holevo: Option<HolevoChannel>,
}

impl Structure {
    fn cq_overlaps(&self) -> Option<ComplexMatrix> {
        if self.class != StructuralClass::ExtremeCq {
            return None;
        }
        let psis: Vec<ComplexVector> = self
            .holevo
            .as_ref()?
            .states()
            .map(|r| top_vector(r.matrix()))
            .collect();
        Some(ComplexMatrix::from_fn(psis.len(), psis.len(), |j, k| {
            inner(&psis[j], &psis[k])
        }))
    }
}

pub fn classify_structure(channel: &Channel) -> StructuralClass {
    analyze_structure(channel).class
}

/// Detects point, CQ, extreme CQ, QC and block-projection channels.
///
/// Kraus and Choi input is read as a Holevo form when all canonical Kraus
/// operators have rank one. Branches preparing the same state, and branches
/// whose rank-one effects are parallel, are merged first so that detection
/// does not depend on how the input was split.
pub fn analyze_structure(channel: &Channel) -> Structure {
    let holevo = match channel {
        Channel::Holevo(h) => Some(h.clone()),
        Channel::Kraus(k) => holevo_from_rank1_kraus(k).ok().or_else(|| {
            kraus_from_choi(&k.choi())
                .ok()
                .and_then(|c| holevo_from_rank1_kraus(&c).ok())
        }),
        Channel::Choi(c) => kraus_from_choi(c)
            .ok()
            .and_then(|k| holevo_from_rank1_kraus(&k).ok()),
    }
    .map(|h| merge_branches(&h));

    if let Some(h) = &holevo {
        if let Some(class) = holevo_class(h) {
            return Structure { class, holevo };
        }
    }
    let kraus = match channel {
        Channel::Kraus(k) => Some(k.clone()),
        _ => channel.to_kraus().ok(),
    };
    if kraus.as_ref().is_some_and(is_block_projection) {
        return Structure {
            class: StructuralClass::BlockProjection,
            holevo,
        };
    }
    Structure {
        class: StructuralClass::General,
        holevo,
    }
}

fn holevo_class(h: &HolevoChannel) -> Option<StructuralClass> {
    let d = h.dim_in();
    let states: Vec<&ComplexMatrix> = h.states().map(DensityMatrix::matrix).collect();
    if states
        .iter()
        .all(|r| r.distance(states[0]) <= STRUCTURE_TOL)
    {
        return Some(StructuralClass::Point);
    }
    let effects: Vec<&ComplexMatrix> = h.effects().collect();
    let effect_dirs: Option<Vec<ComplexVector>> = effects
        .iter()
        .map(|f| {
            rank_one_direction(f)
                .filter(|(w, _)| (w - 1.0).abs() <= STRUCTURE_TOL)
                .map(|(_, v)| v)
        })
        .collect();
    if let Some(dirs) = effect_dirs {
        if dirs.len() == d && pairwise_orthogonal(&dirs) {
            let pure = h.states().all(|r| rank_one_direction(r.matrix()).is_some());
            return Some(if pure {
                StructuralClass::ExtremeCq
            } else {
                StructuralClass::Cq
            });
        }
    }
    let state_dirs: Option<Vec<ComplexVector>> = h
        .states()
        .map(|r| rank_one_direction(r.matrix()).map(|(_, v)| v))
        .collect();
    if let Some(dirs) = state_dirs {
        if pairwise_orthogonal(&dirs) && h.is_trace_preserving() {
            return Some(StructuralClass::Qc);
        }
    }
    None
}

fn is_block_projection(k: &KrausChannel) -> bool {
    let ops = k.operators();
    if k.dim_in() != k.dim_out() {
        return false;
    }
    let projector = |p: &ComplexMatrix| {
        p.hermiticity_deviation() <= STRUCTURE_TOL && (p * p).distance(p) <= STRUCTURE_TOL
    };
    let orthogonal = ops.iter().enumerate().all(|(i, p)| {
        ops[i + 1..]
            .iter()
            .all(|q| (p * q).frobenius_norm() <= STRUCTURE_TOL)
    });
    ops.iter().all(projector) && orthogonal && k.tp_residual() <= STRUCTURE_TOL
}

/// `(eigenvalue, unit eigenvector)` when the second eigenvalue is at most
/// `STRUCTURE_TOL` times the first.
fn rank_one_direction(m: &ComplexMatrix) -> Option<(f64, ComplexVector)> {
    let eig = hermitian_eig(m).ok()?;
    let n = eig.values.len();
    let top = eig.values[n - 1];
    let second = if n > 1 { eig.values[n - 2] } else { 0.0 };
    (top > 0.0 && second <= STRUCTURE_TOL * top).then(|| (top, eig.vector(n - 1)))
}

fn top_vector(m: &ComplexMatrix) -> ComplexVector {
    let eig = hermitian_eig(m).expect("Hermitian");
    eig.vector(eig.values.len() - 1)
}

fn pairwise_orthogonal(vs: &[ComplexVector]) -> bool {
    vs.iter().enumerate().all(|(i, u)| {
        vs[i + 1..]
            .iter()
            .all(|v| inner(u, v).norm() <= STRUCTURE_TOL)
    })
}

/// Merges branches with equal states (effects add) and branches with parallel
/// rank-one effects (states are averaged with the effect weights).
fn merge_branches(h: &HolevoChannel) -> HolevoChannel {
    let mut by_state: Vec<(ComplexMatrix, ComplexMatrix)> = Vec::new();
    for p in h.pairs() {
        match by_state
            .iter_mut()
            .find(|(r, _)| r.distance(p.state.matrix()) <= STRUCTURE_TOL)
        {
            Some((_, f)) => *f = &*f + &p.effect,
            None => by_state.push((p.state.matrix().clone(), p.effect.clone())),
        }
    }
    let mut by_effect: Vec<(ComplexMatrix, ComplexMatrix, Option<ComplexVector>)> = Vec::new();
    for (r, f) in by_state {
        let dir = rank_one_direction(&f).map(|(_, v)| v);
        let slot = dir.as_ref().and_then(|v| {
            by_effect.iter_mut().find(|(_, _, d)| {
                d.as_ref()
                    .is_some_and(|u| (inner(u, v).norm() - 1.0).abs() <= STRUCTURE_TOL)
            })
        });
        match slot {
            Some((rr, ff, _)) => {
                let (wa, wb) = (ff.trace().re, f.trace().re);
                *rr = (rr.scale_real(wa) + r.scale_real(wb)).scale_real(1.0 / (wa + wb));
                *ff = &*ff + &f;
            }
            None => by_effect.push((r, f, dir)),
        }
    }
    let pairs = by_effect
        .into_iter()
        .filter(|(_, f, _)| f.frobenius_norm() > 1e-14)
        .map(|(r, f, _)| {
            (
                DensityMatrix::new(r.hermitian_part()).expect("average of states"),
                f,
            )
        })
        .collect::<Vec<_>>();
    if pairs.is_empty() {
        return h.clone();
    }
    HolevoChannel::new(pairs).unwrap_or_else(|_| h.clone())
}

/// Decomposition `Phi = sum_i w_i Phi_i` into distinct entanglement-breaking channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSplit {
    pub weights: Vec<f64>,
    pub parts: Vec<HolevoChannel>,
    /// Frobenius distance between the Choi matrices of both sides.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EbtExtremeHint {
    Extreme(String),
    NotExtreme(ConvexSplit),
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EbtExtremalityReport {
    pub hint: EbtExtremeHint,
    pub structural_class: StructuralClass,
    pub cpt: ExtremalityReport,
    /// For CPT-extreme channels: whether the channel is also extreme CQ, as
    /// it must be when it is entanglement breaking.
    pub consistency: Option<bool>,
    pub builtin: Option<&'static str>,
}

/// Sufficient conditions for extremality in the set of entanglement-breaking
/// channels. Non-extremality is only claimed with an explicit, verified
/// convex split.
pub fn ebt_extremality_hints(channel: &Channel) -> Result<EbtExtremalityReport> {
    let verdict = classify(channel)?;
    match &verdict {
        EbtVerdict::Ebt { .. } => {}
        EbtVerdict::NotEbt { witness, .. } => return Err(Error::NotEbt(witness.to_string())),
        EbtVerdict::Undecided { reason, .. } => return Err(Error::Undecided(reason.clone())),
    }
    let structure = analyze_structure(channel);
    let cpt = cpt_extremality(&channel.to_kraus()?);
    let builtin = recognize_builtin(channel);
    let pure_point = structure.class == StructuralClass::Point
        && structure
            .holevo
            .as_ref()
            .is_some_and(|h| h.states().all(|r| rank_one_direction(r.matrix()).is_some()));
    // a point channel onto a pure state is also extreme CQ
    let consistency = (cpt.cpt_extreme == CptExtreme::Yes)
        .then_some(structure.class == StructuralClass::ExtremeCq || pure_point);
    let hint = if structure.class == StructuralClass::ExtremeCq {
        EbtExtremeHint::Extreme("extreme CQ channel".into())
    } else if pure_point {
        EbtExtremeHint::Extreme("point channel onto a pure state".into())
    } else if let Some(name) = builtin {
        EbtExtremeHint::Extreme(format!("verified builtin '{name}'"))
    } else if cpt.cpt_extreme == CptExtreme::Yes {
        EbtExtremeHint::Extreme("extreme among all channels".into())
    } else {
        let source = match channel {
            Channel::Holevo(_) => structure.holevo.clone(),
            _ => None,
        };
        match source.and_then(|h| mixed_state_split(&h).ok()) {
            Some(split) => EbtExtremeHint::NotExtreme(split),
            None => EbtExtremeHint::Inconclusive,
        }
    };
    Ok(EbtExtremalityReport {
        hint,
        structural_class: structure.class,
        cpt,
        consistency,
        builtin,
    })
}

/// Splits `Phi` along the eigenvectors of the first mixed prepared state:
/// with `R_k = sum_a r_a |a><a|`, `Phi = sum_a r_a Phi_a` where `Phi_a`
/// prepares `|a><a|` in place of `R_k`.
pub fn mixed_state_split(h: &HolevoChannel) -> Result<ConvexSplit> {
    let (k, eig) = h
        .pairs()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.effect.frobenius_norm() > 1e-12)
        .find_map(|(k, p)| {
            let eig = hermitian_eig(p.state.matrix()).ok()?;
            let n = eig.values.len();
            (n > 1 && eig.values[n - 2] > STRUCTURE_TOL * eig.values[n - 1]).then_some((k, eig))
        })
        .ok_or_else(|| Error::InvalidParameter("all prepared states are pure".into()))?;
    let mut weights = Vec::new();
    let mut parts = Vec::new();
    for (a, &r) in eig.values.iter().enumerate() {
        if r <= 1e-12 {
            continue;
        }
        let pure = DensityMatrix::pure(&PureState::normalized(eig.vector(a))?);
        let pairs = h
            .pairs()
            .iter()
            .enumerate()
            .map(|(j, p)| {
                (
                    if j == k {
                        pure.clone()
                    } else {
                        p.state.clone()
                    },
                    p.effect.clone(),
                )
            })
            .collect();
        weights.push(r);
        parts.push(HolevoChannel::new(pairs)?);
    }
    let d = h.dim_in() * h.dim_out();
    let combined = parts
        .iter()
        .zip(&weights)
        .fold(ComplexMatrix::zeros(d, d), |acc, (p, &w)| {
            acc + p.choi().matrix().scale_real(w)
        });
    let residual = combined.distance(h.choi().matrix());
    if residual > 1e-9 {
        return Err(Error::ReconstructionFailed {
            residual,
            tolerance: 1e-9,
        });
    }
    Ok(ConvexSplit {
        weights,
        parts,
        residual,
    })
}

fn recognize_builtin(channel: &Channel) -> Option<&'static str> {
    let choi = channel.choi();
    let candidates = [
        ("tetrahedron", tetrahedron_channel as fn() -> HolevoChannel),
        ("trine4", trine_block_channel),
    ];
    candidates.into_iter().find_map(|(name, build)| {
        let reference = build();
        (reference.dim_in() == channel.dim_in()
            && reference.dim_out() == channel.dim_out()
            && reference.choi().matrix().distance(choi.matrix()) <= 1e-9)
            .then_some(name)
    })
}

/// The four tetrahedron directions in `R^3`, normalized.
pub fn tetrahedron_vectors() -> [ComplexVector; 4] {
    let s = 1.0 / 3f64.sqrt();
    [
        real_vector(&[s, s, s]),
        real_vector(&[s, -s, -s]),
        real_vector(&[-s, s, -s]),
        real_vector(&[-s, -s, s]),
    ]
}

/// `rho -> sum_i (3/4) |v_i><v_i| Tr(|v_i><v_i| rho)` on `C^3`: entanglement
/// breaking and extreme among such maps, yet neither CQ nor extreme among
/// all channels.
pub fn tetrahedron_channel() -> HolevoChannel {
    HolevoChannel::new(
        tetrahedron_vectors()
            .iter()
            .map(|v| {
                (
                    DensityMatrix::pure(&PureState::new(v.clone()).expect("unit vector")),
                    ComplexMatrix::projector(v).scale_real(0.75),
                )
            })
            .collect(),
    )
    .expect("tetrahedron channel")
}

/// Check of one input `|w_ij>` orthogonal to `v_k` and `v_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct TetrahedronPairCheck {
    pub i: usize,
    pub j: usize,
    pub w: ComplexVector,
    /// `max_{m != i, j} |<w_ij|v_m>|`.
    pub orthogonality: f64,
    /// `|Phi(|w><w|) - (|v_i><v_i| + |v_j><v_j|)/2|_F`.
    pub output_residual: f64,
    pub output_rank: usize,
    pub output_eigenvalues: Vec<f64>,
    /// `<w_kl| Phi(|w_ij><w_ij|) |w_kl>` for the complementary pair.
    pub complementary_overlap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TetrahedronReport {
    /// `|sum_i (3/4)|v_i><v_i| - I|_F`.
    pub povm_residual: f64,
    pub pairs: Vec<TetrahedronPairCheck>,
    pub cpt: ExtremalityReport,
}

impl TetrahedronReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.povm_residual <= tol
            && self.pairs.len() == 6
            && self.pairs.iter().all(|p| {
                p.orthogonality <= tol
                    && p.output_residual <= tol
                    && p.output_rank == 2
                    && p.complementary_overlap <= tol
            })
            && self.cpt.cpt_extreme == CptExtreme::No
    }
}

fn cross(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    real_vector(&[
        a[1].re * b[2].re - a[2].re * b[1].re,
        a[2].re * b[0].re - a[0].re * b[2].re,
        a[0].re * b[1].re - a[1].re * b[0].re,
    ])
}

fn w_vector(v: &[ComplexVector; 4], i: usize, j: usize) -> ComplexVector {
    let rest: Vec<usize> = (0..4).filter(|&m| m != i && m != j).collect();
    let w = cross(&v[rest[0]], &v[rest[1]]);
    let n = w.norm();
    w / real(n)
}

/// Recomputes the observables behind the tetrahedron argument.
pub fn verify_tetrahedron() -> TetrahedronReport {
    let phi = tetrahedron_channel();
    let v = tetrahedron_vectors();
    let povm_residual = phi
        .effects()
        .fold(ComplexMatrix::zeros(3, 3), |acc, f| acc + f)
        .distance(&ComplexMatrix::identity(3));
    let mut pairs = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let rest: Vec<usize> = (0..4).filter(|&m| m != i && m != j).collect();
            let w = w_vector(&v, i, j);
            let orthogonality = rest
                .iter()
                .map(|&m| inner(&w, &v[m]).norm())
                .fold(0.0, f64::max);
            let out = phi.map(&ComplexMatrix::projector(&w)).expect("3x3 input");
            let expected =
                (ComplexMatrix::projector(&v[i]) + ComplexMatrix::projector(&v[j])).scale_real(0.5);
            let eig = hermitian_eig(&out).expect("Hermitian");
            let output_rank = eig.values.iter().filter(|&&x| x > 1e-10).count();
            let w_kl = w_vector(&v, rest[0], rest[1]);
            let complementary_overlap = inner(&w_kl, &out.mul_vec(&w_kl)).re.abs();
            pairs.push(TetrahedronPairCheck {
                i,
                j,
                orthogonality,
                output_residual: out.distance(&expected),
                output_rank,
                output_eigenvalues: eig.values.clone(),
                complementary_overlap,
                w,
            });
        }
    }
    TetrahedronReport {
        povm_residual,
        pairs,
        cpt: cpt_extremality(&crate::channels::kraus_from_holevo(&phi)),
    }
}

/// Quantum-classical channel on `C^4` whose POVM is a trine on
/// `span{g_1, g_2}` plus the projection onto `span{g_3, g_4}`; outcomes are
/// recorded in the standard basis of `C^4`.
pub fn trine_block_channel() -> HolevoChannel {
    let g = |k: usize| basis_vector(4, k);
    let half_root3 = 3f64.sqrt() / 2.0;
    let g_plus = g(0) * real(0.5) + g(1) * real(half_root3);
    let g_minus = g(0) * real(0.5) - g(1) * real(half_root3);
    let effects = [
        ComplexMatrix::projector(&g(0)).scale_real(2.0 / 3.0),
        ComplexMatrix::projector(&g_plus).scale_real(2.0 / 3.0),
        ComplexMatrix::projector(&g_minus).scale_real(2.0 / 3.0),
        ComplexMatrix::projector(&g(2)) + ComplexMatrix::projector(&g(3)),
    ];
    HolevoChannel::new(
        effects
            .into_iter()
            .enumerate()
            .map(|(k, f)| {
                (
                    DensityMatrix::pure(&PureState::new(g(k)).expect("basis vector")),
                    f,
                )
            })
            .collect(),
    )
    .expect("trine block channel")
}
