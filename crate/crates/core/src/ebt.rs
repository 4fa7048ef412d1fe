//! Entanglement-breaking classification: necessary tests on the Choi matrix,
//! the partial-transpose test, constructive separable decompositions and
//! their reduction to at most `d` product terms.

use std::fmt;

use rand::Rng;

use crate::channels::{
    holevo_from_rank1_kraus, holevo_from_separable_choi, Channel, ChoiMatrix, HolevoChannel,
    QuantumChannel,
};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, kron, kron_vec, null_vector, partial_trace, partial_transpose, product_factors,
    psd_inv_sqrt, psd_sqrt, real, relative_rank, BipartiteDims, ComplexMatrix, ComplexVector,
    Factor, C64,
};
use crate::states::{
    ginibre, random_pure_state_with, random_vector, seeded_rng, DensityMatrix, PureState,
};

/// Default tolerance on the smallest partial-transpose eigenvalue.
pub const PPT_TOL: f64 = 1e-10;
/// Relative eigenvalue threshold used for Choi and marginal ranks.
pub const CHOI_RANK_RTOL: f64 = 1e-10;
/// Largest reconstruction residual accepted for a decomposition.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// `|alpha_j| <= ALPHA_RTOL * |alpha|_inf` counts as `alpha_j = 0`.
pub const ALPHA_RTOL: f64 = 1e-9;

/// One weighted product term `p |v><v| (x) |w><w|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTerm {
    pub weight: f64,
    pub left: PureState,
    pub right: PureState,
}

/// Convex combination of pure product states on `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableDecomposition {
    dims: BipartiteDims,
    terms: Vec<ProductTerm>,
}

impl SeparableDecomposition {
    /// Weights must be non-negative and sum to one within 1e-10.
    pub fn new(dims: BipartiteDims, terms: Vec<(f64, PureState, PureState)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("decomposition has no terms".into()));
        }
        let mut total = 0.0;
        let mut out = Vec::with_capacity(terms.len());
        for (i, (weight, left, right)) in terms.into_iter().enumerate() {
            if weight.is_nan() || weight < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "term {i} has weight {weight}"
                )));
            }
            if left.dim() != dims.dim_a || right.dim() != dims.dim_b {
                return Err(Error::DimensionMismatch(format!(
                    "term {i} lives on {}x{}, expected {}x{}",
                    left.dim(),
                    right.dim(),
                    dims.dim_a,
                    dims.dim_b
                )));
            }
            total += weight;
            out.push(ProductTerm {
                weight,
                left,
                right,
            });
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(SeparableDecomposition { dims, terms: out })
    }

    /// Rescales arbitrary non-negative weights to sum to one.
    fn normalized(
        dims: BipartiteDims,
        mut terms: Vec<(f64, PureState, PureState)>,
    ) -> Result<Self> {
        let total: f64 = terms.iter().map(|t| t.0).sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter(
                "decomposition has zero weight".into(),
            ));
        }
        terms.iter_mut().for_each(|t| t.0 /= total);
        Self::new(dims, terms)
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `sum_n p_n |v_n><v_n| (x) |w_n><w_n|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dims.total();
        self.terms
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, t| {
                acc + ComplexMatrix::projector(&kron_vec(t.left.vector(), t.right.vector()))
                    .scale_real(t.weight)
            })
    }

    /// Frobenius distance between the reconstruction and `rho`.
    pub fn residual(&self, rho: &ComplexMatrix) -> f64 {
        self.reconstruct().distance(rho)
    }
}

/// Lowers the number of product terms to at most `dim_a` while keeping the
/// represented state, provided `rank(rho) = rank(rho_A) = dim_a`.
///
/// Each round takes `dim_a` terms with independent left vectors plus one
/// more. Their product vectors are dependent, and the terms entering the
/// dependency share a right vector `nu` up to phase, so their left parts can
/// be re-expanded in fewer pure states.
pub fn reduce_decomposition(dec: &SeparableDecomposition) -> Result<SeparableDecomposition> {
    let dims = dec.dims();
    let d = dims.dim_a;
    if dec.len() <= d {
        return Ok(dec.clone());
    }
    let rho = dec.reconstruct();
    let marginal = partial_trace(&rho, dims, Factor::Second)?;
    let state_rank = relative_rank(&rho, 1e-9);
    let marginal_rank = relative_rank(&marginal, 1e-9);
    if state_rank != d || marginal_rank != d {
        return Err(Error::PreconditionRankMismatch {
            state_rank,
            marginal_rank,
            expected: d,
        });
    }

    let mut terms: Vec<ProductTerm> = dec.terms().to_vec();
    while terms.len() > d {
        let before = terms.len();
        let chosen = independent_left_terms(&terms, d);
        if chosen.len() < d {
            return Err(Error::MergeStall {
                terms: before,
                reason: "left vectors do not span the first factor".into(),
            });
        }
        let extra = (0..terms.len())
            .find(|i| !chosen.contains(i))
            .expect("more than d terms");
        let mut group = chosen;
        group.push(extra);

        let products = ComplexMatrix::from_fn(d * dims.dim_b, group.len(), |r, c| {
            let t = &terms[group[c]];
            t.left.vector()[r / dims.dim_b] * t.right.vector()[r % dims.dim_b]
        });
        let (alpha, _) = null_vector(&products);
        let alpha_max = alpha.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let support: Vec<usize> = (0..group.len())
            .filter(|&j| alpha[j].norm() > ALPHA_RTOL * alpha_max)
            .collect();
        let pivot = support
            .iter()
            .copied()
            .max_by(|&a, &b| alpha[a].norm().total_cmp(&alpha[b].norm()))
            .expect("null vector is nonzero");
        let nu = terms[group[pivot]].right.clone();
        for &j in &support {
            let overlap = crate::linalg::inner(nu.vector(), terms[group[j]].right.vector()).norm();
            if (overlap - 1.0).abs() > 1e-6 {
                return Err(Error::MergeStall {
                    terms: before,
                    reason: format!(
                        "right vectors in the dependency differ (overlap {overlap:.3e})"
                    ),
                });
            }
        }

        let merged = support.iter().fold(ComplexMatrix::zeros(d, d), |acc, &j| {
            let t = &terms[group[j]];
            acc + t.left.projector().scale_real(t.weight)
        });
        let eig = hermitian_eig(&merged)?;
        let top = eig.max();
        let replacement: Vec<ProductTerm> = (0..d)
            .filter(|&k| eig.values[k] > 1e-10 * top)
            .map(|k| ProductTerm {
                weight: eig.values[k],
                left: PureState::normalized(eig.vector(k)).expect("eigenvector"),
                right: nu.clone(),
            })
            .collect();
        if replacement.len() >= support.len() {
            return Err(Error::MergeStall {
                terms: before,
                reason: format!(
                    "{} dependent terms re-expand into {} pure states",
                    support.len(),
                    replacement.len()
                ),
            });
        }
        let removed: Vec<usize> = support.iter().map(|&j| group[j]).collect();
        let mut next: Vec<ProductTerm> = terms
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !removed.contains(i))
            .map(|(_, t)| t)
            .collect();
        next.extend(replacement);
        terms = next;
    }

    let total: f64 = terms.iter().map(|t| t.weight).sum();
    let out = SeparableDecomposition::new(
        dims,
        terms
            .into_iter()
            .map(|t| (t.weight / total, t.left, t.right))
            .collect(),
    )?;
    let residual = out.residual(&rho);
    if residual > RECONSTRUCTION_TOL {
        return Err(Error::ReconstructionFailed {
            residual,
            tolerance: RECONSTRUCTION_TOL,
        });
    }
    Ok(out)
}

/// Greedy pivoted selection of up to `d` terms whose left vectors are linearly
/// independent, taking the largest residual after projection each step.
fn independent_left_terms(terms: &[ProductTerm], d: usize) -> Vec<usize> {
    let mut chosen = Vec::new();
    let mut basis: Vec<ComplexVector> = Vec::new();
    while chosen.len() < d {
        let mut best: Option<(usize, f64, ComplexVector)> = None;
        for (i, t) in terms.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let mut r = t.left.vector().clone();
            for b in &basis {
                let c = crate::linalg::inner(b, &r);
                r -= b * c;
            }
            let norm = r.norm();
            if best.as_ref().is_none_or(|(_, n, _)| norm > *n) {
                best = Some((i, norm, r));
            }
        }
        match best {
            Some((i, norm, r)) if norm > 1e-8 => {
                chosen.push(i);
                basis.push(r / real(norm));
            }
            _ => break,
        }
    }
    chosen
}

/// Random separable state of rank `d` with a rank-`d` left marginal, written
/// with `k >= d` product terms.
///
/// `C^d` is split into random blocks; each block shares one right factor and
/// receives at least as many random left factors as its dimension. A random
/// invertible map on the left keeps ranks while mixing the blocks.
pub fn random_redundant_decomposition<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    k: usize,
) -> Result<SeparableDecomposition> {
    if d == 0 || k < d {
        return Err(Error::InvalidParameter(format!(
            "need k >= d >= 1, got d {d}, k {k}"
        )));
    }
    let blocks = rng.random_range(1..=d);
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, d - 1, blocks - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(d);
    let mut sizes = Vec::with_capacity(blocks);
    let mut start = 0;
    for c in cuts {
        sizes.push((start, c - start));
        start = c;
    }
    let mut counts: Vec<usize> = sizes.iter().map(|&(_, n)| n).collect();
    for _ in d..k {
        counts[rng.random_range(0..blocks)] += 1;
    }
    let mixer = ginibre(rng, d, d);
    let mut terms = Vec::with_capacity(k);
    for (&(offset, n), &count) in sizes.iter().zip(&counts) {
        let right = random_pure_state_with(rng, d);
        for _ in 0..count {
            let local = random_vector(rng, n);
            let embedded = ComplexVector::from_fn(d, |i, _| {
                if i >= offset && i < offset + n {
                    local[i - offset]
                } else {
                    real(0.0)
                }
            });
            let left = PureState::normalized(mixer.mul_vec(&embedded))?;
            terms.push((0.1 + rng.random::<f64>(), left, right.clone()));
        }
    }
    let total: f64 = terms.iter().map(|t| t.0).sum();
    terms.iter_mut().for_each(|t| t.0 /= total);
    SeparableDecomposition::new(BipartiteDims::new(d, d)?, terms)
}

/// `(I (x) T)(choi)` is PSD within `tol`; returns the smallest eigenvalue too.
pub fn is_ppt(choi: &ChoiMatrix, tol: f64) -> (bool, f64) {
    let pt = partial_transpose(choi.matrix(), choi.dims(), Factor::Second).expect("Choi shape");
    let min = hermitian_eig(&pt).expect("Hermitian").min();
    (min >= -tol, min)
}

/// Spectral data of a Choi matrix used by the classifier and reports.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub dim: usize,
    pub choi_rank: usize,
    pub input_marginal_rank: usize,
    pub output_marginal_rank: usize,
    pub max_eigenvalue: f64,
    /// `min(lambda_max(rho_A), lambda_max(rho_B))`.
    pub marginal_max_eigenvalue: f64,
    pub min_pt_eigenvalue: f64,
}

impl Diagnostics {
    pub fn of(choi: &ChoiMatrix) -> Self {
        let a = choi.left_marginal();
        let b = choi.right_marginal();
        let eig = hermitian_eig(choi.matrix()).expect("Hermitian");
        let top = |m: &ComplexMatrix| hermitian_eig(m).expect("Hermitian").max();
        Diagnostics {
            dim: choi.dims().dim_a,
            choi_rank: eig
                .values
                .iter()
                .filter(|&&x| x > CHOI_RANK_RTOL * eig.max())
                .count(),
            input_marginal_rank: relative_rank(&a, CHOI_RANK_RTOL),
            output_marginal_rank: relative_rank(&b, CHOI_RANK_RTOL),
            max_eigenvalue: eig.max(),
            marginal_max_eigenvalue: top(&a).min(top(&b)),
            min_pt_eigenvalue: is_ppt(choi, 0.0).1,
        }
    }
}

/// Necessary condition that failed for a non-entanglement-breaking channel.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Fewer Choi eigenvectors than the rank of a marginal, i.e. fewer Kraus
    /// operators than a separable Choi matrix needs.
    KrausRank {
        choi_rank: usize,
        marginal_rank: usize,
    },
    /// Largest Choi eigenvalue above the largest eigenvalue of a marginal.
    MaxEigenvalue { choi_max: f64, marginal_max: f64 },
    /// Negative eigenvalue of the partial transpose.
    PartialTranspose { min_eigenvalue: f64 },
}

impl Witness {
    pub fn test_name(&self) -> &'static str {
        match self {
            Witness::KrausRank { .. } => "Kraus-rank test",
            Witness::MaxEigenvalue { .. } => "maximal-eigenvalue test",
            Witness::PartialTranspose { .. } => "partial-transpose test",
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::KrausRank { choi_rank, marginal_rank } => write!(
                f,
                "{}: Choi rank {choi_rank} < marginal rank {marginal_rank}",
                self.test_name()
            ),
            Witness::MaxEigenvalue { choi_max, marginal_max } => write!(
                f,
                "{}: largest Choi eigenvalue {choi_max:.6} exceeds marginal bound {marginal_max:.6}",
                self.test_name()
            ),
            Witness::PartialTranspose { min_eigenvalue } => write!(
                f,
                "{}: partial transpose has eigenvalue {min_eigenvalue:.6e}",
                self.test_name()
            ),
        }
    }
}

/// Rank and largest-eigenvalue tests. A separable state has rank at least
/// that of either marginal and no eigenvalue above the marginals' largest.
pub fn kraus_count_test(choi: &ChoiMatrix) -> Option<Witness> {
    let diag = Diagnostics::of(choi);
    let marginal_rank = diag.input_marginal_rank.max(diag.output_marginal_rank);
    if diag.choi_rank < marginal_rank {
        return Some(Witness::KrausRank {
            choi_rank: diag.choi_rank,
            marginal_rank,
        });
    }
    max_eigenvalue_witness(&diag)
}

fn max_eigenvalue_witness(diag: &Diagnostics) -> Option<Witness> {
    let bound = diag.marginal_max_eigenvalue;
    (diag.max_eigenvalue > bound + 1e-9 * bound.max(1e-3)).then_some(Witness::MaxEigenvalue {
        choi_max: diag.max_eigenvalue,
        marginal_max: bound,
    })
}

/// How an entanglement-breaking certificate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateSource {
    /// Refinement of a Holevo form supplied as input.
    HolevoInput,
    /// Rank-one Kraus operators read as a Holevo form.
    RankOneKraus,
    /// Zero-concurrence product decomposition of a two-qubit Choi matrix.
    QubitDecomposition,
    /// Block decomposition of a PPT Choi matrix whose rank equals `d`.
    RankDDecomposition,
}

impl fmt::Display for CertificateSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertificateSource::HolevoInput => "Holevo form of the input",
            CertificateSource::RankOneKraus => "rank-one Kraus operators",
            CertificateSource::QubitDecomposition => {
                "two-qubit product decomposition of the PPT Choi matrix"
            }
            CertificateSource::RankDDecomposition => {
                "product decomposition of the rank-d PPT Choi matrix"
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EbtCertificate {
    /// Measure-and-prepare form with rank-one states and effects.
    pub holevo: HolevoChannel,
    pub decomposition: Option<SeparableDecomposition>,
    pub source: CertificateSource,
    /// Frobenius distance between the certificate's Choi matrix and the input's.
    pub choi_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbtStatus {
    Ebt,
    NotEbt,
    Undecided,
}

impl fmt::Display for EbtStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EbtStatus::Ebt => "EBT",
            EbtStatus::NotEbt => "NotEBT",
            EbtStatus::Undecided => "Undecided",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EbtVerdict {
    Ebt {
        certificate: Box<EbtCertificate>,
        diagnostics: Diagnostics,
    },
    NotEbt {
        witness: Witness,
        diagnostics: Diagnostics,
    },
    Undecided {
        reason: String,
        diagnostics: Diagnostics,
    },
}

impl EbtVerdict {
    pub fn status(&self) -> EbtStatus {
        match self {
            EbtVerdict::Ebt { .. } => EbtStatus::Ebt,
            EbtVerdict::NotEbt { .. } => EbtStatus::NotEbt,
            EbtVerdict::Undecided { .. } => EbtStatus::Undecided,
        }
    }

    pub fn is_ebt(&self) -> bool {
        self.status() == EbtStatus::Ebt
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        match self {
            EbtVerdict::Ebt { diagnostics, .. }
            | EbtVerdict::NotEbt { diagnostics, .. }
            | EbtVerdict::Undecided { diagnostics, .. } => diagnostics,
        }
    }

    pub fn certificate(&self) -> Option<&EbtCertificate> {
        match self {
            EbtVerdict::Ebt { certificate, .. } => Some(certificate),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            EbtVerdict::NotEbt { witness, .. } => Some(witness),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// Tolerance on the smallest partial-transpose eigenvalue.
    pub ppt_tol: f64,
    /// Seed for the random probes of the rank-d construction.
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            ppt_tol: PPT_TOL,
            seed: 0,
        }
    }
}

pub fn classify(channel: &Channel) -> Result<EbtVerdict> {
    classify_with(channel, &ClassifyOptions::default())
}

/// Decides whether a square channel is entanglement breaking.
///
/// Holevo input and rank-one Kraus input are certified directly. Otherwise
/// the Choi matrix is tested for rank and largest-eigenvalue violations, then
/// for a positive partial transpose. PPT Choi matrices of qubit channels, or
/// of rank `d`, are decomposed into product states explicitly; anything else
/// is reported as undecided.
pub fn classify_with(channel: &Channel, opts: &ClassifyOptions) -> Result<EbtVerdict> {
    let d = channel.dim_in();
    if channel.dim_out() != d {
        return Err(Error::DimensionMismatch(format!(
            "classification needs a square channel, got {d} -> {}",
            channel.dim_out()
        )));
    }
    if !channel.is_trace_preserving() {
        return Err(Error::NotTracePreserving(channel.tp_residual()));
    }
    let choi = channel.choi();
    let diagnostics = Diagnostics::of(&choi);

    let direct = match channel {
        Channel::Holevo(h) => Some((rank_one_refinement(h)?, CertificateSource::HolevoInput)),
        Channel::Kraus(k) => holevo_from_rank1_kraus(k)
            .ok()
            .map(|h| (h, CertificateSource::RankOneKraus)),
        Channel::Choi(_) => None,
    };
    if let Some((holevo, source)) = direct {
        let choi_residual = holevo.choi().matrix().distance(choi.matrix());
        if choi_residual <= RECONSTRUCTION_TOL {
            return Ok(EbtVerdict::Ebt {
                certificate: Box::new(EbtCertificate {
                    holevo,
                    decomposition: None,
                    source,
                    choi_residual,
                }),
                diagnostics,
            });
        }
    }

    let marginal_rank = diagnostics
        .input_marginal_rank
        .max(diagnostics.output_marginal_rank);
    if diagnostics.choi_rank < marginal_rank {
        return Ok(EbtVerdict::NotEbt {
            witness: Witness::KrausRank {
                choi_rank: diagnostics.choi_rank,
                marginal_rank,
            },
            diagnostics,
        });
    }
    if let Some(witness) = max_eigenvalue_witness(&diagnostics) {
        return Ok(EbtVerdict::NotEbt {
            witness,
            diagnostics,
        });
    }
    if diagnostics.min_pt_eigenvalue < -opts.ppt_tol {
        return Ok(EbtVerdict::NotEbt {
            witness: Witness::PartialTranspose {
                min_eigenvalue: diagnostics.min_pt_eigenvalue,
            },
            diagnostics,
        });
    }

    let attempt = if d == 2 {
        Some((
            qubit_decomposition(&choi),
            CertificateSource::QubitDecomposition,
        ))
    } else if diagnostics.choi_rank == d && diagnostics.input_marginal_rank == d {
        Some((
            rank_d_decomposition(&choi, opts.seed),
            CertificateSource::RankDDecomposition,
        ))
    } else {
        None
    };
    let reason = match attempt {
        None => format!(
            "PPT Choi matrix of rank {} in dimension {d}; separability is not decided outside rank d or d = 2",
            diagnostics.choi_rank
        ),
        Some((Err(e), _)) => format!("decomposition failed: {e}"),
        Some((Ok(dec), source)) => match certificate_from_decomposition(&choi, dec, source) {
            Ok(certificate) => {
                return Ok(EbtVerdict::Ebt {
                    certificate: Box::new(certificate),
                    diagnostics,
                })
            }
            Err(e) => format!("certificate failed: {e}"),
        },
    };
    Ok(EbtVerdict::Undecided {
        reason,
        diagnostics,
    })
}

fn certificate_from_decomposition(
    choi: &ChoiMatrix,
    dec: SeparableDecomposition,
    source: CertificateSource,
) -> Result<EbtCertificate> {
    let dec = reduce_decomposition(&dec).unwrap_or(dec);
    let trace = choi.matrix().trace().re;
    let unit = holevo_from_separable_choi(&dec, false)?;
    let holevo = HolevoChannel::new(
        unit.pairs()
            .iter()
            .map(|p| (p.state.clone(), p.effect.scale_real(trace)))
            .collect(),
    )?;
    let choi_residual = holevo.choi().matrix().distance(choi.matrix());
    if choi_residual > RECONSTRUCTION_TOL {
        return Err(Error::ReconstructionFailed {
            residual: choi_residual,
            tolerance: RECONSTRUCTION_TOL,
        });
    }
    Ok(EbtCertificate {
        holevo,
        decomposition: Some(dec),
        source,
        choi_residual,
    })
}

/// Splits every `(R_k, F_k)` into `(|a><a|, r_a f_b |b><b|)` over the
/// eigenvectors of both.
pub fn rank_one_refinement(h: &HolevoChannel) -> Result<HolevoChannel> {
    let mut pairs = Vec::new();
    for p in h.pairs() {
        let r = hermitian_eig(p.state.matrix())?;
        let f = hermitian_eig(&p.effect)?;
        let (rmax, fmax) = (r.max(), f.max());
        for a in 0..r.values.len() {
            if r.values[a] <= 1e-14 * rmax {
                continue;
            }
            let state = DensityMatrix::pure(&PureState::normalized(r.vector(a))?);
            for b in 0..f.values.len() {
                if f.values[b] <= 1e-14 * fmax {
                    continue;
                }
                let effect =
                    ComplexMatrix::projector(&f.vector(b)).scale_real(r.values[a] * f.values[b]);
                pairs.push((state.clone(), effect));
            }
        }
    }
    if pairs.is_empty() {
        return Ok(h.clone());
    }
    HolevoChannel::new(pairs)
}

fn spectral_map_eig(eig: &crate::linalg::HermitianEig, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let mut mapped = eig.clone();
    mapped.values.iter_mut().for_each(|x| *x = f(*x));
    mapped.reconstruct()
}

fn sigma_y_y() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        &[0.0, 0.0, 0.0, -1.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[-1.0, 0.0, 0.0, 0.0],
    ])
    .expect("4x4")
}

/// Takagi factorization of a complex symmetric matrix: unitary `U` with
/// `tau conj(u_k) = s_k u_k`, from the real symmetric embedding
/// `[[Re tau, Im tau], [Im tau, -Re tau]]`.
fn takagi_vectors(tau: &ComplexMatrix) -> Result<Vec<ComplexVector>> {
    let n = tau.rows();
    let embed = nalgebra::DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let z = tau[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) => z.re,
            (false, false) => -z.re,
            _ => z.im,
        }
    });
    let eig = nalgebra::SymmetricEigen::new(embed);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut out: Vec<ComplexVector> = Vec::with_capacity(n);
    for k in order {
        if out.len() == n {
            break;
        }
        let v = eig.eigenvectors.column(k);
        let mut u = ComplexVector::from_fn(n, |i, _| C64::new(v[i], v[i + n]));
        for w in &out {
            let c = crate::linalg::inner(w, &u);
            u -= w * c;
        }
        let norm = u.norm();
        if norm > 0.5 {
            out.push(u / real(norm));
        }
    }
    if out.len() < n {
        return Err(Error::Undecided("Takagi factorization lost rank".into()));
    }
    Ok(out)
}

/// Phases `e^{i phi_j}` with `sum_j l_j e^{i phi_j} = 0` for descending
/// lengths satisfying `l_0 <= l_1 + l_2 + l_3`.
fn closing_phases(l: [f64; 4]) -> [C64; 4] {
    // Angle between sides a and b of a triangle whose sum a + b has length c,
    // i.e. pi minus the interior angle opposite c (Kahan's stable form).
    let angle = |a: f64, b: f64, c: f64| {
        if a * b <= 0.0 {
            return 0.0;
        }
        let (p, q) = if a >= b { (a, b) } else { (b, a) };
        let num = (((p - q) + c) * (c - (p - q))).max(0.0);
        let den = ((p + (q + c)) * ((p - c) + q)).max(0.0);
        let interior = if den == 0.0 {
            std::f64::consts::PI
        } else {
            2.0 * (num / den).sqrt().atan()
        };
        std::f64::consts::PI - interior
    };
    let joint = (l[0] - l[1]).max(l[2] - l[3]).max(0.0);
    let beta = angle(l[0], l[1], joint);
    let p0 = real(1.0);
    let p1 = C64::from_polar(1.0, beta);
    let target = -(p0 * l[0] + p1 * l[1]);
    let delta = angle(l[2], l[3], joint);
    let pair = real(l[2]) + C64::from_polar(l[3], delta);
    let rotation = if pair.norm() > 1e-300 && target.norm() > 1e-300 {
        (target / target.norm()) / (pair / pair.norm())
    } else {
        real(1.0)
    };
    [p0, p1, rotation, rotation * C64::from_polar(1.0, delta)]
}

/// Product decomposition of a separable two-qubit state into at most four
/// terms via the zero-concurrence construction.
pub fn qubit_decomposition(choi: &ChoiMatrix) -> Result<SeparableDecomposition> {
    let dims = choi.dims();
    if dims.dim_a != 2 || dims.dim_b != 2 {
        return Err(Error::UnsupportedDimension(dims.dim_a.max(dims.dim_b)));
    }
    let rho = choi.matrix();
    // sqrt(rho) with numerically zero eigenvalues dropped, so that rounding
    // noise does not leave non-product components in the z vectors
    let eig = hermitian_eig(rho)?;
    let cutoff = 1e-12 * eig.max();
    let v = spectral_map_eig(&eig, |x| if x > cutoff { x.sqrt() } else { 0.0 });
    let y = sigma_y_y();
    let tau = (&(v.transpose() * &y) * &v).scale_real(1.0);
    let tau = (&tau + &tau.transpose()).scale_real(0.5);
    let u = takagi_vectors(&tau)?;
    // x_k = V conj(u_k) satisfies x_j^T Y x_k = delta_jk s_k
    let mut xs: Vec<(ComplexVector, C64)> = u
        .iter()
        .map(|uk| {
            let x = v.mul_vec(&uk.map(|z| z.conj()));
            let s = x.transpose() * y.as_na() * &x;
            (x, s[(0, 0)])
        })
        .collect();
    xs.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()));
    let lengths = [
        xs[0].1.norm(),
        xs[1].1.norm(),
        xs[2].1.norm(),
        xs[3].1.norm(),
    ];
    if lengths[0] > lengths[1] + lengths[2] + lengths[3] + 1e-9 {
        return Err(Error::NotEbt(format!(
            "concurrence {:.3e} is positive",
            lengths[0] - lengths[1] - lengths[2] - lengths[3]
        )));
    }
    let phases = closing_phases(lengths);

    // y_k = e^{i theta_k} x_k with e^{2 i theta_k} s_k = l_k phase_k
    let ys: Vec<ComplexVector> = xs
        .iter()
        .zip(phases)
        .map(|((x, s), p)| {
            let want = if s.norm() > 0.0 {
                p * s.conj() / s.norm()
            } else {
                real(1.0)
            };
            x * C64::from_polar(1.0, want.arg() / 2.0)
        })
        .collect();
    let signs = [
        [1.0, 1.0, 1.0, 1.0],
        [1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, 1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0],
    ];
    let mut terms = Vec::new();
    for row in signs {
        let z = ys
            .iter()
            .zip(row)
            .fold(ComplexVector::zeros(4), |acc, (yk, s)| {
                acc + yk * real(0.5 * s)
            });
        let (a, b, weight, _) = product_factors(&z, dims);
        if weight > 1e-15 {
            terms.push((weight, PureState::normalized(a)?, PureState::normalized(b)?));
        }
    }
    let trace = rho.trace().re;
    let dec = SeparableDecomposition::normalized(dims, terms)?;
    let residual = dec.reconstruct().scale_real(trace).distance(rho);
    if residual > RECONSTRUCTION_TOL {
        return Err(Error::ReconstructionFailed {
            residual,
            tolerance: RECONSTRUCTION_TOL,
        });
    }
    Ok(dec)
}

/// Product decomposition of a PPT state whose rank equals `d = rank(rho_A)`.
///
/// After `C' = (rho_A^{-1/2} (x) I) C (rho_A^{-1/2} (x) I)` the state is
/// `sum_i |e_i><e_i| (x) |f_i><f_i|` for an orthonormal basis `{e_i}`; the
/// basis is read off the eigenvectors of `Tr_B[(I (x) Z) C']` for a random
/// Hermitian `Z`, retried over several seeds.
pub fn rank_d_decomposition(choi: &ChoiMatrix, seed: u64) -> Result<SeparableDecomposition> {
    let dims = choi.dims();
    let (d, db) = (dims.dim_a, dims.dim_b);
    let rho = choi.matrix();
    let marginal = choi.left_marginal();
    let s = psd_sqrt(&marginal)?;
    let s_inv = psd_inv_sqrt(&marginal, 1e-12)?;
    let lift = kron(&s_inv, &ComplexMatrix::identity(db));
    let normalized = (&(&lift * rho) * &lift).hermitian_part();
    let trace = rho.trace().re;
    let mut rng = seeded_rng(seed);
    let mut best_residual = f64::INFINITY;
    for _ in 0..8 {
        let z = ginibre(&mut rng, db, db).hermitian_part();
        let probe = kron(&ComplexMatrix::identity(d), &z);
        let x = partial_trace(&(probe * &normalized), dims, Factor::Second)?.hermitian_part();
        let basis = hermitian_eig(&x)?;
        let mut terms = Vec::with_capacity(d);
        for i in 0..d {
            let e = basis.vector(i);
            let embed = ComplexMatrix::from_fn(d * db, db, |r, c| {
                if r % db == c {
                    e[r / db]
                } else {
                    C64::default()
                }
            });
            let block = (&(embed.adjoint() * &normalized) * &embed).hermitian_part();
            let be = hermitian_eig(&block)?;
            let q = be.max();
            if q <= 0.0 {
                continue;
            }
            let left = s.mul_vec(&e);
            let weight = q * left.norm_squared();
            terms.push((
                weight,
                PureState::normalized(left)?,
                PureState::normalized(be.vector(db - 1))?,
            ));
        }
        if terms.is_empty() {
            continue;
        }
        let dec = SeparableDecomposition::normalized(dims, terms)?;
        let residual = dec.reconstruct().scale_real(trace).distance(rho);
        if residual <= RECONSTRUCTION_TOL {
            return Ok(dec);
        }
        best_residual = best_residual.min(residual);
    }
    Err(Error::ReconstructionFailed {
        residual: best_residual,
        tolerance: RECONSTRUCTION_TOL,
    })
}
