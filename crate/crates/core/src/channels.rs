//! Quantum channels in Kraus, Holevo (measure-and-prepare) and Choi form,
//! with conversions, structured constructors and Monte-Carlo simulation.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::ebt::SeparableDecomposition;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, hs_inner, kron, partial_trace, psd_inv_sqrt, real, singular_values,
    BipartiteDims, ComplexMatrix, ComplexVector, Factor, PSD_TOL,
};
use crate::states::{
    ginibre, random_density_with, random_povm_with, seeded_rng, DensityMatrix, Povm, PureState,
};

/// `|sum A_k^dagger A_k - I|_F` bound for the trace-preserving flag.
pub const TP_TOL: f64 = 1e-9;
/// Kraus operators with Frobenius norm at or below this are dropped.
pub const KRAUS_PRUNE_TOL: f64 = 1e-12;
/// Choi eigenvalues at or below this fraction of the largest yield no Kraus operator.
pub const KRAUS_RANK_RTOL: f64 = 1e-12;
/// Relative singular-value threshold deciding that an operator is rank one.
pub const RANK_ONE_RTOL: f64 = 1e-9;

/// Common interface of every channel representation.
pub trait QuantumChannel {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;

    /// Applies the linear map to an arbitrary `dim_in x dim_in` matrix.
    fn map(&self, x: &ComplexMatrix) -> Result<ComplexMatrix>;

    fn is_trace_preserving(&self) -> bool;

    /// Applies a trace-preserving channel to a state.
    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if !self.is_trace_preserving() {
            return Err(Error::NotTracePreserving(f64::NAN));
        }
        let out = self.map(rho.matrix())?;
        channel_output(out)
    }

    /// `(1/d) sum_{jk} |j><k| (x) Phi(|j><k|)`.
    fn choi(&self) -> ChoiMatrix {
        let d = self.dim_in();
        let d_out = self.dim_out();
        let mut mat = ComplexMatrix::zeros(d * d_out, d * d_out);
        for j in 0..d {
            for k in 0..d {
                let image = self
                    .map(&ComplexMatrix::matrix_unit(d, j, k))
                    .expect("matrix unit has input dimension");
                let block = kron(&ComplexMatrix::matrix_unit(d, j, k), &image);
                mat = mat + block;
            }
        }
        ChoiMatrix::from_parts(mat.scale_real(1.0 / d as f64).hermitian_part(), d, d_out)
    }
}

/// Output of a trace-preserving map, hermitized and renormalized against
/// rounding up to the trace-preserving tolerance.
fn channel_output(out: ComplexMatrix) -> Result<DensityMatrix> {
    let out = out.hermitian_part();
    let tr = out.trace().re;
    if (tr - 1.0).abs() > 10.0 * TP_TOL {
        return Err(Error::InvalidTrace(tr));
    }
    DensityMatrix::new(out.scale_real(1.0 / tr))
}

fn check_input(ch: &impl QuantumChannel, x: &ComplexMatrix) -> Result<()> {
    if x.rows() != ch.dim_in() || x.cols() != ch.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "channel input is {}x{}, got {}x{}",
            ch.dim_in(),
            ch.dim_in(),
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

/// Operator-sum representation `Phi(rho) = sum_k A_k rho A_k^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    operators: Vec<ComplexMatrix>,
    tp_residual: f64,
}

impl KrausChannel {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators.first().ok_or_else(|| {
            Error::InvalidParameter("at least one Kraus operator required".into())
        })?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        for (k, a) in operators.iter().enumerate() {
            if a.rows() != dim_out || a.cols() != dim_in {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {k} is {}x{}, expected {dim_out}x{dim_in}",
                    a.rows(),
                    a.cols()
                )));
            }
            if !a.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let gram = operators
            .iter()
            .fold(ComplexMatrix::zeros(dim_in, dim_in), |acc, a| {
                acc + a.adjoint() * a
            });
        let tp_residual = gram.distance(&ComplexMatrix::identity(dim_in));
        Ok(KrausChannel {
            dim_in,
            dim_out,
            operators,
            tp_residual,
        })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `|sum A_k^dagger A_k - I|_F`.
    pub fn tp_residual(&self) -> f64 {
        self.tp_residual
    }

    /// Kraus set `{A_k^dagger}` of the Hilbert-Schmidt adjoint.
    pub fn adjoint(&self) -> KrausChannel {
        KrausChannel::new(self.operators.iter().map(ComplexMatrix::adjoint).collect())
            .expect("adjoint operators have consistent shapes")
    }
}

impl QuantumChannel for KrausChannel {
    fn dim_in(&self) -> usize {
        self.dim_in
    }

    fn dim_out(&self) -> usize {
        self.dim_out
    }

    fn map(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_input(self, x)?;
        Ok(self.operators.iter().fold(
            ComplexMatrix::zeros(self.dim_out, self.dim_out),
            |acc, a| acc + &(a * x) * &a.adjoint(),
        ))
    }

    fn is_trace_preserving(&self) -> bool {
        self.tp_residual <= TP_TOL
    }
}

/// One measure-and-prepare branch: prepare `state` with weight `Tr(effect rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolevoPair {
    pub state: DensityMatrix,
    pub effect: ComplexMatrix,
}

/// Holevo form `Phi(rho) = sum_k R_k Tr(F_k rho)` with density matrices `R_k`
/// and PSD effects `F_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolevoChannel {
    dim_in: usize,
    dim_out: usize,
    pairs: Vec<HolevoPair>,
    tp_residual: f64,
}

impl HolevoChannel {
    pub fn new(pairs: Vec<(DensityMatrix, ComplexMatrix)>) -> Result<Self> {
        let first = pairs.first().ok_or_else(|| {
            Error::InvalidParameter("at least one (state, effect) pair required".into())
        })?;
        let dim_out = first.0.dim();
        let dim_in = first.1.rows();
        let mut checked = Vec::with_capacity(pairs.len());
        for (k, (state, effect)) in pairs.into_iter().enumerate() {
            if state.dim() != dim_out {
                return Err(Error::DimensionMismatch(format!(
                    "state {k} has dimension {}, expected {dim_out}",
                    state.dim()
                )));
            }
            if effect.rows() != dim_in || effect.cols() != dim_in {
                return Err(Error::DimensionMismatch(format!(
                    "effect {k} is {}x{}, expected {dim_in}x{dim_in}",
                    effect.rows(),
                    effect.cols()
                )));
            }
            let min_eigenvalue = hermitian_eig(&effect)?.min();
            if min_eigenvalue < -PSD_TOL {
                return Err(Error::PovmElementNotPsd {
                    index: k,
                    min_eigenvalue,
                });
            }
            checked.push(HolevoPair {
                state,
                effect: effect.hermitian_part(),
            });
        }
        let total = checked
            .iter()
            .fold(ComplexMatrix::zeros(dim_in, dim_in), |acc, p| {
                acc + &p.effect
            });
        let tp_residual = total.distance(&ComplexMatrix::identity(dim_in));
        Ok(HolevoChannel {
            dim_in,
            dim_out,
            pairs: checked,
            tp_residual,
        })
    }

    pub fn pairs(&self) -> &[HolevoPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = &DensityMatrix> {
        self.pairs.iter().map(|p| &p.state)
    }

    pub fn effects(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.pairs.iter().map(|p| &p.effect)
    }

    pub fn tp_residual(&self) -> f64 {
        self.tp_residual
    }

    /// The effects as a validated POVM (fails unless trace-preserving).
    pub fn povm(&self) -> Result<Povm> {
        crate::states::validate_povm(self.effects().cloned().collect())
    }

    /// Outcome probabilities `Tr(F_k rho)`.
    pub fn outcome_probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} vs channel input {}",
                rho.dim(),
                self.dim_in
            )));
        }
        self.effects()
            .map(|f| Ok(hs_inner(f, rho.matrix())?.re))
            .collect()
    }
}

impl QuantumChannel for HolevoChannel {
    fn dim_in(&self) -> usize {
        self.dim_in
    }

    fn dim_out(&self) -> usize {
        self.dim_out
    }

    fn map(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_input(self, x)?;
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for p in &self.pairs {
            // F_k is Hermitian, so Tr(F_k x) = <F_k, x>.
            let w = hs_inner(&p.effect, x)?;
            out = out + p.state.matrix().scale(w);
        }
        Ok(out)
    }

    fn is_trace_preserving(&self) -> bool {
        self.tp_residual <= TP_TOL
    }
}

/// `(I (x) Phi)(|beta><beta|)` on `C^{d_in} (x) C^{d_out}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dims: BipartiteDims,
    mat: ComplexMatrix,
}

impl ChoiMatrix {
    /// Validates shape and positivity (complete positivity of the map).
    pub fn new(mat: ComplexMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        let dims = BipartiteDims::new(dim_in, dim_out)?;
        if mat.rows() != dims.total() || mat.cols() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix is {}x{}, expected side {}",
                mat.rows(),
                mat.cols(),
                dims.total()
            )));
        }
        let min_eigenvalue = hermitian_eig(&mat)?.min();
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue });
        }
        Ok(ChoiMatrix {
            dims,
            mat: mat.hermitian_part(),
        })
    }

    pub(crate) fn from_parts(mat: ComplexMatrix, dim_in: usize, dim_out: usize) -> Self {
        ChoiMatrix {
            dims: BipartiteDims {
                dim_a: dim_in,
                dim_b: dim_out,
            },
            mat,
        }
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// Reduced state on the input factor, `I/d` for trace-preserving maps.
    pub fn left_marginal(&self) -> ComplexMatrix {
        partial_trace(&self.mat, self.dims, Factor::Second).expect("Choi shape")
    }

    pub fn right_marginal(&self) -> ComplexMatrix {
        partial_trace(&self.mat, self.dims, Factor::First).expect("Choi shape")
    }

    pub fn marginal_residual(&self) -> f64 {
        let d = self.dims.dim_a;
        self.left_marginal()
            .distance(&ComplexMatrix::identity(d).scale_real(1.0 / d as f64))
    }
}

impl QuantumChannel for ChoiMatrix {
    fn dim_in(&self) -> usize {
        self.dims.dim_a
    }

    fn dim_out(&self) -> usize {
        self.dims.dim_b
    }

    /// `Phi(x) = d * Tr_1[(x^T (x) I) C]`.
    fn map(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_input(self, x)?;
        let lifted = kron(&x.transpose(), &ComplexMatrix::identity(self.dims.dim_b));
        let out = partial_trace(&(lifted * &self.mat), self.dims, Factor::First)?;
        Ok(out.scale_real(self.dims.dim_a as f64))
    }

    fn is_trace_preserving(&self) -> bool {
        self.marginal_residual() <= TP_TOL
    }

    fn choi(&self) -> ChoiMatrix {
        self.clone()
    }
}

/// A channel in any of the three representations.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Kraus(KrausChannel),
    Holevo(HolevoChannel),
    Choi(ChoiMatrix),
}

impl Channel {
    /// Distance from trace preservation in the native representation.
    pub fn tp_residual(&self) -> f64 {
        match self {
            Channel::Kraus(k) => k.tp_residual(),
            Channel::Holevo(h) => h.tp_residual(),
            Channel::Choi(c) => c.marginal_residual(),
        }
    }

    pub fn representation(&self) -> &'static str {
        match self {
            Channel::Kraus(_) => "kraus",
            Channel::Holevo(_) => "holevo",
            Channel::Choi(_) => "choi",
        }
    }

    /// Kraus form; Holevo input uses the measure-and-prepare construction,
    /// Choi input the eigenvector construction.
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        match self {
            Channel::Kraus(k) => Ok(k.clone()),
            Channel::Holevo(h) => Ok(kraus_from_holevo(h)),
            Channel::Choi(c) => kraus_from_choi(c),
        }
    }

    pub fn as_holevo(&self) -> Option<&HolevoChannel> {
        match self {
            Channel::Holevo(h) => Some(h),
            _ => None,
        }
    }
}

impl From<KrausChannel> for Channel {
    fn from(k: KrausChannel) -> Self {
        Channel::Kraus(k)
    }
}

impl From<HolevoChannel> for Channel {
    fn from(h: HolevoChannel) -> Self {
        Channel::Holevo(h)
    }
}

impl From<ChoiMatrix> for Channel {
    fn from(c: ChoiMatrix) -> Self {
        Channel::Choi(c)
    }
}

impl QuantumChannel for Channel {
    fn dim_in(&self) -> usize {
        match self {
            Channel::Kraus(k) => k.dim_in(),
            Channel::Holevo(h) => h.dim_in(),
            Channel::Choi(c) => c.dim_in(),
        }
    }

    fn dim_out(&self) -> usize {
        match self {
            Channel::Kraus(k) => k.dim_out(),
            Channel::Holevo(h) => h.dim_out(),
            Channel::Choi(c) => c.dim_out(),
        }
    }

    fn map(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        match self {
            Channel::Kraus(k) => k.map(x),
            Channel::Holevo(h) => h.map(x),
            Channel::Choi(c) => c.map(x),
        }
    }

    fn is_trace_preserving(&self) -> bool {
        match self {
            Channel::Kraus(k) => k.is_trace_preserving(),
            Channel::Holevo(h) => h.is_trace_preserving(),
            Channel::Choi(c) => c.is_trace_preserving(),
        }
    }

    fn choi(&self) -> ChoiMatrix {
        match self {
            Channel::Kraus(k) => k.choi(),
            Channel::Holevo(h) => h.choi(),
            Channel::Choi(c) => c.clone(),
        }
    }
}

/// Choi matrix of any channel.
pub fn choi_of(channel: &impl QuantumChannel) -> ChoiMatrix {
    channel.choi()
}

/// Applies a trace-preserving channel to a state.
pub fn apply(channel: &impl QuantumChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    channel.apply(rho)
}

/// One Kraus operator per Choi eigenvalue above the rank threshold; an
/// eigenvector `u` with eigenvalue `mu` becomes `A[m, j] = sqrt(d mu) u[(j, m)]`.
pub fn kraus_from_choi(choi: &ChoiMatrix) -> Result<KrausChannel> {
    let eig = hermitian_eig(choi.matrix())?;
    if eig.min() < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min(),
        });
    }
    let (d, d_out) = (choi.dims().dim_a, choi.dims().dim_b);
    let threshold = KRAUS_RANK_RTOL * eig.max().max(0.0);
    let mut operators = Vec::new();
    for (k, &mu) in eig.values.iter().enumerate().rev() {
        if mu <= threshold {
            continue;
        }
        let u = eig.vector(k);
        let scale = (d as f64 * mu).sqrt();
        operators.push(ComplexMatrix::from_fn(d_out, d, |m, j| {
            u[j * d_out + m] * scale
        }));
    }
    if operators.is_empty() {
        operators.push(ComplexMatrix::zeros(d_out, d));
    }
    KrausChannel::new(operators)
}

/// `(sqrt(weight), unit vector)` factors of a PSD matrix: its eigenpairs
/// above a tiny relative threshold.
fn spectral_factors(m: &ComplexMatrix) -> Vec<(f64, ComplexVector)> {
    let eig = hermitian_eig(m).expect("validated Hermitian");
    let top = eig.max().max(0.0);
    eig.values
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &x)| x > 1e-14 * top && x > 0.0)
        .map(|(k, &x)| (x.sqrt(), eig.vector(k)))
        .collect()
}

/// Measure-and-prepare Kraus operators `A_kmn = sqrt(R_k) |m><n| sqrt(F_k)`.
///
/// The bases `{|m>}` and `{|n>}` are taken as eigenbases of `R_k` and `F_k`,
/// so every operator is rank one, `sqrt(r_m f_n) |m><n|`. Vanishing products
/// are pruned, which gives the `A_km` form for classical-quantum inputs,
/// `|psi_k><k|` when those also prepare pure states, and `|k><n| sqrt(F_k)`
/// for quantum-classical ones.
pub fn kraus_from_holevo(h: &HolevoChannel) -> KrausChannel {
    let mut operators = Vec::new();
    for p in h.pairs() {
        let left = spectral_factors(p.state.matrix());
        let right = spectral_factors(&p.effect);
        for (sr, ket) in &left {
            for (sf, bra) in &right {
                let a = ComplexMatrix::outer(ket, bra).scale_real(sr * sf);
                if a.frobenius_norm() > KRAUS_PRUNE_TOL {
                    operators.push(a);
                }
            }
        }
    }
    if operators.is_empty() {
        operators.push(ComplexMatrix::zeros(h.dim_out(), h.dim_in()));
    }
    KrausChannel::new(operators).expect("operators share the channel shape")
}

/// Holevo form of a channel given by rank-one Kraus operators
/// `A_k = s_k |x_k><y_k|`: prepare `|x_k><x_k|` on effect `s_k^2 |y_k><y_k|`.
/// Branches preparing the same pure state are merged.
pub fn holevo_from_rank1_kraus(k: &KrausChannel) -> Result<HolevoChannel> {
    let mut pairs: Vec<(ComplexVector, ComplexMatrix)> = Vec::new();
    for (index, a) in k.operators().iter().enumerate() {
        if a.frobenius_norm() <= KRAUS_PRUNE_TOL {
            continue;
        }
        let s = singular_values(a);
        let rank = s.iter().filter(|&&x| x > RANK_ONE_RTOL * s[0]).count();
        if rank > 1 {
            return Err(Error::RankTooHigh { index, rank });
        }
        // A A^dagger = s^2 |x><x|, A^dagger A = s^2 |y><y|.
        let out = hermitian_eig(&(a * &a.adjoint()))?;
        let x = out.vector(out.values.len() - 1);
        let effect = (a.adjoint() * a).hermitian_part();
        match pairs
            .iter_mut()
            .find(|(v, _)| crate::linalg::inner(v, &x).norm_sqr() >= 1.0 - 1e-12)
        {
            Some((_, f)) => *f = &*f + &effect,
            None => pairs.push((x, effect)),
        }
    }
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("all Kraus operators vanish".into()));
    }
    HolevoChannel::new(
        pairs
            .into_iter()
            .map(|(x, f)| {
                (
                    DensityMatrix::new(ComplexMatrix::projector(&x)).expect("unit vector"),
                    f,
                )
            })
            .collect(),
    )
}

/// Holevo form read off a separable decomposition of a Choi matrix,
/// `R_n = |w_n><w_n|`, `F_n = d p_n conj(|v_n><v_n|)`.
///
/// With `trace_preserving` set, the left marginal `sum_n p_n |v_n><v_n|`
/// must equal `I/d` to 1e-8.
pub fn holevo_from_separable_choi(
    dec: &SeparableDecomposition,
    trace_preserving: bool,
) -> Result<HolevoChannel> {
    let d = dec.dims().dim_a;
    if trace_preserving {
        let marginal = dec
            .terms()
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, t| {
                acc + t.left.projector().scale_real(t.weight)
            });
        let residual = marginal.distance(&ComplexMatrix::identity(d).scale_real(1.0 / d as f64));
        if residual > 1e-8 {
            return Err(Error::MarginalNotMaximallyMixed(residual));
        }
    }
    HolevoChannel::new(
        dec.terms()
            .iter()
            .map(|t| {
                (
                    DensityMatrix::pure(&t.right),
                    t.left.projector().conj().scale_real(d as f64 * t.weight),
                )
            })
            .collect(),
    )
}

fn check_orthonormal(basis: &[PureState], dim: usize) -> Result<()> {
    let mut worst: f64 = 0.0;
    for (i, u) in basis.iter().enumerate() {
        if u.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "basis vector {i} has dimension {}, expected {dim}",
                u.dim()
            )));
        }
        for (j, v) in basis.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((crate::linalg::inner(u.vector(), v.vector()) - real(target)).norm());
        }
    }
    if worst > 1e-10 {
        return Err(Error::NonOrthonormalBasis(worst));
    }
    Ok(())
}

/// Classical-quantum channel `rho -> sum_k R_k <e_k|rho|e_k>` for a complete
/// orthonormal basis `{e_k}`.
pub fn cq_channel(states: Vec<DensityMatrix>, basis: &[PureState]) -> Result<HolevoChannel> {
    let d = basis
        .first()
        .map(PureState::dim)
        .ok_or_else(|| Error::InvalidParameter("empty basis".into()))?;
    check_orthonormal(basis, d)?;
    if basis.len() != d {
        return Err(Error::NonOrthonormalBasis(1.0));
    }
    if states.len() != basis.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} states for {} basis vectors",
            states.len(),
            basis.len()
        )));
    }
    HolevoChannel::new(
        states
            .into_iter()
            .zip(basis)
            .map(|(r, e)| (r, e.projector()))
            .collect(),
    )
}

/// Quantum-classical channel `rho -> sum_k |e_k><e_k| Tr(F_k rho)` with
/// orthonormal output vectors `{e_k}`, one per POVM element.
pub fn qc_channel(povm: &Povm, basis: &[PureState]) -> Result<HolevoChannel> {
    let d_out = basis
        .first()
        .map(PureState::dim)
        .ok_or_else(|| Error::InvalidParameter("empty basis".into()))?;
    check_orthonormal(basis, d_out)?;
    if basis.len() != povm.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} basis vectors for {} POVM elements",
            basis.len(),
            povm.len()
        )));
    }
    HolevoChannel::new(
        basis
            .iter()
            .zip(povm.elements())
            .map(|(e, f)| (DensityMatrix::pure(e), f.clone()))
            .collect(),
    )
}

/// Constant channel `rho -> R` on `dim_in`-dimensional inputs.
pub fn point_channel(r: DensityMatrix, dim_in: usize) -> Result<HolevoChannel> {
    if dim_in == 0 {
        return Err(Error::InvalidDimension("input dimension 0".into()));
    }
    HolevoChannel::new(vec![(r, ComplexMatrix::identity(dim_in))])
}

/// `rho -> sum_k P_k rho P_k` for a von Neumann measurement `{P_k}`.
pub fn block_projection_channel(projections: Vec<ComplexMatrix>) -> Result<KrausChannel> {
    let d = projections
        .first()
        .map(ComplexMatrix::rows)
        .ok_or_else(|| Error::InvalidParameter("no projections".into()))?;
    let mut worst: f64 = 0.0;
    let mut total = ComplexMatrix::zeros(d, d);
    for (i, p) in projections.iter().enumerate() {
        if p.rows() != d || !p.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "projection {i} has the wrong shape"
            )));
        }
        worst = worst.max(p.hermiticity_deviation());
        worst = worst.max((p * p).distance(p));
        for q in &projections[i + 1..] {
            if q.rows() == d && q.is_square() {
                worst = worst.max((p * q).frobenius_norm());
            }
        }
        total = total + p;
    }
    worst = worst.max(total.distance(&ComplexMatrix::identity(d)));
    if worst > 1e-10 {
        return Err(Error::IncompleteProjectors(worst));
    }
    KrausChannel::new(projections)
}

pub fn identity_channel(d: usize) -> KrausChannel {
    KrausChannel::new(vec![ComplexMatrix::identity(d)]).expect("identity")
}

pub fn unitary_channel(u: ComplexMatrix) -> Result<KrausChannel> {
    let n = u.rows();
    let residual = (&u.adjoint() * &u).distance(&ComplexMatrix::identity(n));
    if !u.is_square() || residual > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "operator is not unitary (residual {residual:.3e})"
        )));
    }
    KrausChannel::new(vec![u])
}

/// Depolarizing channel `rho -> lambda rho + (1 - lambda) Tr(rho) I/d`, built
/// from its Choi matrix `lambda |beta><beta| + (1 - lambda) I/d^2`.
pub fn depolarizing(d: usize, lambda: f64) -> Result<KrausChannel> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "depolarizing channel needs d >= 2, got {d}"
        )));
    }
    let lower = -1.0 / ((d * d - 1) as f64);
    if !(lower - 1e-12..=1.0 + 1e-12).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "depolarizing parameter {lambda} outside [{lower}, 1]"
        )));
    }
    let beta = crate::states::maximally_entangled(d)?.projector();
    let n = d * d;
    let mat =
        beta.scale_real(lambda) + ComplexMatrix::identity(n).scale_real((1.0 - lambda) / n as f64);
    kraus_from_choi(&ChoiMatrix::new(mat, d, d)?)
}

/// Complete dephasing in the computational basis, Kraus set `{|k><k|}`.
pub fn dephasing(d: usize) -> Result<KrausChannel> {
    if d == 0 {
        return Err(Error::InvalidDimension("dimension 0".into()));
    }
    KrausChannel::new(
        (0..d)
            .map(|k| ComplexMatrix::matrix_unit(d, k, k))
            .collect(),
    )
}

/// `alpha Phi_1 + (1 - alpha) Phi_2` as a Holevo form with POVM
/// `{alpha E_j} u {(1 - alpha) E~_k}`.
pub fn convex_combination(
    alpha: f64,
    phi1: &HolevoChannel,
    phi2: &HolevoChannel,
) -> Result<HolevoChannel> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "weight {alpha} outside [0, 1]"
        )));
    }
    if phi1.dim_in() != phi2.dim_in() || phi1.dim_out() != phi2.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "{}->{} vs {}->{}",
            phi1.dim_in(),
            phi1.dim_out(),
            phi2.dim_in(),
            phi2.dim_out()
        )));
    }
    for phi in [phi1, phi2] {
        if !phi.is_trace_preserving() {
            return Err(Error::NotTracePreserving(phi.tp_residual()));
        }
    }
    if alpha == 0.0 {
        return Ok(phi2.clone());
    }
    if alpha == 1.0 {
        return Ok(phi1.clone());
    }
    let scaled = |phi: &HolevoChannel, w: f64| {
        phi.pairs()
            .iter()
            .map(move |p| (p.state.clone(), p.effect.scale_real(w)))
            .collect::<Vec<_>>()
    };
    let mut pairs = scaled(phi1, alpha);
    pairs.extend(scaled(phi2, 1.0 - alpha));
    HolevoChannel::new(pairs)
}

/// Hilbert-Schmidt adjoint, Kraus set `{A_k^dagger}`.
pub fn adjoint(phi: &Channel) -> Result<KrausChannel> {
    Ok(phi.to_kraus()?.adjoint())
}

/// `Phi o Upsilon` (apply `upsilon` first). A Holevo `phi` keeps its states
/// and has its effects replaced by `Upsilon^(F_k)`; otherwise the Kraus
/// operators are the pairwise products.
pub fn compose(phi: &Channel, upsilon: &Channel) -> Result<Channel> {
    if upsilon.dim_out() != phi.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose: inner map outputs dimension {}, outer map takes {}",
            upsilon.dim_out(),
            phi.dim_in()
        )));
    }
    let ups_adj = adjoint(upsilon)?;
    if let Channel::Holevo(h) = phi {
        let pairs = h
            .pairs()
            .iter()
            .map(|p| Ok((p.state.clone(), ups_adj.map(&p.effect)?.hermitian_part())))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Channel::Holevo(HolevoChannel::new(pairs)?));
    }
    let outer = phi.to_kraus()?;
    let inner = upsilon.to_kraus()?;
    let mut operators = Vec::new();
    for a in outer.operators() {
        for b in inner.operators() {
            let ab = a * b;
            if ab.frobenius_norm() > KRAUS_PRUNE_TOL {
                operators.push(ab);
            }
        }
    }
    if operators.is_empty() {
        operators.push(ComplexMatrix::zeros(phi.dim_out(), upsilon.dim_in()));
    }
    Ok(Channel::Kraus(KrausChannel::new(operators)?))
}

/// Channel with `k` Kraus operators cut from a random isometry
/// `C^{d_in} -> C^{k d_out}`, `V = G (G^dagger G)^{-1/2}` for Ginibre `G`.
pub fn random_kraus_with<R: Rng + ?Sized>(
    rng: &mut R,
    d_in: usize,
    d_out: usize,
    k: usize,
) -> Result<KrausChannel> {
    if d_in == 0 || d_out == 0 || k == 0 || k * d_out < d_in {
        return Err(Error::InvalidParameter(format!(
            "no isometry from C^{d_in} into C^{k} (x) C^{d_out}"
        )));
    }
    let g = ginibre(rng, k * d_out, d_in);
    let v = &g * &psd_inv_sqrt(&(&g.adjoint() * &g).hermitian_part(), 1e-14)?;
    let operators = (0..k)
        .map(|j| ComplexMatrix::from_fn(d_out, d_in, |r, c| v[(j * d_out + r, c)]))
        .collect();
    KrausChannel::new(operators)
}

/// Holevo channel with a random `n`-outcome POVM and random prepared states
/// of rank `state_rank`.
pub fn random_holevo_with<R: Rng + ?Sized>(
    rng: &mut R,
    d_in: usize,
    d_out: usize,
    n: usize,
    state_rank: usize,
) -> Result<HolevoChannel> {
    let povm = random_povm_with(rng, d_in, n)?;
    let pairs = povm
        .into_elements()
        .into_iter()
        .map(|f| Ok((random_density_with(rng, d_out, state_rank)?, f)))
        .collect::<Result<Vec<_>>>()?;
    HolevoChannel::new(pairs)
}

/// Result of a Monte-Carlo measure-and-prepare run.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    /// `(1/N) sum_i R_{k(i)}`.
    pub empirical: DensityMatrix,
    /// Number of times each branch was selected.
    pub outcome_counts: Vec<u64>,
}

/// Draws `n_samples` outcomes `k ~ Tr(F_k rho)` and averages the prepared
/// states. Probabilities down to -1e-10 are clipped to zero.
pub fn simulate_measure_prepare(
    h: &HolevoChannel,
    rho: &DensityMatrix,
    n_samples: u64,
    seed: u64,
) -> Result<Simulation> {
    if !h.is_trace_preserving() {
        return Err(Error::NotTracePreserving(h.tp_residual()));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter(
            "at least one sample required".into(),
        ));
    }
    let mut probs = h.outcome_probabilities(rho)?;
    for p in probs.iter_mut() {
        if *p < -1e-10 {
            return Err(Error::NegativeProbability(*p));
        }
        *p = p.max(0.0);
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);

    let dist = WeightedIndex::new(&probs)
        .map_err(|e| Error::InvalidParameter(format!("outcome distribution: {e}")))?;
    let mut rng = seeded_rng(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..n_samples {
        counts[dist.sample(&mut rng)] += 1;
    }
    let d = h.dim_out();
    let mut empirical = ComplexMatrix::zeros(d, d);
    for (count, pair) in counts.iter().zip(h.pairs()) {
        if *count > 0 {
            empirical = empirical
                + pair
                    .state
                    .matrix()
                    .scale_real(*count as f64 / n_samples as f64);
        }
    }
    Ok(Simulation {
        empirical: channel_output(empirical)?,
        outcome_counts: counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, real_vector, trace_distance};
    use crate::states::{
        random_density, random_density_with, random_povm_with, random_pure_state_with, seeded_rng,
    };

    fn pure(v: &[f64]) -> PureState {
        PureState::normalized(real_vector(v)).unwrap()
    }

    fn apply_distance(a: &impl QuantumChannel, b: &impl QuantumChannel, seed: u64) -> f64 {
        let mut worst: f64 = 0.0;
        for s in 0..10 {
            let rho =
                random_density(a.dim_in(), 1 + (s as usize % a.dim_in()), seed * 100 + s).unwrap();
            let x = a.map(rho.matrix()).unwrap();
            let y = b.map(rho.matrix()).unwrap();
            worst = worst.max(x.distance(&y));
        }
        worst
    }

    #[test]
    fn random_generators_are_channels() {
        let mut rng = seeded_rng(4);
        for (d_in, d_out, k) in [(2, 2, 1), (3, 2, 2), (4, 4, 3)] {
            let ch = random_kraus_with(&mut rng, d_in, d_out, k).unwrap();
            assert_eq!(ch.len(), k);
            assert!(ch.tp_residual() < 1e-12);
        }
        assert!(random_kraus_with(&mut rng, 4, 1, 3).is_err());
        let h = random_holevo_with(&mut rng, 3, 2, 4, 1).unwrap();
        assert!(h.tp_residual() < 1e-12);
        assert_eq!((h.dim_in(), h.dim_out(), h.len()), (3, 2, 4));
    }

    fn random_holevo(seed: u64, d: usize, n: usize) -> HolevoChannel {
        let mut rng = seeded_rng(seed);
        let povm = random_povm_with(&mut rng, d, n).unwrap();
        let pairs = povm
            .into_elements()
            .into_iter()
            .map(|f| {
                (
                    random_density_with(&mut rng, d, 1 + (seed as usize) % d).unwrap(),
                    f,
                )
            })
            .collect();
        HolevoChannel::new(pairs).unwrap()
    }

    fn pure_cq(seed: u64, d: usize) -> (HolevoChannel, Vec<PureState>) {
        let mut rng = seeded_rng(seed);
        let psis: Vec<PureState> = (0..d)
            .map(|_| random_pure_state_with(&mut rng, d))
            .collect();
        let basis: Vec<PureState> = (0..d)
            .map(|k| PureState::new(basis_vector(d, k)).unwrap())
            .collect();
        let h = cq_channel(psis.iter().map(DensityMatrix::pure).collect(), &basis).unwrap();
        (h, psis)
    }

    #[test]
    fn point_channel_maps_everything_to_r() {
        let r = random_density(2, 2, 3).unwrap();
        let phi = point_channel(r.clone(), 3).unwrap();
        for seed in 0..5 {
            let rho = random_density(3, 2, seed).unwrap();
            assert!(phi.apply(&rho).unwrap().matrix().distance(r.matrix()) < 1e-14);
        }
    }

    #[test]
    fn identity_kraus_leaves_state_unchanged() {
        let rho = random_density(3, 3, 1).unwrap();
        assert!(
            identity_channel(3)
                .apply(&rho)
                .unwrap()
                .matrix()
                .distance(rho.matrix())
                < 1e-14
        );
    }

    #[test]
    fn three_representations_agree() {
        let h = random_holevo(1, 3, 4);
        let k = kraus_from_holevo(&h);
        let c = choi_of(&h);
        assert!(apply_distance(&h, &k, 1) < 1e-9);
        assert!(apply_distance(&h, &c, 2) < 1e-9);
        assert!(choi_of(&k).matrix().distance(c.matrix()) < 1e-12);
    }

    #[test]
    fn choi_of_identity_is_bell_projector() {
        let c = choi_of(&identity_channel(2));
        let beta = crate::states::maximally_entangled(2).unwrap().projector();
        assert!(c.matrix().distance(&beta) < 1e-15);
    }

    #[test]
    fn choi_of_depolarizing() {
        for lambda in [0.0, 0.25, 0.5, 1.0] {
            let c = choi_of(&depolarizing(2, lambda).unwrap());
            let beta = crate::states::maximally_entangled(2).unwrap().projector();
            let expected = beta.scale_real(lambda)
                + ComplexMatrix::identity(4).scale_real((1.0 - lambda) / 4.0);
            assert!(c.matrix().distance(&expected) < 1e-12, "lambda {lambda}");
        }
        assert!(depolarizing(2, 1.5).is_err());
        assert!(depolarizing(2, -0.5).is_err());
    }

    #[test]
    fn choi_of_point_channel_is_product() {
        let r = random_density(2, 2, 9).unwrap();
        let c = choi_of(&point_channel(r.clone(), 2).unwrap());
        let expected = kron(&ComplexMatrix::identity(2).scale_real(0.5), r.matrix());
        assert!(c.matrix().distance(&expected) < 1e-14);
    }

    #[test]
    fn kraus_from_choi_of_identity() {
        let k = kraus_from_choi(&choi_of(&identity_channel(2))).unwrap();
        assert_eq!(k.len(), 1);
        let a = &k.operators()[0];
        let phase = a[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(a.scale(phase.conj()).distance(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn kraus_from_choi_rank_one_depolarizing() {
        assert_eq!(depolarizing(2, 1.0).unwrap().len(), 1);
        assert_eq!(depolarizing(2, 0.5).unwrap().len(), 4);
    }

    #[test]
    fn kraus_from_choi_round_trip() {
        let h = random_holevo(4, 3, 5);
        let c = choi_of(&h);
        let k = kraus_from_choi(&c).unwrap();
        assert!(choi_of(&k).matrix().distance(c.matrix()) < 1e-9);
        assert!(k.tp_residual() < 1e-10);
    }

    #[test]
    fn kraus_from_choi_rejects_non_psd() {
        let bad = ChoiMatrix::from_parts(
            ComplexMatrix::from_real_diagonal(&[0.6, 0.6, -0.2, 0.0]),
            2,
            2,
        );
        assert!(matches!(kraus_from_choi(&bad), Err(Error::NotPsd { .. })));
        assert!(ChoiMatrix::new(
            ComplexMatrix::from_real_diagonal(&[0.6, 0.6, -0.2, 0.0]),
            2,
            2
        )
        .is_err());
    }

    #[test]
    fn pure_cq_kraus_operators_are_psi_e() {
        let (h, psis) = pure_cq(5, 3);
        let k = kraus_from_holevo(&h);
        assert_eq!(k.len(), 3);
        for (a, psi) in k.operators().iter().zip(&psis) {
            let expected = ComplexMatrix::outer(psi.vector(), &basis_vector(3, 0));
            // operators come out in pair order; match each against |psi_k><e_k| up to phase
            let found = (0..3).any(|e| {
                let target = ComplexMatrix::outer(psi.vector(), &basis_vector(3, e));
                let overlap = hs_inner(&target, a).unwrap();
                (overlap.norm() - 1.0).abs() < 1e-10 && a.distance(&target.scale(overlap)) < 1e-10
            });
            assert!(found, "operator {a:?} vs {expected:?}");
        }
    }

    #[test]
    fn qc_kraus_operators_live_on_output_vectors() {
        let povm = crate::states::random_povm(2, 3, 8).unwrap();
        let basis: Vec<PureState> = (0..3)
            .map(|k| PureState::new(basis_vector(3, k)).unwrap())
            .collect();
        let h = qc_channel(&povm, &basis).unwrap();
        let k = kraus_from_holevo(&h);
        for a in k.operators() {
            // each operator is |e_k><n| sqrt(F_k): exactly one nonzero row
            let nonzero_rows = (0..3)
                .filter(|&r| (0..2).any(|c| a[(r, c)].norm() > 1e-12))
                .count();
            assert_eq!(nonzero_rows, 1);
        }
        assert!(apply_distance(&h, &k, 3) < 1e-9);
    }

    #[test]
    fn point_channel_kraus_equivalent() {
        let r = DensityMatrix::pure(&pure(&[1.0, 1.0]));
        let h = point_channel(r, 2).unwrap();
        let k = kraus_from_holevo(&h);
        assert_eq!(k.len(), 2);
        assert!(apply_distance(&h, &k, 4) < 1e-12);
    }

    #[test]
    fn rank1_kraus_dephasing() {
        let h = holevo_from_rank1_kraus(&dephasing(2).unwrap()).unwrap();
        assert_eq!(h.len(), 2);
        for (k, p) in h.pairs().iter().enumerate() {
            let proj = ComplexMatrix::matrix_unit(2, k, k);
            assert!(p.effect.distance(&proj) < 1e-12);
            assert!(p.state.matrix().distance(&proj) < 1e-12);
        }
        assert!(h.is_trace_preserving());
    }

    #[test]
    fn rank1_kraus_rejects_higher_rank() {
        let k = KrausChannel::new(vec![
            ComplexMatrix::identity(2).scale_real(0.5f64.sqrt()),
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
                .unwrap()
                .scale_real(0.5f64.sqrt()),
        ])
        .unwrap();
        assert!(matches!(
            holevo_from_rank1_kraus(&k),
            Err(Error::RankTooHigh { index: 0, rank: 2 })
        ));
    }

    #[test]
    fn holevo_kraus_holevo_round_trip() {
        let h = random_holevo(7, 2, 3);
        let back = holevo_from_rank1_kraus(&kraus_from_holevo(&h)).unwrap();
        assert!(back.is_trace_preserving());
        assert!(apply_distance(&h, &back, 5) < 1e-9);
    }

    #[test]
    fn cq_with_mixed_states_is_constant() {
        let basis = [pure(&[1.0, 0.0]), pure(&[0.0, 1.0])];
        let half = DensityMatrix::maximally_mixed(2);
        let h = cq_channel(vec![half.clone(), half.clone()], &basis).unwrap();
        let rho = random_density(2, 1, 2).unwrap();
        assert!(h.apply(&rho).unwrap().matrix().distance(half.matrix()) < 1e-14);
    }

    #[test]
    fn cq_rejects_bad_basis() {
        let basis = [pure(&[1.0, 0.0]), pure(&[1.0, 1.0])];
        let half = DensityMatrix::maximally_mixed(2);
        assert!(matches!(
            cq_channel(vec![half.clone(), half.clone()], &basis),
            Err(Error::NonOrthonormalBasis(_))
        ));
        assert!(cq_channel(vec![half], &[pure(&[1.0, 0.0])]).is_err());
    }

    #[test]
    fn block_projection_validation() {
        let p = ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 0.0]);
        let q = ComplexMatrix::from_real_diagonal(&[0.0, 0.0, 1.0]);
        let ch = block_projection_channel(vec![p.clone(), q]).unwrap();
        assert!(ch.is_trace_preserving());
        let bad = ComplexMatrix::from_real_diagonal(&[0.0, 0.5, 1.0]);
        assert!(matches!(
            block_projection_channel(vec![p, bad]),
            Err(Error::IncompleteProjectors(_))
        ));
    }

    #[test]
    fn convex_combination_endpoints_and_midpoint() {
        let r1 = random_density(2, 2, 1).unwrap();
        let r2 = random_density(2, 2, 2).unwrap();
        let p1 = point_channel(r1.clone(), 2).unwrap();
        let p2 = point_channel(r2.clone(), 2).unwrap();
        assert_eq!(convex_combination(0.0, &p1, &p2).unwrap(), p2);
        let mid = convex_combination(0.5, &p1, &p2).unwrap();
        let expected = (r1.matrix() + r2.matrix()).scale_real(0.5);
        let rho = random_density(2, 1, 3).unwrap();
        assert!(mid.apply(&rho).unwrap().matrix().distance(&expected) < 1e-14);
        assert!(convex_combination(1.5, &p1, &p2).is_err());
        let p3 = point_channel(r1, 3).unwrap();
        assert!(convex_combination(0.5, &p1, &p3).is_err());
    }

    #[test]
    fn convex_combination_of_cq_and_qc_is_povm() {
        let (cq, _) = pure_cq(3, 2);
        let povm = crate::states::random_povm(2, 2, 4).unwrap();
        let basis = [pure(&[1.0, 0.0]), pure(&[0.0, 1.0])];
        let qc = qc_channel(&povm, &basis).unwrap();
        let mix = convex_combination(1.0 / 3.0, &cq, &qc).unwrap();
        assert!(mix.povm().is_ok());
        let rho = random_density(2, 2, 5).unwrap();
        let expected = cq.map(rho.matrix()).unwrap().scale_real(1.0 / 3.0)
            + qc.map(rho.matrix()).unwrap().scale_real(2.0 / 3.0);
        assert!(mix.map(rho.matrix()).unwrap().distance(&expected) < 1e-10);
    }

    #[test]
    fn adjoint_properties() {
        let id: Channel = identity_channel(2).into();
        assert_eq!(adjoint(&id).unwrap(), identity_channel(2));
        let h: Channel = random_holevo(11, 3, 4).into();
        let adj = adjoint(&h).unwrap();
        assert!(
            adj.map(&ComplexMatrix::identity(3))
                .unwrap()
                .distance(&ComplexMatrix::identity(3))
                < 1e-10
        );
        let mut rng = seeded_rng(12);
        let a = crate::states::ginibre(&mut rng, 3, 3);
        let b = crate::states::ginibre(&mut rng, 3, 3);
        let lhs = hs_inner(&adj.map(&a).unwrap(), &b).unwrap();
        let rhs = hs_inner(&a, &h.map(&b).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn composition_matches_sequential_application() {
        let h: Channel = random_holevo(13, 2, 3).into();
        let u: Channel = unitary_channel(crate::states::random_unitary(2, 14))
            .unwrap()
            .into();
        let hu = compose(&h, &u).unwrap();
        assert!(matches!(hu, Channel::Holevo(_)));
        let uh = compose(&u, &h).unwrap();
        assert!(matches!(uh, Channel::Kraus(_)));
        let rho = random_density(2, 2, 15).unwrap();
        let seq = h.map(&u.map(rho.matrix()).unwrap()).unwrap();
        assert!(hu.map(rho.matrix()).unwrap().distance(&seq) < 1e-10);
        let seq = u.map(&h.map(rho.matrix()).unwrap()).unwrap();
        assert!(uh.map(rho.matrix()).unwrap().distance(&seq) < 1e-10);
        let wide: Channel = point_channel(random_density(3, 3, 1).unwrap(), 2)
            .unwrap()
            .into();
        assert!(compose(&wide, &wide).is_err());
    }

    #[test]
    fn choi_marginal_of_tp_channel() {
        let c = choi_of(&random_holevo(21, 3, 3));
        assert!(c.marginal_residual() < 1e-9);
        assert!(c.is_trace_preserving());
    }

    #[test]
    fn separable_choi_round_trip_for_point_channel() {
        let psi = pure(&[0.6, 0.8]);
        let phi = point_channel(DensityMatrix::pure(&psi), 2).unwrap();
        let dims = BipartiteDims::new(2, 2).unwrap();
        let dec = SeparableDecomposition::new(
            dims,
            vec![
                (
                    0.5,
                    PureState::new(basis_vector(2, 0)).unwrap(),
                    psi.clone(),
                ),
                (
                    0.5,
                    PureState::new(basis_vector(2, 1)).unwrap(),
                    psi.clone(),
                ),
            ],
        )
        .unwrap();
        let back = holevo_from_separable_choi(&dec, true).unwrap();
        assert!(choi_of(&back).matrix().distance(choi_of(&phi).matrix()) < 1e-8);
        assert!(back.is_trace_preserving());
    }

    #[test]
    fn separable_choi_requires_maximally_mixed_marginal() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let e0 = PureState::new(basis_vector(2, 0)).unwrap();
        let dec = SeparableDecomposition::new(dims, vec![(1.0, e0.clone(), e0)]).unwrap();
        assert!(matches!(
            holevo_from_separable_choi(&dec, true),
            Err(Error::MarginalNotMaximallyMixed(_))
        ));
        assert!(holevo_from_separable_choi(&dec, false).is_ok());
    }

    #[test]
    fn simulation_of_point_channel_is_exact() {
        let r = random_density(2, 2, 1).unwrap();
        let h = point_channel(r.clone(), 2).unwrap();
        let sim = simulate_measure_prepare(&h, &DensityMatrix::maximally_mixed(2), 17, 3).unwrap();
        assert_eq!(sim.outcome_counts, vec![17]);
        assert!(sim.empirical.matrix().distance(r.matrix()) < 1e-15);
    }

    #[test]
    fn simulation_dephasing_histogram() {
        let h = holevo_from_rank1_kraus(&dephasing(2).unwrap()).unwrap();
        let plus = DensityMatrix::pure(&pure(&[1.0, 1.0]));
        let n = 100_000;
        let sim = simulate_measure_prepare(&h, &plus, n, 42).unwrap();
        let p0 = sim.outcome_counts[0] as f64 / n as f64;
        assert!((p0 - 0.5).abs() < 0.01, "p0 = {p0}");
    }

    #[test]
    fn simulation_is_deterministic_and_checks_tp() {
        let h = random_holevo(30, 3, 4);
        let rho = random_density(3, 3, 31).unwrap();
        let a = simulate_measure_prepare(&h, &rho, 1000, 5).unwrap();
        let b = simulate_measure_prepare(&h, &rho, 1000, 5).unwrap();
        assert_eq!(a, b);
        let exact = h.apply(&rho).unwrap();
        assert!(trace_distance(a.empirical.matrix(), exact.matrix()).unwrap() < 0.2);
        let half = HolevoChannel::new(vec![(
            rho.clone(),
            ComplexMatrix::identity(3).scale_real(0.5),
        )])
        .unwrap();
        assert!(matches!(
            simulate_measure_prepare(&half, &rho, 10, 1),
            Err(Error::NotTracePreserving(_))
        ));
        assert!(simulate_measure_prepare(&h, &rho, 0, 1).is_err());
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let rho = random_density(3, 3, 1).unwrap();
        assert!(matches!(
            identity_channel(2).apply(&rho),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
