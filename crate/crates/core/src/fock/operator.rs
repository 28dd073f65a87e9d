use nalgebra::DMatrix;
use num_complex::Complex64;

use super::sector::{sector_len, sector_start, Sectors};
use crate::error::{Error, Result};

pub(crate) const UNITARITY_TOL: f64 = 1e-10;
pub(crate) const TAIL_TOL: f64 = 1e-10;

/// Dense complex matrix over a tensor-product Fock basis.
///
/// `dims` lists the photon-number cutoff of each mode; the basis index of
/// `|n₀, n₁, …⟩` is row-major in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub dims: Vec<usize>,
    pub entries: DMatrix<Complex64>,
}

impl TruncatedOperator {
    pub fn new(dims: Vec<usize>, entries: DMatrix<Complex64>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, basis has {n} states",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { dims, entries })
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self {
            dims,
            entries: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            entries: self.entries.adjoint(),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            dims,
            entries: self.entries.kronecker(&other.entries),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            dims: self.dims.clone(),
            entries: &self.entries * &other.entries,
        }
    }

    /// `max |U†U − I|`.
    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.entries)
    }

    /// `max |A − A†|`.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.entries - self.entries.adjoint()))
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.entries)
    }

    /// Density-operator checks: Hermitian to 1e-12, unit trace to 1e-10,
    /// spectrum above -1e-9.
    pub fn validate_density(&self) -> Result<()> {
        check_density(
            self.hermiticity_error(),
            self.trace(),
            || self.min_eigenvalue(),
        )
    }

    pub fn expectation(&self, vector: &nalgebra::DVector<Complex64>) -> Complex64 {
        (vector.adjoint() * &self.entries * vector)[(0, 0)]
    }
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub(crate) fn unitarity_error(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - DMatrix::<Complex64>::identity(n, n)))
}

pub(crate) fn min_hermitian_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let h = (m + m.adjoint()).scale(0.5);
    h.symmetric_eigenvalues().min()
}

pub(crate) fn check_density(
    hermiticity: f64,
    trace: Complex64,
    min_eig: impl FnOnce() -> f64,
) -> Result<()> {
    if hermiticity > 1e-12 {
        return Err(Error::Numerical(format!(
            "density matrix not Hermitian: {hermiticity:.3e}"
        )));
    }
    if (trace - 1.0).norm() > 1e-10 {
        return Err(Error::Numerical(format!("density matrix trace {trace}")));
    }
    let lo = min_eig();
    if lo < -1e-9 {
        return Err(Error::Numerical(format!(
            "density matrix has eigenvalue {lo:.3e}"
        )));
    }
    Ok(())
}

/// `exp(G)` for anti-Hermitian `G`, via the spectral decomposition of the
/// Hermitian matrix `iG`, followed by the unitarity check.
fn exp_unitary(generator: &DMatrix<Complex64>, what: &str) -> Result<DMatrix<Complex64>> {
    let i = Complex64::new(0.0, 1.0);
    let h = generator * i;
    let h = (&h + h.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let phases = eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l));
    let v = eig.eigenvectors;
    let u = &v * DMatrix::from_diagonal(&phases) * v.adjoint();
    let err = unitarity_error(&u);
    if !(err < UNITARITY_TOL) {
        return Err(Error::Numerical(format!(
            "{what}: unitarity error {err:.3e}"
        )));
    }
    Ok(u)
}

/// `exp(iS)` for the real symmetric tridiagonal `S` with zero diagonal and
/// the given off-diagonal.
fn exp_i_tridiagonal(offdiag: &[f64]) -> DMatrix<Complex64> {
    let n = offdiag.len() + 1;
    let mut s = DMatrix::<f64>::zeros(n, n);
    for (k, &v) in offdiag.iter().enumerate() {
        s[(k + 1, k)] = v;
        s[(k, k + 1)] = v;
    }
    let eig = s.symmetric_eigen();
    let v = &eig.eigenvectors;
    let scaled = |f: fn(f64) -> f64| {
        let mut m = v.clone();
        for (mut col, &l) in m.column_iter_mut().zip(eig.eigenvalues.iter()) {
            col *= f(l);
        }
        m * v.transpose()
    };
    let (re, im) = (scaled(f64::cos), scaled(f64::sin));
    DMatrix::from_fn(n, n, |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
}

/// Annihilation and creation matrices on `cutoff` levels.
pub fn ladder_ops(cutoff: usize) -> Result<(TruncatedOperator, TruncatedOperator)> {
    if cutoff < 2 {
        return Err(Error::invalid(format!("cutoff {cutoff} < 2")));
    }
    let mut a = DMatrix::<Complex64>::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let adag = a.adjoint();
    Ok((
        TruncatedOperator::new(vec![cutoff], a)?,
        TruncatedOperator::new(vec![cutoff], adag)?,
    ))
}

/// Smallest cutoff the displacement and coherent-probe code accepts for an
/// amplitude of magnitude `r`: `r² + 6r + 10`.
pub fn probe_cutoff(r: f64) -> usize {
    (r * r + 6.0 * r + 10.0).ceil() as usize
}

/// `D(α) = exp(α a† − α* a)` on `cutoff` levels.
pub fn displacement_op(alpha: Complex64, cutoff: usize) -> Result<TruncatedOperator> {
    let need = probe_cutoff(alpha.norm());
    if cutoff <= need {
        return Err(Error::UnderTruncation {
            cutoff,
            tail: f64::NAN,
            context: format!("displacement |alpha| = {} needs cutoff > {need}", alpha.norm()),
        });
    }
    let (a, adag) = ladder_ops(cutoff)?;
    let generator = adag.entries.scale(1.0) * alpha - a.entries * alpha.conj();
    let d = exp_unitary(&generator, "displacement")?;
    TruncatedOperator::new(vec![cutoff], d)
}

/// Operator that is block diagonal in the photon-number difference
/// `n₁ − n₂` of two modes sharing one cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorOperator {
    pub cutoff: usize,
    /// Block for difference `d` stored at index `d + cutoff − 1`.
    pub blocks: Vec<DMatrix<Complex64>>,
}

impl SectorOperator {
    pub fn block(&self, d: i32) -> &DMatrix<Complex64> {
        &self.blocks[(d + self.cutoff as i32 - 1) as usize]
    }

    pub fn unitarity_error(&self) -> f64 {
        self.blocks.iter().map(unitarity_error).fold(0.0, f64::max)
    }

    /// Dense matrix in the `n₁·cutoff + n₂` basis.
    pub fn to_dense(&self) -> TruncatedOperator {
        let c = self.cutoff;
        let mut m = DMatrix::<Complex64>::zeros(c * c, c * c);
        for d in Sectors::new(c) {
            let block = self.block(d);
            let s = sector_start(d);
            for i in 0..sector_len(c, d) {
                for j in 0..sector_len(c, d) {
                    let (n1, m1) = (s + i, s + j);
                    let n2 = (n1 as i32 - d) as usize;
                    let m2 = (m1 as i32 - d) as usize;
                    m[(n1 * c + n2, m1 * c + m2)] = block[(i, j)];
                }
            }
        }
        TruncatedOperator {
            dims: vec![c, c],
            entries: m,
        }
    }
}

/// `exp(r(e^{iφ} a†b† − e^{−iφ} ab))` on two modes of `cutoff` levels each.
///
/// The generator preserves `n_a − n_b`, so the exponential is taken
/// block by block.
pub fn two_mode_squeeze_op(r: f64, phase: f64, cutoff: usize) -> Result<SectorOperator> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("squeeze magnitude {r} must be >= 0")));
    }
    if cutoff < 2 {
        return Err(Error::invalid(format!("cutoff {cutoff} < 2")));
    }
    // Pair-number distribution of the squeezed vacuum: (1 − λ) λⁿ with λ = tanh²r.
    let lambda = r.tanh().powi(2);
    let tail = (1.0 - lambda) * lambda.powi(cutoff as i32 - 2) * (1.0 + lambda);
    if tail >= TAIL_TOL {
        return Err(Error::UnderTruncation {
            cutoff,
            tail,
            context: format!("two-mode squeezing r = {r}"),
        });
    }
    // Within a sector the generator is tridiagonal with entries
    // ±r e^{±iφ}√((n₁+1)(n₂+1)). Conjugating by W = diag(e^{ik(φ−π/2)})
    // maps it to iS with S real symmetric, so exp(G) = W exp(iS) W†.
    let blocks = Sectors::new(cutoff)
        .map(|d| {
            let len = sector_len(cutoff, d);
            let s = sector_start(d);
            let offdiag: Vec<f64> = (0..len.saturating_sub(1))
                .map(|k| {
                    let n1 = s + k;
                    let n2 = (n1 as i32 - d) as usize;
                    r * (((n1 + 1) * (n2 + 1)) as f64).sqrt()
                })
                .collect();
            let e = exp_i_tridiagonal(&offdiag);
            let w: Vec<Complex64> = (0..len)
                .map(|k| Complex64::from_polar(1.0, k as f64 * (phase - std::f64::consts::FRAC_PI_2)))
                .collect();
            let u = DMatrix::from_fn(len, len, |i, j| w[i] * e[(i, j)] * w[j].conj());
            let err = unitarity_error(&u);
            if !(err < UNITARITY_TOL) {
                return Err(Error::Numerical(format!(
                    "two-mode squeeze: unitarity error {err:.3e}"
                )));
            }
            Ok(u)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SectorOperator { cutoff, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ladder_elements() {
        let (a, adag) = ladder_ops(2).unwrap();
        assert_eq!(a.entries[(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(a.entries.iter().filter(|z| z.norm() > 0.0).count(), 1);
        let (a, _) = ladder_ops(3).unwrap();
        assert_abs_diff_eq!(a.entries[(1, 2)].re, 2f64.sqrt(), epsilon = 1e-15);
        let (a, adag2) = ladder_ops(6).unwrap();
        let number = &adag2.entries * &a.entries;
        for n in 0..6 {
            assert_abs_diff_eq!(number[(n, n)].re, n as f64, epsilon = 1e-14);
        }
        assert_eq!(adag.entries, ladder_ops(2).unwrap().0.entries.adjoint());
        assert!(ladder_ops(1).is_err());
    }

    #[test]
    fn displacement_properties() {
        let id = displacement_op(Complex64::new(0.0, 0.0), 12).unwrap();
        assert!(max_abs(&(id.entries - DMatrix::identity(12, 12))) < 1e-15);

        let d = displacement_op(Complex64::new(1.0, 0.0), 40).unwrap();
        assert!(d.unitarity_error() < 1e-10);
        assert_abs_diff_eq!(d.entries[(0, 0)].norm(), (-0.5f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!((-0.5f64).exp(), 0.6065, epsilon = 1e-4);

        let alpha = Complex64::new(0.7, -0.4);
        let prod = displacement_op(alpha, 40).unwrap().entries
            * displacement_op(-alpha, 40).unwrap().entries;
        assert!(max_abs(&(prod - DMatrix::identity(40, 40))) < 1e-10);

        assert!(matches!(
            displacement_op(Complex64::new(3.0, 0.0), 20),
            Err(Error::UnderTruncation { .. })
        ));
    }

    #[test]
    fn squeeze_statistics() {
        let id = two_mode_squeeze_op(0.0, 0.3, 8).unwrap();
        assert!(max_abs(&(id.to_dense().entries - DMatrix::identity(64, 64))) < 1e-15);

        // cosh²r = 2
        let r = 2f64.sqrt().acosh();
        let c = 60;
        let u = two_mode_squeeze_op(r, 0.0, c).unwrap();
        assert!(u.unitarity_error() < 1e-10);
        let col = u.block(0).column(0).into_owned();
        assert_abs_diff_eq!(col[0].norm_sqr(), 0.5, epsilon = 1e-12);
        let lambda = r.tanh().powi(2);
        for n in 0..10 {
            assert_abs_diff_eq!(
                col[n].norm_sqr(),
                lambda.powi(n as i32) / r.cosh().powi(2),
                epsilon = 1e-12
            );
        }
        // Acting on |00⟩ stays in the n₁ = n₂ sector.
        for d in Sectors::new(c).filter(|&d| d != 0) {
            assert!(u.block(d).nrows() == sector_len(c, d));
        }
    }

    #[test]
    fn squeeze_blocks_match_dense_exponential() {
        let c = 10;
        let (r, phase) = (0.2, 1.1);
        let (a, adag) = ladder_ops(c).unwrap();
        let one = TruncatedOperator::identity(vec![c]);
        let ab = a.kron(&one).mul(&one.kron(&a));
        let adag_bdag = adag.kron(&one).mul(&one.kron(&adag));
        let up = Complex64::from_polar(r, phase);
        let g = adag_bdag.entries * up - ab.entries * up.conj();
        let dense = g.exp();
        // The truncated dense generator also keeps n₁ − n₂, so both agree exactly.
        let blocked = two_mode_squeeze_op(r, phase, c).unwrap().to_dense();
        assert!(max_abs(&(dense - blocked.entries)) < 1e-12);
    }

    #[test]
    fn squeeze_rejects_small_cutoff() {
        assert!(matches!(
            two_mode_squeeze_op(1.0, 0.0, 10),
            Err(Error::UnderTruncation { .. })
        ));
        assert!(two_mode_squeeze_op(-0.1, 0.0, 10).is_err());
    }
}
