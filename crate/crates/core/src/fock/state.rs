use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::operator::{check_density, min_hermitian_eigenvalue, SectorOperator, TruncatedOperator, TAIL_TOL};
use super::sector::{second, sector_len, sector_start, Sectors};
use crate::error::{Error, Result};

/// Density operator of the two optical modes, stored as blocks
/// `ρ[d, d']` between photon-number-difference sectors.
///
/// Missing blocks are zero. States produced by the protocol only populate
/// `d == d'`, which keeps memory cubic in the cutoff instead of quartic.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    cutoff: usize,
    blocks: BTreeMap<(i32, i32), DMatrix<Complex64>>,
}

impl TwoModeState {
    pub fn zero(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::invalid(format!("cutoff {cutoff} < 2")));
        }
        Ok(Self {
            cutoff,
            blocks: BTreeMap::new(),
        })
    }

    /// `|0,0⟩⟨0,0|`.
    pub fn vacuum(cutoff: usize) -> Result<Self> {
        let mut s = Self::zero(cutoff)?;
        s.block_mut(0, 0)[(0, 0)] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// `ρ_a ⊗ ρ_b` for single-mode operators of equal cutoff.
    pub fn product(a: &TruncatedOperator, b: &TruncatedOperator) -> Result<Self> {
        let c = a.dim();
        if a.dims.len() != 1 || b.dims.len() != 1 || b.dim() != c {
            return Err(Error::invalid("product needs two single-mode operators of equal cutoff"));
        }
        let mut s = Self::zero(c)?;
        let nonzero = |m: &DMatrix<Complex64>| {
            let mut v = Vec::new();
            for j in 0..c {
                for i in 0..c {
                    if m[(i, j)] != Complex64::new(0.0, 0.0) {
                        v.push((i, j, m[(i, j)]));
                    }
                }
            }
            v
        };
        let (na, nb) = (nonzero(&a.entries), nonzero(&b.entries));
        for &(n1, m1, va) in &na {
            for &(n2, m2, vb) in &nb {
                s.add(n1, n2, m1, m2, va * vb);
            }
        }
        Ok(s)
    }

    /// From a dense matrix in the `n₁·cutoff + n₂` basis.
    pub fn from_dense(cutoff: usize, rho: &DMatrix<Complex64>) -> Result<Self> {
        if rho.nrows() != cutoff * cutoff || rho.ncols() != cutoff * cutoff {
            return Err(Error::invalid("dense matrix does not match cutoff"));
        }
        let mut s = Self::zero(cutoff)?;
        for row in 0..cutoff * cutoff {
            for col in 0..cutoff * cutoff {
                let v = rho[(row, col)];
                if v != Complex64::new(0.0, 0.0) {
                    s.add(row / cutoff, row % cutoff, col / cutoff, col % cutoff, v);
                }
            }
        }
        Ok(s)
    }

    pub fn to_dense(&self) -> TruncatedOperator {
        let c = self.cutoff;
        let mut m = DMatrix::<Complex64>::zeros(c * c, c * c);
        self.for_each(|n1, n2, m1, m2, v| m[(n1 * c + n2, m1 * c + m2)] = v);
        TruncatedOperator {
            dims: vec![c, c],
            entries: m,
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(i32, i32), &DMatrix<Complex64>)> {
        self.blocks.iter()
    }

    /// True when only blocks with equal photon-number difference are present.
    pub fn is_sector_diagonal(&self) -> bool {
        self.blocks
            .iter()
            .all(|(&(d, e), b)| d == e || b.iter().all(|z| z.norm() == 0.0))
    }

    fn block_mut(&mut self, d: i32, e: i32) -> &mut DMatrix<Complex64> {
        let c = self.cutoff;
        self.blocks
            .entry((d, e))
            .or_insert_with(|| DMatrix::zeros(sector_len(c, d), sector_len(c, e)))
    }

    fn add(&mut self, n1: usize, n2: usize, m1: usize, m2: usize, v: Complex64) {
        let (d, e) = (n1 as i32 - n2 as i32, m1 as i32 - m2 as i32);
        let (i, j) = (n1 - sector_start(d), m1 - sector_start(e));
        self.block_mut(d, e)[(i, j)] += v;
    }

    fn for_each(&self, mut f: impl FnMut(usize, usize, usize, usize, Complex64)) {
        for (&(d, e), b) in &self.blocks {
            let (sd, se) = (sector_start(d), sector_start(e));
            for j in 0..b.ncols() {
                for i in 0..b.nrows() {
                    let (n1, m1) = (sd + i, se + j);
                    f(n1, second(n1, d), m1, second(m1, e), b[(i, j)]);
                }
            }
        }
    }

    /// `⟨n₁,n₂|ρ|m₁,m₂⟩`.
    pub fn element(&self, n1: usize, n2: usize, m1: usize, m2: usize) -> Complex64 {
        let c = self.cutoff;
        if n1 >= c || n2 >= c || m1 >= c || m2 >= c {
            return Complex64::new(0.0, 0.0);
        }
        let (d, e) = (n1 as i32 - n2 as i32, m1 as i32 - m2 as i32);
        self.blocks
            .get(&(d, e))
            .map_or(Complex64::new(0.0, 0.0), |b| {
                b[(n1 - sector_start(d), m1 - sector_start(e))]
            })
    }

    pub fn trace(&self) -> Complex64 {
        self.blocks
            .iter()
            .filter(|((d, e), _)| d == e)
            .map(|(_, b)| b.trace())
            .sum()
    }

    /// Joint photon-number distribution `P(n₁, n₂)`.
    pub fn populations(&self) -> DMatrix<f64> {
        let c = self.cutoff;
        let mut p = DMatrix::zeros(c, c);
        for d in Sectors::new(c) {
            if let Some(b) = self.blocks.get(&(d, d)) {
                for i in 0..b.nrows() {
                    let n1 = sector_start(d) + i;
                    p[(n1, second(n1, d))] = b[(i, i)].re;
                }
            }
        }
        p
    }

    /// Photon-number distribution of one mode.
    pub fn marginal(&self, mode: usize) -> Result<Vec<f64>> {
        check_mode(mode)?;
        let p = self.populations();
        Ok((0..self.cutoff)
            .map(|n| match mode {
                0 => p.row(n).sum(),
                _ => p.column(n).sum(),
            })
            .collect())
    }

    /// Reduced density matrix of one mode.
    pub fn reduced(&self, mode: usize) -> Result<TruncatedOperator> {
        check_mode(mode)?;
        let c = self.cutoff;
        let mut r = DMatrix::<Complex64>::zeros(c, c);
        self.for_each(|n1, n2, m1, m2, v| match mode {
            0 if n2 == m2 => r[(n1, m1)] += v,
            1 if n1 == m1 => r[(n2, m2)] += v,
            _ => {}
        });
        TruncatedOperator::new(vec![c], r)
    }

    /// Largest population held by the top two Fock levels of either mode.
    pub fn tail_mass(&self) -> f64 {
        let c = self.cutoff;
        [0, 1]
            .into_iter()
            .map(|mode| {
                let m = self.marginal(mode).expect("mode index is valid");
                m[c - 1] + m[c - 2]
            })
            .fold(0.0, f64::max)
    }

    pub fn check_tail(&self, context: &str) -> Result<()> {
        let tail = self.tail_mass();
        if !(tail < TAIL_TOL) {
            return Err(Error::UnderTruncation {
                cutoff: self.cutoff,
                tail,
                context: context.to_owned(),
            });
        }
        Ok(())
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (&(d, e), b) in &self.blocks {
            let mirror = self.blocks.get(&(e, d));
            for j in 0..b.ncols() {
                for i in 0..b.nrows() {
                    let other = mirror.map_or(Complex64::new(0.0, 0.0), |m| m[(j, i)].conj());
                    worst = worst.max((b[(i, j)] - other).norm());
                }
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if !self.is_sector_diagonal() {
            return self.to_dense().min_eigenvalue();
        }
        let diagonal = self.blocks.iter().filter(|((d, e), _)| d == e);
        // An absent diagonal block contributes zero eigenvalues.
        let init = if diagonal.clone().count() < 2 * self.cutoff - 1 {
            0.0
        } else {
            f64::INFINITY
        };
        diagonal
            .map(|(_, b)| min_hermitian_eigenvalue(b))
            .fold(init, f64::min)
    }

    /// Density-operator invariants plus the truncation tail check.
    pub fn validate(&self) -> Result<()> {
        check_density(self.hermiticity_error(), self.trace(), || self.min_eigenvalue())?;
        self.check_tail("state validation")
    }

    /// `max |ρ − σ|` over all matrix elements.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if other.cutoff != self.cutoff {
            return Err(Error::invalid("states have different cutoffs"));
        }
        let mut worst: f64 = 0.0;
        let keys: std::collections::BTreeSet<_> =
            self.blocks.keys().chain(other.blocks.keys()).copied().collect();
        for k in keys {
            match (self.blocks.get(&k), other.blocks.get(&k)) {
                (Some(a), Some(b)) => worst = worst.max(super::operator::max_abs(&(a - b))),
                (Some(a), None) | (None, Some(a)) => worst = worst.max(super::operator::max_abs(a)),
                (None, None) => {}
            }
        }
        Ok(worst)
    }

    /// Copy at a different cutoff. Growing pads with zeros; shrinking fails
    /// if any discarded element is nonzero.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<Self> {
        let mut s = Self::zero(cutoff)?;
        let mut lost = false;
        self.for_each(|n1, n2, m1, m2, v| {
            if n1.max(n2).max(m1).max(m2) < cutoff {
                if v != Complex64::new(0.0, 0.0) {
                    s.add(n1, n2, m1, m2, v);
                }
            } else if v != Complex64::new(0.0, 0.0) {
                lost = true;
            }
        });
        if lost {
            return Err(Error::UnderTruncation {
                cutoff,
                tail: f64::NAN,
                context: "shrinking cutoff would drop nonzero elements".into(),
            });
        }
        Ok(s)
    }

    /// `U ρ U†` for a sector-block-diagonal `U`.
    pub fn conjugate_by(&self, u: &SectorOperator) -> Result<Self> {
        if u.cutoff != self.cutoff {
            return Err(Error::invalid("operator and state cutoffs differ"));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|(&(d, e), b)| ((d, e), u.block(d) * b * u.block(e).adjoint()))
            .collect();
        Ok(Self {
            cutoff: self.cutoff,
            blocks,
        })
    }

    /// Keeps only the blocks with equal photon-number difference, i.e. the
    /// average of `U_φ ρ U_φ†` over a uniform phase.
    pub fn phase_averaged(&self) -> Self {
        Self {
            cutoff: self.cutoff,
            blocks: self
                .blocks
                .iter()
                .filter(|((d, e), _)| d == e)
                .map(|(k, b)| (*k, b.clone()))
                .collect(),
        }
    }

    /// Expectation of `|ψ⟩⟨ψ|` for a product vector `ψ = u ⊗ v`, where `u`
    /// and `v` are given by their Fock amplitudes.
    pub(crate) fn product_expectation(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (&(d, e), b) in &self.blocks {
            let amp = |k: i32, i: usize| {
                let n1 = sector_start(k) + i;
                u[n1] * v[second(n1, k)]
            };
            for j in 0..b.ncols() {
                let right = amp(e, j);
                for i in 0..b.nrows() {
                    total += amp(d, i).conj() * b[(i, j)] * right;
                }
            }
        }
        total
    }
}

fn check_mode(mode: usize) -> Result<()> {
    if mode > 1 {
        return Err(Error::invalid(format!("mode index {mode} not in {{0, 1}}")));
    }
    Ok(())
}

/// Applies `e^{iφ n₁} ⊗ e^{−iφ n₂}`.
pub fn phase_rotate(state: &TwoModeState, phi: f64) -> TwoModeState {
    TwoModeState {
        cutoff: state.cutoff,
        blocks: state
            .blocks
            .iter()
            .map(|(&(d, e), b)| ((d, e), b * Complex64::from_polar(1.0, phi * f64::from(d - e))))
            .collect(),
    }
}

/// Thermal single-mode state of mean occupation `n0`, renormalized over
/// `cutoff` levels.
pub fn thermal_state(n0: f64, cutoff: usize) -> Result<TruncatedOperator> {
    if !(n0 >= 0.0 && n0.is_finite()) {
        return Err(Error::invalid(format!("mean occupation {n0} must be >= 0")));
    }
    if cutoff < 2 {
        return Err(Error::invalid(format!("cutoff {cutoff} < 2")));
    }
    let ratio = n0 / (1.0 + n0);
    let weights: Vec<f64> = (0..cutoff)
        .map(|n| ratio.powi(n as i32) / (1.0 + n0))
        .collect();
    let tail = weights[cutoff - 1] + weights[cutoff - 2];
    if tail >= TAIL_TOL {
        return Err(Error::UnderTruncation {
            cutoff,
            tail,
            context: format!("thermal state n0 = {n0}"),
        });
    }
    let norm: f64 = weights.iter().sum();
    let diag = nalgebra::DVector::from_iterator(
        cutoff,
        weights.iter().map(|w| Complex64::new(w / norm, 0.0)),
    );
    TruncatedOperator::new(vec![cutoff], DMatrix::from_diagonal(&diag))
}

/// `ln n!` for `n < len`.
fn ln_factorials(len: usize) -> Vec<f64> {
    let mut t = vec![0.0; len.max(1)];
    for n in 1..len {
        t[n] = t[n - 1] + (n as f64).ln();
    }
    t
}

/// Kraus amplitudes `A[k][n] = √C(n,k) (√t e^{iφ})^{n−k} (√(1−t))^k` of the
/// pure-loss channel, taking `A_k |n⟩ = A[k][n] |n − k⟩`.
fn kraus_amplitudes(cutoff: usize, t: f64, phase: f64) -> Vec<Vec<Complex64>> {
    let lf = ln_factorials(cutoff);
    let (keep, drop) = (t.sqrt(), (1.0 - t).sqrt());
    let rot = Complex64::from_polar(1.0, phase);
    (0..cutoff)
        .map(|k| {
            (0..cutoff)
                .map(|n| {
                    if n < k {
                        return Complex64::new(0.0, 0.0);
                    }
                    let binom = (0.5 * (lf[n] - lf[k] - lf[n - k])).exp();
                    let mag = binom * keep.powi((n - k) as i32) * drop.powi(k as i32);
                    rot.powi((n - k) as i32) * mag
                })
                .collect()
        })
        .collect()
}

/// Pure-loss channel on `mode`: the field amplitude is multiplied by
/// `√transmissivity · e^{i·phase}` and the lost quanta are traced out.
pub fn loss_channel(
    state: &TwoModeState,
    mode: usize,
    transmissivity: f64,
    phase: f64,
) -> Result<TwoModeState> {
    check_mode(mode)?;
    if !(0.0..=1.0).contains(&transmissivity) {
        return Err(Error::invalid(format!(
            "transmissivity {transmissivity} outside [0, 1]"
        )));
    }
    let c = state.cutoff;
    let kraus = kraus_amplitudes(c, transmissivity, phase);
    // Losing k quanta from mode 0 shifts both sectors by −k; from mode 1 by +k.
    let shift = if mode == 0 { -1 } else { 1 };
    // Photon number of the lossy mode at local index i of sector d is base(d) + i.
    let base = |d: i32| if mode == 0 { sector_start(d) } else { second(sector_start(d), d) };
    let mut out = TwoModeState::zero(c)?;
    for (&(d, e), b) in &state.blocks {
        let (rows, cols) = (b.nrows(), b.ncols());
        let (bd, be) = (base(d), base(e));
        let reach = (bd + rows - 1).min(be + cols - 1);
        for (k, amps) in kraus.iter().enumerate().take(reach + 1) {
            let (dk, ek) = (d + shift * k as i32, e + shift * k as i32);
            // Local index in the target sector is i + sector_start(d) − sector_start(dk),
            // less k when mode 0 loses the quanta.
            let moved = if mode == 0 { k as isize } else { 0 };
            let off_d = sector_start(d) as isize - moved - sector_start(dk) as isize;
            let off_e = sector_start(e) as isize - moved - sector_start(ek) as isize;
            let tgt = out.block_mut(dk, ek);
            for j in k.saturating_sub(be)..cols {
                let wm = amps[be + j].conj();
                let jk = (j as isize + off_e) as usize;
                let mut dst = tgt.column_mut(jk);
                let src = b.column(j);
                for i in k.saturating_sub(bd)..rows {
                    dst[(i as isize + off_d) as usize] += src[i] * amps[bd + i] * wm;
                }
            }
        }
    }
    Ok(out)
}
