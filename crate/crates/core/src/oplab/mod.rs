//! Finite sparse-operator algebra shared by the other modules.
//!
//! Everything here acts on a fixed enumerated basis (usually a Cayley ball or
//! a set of admissible states), identified by a `basis_tag`.  Operators carry
//! a *boundary mask*: the set of columns whose images were truncated by the
//! finite window.  Algebraic identities are only meaningful on unmasked
//! columns, and every consumer in this crate asserts them there only.

mod io;

pub use io::{read_matrix_market, read_matrix_market_file, write_matrix_market, write_matrix_market_file};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Default cap on the dimension of dense eigen/null-space solves.
pub const DEFAULT_DENSE_CAP: u32 = 2000;

/// Relative singular-value threshold separating "zero" from "nonzero" in
/// null-space dimension counts.
pub const NULLSPACE_REL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum OpError {
    #[error("basis tag mismatch: `{left}` vs `{right}`")]
    BasisMismatch { left: String, right: String },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },
    #[error("entry ({row}, {col}) outside a {dim}-dimensional operator")]
    IndexOutOfRange { row: u32, col: u32, dim: u32 },
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: u32, col: u32 },
    #[error("dense solve dimension {dim} exceeds the configured cap {cap}")]
    DenseCap { dim: usize, cap: usize },
    #[error("no operands supplied")]
    EmptyOperands,
    #[error("numerical failure: {msg}")]
    Numerical { msg: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A sparse complex matrix over an enumerated basis.
///
/// Entries are stored sorted by `(col, row)` with no duplicates and no
/// explicit zeros; two operators compare equal iff dimension, entries, mask
/// and tag all agree.
#[derive(Clone, PartialEq)]
pub struct SparseOperator {
    dim: u32,
    /// `(row, col, value)`, sorted by `(col, row)`.
    entries: Vec<(u32, u32, Complex64)>,
    boundary_mask: BTreeSet<u32>,
    basis_tag: String,
}

impl fmt::Debug for SparseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SparseOperator[{}] dim {} nnz {} masked {}",
            self.basis_tag,
            self.dim,
            self.entries.len(),
            self.boundary_mask.len()
        )
    }
}

impl SparseOperator {
    /// Builds an operator from `(row, col, value)` triples.  Zero values are
    /// dropped; duplicate or out-of-range coordinates are errors.
    pub fn from_triplets(
        dim: u32,
        triplets: impl IntoIterator<Item = (u32, u32, Complex64)>,
        boundary_mask: impl IntoIterator<Item = u32>,
        basis_tag: impl Into<String>,
    ) -> Result<Self, OpError> {
        let mut entries: Vec<(u32, u32, Complex64)> = Vec::new();
        for (row, col, value) in triplets {
            if row >= dim || col >= dim {
                return Err(OpError::IndexOutOfRange { row, col, dim });
            }
            if value != Complex64::ZERO {
                entries.push((row, col, value));
            }
        }
        entries.sort_by_key(|&(r, c, _)| (c, r));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(OpError::DuplicateEntry { row: w[0].0, col: w[0].1 });
            }
        }
        let mut mask = BTreeSet::new();
        for col in boundary_mask {
            if col >= dim {
                return Err(OpError::IndexOutOfRange { row: 0, col, dim });
            }
            mask.insert(col);
        }
        Ok(Self { dim, entries, boundary_mask: mask, basis_tag: basis_tag.into() })
    }

    pub fn zero(dim: u32, basis_tag: impl Into<String>) -> Self {
        Self { dim, entries: Vec::new(), boundary_mask: BTreeSet::new(), basis_tag: basis_tag.into() }
    }

    pub fn identity(dim: u32, basis_tag: impl Into<String>) -> Self {
        let entries = (0..dim).map(|i| (i, i, Complex64::ONE)).collect();
        Self { dim, entries, boundary_mask: BTreeSet::new(), basis_tag: basis_tag.into() }
    }

    /// A 0/1 operator sending basis vector `j` to `images[j]`.  Columns with
    /// `None` image are zero and recorded in the boundary mask — this is the
    /// shape of every truncated translation operator in this crate.
    pub fn basis_map(
        images: &[Option<u32>],
        basis_tag: impl Into<String>,
    ) -> Result<Self, OpError> {
        let dim = images.len() as u32;
        let mut entries = Vec::new();
        let mut mask = BTreeSet::new();
        for (col, img) in images.iter().enumerate() {
            match *img {
                Some(row) => {
                    if row >= dim {
                        return Err(OpError::IndexOutOfRange { row, col: col as u32, dim });
                    }
                    entries.push((row, col as u32, Complex64::ONE));
                }
                None => {
                    mask.insert(col as u32);
                }
            }
        }
        Ok(Self { dim, entries, boundary_mask: mask, basis_tag: basis_tag.into() })
    }

    /// Converts a dense matrix, keeping every nonzero entry.  The mask starts
    /// empty; use [`SparseOperator::with_mask`] to attach one.
    pub fn from_dense(matrix: &DMatrix<Complex64>, basis_tag: impl Into<String>) -> Result<Self, OpError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(OpError::DimensionMismatch {
                left: matrix.nrows() as u32,
                right: matrix.ncols() as u32,
            });
        }
        let dim = matrix.nrows() as u32;
        let mut entries = Vec::new();
        for col in 0..matrix.ncols() {
            for row in 0..matrix.nrows() {
                let v = matrix[(row, col)];
                if v != Complex64::ZERO {
                    entries.push((row as u32, col as u32, v));
                }
            }
        }
        Ok(Self { dim, entries, boundary_mask: BTreeSet::new(), basis_tag: basis_tag.into() })
    }

    pub fn with_mask(mut self, mask: impl IntoIterator<Item = u32>) -> Self {
        self.boundary_mask = mask.into_iter().collect();
        self
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, u32, Complex64)] {
        &self.entries
    }

    pub fn boundary_mask(&self) -> &BTreeSet<u32> {
        &self.boundary_mask
    }

    pub fn basis_tag(&self) -> &str {
        &self.basis_tag
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim as usize;
        let mut m = DMatrix::zeros(n, n);
        for &(r, c, v) in &self.entries {
            m[(r as usize, c as usize)] = v;
        }
        m
    }

    fn check_compatible(&self, other: &Self) -> Result<(), OpError> {
        if self.basis_tag != other.basis_tag {
            return Err(OpError::BasisMismatch {
                left: self.basis_tag.clone(),
                right: other.basis_tag.clone(),
            });
        }
        if self.dim != other.dim {
            return Err(OpError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    /// Entrywise sum.  The mask is the union of the operand masks.
    pub fn add(&self, other: &Self) -> Result<Self, OpError> {
        self.check_compatible(other)?;
        let mut acc: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for &(r, c, v) in self.entries.iter().chain(&other.entries) {
            *acc.entry((c, r)).or_insert(Complex64::ZERO) += v;
        }
        let entries = acc
            .into_iter()
            .filter(|&(_, v)| v != Complex64::ZERO)
            .map(|((c, r), v)| (r, c, v))
            .collect();
        Ok(Self {
            dim: self.dim,
            entries,
            boundary_mask: self.boundary_mask.union(&other.boundary_mask).copied().collect(),
            basis_tag: self.basis_tag.clone(),
        })
    }

    /// Scalar multiple; keeps the mask.
    pub fn scale(&self, scalar: Complex64) -> Self {
        let entries = if scalar == Complex64::ZERO {
            Vec::new()
        } else {
            self.entries.iter().map(|&(r, c, v)| (r, c, scalar * v)).collect()
        };
        Self {
            dim: self.dim,
            entries,
            boundary_mask: self.boundary_mask.clone(),
            basis_tag: self.basis_tag.clone(),
        }
    }

    /// Matrix product `self · other`.
    ///
    /// Mask: union of the operand masks, plus every column of `other` whose
    /// intermediate image touches a masked column of `self` — data flowing
    /// through a truncated column is itself unreliable.
    pub fn compose(&self, other: &Self) -> Result<Self, OpError> {
        self.check_compatible(other)?;
        let mut cols_of_self: BTreeMap<u32, Vec<(u32, Complex64)>> = BTreeMap::new();
        for &(r, c, v) in &self.entries {
            cols_of_self.entry(c).or_default().push((r, v));
        }
        let mut mask: BTreeSet<u32> =
            self.boundary_mask.union(&other.boundary_mask).copied().collect();
        let mut entries = Vec::new();
        let mut col_start = 0;
        while col_start < other.entries.len() {
            let col = other.entries[col_start].1;
            let mut col_end = col_start;
            while col_end < other.entries.len() && other.entries[col_end].1 == col {
                col_end += 1;
            }
            let mut acc: BTreeMap<u32, Complex64> = BTreeMap::new();
            for &(k, _, bv) in &other.entries[col_start..col_end] {
                if self.boundary_mask.contains(&k) {
                    mask.insert(col);
                }
                if let Some(col_k) = cols_of_self.get(&k) {
                    for &(i, av) in col_k {
                        *acc.entry(i).or_insert(Complex64::ZERO) += av * bv;
                    }
                }
            }
            for (r, v) in acc {
                if v != Complex64::ZERO {
                    entries.push((r, col, v));
                }
            }
            col_start = col_end;
        }
        Ok(Self { dim: self.dim, entries, boundary_mask: mask, basis_tag: self.basis_tag.clone() })
    }

    /// Conjugate transpose.  The mask is inherited unchanged: a truncated
    /// column of `A` signals missing window data, and that data is exactly
    /// what the corresponding rows of `A*` would need.
    pub fn adjoint(&self) -> Self {
        let mut entries: Vec<(u32, u32, Complex64)> =
            self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect();
        entries.sort_by_key(|&(r, c, _)| (c, r));
        Self {
            dim: self.dim,
            entries,
            boundary_mask: self.boundary_mask.clone(),
            basis_tag: self.basis_tag.clone(),
        }
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self, OpError> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        ab.add(&ba.scale(-Complex64::ONE))
    }

    /// Restricts to the principal submatrix on `keep` (sorted, deduplicated
    /// ascending).  Entries with a row or column outside `keep` are dropped;
    /// the mask is intersected and reindexed.
    pub fn restrict(&self, keep: &[u32]) -> Result<Self, OpError> {
        let mut renum: BTreeMap<u32, u32> = BTreeMap::new();
        for (new, &old) in keep.iter().enumerate() {
            if old >= self.dim {
                return Err(OpError::IndexOutOfRange { row: 0, col: old, dim: self.dim });
            }
            renum.insert(old, new as u32);
        }
        let mut entries = Vec::new();
        for &(r, c, v) in &self.entries {
            if let (Some(&nr), Some(&nc)) = (renum.get(&r), renum.get(&c)) {
                entries.push((nr, nc, v));
            }
        }
        entries.sort_by_key(|&(r, c, _)| (c, r));
        let mask = self.boundary_mask.iter().filter_map(|c| renum.get(c).copied()).collect();
        Ok(Self {
            dim: keep.len() as u32,
            entries,
            boundary_mask: mask,
            basis_tag: self.basis_tag.clone(),
        })
    }
}

/// Eigenvalues of a dense solve, sorted by `(re, im)`.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    /// Accuracy the dense solver is trusted to; downstream comparisons use it.
    pub tolerance: f64,
}

// The QR iteration behind the Schur solve stalls when many eigenvalues share
// a modulus (permutation matrices are the canonical case).  Solving a shifted
// copy M - cI breaks the tie; the shifts are fixed so results stay
// deterministic.
const SCHUR_SHIFTS: [Complex64; 3] = [
    Complex64::new(0.521_336_890_513_041, 0.377_846_205_115_681),
    Complex64::new(-0.243_890_406_612_337, 0.911_236_550_927_404),
    Complex64::new(0.104_572_352_905_866, -0.684_239_518_650_371),
];

fn dense_eigenvalues(m: &DMatrix<Complex64>) -> Option<Vec<Complex64>> {
    const EPS: f64 = 1e-13;
    const MAX_ITER: usize = 75_000;
    if let Some(v) = m.clone().try_schur(EPS, MAX_ITER).and_then(|s| s.eigenvalues()) {
        return Some(v.iter().copied().collect());
    }
    let identity = DMatrix::<Complex64>::identity(m.nrows(), m.ncols());
    for shift in SCHUR_SHIFTS {
        let shifted = m - &identity * shift;
        if let Some(v) = shifted.try_schur(EPS, MAX_ITER).and_then(|s| s.eigenvalues()) {
            return Some(v.iter().map(|e| e + shift).collect());
        }
    }
    None
}

/// Full eigenvalue multiset of the operator via a dense solve.
pub fn spectrum(op: &SparseOperator, dense_cap: u32) -> Result<SpectrumReport, OpError> {
    if op.dim > dense_cap {
        return Err(OpError::DenseCap { dim: op.dim as usize, cap: dense_cap as usize });
    }
    let mut eigenvalues = if op.dim == 0 {
        Vec::new()
    } else {
        match dense_eigenvalues(&op.to_dense()) {
            Some(v) => v,
            None => {
                return Err(OpError::Numerical {
                    msg: "Schur iteration did not converge".into(),
                })
            }
        }
    };
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(SpectrumReport { eigenvalues, tolerance: 1e-9 })
}

/// Result of a commutant-dimension estimate.
#[derive(Debug, Clone)]
pub struct CommutantReport {
    /// Dimension of `{X : [G, X] = 0 for all generators}` on the joint
    /// unmasked block.
    pub dimension: usize,
    /// Size of the basis after dropping all masked columns.
    pub restricted_dim: u32,
    /// Relative singular-value threshold used to count the null space.
    pub tolerance: f64,
    /// Smallest singular value counted as nonzero, if any.
    pub smallest_retained: Option<f64>,
    /// Largest singular value counted as zero, if any.
    pub largest_discarded: Option<f64>,
}

impl fmt::Display for CommutantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "commutant dimension {} on {} unmasked basis vectors (rel tol {:e}",
            self.dimension, self.restricted_dim, self.tolerance
        )?;
        if let Some(s) = self.smallest_retained {
            write!(f, ", retained >= {s:.3e}")?;
        }
        if let Some(s) = self.largest_discarded {
            write!(f, ", discarded <= {s:.3e}")?;
        }
        write!(f, ")")
    }
}

/// Estimates the dimension of the joint commutant of `generators`.
///
/// All generators are first restricted to the columns none of them masks.
/// On that block, `[G, X] = 0` is the linear system
/// `(I ⊗ G − Gᵗ ⊗ I) vec(X) = 0`; the systems are stacked and the null-space
/// dimension is read off the singular values with a relative threshold.
/// The solve is dense in `m²` unknowns (`m` = restricted dimension), so the
/// cap applies to `m²`.
pub fn commutant_dim_estimate(
    generators: &[SparseOperator],
    dense_cap: u32,
) -> Result<CommutantReport, OpError> {
    let first = generators.first().ok_or(OpError::EmptyOperands)?;
    for g in &generators[1..] {
        first.check_compatible(g)?;
    }
    let mut masked: BTreeSet<u32> = BTreeSet::new();
    for g in generators {
        masked.extend(g.boundary_mask.iter().copied());
    }
    let keep: Vec<u32> = (0..first.dim).filter(|i| !masked.contains(i)).collect();
    let m = keep.len();
    if m * m > dense_cap as usize {
        return Err(OpError::DenseCap { dim: m * m, cap: dense_cap as usize });
    }
    if m == 0 {
        return Ok(CommutantReport {
            dimension: 0,
            restricted_dim: 0,
            tolerance: NULLSPACE_REL_TOL,
            smallest_retained: None,
            largest_discarded: None,
        });
    }
    let eye = DMatrix::<Complex64>::identity(m, m);
    let mut stacked = DMatrix::<Complex64>::zeros(generators.len() * m * m, m * m);
    for (gi, g) in generators.iter().enumerate() {
        let dense = g.restrict(&keep)?.to_dense();
        let block = eye.kronecker(&dense) - dense.transpose().kronecker(&eye);
        stacked.view_mut((gi * m * m, 0), (m * m, m * m)).copy_from(&block);
    }
    let svd = stacked.svd(false, false);
    let mut sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    let cutoff = sigma.first().copied().unwrap_or(0.0) * NULLSPACE_REL_TOL;
    let retained = sigma.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
    Ok(CommutantReport {
        dimension: m * m - retained,
        restricted_dim: m as u32,
        tolerance: NULLSPACE_REL_TOL,
        smallest_retained: (retained > 0).then(|| sigma[retained - 1]),
        largest_discarded: (retained < sigma.len()).then(|| sigma[retained]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_op(rng: &mut ChaCha8Rng, dim: u32, tag: &str) -> SparseOperator {
        let mut triplets = Vec::new();
        for col in 0..dim {
            for row in 0..dim {
                if rng.random_range(0..3) == 0 {
                    // Small integer parts keep float arithmetic exact.
                    let v = c(rng.random_range(-4..5) as f64, rng.random_range(-4..5) as f64);
                    triplets.push((row, col, v));
                }
            }
        }
        SparseOperator::from_triplets(dim, triplets, [], tag).unwrap()
    }

    #[test]
    fn commutator_with_self_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_op(&mut rng, 6, "t");
        let z = a.commutator(&a).unwrap();
        assert_eq!(z.entries(), &[]);
    }

    #[test]
    fn adjoint_is_an_involution_and_antihomomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let a = random_op(&mut rng, 5, "t");
            let b = random_op(&mut rng, 5, "t");
            assert_eq!(a.adjoint().adjoint(), a);
            // (AB)* = B*A*, exact on integer-valued entries.
            let lhs = a.compose(&b).unwrap().adjoint();
            let rhs = b.adjoint().compose(&a.adjoint()).unwrap();
            assert_eq!(lhs.entries(), rhs.entries());
        }
    }

    #[test]
    fn commutator_is_antisymmetric_and_bilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_op(&mut rng, 5, "t");
        let b = random_op(&mut rng, 5, "t");
        let d = random_op(&mut rng, 5, "t");
        let ab = a.commutator(&b).unwrap();
        let ba = b.commutator(&a).unwrap();
        assert_eq!(ab.entries(), ba.scale(-Complex64::ONE).entries());
        // [a + d, b] = [a,b] + [d,b]
        let lhs = a.add(&d).unwrap().commutator(&b).unwrap();
        let rhs = ab.add(&d.commutator(&b).unwrap()).unwrap();
        assert_eq!(lhs.entries(), rhs.entries());
        // [2a, b] = 2[a,b]
        let two = c(2.0, 0.0);
        let lhs = a.scale(two).commutator(&b).unwrap();
        assert_eq!(lhs.entries(), ab.scale(two).entries());
    }

    #[test]
    fn mismatched_operands_are_rejected() {
        let a = SparseOperator::identity(3, "x");
        let b = SparseOperator::identity(3, "y");
        assert!(matches!(a.add(&b), Err(OpError::BasisMismatch { .. })));
        let d = SparseOperator::identity(4, "x");
        assert!(matches!(a.compose(&d), Err(OpError::DimensionMismatch { .. })));
    }

    #[test]
    fn from_triplets_validates() {
        let dup = SparseOperator::from_triplets(
            2,
            [(0, 0, Complex64::ONE), (0, 0, Complex64::ONE)],
            [],
            "t",
        );
        assert!(matches!(dup, Err(OpError::DuplicateEntry { row: 0, col: 0 })));
        let oob = SparseOperator::from_triplets(2, [(2, 0, Complex64::ONE)], [], "t");
        assert!(matches!(oob, Err(OpError::IndexOutOfRange { .. })));
        // Explicit zeros are dropped rather than stored.
        let z = SparseOperator::from_triplets(2, [(1, 0, Complex64::ZERO)], [], "t").unwrap();
        assert_eq!(z.nnz(), 0);
    }

    #[test]
    fn compose_masks_columns_routed_through_truncation() {
        // A masks column 1; B sends column 0 into basis vector 1, so the
        // composite column 0 depends on truncated data.
        let a = SparseOperator::from_triplets(3, [(0, 0, Complex64::ONE)], [1], "t").unwrap();
        let b = SparseOperator::from_triplets(
            3,
            [(1, 0, Complex64::ONE), (2, 2, Complex64::ONE)],
            [],
            "t",
        )
        .unwrap();
        let ab = a.compose(&b).unwrap();
        assert!(ab.boundary_mask().contains(&0));
        assert!(ab.boundary_mask().contains(&1));
        assert!(!ab.boundary_mask().contains(&2));
    }

    #[test]
    fn spectrum_of_identity_is_all_ones() {
        let report = spectrum(&SparseOperator::identity(5, "t"), 100).unwrap();
        assert_eq!(report.eigenvalues.len(), 5);
        for e in &report.eigenvalues {
            assert!((e - Complex64::ONE).norm() < 1e-9);
        }
    }

    #[test]
    fn spectrum_of_truncated_shift_is_zero() {
        // The shift on a path basis e_0 -> e_1 -> ... -> e_4 -> 0 is strictly
        // triangular, so every eigenvalue vanishes.
        let images = [Some(1), Some(2), Some(3), Some(4), None];
        let shift = SparseOperator::basis_map(&images, "path").unwrap();
        let report = spectrum(&shift, 100).unwrap();
        assert_eq!(report.eigenvalues.len(), 5);
        for e in &report.eigenvalues {
            // A defective eigenvalue of multiplicity k is only determined to
            // roughly eps^(1/k) by floating-point solves; for k = 5 that is
            // about 1e-3.  The 1e-9 report applies to normal operators.
            assert!(e.norm() < 1e-3, "expected 0, got {e}");
        }
    }

    #[test]
    fn spectrum_of_a_cycle_is_roots_of_unity() {
        // Even orders drive the plain QR iteration into a limit cycle and
        // exercise the shifted retry; odd orders converge directly.
        for k in [7usize, 12] {
            let images: Vec<Option<u32>> = (0..k).map(|j| Some(((j + 1) % k) as u32)).collect();
            let cycle = SparseOperator::basis_map(&images, "cycle").unwrap();
            let report = spectrum(&cycle, 100).unwrap();
            let expected: Vec<Complex64> = (0..k)
                .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / k as f64))
                .collect();
            // Roots are > 0.5 apart, so nearest-match within 1e-9 both ways
            // pins down the multiset without relying on tie-broken sorting.
            assert_eq!(report.eigenvalues.len(), k);
            for want in &expected {
                let d = report.eigenvalues.iter().map(|e| (e - want).norm()).fold(f64::INFINITY, f64::min);
                assert!(d < 1e-9, "order {k}: no eigenvalue near {want}");
            }
            for got in &report.eigenvalues {
                let d = expected.iter().map(|e| (got - e).norm()).fold(f64::INFINITY, f64::min);
                assert!(d < 1e-9, "order {k}: stray eigenvalue {got}");
            }
        }
    }

    #[test]
    fn spectrum_of_hermitian_operator_is_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let a = random_op(&mut rng, 8, "t");
        let h = a.add(&a.adjoint()).unwrap();
        let report = spectrum(&h, 100).unwrap();
        for e in &report.eigenvalues {
            assert!(e.im.abs() < 1e-9);
        }
    }

    #[test]
    fn spectrum_respects_the_dense_cap() {
        let op = SparseOperator::identity(10, "t");
        assert!(matches!(spectrum(&op, 5), Err(OpError::DenseCap { dim: 10, cap: 5 })));
    }

    #[test]
    fn commutant_of_matrix_units_is_scalars() {
        let n = 3u32;
        let mut gens = Vec::new();
        for i in 0..n {
            for j in 0..n {
                gens.push(
                    SparseOperator::from_triplets(n, [(i, j, Complex64::ONE)], [], "t").unwrap(),
                );
            }
        }
        let report = commutant_dim_estimate(&gens, DEFAULT_DENSE_CAP).unwrap();
        assert_eq!(report.dimension, 1);
        assert_eq!(report.restricted_dim, 3);
    }

    #[test]
    fn commutant_of_identity_is_everything() {
        let gens = [SparseOperator::identity(4, "t")];
        let report = commutant_dim_estimate(&gens, DEFAULT_DENSE_CAP).unwrap();
        assert_eq!(report.dimension, 16);
    }

    #[test]
    fn commutant_of_distinct_diagonal_is_the_diagonals() {
        let n = 4u32;
        let triplets = (0..n).map(|i| (i, i, c(1.0 + i as f64, 0.0)));
        let d = SparseOperator::from_triplets(n, triplets, [], "t").unwrap();
        let report = commutant_dim_estimate(&[d], DEFAULT_DENSE_CAP).unwrap();
        assert_eq!(report.dimension, 4);
        let (lo, hi) = (report.largest_discarded.unwrap(), report.smallest_retained.unwrap());
        assert!(lo < 1e-10 && hi > 0.5, "poor singular-value gap: {lo} vs {hi}");
    }

    #[test]
    fn commutant_restricts_to_unmasked_columns() {
        // diag(1, 2, 3) with column 2 masked behaves like diag(1, 2).
        let d = SparseOperator::from_triplets(
            3,
            [(0, 0, c(1.0, 0.0)), (1, 1, c(2.0, 0.0)), (2, 2, c(3.0, 0.0))],
            [2],
            "t",
        )
        .unwrap();
        let report = commutant_dim_estimate(&[d], DEFAULT_DENSE_CAP).unwrap();
        assert_eq!(report.restricted_dim, 2);
        assert_eq!(report.dimension, 2);
    }

    #[test]
    fn commutant_dimension_is_unitarily_invariant() {
        // Conjugating every generator by one unitary must not move the
        // estimate.  The unitary comes from a QR factorization of a random
        // complex matrix.
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let n = 4usize;
        let m = DMatrix::from_fn(n, n, |_, _| {
            c(rng.random_range(-100..100) as f64 / 32.0, rng.random_range(-100..100) as f64 / 32.0)
        });
        let q = m.qr().q();
        let gens: Vec<SparseOperator> = (0..2).map(|_| random_op(&mut rng, n as u32, "t")).collect();
        let base = commutant_dim_estimate(&gens, DEFAULT_DENSE_CAP).unwrap();
        let conj: Vec<SparseOperator> = gens
            .iter()
            .map(|g| {
                let dense = q.adjoint() * g.to_dense() * &q;
                SparseOperator::from_dense(&dense, "t").unwrap()
            })
            .collect();
        let moved = commutant_dim_estimate(&conj, DEFAULT_DENSE_CAP).unwrap();
        assert_eq!(base.dimension, moved.dimension);
    }

    #[test]
    fn commutant_cap_counts_squared_dimension() {
        let gens = [SparseOperator::identity(10, "t")];
        assert!(matches!(
            commutant_dim_estimate(&gens, 99),
            Err(OpError::DenseCap { dim: 100, cap: 99 })
        ));
    }
}
