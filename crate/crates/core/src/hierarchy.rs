//! Model problems, prolongations, Galerkin coarse operators and the scaling
//! that brings every level to `||A|| = ||A_c|| = 1`.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{OperatorConstants, SparseSpd};
use crate::sparse::CsrMatrix;

/// Model problem on a uniform grid with Dirichlet boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Problem {
    /// Three-point stencil on `n` interior points.
    Poisson1d { n: usize },
    /// Five-point stencil on a `k x k` interior grid.
    Poisson2d { k: usize },
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::Poisson1d { .. } => "poisson1d",
            Problem::Poisson2d { .. } => "poisson2d",
        }
    }

    /// Grid points per dimension.
    pub fn size(&self) -> usize {
        match *self {
            Problem::Poisson1d { n } => n,
            Problem::Poisson2d { k } => k,
        }
    }

    pub fn with_size(&self, size: usize) -> Self {
        match self {
            Problem::Poisson1d { .. } => Problem::Poisson1d { n: size },
            Problem::Poisson2d { .. } => Problem::Poisson2d { k: size },
        }
    }

    pub fn matrix(&self) -> Result<SparseSpd> {
        match *self {
            Problem::Poisson1d { n } => poisson_1d(n),
            Problem::Poisson2d { k } => poisson_2d(k),
        }
    }

    fn interpolation(&self, size: usize) -> Result<CsrMatrix> {
        match self {
            Problem::Poisson1d { .. } => linear_interpolation(size),
            Problem::Poisson2d { .. } => bilinear_interpolation(size),
        }
    }
}

pub fn poisson_1d(n: usize) -> Result<SparseSpd> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "poisson_1d needs n >= 3, got {n}"
        )));
    }
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        t.push((i, i, 2.0));
        if i + 1 < n {
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -1.0));
        }
    }
    SparseSpd::new(CsrMatrix::from_triplets(n, n, t)?)
}

pub fn poisson_2d(k: usize) -> Result<SparseSpd> {
    if k < 3 {
        return Err(Error::InvalidArgument(format!(
            "poisson_2d needs k >= 3, got {k}"
        )));
    }
    let idx = |i: usize, j: usize| i * k + j;
    let mut t = Vec::with_capacity(5 * k * k);
    for i in 0..k {
        for j in 0..k {
            let p = idx(i, j);
            t.push((p, p, 4.0));
            if i + 1 < k {
                t.push((p, idx(i + 1, j), -1.0));
                t.push((idx(i + 1, j), p, -1.0));
            }
            if j + 1 < k {
                t.push((p, idx(i, j + 1), -1.0));
                t.push((idx(i, j + 1), p, -1.0));
            }
        }
    }
    SparseSpd::new(CsrMatrix::from_triplets(k * k, k * k, t)?)
}

fn coarse_size(n_fine: usize) -> Result<usize> {
    if n_fine < 3 || n_fine.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "interpolation needs an odd fine size >= 3, got {n_fine}"
        )));
    }
    Ok((n_fine - 1) / 2)
}

/// 1D linear interpolation: coarse point `j` sits on fine point `2j + 1` with
/// stencil `(1/2, 1, 1/2)^t`.
pub fn linear_interpolation(n_fine: usize) -> Result<CsrMatrix> {
    let n_c = coarse_size(n_fine)?;
    let mut t = Vec::with_capacity(3 * n_c);
    for j in 0..n_c {
        let f = 2 * j + 1;
        t.push((f - 1, j, 0.5));
        t.push((f, j, 1.0));
        t.push((f + 1, j, 0.5));
    }
    CsrMatrix::from_triplets(n_fine, n_c, t)
}

/// 2D bilinear interpolation on a `k x k` grid, the tensor product of the 1D
/// linear stencil (transpose of full weighting).
pub fn bilinear_interpolation(k_fine: usize) -> Result<CsrMatrix> {
    let p1 = linear_interpolation(k_fine)?;
    let k_c = p1.ncols();
    let mut t = Vec::new();
    for (fi, ci, vi) in p1.triplets() {
        for (fj, cj, vj) in p1.triplets() {
            t.push((fi * k_fine + fj, ci * k_c + cj, vi * vj));
        }
    }
    CsrMatrix::from_triplets(k_fine * k_fine, k_c * k_c, t)
}

/// `P^t A P` in carrier precision.
pub fn galerkin_coarse(a: &SparseSpd, p: &CsrMatrix) -> Result<SparseSpd> {
    let ap = a.matrix().matmul(p)?;
    let ac = p.transpose().matmul(&ap)?;
    // Symmetrize exactly: the two triangles of P^t (AP) can differ in the last bit.
    let sym = CsrMatrix::from_triplets(
        ac.nrows(),
        ac.ncols(),
        ac.triplets().map(|(i, j, v)| {
            let u = ac.get(j, i);
            (i, j, if i <= j { v } else { u })
        }),
    )?;
    SparseSpd::new(sym)
}

/// The coarse half of a level: prolongation, its transpose, and the Galerkin
/// coarse operator built from the scaled prolongation.
#[derive(Debug, Clone)]
pub struct Coarsening {
    pub p: CsrMatrix,
    pub pt: CsrMatrix,
    pub a_c: SparseSpd,
    pub p_consts: OperatorConstants,
    pub kappa_c: f64,
    /// Scalar applied to the unscaled prolongation.
    pub p_scale: f64,
}

/// One grid level with `||A|| = 1` and, when coarsened, `||A_c|| = 1`.
#[derive(Debug, Clone)]
pub struct GridLevel {
    pub a: SparseSpd,
    pub a_consts: OperatorConstants,
    pub kappa: f64,
    /// Scalar applied to the unscaled fine operator.
    pub a_scale: f64,
    pub coarse: Option<Coarsening>,
}

impl GridLevel {
    pub fn n(&self) -> usize {
        self.a.dim()
    }

    pub fn n_c(&self) -> Option<usize> {
        self.coarse.as_ref().map(|c| c.a_c.dim())
    }

    pub fn coarsening(&self) -> Result<&Coarsening> {
        self.coarse
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("level has no coarse grid".into()))
    }

    /// `(kappa_c / kappa)^{1/2}`.
    pub fn xi(&self) -> Option<f64> {
        self.coarse
            .as_ref()
            .map(|c| (c.kappa_c / self.kappa).sqrt())
    }

    /// Hash of every stored operator entry.
    pub fn fingerprint(&self) -> u64 {
        let mut h = self.a.matrix().fingerprint();
        if let Some(c) = &self.coarse {
            h = h.rotate_left(7) ^ c.p.fingerprint();
            h = h.rotate_left(7) ^ c.a_c.matrix().fingerprint();
        }
        h
    }

    /// A level with no coarse grid, built from an operator that is already
    /// normalized.
    fn single(a: SparseSpd, a_scale: f64) -> Result<Self> {
        let a_consts = OperatorConstants {
            m: a.matrix().max_row_nnz(),
            eta_abs: a.matrix().abs_norm(),
        };
        let kappa = a.condition_number()?;
        Ok(Self {
            a,
            a_consts,
            kappa,
            a_scale,
            coarse: None,
        })
    }

    /// Attaches `P` rescaled by a scalar so that `||P^t A P|| = 1`.
    fn coarsen(mut self, p: &CsrMatrix) -> Result<Self> {
        let unscaled = galerkin_coarse(&self.a, p)?;
        let p_scale = 1.0 / unscaled.norm()?.sqrt();
        let p = p.scaled(p_scale);
        let a_c = galerkin_coarse(&self.a, &p)?;
        let pt = p.transpose();
        // P and P^t are both applied by the cycle, so the nonzero bound must
        // cover rows and columns.
        let p_consts = OperatorConstants {
            m: p.max_row_nnz().max(p.max_col_nnz()),
            eta_abs: p.abs_norm(),
        };
        let kappa_c = a_c.condition_number()?;
        self.coarse = Some(Coarsening {
            p,
            pt,
            a_c,
            p_consts,
            kappa_c,
            p_scale,
        });
        Ok(self)
    }
}

fn normalize_operator(a: &SparseSpd) -> Result<(SparseSpd, f64)> {
    let norm = a.norm()?;
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument("operator has zero norm".into()));
    }
    let s = 1.0 / norm;
    Ok((a.scaled(s)?, s))
}

/// Scales `A` to unit norm and `P` so that the Galerkin operator has unit norm.
pub fn normalize_hierarchy(a: &SparseSpd, p: &CsrMatrix) -> Result<GridLevel> {
    if p.nrows() != a.dim() || p.ncols() >= p.nrows() || p.ncols() == 0 {
        return Err(Error::Dimension(format!(
            "prolongation {}x{} incompatible with fine size {}",
            p.nrows(),
            p.ncols(),
            a.dim()
        )));
    }
    let (a, s) = normalize_operator(a)?;
    GridLevel::single(a, s)?.coarsen(p)
}

/// Two-level hierarchy for a model problem.
pub fn two_level(problem: Problem) -> Result<GridLevel> {
    let a = problem.matrix()?;
    let p = problem.interpolation(problem.size())?;
    normalize_hierarchy(&a, &p)
}

/// Chain of `levels` grid levels, finest first; the last has no coarse grid.
/// Each level's operator is bit-for-bit the previous level's `A_c`.
pub fn build_multilevel(problem: Problem, levels: usize) -> Result<Vec<GridLevel>> {
    if levels == 0 {
        return Err(Error::InvalidArgument(
            "at least one level is required".into(),
        ));
    }
    let mut size = problem.size();
    let mut sizes = vec![size];
    for _ in 1..levels {
        if size < 3 || size.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "size {} cannot be coarsened {} times",
                problem.size(),
                levels - 1
            )));
        }
        size = (size - 1) / 2;
        sizes.push(size);
    }
    let (a0, s0) = normalize_operator(&problem.matrix()?)?;
    let mut out = Vec::with_capacity(levels);
    let mut current = GridLevel::single(a0, s0)?;
    for &fine in sizes.iter().take(levels - 1) {
        let level = current.coarsen(&problem.interpolation(fine)?)?;
        let next_a = level.coarse.as_ref().expect("just coarsened").a_c.clone();
        out.push(level);
        current = GridLevel::single(next_a, 1.0)?;
    }
    out.push(current);
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LevelManifest {
    pub n: usize,
    pub n_c: Option<usize>,
    pub kappa: f64,
    pub kappa_c: Option<f64>,
    pub m_a: usize,
    pub m_p: Option<usize>,
    pub eta_a: f64,
    pub eta_p: Option<f64>,
    pub a_scale: f64,
    pub p_scale: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HierarchyManifest {
    pub levels: Vec<LevelManifest>,
}

impl From<&GridLevel> for LevelManifest {
    fn from(l: &GridLevel) -> Self {
        let c = l.coarse.as_ref();
        LevelManifest {
            n: l.n(),
            n_c: l.n_c(),
            kappa: l.kappa,
            kappa_c: c.map(|c| c.kappa_c),
            m_a: l.a_consts.m,
            m_p: c.map(|c| c.p_consts.m),
            eta_a: l.a_consts.eta_abs,
            eta_p: c.map(|c| c.p_consts.eta_abs),
            a_scale: l.a_scale,
            p_scale: c.map(|c| c.p_scale),
        }
    }
}

/// Writes `level{i}_A.mtx`, `level{i}_P.mtx`, `level{i}_Ac.mtx` and
/// `manifest.json` into `dir`.
pub fn write_hierarchy(dir: &Path, levels: &[GridLevel]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, l) in levels.iter().enumerate() {
        let w = |name: &str| -> Result<BufWriter<File>> {
            Ok(BufWriter::new(File::create(
                dir.join(format!("level{i}_{name}.mtx")),
            )?))
        };
        l.a.matrix().write_matrix_market(w("A")?, true)?;
        if let Some(c) = &l.coarse {
            c.p.write_matrix_market(w("P")?, false)?;
            c.a_c.matrix().write_matrix_market(w("Ac")?, true)?;
        }
    }
    let manifest = HierarchyManifest {
        levels: levels.iter().map(LevelManifest::from).collect(),
    };
    serde_json::to_writer_pretty(File::create(dir.join("manifest.json"))?, &manifest)?;
    Ok(())
}

/// Reads a hierarchy written by [`write_hierarchy`]. Operators are restored
/// bit-for-bit; spectral constants are recomputed.
pub fn read_hierarchy(dir: &Path) -> Result<(HierarchyManifest, Vec<GridLevel>)> {
    let manifest: HierarchyManifest =
        serde_json::from_reader(BufReader::new(File::open(dir.join("manifest.json"))?))?;
    let read = |name: String| -> Result<CsrMatrix> {
        CsrMatrix::read_matrix_market(BufReader::new(File::open(dir.join(name))?))
    };
    let mut levels = Vec::with_capacity(manifest.levels.len());
    for (i, m) in manifest.levels.iter().enumerate() {
        let a = SparseSpd::new(read(format!("level{i}_A.mtx"))?)?;
        let mut level = GridLevel::single(a, m.a_scale)?;
        if m.n_c.is_some() {
            let p = read(format!("level{i}_P.mtx"))?;
            let a_c = SparseSpd::new(read(format!("level{i}_Ac.mtx"))?)?;
            let p_consts = OperatorConstants {
                m: p.max_row_nnz().max(p.max_col_nnz()),
                eta_abs: p.abs_norm(),
            };
            let kappa_c = a_c.condition_number()?;
            level.coarse = Some(Coarsening {
                pt: p.transpose(),
                p,
                a_c,
                p_consts,
                kappa_c,
                p_scale: m.p_scale.unwrap_or(1.0),
            });
        }
        levels.push(level);
    }
    Ok((manifest, levels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{dot, spectral_norm};
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    const CARRIER_EPS: f64 = f64::EPSILON / 2.0;

    #[test]
    fn poisson_1d_examples() {
        let a = poisson_1d(3).unwrap();
        let expect = DMatrix::from_row_slice(3, 3, &[2., -1., 0., -1., 2., -1., 0., -1., 2.]);
        assert_eq!(a.to_dense(), expect);
        let s = a.spectrum().unwrap();
        let r2 = 2f64.sqrt();
        for (got, want) in s.eigenvalues.iter().zip([2.0 - r2, 2.0, 2.0 + r2]) {
            assert!((got - want).abs() < 1e-14);
        }
        let a = poisson_1d(9).unwrap();
        let sums: Vec<f64> = (0..9)
            .map(|i| a.matrix().row(i).map(|(_, v)| v).sum())
            .collect();
        assert_eq!(sums[0], 1.0);
        assert_eq!(sums[8], 1.0);
        assert!(sums[1..8].iter().all(|&s| s == 0.0));
        assert_eq!(a.matrix().max_row_nnz(), 3);
        assert!(poisson_1d(2).is_err());
    }

    #[test]
    fn poisson_2d_examples() {
        let a = poisson_2d(3).unwrap();
        assert!(a.matrix().diag().iter().all(|&d| d == 4.0));
        assert_eq!(a.matrix().max_row_nnz(), 5);
        // closed-form Dirichlet eigenvalues 4 sin^2(i pi / 16) + 4 sin^2(j pi / 16)
        let a = poisson_2d(7).unwrap();
        let h = std::f64::consts::PI / 16.0;
        let lmax = 8.0 * (7.0 * h).sin().powi(2);
        let lmin = 8.0 * h.sin().powi(2);
        let s = a.spectrum().unwrap();
        assert!((s.lambda_max() - lmax).abs() < 1e-12);
        assert!((s.lambda_min() - lmin).abs() < 1e-12);
    }

    #[test]
    fn linear_interpolation_examples() {
        let p = linear_interpolation(3).unwrap();
        assert_eq!(
            p.to_dense(),
            DMatrix::from_column_slice(3, 1, &[0.5, 1.0, 0.5])
        );
        let p = linear_interpolation(15).unwrap();
        let pt1 = p.transpose().matvec(&[1.0; 15]).unwrap();
        assert!(pt1.iter().all(|&v| v == 2.0));
        assert_eq!(p.max_row_nnz(), 2);
        assert_eq!(p.max_col_nnz(), 3);
        let rank = linear_interpolation(7).unwrap().to_dense().rank(1e-12);
        assert_eq!(rank, 3);
        assert!(linear_interpolation(8).is_err());
    }

    #[test]
    fn bilinear_interpolation_structure() {
        let p = bilinear_interpolation(7).unwrap();
        assert_eq!((p.nrows(), p.ncols()), (49, 9));
        assert_eq!(p.max_row_nnz(), 4);
        assert_eq!(p.max_col_nnz(), 9);
        assert_eq!(p.to_dense().rank(1e-12), 9);
    }

    #[test]
    fn galerkin_examples() {
        let a = poisson_1d(5).unwrap();
        let same = galerkin_coarse(&a, &CsrMatrix::identity(5)).unwrap();
        assert_eq!(same.to_dense(), a.to_dense());
        let ac =
            galerkin_coarse(&poisson_1d(3).unwrap(), &linear_interpolation(3).unwrap()).unwrap();
        assert_eq!(ac.to_dense(), DMatrix::from_element(1, 1, 1.0));
    }

    #[test]
    fn galerkin_random_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b: DMatrix<f64> = DMatrix::from_fn(6, 6, |_, _| StandardNormal.sample(&mut rng));
        let spd: DMatrix<f64> = &b * b.transpose() + DMatrix::identity(6, 6);
        let a = SparseSpd::new(CsrMatrix::from_dense(&((&spd + spd.transpose()) * 0.5))).unwrap();
        let p = CsrMatrix::from_dense(&DMatrix::from_fn(6, 3, |_, _| {
            StandardNormal.sample(&mut rng)
        }));
        let ac = galerkin_coarse(&a, &p).unwrap();
        assert!(ac.matrix().is_symmetric(0.0));
        let dense = p.to_dense().transpose() * a.to_dense() * p.to_dense();
        assert!((ac.to_dense() - dense).norm() <= 1e-13 * ac.to_dense().norm());
    }

    #[test]
    fn normalize_examples() {
        let two_i = SparseSpd::new(CsrMatrix::diagonal(&[2.0; 3])).unwrap();
        let l = normalize_hierarchy(
            &two_i,
            &CsrMatrix::from_triplets(3, 2, [(0, 0, 1.0), (1, 1, 1.0)]).unwrap(),
        )
        .unwrap();
        assert_eq!(l.a.to_dense(), DMatrix::identity(3, 3));
        assert_eq!(
            l.coarsening().unwrap().a_c.to_dense(),
            DMatrix::identity(2, 2)
        );

        let raw = poisson_1d(7).unwrap();
        let l = two_level(Problem::Poisson1d { n: 7 }).unwrap();
        assert!((spectral_norm(&l.a.to_dense()).unwrap() - 1.0).abs() <= 10.0 * CARRIER_EPS);
        let k_raw = raw.condition_number().unwrap();
        assert!((l.kappa - k_raw).abs() <= 1e-12 * k_raw);
    }

    #[test]
    fn multilevel_sizes_and_conditioning() {
        let one = build_multilevel(Problem::Poisson1d { n: 7 }, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0].coarse.is_none());
        let two = build_multilevel(Problem::Poisson1d { n: 7 }, 2).unwrap();
        assert_eq!((two[0].n(), two[1].n()), (7, 3));
        let three = build_multilevel(Problem::Poisson1d { n: 31 }, 3).unwrap();
        assert!(three[0].kappa > three[1].kappa && three[1].kappa > three[2].kappa);
        for w in three.windows(2) {
            assert_eq!(w[0].coarsening().unwrap().a_c.matrix(), w[1].a.matrix());
        }
        assert!(build_multilevel(Problem::Poisson1d { n: 7 }, 4).is_err());
    }

    #[test]
    fn hierarchy_invariants() {
        for problem in [Problem::Poisson1d { n: 31 }, Problem::Poisson2d { k: 15 }] {
            for l in build_multilevel(problem, 3).unwrap() {
                assert!((l.a.norm().unwrap() - 1.0).abs() <= 10.0 * CARRIER_EPS);
                if let Some(c) = &l.coarse {
                    assert!((c.a_c.norm().unwrap() - 1.0).abs() <= 10.0 * CARRIER_EPS);
                    assert!(l.xi().unwrap() <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn galerkin_identity_with_scaled_prolongation() {
        let l = two_level(Problem::Poisson1d { n: 15 }).unwrap();
        let c = l.coarsening().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let wc: Vec<f64> = (0..7).map(|_| StandardNormal.sample(&mut rng)).collect();
            let lhs = dot(&c.a_c.matrix().matvec(&wc).unwrap(), &wc);
            let pw = c.p.matvec(&wc).unwrap();
            let rhs = dot(&l.a.matrix().matvec(&pw).unwrap(), &pw);
            assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs());
        }
    }

    #[test]
    fn hierarchy_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let levels = build_multilevel(Problem::Poisson1d { n: 15 }, 3).unwrap();
        write_hierarchy(dir.path(), &levels).unwrap();
        let (manifest, back) = read_hierarchy(dir.path()).unwrap();
        assert_eq!(manifest.levels.len(), 3);
        assert_eq!(manifest.levels[0].n_c, Some(7));
        assert_eq!(manifest.levels[0].m_p, Some(3));
        for (a, b) in levels.iter().zip(&back) {
            assert_eq!(a.fingerprint(), b.fingerprint());
            assert_eq!(a.kappa, b.kappa);
        }
    }
}
