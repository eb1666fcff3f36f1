//! Relaxation operators, coarse solvers, the reduced-precision two-grid cycle
//! with per-step error instrumentation, and recursive V-cycles.
//!
//! The two-grid cycle starts from a zero guess and runs, in order:
//! quantize `r`; `y_mu = M r`; `r_mu = A y_mu - r`; `r_c = P^t r_mu`;
//! `d_c = B_c A_c^{-1} r_c` (carrier precision); `d = P d_c`;
//! `y_nu = y_mu - d`; `r_nu = A y_nu - r`; `r_N = N r_nu`; `y = y_nu - r_N`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::{NormKind, PerLineBounds, ProofStep};
use crate::error::{check_len, Error, Result};
use crate::hierarchy::GridLevel;
use crate::linops::{norm2, operator_norm, spectral_norm, sub, SparseSpd};
use crate::precision::{
    quantize_vector, rounded_add_sub, rounded_diag_scale, rounded_matvec, rounded_residual,
    PrecisionFormat, Sign,
};

/// Diagonal stationary iteration `x <- x - M (A x - b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Smoother {
    /// `M = omega D^{-1}`.
    Jacobi { omega: f64 },
    /// `M = omega I`.
    Richardson { omega: f64 },
}

impl Smoother {
    pub fn label(&self) -> String {
        match self {
            Smoother::Jacobi { omega } => format!("jacobi({omega})"),
            Smoother::Richardson { omega } => format!("richardson({omega})"),
        }
    }
}

/// A relaxation operator together with the constants the bounds need.
#[derive(Debug, Clone)]
pub struct RelaxationOp {
    pub smoother: Smoother,
    diag: Vec<f64>,
    /// `||M||`.
    pub eta: f64,
    /// `||M||_A`.
    pub eta_energy: f64,
    /// Rounding constant for the format given at construction: computing
    /// `M z` yields an error of at most `alpha * eps * ||z||`.
    pub alpha: f64,
    /// `||I - M A||_A`.
    pub contraction: f64,
}

impl RelaxationOp {
    pub fn new(a: &SparseSpd, smoother: Smoother, fmt: PrecisionFormat) -> Result<Self> {
        let diag: Vec<f64> = match smoother {
            Smoother::Jacobi { omega } => a
                .matrix()
                .diag()
                .iter()
                .map(|&d| {
                    if d > 0.0 {
                        Ok(omega / d)
                    } else {
                        Err(Error::NotSpd(format!("nonpositive diagonal entry {d}")))
                    }
                })
                .collect::<Result<_>>()?,
            Smoother::Richardson { omega } => vec![omega; a.dim()],
        };
        let omega = match smoother {
            Smoother::Jacobi { omega } | Smoother::Richardson { omega } => omega,
        };
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "omega must be positive, got {omega}"
            )));
        }
        let eta = diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let half = a.sqrt_dense()?;
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&diag));
        let n = a.dim();
        let sym = &half * &m * &half;
        let contraction = spectral_norm(&(DMatrix::identity(n, n) - sym))?;
        if contraction >= 1.0 {
            return Err(Error::NonContracting(contraction));
        }
        let eta_energy = a.energy_operator_norm(&m)?;
        Ok(Self {
            smoother,
            eta,
            eta_energy,
            alpha: eta * (1.0 + fmt.unit_roundoff()),
            contraction,
            diag,
        })
    }

    /// `alpha` for another unit roundoff.
    pub fn alpha_at(&self, eps: f64) -> f64 {
        self.eta * (1.0 + eps)
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn dense(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diag))
    }

    pub fn apply(&self, z: &[f64], fmt: PrecisionFormat) -> Result<Vec<f64>> {
        Ok(rounded_diag_scale(&self.diag, z, fmt)?.value)
    }

    pub fn apply_exact(&self, z: &[f64]) -> Vec<f64> {
        self.diag.iter().zip(z).map(|(m, v)| m * v).collect()
    }
}

pub fn make_jacobi(a: &SparseSpd, omega: f64, fmt: PrecisionFormat) -> Result<RelaxationOp> {
    RelaxationOp::new(a, Smoother::Jacobi { omega }, fmt)
}

pub fn make_richardson(a: &SparseSpd, omega: f64, fmt: PrecisionFormat) -> Result<RelaxationOp> {
    RelaxationOp::new(a, Smoother::Richardson { omega }, fmt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CoarseVariant {
    Exact,
    Perturbed { sigma: f64, seed: u64 },
    Recursive { mu: usize, nu: usize, depth: usize },
}

impl CoarseVariant {
    pub fn label(&self) -> String {
        match self {
            CoarseVariant::Exact => "exact".into(),
            CoarseVariant::Perturbed { sigma, .. } => format!("perturbed({sigma})"),
            CoarseVariant::Recursive { mu, nu, depth } => format!("recursive({mu},{nu},{depth})"),
        }
    }
}

#[derive(Debug, Clone)]
enum CoarseInner {
    Exact,
    /// Dense `B_c`.
    Perturbed(DMatrix<f64>),
    Recursive(Box<Multigrid>),
}

/// The coarse-grid solve `B_c A_c^{-1}` with `||B_c - I_c||_{A_c} < 1`,
/// always applied in carrier precision.
#[derive(Debug, Clone)]
pub struct CoarseSolver {
    pub variant: CoarseVariant,
    /// `||B_c - I_c||_{A_c}`.
    pub bc_deviation: f64,
    inner: CoarseInner,
}

impl CoarseSolver {
    pub fn exact() -> Self {
        Self {
            variant: CoarseVariant::Exact,
            bc_deviation: 0.0,
            inner: CoarseInner::Exact,
        }
    }

    pub fn apply(&self, a_c: &SparseSpd, r_c: &[f64]) -> Result<Vec<f64>> {
        match &self.inner {
            CoarseInner::Exact => a_c.solve(r_c),
            CoarseInner::Perturbed(bc) => {
                check_len("perturbed coarse solve", bc.nrows(), r_c.len())?;
                let x = a_c.solve(r_c)?;
                Ok((bc * nalgebra::DVector::from_column_slice(&x))
                    .as_slice()
                    .to_vec())
            }
            CoarseInner::Recursive(mg) => mg.cycle(r_c, PrecisionFormat::carrier()),
        }
    }

    /// Dense `B_c A_c^{-1}`.
    pub fn dense_operator(&self, a_c: &SparseSpd) -> Result<DMatrix<f64>> {
        let n = a_c.dim();
        let inv = a_c.solve_dense(&DMatrix::identity(n, n));
        match &self.inner {
            CoarseInner::Exact => Ok(inv),
            CoarseInner::Perturbed(bc) => Ok(bc * inv),
            CoarseInner::Recursive(mg) => mg.dense_operator(),
        }
    }
}

/// `B_c = I_c + sigma G` with `G = -A_c^{-1/2} S A_c^{1/2}`, where `S` is a
/// seeded random symmetric positive semidefinite matrix of unit norm. Then
/// `||G||_{A_c} = 1` and the perturbation only ever weakens the correction.
pub fn make_perturbed_coarse(level: &GridLevel, sigma: f64, seed: u64) -> Result<CoarseSolver> {
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be in [0, 1), got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(CoarseSolver::exact());
    }
    let a_c = &level.coarsening()?.a_c;
    let n = a_c.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let s = &q * q.transpose();
    let s = &s / spectral_norm(&s)?;
    let g = -(a_c.inv_sqrt_dense()? * s * a_c.sqrt_dense()?);
    let bc = DMatrix::identity(n, n) + g * sigma;
    let bc_deviation = a_c.energy_operator_norm(&(&bc - DMatrix::identity(n, n)))?;
    Ok(CoarseSolver {
        variant: CoarseVariant::Perturbed { sigma, seed },
        bc_deviation,
        inner: CoarseInner::Perturbed(bc),
    })
}

/// Coarse solve by one V-cycle on `coarse_levels` (the hierarchy below the
/// fine level, its first entry having `A = A_c`).
pub fn make_recursive_coarse(
    coarse_levels: Vec<GridLevel>,
    smoother: Smoother,
    mu: usize,
    nu: usize,
) -> Result<CoarseSolver> {
    let depth = coarse_levels.len() - 1;
    let mg = Multigrid::new(coarse_levels, smoother, mu, nu, PrecisionFormat::carrier())?;
    let bc_deviation = measure_bc_deviation(&mg)?;
    if bc_deviation >= 1.0 {
        return Err(Error::CoarseDeviation(bc_deviation));
    }
    Ok(CoarseSolver {
        variant: CoarseVariant::Recursive { mu, nu, depth },
        bc_deviation,
        inner: CoarseInner::Recursive(Box::new(mg)),
    })
}

/// Intermediate vectors of one two-grid cycle, named after the quantity
/// each step produces.
#[derive(Debug, Clone, PartialEq)]
pub struct TgStages {
    pub r: Vec<f64>,
    pub y_mu: Vec<f64>,
    pub r_mu: Vec<f64>,
    pub r_c: Vec<f64>,
    pub d_c: Vec<f64>,
    pub d: Vec<f64>,
    pub y_nu: Vec<f64>,
    pub r_nu: Vec<f64>,
    pub r_n: Vec<f64>,
    pub y: Vec<f64>,
}

fn run_stages(
    level: &GridLevel,
    r: &[f64],
    m: &RelaxationOp,
    n: &RelaxationOp,
    coarse: &CoarseSolver,
    fmt: PrecisionFormat,
) -> Result<TgStages> {
    let c = level.coarsening()?;
    let a = level.a.matrix();
    check_len("right-hand side", level.n(), r.len())?;
    check_len("pre-relaxation", level.n(), m.diag().len())?;
    check_len("post-relaxation", level.n(), n.diag().len())?;
    let r = quantize_vector(r, fmt)?.value;
    let y_mu = m.apply(&r, fmt)?;
    let r_mu = rounded_residual(a, &y_mu, &r, fmt)?.value;
    let r_c = rounded_matvec(&c.pt, &r_mu, fmt)?.value;
    let d_c = coarse.apply(&c.a_c, &r_c)?;
    let d = rounded_matvec(&c.p, &d_c, fmt)?.value;
    let y_nu = rounded_add_sub(&y_mu, &d, Sign::Minus, fmt)?.value;
    let r_nu = rounded_residual(a, &y_nu, &r, fmt)?.value;
    let r_n = n.apply(&r_nu, fmt)?;
    let y = rounded_add_sub(&y_nu, &r_n, Sign::Minus, fmt)?.value;
    Ok(TgStages {
        r,
        y_mu,
        r_mu,
        r_c,
        d_c,
        d,
        y_nu,
        r_nu,
        r_n,
        y,
    })
}

/// Measured deviations of a reduced-precision cycle from the carrier-precision
/// cycle with the same `B_c`.
#[derive(Debug, Clone)]
pub struct CycleTrace {
    pub computed: TgStages,
    pub reference: TgStages,
    /// `||A^{-1} r||_A`.
    pub rhs_energy: f64,
    /// Deviation for each [`ProofStep`], in that step's norm.
    pub deviations: [f64; 16],
    /// `||delta_y||_A`, the total deviation of the result.
    pub result_deviation: f64,
    /// `||y + delta_y - A^{-1} r||_A`.
    pub error_energy: f64,
    /// `||y - A^{-1} r||_A` for the carrier-precision cycle.
    pub reference_error_energy: f64,
}

impl CycleTrace {
    pub fn deviation(&self, step: ProofStep) -> f64 {
        self.deviations[step.index()]
    }

    /// Measured-to-predicted ratio for each step.
    pub fn ratios(&self, bounds: &PerLineBounds) -> [f64; 16] {
        let mut out = [0.0; 16];
        for step in ProofStep::ALL {
            let dev = self.deviation(step);
            let bound = bounds.get(step) * self.rhs_energy;
            out[step.index()] = if dev == 0.0 {
                0.0
            } else if bound > 0.0 {
                dev / bound
            } else {
                f64::INFINITY
            };
        }
        out
    }

    /// `||y + delta_y - A^{-1} r||_A / ||A^{-1} r||_A`.
    pub fn error_ratio(&self) -> f64 {
        ratio_or_zero(self.error_energy, self.rhs_energy)
    }

    pub fn reference_error_ratio(&self) -> f64 {
        ratio_or_zero(self.reference_error_energy, self.rhs_energy)
    }
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Carrier-precision two-grid cycle: the exact-arithmetic proxy.
pub fn exact_tg_reference(
    level: &GridLevel,
    r: &[f64],
    m: &RelaxationOp,
    n: &RelaxationOp,
    coarse: &CoarseSolver,
) -> Result<Vec<f64>> {
    Ok(exact_tg_stages(level, r, m, n, coarse)?.y)
}

/// All intermediates of [`exact_tg_reference`].
pub fn exact_tg_stages(
    level: &GridLevel,
    r: &[f64],
    m: &RelaxationOp,
    n: &RelaxationOp,
    coarse: &CoarseSolver,
) -> Result<TgStages> {
    run_stages(level, r, m, n, coarse, PrecisionFormat::carrier())
}

/// One two-grid cycle in `fmt`, instrumented against the carrier reference.
pub fn tg_cycle(
    level: &GridLevel,
    r: &[f64],
    m: &RelaxationOp,
    n: &RelaxationOp,
    coarse: &CoarseSolver,
    fmt: PrecisionFormat,
) -> Result<(Vec<f64>, CycleTrace)> {
    let computed = run_stages(level, r, m, n, coarse, fmt)?;
    let reference = exact_tg_stages(level, r, m, n, coarse)?;
    let c = level.coarsening()?;
    let a = &level.a;
    let am = a.matrix();

    let exact_solution = a.solve(r)?;
    let rhs_energy = a.energy_norm(&exact_solution)?;
    let energy = |v: &[f64]| a.energy_norm(v);

    let (k, x) = (&computed, &reference);
    let euclid = |v: Vec<f64>| Ok::<f64, Error>(norm2(&v));
    let mut dev = [0.0; 16];
    let mut set = |step: ProofStep, v: Vec<f64>| -> Result<()> {
        dev[step.index()] = match step.norm() {
            NormKind::Euclidean => euclid(v)?,
            NormKind::Energy => energy(&v)?,
            NormKind::CoarseEnergy => c.a_c.energy_norm(&v)?,
        };
        Ok(())
    };

    set(ProofStep::Dr, sub(&k.r, r))?;
    set(ProofStep::Dm, sub(&k.y_mu, &m.apply_exact(&k.r)))?;
    set(ProofStep::Dym, sub(&k.y_mu, &x.y_mu))?;
    let a_ymu = am.matvec(&k.y_mu)?;
    set(ProofStep::Dam, sub(&k.r_mu, &sub(&a_ymu, &k.r)))?;
    set(ProofStep::Drm, sub(&k.r_mu, &x.r_mu))?;
    set(ProofStep::Dpm, sub(&k.r_c, &c.pt.matvec(&k.r_mu)?))?;
    set(ProofStep::C1, sub(&k.d_c, &x.d_c))?;
    set(ProofStep::Dpn, sub(&k.d, &c.p.matvec(&k.d_c)?))?;
    set(ProofStep::C2, sub(&k.d, &x.d))?;
    set(ProofStep::Dyminus, sub(&k.y_nu, &sub(&k.y_mu, &k.d)))?;
    set(ProofStep::C3, sub(&k.y_nu, &x.y_nu))?;
    let a_ynu = am.matvec(&k.y_nu)?;
    set(ProofStep::Dan, sub(&k.r_nu, &sub(&a_ynu, &k.r)))?;
    set(ProofStep::C4, sub(&k.r_nu, &x.r_nu))?;
    set(ProofStep::N, sub(&k.r_n, &n.apply_exact(&k.r_nu)))?;
    set(ProofStep::Rn, sub(&k.r_n, &x.r_n))?;
    set(ProofStep::C5, sub(&k.y, &sub(&k.y_nu, &k.r_n)))?;

    let trace = CycleTrace {
        result_deviation: energy(&sub(&k.y, &x.y))?,
        error_energy: energy(&sub(&k.y, &exact_solution))?,
        reference_error_energy: energy(&sub(&x.y, &exact_solution))?,
        rhs_energy,
        deviations: dev,
        computed,
        reference,
    };
    Ok((trace.computed.y.clone(), trace))
}

/// Dense two-grid error propagator
/// `(I - N A)(I - P B_c A_c^{-1} P^t A)(I - M A)`.
pub fn tg_error_operator(
    level: &GridLevel,
    m: &RelaxationOp,
    n: &RelaxationOp,
    coarse: &CoarseSolver,
) -> Result<DMatrix<f64>> {
    let c = level.coarsening()?;
    let a = level.a.to_dense();
    let p = c.p.to_dense();
    let w = coarse.dense_operator(&c.a_c)?;
    let id = DMatrix::identity(level.n(), level.n());
    let pre = &id - m.dense() * &a;
    let post = &id - n.dense() * &a;
    let cgc = &id - &p * w * p.transpose() * &a;
    Ok(post * cgc * pre)
}

/// Exact-arithmetic two-grid convergence factor in energy.
pub fn rho_star(
    level: &GridLevel,
    m: &RelaxationOp,
    n: &RelaxationOp,
    coarse: &CoarseSolver,
) -> Result<f64> {
    level
        .a
        .energy_operator_norm(&tg_error_operator(level, m, n, coarse)?)
}

/// `T = I - P (P^t A P)^{-1} P^t A`.
pub fn energy_projection(level: &GridLevel) -> Result<DMatrix<f64>> {
    let c = level.coarsening()?;
    let a = level.a.to_dense();
    let p = c.p.to_dense();
    let pta = p.transpose() * &a;
    let g = &pta * &p;
    let g = (&g + g.transpose()) * 0.5;
    let x = g
        .cholesky()
        .ok_or_else(|| Error::NotSpd("P^t A P".into()))?
        .solve(&pta);
    Ok(DMatrix::identity(level.n(), level.n()) - p * x)
}

/// A grid hierarchy with one relaxation operator per non-coarsest level,
/// used for `mu` pre- and `nu` post-sweeps.
#[derive(Debug, Clone)]
pub struct Multigrid {
    levels: Vec<GridLevel>,
    relax: Vec<RelaxationOp>,
    pub mu: usize,
    pub nu: usize,
}

impl Multigrid {
    pub fn new(
        levels: Vec<GridLevel>,
        smoother: Smoother,
        mu: usize,
        nu: usize,
        fmt: PrecisionFormat,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidArgument("empty hierarchy".into()));
        }
        if levels.len() > 1 && mu + nu == 0 {
            return Err(Error::InvalidArgument("mu + nu must be at least 1".into()));
        }
        for (i, w) in levels.windows(2).enumerate() {
            let c = w[0].coarsening()?;
            if c.a_c.dim() != w[1].n() {
                return Err(Error::Dimension(format!(
                    "level {i} coarse size {} does not match level {} size {}",
                    c.a_c.dim(),
                    i + 1,
                    w[1].n()
                )));
            }
        }
        let relax = levels[..levels.len() - 1]
            .iter()
            .map(|l| RelaxationOp::new(&l.a, smoother, fmt))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            levels,
            relax,
            mu,
            nu,
        })
    }

    pub fn levels(&self) -> &[GridLevel] {
        &self.levels
    }

    pub fn relaxation(&self, level: usize) -> Option<&RelaxationOp> {
        self.relax.get(level)
    }

    /// One V(mu, nu)-cycle from a zero guess; the coarsest level is solved
    /// directly in carrier precision.
    pub fn cycle(&self, r: &[f64], fmt: PrecisionFormat) -> Result<Vec<f64>> {
        check_len("right-hand side", self.levels[0].n(), r.len())?;
        let b = quantize_vector(r, fmt)?.value;
        self.cycle_level(0, &b, fmt)
    }

    fn cycle_level(&self, l: usize, b: &[f64], fmt: PrecisionFormat) -> Result<Vec<f64>> {
        let level = &self.levels[l];
        if l + 1 == self.levels.len() {
            return level.a.solve(b);
        }
        let a = level.a.matrix();
        let m = &self.relax[l];
        let c = level.coarsening()?;
        let mut x: Option<Vec<f64>> = None;
        for _ in 0..self.mu {
            x = Some(match x {
                None => m.apply(b, fmt)?,
                Some(x) => relax_step(a, m, &x, b, fmt)?,
            });
        }
        let x = x.unwrap_or_else(|| vec![0.0; level.n()]);
        let res = rounded_residual(a, &x, b, fmt)?.value;
        let r_c = rounded_matvec(&c.pt, &res, fmt)?.value;
        let d_c = self.cycle_level(l + 1, &r_c, fmt)?;
        let d = rounded_matvec(&c.p, &d_c, fmt)?.value;
        let mut x = rounded_add_sub(&x, &d, Sign::Minus, fmt)?.value;
        for _ in 0..self.nu {
            x = relax_step(a, m, &x, b, fmt)?;
        }
        Ok(x)
    }

    /// Dense carrier-precision cycle operator `W` with `cycle(r) = W r`.
    pub fn dense_operator(&self) -> Result<DMatrix<f64>> {
        let n = self.levels[0].n();
        let mut w = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.cycle(&e, PrecisionFormat::carrier())?;
            w.set_column(j, &nalgebra::DVector::from_column_slice(&col));
            e[j] = 0.0;
        }
        Ok(w)
    }

    /// Exact-arithmetic convergence factor `||I - W A||_A`.
    pub fn rho_star(&self) -> Result<f64> {
        let a = &self.levels[0].a;
        let n = a.dim();
        let e = DMatrix::identity(n, n) - self.dense_operator()? * a.to_dense();
        a.energy_operator_norm(&e)
    }
}

fn relax_step(
    a: &crate::sparse::CsrMatrix,
    m: &RelaxationOp,
    x: &[f64],
    b: &[f64],
    fmt: PrecisionFormat,
) -> Result<Vec<f64>> {
    let res = rounded_residual(a, x, b, fmt)?.value;
    let z = m.apply(&res, fmt)?;
    Ok(rounded_add_sub(x, &z, Sign::Minus, fmt)?.value)
}

pub fn v_cycle(mg: &Multigrid, r: &[f64], fmt: PrecisionFormat) -> Result<Vec<f64>> {
    mg.cycle(r, fmt)
}

/// `||B_c - I_c||_{A_c}` for the coarse solve realized by one cycle of `mg`,
/// where `B_c = W A_c`. A single-level hierarchy is a direct solve.
pub fn measure_bc_deviation(mg: &Multigrid) -> Result<f64> {
    if mg.levels.len() == 1 {
        return Ok(0.0);
    }
    mg.rho_star()
}

/// `||E||_A` by power iteration on `E^* E`, with `E^* = A^{-1} E^t A` the
/// energy adjoint. Avoids forming `A^{1/2}`, so the estimate of a norm-one
/// operator stays within a few ulps of one.
pub fn energy_norm_power(a: &SparseSpd, e: &DMatrix<f64>, iters: usize, seed: u64) -> Result<f64> {
    let n = a.dim();
    check_len("operator", n, e.nrows())?;
    let ad = a.to_dense();
    let et_a = e.transpose() * &ad;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut best = 0.0f64;
    for _ in 0..iters.max(1) {
        let nx = a.energy_norm(&x)?;
        if nx == 0.0 {
            return Ok(best);
        }
        let xv = nalgebra::DVector::from_column_slice(&x) / nx;
        let ex = e * &xv;
        best = best.max(a.energy_norm(ex.as_slice())?);
        let y = a.solve((&et_a * &ex).as_slice())?;
        x = y;
    }
    Ok(best)
}

/// `||T||_A` and `||T T - T||` for the energy projection of `level`.
pub fn projection_checks(level: &GridLevel) -> Result<(f64, f64)> {
    let t = energy_projection(level)?;
    let t_energy = energy_norm_power(&level.a, &t, 50, 0)?;
    let idem = operator_norm(&(&t * &t - &t))?;
    Ok((t_energy, idem))
}
