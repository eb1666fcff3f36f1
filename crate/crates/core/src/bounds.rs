//! Closed-form rounding-error constants for the two-grid cycle.
//!
//! `C0..C5` bound the accumulated deviation of each stage of a reduced
//! precision two-grid cycle relative to `||A^{-1} r||_A`; their tail
//! `C3 + C4 + C5` is the increase of the convergence factor caused by
//! rounding. The `gamma_k` are the published first-order coefficients of
//! `C_k` in `pi_dot = kappa^{1/2} eps`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::mdot_plus_eps;
use crate::precision::{PrecisionFormat, CARRIER_BITS};

/// Every parameter that appears in `C0..C5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub eps: f64,
    pub kappa: f64,
    pub kappa_c: f64,
    pub eta_a: f64,
    pub eta_p: f64,
    pub eta_m: f64,
    pub eta_n: f64,
    pub m_a: usize,
    pub m_p: usize,
    pub mdot_a: f64,
    pub mdot_p: f64,
    pub alpha_m: f64,
    pub alpha_n: f64,
}

/// The precision-independent part of [`BoundInputs`] for one level and one
/// pair of relaxation operators. Relaxation rounding constants are stored
/// relative to `(1 + eps)`: `alpha = alpha_base * (1 + eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralConstants {
    pub kappa: f64,
    pub kappa_c: f64,
    pub eta_a: f64,
    pub eta_p: f64,
    pub eta_m: f64,
    pub eta_n: f64,
    pub m_a: usize,
    pub m_p: usize,
    pub alpha_m_base: f64,
    pub alpha_n_base: f64,
}

impl StructuralConstants {
    pub fn at_eps(&self, eps: f64) -> Result<BoundInputs> {
        BoundInputs::new(
            eps,
            self.kappa,
            self.kappa_c,
            self.eta_a,
            self.eta_p,
            self.eta_m,
            self.eta_n,
            self.m_a,
            self.m_p,
            self.alpha_m_base * (1.0 + eps),
            self.alpha_n_base * (1.0 + eps),
        )
    }
}

impl BoundInputs {
    /// Assembles inputs, deriving `mdot_a` and `mdot_p` from the nonzero counts.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        eps: f64,
        kappa: f64,
        kappa_c: f64,
        eta_a: f64,
        eta_p: f64,
        eta_m: f64,
        eta_n: f64,
        m_a: usize,
        m_p: usize,
        alpha_m: f64,
        alpha_n: f64,
    ) -> Result<Self> {
        let inputs = Self {
            eps,
            kappa,
            kappa_c,
            eta_a,
            eta_p,
            eta_m,
            eta_n,
            m_a,
            m_p,
            mdot_a: mdot_plus_eps(m_a, eps)?,
            mdot_p: mdot_plus_eps(m_p, eps)?,
            alpha_m,
            alpha_n,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    /// `eps = 0` is admitted as the exact-arithmetic limit.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidArgument(format!(
                "bound input {what} = {v} out of range"
            )))
        };
        if !(self.eps >= 0.0 && self.eps < 1.0) {
            return bad("eps", self.eps);
        }
        if !(self.kappa >= 1.0) || !self.kappa.is_finite() {
            return bad("kappa", self.kappa);
        }
        if !(self.kappa_c >= 1.0) || !self.kappa_c.is_finite() {
            return bad("kappa_c", self.kappa_c);
        }
        for (name, v) in [
            ("eta_a", self.eta_a),
            ("eta_p", self.eta_p),
            ("eta_m", self.eta_m),
            ("eta_n", self.eta_n),
            ("mdot_a", self.mdot_a),
            ("mdot_p", self.mdot_p),
            ("alpha_m", self.alpha_m),
            ("alpha_n", self.alpha_n),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(name, v);
            }
        }
        Ok(())
    }

    pub fn pi_dot(&self) -> f64 {
        self.kappa.sqrt() * self.eps
    }

    pub fn xi(&self) -> f64 {
        (self.kappa_c / self.kappa).sqrt()
    }
}

/// `C0..C5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c: [f64; 6],
}

impl Constants {
    pub fn delta_rho(&self) -> f64 {
        self.c[3] + self.c[4] + self.c[5]
    }
}

pub fn compute_constants(inp: &BoundInputs) -> Constants {
    let BoundInputs {
        eps: e,
        kappa,
        kappa_c,
        eta_a,
        eta_p,
        eta_m,
        eta_n,
        mdot_a,
        mdot_p,
        alpha_m,
        ..
    } = *inp;
    let sk = kappa.sqrt();
    let skc = kappa_c.sqrt();
    let relax_m = eta_m + alpha_m * (1.0 + e);

    let c0 =
        (1.0 + mdot_a * (1.0 + eta_a * eta_m) + mdot_a * e + (1.0 + mdot_a * e) * eta_a * relax_m)
            * e;
    let c1 = skc * (eta_p * c0 + e * mdot_p * eta_p * (1.0 + eta_a * eta_m + c0));
    let c2 = 2.0 * skc * e * mdot_p * eta_p * (1.0 + c1) + 2.0 * c1;
    let c3 = c2 + ((2.0 + c2) * sk + relax_m * (1.0 + e)) * e;
    let c4 = eta_a * c3 + mdot_a * ((eta_a * (2.0 + c3) + 1.0) * sk + e) * e;
    let c5 = (2.0 + c3 + eta_n * c4 + e * (1.0 + sk * c4)) * sk * e;
    Constants {
        c: [c0, c1, c2, c3, c4, c5],
    }
}

pub fn delta_rho_tg(report: &BoundReport) -> f64 {
    report.c[3] + report.c[4] + report.c[5]
}

/// The five displayed first-order coefficients, with `mdot` taken at its
/// `eps -> 0` limit `m + 1`.
pub fn gamma_constants(inp: &BoundInputs) -> [f64; 5] {
    let xi = inp.xi();
    let ma = (inp.m_a + 1) as f64;
    let mp = (inp.m_p + 1) as f64;
    let (eta_a, eta_p, eta_m) = (inp.eta_a, inp.eta_p, inp.eta_m);
    let g1 = xi
        * (eta_p * (1.0 + ma * (1.0 + eta_a * eta_m) + eta_a * (eta_m + inp.alpha_m))
            + mp * eta_p * (1.0 + eta_a * eta_m));
    let g2 = 2.0 * mp * eta_p + 2.0 * g1;
    let g3 = xi * g2 + 2.0 + eta_m;
    let g4 = eta_a * g3 + ma * (2.0 * eta_a + 1.0);
    let g5 = 2.0;
    [g1, g2, g3, g4, g5]
}

/// Exact first-order Taylor coefficients of `C1..C5` in `pi_dot` at fixed
/// `kappa`, `kappa_c` and operator constants, obtained by expanding the
/// closed forms above. They differ from [`gamma_constants`] in `g2` (the
/// prolongation term carries a factor `xi`) and `g3` (`g2` enters without an
/// extra `xi`, and the relaxation term is `(eta_m + alpha_m) / kappa^{1/2}`).
pub fn first_order_coefficients(inp: &BoundInputs) -> [f64; 5] {
    let xi = inp.xi();
    let sk = inp.kappa.sqrt();
    let ma = (inp.m_a + 1) as f64;
    let mp = (inp.m_p + 1) as f64;
    let (eta_a, eta_p, eta_m) = (inp.eta_a, inp.eta_p, inp.eta_m);
    let c0 = 1.0 + ma * (1.0 + eta_a * eta_m) + eta_a * (eta_m + inp.alpha_m);
    let g1 = xi * (eta_p * c0 + mp * eta_p * (1.0 + eta_a * eta_m));
    let g2 = 2.0 * xi * mp * eta_p + 2.0 * g1;
    let g3 = g2 + 2.0 + (eta_m + inp.alpha_m) / sk;
    let g4 = eta_a * g3 + ma * (2.0 * eta_a + 1.0);
    [g1, g2, g3, g4, 2.0]
}

/// One displayed inequality of the per-line error analysis of the cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProofStep {
    /// Quantization of the right-hand side.
    Dr,
    /// Local rounding of the pre-relaxation product.
    Dm,
    /// Accumulated error in the pre-relaxed iterate.
    Dym,
    /// Local rounding of the pre-relaxation residual.
    Dam,
    /// Accumulated error in the pre-relaxation residual (`C0`).
    Drm,
    /// Local rounding of the restriction.
    Dpm,
    /// Propagated error in the coarse correction (`2 C1`).
    C1,
    /// Local rounding of the prolongation.
    Dpn,
    /// Accumulated error in the prolongated correction (`C2`).
    C2,
    /// Local rounding of the coarse-grid update.
    Dyminus,
    /// Accumulated error in the corrected iterate (`C3`).
    C3,
    /// Local rounding of the post-relaxation residual.
    Dan,
    /// Accumulated error in the post-relaxation residual (`C4`).
    C4,
    /// Local rounding of the post-relaxation product.
    N,
    /// Accumulated error in the post-relaxation update.
    Rn,
    /// Local rounding of the final subtraction (`C5`).
    C5,
}

/// Norm in which a step's deviation is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    Euclidean,
    /// Energy norm of the fine operator.
    Energy,
    /// Energy norm of the coarse operator.
    CoarseEnergy,
}

impl ProofStep {
    pub const ALL: [ProofStep; 16] = [
        ProofStep::Dr,
        ProofStep::Dm,
        ProofStep::Dym,
        ProofStep::Dam,
        ProofStep::Drm,
        ProofStep::Dpm,
        ProofStep::C1,
        ProofStep::Dpn,
        ProofStep::C2,
        ProofStep::Dyminus,
        ProofStep::C3,
        ProofStep::Dan,
        ProofStep::C4,
        ProofStep::N,
        ProofStep::Rn,
        ProofStep::C5,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&s| s == self).expect("listed")
    }

    pub fn label(self) -> &'static str {
        match self {
            ProofStep::Dr => "dr",
            ProofStep::Dm => "dm",
            ProofStep::Dym => "dym",
            ProofStep::Dam => "dam",
            ProofStep::Drm => "drm",
            ProofStep::Dpm => "dpm",
            ProofStep::C1 => "c1",
            ProofStep::Dpn => "dpn",
            ProofStep::C2 => "c2",
            ProofStep::Dyminus => "dyminus",
            ProofStep::C3 => "c3",
            ProofStep::Dan => "dan",
            ProofStep::C4 => "c4",
            ProofStep::N => "n",
            ProofStep::Rn => "rn",
            ProofStep::C5 => "c5",
        }
    }

    pub fn norm(self) -> NormKind {
        match self {
            ProofStep::Dr
            | ProofStep::Dm
            | ProofStep::Dym
            | ProofStep::Dam
            | ProofStep::Drm
            | ProofStep::Dpm
            | ProofStep::Dyminus
            | ProofStep::N => NormKind::Euclidean,
            ProofStep::C1 => NormKind::CoarseEnergy,
            _ => NormKind::Energy,
        }
    }
}

impl fmt::Display for ProofStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Right-hand-side coefficients (multipliers of `||A^{-1} r||_A`) of the 16
/// per-line inequalities, in [`ProofStep::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerLineBounds(pub [f64; 16]);

impl PerLineBounds {
    pub fn get(&self, step: ProofStep) -> f64 {
        self.0[step.index()]
    }
}

pub fn per_line_bounds(inp: &BoundInputs) -> PerLineBounds {
    let [c0, c1, c2, c3, c4, c5] = compute_constants(inp).c;
    let e = inp.eps;
    let sk = inp.kappa.sqrt();
    let skc = inp.kappa_c.sqrt();
    let relax_m = inp.eta_m + inp.alpha_m * (1.0 + e);
    let (eta_a, eta_p, eta_m) = (inp.eta_a, inp.eta_p, inp.eta_m);
    let (ma, mp) = (inp.mdot_a, inp.mdot_p);

    let dr = e;
    let dm = inp.alpha_m * (1.0 + e) * e;
    let dym = relax_m * e;
    let dam = ma * (1.0 + eta_a * eta_m + e + eta_a * relax_m * e) * e;
    let dpm = e * mp * eta_p * (1.0 + eta_a * eta_m + c0);
    let dpn = 2.0 * skc * e * mp * eta_p * (1.0 + c1);
    let dyminus = ((2.0 + c2) * sk + relax_m * e) * e;
    let dan = ma * ((eta_a * (2.0 + c3) + 1.0) * sk + e) * e;
    let n = inp.alpha_n * e * (1.0 + sk * c4);
    // The published update bound carries no alpha_N on the local term; kept
    // as printed so that it matches C5.
    let rn = inp.eta_n * c4 + e * (1.0 + sk * c4);
    PerLineBounds([
        dr,
        dm,
        dym,
        dam,
        c0,
        dpm,
        2.0 * c1,
        dpn,
        c2,
        dyminus,
        c3,
        dan,
        c4,
        n,
        rn,
        c5,
    ])
}

/// Everything the theory predicts for one level, relaxation pair and format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub n_c: usize,
    pub significand_bits: u32,
    pub inputs: BoundInputs,
    pub c: [f64; 6],
    pub delta_rho: f64,
    pub rho_star: f64,
    pub rho_tg: f64,
    pub pi_dot: f64,
    pub xi: f64,
    pub gamma: [f64; 5],
}

impl BoundReport {
    pub fn new(
        n: usize,
        n_c: usize,
        significand_bits: u32,
        inputs: BoundInputs,
        rho_star: f64,
    ) -> Self {
        let constants = compute_constants(&inputs);
        let delta_rho = constants.delta_rho();
        BoundReport {
            n,
            n_c,
            significand_bits,
            inputs,
            c: constants.c,
            delta_rho,
            rho_star,
            rho_tg: rho_star + delta_rho,
            pi_dot: inputs.pi_dot(),
            xi: inputs.xi(),
            gamma: gamma_constants(&inputs),
        }
    }

    /// Column names of [`BoundReport::csv_fields`].
    pub const CSV_COLUMNS: [&'static str; 30] = [
        "n",
        "n_c",
        "significand_bits",
        "eps",
        "kappa",
        "kappa_c",
        "eta_A",
        "eta_P",
        "eta_M",
        "eta_N",
        "alpha_M",
        "alpha_N",
        "c0",
        "c1",
        "c2",
        "c3",
        "c4",
        "c5",
        "delta_rho",
        "rho_star",
        "rho_tg",
        "pi_dot",
        "xi",
        "gamma1",
        "gamma2",
        "gamma3",
        "gamma4",
        "gamma5",
        "m_A",
        "m_P",
    ];

    pub fn csv_fields(&self) -> Vec<String> {
        let i = &self.inputs;
        let mut out = vec![
            self.n.to_string(),
            self.n_c.to_string(),
            self.significand_bits.to_string(),
        ];
        let reals = [
            i.eps, i.kappa, i.kappa_c, i.eta_a, i.eta_p, i.eta_m, i.eta_n, i.alpha_m, i.alpha_n,
        ];
        out.extend(reals.iter().map(|v| format!("{v:e}")));
        out.extend(self.c.iter().map(|v| format!("{v:e}")));
        for v in [
            self.delta_rho,
            self.rho_star,
            self.rho_tg,
            self.pi_dot,
            self.xi,
        ] {
            out.push(format!("{v:e}"));
        }
        out.extend(self.gamma.iter().map(|v| format!("{v:e}")));
        out.push(i.m_a.to_string());
        out.push(i.m_p.to_string());
        out
    }
}

/// Fewest significand bits with `eps <= pi_target / kappa^{1/2}`.
pub fn progressive_epsilon(kappa: f64, pi_target: f64) -> Result<PrecisionFormat> {
    if !(pi_target > 0.0 && pi_target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "pi_target must be in (0, 1), got {pi_target}"
        )));
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "kappa must be >= 1, got {kappa}"
        )));
    }
    let limit = pi_target / kappa.sqrt();
    let mut bits = PrecisionFormat::MIN_BITS;
    while crate::precision::unit_roundoff(bits) > limit {
        bits += 1;
        if bits > PrecisionFormat::MAX_EMULATED_BITS {
            return Err(Error::PrecisionUnachievable(bits.max(CARRIER_BITS - 1)));
        }
    }
    PrecisionFormat::new(bits)
}

#[cfg(test)]
#[allow(
    clippy::excessive_precision,
    clippy::field_reassign_with_default,
    clippy::type_complexity
)]
mod tests {
    use super::*;

    fn identity_like(eps: f64) -> BoundInputs {
        BoundInputs::new(eps, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1, 1, 1.0, 1.0).unwrap()
    }

    fn sample() -> BoundInputs {
        BoundInputs::new(
            2f64.powi(-12),
            400.0,
            100.0,
            1.5,
            1.2,
            1.3,
            1.3,
            3,
            3,
            1.3 * (1.0 + 2f64.powi(-12)),
            1.3 * (1.0 + 2f64.powi(-12)),
        )
        .unwrap()
    }

    #[test]
    fn zero_eps_gives_zero_constants() {
        let c = compute_constants(&identity_like(0.0));
        assert_eq!(c.c, [0.0; 6]);
        let r = BoundReport::new(3, 1, 53, identity_like(0.0), 0.0);
        assert_eq!(delta_rho_tg(&r), 0.0);
    }

    #[test]
    fn identity_like_values() {
        // Independent 50-digit evaluation of the six formulas at eps = 2^-20
        // with every structural input equal to 1 and m_A = m_P = 1.
        let expect = [
            6.6757338572902975e-6,
            1.0490451131862921e-5,
            2.4795646823293911e-5,
            2.8610370464375418e-5,
            3.4332483665818102e-5,
            1.9074095693218123e-6,
        ];
        let got = compute_constants(&identity_like(2f64.powi(-20))).c;
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() <= 1e-12 * e, "{g} vs {e}");
        }
    }

    #[test]
    fn delta_rho_is_sum_of_tail() {
        let mut r = BoundReport::new(3, 1, 12, sample(), 0.5);
        r.c[3] = 0.01;
        r.c[4] = 0.01;
        r.c[5] = 0.01;
        assert!((delta_rho_tg(&r) - 0.03).abs() < 1e-17);
        let r = BoundReport::new(3, 1, 12, sample(), 0.5);
        assert_eq!(r.delta_rho, r.c[3] + r.c[4] + r.c[5]);
        assert_eq!(r.rho_tg, r.rho_star + r.delta_rho);
    }

    #[test]
    fn constants_increase_with_eps() {
        let base = sample();
        let mut eps = 2f64.powi(-30);
        while eps < 2f64.powi(-6) {
            let lo = compute_constants(&BoundInputs { eps, ..base }).c;
            let hi = compute_constants(&BoundInputs {
                eps: 2.0 * eps,
                ..base
            })
            .c;
            for k in 0..6 {
                assert!(hi[k] > lo[k]);
            }
            eps *= 2.0;
        }
    }

    #[test]
    fn constants_monotone_in_every_input() {
        let base = sample();
        let c0 = compute_constants(&base).c;
        let bumps: Vec<Box<dyn Fn(&mut BoundInputs)>> = vec![
            Box::new(|i| i.kappa *= 1.5),
            Box::new(|i| i.kappa_c *= 1.5),
            Box::new(|i| i.eta_a *= 1.5),
            Box::new(|i| i.eta_p *= 1.5),
            Box::new(|i| i.eta_m *= 1.5),
            Box::new(|i| i.eta_n *= 1.5),
            Box::new(|i| i.mdot_a *= 1.5),
            Box::new(|i| i.mdot_p *= 1.5),
            Box::new(|i| i.alpha_m *= 1.5),
            Box::new(|i| i.alpha_n *= 1.5),
        ];
        for bump in bumps {
            let mut b = base;
            bump(&mut b);
            let c = compute_constants(&b).c;
            for k in 0..6 {
                assert!(c[k] >= c0[k]);
            }
        }
    }

    #[test]
    fn gamma_examples() {
        let inp = sample();
        let g = gamma_constants(&inp);
        assert_eq!(g[4], 2.0);
        let no_m = BoundInputs { eta_m: 0.0, ..inp };
        let g0 = gamma_constants(&no_m);
        assert_eq!(g0[2], no_m.xi() * g0[1] + 2.0);
    }

    #[test]
    fn first_order_coefficients_linearize_constants() {
        let inp = sample();
        let g = first_order_coefficients(&inp);
        let mut prev = f64::INFINITY;
        for p in [16, 20, 24, 28] {
            let eps = 2f64.powi(-p);
            let i = BoundInputs {
                eps,
                mdot_a: mdot_plus_eps(inp.m_a, eps).unwrap(),
                mdot_p: mdot_plus_eps(inp.m_p, eps).unwrap(),
                ..inp
            };
            let pi = i.pi_dot();
            let c = compute_constants(&i).c;
            let worst = (1..6)
                .map(|k| (c[k] - g[k - 1] * pi).abs() / (pi * pi))
                .fold(0.0, f64::max);
            assert!(worst <= prev * 1.01 + 1.0);
            prev = worst;
        }
    }

    #[test]
    fn per_line_examples() {
        let inp = sample();
        let b = per_line_bounds(&inp);
        let c = compute_constants(&inp).c;
        assert_eq!(b.get(ProofStep::Dr), inp.eps);
        assert_eq!(
            b.get(ProofStep::Dm),
            inp.alpha_m * (1.0 + inp.eps) * inp.eps
        );
        assert_eq!(b.get(ProofStep::Drm), c[0]);
        assert_eq!(b.get(ProofStep::C1), 2.0 * c[1]);
        assert_eq!(b.get(ProofStep::C2), c[2]);
        assert_eq!(b.get(ProofStep::C3), c[3]);
        assert_eq!(b.get(ProofStep::C4), c[4]);
        assert_eq!(b.get(ProofStep::C5), c[5]);
    }

    #[test]
    fn per_line_chain_reproduces_constants() {
        let inp = sample();
        let b = per_line_bounds(&inp);
        let c = compute_constants(&inp).c;
        let rel = |a: f64, b: f64| (a - b).abs() / b;
        let c0 = b.get(ProofStep::Dr) + inp.eta_a * b.get(ProofStep::Dym) + b.get(ProofStep::Dam);
        assert!(rel(c0, c[0]) < 1e-14);
        let c3 = b.get(ProofStep::Dym) + b.get(ProofStep::C2) + b.get(ProofStep::Dyminus);
        assert!(rel(c3, c[3]) < 1e-14);
        let c4 = inp.eta_a * b.get(ProofStep::C3) + b.get(ProofStep::Dan);
        assert!(rel(c4, c[4]) < 1e-14);
    }

    #[test]
    fn progressive_examples() {
        let f = progressive_epsilon(1.0, 2f64.powi(-10)).unwrap();
        assert_eq!(f.significand_bits(), 10);
        let f = progressive_epsilon(4.0, 2f64.powi(-10)).unwrap();
        assert_eq!(f.significand_bits(), 11);
        assert!(matches!(
            progressive_epsilon(1e40, 0.5),
            Err(Error::PrecisionUnachievable(_))
        ));
        assert!(progressive_epsilon(1.0, 1.5).is_err());
    }

    #[test]
    fn progressive_pi_dot_within_one_bit() {
        for kappa in [1.7, 10.0, 333.0, 4096.0, 1e5] {
            let target = 2f64.powi(-8);
            let f = progressive_epsilon(kappa, target).unwrap();
            let pi = kappa.sqrt() * f.unit_roundoff();
            assert!(pi <= target && pi > target / 2.0);
        }
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(BoundInputs::new(0.5, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1, 1, 1.0, 1.0).is_err());
        assert!(BoundInputs::new(0.4, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 3, 1, 1.0, 1.0).is_err());
        assert!(BoundInputs::new(0.1, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0, 1, 1, 1.0, 1.0).is_err());
    }
}
