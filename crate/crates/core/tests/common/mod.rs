//! Reference implementations shared by the integration tests. Written from
//! the per-line inequalities of the error analysis, not from the library's
//! closed-form constants.

#![allow(dead_code)]

use mpmg::bounds::BoundInputs;

pub const CARRIER_EPS: f64 = f64::EPSILON / 2.0;

fn inflation(m: usize, eps: f64) -> f64 {
    let k = (m + 1) as f64;
    k / (1.0 - k * eps)
}

/// Per-line bound coefficients, in the order
/// dr dm dym dam drm dpm c1 dpn c2 dyminus c3 dan c4 n rn c5,
/// with `c1` the bound on the coarse correction error (twice `C1`).
pub fn proof_chain(i: &BoundInputs) -> [f64; 16] {
    let e = i.eps;
    let sk = i.kappa.sqrt();
    let skc = i.kappa_c.sqrt();
    let ma = inflation(i.m_a, e);
    let mp = inflation(i.m_p, e);

    let dr = e;
    let dm = i.alpha_m * (1.0 + e) * e;
    let dym = i.eta_m * dr + dm;
    let dam = ma * e * ((1.0 + i.eta_a * i.eta_m) + dr + i.eta_a * dym);
    let c0 = i.eta_a * dym + dr + dam;
    let dpm = e * mp * i.eta_p * (1.0 + i.eta_a * i.eta_m + c0);
    let c1 = skc * (i.eta_p * c0 + dpm);
    let dpn = 2.0 * skc * e * mp * i.eta_p * (1.0 + c1);
    let c2 = 2.0 * c1 + dpn;
    let dyminus = e * ((2.0 + c2) * sk + dym);
    let c3 = dym + c2 + dyminus;
    let dan = ma * e * ((i.eta_a * (2.0 + c3) + 1.0) * sk + e);
    let c4 = i.eta_a * c3 + dan;
    let n = i.alpha_n * e * (1.0 + sk * c4);
    let rn = i.eta_n * c4 + e * (1.0 + sk * c4);
    let c5 = sk * e * (2.0 + c3 + rn);
    [
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
    ]
}

/// `[C0, ..., C5]` through the proof chain.
pub fn constants(i: &BoundInputs) -> [f64; 6] {
    let p = proof_chain(i);
    [p[4], p[6] / 2.0, p[8], p[10], p[12], p[15]]
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `sum_j k_j w_j - c` accumulated in doubled working precision.
pub fn dot2(k: &[f64], w: &[f64], c: f64) -> f64 {
    let (mut s, mut t) = (0.0f64, 0.0f64);
    for (a, b) in k.iter().zip(w) {
        let p = a * b;
        let pe = a.mul_add(*b, -p);
        let (s2, se) = two_sum(s, p);
        s = s2;
        t += se + pe;
    }
    let (s2, se) = two_sum(s, -c);
    s2 + (t + se)
}
