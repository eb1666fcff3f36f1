//! Emulated reduced-precision arithmetic.
//!
//! Every scalar operation is evaluated exactly in the `f64` carrier (with
//! error-free transformations where the carrier result is inexact) and then
//! rounded once, round-to-nearest-even, to the target significand width. The
//! kernels therefore satisfy `fl(a op b) = (a op b)(1 + d)`, `|d| <= eps`, and
//! each returns the a-priori bound of its rounding model next to the value.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linops::{mdot_plus, norm2};
use crate::sparse::CsrMatrix;

/// Significand width of the `f64` carrier, including the implicit bit.
pub const CARRIER_BITS: u32 = f64::MANTISSA_DIGITS;

const SIGN_BIT: u64 = 1 << 63;

/// A binary floating-point format with `significand_bits` of precision and an
/// unbounded exponent range. Widths from 2 to `CARRIER_BITS - 2` are emulated;
/// `CARRIER_BITS` itself means "no extra rounding".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrecisionFormat {
    significand_bits: u32,
}

impl PrecisionFormat {
    pub const MIN_BITS: u32 = 2;
    pub const MAX_EMULATED_BITS: u32 = CARRIER_BITS - 2;

    pub fn new(significand_bits: u32) -> Result<Self> {
        let ok = (Self::MIN_BITS..=Self::MAX_EMULATED_BITS).contains(&significand_bits)
            || significand_bits == CARRIER_BITS;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "significand_bits must be in {}..={} or equal {CARRIER_BITS}, got {significand_bits}",
                Self::MIN_BITS,
                Self::MAX_EMULATED_BITS
            )));
        }
        Ok(Self { significand_bits })
    }

    pub fn carrier() -> Self {
        Self {
            significand_bits: CARRIER_BITS,
        }
    }

    pub fn significand_bits(self) -> u32 {
        self.significand_bits
    }

    pub fn is_carrier(self) -> bool {
        self.significand_bits == CARRIER_BITS
    }

    /// Unit roundoff `2^-significand_bits`.
    pub fn unit_roundoff(self) -> f64 {
        unit_roundoff(self.significand_bits)
    }

    /// Rounds a carrier value to this format.
    pub fn round(self, x: f64) -> Result<f64> {
        self.round_exact(x, 0.0)
    }

    pub fn add(self, a: f64, b: f64) -> Result<f64> {
        let (s, e) = two_sum(a, b);
        self.round_exact(s, e)
    }

    pub fn sub(self, a: f64, b: f64) -> Result<f64> {
        self.add(a, -b)
    }

    pub fn mul(self, a: f64, b: f64) -> Result<f64> {
        let p = a * b;
        let e = if p.is_finite() { a.mul_add(b, -p) } else { 0.0 };
        self.round_exact(p, e)
    }

    /// Rounds the exact value `hi + lo`, where `hi = fl64(hi + lo)`, directly to
    /// this format. Only the sign of `lo` matters: `hi` can differ from the
    /// exact value's rounding only when `hi` is itself a tie point of the
    /// target grid, and then `lo` says which side the exact value lies on.
    fn round_exact(self, hi: f64, lo: f64) -> Result<f64> {
        if !hi.is_finite() {
            return Err(Error::NonFinite(hi));
        }
        if self.is_carrier() || hi == 0.0 {
            return Ok(hi);
        }
        // Bring carrier subnormals into the normal range; scaling by a power
        // of two is exact.
        const SCALE_EXP: i32 = 600;
        if hi.abs() < f64::MIN_POSITIVE * 2f64.powi(64) {
            let up = 2f64.powi(SCALE_EXP);
            let r = self.round_bits(hi * up, lo * up);
            return Ok(r * 2f64.powi(-SCALE_EXP));
        }
        let r = self.round_bits(hi, lo);
        if !r.is_finite() {
            return Err(Error::Overflow(hi));
        }
        Ok(r)
    }

    fn round_bits(self, hi: f64, lo: f64) -> f64 {
        let shift = CARRIER_BITS - self.significand_bits;
        let raw = hi.to_bits();
        let sign = raw & SIGN_BIT;
        let mag = raw & !SIGN_BIT;
        let mask = (1u64 << shift) - 1;
        let half = 1u64 << (shift - 1);
        let rem = mag & mask;
        let base = mag & !mask;
        let round_up = if rem != half {
            rem > half
        } else if lo != 0.0 {
            // exact value lies beyond hi (away from zero) iff lo has hi's sign
            (lo > 0.0) == (hi > 0.0)
        } else {
            (base >> shift) & 1 == 1
        };
        let mag = if round_up {
            base + (1u64 << shift)
        } else {
            base
        };
        f64::from_bits(sign | mag)
    }

    pub fn is_representable(self, x: f64) -> bool {
        self.round(x)
            .map(|r| r.to_bits() == x.to_bits())
            .unwrap_or(false)
    }
}

impl TryFrom<u32> for PrecisionFormat {
    type Error = Error;
    fn try_from(bits: u32) -> Result<Self> {
        Self::new(bits)
    }
}

impl From<PrecisionFormat> for u32 {
    fn from(f: PrecisionFormat) -> u32 {
        f.significand_bits
    }
}

pub fn unit_roundoff(significand_bits: u32) -> f64 {
    2f64.powi(-(significand_bits as i32))
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    if !s.is_finite() {
        return (s, 0.0);
    }
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// A computed value together with the a-priori bound on its deviation from the
/// exact result of the same operation on the same inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundedResult<T> {
    pub value: T,
    pub a_priori_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

pub fn round_scalar(x: f64, fmt: PrecisionFormat) -> Result<f64> {
    fmt.round(x)
}

/// `fl(w) = w + d`, `||d|| <= eps ||w||`.
pub fn quantize_vector(w: &[f64], fmt: PrecisionFormat) -> Result<RoundedResult<Vec<f64>>> {
    let value = w
        .iter()
        .map(|&x| fmt.round(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(RoundedResult {
        value,
        a_priori_bound: fmt.unit_roundoff() * norm2(w),
    })
}

/// `fl(v +- w) = v +- w + d`, `||d|| <= eps ||v +- w||`.
pub fn rounded_add_sub(
    v: &[f64],
    w: &[f64],
    sign: Sign,
    fmt: PrecisionFormat,
) -> Result<RoundedResult<Vec<f64>>> {
    check_len("rounded_add_sub", v.len(), w.len())?;
    let mut value = Vec::with_capacity(v.len());
    let mut exact_sq = 0.0;
    for (&a, &b) in v.iter().zip(w) {
        let b = match sign {
            Sign::Plus => b,
            Sign::Minus => -b,
        };
        let (s, e) = two_sum(a, b);
        exact_sq += (s + e) * (s + e);
        value.push(fmt.round_exact(s, e)?);
    }
    Ok(RoundedResult {
        value,
        a_priori_bound: fmt.unit_roundoff() * exact_sq.sqrt(),
    })
}

fn row_dot(k: &CsrMatrix, i: usize, w: &[f64], fmt: PrecisionFormat) -> Result<f64> {
    let mut acc: Option<f64> = None;
    for (j, kij) in k.row(i) {
        let p = fmt.mul(kij, w[j])?;
        acc = Some(match acc {
            None => p,
            Some(s) => fmt.add(s, p)?,
        });
    }
    Ok(acc.unwrap_or(0.0))
}

/// Residual `K w - c` with every product and partial sum rounded, row nonzeros
/// summed left to right and `c` subtracted last. Bound
/// `eps * mdot_plus(m_K) * (||c|| + || |K| || ||w||)`.
pub fn rounded_residual(
    k: &CsrMatrix,
    w: &[f64],
    c: &[f64],
    fmt: PrecisionFormat,
) -> Result<RoundedResult<Vec<f64>>> {
    check_len("residual operand", k.ncols(), w.len())?;
    check_len("residual right-hand side", k.nrows(), c.len())?;
    let mdot = mdot_plus(k.max_row_nnz(), fmt)?;
    let value = (0..k.nrows())
        .map(|i| fmt.sub(row_dot(k, i, w, fmt)?, c[i]))
        .collect::<Result<Vec<_>>>()?;
    Ok(RoundedResult {
        value,
        a_priori_bound: fmt.unit_roundoff() * mdot * (norm2(c) + k.abs_norm() * norm2(w)),
    })
}

/// Product `K w` with bound `eps * mdot_plus(m_K) * || |K| || ||w||`.
pub fn rounded_matvec(
    k: &CsrMatrix,
    w: &[f64],
    fmt: PrecisionFormat,
) -> Result<RoundedResult<Vec<f64>>> {
    check_len("matvec operand", k.ncols(), w.len())?;
    let mdot = mdot_plus(k.max_row_nnz(), fmt)?;
    let value = (0..k.nrows())
        .map(|i| row_dot(k, i, w, fmt))
        .collect::<Result<Vec<_>>>()?;
    Ok(RoundedResult {
        value,
        a_priori_bound: fmt.unit_roundoff() * mdot * k.abs_norm() * norm2(w),
    })
}

/// Diagonal scaling `D z`, one rounded product per entry. Bound
/// `eps * max|d_i| * ||z||`.
pub fn rounded_diag_scale(
    d: &[f64],
    z: &[f64],
    fmt: PrecisionFormat,
) -> Result<RoundedResult<Vec<f64>>> {
    check_len("diagonal scaling", d.len(), z.len())?;
    let value = d
        .iter()
        .zip(z)
        .map(|(&a, &b)| fmt.mul(a, b))
        .collect::<Result<Vec<_>>>()?;
    let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(RoundedResult {
        value,
        a_priori_bound: fmt.unit_roundoff() * dmax * norm2(z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fmt(bits: u32) -> PrecisionFormat {
        PrecisionFormat::new(bits).unwrap()
    }

    /// Reference rounding by exhaustive search of the neighbouring grid points.
    fn oracle_round(x: f64, bits: u32) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let e = x.abs().log2().floor() as i32;
        // make sure 2^e <= |x| < 2^(e+1)
        let e = if 2f64.powi(e) > x.abs() {
            e - 1
        } else if 2f64.powi(e + 1) <= x.abs() {
            e + 1
        } else {
            e
        };
        let ulp = 2f64.powi(e - bits as i32 + 1);
        let lo = (x.abs() / ulp).floor() * ulp;
        let hi = lo + ulp;
        let (dl, dh) = (x.abs() - lo, hi - x.abs());
        let pick = if dl < dh {
            lo
        } else if dh < dl {
            hi
        } else if ((lo / ulp) as u64).is_multiple_of(2) {
            lo
        } else {
            hi
        };
        pick.copysign(x)
    }

    #[test]
    fn unit_roundoff_is_power_of_two() {
        assert_eq!(fmt(8).unit_roundoff(), 1.0 / 256.0);
        assert_eq!(PrecisionFormat::carrier().unit_roundoff(), 2f64.powi(-53));
    }

    #[test]
    fn rejects_widths_outside_range() {
        assert!(PrecisionFormat::new(1).is_err());
        assert!(PrecisionFormat::new(52).is_err());
        assert!(PrecisionFormat::new(54).is_err());
        assert!(PrecisionFormat::new(51).is_ok());
        assert!(PrecisionFormat::new(53).is_ok());
    }

    #[test]
    fn round_scalar_examples() {
        assert_eq!(round_scalar(0.0, fmt(8)).unwrap(), 0.0);
        assert_eq!(round_scalar(1.0 + 2f64.powi(-9), fmt(8)).unwrap(), 1.0);
        assert_eq!(
            round_scalar(1.0 + 3.0 * 2f64.powi(-9), fmt(8)).unwrap(),
            1.0 + 2f64.powi(-7)
        );
        assert_eq!(
            oracle_round(1.0 + 3.0 * 2f64.powi(-9), 8),
            1.0 + 2f64.powi(-7)
        );
    }

    #[test]
    fn ties_go_to_even() {
        // 1 + 2^-8 is halfway between 1 and 1 + 2^-7 at 8 bits
        assert_eq!(fmt(8).round(1.0 + 2f64.powi(-8)).unwrap(), 1.0);
        // 1 + 3*2^-8 is halfway between 1 + 2^-7 and 1 + 2^-6
        assert_eq!(
            fmt(8).round(1.0 + 3.0 * 2f64.powi(-8)).unwrap(),
            1.0 + 2f64.powi(-6)
        );
        assert_eq!(fmt(8).round(-(1.0 + 2f64.powi(-8))).unwrap(), -1.0);
    }

    #[test]
    fn tie_broken_by_lost_tail() {
        // carrier sum lands exactly on the tie; the exact sum is just above it
        let a = 1.0 + 2f64.powi(-8);
        let b = 2f64.powi(-80);
        assert_eq!(a + b, a);
        assert_eq!(fmt(8).add(a, b).unwrap(), 1.0 + 2f64.powi(-7));
        assert_eq!(fmt(8).add(a, -b).unwrap(), 1.0);
    }

    #[test]
    fn product_rounded_once() {
        // (1 + 2^-30)^2 = 1 + 2^-29 + 2^-60: at 29 bits the exact product sits
        // just above the tie 1 + 2^-29
        let x = 1.0 + 2f64.powi(-30);
        let f = fmt(29);
        assert_eq!(f.mul(x, x).unwrap(), 1.0 + 2f64.powi(-28));
    }

    #[test]
    fn carry_into_next_binade() {
        assert_eq!(fmt(4).round(1.96875).unwrap(), 2.0);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(fmt(8).round(f64::NAN), Err(Error::NonFinite(_))));
        assert!(matches!(
            fmt(8).round(f64::INFINITY),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(fmt(8).round(f64::MAX), Err(Error::Overflow(_))));
    }

    #[test]
    fn subnormal_carrier_values_round_relatively() {
        let x = 3.0 * f64::MIN_POSITIVE / 7.0;
        let r = fmt(8).round(x).unwrap();
        assert!((r - x).abs() <= fmt(8).unit_roundoff() * x.abs());
    }

    #[test]
    fn quantize_examples() {
        let z = quantize_vector(&[0.0; 4], fmt(8)).unwrap();
        assert_eq!(z.value, vec![0.0; 4]);
        assert_eq!(z.a_priori_bound, 0.0);
        let w = vec![1.5, -0.25, 3.0];
        let q = quantize_vector(&w, fmt(8)).unwrap();
        assert_eq!(q.value, w);
        assert_eq!(q.a_priori_bound, fmt(8).unit_roundoff() * norm2(&w));
    }

    #[test]
    fn add_sub_exact_cases() {
        let v = vec![1.25, -3.5, 0.75];
        let r = rounded_add_sub(&v, &[0.0; 3], Sign::Plus, fmt(8)).unwrap();
        assert_eq!(r.value, v);
        let r = rounded_add_sub(&v, &v, Sign::Minus, fmt(8)).unwrap();
        assert_eq!(r.value, vec![0.0; 3]);
        assert_eq!(r.a_priori_bound, 0.0);
        assert!(rounded_add_sub(&v, &[1.0], Sign::Plus, fmt(8)).is_err());
    }

    #[test]
    fn residual_exact_cases() {
        let id = CsrMatrix::identity(3);
        let w = vec![1.5, -2.0, 0.375];
        let r = rounded_residual(&id, &w, &w, fmt(8)).unwrap();
        assert_eq!(r.value, vec![0.0; 3]);
        let two_w = 2.0 * norm2(&w);
        assert!(
            r.a_priori_bound
                <= fmt(8).unit_roundoff() * mdot_plus(1, fmt(8)).unwrap() * two_w * (1.0 + 1e-15)
        );
        let k = CsrMatrix::from_triplets(2, 2, [(0, 0, 2.0), (0, 1, -1.0), (1, 1, 2.0)]).unwrap();
        let r = rounded_residual(&k, &[0.0; 2], &[0.0; 2], fmt(8)).unwrap();
        assert_eq!(r.value, vec![0.0; 2]);
        assert_eq!(r.a_priori_bound, 0.0);
    }

    #[test]
    fn residual_precision_too_low() {
        let k = CsrMatrix::identity(2);
        // (m + 1) eps = 2 * 2^-2 < 1 is fine, 4 nonzeros at 2 bits is not
        assert!(rounded_residual(&k, &[1.0, 1.0], &[0.0, 0.0], fmt(2)).is_ok());
        let wide = CsrMatrix::from_triplets(1, 4, (0..4).map(|j| (0, j, 1.0))).unwrap();
        assert!(matches!(
            rounded_matvec(&wide, &[1.0; 4], fmt(2)),
            Err(Error::PrecisionTooLow(_))
        ));
    }

    #[test]
    fn matvec_exact_cases() {
        let id = CsrMatrix::identity(3);
        let w = vec![1.5, -2.0, 0.375];
        assert_eq!(rounded_matvec(&id, &w, fmt(8)).unwrap().value, w);
        let r = rounded_matvec(&id, &[0.0; 3], fmt(8)).unwrap();
        assert_eq!((r.value, r.a_priori_bound), (vec![0.0; 3], 0.0));
    }

    #[test]
    fn carrier_width_is_exact_relative_to_carrier() {
        let c = PrecisionFormat::carrier();
        let k = CsrMatrix::from_triplets(2, 2, [(0, 0, 0.1), (0, 1, 0.7), (1, 0, 0.3)]).unwrap();
        let w = [1.0 / 3.0, 2.0 / 7.0];
        let r = rounded_matvec(&k, &w, c).unwrap().value;
        assert_eq!(r[0], 0.1 * w[0] + 0.7 * w[1]);
        assert_eq!(r[1], 0.3 * w[0]);
        assert_eq!(c.round(0.1).unwrap(), 0.1);
    }

    proptest! {
        #[test]
        fn round_matches_oracle(x in -1e6f64..1e6, bits in 2u32..=51) {
            prop_assert_eq!(fmt(bits).round(x).unwrap(), oracle_round(x, bits));
        }

        #[test]
        fn round_is_idempotent(x in -1e12f64..1e12, bits in 2u32..=51) {
            let f = fmt(bits);
            let r = f.round(x).unwrap();
            prop_assert_eq!(f.round(r).unwrap(), r);
        }

        #[test]
        fn round_is_monotone(x in -1e3f64..1e3, y in -1e3f64..1e3, bits in 2u32..=51) {
            let f = fmt(bits);
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(f.round(lo).unwrap() <= f.round(hi).unwrap());
        }

        #[test]
        fn round_error_within_unit_roundoff(x in -1e30f64..1e30, bits in 2u32..=51) {
            let f = fmt(bits);
            prop_assert!((f.round(x).unwrap() - x).abs() <= f.unit_roundoff() * x.abs());
        }
    }
}
