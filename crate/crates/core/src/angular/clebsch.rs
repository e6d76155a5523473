//! Clebsch-Gordan coefficients in the Condon-Shortley convention.
//!
//! Racah's closed-form sum is evaluated in exact big-rational arithmetic; the
//! only rounding happens in the final square root.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::half_integer::{check_projection, HalfInteger};
use crate::error::Result;

static FACTORIALS: OnceLock<RwLock<Vec<BigInt>>> = OnceLock::new();

fn factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    let n = n as usize;
    let table = FACTORIALS.get_or_init(|| RwLock::new(vec![BigInt::one()]));
    {
        let read = table.read().expect("factorial table poisoned");
        if let Some(f) = read.get(n) {
            return f.clone();
        }
    }
    let mut write = table.write().expect("factorial table poisoned");
    while write.len() <= n {
        let k = write.len();
        let next = &write[k - 1] * BigInt::from(k);
        write.push(next);
    }
    write[n].clone()
}

/// `⟨j1 m1; j2 m2 | J M⟩`.
///
/// Returns exactly `0.0` when a selection rule fails (`M ≠ m1 + m2`, `J`
/// outside the triangle, or `j1 + j2 + J` non-integral). Malformed pairs
/// (`|m| > j`, `j - m` non-integral, negative `j`) are errors.
pub fn clebsch_gordan(
    j1: HalfInteger,
    m1: HalfInteger,
    j2: HalfInteger,
    m2: HalfInteger,
    j: HalfInteger,
    m: HalfInteger,
) -> Result<f64> {
    check_projection(j1, m1)?;
    check_projection(j2, m2)?;
    check_projection(j, m)?;
    Ok(clebsch_gordan_unchecked(j1, m1, j2, m2, j, m))
}

fn clebsch_gordan_unchecked(
    j1: HalfInteger,
    m1: HalfInteger,
    j2: HalfInteger,
    m2: HalfInteger,
    j: HalfInteger,
    m: HalfInteger,
) -> f64 {
    let (tj1, tm1, tj2, tm2, tj, tm) = (j1.twice(), m1.twice(), j2.twice(), m2.twice(), j.twice(), m.twice());
    if tm1 + tm2 != tm {
        return 0.0;
    }
    if (tj1 + tj2 + tj) % 2 != 0 || tj < (tj1 - tj2).abs() || tj > tj1 + tj2 {
        return 0.0;
    }
    // All of these are integers once the selection rules hold.
    let a = (tj1 + tj2 - tj) / 2;
    let b = (tj1 - tj2 + tj) / 2;
    let c = (-tj1 + tj2 + tj) / 2;
    let d = (tj1 + tj2 + tj) / 2 + 1;
    let j1pm1 = (tj1 + tm1) / 2;
    let j1mm1 = (tj1 - tm1) / 2;
    let j2pm2 = (tj2 + tm2) / 2;
    let j2mm2 = (tj2 - tm2) / 2;
    let jpm = (tj + tm) / 2;
    let jmm = (tj - tm) / 2;
    let e = (tj - tj2 + tm1) / 2;
    let f = (tj - tj1 - tm2) / 2;

    let k_min = 0.max(-e).max(-f);
    let k_max = a.min(j1mm1).min(j2pm2);
    if k_min > k_max {
        return 0.0;
    }

    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial(a - k)
            * factorial(j1mm1 - k)
            * factorial(j2pm2 - k)
            * factorial(e + k)
            * factorial(f + k);
        let term = BigRational::new(if k % 2 == 0 { BigInt::one() } else { -BigInt::one() }, den);
        sum += term;
    }
    if sum.is_zero() {
        return 0.0;
    }

    let num = BigInt::from(tj + 1)
        * factorial(a)
        * factorial(b)
        * factorial(c)
        * factorial(j1pm1)
        * factorial(j1mm1)
        * factorial(j2pm2)
        * factorial(j2mm2)
        * factorial(jpm)
        * factorial(jmm);
    let squared = BigRational::new(num, factorial(d)) * &sum * &sum;
    let magnitude = squared.to_f64().expect("finite rational").sqrt();
    if sum.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}
