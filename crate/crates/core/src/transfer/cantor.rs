//! The Cantor function `C(x) = mu([0, x))`, `mu` the natural measure on the
//! middle-thirds Cantor set.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};

/// Ternary digits read before the remaining mass drops below `2^-64`.
const DIGITS: u32 = 64;

/// Binary value assembled from a ternary digit stream: digits 0 and 2 give
/// bits 0 and 1; the first digit 1 gives a final bit 1.
fn assemble(mut next_digit: impl FnMut() -> u32) -> f64 {
    let mut bits: u64 = 0;
    let mut len = 0;
    for _ in 0..DIGITS {
        let t = next_digit();
        bits <<= 1;
        len += 1;
        match t {
            0 => {}
            2 => bits |= 1,
            _ => {
                bits |= 1;
                break;
            }
        }
    }
    // bits / 2^len, rounded once
    bits as f64 / (len as f64).exp2()
}

/// Cantor function of a float, computed from the exact ternary expansion
/// of the dyadic rational the float represents.
pub fn cantor_function(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("Cantor function argument {x} outside [0, 1]")));
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    // x = mant / 2^k with k <= 1074
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let (mant, k) = if exp == 0 {
        (bits & ((1 << 52) - 1), 1074)
    } else {
        ((bits & ((1 << 52) - 1)) | (1 << 52), 1075 - exp)
    };
    let tz = mant.trailing_zeros() as i32;
    let (mant, k) = (mant >> tz, (k - tz) as u32);
    if k <= 125 {
        let mut r = mant as u128;
        let mask = (1u128 << k) - 1;
        Ok(assemble(|| {
            let y = r * 3;
            r = y & mask;
            (y >> k) as u32
        }))
    } else {
        let mut r = BigUint::from(mant);
        let one = BigUint::one();
        let mask = (&one << k) - &one;
        Ok(assemble(|| {
            let y = &r * 3u32;
            r = &y & &mask;
            (y >> k).to_u32().unwrap_or(0)
        }))
    }
}

/// Cantor function of the rational `num / den`, exactly digit by digit.
pub fn cantor_function_rational(num: i64, den: i64) -> Result<f64> {
    if den == 0 {
        return Err(Error::Domain("zero denominator".into()));
    }
    let (mut n, mut d) = (BigInt::from(num), BigInt::from(den));
    if d.is_negative() {
        n = -n;
        d = -d;
    }
    if n.is_negative() || n > d {
        return Err(Error::Domain(format!("{num}/{den} outside [0, 1]")));
    }
    if n == d {
        return Ok(1.0);
    }
    let mut r = n;
    Ok(assemble(|| {
        let (t, rest) = (&r * BigInt::from(3)).div_rem(&d);
        r = rest;
        t.to_u32().unwrap_or(0)
    }))
}
