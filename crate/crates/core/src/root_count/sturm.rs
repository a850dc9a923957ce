//! Exact real-root counting over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub const STURM_DEGREE_CAP: usize = 64;

/// Integer polynomial, ascending powers, no trailing zeros.
type IntPoly = Vec<BigInt>;

fn trim(p: &mut IntPoly) {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn is_zero(p: &IntPoly) -> bool {
    p.iter().all(|c| c.is_zero())
}

fn content(p: &IntPoly) -> BigInt {
    p.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn primitive(mut p: IntPoly) -> IntPoly {
    let g = content(&p);
    if !g.is_zero() && !g.is_one() {
        for c in p.iter_mut() {
            *c /= &g;
        }
    }
    p
}

/// Clear denominators: a positive multiple of `p` with integer coefficients.
fn to_integer_poly(p: &[BigRational]) -> IntPoly {
    let l = p.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let mut out: IntPoly = p.iter().map(|c| (c.numer() * &l) / c.denom()).collect();
    trim(&mut out);
    primitive(out)
}

fn derivative(p: &IntPoly) -> IntPoly {
    if p.len() <= 1 {
        return vec![BigInt::zero()];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect()
}

/// Remainder of `|lc(b)|^{δ+1} · a` modulo `b`; the multiplier is positive
/// so signs are those of the true remainder.
fn signed_prem(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let db = b.len() - 1;
    let lc = b[db].clone();
    let mut r = a.clone();
    if r.len() < b.len() {
        return r;
    }
    let delta = r.len() - b.len();
    let mut steps = 0usize;
    while r.len() >= b.len() && !is_zero(&r) {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c *= &lc;
        }
        for (i, bc) in b.iter().enumerate() {
            r[i + shift] -= &lr * bc;
        }
        r.pop();
        trim(&mut r);
        steps += 1;
    }
    if r.is_empty() {
        r.push(BigInt::zero());
    }
    // Each step multiplied by lc; make the total power δ+1.
    let mut total = steps;
    while total < delta + 1 {
        for c in r.iter_mut() {
            *c *= &lc;
        }
        total += 1;
    }
    if lc.is_negative() && total % 2 == 1 {
        for c in r.iter_mut() {
            *c = -c.clone();
        }
    }
    r
}

fn sign_variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut v = 0;
    for s in signs.filter(|s| *s != 0) {
        if last != 0 && s != last {
            v += 1;
        }
        last = s;
    }
    v
}

fn sgn(c: &BigInt) -> i8 {
    if c.is_positive() {
        1
    } else if c.is_negative() {
        -1
    } else {
        0
    }
}

/// Number of distinct real roots of a rational polynomial of degree ≤ 64.
pub fn count_real_roots_sturm(coefficients: &[BigRational]) -> Result<usize> {
    if coefficients.iter().all(|c| c.is_zero()) {
        return Err(Error::DegenerateInput("zero polynomial".into()));
    }
    let p = to_integer_poly(coefficients);
    let deg = p.len() - 1;
    if deg > STURM_DEGREE_CAP {
        return Err(Error::Capacity {
            degree: deg,
            cap: STURM_DEGREE_CAP,
        });
    }
    Ok(sturm_count_int(p))
}

fn sturm_count_int(p: IntPoly) -> usize {
    if p.len() == 1 {
        return 0;
    }
    let mut chain = vec![p.clone(), primitive(derivative(&p))];
    loop {
        let n = chain.len();
        let r = signed_prem(&chain[n - 2], &chain[n - 1]);
        if is_zero(&r) {
            break;
        }
        let next: IntPoly = primitive(r.into_iter().map(|c| -c).collect());
        let done = next.len() == 1;
        chain.push(next);
        if done {
            break;
        }
    }
    let at_pos = chain.iter().map(|q| sgn(q.last().unwrap()));
    let at_neg = chain.iter().map(|q| {
        let s = sgn(q.last().unwrap());
        if (q.len() - 1) % 2 == 1 {
            -s
        } else {
            s
        }
    });
    sign_variations(at_neg) - sign_variations(at_pos)
}

/// Exact rational image of float coefficients.
pub fn rational_coefficients(c: &[f64]) -> Result<Vec<BigRational>> {
    c.iter()
        .map(|&v| {
            BigRational::from_float(v).ok_or_else(|| Error::DegenerateInput(format!("non-finite coefficient {v}")))
        })
        .collect()
}

fn int_gcd(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let (mut u, mut v) = (primitive(a.clone()), primitive(b.clone()));
    if u.len() < v.len() {
        std::mem::swap(&mut u, &mut v);
    }
    while !is_zero(&v) {
        let r = signed_prem(&u, &v);
        u = v;
        v = if is_zero(&r) { vec![BigInt::zero()] } else { primitive(r) };
    }
    u
}

/// `p / gcd(p, p')`, the square-free part, as integer coefficients.
pub fn squarefree_part(coefficients: &[BigRational]) -> Result<Vec<BigRational>> {
    if coefficients.iter().all(|c| c.is_zero()) {
        return Err(Error::DegenerateInput("zero polynomial".into()));
    }
    let p = to_integer_poly(coefficients);
    if p.len() <= 2 {
        return Ok(p.into_iter().map(BigRational::from_integer).collect());
    }
    let g = int_gcd(&p, &derivative(&p));
    let q = exact_div(&p, &g);
    Ok(q)
}

fn exact_div(a: &IntPoly, b: &IntPoly) -> Vec<BigRational> {
    let mut r: Vec<BigRational> = a.iter().cloned().map(BigRational::from_integer).collect();
    let bq: Vec<BigRational> = b.iter().cloned().map(BigRational::from_integer).collect();
    let db = bq.len() - 1;
    if r.len() <= db {
        return vec![BigRational::zero()];
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let coef = &r[k + db] / &bq[db];
        for (i, bc) in bq.iter().enumerate() {
            r[k + i] -= &coef * bc;
        }
        q[k] = coef;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(c: &[i64]) -> Vec<BigRational> {
        c.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect()
    }

    #[test]
    fn small_cases() {
        assert_eq!(count_real_roots_sturm(&ints(&[1, 0, 1])).unwrap(), 0);
        assert_eq!(count_real_roots_sturm(&ints(&[0, -1, 0, 1])).unwrap(), 3);
        assert_eq!(count_real_roots_sturm(&ints(&[5])).unwrap(), 0);
        assert_eq!(count_real_roots_sturm(&ints(&[-2, 1])).unwrap(), 1);
        // (x-1)²(x+2): two distinct roots.
        assert_eq!(count_real_roots_sturm(&ints(&[2, -3, 0, 1])).unwrap(), 2);
        // Negative leading coefficient: -(x² - 4).
        assert_eq!(count_real_roots_sturm(&ints(&[4, 0, -1])).unwrap(), 2);
    }

    #[test]
    fn product_of_six_linear_factors() {
        // Π_{k=1..6}(x - k) = x⁶ - 21x⁵ + 175x⁴ - 735x³ + 1624x² - 1764x + 720.
        let c = ints(&[720, -1764, 1624, -735, 175, -21, 1]);
        assert_eq!(count_real_roots_sturm(&c).unwrap(), 6);
    }

    #[test]
    fn errors() {
        assert!(matches!(count_real_roots_sturm(&ints(&[0, 0])), Err(Error::DegenerateInput(_))));
        let mut big = vec![0i64; 66];
        big[65] = 1;
        big[0] = 1;
        assert!(matches!(count_real_roots_sturm(&ints(&big)), Err(Error::Capacity { .. })));
    }

    #[test]
    fn rational_inputs() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        // x² - 1/4
        let c = vec![-half.clone() * &half, BigRational::zero(), BigRational::one()];
        assert_eq!(count_real_roots_sturm(&c).unwrap(), 2);
    }

    #[test]
    fn squarefree_removes_repeats() {
        // (x-1)³(x+1) = x⁴ - 2x³ + 2x - 1
        let sf = squarefree_part(&ints(&[-1, 2, 0, -2, 1])).unwrap();
        assert_eq!(sf.len(), 3);
        let lc = sf[2].clone();
        let monic: Vec<BigRational> = sf.iter().map(|c| c / &lc).collect();
        assert_eq!(monic, ints(&[-1, 0, 1]));
    }
}
