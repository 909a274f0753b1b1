//! Exact univariate polynomials over Q: characteristic polynomials, Sturm
//! root counting, and certified logarithm enclosures.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use solenoidk_abelian::IntMatrix;

pub type Q = BigRational;

/// Coefficients from the constant term upwards, with no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(Vec<Q>);

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn from_ints(coeffs: &[BigInt]) -> Self {
        Self::new(coeffs.iter().map(|c| Q::from_integer(c.clone())).collect())
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Q> {
        self.0.last()
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Q::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// Euclidean division `self = q·d + r`.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.leading().unwrap().clone();
        let mut r = self.0.clone();
        let mut q = vec![Q::zero(); self.0.len().saturating_sub(dd)];
        while r.len() > dd && !r.is_empty() {
            let shift = r.len() - 1 - dd;
            let c = r.last().unwrap() / &lead;
            for (i, dc) in d.0.iter().enumerate() {
                r[shift + i] -= &c * dc;
            }
            q[shift] = c;
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        (Poly::new(q), Poly::new(r))
    }

    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some(l) => {
                let l = l.clone();
                Poly::new(self.0.iter().map(|c| c / &l).collect())
            }
            None => self.clone(),
        }
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `p / gcd(p, p')`: same roots, all simple.
    pub fn square_free(&self) -> Poly {
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            return self.clone();
        }
        self.div_rem(&g).0
    }
}

/// `det(xI − M)` with integer coefficients, constant term first
/// (Faddeev–LeVerrier; every division is exact for integer input).
pub fn characteristic_polynomial(m: &IntMatrix) -> Vec<BigInt> {
    assert!(m.is_square());
    let n = m.rows();
    let mut c = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::one();
    let mut mk = IntMatrix::zeros(n, n);
    for k in 1..=n {
        mk = m
            .mul(&mk)
            .add(&IntMatrix::diagonal(&vec![c[n - k + 1].clone(); n]));
        let amk = m.mul(&mk);
        let trace = (0..n).fold(BigInt::zero(), |acc, i| acc + &amk[(i, i)]);
        let (q, r) = (-trace).div_rem(&BigInt::from(k));
        debug_assert!(r.is_zero(), "Faddeev-LeVerrier division must be exact");
        c[n - k] = q;
    }
    c
}

/// Sturm chain of the square-free part of `p`.
#[derive(Clone, Debug)]
pub struct SturmChain {
    chain: Vec<Poly>,
}

impl SturmChain {
    pub fn new(p: &Poly) -> Self {
        let p0 = p.square_free();
        let mut chain = vec![p0.clone()];
        let mut prev = p0;
        let mut cur = prev.derivative();
        while !cur.is_zero() {
            chain.push(cur.clone());
            let (_, r) = prev.div_rem(&cur);
            prev = cur;
            cur = Poly::new(r.0.into_iter().map(|c| -c).collect());
        }
        SturmChain { chain }
    }

    pub fn base(&self) -> &Poly {
        &self.chain[0]
    }

    fn variations<I: Iterator<Item = i8>>(signs: I) -> usize {
        let mut last = 0i8;
        let mut v = 0;
        for s in signs.filter(|&s| s != 0) {
            if last != 0 && s != last {
                v += 1;
            }
            last = s;
        }
        v
    }

    fn sign(q: &Q) -> i8 {
        if q.is_positive() {
            1
        } else if q.is_negative() {
            -1
        } else {
            0
        }
    }

    /// Number of distinct real roots in `(x, ∞)`.
    pub fn roots_above(&self, x: &Q) -> usize {
        let at_x = Self::variations(self.chain.iter().map(|p| Self::sign(&p.eval(x))));
        let at_inf = Self::variations(self.chain.iter().map(|p| Self::sign(p.leading().unwrap())));
        at_x - at_inf
    }
}

/// Rounds down to a multiple of `2^-bits`.
pub fn floor_dyadic(q: &Q, bits: u32) -> Q {
    let scale = BigInt::one() << bits;
    let n = (q * Q::from_integer(scale.clone())).floor().to_integer();
    Q::new(n, scale)
}

pub fn ceil_dyadic(q: &Q, bits: u32) -> Q {
    let scale = BigInt::one() << bits;
    let n = (q * Q::from_integer(scale.clone())).ceil().to_integer();
    Q::new(n, scale)
}

/// `(lo, hi)` enclosing `2·atanh(z) = ln((1+z)/(1−z))` for `0 ≤ z ≤ 1/3`, width ≤ `tol`.
fn atanh2_enclosure(z: &Q, tol: &Q) -> (Q, Q) {
    let two = Q::from_integer(BigInt::from(2));
    let z2 = z * z;
    let tail_factor = Q::one() / (Q::one() - &z2);
    let mut sum = Q::zero();
    let mut power = z.clone();
    let mut k = 0u64;
    loop {
        let denom = Q::from_integer(BigInt::from(2 * k + 1));
        sum += &two * &power / &denom;
        power = &power * &z2;
        // remaining terms are bounded by a geometric series
        let tail = &two * &power / Q::from_integer(BigInt::from(2 * k + 3)) * &tail_factor;
        if &tail <= tol || power.is_zero() {
            return (sum.clone(), sum + tail);
        }
        k += 1;
    }
}

/// Certified enclosure of `ln x` for rational `x > 0`, width at most `tol`.
pub fn ln_enclosure(x: &Q, tol: &Q) -> (Q, Q) {
    assert!(x.is_positive(), "logarithm of a non-positive number");
    assert!(tol.is_positive());
    if x < &Q::one() {
        let (lo, hi) = ln_enclosure(&(Q::one() / x), tol);
        return (-hi, -lo);
    }
    let two = Q::from_integer(BigInt::from(2));
    let mut m = 0u64;
    let mut y = x.clone();
    while y >= two {
        y /= &two;
        m += 1;
    }
    let share = tol / Q::from_integer(BigInt::from(2 * (m + 1)));
    let third = Q::new(BigInt::one(), BigInt::from(3));
    let (l2_lo, l2_hi) = atanh2_enclosure(&third, &share);
    let z = (&y - Q::one()) / (&y + Q::one());
    let (ly_lo, ly_hi) = atanh2_enclosure(&z, &share);
    let mq = Q::from_integer(BigInt::from(m));
    let lo = &mq * l2_lo + ly_lo;
    let hi = &mq * l2_hi + ly_hi;
    // keep the representation small without losing the enclosure
    let bits = 8 + tol_bits(tol);
    (floor_dyadic(&lo, bits), ceil_dyadic(&hi, bits))
}

fn tol_bits(tol: &Q) -> u32 {
    let mut bits = 0;
    let mut t = tol.clone();
    while t < Q::one() {
        t *= Q::from_integer(BigInt::from(2));
        bits += 1;
    }
    bits
}

/// Decimal rendering of `q` truncated towards zero after `digits` places.
pub fn to_decimal(q: &Q, digits: usize) -> String {
    let scale = BigInt::from(10).pow(digits as u32);
    let scaled = (q.abs() * Q::from_integer(scale.clone()))
        .floor()
        .to_integer();
    let (int, frac) = scaled.div_rem(&scale);
    let sign = if q.is_negative() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
}

/// Longest truncated expansion on which `lo ≤ hi` agree. Every number in
/// `[lo, hi]` truncates to the same string.
pub fn common_decimal(lo: &Q, hi: &Q) -> String {
    let mut digits = 0;
    while digits < 1000 && to_decimal(lo, digits + 1) == to_decimal(hi, digits + 1) {
        digits += 1;
    }
    to_decimal(lo, digits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn char_poly_of_golden_matrix() {
        let m = IntMatrix::from_i64(&[&[2, 1], &[1, 1]]);
        assert_eq!(characteristic_polynomial(&m), ints(&[1, -3, 1]));
    }

    #[test]
    fn char_poly_of_rank_one_matrix() {
        let m = IntMatrix::from_i64(&[&[1, 1], &[1, 1]]);
        assert_eq!(characteristic_polynomial(&m), ints(&[0, -2, 1]));
        let one = IntMatrix::from_i64(&[&[2]]);
        assert_eq!(characteristic_polynomial(&one), ints(&[-2, 1]));
    }

    #[test]
    fn char_poly_three_by_three() {
        // companion-style matrix of x^3 - 2x^2 - x + 2 = (x-1)(x+1)(x-2)
        let m = IntMatrix::from_i64(&[&[0, 0, -2], &[1, 0, 1], &[0, 1, 2]]);
        assert_eq!(characteristic_polynomial(&m), ints(&[2, -1, -2, 1]));
    }

    #[test]
    fn sturm_counts_roots() {
        // (x-1)(x+1)(x-2)
        let p = Poly::from_ints(&ints(&[2, -1, -2, 1]));
        let s = SturmChain::new(&p);
        assert_eq!(s.roots_above(&q(-5, 1)), 3);
        assert_eq!(s.roots_above(&q(0, 1)), 2);
        assert_eq!(s.roots_above(&q(1, 1)), 1);
        assert_eq!(s.roots_above(&q(3, 2)), 1);
        assert_eq!(s.roots_above(&q(2, 1)), 0);
    }

    #[test]
    fn square_free_part_drops_repeats() {
        // (x-2)^2 (x+1)
        let p = Poly::from_ints(&ints(&[4, 0, -3, 1]));
        let s = SturmChain::new(&p);
        assert_eq!(s.base().degree(), Some(2));
        assert_eq!(s.roots_above(&q(0, 1)), 1);
    }

    #[test]
    fn ln_two_enclosure() {
        let (lo, hi) = ln_enclosure(&q(2, 1), &q(1, 1_000_000_000_000));
        let ln2 = std::f64::consts::LN_2;
        // ln 2 = 0.69314718055994...
        assert!(lo <= q(6_931_471_805_600, 10_000_000_000_000));
        assert!(hi >= q(6_931_471_805_599, 10_000_000_000_000));
        assert!(&hi - &lo <= q(2, 1_000_000_000_000));
        let mid: f64 = num_traits::ToPrimitive::to_f64(&((&lo + &hi) / q(2, 1))).unwrap();
        assert!((mid - ln2).abs() < 1e-11);
    }

    #[test]
    fn ln_below_one_is_negative() {
        let (lo, hi) = ln_enclosure(&q(1, 2), &q(1, 1_000_000));
        assert!(hi < Q::zero());
        assert!(lo > q(-694, 1000) && hi < q(-693, 1000));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&q(1, 3), 4), "0.3333");
        assert_eq!(to_decimal(&q(-5, 2), 2), "-2.50");
        assert_eq!(to_decimal(&q(7, 1), 0), "7");
        assert_eq!(common_decimal(&q(1234, 1000), &q(1239, 1000)), "1.23");
        assert_eq!(common_decimal(&q(1, 3), &q(1, 3)).len(), 1002);
    }
}
