//! Periodic points of the quotient map and the zeta function.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use solenoidk_abelian::IntValue;

use crate::germ::admissible_germs;
use crate::point::branches;
use crate::poly::Q;
use crate::substitution::{EdgeId, SubstitutionSystem};

/// `#Fix(g̃ⁿ)` from the substitution matrix and the germ map.
pub fn fix_count(sys: &SubstitutionSystem, n: usize) -> BigInt {
    assert!(n >= 1);
    let mn = sys.substitution_matrix().pow(n as u32);
    let mut total = BigInt::zero();
    for e in sys.edges() {
        total += &mn[(e, e)];
        if sys.first_letter_iter(e, n) == e {
            total -= 1;
        }
        if sys.last_letter_iter(e, n) == e {
            total -= 1;
        }
    }
    let fixed_germs = admissible_germs(sys)
        .iter()
        .filter(|g| g.tau_n(sys, n) == **g)
        .count();
    total + fixed_germs
}

/// Fixed points of `gⁿ` found by solving the affine equation on every branch.
#[derive(Clone, Debug, Default)]
pub struct BranchFixedPoints {
    pub interior: Vec<(EdgeId, Q)>,
    /// Edges whose left end is fixed (the branch at `t = 0` returns to `e`).
    pub outgoing: BTreeSet<EdgeId>,
    /// Edges whose right end is fixed.
    pub incoming: BTreeSet<EdgeId>,
}

pub fn branch_fixed_points(sys: &SubstitutionSystem, n: usize) -> BranchFixedPoints {
    let mut out = BranchFixedPoints::default();
    for e in sys.edges() {
        for b in branches(sys, e, n).iter().filter(|b| b.target == e) {
            // (t - lo) / (hi - lo) = t
            let t = &b.lo / (Q::one() - (&b.hi - &b.lo));
            if t.is_zero() {
                out.outgoing.insert(e);
            } else if t == Q::one() {
                out.incoming.insert(e);
            } else {
                out.interior.push((e, t));
            }
        }
    }
    out
}

/// Independent count of `#Fix(g̃ⁿ)`: interior solutions plus the admissible
/// germs whose two sides are both fixed ends.
pub fn fix_count_oracle(sys: &SubstitutionSystem, n: usize) -> BigInt {
    assert!(n >= 1);
    let fp = branch_fixed_points(sys, n);
    let germs = admissible_germs(sys)
        .into_iter()
        .filter(|g| fp.incoming.contains(&g.l) && fp.outgoing.contains(&g.r))
        .count();
    BigInt::from(fp.interior.len() + germs)
}

/// `#Fix(gⁿ)` on the rose itself, the vertex counted once.
pub fn fix_count_rose(sys: &SubstitutionSystem, n: usize) -> BigInt {
    BigInt::from(branch_fixed_points(sys, n).interior.len() + 1)
}

/// A rational function `P/Q` with `Q(0) = 1`, coefficients constant term first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalGuess {
    pub numerator: Vec<Q>,
    pub denominator: Vec<Q>,
}

impl fmt::Display for RationalGuess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({})/({})",
            render_poly(&self.numerator),
            render_poly(&self.denominator)
        )
    }
}

fn render_poly(c: &[Q]) -> String {
    let mut out = String::new();
    for (i, a) in c.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let neg = a.is_negative();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { "-" } else { "+" });
        }
        let mag = a.abs();
        let var = match i {
            0 => String::new(),
            1 => "t".into(),
            _ => format!("t^{i}"),
        };
        if var.is_empty() || !mag.is_one() {
            out.push_str(&mag.to_string());
        }
        out.push_str(&var);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[derive(Clone, Debug)]
pub struct ZetaSeries {
    /// `N_1, …, N_max`.
    pub counts: Vec<BigInt>,
    /// Taylor coefficients of `exp(Σ Nₙ tⁿ / n)` up to `t^max`.
    pub taylor: Vec<Q>,
    /// Fitted only, never asserted.
    pub guess: Option<RationalGuess>,
}

impl Serialize for ZetaSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ZetaSeries", 2)?;
        let counts: Vec<IntValue> = self.counts.iter().cloned().map(IntValue).collect();
        st.serialize_field("counts", &counts)?;
        st.serialize_field(
            "rational_guess",
            &self.guess.as_ref().map(|g| g.to_string()),
        )?;
        st.end()
    }
}

pub fn zeta_series(sys: &SubstitutionSystem, n_max: usize) -> ZetaSeries {
    assert!(n_max >= 1);
    let counts: Vec<BigInt> = (1..=n_max).map(|n| fix_count(sys, n)).collect();
    let taylor = exp_series(&counts);
    let guess = fit_rational(&taylor, sys.edge_count());
    ZetaSeries {
        counts,
        taylor,
        guess,
    }
}

/// Coefficients of `exp(Σ Nₙ tⁿ / n)` via `n·zₙ = Σ_{k=1..n} N_k z_{n−k}`.
fn exp_series(counts: &[BigInt]) -> Vec<Q> {
    let mut z = vec![Q::one()];
    for n in 1..=counts.len() {
        let s: Q = (1..=n)
            .map(|k| Q::from_integer(counts[k - 1].clone()) * &z[n - k])
            .sum();
        z.push(s / Q::from_integer(BigInt::from(n)));
    }
    z
}

/// Smallest `P/Q` with `deg P, deg Q ≤ max_deg` matching the series, keeping
/// at least one coefficient unused by the fit as a check.
fn fit_rational(z: &[Q], max_deg: usize) -> Option<RationalGuess> {
    let known = z.len();
    for total in 0..=2 * max_deg {
        for q in (0..=total.min(max_deg)).rev() {
            let p = total - q;
            if p > max_deg || p + 1 + q >= known {
                continue;
            }
            if let Some(g) = fit_exact(z, p, q) {
                return Some(g);
            }
        }
    }
    None
}

fn fit_exact(z: &[Q], p: usize, q: usize) -> Option<RationalGuess> {
    let at = |k: isize| -> Q {
        if k < 0 {
            Q::zero()
        } else {
            z[k as usize].clone()
        }
    };
    // Σ_{i=1..q} q_i z_{k−i} = −z_k for k = p+1..len−1
    let rows: Vec<(Vec<Q>, Q)> = (p + 1..z.len())
        .map(|k| {
            let coeffs = (1..=q).map(|i| at(k as isize - i as isize)).collect();
            (coeffs, -z[k].clone())
        })
        .collect();
    let qs = solve_unique(rows, q)?;
    let mut denominator = vec![Q::one()];
    denominator.extend(qs);
    let numerator: Vec<Q> = (0..=p)
        .map(|k| {
            (0..=q.min(k))
                .map(|i| &denominator[i] * at(k as isize - i as isize))
                .sum()
        })
        .collect();
    Some(RationalGuess {
        numerator: trim(numerator),
        denominator: trim(denominator),
    })
}

fn trim(mut v: Vec<Q>) -> Vec<Q> {
    while v.len() > 1 && v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

/// Gauss–Jordan over Q; `None` when inconsistent or not uniquely solvable.
fn solve_unique(mut rows: Vec<(Vec<Q>, Q)>, unknowns: usize) -> Option<Vec<Q>> {
    let mut pivot_row = 0;
    for col in 0..unknowns {
        let found = (pivot_row..rows.len()).find(|&r| !rows[r].0[col].is_zero())?;
        rows.swap(pivot_row, found);
        let inv = Q::one() / &rows[pivot_row].0[col];
        for c in 0..unknowns {
            rows[pivot_row].0[c] *= &inv;
        }
        rows[pivot_row].1 *= &inv;
        let (pc, pr) = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pivot_row && !row.0[col].is_zero() {
                let f = row.0[col].clone();
                for (x, p) in row.0.iter_mut().zip(&pc) {
                    *x -= &f * p;
                }
                row.1 -= &f * &pr;
            }
        }
        pivot_row += 1;
    }
    if rows[pivot_row..].iter().any(|r| !r.1.is_zero()) {
        return None;
    }
    Some(rows[..unknowns].iter().map(|r| r.1.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    fn ints(v: &[BigInt]) -> Vec<i64> {
        v.iter().map(|x| i64::try_from(x).unwrap()).collect()
    }

    #[test]
    fn doubling_counts() {
        let s = examples::two_solenoid();
        assert_eq!(fix_count(&s, 3), BigInt::from(7));
        let z = zeta_series(&s, 4);
        assert_eq!(ints(&z.counts), [1, 3, 7, 15]);
        assert_eq!(z.guess.unwrap().to_string(), "(1-t)/(1-2t)");
    }

    #[test]
    fn aab_counts() {
        let s = examples::aab_ab();
        assert_eq!(fix_count(&s, 1), BigInt::from(2));
        assert_eq!(fix_count(&s, 2), BigInt::from(6));
        assert_eq!(fix_count_oracle(&s, 2), BigInt::from(6));
        let z = zeta_series(&s, 8);
        assert_eq!(z.guess.unwrap().to_string(), "(1-t)/(1-3t+t^2)");
    }

    #[test]
    fn ab_ab_has_one_fixed_point() {
        assert_eq!(fix_count_oracle(&examples::ab_ab(), 1), BigInt::from(1));
    }

    #[test]
    fn short_series_has_no_guess() {
        let z = zeta_series(&examples::aab_ab(), 2);
        assert_eq!(ints(&z.counts), [2, 6]);
        assert!(z.guess.is_none());
    }

    #[test]
    fn taylor_coefficients_are_integers() {
        let z = zeta_series(&examples::aab_ab(), 6);
        assert!(z.taylor.iter().all(|c| c.is_integer()));
    }
}
