//! Smith normal form with tracked unimodular transforms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::matrix::IntMatrix;

/// `A = U · S · V` with `U`, `V` unimodular and `S` diagonal with
/// `d₁ | d₂ | … ≥ 0`. The inverses of `U` and `V` are kept as well since
/// kernel and membership computations need them.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
    pub u_inv: IntMatrix,
    pub v_inv: IntMatrix,
    pub rank: usize,
}

impl SmithForm {
    /// The nonzero diagonal entries `d₁ | d₂ | … | d_rank`.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.s[(i, i)].clone()).collect()
    }

    /// Checks every defining property exactly.
    pub fn verify(&self, a: &IntMatrix) -> bool {
        let n = self.s.rows().min(self.s.cols());
        let diagonal = (0..self.s.rows())
            .all(|i| (0..self.s.cols()).all(|j| i == j || self.s[(i, j)].is_zero()));
        let chain = (0..n).all(|i| !self.s[(i, i)].is_negative())
            && (1..n).all(|i| {
                let prev = &self.s[(i - 1, i - 1)];
                let cur = &self.s[(i, i)];
                if prev.is_zero() {
                    cur.is_zero()
                } else {
                    cur.is_multiple_of(prev)
                }
            });
        diagonal
            && chain
            && self.u.mul(&self.s).mul(&self.v) == *a
            && self.u.is_unimodular()
            && self.v.is_unimodular()
            && self.u.mul(&self.u_inv) == IntMatrix::identity(self.u.rows())
            && self.v.mul(&self.v_inv) == IntMatrix::identity(self.v.rows())
    }
}

/// Working state: `original = u · s · v` is maintained after every step.
struct Reducer {
    s: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl Reducer {
    // row[dst] += c row[src]  (s ← E s, u ← u E⁻¹, u_inv ← E u_inv)
    fn row_add(&mut self, dst: usize, src: usize, c: &BigInt) {
        self.s.add_row_multiple(dst, src, c);
        self.u.add_col_multiple(src, dst, &-c);
        self.u_inv.add_row_multiple(dst, src, c);
    }

    fn row_swap(&mut self, a: usize, b: usize) {
        self.s.swap_rows(a, b);
        self.u.swap_cols(a, b);
        self.u_inv.swap_rows(a, b);
    }

    fn row_negate(&mut self, i: usize) {
        self.s.negate_row(i);
        self.u.negate_col(i);
        self.u_inv.negate_row(i);
    }

    // col[dst] += c col[src]  (s ← s F, v ← F⁻¹ v, v_inv ← v_inv F)
    fn col_add(&mut self, dst: usize, src: usize, c: &BigInt) {
        self.s.add_col_multiple(dst, src, c);
        self.v.add_row_multiple(src, dst, &-c);
        self.v_inv.add_col_multiple(dst, src, c);
    }

    fn col_swap(&mut self, a: usize, b: usize) {
        self.s.swap_cols(a, b);
        self.v.swap_rows(a, b);
        self.v_inv.swap_cols(a, b);
    }

    fn min_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<((usize, usize), BigInt)> = None;
        for i in t..self.s.rows() {
            for j in t..self.s.cols() {
                let x = &self.s[(i, j)];
                if x.is_zero() {
                    continue;
                }
                let a = x.abs();
                if best.as_ref().is_none_or(|(_, b)| a < *b) {
                    best = Some(((i, j), a));
                }
            }
        }
        best.map(|(p, _)| p)
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let (m, n) = (a.rows(), a.cols());
    let mut r = Reducer {
        s: a.clone(),
        u: IntMatrix::identity(m),
        u_inv: IntMatrix::identity(m),
        v: IntMatrix::identity(n),
        v_inv: IntMatrix::identity(n),
    };
    let mut rank = 0;
    for t in 0..m.min(n) {
        while let Some((pi, pj)) = r.min_pivot(t) {
            r.row_swap(t, pi);
            r.col_swap(t, pj);
            let pivot = r.s[(t, t)].clone();
            let mut dirty = false;
            for i in t + 1..m {
                if r.s[(i, t)].is_zero() {
                    continue;
                }
                let q = r.s[(i, t)].div_floor(&pivot);
                r.row_add(i, t, &-q);
                dirty |= !r.s[(i, t)].is_zero();
            }
            for j in t + 1..n {
                if r.s[(t, j)].is_zero() {
                    continue;
                }
                let q = r.s[(t, j)].div_floor(&pivot);
                r.col_add(j, t, &-q);
                dirty |= !r.s[(t, j)].is_zero();
            }
            if dirty {
                continue;
            }
            // Row and column are clear; enforce divisibility of the rest.
            let offender = (t + 1..m)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !r.s[(i, j)].is_multiple_of(&pivot));
            match offender {
                Some((i, _)) => r.row_add(t, i, &BigInt::one()),
                None => break,
            }
        }
        if r.s[(t, t)].is_zero() {
            break;
        }
        if r.s[(t, t)].is_negative() {
            r.row_negate(t);
        }
        rank += 1;
    }
    SmithForm {
        u: r.u,
        s: r.s,
        v: r.v,
        u_inv: r.u_inv,
        v_inv: r.v_inv,
        rank,
    }
}

pub fn rank(a: &IntMatrix) -> usize {
    smith_normal_form(a).rank
}
