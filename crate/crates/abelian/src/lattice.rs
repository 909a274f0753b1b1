//! Sublattices of `Zⁿ` kept in row-style Hermite normal form.
//!
//! Two lattices are equal iff their Hermite bases are equal, which makes
//! equality and membership exact and cheap.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::matrix::IntMatrix;
use crate::smith::smith_normal_form;

/// Row-style Hermite normal form of the lattice spanned by `rows`.
///
/// The result is in echelon form with strictly increasing pivot columns,
/// positive pivots, and entries above each pivot reduced into `[0, pivot)`.
/// Zero rows are dropped.
pub fn hermite_rows(mut rows: Vec<Vec<BigInt>>, dim: usize) -> Vec<Vec<BigInt>> {
    let mut r = 0;
    for c in 0..dim {
        if r == rows.len() {
            break;
        }
        loop {
            let pick = (r..rows.len())
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&a, &b| rows[a][c].abs().cmp(&rows[b][c].abs()));
            let Some(p) = pick else { break };
            rows.swap(r, p);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[r][c]);
                sub_scaled(&mut rows, i, r, &q);
                done &= rows[i][c].is_zero();
            }
            if done {
                break;
            }
        }
        if rows.get(r).is_none_or(|row| row[c].is_zero()) {
            continue;
        }
        if rows[r][c].is_negative() {
            for x in rows[r].iter_mut() {
                *x = -std::mem::take(x);
            }
        }
        for i in 0..r {
            let q = rows[i][c].div_floor(&rows[r][c]);
            sub_scaled(&mut rows, i, r, &q);
        }
        r += 1;
    }
    rows.truncate(r);
    rows.retain(|row| row.iter().any(|x| !x.is_zero()));
    rows
}

fn sub_scaled(rows: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let (d, s) = if dst < src {
        let (lo, hi) = rows.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = rows.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in d.iter_mut().zip(s) {
        *x -= q * y;
    }
}

/// A sublattice of `Zⁿ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    dim: usize,
    basis: Vec<Vec<BigInt>>,
}

impl Lattice {
    pub fn from_generators<I: IntoIterator<Item = Vec<BigInt>>>(dim: usize, gens: I) -> Self {
        let rows: Vec<Vec<BigInt>> = gens
            .into_iter()
            .inspect(|g| assert_eq!(g.len(), dim))
            .collect();
        Lattice {
            dim,
            basis: hermite_rows(rows, dim),
        }
    }

    /// Lattice spanned by the columns of `m`.
    pub fn column_span(m: &IntMatrix) -> Self {
        Self::from_generators(m.rows(), m.columns())
    }

    pub fn full(dim: usize) -> Self {
        Self::column_span(&IntMatrix::identity(dim))
    }

    pub fn zero(dim: usize) -> Self {
        Lattice { dim, basis: vec![] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    /// Basis vectors as the columns of a `dim × rank` matrix.
    pub fn basis_matrix(&self) -> IntMatrix {
        IntMatrix::from_columns(self.dim, &self.basis)
    }

    /// Integer coordinates of `v` in the Hermite basis, if `v` lies in the lattice.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(v.len(), self.dim);
        let mut rest = v.to_vec();
        let mut coords = Vec::with_capacity(self.basis.len());
        for b in &self.basis {
            let c = b
                .iter()
                .position(|x| !x.is_zero())
                .expect("nonzero basis row");
            let (q, r) = rest[c].div_rem(&b[c]);
            if !r.is_zero() {
                return None;
            }
            for (x, y) in rest.iter_mut().zip(b) {
                *x -= &q * y;
            }
            coords.push(q);
        }
        rest.iter().all(Zero::is_zero).then_some(coords)
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    pub fn sum(&self, other: &Lattice) -> Lattice {
        assert_eq!(self.dim, other.dim);
        Self::from_generators(self.dim, self.basis.iter().chain(&other.basis).cloned())
    }

    /// Image of the lattice under `m` (a `k × dim` matrix).
    pub fn image(&self, m: &IntMatrix) -> Lattice {
        assert_eq!(m.cols(), self.dim);
        Self::from_generators(m.rows(), self.basis.iter().map(|b| m.mul_vec(b)))
    }
}

/// Integer kernel `{x ∈ Zⁿ : A x = 0}`.
pub fn kernel(a: &IntMatrix) -> Lattice {
    let f = smith_normal_form(a);
    let n = a.cols();
    Lattice::from_generators(n, (f.rank..n).map(|j| f.v_inv.column(j)))
}

/// `{x ∈ Zⁿ : A x ∈ L}` for a lattice `L` in the codomain of `A`.
pub fn preimage(a: &IntMatrix, target: &Lattice) -> Lattice {
    assert_eq!(a.rows(), target.dim());
    let n = a.cols();
    let joint = a.hconcat(&target.basis_matrix());
    let k = kernel(&joint);
    Lattice::from_generators(n, k.basis().iter().map(|v| v[..n].to_vec()))
}
