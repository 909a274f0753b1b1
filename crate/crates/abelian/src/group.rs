//! Finitely generated abelian groups in canonical invariant-factor form.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::lattice::{kernel, Lattice};
use crate::matrix::IntMatrix;
use crate::smith::smith_normal_form;
use crate::IntValue;

/// `Z^rank ⊕ Z/d₁ ⊕ … ⊕ Z/d_k` with `2 ≤ d₁ | d₂ | … | d_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FgGroup {
    rank: usize,
    torsion: Vec<BigInt>,
}

impl FgGroup {
    pub fn trivial() -> Self {
        FgGroup {
            rank: 0,
            torsion: vec![],
        }
    }

    pub fn free(rank: usize) -> Self {
        FgGroup {
            rank,
            torsion: vec![],
        }
    }

    /// Canonical group from a diagonal of a Smith form: zeros add free rank,
    /// units vanish. The entries must already form a divisibility chain
    /// apart from units and zeros.
    pub fn from_invariants(extra_rank: usize, diagonal: &[BigInt]) -> Self {
        let mut rank = extra_rank;
        let mut torsion = Vec::new();
        for d in diagonal {
            let d = d.abs();
            if d.is_zero() {
                rank += 1;
            } else if !d.is_one() {
                torsion.push(d);
            }
        }
        torsion.sort();
        FgGroup { rank, torsion }
    }

    /// Group from arbitrary cyclic orders, normalized through a Smith form.
    pub fn from_cyclic_orders(rank: usize, orders: &[BigInt]) -> Self {
        let m = IntMatrix::diagonal(orders);
        let f = smith_normal_form(&m);
        let diag: Vec<BigInt> = (0..orders.len()).map(|i| f.s[(i, i)].clone()).collect();
        Self::from_invariants(rank, &diag)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn is_free(&self) -> bool {
        self.torsion.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    /// Order of the group, when finite.
    pub fn order(&self) -> Option<BigInt> {
        (self.rank == 0).then(|| self.torsion.iter().fold(BigInt::one(), |a, d| a * d))
    }

    pub fn direct_sum(&self, other: &FgGroup) -> FgGroup {
        let orders: Vec<BigInt> = self.torsion.iter().chain(&other.torsion).cloned().collect();
        Self::from_cyclic_orders(self.rank + other.rank, &orders)
    }

    /// Presentation on generators `free…, torsion…` with diagonal relations.
    pub fn presentation(&self) -> Presentation {
        let n = self.rank + self.torsion.len();
        let mut rel = IntMatrix::zeros(n, self.torsion.len());
        for (k, d) in self.torsion.iter().enumerate() {
            rel[(self.rank + k, k)] = d.clone();
        }
        Presentation::new(n, rel)
    }
}

impl fmt::Display for FgGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" ⊕ "))
        }
    }
}

#[derive(Serialize)]
struct FgGroupJson {
    rank: usize,
    torsion: Vec<IntValue>,
    name: String,
}

impl Serialize for FgGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FgGroupJson {
            rank: self.rank,
            torsion: self.torsion.iter().cloned().map(IntValue).collect(),
            name: self.to_string(),
        }
        .serialize(s)
    }
}

/// `Zⁿ / (column span of relations)` on explicitly chosen generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    generators: usize,
    relations: IntMatrix,
}

impl Presentation {
    pub fn new(generators: usize, relations: IntMatrix) -> Self {
        assert_eq!(
            relations.rows(),
            generators,
            "relation vectors must live in Z^generators"
        );
        Presentation {
            generators,
            relations,
        }
    }

    pub fn free(n: usize) -> Self {
        Presentation::new(n, IntMatrix::zeros(n, 0))
    }

    /// `Z/d` on one generator.
    pub fn cyclic(d: i64) -> Self {
        Presentation::new(1, IntMatrix::from_i64(&[&[d]]))
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    pub fn relation_lattice(&self) -> Lattice {
        Lattice::column_span(&self.relations)
    }

    pub fn group(&self) -> FgGroup {
        cokernel(&self.relations)
    }

    /// Whether `v ∈ Zⁿ` represents zero.
    pub fn is_zero(&self, v: &[BigInt]) -> bool {
        self.relation_lattice().contains(v)
    }

    pub fn direct_sum(&self, other: &Presentation) -> Presentation {
        Presentation::new(
            self.generators + other.generators,
            self.relations.block_diag(&other.relations),
        )
    }
}

/// `coker(A: Zⁿ → Zᵐ) = Zᵐ / A Zⁿ` in canonical form.
pub fn cokernel(a: &IntMatrix) -> FgGroup {
    let f = smith_normal_form(a);
    FgGroup::from_invariants(a.rows() - f.rank, &f.invariant_factors())
}

pub fn kernel_rank(a: &IntMatrix) -> usize {
    a.cols() - smith_normal_form(a).rank
}

/// Basis of the integer kernel as Hermite-reduced columns (`cols(A) × k`).
pub fn kernel_basis(a: &IntMatrix) -> IntMatrix {
    kernel(a).basis_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cokernel_examples() {
        assert!(cokernel(&IntMatrix::from_i64(&[&[-1, -1], &[-1, 0]])).is_trivial());
        assert_eq!(cokernel(&IntMatrix::from_i64(&[&[0]])), FgGroup::free(1));
        let g = cokernel(&IntMatrix::from_i64(&[&[1 - 3]]));
        assert_eq!(g.to_string(), "Z/2");
        assert_eq!(g.order(), Some(BigInt::from(2)));
    }

    #[test]
    fn rendering() {
        let g = FgGroup::from_cyclic_orders(2, &[BigInt::from(3)]);
        assert_eq!(g.to_string(), "Z^2 ⊕ Z/3");
        assert_eq!(FgGroup::trivial().to_string(), "0");
        let h = FgGroup::from_cyclic_orders(0, &[BigInt::from(2), BigInt::from(3)]);
        assert_eq!(h.to_string(), "Z/6");
    }

    #[test]
    fn kernel_of_boundary() {
        let d = IntMatrix::from_i64(&[&[0, -1, 1], &[0, 1, -1]]);
        assert_eq!(kernel_rank(&d), 2);
        assert_eq!(
            kernel_basis(&d),
            IntMatrix::from_i64(&[&[1, 0], &[0, 1], &[0, 1]])
        );
    }

    #[test]
    fn presentation_round_trip() {
        let g = FgGroup::from_cyclic_orders(1, &[BigInt::from(4), BigInt::from(6)]);
        assert_eq!(g.presentation().group(), g);
    }
}
