//! Stationary colimits `colim(G, h) = lim→ (G →h G →h G → …)` of a finitely
//! generated abelian group under one endomorphism.
//!
//! An element is a pair `(v, k)` meaning `v ∈ G` placed at stage `k`, with
//! `(v, k) ~ (h v, k + 1)`. The torsion subgroup of the colimit is the
//! eventual image of the torsion of `G`, and the torsion-free quotient is the
//! colimit of `Zʳ` under the induced map; the two split because the torsion
//! part is bounded.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::group::{cokernel, FgGroup, Presentation};
use crate::lattice::{preimage, Lattice};
use crate::matrix::IntMatrix;
use crate::smith::smith_normal_form;
use crate::AbelianError;

#[derive(Clone, Debug)]
pub struct ColimitGroup {
    base: Presentation,
    endo: IntMatrix,
    stable_rank: usize,
    stable_free_endo: IntMatrix,
    torsion: FgGroup,
    kernel_stabilization: usize,
    pretty: Option<String>,
}

/// `colim(base, h)`; fails with [`AbelianError::IncompatibleEndo`] when `h`
/// does not preserve the relation lattice.
pub fn colimit(base: Presentation, endo: IntMatrix) -> Result<ColimitGroup, AbelianError> {
    let n = base.generators();
    if endo.rows() != n || endo.cols() != n {
        return Err(AbelianError::ShapeMismatch {
            expected: (n, n),
            found: (endo.rows(), endo.cols()),
        });
    }
    let rel = base.relation_lattice();
    if !rel.basis().iter().all(|r| rel.contains(&endo.mul_vec(r))) {
        return Err(AbelianError::IncompatibleEndo);
    }

    let f = smith_normal_form(base.relations());
    let h = f.u_inv.mul(&endo).mul(&f.u);
    let diag = f.invariant_factors();
    let tors_idx: Vec<usize> = (0..f.rank).filter(|&i| !diag[i].is_one()).collect();
    let free_idx: Vec<usize> = (f.rank..n).collect();

    let (stable_rank, stable_free_endo) = stable_free_part(&h.select(&free_idx, &free_idx));
    let torsion = eventual_torsion(
        &h.select(&tors_idx, &tors_idx),
        &tors_idx
            .iter()
            .map(|&i| diag[i].clone())
            .collect::<Vec<_>>(),
    );
    let kernel_stabilization = kernel_stabilization(&endo, &rel);

    let mut g = ColimitGroup {
        base,
        endo,
        stable_rank,
        stable_free_endo,
        torsion,
        kernel_stabilization,
        pretty: None,
    };
    g.pretty = g.recognize();
    Ok(g)
}

/// `colim(G, id) = G`.
pub fn constant(base: Presentation) -> ColimitGroup {
    let n = base.generators();
    colimit(base, IntMatrix::identity(n)).expect("identity preserves every relation lattice")
}

/// Restriction of `h` to the eventual image `hʳ Zʳ`, on which it is injective.
fn stable_free_part(h: &IntMatrix) -> (usize, IntMatrix) {
    let r = h.rows();
    let image = Lattice::full(r).image(&h.pow(r as u32));
    let s = image.rank();
    let mut c = IntMatrix::zeros(s, s);
    for (j, b) in image.basis().iter().enumerate() {
        let coords = image
            .coordinates(&h.mul_vec(b))
            .expect("eventual image is invariant");
        for (i, x) in coords.into_iter().enumerate() {
            c[(i, j)] = x;
        }
    }
    (s, c)
}

fn eventual_torsion(h: &IntMatrix, orders: &[BigInt]) -> FgGroup {
    let t = orders.len();
    let relations = Lattice::column_span(&IntMatrix::diagonal(orders));
    let mut current = Lattice::full(t);
    loop {
        let next = current.image(h).sum(&relations);
        if next == current {
            break;
        }
        current = next;
    }
    // current ⊇ relations, both of full rank t
    let mut rel = IntMatrix::zeros(current.rank(), t);
    for (j, d) in orders.iter().enumerate() {
        let mut v = vec![BigInt::zero(); t];
        v[j] = d.clone();
        let coords = current.coordinates(&v).expect("relations lie in the image");
        for (i, x) in coords.into_iter().enumerate() {
            rel[(i, j)] = x;
        }
    }
    cokernel(&rel)
}

/// Least `M` with `ker hᴹ = ker hᴹ⁺¹` on `Zⁿ / rel`.
fn kernel_stabilization(h: &IntMatrix, rel: &Lattice) -> usize {
    let n = h.rows();
    let mut power = IntMatrix::identity(n);
    let mut current = preimage(&power, rel);
    let mut m = 0;
    loop {
        power = h.mul(&power);
        let next = preimage(&power, rel);
        if next == current {
            return m;
        }
        current = next;
        m += 1;
    }
}

fn radical(n: &BigInt) -> BigInt {
    let mut n = n.abs();
    let mut out = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= n {
        if n.is_multiple_of(&p) {
            out *= &p;
            while n.is_multiple_of(&p) {
                n /= &p;
            }
        }
        p += 1;
    }
    if n > BigInt::one() {
        out *= n;
    }
    out
}

impl ColimitGroup {
    pub fn base(&self) -> &Presentation {
        &self.base
    }

    pub fn endo(&self) -> &IntMatrix {
        &self.endo
    }

    /// Rank of the colimit (dimension after tensoring with Q).
    pub fn rank(&self) -> usize {
        self.stable_rank
    }

    /// The induced map on the eventual image of the torsion-free quotient.
    pub fn stable_free_endo(&self) -> &IntMatrix {
        &self.stable_free_endo
    }

    pub fn torsion(&self) -> &FgGroup {
        &self.torsion
    }

    pub fn kernel_stabilization(&self) -> usize {
        self.kernel_stabilization
    }

    /// Recognized name such as `Z[1/2]` or `Z^2 ⊕ Z/3`; `None` when the
    /// colimit is outside the recognition table.
    pub fn pretty(&self) -> Option<&str> {
        self.pretty.as_deref()
    }

    /// Whether the colimit is finitely generated and free.
    pub fn is_free_finitely_generated(&self) -> bool {
        self.torsion.is_trivial() && self.free_part_is_finitely_generated()
    }

    pub fn is_finitely_generated(&self) -> bool {
        self.free_part_is_finitely_generated()
    }

    /// The group itself when it is finitely generated.
    pub fn as_fg_group(&self) -> Option<FgGroup> {
        self.is_finitely_generated()
            .then(|| FgGroup::free(self.stable_rank).direct_sum(&self.torsion))
    }

    fn free_part_is_finitely_generated(&self) -> bool {
        self.stable_rank == 0 || self.stable_free_endo.determinant().abs().is_one()
    }

    fn free_part_name(&self) -> Option<String> {
        if self.free_part_is_finitely_generated() {
            return Some(FgGroup::free(self.stable_rank).to_string());
        }
        if self.stable_rank == 1 {
            let m = radical(&self.stable_free_endo[(0, 0)]);
            return Some(format!("Z[1/{m}]"));
        }
        None
    }

    fn recognize(&self) -> Option<String> {
        let free = self.free_part_name()?;
        Some(join_parts(&free, &self.torsion))
    }

    /// Pretty name when recognized, otherwise a structural description of
    /// the stabilized free part plus the torsion.
    pub fn describe(&self) -> String {
        match &self.pretty {
            Some(p) => p.clone(),
            None => {
                let free = format!("colim(Z^{}, {})", self.stable_rank, self.stable_free_endo);
                join_parts(&free, &self.torsion)
            }
        }
    }

    /// Equality of `(v, j)` and `(w, k)` in the colimit.
    pub fn element_eq(&self, v: &[BigInt], j: u32, w: &[BigInt], k: u32) -> bool {
        let n = self.base.generators();
        assert!(
            v.len() == n && w.len() == n,
            "element outside the base group"
        );
        let (v, w) = if j <= k {
            (self.endo.pow(k - j).mul_vec(v), w.to_vec())
        } else {
            (v.to_vec(), self.endo.pow(j - k).mul_vec(w))
        };
        let diff: Vec<BigInt> = v.iter().zip(&w).map(|(a, b)| a - b).collect();
        let pushed = self
            .endo
            .pow(self.kernel_stabilization as u32)
            .mul_vec(&diff);
        self.base.is_zero(&pushed)
    }

    pub fn direct_sum(&self, other: &ColimitGroup) -> ColimitGroup {
        colimit(
            self.base.direct_sum(&other.base),
            self.endo.block_diag(&other.endo),
        )
        .expect("block-diagonal endomorphism preserves block relations")
    }

    /// Isomorphism-class key: equal keys imply isomorphic groups. Only
    /// available for recognized colimits.
    pub fn iso_key(&self) -> Option<String> {
        self.pretty.clone()
    }
}

fn join_parts(free: &str, torsion: &FgGroup) -> String {
    let mut parts = Vec::new();
    if free != "0" {
        parts.push(free.to_string());
    }
    if !torsion.is_trivial() {
        parts.push(torsion.to_string());
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" ⊕ ")
    }
}

impl fmt::Display for ColimitGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

#[derive(Serialize)]
struct PresentationJson<'a> {
    generators: usize,
    relations: &'a IntMatrix,
}

#[derive(Serialize)]
struct ColimitJson<'a> {
    name: String,
    recognized: bool,
    rank: usize,
    torsion: &'a FgGroup,
    finitely_generated: bool,
    base: PresentationJson<'a>,
    endo: &'a IntMatrix,
}

impl Serialize for ColimitGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ColimitJson {
            name: self.describe(),
            recognized: self.pretty.is_some(),
            rank: self.stable_rank,
            torsion: &self.torsion,
            finitely_generated: self.is_finitely_generated(),
            base: PresentationJson {
                generators: self.base.generators(),
                relations: self.base.relations(),
            },
            endo: &self.endo,
        }
        .serialize(s)
    }
}

/// Kernel and cokernel of a map `B` on `colim(G, h)` that commutes with `h`,
/// computed stagewise on `G` and then passed to the colimit.
pub fn induced_ker_coker(
    g: &ColimitGroup,
    b: &IntMatrix,
) -> Result<(ColimitGroup, ColimitGroup), AbelianError> {
    let n = g.base.generators();
    if b.rows() != n || b.cols() != n {
        return Err(AbelianError::ShapeMismatch {
            expected: (n, n),
            found: (b.rows(), b.cols()),
        });
    }
    let rel = g.base.relation_lattice();
    let well_defined = rel.basis().iter().all(|r| rel.contains(&b.mul_vec(r)));
    let commutator = b.mul(&g.endo).sub(&g.endo.mul(b));
    let commutes = commutator.columns().iter().all(|c| rel.contains(c));
    if !well_defined || !commutes {
        return Err(AbelianError::NonCommuting);
    }

    // ker: {x : Bx ∈ rel} / rel, re-expressed on a basis of that lattice
    let ker_lattice = preimage(b, &rel);
    let s = ker_lattice.rank();
    let coords_of = |v: &[BigInt]| {
        ker_lattice
            .coordinates(v)
            .expect("vector lies in the kernel lattice")
    };
    let rel_cols = g.base.relations().columns();
    let mut ker_rel = IntMatrix::zeros(s, rel_cols.len());
    for (j, r) in rel_cols.iter().enumerate() {
        for (i, x) in coords_of(r).into_iter().enumerate() {
            ker_rel[(i, j)] = x;
        }
    }
    let mut ker_endo = IntMatrix::zeros(s, s);
    for (j, basis_vec) in ker_lattice.basis().iter().enumerate() {
        for (i, x) in coords_of(&g.endo.mul_vec(basis_vec))
            .into_iter()
            .enumerate()
        {
            ker_endo[(i, j)] = x;
        }
    }
    let ker = colimit(Presentation::new(s, ker_rel), ker_endo)?;

    let coker_rel = g.base.relations().hconcat(b);
    let coker = colimit(Presentation::new(n, coker_rel), g.endo.clone())?;
    Ok((ker, coker))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_times(m: i64) -> ColimitGroup {
        colimit(Presentation::free(1), IntMatrix::from_i64(&[&[m]])).unwrap()
    }

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn dyadic_rationals() {
        let g = z_times(2);
        assert_eq!(g.pretty(), Some("Z[1/2]"));
        assert!(!g.is_finitely_generated());
        assert_eq!(z_times(4).pretty(), Some("Z[1/2]"));
        assert_eq!(z_times(-6).pretty(), Some("Z[1/6]"));
        assert_eq!(z_times(1).pretty(), Some("Z"));
        assert_eq!(z_times(0).pretty(), Some("0"));
    }

    #[test]
    fn unimodular_endo_gives_base() {
        let g = colimit(
            Presentation::free(2),
            IntMatrix::from_i64(&[&[2, 1], &[1, 1]]),
        )
        .unwrap();
        assert_eq!(g.pretty(), Some("Z^2"));
        assert!(g.is_free_finitely_generated());
    }

    #[test]
    fn torsion_eventual_image() {
        let g = colimit(Presentation::cyclic(6), IntMatrix::from_i64(&[&[3]])).unwrap();
        assert_eq!(g.pretty(), Some("Z/2"));
    }

    #[test]
    fn incompatible_endo_rejected() {
        // Z/4 with x ↦ x is fine, but a relation lattice 4Z needs h(4) ∈ 4Z;
        // use the non-diagonal Z ⊕ Z/2 where h sends the torsion generator to
        // the free one.
        let base = Presentation::new(2, IntMatrix::from_i64(&[&[0], &[2]]));
        let h = IntMatrix::from_i64(&[&[1, 1], &[0, 1]]);
        assert!(matches!(
            colimit(base, h),
            Err(AbelianError::IncompatibleEndo)
        ));
    }

    #[test]
    fn element_equality_in_dyadics() {
        let g = z_times(2);
        assert!(g.element_eq(&v(&[1]), 0, &v(&[2]), 1));
        assert!(!g.element_eq(&v(&[1]), 0, &v(&[3]), 1));
        assert!(g.element_eq(&v(&[0]), 3, &v(&[0]), 7));
    }

    #[test]
    fn nilpotent_kills_everything() {
        let g = colimit(
            Presentation::free(2),
            IntMatrix::from_i64(&[&[0, 1], &[0, 0]]),
        )
        .unwrap();
        assert_eq!(g.pretty(), Some("0"));
        assert_eq!(g.kernel_stabilization(), 2);
        assert!(g.element_eq(&v(&[5, 7]), 0, &v(&[0, 0]), 0));
    }

    #[test]
    fn induced_ker_coker_examples() {
        let (k, c) = induced_ker_coker(&z_times(2), &IntMatrix::from_i64(&[&[-1]])).unwrap();
        assert_eq!((k.pretty(), c.pretty()), (Some("0"), Some("0")));

        let (k, c) = induced_ker_coker(&z_times(1), &IntMatrix::from_i64(&[&[0]])).unwrap();
        assert_eq!((k.pretty(), c.pretty()), (Some("Z"), Some("Z")));

        // p = 7, q = 3: coker is colim(Z/6, ×3) = Z/2
        let (k, c) = induced_ker_coker(&z_times(3), &IntMatrix::from_i64(&[&[1 - 7]])).unwrap();
        assert_eq!(k.pretty(), Some("0"));
        assert_eq!(c.pretty(), Some("Z/2"));
    }

    #[test]
    fn non_commuting_map_rejected() {
        let g = colimit(
            Presentation::free(2),
            IntMatrix::from_i64(&[&[2, 0], &[0, 1]]),
        )
        .unwrap();
        let b = IntMatrix::from_i64(&[&[0, 1], &[1, 0]]);
        assert!(matches!(
            induced_ker_coker(&g, &b),
            Err(AbelianError::NonCommuting)
        ));
    }
}
