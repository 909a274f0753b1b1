//! K-theory of the germ quotient, of its stable algebra, and of the stable
//! Ruelle algebra through the Pimsner six-term sequence.

use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;
use solenoidk_abelian::{
    cokernel, colimit, induced_ker_coker, kernel_basis, AbelianError, ColimitGroup, FgGroup,
    IntMatrix, Presentation,
};
use thiserror::Error;

use crate::germ::{circle_cover_degree, QuotientPresentation};
use crate::substitution::SubstitutionSystem;

pub const MODEL_GERM: &str =
    "germ-model: quotient points over the vertex are (incoming, outgoing) label pairs";
pub const MODEL_BOUNDARY: &str =
    "boundary-complex: K^0 = ker ∂ and K^1 = coker ∂ for ∂(l,r) = e_r − e_l";
pub const MODEL_WRONG_WAY: &str =
    "wrong-way heuristic: g̃! is taken from the rule named in the provenance field";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KError {
    #[error("no wrong-way rule applies: {0}; supply A0 and A1")]
    NeedUserMatrices(String),
    #[error("dual computation needs free finitely generated K-groups")]
    NotFree,
    #[error("user matrix {which} must be {expected}x{expected}, found {rows}x{cols}")]
    UserShape {
        which: &'static str,
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error(transparent)]
    Abelian(#[from] AbelianError),
}

/// `∂: Z^{germs} → Z^{arcs}`, `∂(l, r) = e_r − e_l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryMap {
    pub matrix: IntMatrix,
}

pub fn boundary_matrix(pres: &QuotientPresentation) -> BoundaryMap {
    let mut m = IntMatrix::zeros(pres.arcs.len(), pres.germs.len());
    for (j, g) in pres.germs.iter().enumerate() {
        m[(g.r, j)] += 1;
        m[(g.l, j)] -= 1;
    }
    BoundaryMap { matrix: m }
}

#[derive(Clone, Debug, Serialize)]
pub struct KGroups {
    pub k0: FgGroup,
    /// Hermite-reduced columns spanning `ker ∂` inside `Z^{germs}`.
    pub k0_basis: IntMatrix,
    pub k1: FgGroup,
    pub boundary: BoundaryMap,
}

pub fn quotient_ktheory(sys: &SubstitutionSystem) -> KGroups {
    let pres = QuotientPresentation::new(sys);
    let boundary = boundary_matrix(&pres);
    let k0_basis = kernel_basis(&boundary.matrix);
    let k0 = FgGroup::free(k0_basis.cols());
    let k1 = cokernel(&boundary.matrix);
    debug_assert_eq!(
        k0.rank() as isize - k1.rank() as isize,
        pres.germs.len() as isize - pres.arcs.len() as isize
    );
    KGroups {
        k0,
        k0_basis,
        k1,
        boundary,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    UserSupplied,
    CircleCoverRule,
    RoseHeuristic,
}

#[derive(Clone, Debug, Serialize)]
pub struct WrongWayData {
    pub a0: IntMatrix,
    pub a1: IntMatrix,
    pub provenance: Provenance,
    /// Basis of `K^0` in which `a0` is written, as columns in `Z^{germs}`.
    pub k0_basis: IntMatrix,
    pub notes: Vec<String>,
}

/// Picks `g̃!`: user matrices, then the circle rule, then the rose heuristic.
pub fn wrongway_matrices(
    sys: &SubstitutionSystem,
    kg: &KGroups,
    user: Option<(IntMatrix, IntMatrix)>,
) -> Result<WrongWayData, KError> {
    let r0 = kg.k0.rank();
    let n1 = kg.k1.presentation().generators();
    if let Some((a0, a1)) = user {
        check_shape("A0", &a0, r0)?;
        check_shape("A1", &a1, n1)?;
        return Ok(WrongWayData {
            a0,
            a1,
            provenance: Provenance::UserSupplied,
            k0_basis: kg.k0_basis.clone(),
            notes: vec!["matrices supplied by the user".into()],
        });
    }
    if let Some(ww) = circle_rule(sys, kg) {
        return Ok(ww);
    }
    rose_heuristic(sys, kg).map_err(KError::NeedUserMatrices)
}

/// `A0 = (d)`, `A1 = (1)` when the quotient is a circle covered `d` times.
pub fn circle_rule(sys: &SubstitutionSystem, kg: &KGroups) -> Option<WrongWayData> {
    let d = circle_cover_degree(sys)?;
    (kg.k0.rank() == 1 && kg.k1 == FgGroup::free(1)).then(|| WrongWayData {
        a0: IntMatrix::from_i64(&[&[d as i64]]),
        a1: IntMatrix::identity(1),
        provenance: Provenance::CircleCoverRule,
        k0_basis: kg.k0_basis.clone(),
        notes: vec![format!("quotient is a circle and g̃ has degree {d}")],
    })
}

/// `A0 = M` in the basis of `K^0` sent to the standard basis of
/// `Z^{edges}` by the incoming label; `A1` the identity.
pub fn rose_heuristic(sys: &SubstitutionSystem, kg: &KGroups) -> Result<WrongWayData, String> {
    let basis = rose_basis(sys, kg)?;
    Ok(WrongWayData {
        a0: sys.substitution_matrix(),
        a1: IntMatrix::identity(kg.k1.presentation().generators()),
        provenance: Provenance::RoseHeuristic,
        k0_basis: basis,
        notes: vec![
            "K^0 identified with Z^edges through the incoming label of each germ".into(),
            "rose heuristic is unverified beyond the bundled examples".into(),
        ],
    })
}

/// `κ(l, r) = e_l` restricted to `ker ∂`; when it is an isomorphism onto
/// `Z^{edges}`, returns the basis of `ker ∂` mapped to the standard one.
fn rose_basis(sys: &SubstitutionSystem, kg: &KGroups) -> Result<IntMatrix, String> {
    let pres = QuotientPresentation::new(sys);
    let n = sys.edge_count();
    if kg.k0.rank() != n {
        return Err(format!(
            "rank K^0 = {} differs from {n} edges",
            kg.k0.rank()
        ));
    }
    let mut kappa = IntMatrix::zeros(n, pres.germs.len());
    for (j, g) in pres.germs.iter().enumerate() {
        kappa[(g.l, j)] += 1;
    }
    let kb = kappa.mul(&kg.k0_basis);
    if !kb.determinant().abs().eq(&BigInt::from(1)) {
        return Err(format!(
            "incoming-label map on ker ∂ has determinant {}",
            kb.determinant()
        ));
    }
    Ok(kg.k0_basis.mul(&unimodular_inverse(&kb)))
}

/// Inverse of a unimodular matrix via the adjugate.
fn unimodular_inverse(m: &IntMatrix) -> IntMatrix {
    let n = m.rows();
    let det = m.determinant();
    let mut inv = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
            let minor = if n == 1 {
                BigInt::from(1)
            } else {
                m.select(&rows, &cols).determinant()
            };
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            inv[(i, j)] = minor * sign * &det;
        }
    }
    inv
}

fn check_shape(which: &'static str, m: &IntMatrix, expected: usize) -> Result<(), KError> {
    if m.rows() != expected || m.cols() != expected {
        return Err(KError::UserShape {
            which,
            expected,
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct StableK {
    pub k0: ColimitGroup,
    pub k1: ColimitGroup,
}

pub fn stable_ktheory(kg: &KGroups, ww: &WrongWayData) -> Result<StableK, KError> {
    Ok(StableK {
        k0: colimit(Presentation::free(kg.k0.rank()), ww.a0.clone())?,
        k1: colimit(kg.k1.presentation(), ww.a1.clone())?,
    })
}

/// One degree of the Pimsner sequence: `0 → sub → K → quotient → 0`.
#[derive(Clone, Debug, Serialize)]
pub struct Extension {
    pub sub: ColimitGroup,
    pub quotient: ColimitGroup,
    /// Present only when the extension is known to split.
    pub assembled: Option<ColimitGroup>,
    pub split: bool,
}

impl Extension {
    fn new(sub: ColimitGroup, quotient: ColimitGroup) -> Self {
        let split = quotient.is_free_finitely_generated();
        let assembled = split.then(|| sub.direct_sum(&quotient));
        Extension {
            sub,
            quotient,
            assembled,
            split,
        }
    }

    pub fn rank(&self) -> usize {
        self.sub.rank() + self.quotient.rank()
    }

    /// The group when split, else `ext(quotient, sub)`.
    pub fn describe(&self) -> String {
        match &self.assembled {
            Some(g) => g.describe(),
            None => format!("ext({}, {})", self.quotient.describe(), self.sub.describe()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PimsnerResult {
    pub coker0: ColimitGroup,
    pub ker0: ColimitGroup,
    pub coker1: ColimitGroup,
    pub ker1: ColimitGroup,
    /// Extension of `ker(1 − A1)` by `coker(1 − A0)`.
    pub k0: Extension,
    /// Extension of `ker(1 − A0)` by `coker(1 − A1)`.
    pub k1: Extension,
    pub bookkeeping_ok: bool,
    pub notes: Vec<String>,
}

impl PimsnerResult {
    pub fn split_flags(&self) -> [bool; 2] {
        [self.k0.split, self.k1.split]
    }
}

#[derive(Serialize)]
struct Pieces<'a> {
    sub: &'a ColimitGroup,
    quotient: &'a ColimitGroup,
}

#[derive(Serialize)]
struct Assembled<'a> {
    k0: Option<&'a ColimitGroup>,
    k1: Option<&'a ColimitGroup>,
    k0_text: String,
    k1_text: String,
}

#[derive(Serialize)]
struct PimsnerView<'a> {
    k0_pieces: Pieces<'a>,
    k1_pieces: Pieces<'a>,
    assembled: Assembled<'a>,
    split_flags: [bool; 2],
    bookkeeping_ok: bool,
    notes: &'a [String],
}

impl Serialize for PimsnerResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PimsnerView {
            k0_pieces: Pieces {
                sub: &self.k0.sub,
                quotient: &self.k0.quotient,
            },
            k1_pieces: Pieces {
                sub: &self.k1.sub,
                quotient: &self.k1.quotient,
            },
            assembled: Assembled {
                k0: self.k0.assembled.as_ref(),
                k1: self.k1.assembled.as_ref(),
                k0_text: self.k0.describe(),
                k1_text: self.k1.describe(),
            },
            split_flags: self.split_flags(),
            bookkeeping_ok: self.bookkeeping_ok,
            notes: &self.notes,
        }
        .serialize(s)
    }
}

/// Pimsner pieces for maps `b0`, `b1` acting on the colimit groups `g0`, `g1`.
pub fn pimsner(
    g0: &ColimitGroup,
    b0: &IntMatrix,
    g1: &ColimitGroup,
    b1: &IntMatrix,
) -> Result<PimsnerResult, KError> {
    let (ker0, coker0) = induced_ker_coker(g0, b0)?;
    let (ker1, coker1) = induced_ker_coker(g1, b1)?;
    let k0 = Extension::new(coker0.clone(), ker1.clone());
    let k1 = Extension::new(coker1.clone(), ker0.clone());
    // rank-nullity for an endomorphism of a finite-dimensional Q-space, and
    // additivity of rank in each assembled extension
    let assembled_rank_ok = |e: &Extension| {
        e.assembled
            .as_ref()
            .is_none_or(|g| g.rank() == e.sub.rank() + e.quotient.rank())
    };
    let bookkeeping_ok = ker0.rank() == coker0.rank()
        && ker1.rank() == coker1.rank()
        && assembled_rank_ok(&k0)
        && assembled_rank_ok(&k1)
        && k0.rank() == coker0.rank() + ker1.rank()
        && k1.rank() == coker1.rank() + ker0.rank()
        && k0.rank() == k1.rank();
    Ok(PimsnerResult {
        coker0,
        ker0,
        coker1,
        ker1,
        k0,
        k1,
        bookkeeping_ok,
        notes: Vec::new(),
    })
}

pub fn ruelle_ktheory(stable: &StableK, ww: &WrongWayData) -> Result<PimsnerResult, KError> {
    pimsner(
        &stable.k0,
        &ww.a0.one_minus(),
        &stable.k1,
        &ww.a1.one_minus(),
    )
}

/// The same engine on transposed matrices, identifying K-homology with the
/// dual groups. Only meaningful when both quotient groups are free.
pub fn unstable_ruelle_ktheory(kg: &KGroups, ww: &WrongWayData) -> Result<PimsnerResult, KError> {
    if !kg.k0.is_free() || !kg.k1.is_free() {
        return Err(KError::NotFree);
    }
    let a0 = ww.a0.transpose();
    let a1 = ww.a1.transpose();
    let g0 = colimit(Presentation::free(kg.k0.rank()), a0.clone())?;
    let g1 = colimit(Presentation::free(kg.k1.rank()), a1.clone())?;
    let mut res = pimsner(&g0, &a0.one_minus(), &g1, &a1.one_minus())?;
    res.notes.push("free-case dual computation".into());
    Ok(res)
}

/// The p/q-solenoid family: `K^0 = Z` with `g̃! = p`, `K^1 = Z[1/q]` with
/// `g̃! = 1`. The torsion `Z/(p−1)` is reported in both degrees it has been
/// placed in; neither placement is treated as reference data.
#[derive(Clone, Debug, Serialize)]
pub struct PqReport {
    pub p: u64,
    pub q: u64,
    pub stable: StableK,
    pub pimsner: PimsnerResult,
    /// Degree in which the six-term sequence as oriented here puts the torsion.
    pub convention: TorsionPlacement,
    /// The opposite placement, as stated for this family elsewhere.
    pub alternative: TorsionPlacement,
    pub non_normative: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionPlacement {
    pub k0: String,
    pub k1: String,
    pub torsion_degree: u8,
}

pub fn pq_family(p: u64, q: u64) -> Result<PqReport, KError> {
    let k0 = colimit(Presentation::free(1), IntMatrix::from_i64(&[&[p as i64]]))?;
    let k1 = colimit(Presentation::free(1), IntMatrix::from_i64(&[&[q as i64]]))?;
    let b0 = IntMatrix::from_i64(&[&[1 - p as i64]]);
    let b1 = IntMatrix::from_i64(&[&[0]]);
    let pimsner = pimsner(&k0, &b0, &k1, &b1)?;
    let torsion = pimsner.coker0.describe();
    let free = pimsner.ker1.describe();
    let convention = TorsionPlacement {
        k0: pimsner.k0.describe(),
        k1: pimsner.k1.describe(),
        torsion_degree: 0,
    };
    let with_torsion = |g: &str| {
        if torsion == "0" {
            g.to_string()
        } else {
            format!("{g} ⊕ {torsion}")
        }
    };
    let alternative = TorsionPlacement {
        k0: free.clone(),
        k1: with_torsion(&pimsner.coker1.describe()),
        torsion_degree: 1,
    };
    Ok(PqReport {
        p,
        q,
        stable: StableK { k0, k1 },
        pimsner,
        convention,
        alternative,
        non_normative: true,
    })
}

/// Everything the K-theory stage reports for one system.
#[derive(Clone, Debug, Serialize)]
pub struct KReport {
    pub k0_quotient: FgGroup,
    pub k1_quotient: FgGroup,
    #[serde(rename = "A0")]
    pub a0: IntMatrix,
    #[serde(rename = "A1")]
    pub a1: IntMatrix,
    pub provenance: Provenance,
    pub wrong_way_notes: Vec<String>,
    pub stable: StableK,
    pub ruelle: PimsnerResult,
    pub model_assumptions: Vec<&'static str>,
}

pub fn k_report(
    sys: &SubstitutionSystem,
    user: Option<(IntMatrix, IntMatrix)>,
) -> Result<KReport, KError> {
    let kg = quotient_ktheory(sys);
    let ww = wrongway_matrices(sys, &kg, user)?;
    let stable = stable_ktheory(&kg, &ww)?;
    let ruelle = ruelle_ktheory(&stable, &ww)?;
    Ok(KReport {
        k0_quotient: kg.k0,
        k1_quotient: kg.k1,
        a0: ww.a0,
        a1: ww.a1,
        provenance: ww.provenance,
        wrong_way_notes: ww.notes,
        stable,
        ruelle,
        model_assumptions: vec![MODEL_GERM, MODEL_BOUNDARY, MODEL_WRONG_WAY],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    #[test]
    fn aab_boundary_and_kernel() {
        let s = examples::aab_ab();
        let kg = quotient_ktheory(&s);
        assert_eq!(
            kg.boundary.matrix,
            IntMatrix::from_i64(&[&[0, -1, 1], &[0, 1, -1]])
        );
        assert_eq!(
            kg.k0_basis,
            IntMatrix::from_i64(&[&[1, 0], &[0, 1], &[0, 1]])
        );
        assert_eq!(kg.k0.to_string(), "Z^2");
        assert_eq!(kg.k1.to_string(), "Z");
    }

    #[test]
    fn aab_full_pipeline() {
        let r = k_report(&examples::aab_ab(), None).unwrap();
        assert_eq!(r.provenance, Provenance::RoseHeuristic);
        assert_eq!(r.a0, IntMatrix::from_i64(&[&[2, 1], &[1, 1]]));
        assert_eq!(r.a1, IntMatrix::identity(1));
        assert_eq!(r.stable.k0.describe(), "Z^2");
        assert_eq!(r.stable.k1.describe(), "Z");
        assert_eq!(r.ruelle.k0.describe(), "Z");
        assert_eq!(r.ruelle.k1.describe(), "Z");
        assert!(r.ruelle.bookkeeping_ok);
    }

    #[test]
    fn rose_basis_maps_to_standard_basis() {
        let s = examples::aab_ab();
        let kg = quotient_ktheory(&s);
        let ww = wrongway_matrices(&s, &kg, None).unwrap();
        // κ sends the chosen basis to e_a, e_b
        assert_eq!(
            ww.k0_basis,
            IntMatrix::from_i64(&[&[1, -1], &[0, 1], &[0, 1]])
        );
    }

    #[test]
    fn circles() {
        for (s, d) in [
            (examples::two_solenoid(), 2),
            (examples::ab_ab(), 2),
            (examples::n_solenoid(3), 3),
        ] {
            let r = k_report(&s, None).unwrap();
            assert_eq!(r.provenance, Provenance::CircleCoverRule);
            assert_eq!(r.a0, IntMatrix::from_i64(&[&[d]]));
            assert_eq!(r.stable.k0.describe(), format!("Z[1/{d}]"));
            assert_eq!(r.stable.k1.describe(), "Z");
        }
    }

    #[test]
    fn three_solenoid_ruelle_torsion() {
        let r = k_report(&examples::n_solenoid(3), None).unwrap();
        assert_eq!(r.ruelle.k0.describe(), "Z ⊕ Z/2");
        assert_eq!(r.ruelle.k1.describe(), "Z");
        assert_eq!(r.ruelle.split_flags(), [true, true]);
    }

    #[test]
    fn pq_reports_both_placements() {
        let r = pq_family(3, 2).unwrap();
        assert!(r.non_normative);
        assert_eq!(r.stable.k0.describe(), "Z[1/3]");
        assert_eq!(r.stable.k1.describe(), "Z[1/2]");
        assert_eq!(r.alternative.k0, "Z[1/2]");
        assert_eq!(r.alternative.k1, "Z[1/2] ⊕ Z/2");
        assert_eq!(r.convention.k1, "Z[1/2]");
        assert!(!r.pimsner.k0.split);
        assert!(r.pimsner.bookkeeping_ok);
    }

    #[test]
    fn user_override_shape_checked() {
        let s = examples::aab_ab();
        let kg = quotient_ktheory(&s);
        let bad = wrongway_matrices(
            &s,
            &kg,
            Some((IntMatrix::identity(1), IntMatrix::identity(1))),
        );
        assert!(matches!(bad, Err(KError::UserShape { which: "A0", .. })));
        let ok = wrongway_matrices(
            &s,
            &kg,
            Some((IntMatrix::identity(2), IntMatrix::identity(1))),
        )
        .unwrap();
        let st = stable_ktheory(&kg, &ok).unwrap();
        assert_eq!(st.k0.describe(), "Z^2");
    }

    #[test]
    fn dual_computation() {
        for s in [examples::two_solenoid(), examples::aab_ab()] {
            let kg = quotient_ktheory(&s);
            let ww = wrongway_matrices(&s, &kg, None).unwrap();
            let u = unstable_ruelle_ktheory(&kg, &ww).unwrap();
            assert_eq!((u.k0.describe(), u.k1.describe()), ("Z".into(), "Z".into()));
        }
    }
}
