//! The germ model of the non-Hausdorff quotient over the branch vertex.
//!
//! Every point of the quotient over the vertex is recorded by the pair of
//! edge labels approaching it from the left and leaving it to the right.
//! The induced map acts on such pairs by `τ(l, r) = (last g(l), first g(r))`.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::point::{
    apply_g, apply_g_n, apply_g_y, apply_g_y_n, branch_index, branches, collapse, Branch, PLPoint,
    YPoint,
};
use crate::poly::Q;
use crate::substitution::{EdgeId, SubstitutionSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Germ {
    pub l: EdgeId,
    pub r: EdgeId,
}

impl Germ {
    pub fn new(l: EdgeId, r: EdgeId) -> Self {
        Germ { l, r }
    }

    pub fn tau(&self, sys: &SubstitutionSystem) -> Germ {
        Germ::new(sys.last_letter(self.l), sys.first_letter(self.r))
    }

    pub fn tau_n(&self, sys: &SubstitutionSystem, n: usize) -> Germ {
        (0..n).fold(*self, |g, _| g.tau(sys))
    }

    pub fn render(&self, sys: &SubstitutionSystem) -> String {
        sys.render(&[self.l, self.r])
    }

    /// Distinct germs sharing exactly one side cannot be separated.
    pub fn non_separated(&self, other: &Germ) -> bool {
        self != other && (self.l == other.l || self.r == other.r)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GermError {
    #[error("germ {0} is not admissible")]
    InadmissibleGerm(String),
    #[error("germ map never becomes constant within {bound} steps; its eventual image has {cycle} germs")]
    NoFlattening { bound: usize, cycle: usize },
    #[error("identity {identity} fails at {witness}: {lhs} vs {rhs}")]
    IdentityViolation {
        identity: &'static str,
        witness: String,
        lhs: String,
        rhs: String,
    },
    #[error("no iterate up to {bound} of edge {edge} covers every edge")]
    NeverCovers { edge: String, bound: usize },
}

/// Flattening constant: `τ^value` is constant on the admissible germs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct K0Constant(pub usize);

impl K0Constant {
    pub fn value(self) -> usize {
        self.0
    }
}

/// Combinatorial description of the quotient: arcs, germs, germ map, and
/// the pairs of germs that have no disjoint neighbourhoods.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientPresentation {
    pub arcs: Vec<EdgeId>,
    pub germs: Vec<Germ>,
    /// `tau[i]` is the index of `τ(germs[i])`.
    pub tau: Vec<usize>,
    /// Unordered pairs `(i, j)` with `i < j`.
    pub nonsep: Vec<(usize, usize)>,
}

impl QuotientPresentation {
    pub fn new(sys: &SubstitutionSystem) -> Self {
        let germs: Vec<Germ> = admissible_germs(sys).into_iter().collect();
        let index: BTreeMap<Germ, usize> = germs.iter().enumerate().map(|(i, g)| (*g, i)).collect();
        let tau = germs.iter().map(|g| index[&g.tau(sys)]).collect();
        let mut nonsep = Vec::new();
        for i in 0..germs.len() {
            for j in i + 1..germs.len() {
                if germs[i].non_separated(&germs[j]) {
                    nonsep.push((i, j));
                }
            }
        }
        QuotientPresentation {
            arcs: sys.edges().collect(),
            germs,
            tau,
            nonsep,
        }
    }

    pub fn index_of(&self, g: &Germ) -> Option<usize> {
        self.germs.binary_search(g).ok()
    }

    /// Maximal sets of pairwise non-separated germs sharing a side.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
        let by = |key: &dyn Fn(&Germ) -> EdgeId| {
            let mut m: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
            for (i, g) in self.germs.iter().enumerate() {
                m.entry(key(g)).or_default().push(i);
            }
            m.into_values().filter(|v| v.len() > 1).collect::<Vec<_>>()
        };
        out.extend(by(&|g| g.l));
        out.extend(by(&|g| g.r));
        out.into_iter().collect()
    }
}

/// Interior two-letter factors of every image word, closed under `τ`.
pub fn admissible_germs(sys: &SubstitutionSystem) -> BTreeSet<Germ> {
    let mut set = BTreeSet::new();
    let mut todo = Vec::new();
    for e in sys.edges() {
        for pair in sys.image(e).windows(2) {
            let g = Germ::new(pair[0], pair[1]);
            if set.insert(g) {
                todo.push(g);
            }
        }
    }
    while let Some(g) = todo.pop() {
        let next = g.tau(sys);
        if set.insert(next) {
            todo.push(next);
        }
    }
    set
}

pub fn germ_map(sys: &SubstitutionSystem, germ: &Germ) -> Result<Germ, GermError> {
    if !admissible_germs(sys).contains(germ) {
        return Err(GermError::InadmissibleGerm(germ.render(sys)));
    }
    Ok(germ.tau(sys))
}

pub fn is_hausdorff(sys: &SubstitutionSystem) -> bool {
    let germs: Vec<Germ> = admissible_germs(sys).into_iter().collect();
    germs
        .iter()
        .enumerate()
        .all(|(i, a)| germs[i + 1..].iter().all(|b| !a.non_separated(b)))
}

/// Local homeomorphism test for the PL map on the rose. The star map at the
/// vertex must be injective, and with two or more edges no interior point may
/// land on the vertex, since its two half-edges alone are not a neighbourhood.
pub fn is_local_homeomorphism(sys: &SubstitutionSystem) -> bool {
    let incoming: BTreeSet<EdgeId> = sys.edges().map(|e| sys.last_letter(e)).collect();
    let outgoing: BTreeSet<EdgeId> = sys.edges().map(|e| sys.first_letter(e)).collect();
    let star_injective = incoming.len() == sys.edge_count() && outgoing.len() == sys.edge_count();
    let no_interior_hits = sys.edge_count() == 1 || sys.edges().all(|e| sys.image(e).len() == 1);
    star_injective && no_interior_hits
}

pub fn k0_constant(sys: &SubstitutionSystem) -> Result<K0Constant, GermError> {
    let germs: Vec<Germ> = admissible_germs(sys).into_iter().collect();
    let mut current: BTreeSet<Germ> = germs.iter().copied().collect();
    for k in 0..=germs.len() {
        if current.len() == 1 {
            return Ok(K0Constant(k));
        }
        current = current.iter().map(|g| g.tau(sys)).collect();
    }
    Err(GermError::NoFlattening {
        bound: germs.len(),
        cycle: current.len(),
    })
}

/// Germs lying on a `τ`-cycle.
pub fn periodic_germs(sys: &SubstitutionSystem) -> Vec<Germ> {
    let germs = admissible_germs(sys);
    let n = germs.len();
    germs
        .into_iter()
        .filter(|g| (1..=n).any(|k| g.tau_n(sys, k) == *g))
        .collect()
}

/// When the quotient is a single circle, the degree of `g̃` on it.
///
/// The quotient is a circle exactly when it is Hausdorff and every arc has
/// one germ on each end, with the arcs joined up in a single cycle.
pub fn circle_cover_degree(sys: &SubstitutionSystem) -> Option<usize> {
    if !is_hausdorff(sys) {
        return None;
    }
    let germs = admissible_germs(sys);
    let mut next: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();
    for g in &germs {
        next.insert(g.l, g.r);
    }
    let n = sys.edge_count();
    if next.len() != n || germs.iter().map(|g| g.r).collect::<BTreeSet<_>>().len() != n {
        return None;
    }
    let mut e = 0;
    for step in 1..=n {
        e = next[&e];
        if e == 0 && step < n {
            return None;
        }
    }
    let total: usize = sys.edges().map(|e| sys.image(e).len()).sum();
    total.is_multiple_of(n).then_some(total / n)
}

/// Least `N ≥ 1` such that `gᴺ(e)` uses every edge.
pub fn covering_time(sys: &SubstitutionSystem, e: EdgeId) -> Result<usize, GermError> {
    let d = sys.edge_count();
    let bound = d * ((d - 1) * (d - 1) + 1);
    let mut letters: BTreeSet<EdgeId> = BTreeSet::from([e]);
    for n in 1..=bound {
        letters = letters
            .iter()
            .flat_map(|&x| sys.image(x).iter().copied())
            .collect();
        if letters.len() == d {
            return Ok(n);
        }
    }
    Err(GermError::NeverCovers {
        edge: sys.label(e).to_string(),
        bound,
    })
}

/// The lift `s` from the rose to the quotient at flattening level `k0`.
pub struct Lift {
    k0: usize,
    constant: Germ,
    levels: Vec<Vec<Branch>>,
}

impl Lift {
    pub fn new(sys: &SubstitutionSystem) -> Result<Self, GermError> {
        let k0 = k0_constant(sys)?.value();
        let any = *admissible_germs(sys)
            .iter()
            .next()
            .expect("expanding rose has a germ");
        Ok(Lift {
            k0,
            constant: any.tau_n(sys, k0),
            levels: sys.edges().map(|e| branches(sys, e, k0)).collect(),
        })
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    /// The single germ in the image of `τ^{K₀}`.
    pub fn constant_germ(&self) -> Germ {
        self.constant
    }

    pub fn apply(&self, y: &YPoint) -> PLPoint {
        match y {
            YPoint::Vertex => PLPoint::Germ(self.constant),
            YPoint::Interior { edge, t } => {
                let level = &self.levels[*edge];
                match branch_index(level, t) {
                    Ok(i) => PLPoint::Interior {
                        edge: level[i].target,
                        t: level[i].eval(t),
                    },
                    Err(i) => PLPoint::Germ(Germ::new(level[i - 1].target, level[i].target)),
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub identity: &'static str,
    pub points_checked: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub k0: usize,
    pub germs_checked: usize,
    pub interior_points: usize,
    pub checks: Vec<IdentityCheck>,
}

/// Seeded interior sample: half uniform rationals, half breakpoints of the
/// first few iterates, which are the points that eventually hit the vertex.
pub fn sample_interior(
    sys: &SubstitutionSystem,
    count: usize,
    depth: usize,
    seed: u64,
) -> Vec<(EdgeId, Q)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let breakpoints: Vec<Vec<Q>> = sys
        .edges()
        .map(|e| {
            let lvl = branches(sys, e, depth);
            lvl[1..].iter().map(|b| b.lo.clone()).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let e = rng.gen_range(0..sys.edge_count());
        if out.len() % 2 == 1 && !breakpoints[e].is_empty() {
            let i = rng.gen_range(0..breakpoints[e].len());
            out.push((e, breakpoints[e][i].clone()));
        } else {
            let den: i64 = rng.gen_range(2..=1_000_000);
            let num: i64 = rng.gen_range(1..den);
            out.push((e, Q::new(num.into(), den.into())));
        }
    }
    out
}

/// Exact verification of `r∘g̃ = g∘r`, `s∘g = g̃∘s`, `r∘s = g^{K₀}` and
/// `s∘r = g̃^{K₀}` on all germs, the vertex, and seeded interior points.
pub fn shift_equivalence_check(
    sys: &SubstitutionSystem,
    samples: usize,
    seed: u64,
) -> Result<IdentityReport, GermError> {
    let lift = Lift::new(sys)?;
    let k0 = lift.k0();
    let germs: Vec<Germ> = admissible_germs(sys).into_iter().collect();
    let interior = sample_interior(sys, samples, k0 + 1, seed);

    let quotient_points: Vec<PLPoint> = germs
        .iter()
        .map(|g| PLPoint::Germ(*g))
        .chain(interior.iter().map(|(e, t)| PLPoint::Interior {
            edge: *e,
            t: t.clone(),
        }))
        .collect();
    let y_points: Vec<YPoint> = std::iter::once(YPoint::Vertex)
        .chain(interior.iter().map(|(e, t)| YPoint::Interior {
            edge: *e,
            t: t.clone(),
        }))
        .collect();

    fn violation<T: std::fmt::Debug>(identity: &'static str, w: String, l: &T, r: &T) -> GermError {
        GermError::IdentityViolation {
            identity,
            witness: w,
            lhs: format!("{l:?}"),
            rhs: format!("{r:?}"),
        }
    }

    for x in &quotient_points {
        let lhs = collapse(&apply_g(sys, x));
        let rhs = apply_g_y(sys, &collapse(x));
        if lhs != rhs {
            return Err(violation("r∘g̃ = g∘r", x.render(sys), &lhs, &rhs));
        }
        let lhs = lift.apply(&collapse(x));
        let rhs = apply_g_n(sys, x, k0);
        if lhs != rhs {
            return Err(violation("s∘r = g̃^K0", x.render(sys), &lhs, &rhs));
        }
    }
    for y in &y_points {
        let lhs = lift.apply(&apply_g_y(sys, y));
        let rhs = apply_g(sys, &lift.apply(y));
        if lhs != rhs {
            return Err(violation("s∘g = g̃∘s", y.render(sys), &lhs, &rhs));
        }
        let lhs = collapse(&lift.apply(y));
        let rhs = apply_g_y_n(sys, y, k0);
        if lhs != rhs {
            return Err(violation("r∘s = g^K0", y.render(sys), &lhs, &rhs));
        }
    }
    let checks = vec![
        IdentityCheck {
            identity: "r∘g̃ = g∘r",
            points_checked: quotient_points.len(),
        },
        IdentityCheck {
            identity: "s∘g = g̃∘s",
            points_checked: y_points.len(),
        },
        IdentityCheck {
            identity: "r∘s = g^K0",
            points_checked: y_points.len(),
        },
        IdentityCheck {
            identity: "s∘r = g̃^K0",
            points_checked: quotient_points.len(),
        },
    ];
    Ok(IdentityReport {
        k0,
        germs_checked: germs.len(),
        interior_points: interior.len(),
        checks,
    })
}
