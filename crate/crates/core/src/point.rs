//! Exact points of the piecewise-linear rose and of its germ quotient.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::germ::Germ;
use crate::poly::Q;
use crate::substitution::{EdgeId, SubstitutionSystem};

/// A point of the quotient: an interior point of an arc, or a germ over the vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PLPoint {
    Interior { edge: EdgeId, t: Q },
    Germ(Germ),
}

/// A point of the rose itself, where all germs collapse to the vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum YPoint {
    Vertex,
    Interior { edge: EdgeId, t: Q },
}

/// One affine piece of `gⁿ` on an edge: `[lo, hi]` maps onto `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub lo: Q,
    pub hi: Q,
    pub target: EdgeId,
}

impl Branch {
    /// Slope of the affine piece.
    pub fn slope(&self) -> Q {
        Q::one() / (&self.hi - &self.lo)
    }

    /// Image coordinate of `t ∈ [lo, hi]` on the target edge.
    pub fn eval(&self, t: &Q) -> Q {
        (t - &self.lo) / (&self.hi - &self.lo)
    }

    /// Preimage coordinate of `u ∈ [0, 1]` on the target edge.
    pub fn pull(&self, u: &Q) -> Q {
        &self.lo + u * (&self.hi - &self.lo)
    }
}

impl PLPoint {
    pub fn interior(edge: EdgeId, t: Q) -> Self {
        debug_assert!(t > Q::zero() && t < Q::one());
        PLPoint::Interior { edge, t }
    }

    pub fn is_germ(&self) -> bool {
        matches!(self, PLPoint::Germ(_))
    }

    pub fn render(&self, sys: &SubstitutionSystem) -> String {
        match self {
            PLPoint::Interior { edge, t } => format!("{}({t})", sys.label(*edge)),
            PLPoint::Germ(g) => g.render(sys),
        }
    }
}

impl YPoint {
    pub fn render(&self, sys: &SubstitutionSystem) -> String {
        match self {
            YPoint::Vertex => "v".to_string(),
            YPoint::Interior { edge, t } => format!("{}({t})", sys.label(*edge)),
        }
    }
}

impl fmt::Display for PLPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PLPoint::Interior { edge, t } => write!(f, "e{edge}({t})"),
            PLPoint::Germ(g) => write!(f, "germ({},{})", g.l, g.r),
        }
    }
}

impl Serialize for PLPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Splits `L·t` into letter index and offset.
fn locate(len: usize, t: &Q) -> (usize, Q) {
    let scaled = t * Q::from_integer(BigInt::from(len));
    let j = scaled.floor();
    let u = &scaled - &j;
    let j: usize = j
        .to_integer()
        .try_into()
        .expect("letter index fits in usize");
    (j, u)
}

/// One step of `g̃` on the quotient.
pub fn apply_g(sys: &SubstitutionSystem, p: &PLPoint) -> PLPoint {
    match p {
        PLPoint::Germ(g) => PLPoint::Germ(g.tau(sys)),
        PLPoint::Interior { edge, t } => {
            let w = sys.image(*edge);
            let (j, u) = locate(w.len(), t);
            if u.is_zero() {
                PLPoint::Germ(Germ::new(w[j - 1], w[j]))
            } else {
                PLPoint::Interior { edge: w[j], t: u }
            }
        }
    }
}

/// One step of `g` on the rose.
pub fn apply_g_y(sys: &SubstitutionSystem, p: &YPoint) -> YPoint {
    match p {
        YPoint::Vertex => YPoint::Vertex,
        YPoint::Interior { edge, t } => {
            let w = sys.image(*edge);
            let (j, u) = locate(w.len(), t);
            if u.is_zero() {
                YPoint::Vertex
            } else {
                YPoint::Interior { edge: w[j], t: u }
            }
        }
    }
}

pub fn apply_g_n(sys: &SubstitutionSystem, p: &PLPoint, n: usize) -> PLPoint {
    (0..n).fold(p.clone(), |x, _| apply_g(sys, &x))
}

pub fn apply_g_y_n(sys: &SubstitutionSystem, p: &YPoint, n: usize) -> YPoint {
    (0..n).fold(p.clone(), |x, _| apply_g_y(sys, &x))
}

/// The collapse map `r`: germs go to the vertex, arc interiors are fixed.
pub fn collapse(p: &PLPoint) -> YPoint {
    match p {
        PLPoint::Germ(_) => YPoint::Vertex,
        PLPoint::Interior { edge, t } => YPoint::Interior {
            edge: *edge,
            t: t.clone(),
        },
    }
}

/// Affine pieces of `gⁿ` on edge `e`, left to right. The pieces are not of
/// equal length once `n ≥ 2` and the image words have different lengths.
pub fn branches(sys: &SubstitutionSystem, e: EdgeId, n: usize) -> Vec<Branch> {
    let mut out = vec![Branch {
        lo: Q::zero(),
        hi: Q::one(),
        target: e,
    }];
    for _ in 0..n {
        out = refine(sys, &out);
    }
    out
}

/// Splits every branch along the image word of its target.
pub fn refine(sys: &SubstitutionSystem, level: &[Branch]) -> Vec<Branch> {
    let mut next = Vec::new();
    for b in level {
        let w = sys.image(b.target);
        let len = Q::from_integer(BigInt::from(w.len()));
        let width = (&b.hi - &b.lo) / &len;
        for (i, &f) in w.iter().enumerate() {
            let lo = &b.lo + &width * Q::from_integer(BigInt::from(i));
            let hi = if i + 1 == w.len() {
                b.hi.clone()
            } else {
                &lo + &width
            };
            next.push(Branch { lo, hi, target: f });
        }
    }
    next
}

/// Index of the branch containing `t` in its interior, or `Err(i)` when `t`
/// is the breakpoint between branches `i − 1` and `i`.
pub fn branch_index(level: &[Branch], t: &Q) -> Result<usize, usize> {
    let i = level.partition_point(|b| &b.hi <= t);
    if i < level.len() && &level[i].lo == t {
        Err(i)
    } else {
        Ok(i)
    }
}

/// All points `x` of the rose with `g(x) = p`.
pub fn preimages_y(sys: &SubstitutionSystem, p: &YPoint) -> Vec<YPoint> {
    let mut out = Vec::new();
    for e in sys.edges() {
        let w = sys.image(e);
        let len = BigInt::from(w.len());
        match p {
            YPoint::Vertex => {
                for j in 1..w.len() {
                    out.push(YPoint::Interior {
                        edge: e,
                        t: Q::new(BigInt::from(j), len.clone()),
                    });
                }
            }
            YPoint::Interior { edge, t } => {
                for (j, &f) in w.iter().enumerate() {
                    if f == *edge {
                        out.push(YPoint::Interior {
                            edge: e,
                            t: (t + Q::from_integer(BigInt::from(j)))
                                / Q::from_integer(len.clone()),
                        });
                    }
                }
            }
        }
    }
    if *p == YPoint::Vertex {
        out.insert(0, YPoint::Vertex);
    }
    out
}

/// Rational with a small denominator, used for reproducible sampling.
pub fn grid_rational(num: u64, den: u64) -> Q {
    let g = num.gcd(&den);
    Q::new(BigInt::from(num / g), BigInt::from(den / g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::substitution::rat;

    #[test]
    fn doubling_step() {
        let s = examples::two_solenoid();
        let p = PLPoint::interior(0, rat(1, 3));
        assert_eq!(apply_g(&s, &p), PLPoint::interior(0, rat(2, 3)));
        let half = PLPoint::interior(0, rat(1, 2));
        assert_eq!(apply_g(&s, &half), PLPoint::Germ(Germ::new(0, 0)));
    }

    #[test]
    fn aab_step_lands_mid_letter() {
        let s = examples::aab_ab();
        assert_eq!(
            apply_g(&s, &PLPoint::interior(0, rat(1, 2))),
            PLPoint::interior(0, rat(1, 2))
        );
        let ba = PLPoint::Germ(Germ::new(1, 0));
        assert_eq!(apply_g(&s, &ba), ba);
    }

    #[test]
    fn branches_compose_unevenly() {
        let s = examples::aab_ab();
        let b = branches(&s, 0, 2);
        assert_eq!(b.len(), s.iterate_word(0, 2).len());
        let targets: Vec<_> = b.iter().map(|x| x.target).collect();
        assert_eq!(targets, s.iterate_word(0, 2));
        // the b-piece of g(a) is split in halves, the a-pieces in thirds
        assert_eq!(b[0].hi, rat(1, 9));
        assert_eq!(b[6].hi, rat(5, 6));
        assert_eq!(b[7].lo, rat(5, 6));
        assert_eq!(b[7].hi, Q::one());
    }

    #[test]
    fn branch_eval_matches_iteration() {
        let s = examples::aab_ab();
        let t = rat(7, 23);
        let lvl = branches(&s, 0, 3);
        let i = branch_index(&lvl, &t).unwrap();
        let direct = apply_g_y_n(
            &s,
            &YPoint::Interior {
                edge: 0,
                t: t.clone(),
            },
            3,
        );
        assert_eq!(
            direct,
            YPoint::Interior {
                edge: lvl[i].target,
                t: lvl[i].eval(&t)
            }
        );
    }

    #[test]
    fn preimages_map_back() {
        let s = examples::aab_ab();
        for p in [
            YPoint::Vertex,
            YPoint::Interior {
                edge: 1,
                t: rat(2, 5),
            },
        ] {
            let pre = preimages_y(&s, &p);
            assert!(!pre.is_empty());
            for x in pre {
                assert_eq!(apply_g_y(&s, &x), p);
            }
        }
    }
}
