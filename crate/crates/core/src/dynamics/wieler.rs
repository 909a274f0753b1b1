//! Sampled witnesses for the two metric axioms of a pre-solenoid.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::point::{apply_g_y_n, branches, Branch, YPoint};
use crate::poly::Q;
use crate::substitution::{rat, EdgeId, SubstitutionSystem};

use super::DynamicsError;

/// Path metric on the rose with every loop of length one.
pub fn rose_distance(x: &YPoint, y: &YPoint) -> Q {
    let to_vertex = |t: &Q| -> Q { t.clone().min(Q::one() - t) };
    match (x, y) {
        (YPoint::Vertex, YPoint::Vertex) => Q::zero(),
        (YPoint::Vertex, YPoint::Interior { t, .. })
        | (YPoint::Interior { t, .. }, YPoint::Vertex) => to_vertex(t),
        (YPoint::Interior { edge: e, t }, YPoint::Interior { edge: f, t: s }) => {
            if e == f {
                let d = if t > s { t - s } else { s - t };
                let around = Q::one() - &d;
                d.min(around)
            } else {
                to_vertex(t) + to_vertex(s)
            }
        }
    }
}

/// A closed subset of the rose: finitely many closed intervals per edge plus
/// the vertex. Intervals touching an end of an edge always contain the vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoseSet {
    pub vertex: bool,
    pub intervals: Vec<Vec<(Q, Q)>>,
}

impl RoseSet {
    pub fn empty(edges: usize) -> Self {
        RoseSet {
            vertex: false,
            intervals: vec![Vec::new(); edges],
        }
    }

    pub fn add(&mut self, e: EdgeId, lo: Q, hi: Q) {
        debug_assert!(lo <= hi);
        if lo.is_zero() || hi == Q::one() {
            self.vertex = true;
        }
        if lo == hi && (lo.is_zero() || lo == Q::one()) {
            return;
        }
        self.intervals[e].push((lo, hi));
    }

    fn normalize(mut self) -> Self {
        for list in &mut self.intervals {
            list.sort();
            let mut merged: Vec<(Q, Q)> = Vec::with_capacity(list.len());
            for (lo, hi) in list.drain(..) {
                match merged.last_mut() {
                    Some(last) if lo <= last.1 => {
                        if hi > last.1 {
                            last.1 = hi;
                        }
                    }
                    _ => merged.push((lo, hi)),
                }
            }
            *list = merged;
        }
        self
    }

    /// Closed ball of radius `eps` around `p`.
    pub fn ball(edges: usize, p: &YPoint, eps: &Q) -> Self {
        let mut set = RoseSet::empty(edges);
        let star = match p {
            YPoint::Vertex => {
                set.vertex = true;
                eps.clone()
            }
            YPoint::Interior { edge, t } => {
                let lo = (t - eps).max(Q::zero());
                let hi = (t + eps).min(Q::one());
                set.add(*edge, lo, hi);
                let left = eps - t;
                let right = eps - (Q::one() - t);
                left.max(right)
            }
        };
        if star >= Q::zero() {
            set.vertex = true;
            let r = star.min(Q::one());
            for f in 0..edges {
                set.add(f, Q::zero(), r.clone());
                set.add(f, Q::one() - &r, Q::one());
            }
        }
        set.normalize()
    }

    /// Image under the map whose pieces on each edge are `levels[e]`.
    pub fn image(&self, levels: &[Vec<Branch>]) -> Self {
        let mut out = RoseSet::empty(self.intervals.len());
        out.vertex = self.vertex;
        for (e, list) in self.intervals.iter().enumerate() {
            for (lo, hi) in list {
                let lvl = &levels[e];
                let start = lvl.partition_point(|b| &b.hi < lo);
                for b in &lvl[start..] {
                    if &b.lo > hi {
                        break;
                    }
                    let a = lo.clone().max(b.lo.clone());
                    let z = hi.clone().min(b.hi.clone());
                    out.add(b.target, b.eval(&a), b.eval(&z));
                }
            }
        }
        out.normalize()
    }

    pub fn is_subset(&self, other: &RoseSet) -> bool {
        if self.vertex && !other.vertex {
            return false;
        }
        self.intervals
            .iter()
            .zip(&other.intervals)
            .all(|(mine, theirs)| {
                mine.iter()
                    .all(|(lo, hi)| theirs.iter().any(|(a, b)| a <= lo && hi <= b))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WielerWitness {
    pub k: usize,
    #[serde(serialize_with = "ser_q")]
    pub gamma: Q,
    #[serde(serialize_with = "ser_q")]
    pub beta: Q,
    pub pairs_checked: usize,
    pub balls_checked: usize,
}

pub(crate) fn ser_q<S: serde::Serializer>(q: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

pub fn gamma_grid() -> Vec<Q> {
    [(1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (4, 5), (9, 10)]
        .iter()
        .map(|&(n, d)| rat(n, d))
        .collect()
}

pub fn beta_grid() -> Vec<Q> {
    (1..=6).map(|k| rat(1, 1 << k)).collect()
}

/// A point at distance exactly `d` from `x`, walking in direction `forward`
/// and taking edge `turn` whenever the walk reaches the vertex.
fn walk(x: &YPoint, d: &Q, forward: bool, turn: EdgeId) -> YPoint {
    match x {
        YPoint::Vertex => {
            if d.is_zero() {
                YPoint::Vertex
            } else if forward {
                YPoint::Interior {
                    edge: turn,
                    t: d.clone(),
                }
            } else {
                YPoint::Interior {
                    edge: turn,
                    t: Q::one() - d,
                }
            }
        }
        YPoint::Interior { edge, t } => {
            let target = if forward { t + d } else { t - d };
            if target > Q::zero() && target < Q::one() {
                YPoint::Interior {
                    edge: *edge,
                    t: target,
                }
            } else {
                let rest = if forward { &target - Q::one() } else { -target };
                walk(&YPoint::Vertex, &rest, forward, turn)
            }
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, edges: usize) -> YPoint {
    if rng.gen_ratio(1, 16) {
        return YPoint::Vertex;
    }
    let den: i64 = rng.gen_range(2..=4096);
    YPoint::Interior {
        edge: rng.gen_range(0..edges),
        t: Q::new(BigInt::from(rng.gen_range(1..den)), BigInt::from(den)),
    }
}

/// Sampled pairs at distance at most `beta`, seeded.
fn sample_pairs(
    sys: &SubstitutionSystem,
    beta: &Q,
    count: usize,
    seed: u64,
) -> Vec<(YPoint, YPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sys.edge_count();
    (0..count)
        .map(|_| {
            let x = random_point(&mut rng, n);
            let frac = Q::new(BigInt::from(rng.gen_range(1..=1024)), BigInt::from(1024));
            // stay below half the loop length so the walk realizes the distance
            let d = (beta * frac).min(rat(1, 2));
            let y = walk(&x, &d, rng.gen_bool(0.5), rng.gen_range(0..n));
            (x, y)
        })
        .collect()
}

/// Searches `K ≤ k_max`, `γ` and `β` grids for parameters under which both
/// axioms hold on `samples` seeded pairs and ball images.
pub fn wieler_axiom_witness(
    sys: &SubstitutionSystem,
    k_max: usize,
    samples: usize,
    seed: u64,
) -> Result<WielerWitness, DynamicsError> {
    let n = sys.edge_count();
    let mut last_violation = None;
    for k in 1..=k_max {
        let lvl_k: Vec<Vec<Branch>> = sys.edges().map(|e| branches(sys, e, k)).collect();
        let lvl_2k: Vec<Vec<Branch>> = sys.edges().map(|e| branches(sys, e, 2 * k)).collect();
        for gamma in gamma_grid() {
            let gamma_k = num_traits::pow(gamma.clone(), k);
            for beta in beta_grid() {
                let pairs = sample_pairs(sys, &beta, samples, seed ^ ((k as u64) << 32));
                let bad_pair = pairs.par_iter().find_first(|(x, y)| {
                    let lhs = rose_distance(&apply_g_y_n(sys, x, k), &apply_g_y_n(sys, y, k));
                    let rhs =
                        rose_distance(&apply_g_y_n(sys, x, 2 * k), &apply_g_y_n(sys, y, 2 * k));
                    lhs > &gamma_k * rhs
                });
                if let Some((x, y)) = bad_pair {
                    last_violation = Some(format!(
                        "axiom 1 at K={k}, γ={gamma}, β={beta}: {} / {}",
                        x.render(sys),
                        y.render(sys)
                    ));
                    continue;
                }
                let balls: Vec<(YPoint, Q)> = pairs
                    .iter()
                    .enumerate()
                    .map(|(i, (x, _))| (x.clone(), &beta * rat(1 + (i % 4) as i64, 4)))
                    .collect();
                let bad_ball = balls.par_iter().find_first(|(x, eps)| {
                    let gx = apply_g_y_n(sys, x, k);
                    let lhs = RoseSet::ball(n, &gx, eps).image(&lvl_k);
                    let rhs = RoseSet::ball(n, x, &(&gamma * eps)).image(&lvl_2k);
                    !lhs.is_subset(&rhs)
                });
                if let Some((x, eps)) = bad_ball {
                    last_violation = Some(format!(
                        "axiom 2 at K={k}, γ={gamma}, β={beta}: x={}, ε={eps}",
                        x.render(sys)
                    ));
                    continue;
                }
                return Ok(WielerWitness {
                    k,
                    gamma,
                    beta,
                    pairs_checked: pairs.len(),
                    balls_checked: balls.len(),
                });
            }
        }
    }
    Err(DynamicsError::NoWitnessFound {
        last_violation: last_violation.unwrap_or_default(),
    })
}
