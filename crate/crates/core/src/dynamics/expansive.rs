//! Forward-orbit separation against a finite open cover of the quotient.

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::germ::{admissible_germs, Germ};
use crate::point::{apply_g, branch_index, branches, Branch, PLPoint};
use crate::poly::Q;
use crate::substitution::{EdgeId, SubstitutionSystem};

/// Open cover of the quotient at subdivision level `k`:
/// * the open pieces of `gᵏ` on every arc,
/// * around every breakpoint, the interval between the midpoints of its two pieces,
/// * for every germ `(l, r)`, the germ together with the outer halves of the
///   last piece of `l` and the first piece of `r`.
#[derive(Clone, Debug)]
pub struct CoverSpec {
    pub level: usize,
    levels: Vec<Vec<Branch>>,
    germs: Vec<Germ>,
}

/// A cover element, named by where it lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cell {
    Piece(EdgeId, usize),
    /// Neighbourhood of the breakpoint between pieces `i − 1` and `i`.
    Break(EdgeId, usize),
    Germ(usize),
}

impl CoverSpec {
    pub fn new(sys: &SubstitutionSystem, level: usize) -> Self {
        CoverSpec {
            level,
            levels: sys.edges().map(|e| branches(sys, e, level)).collect(),
            germs: admissible_germs(sys).into_iter().collect(),
        }
    }

    pub fn cell_count(&self) -> usize {
        self.levels.iter().map(|l| 2 * l.len() - 1).sum::<usize>() + self.germs.len()
    }

    /// All cells containing `p`, sorted.
    pub fn cells(&self, p: &PLPoint) -> Vec<Cell> {
        let mut out = Vec::new();
        match p {
            PLPoint::Germ(g) => {
                if let Ok(i) = self.germs.binary_search(g) {
                    out.push(Cell::Germ(i));
                }
            }
            PLPoint::Interior { edge, t } => {
                let lvl = &self.levels[*edge];
                match branch_index(lvl, t) {
                    Err(i) => out.push(Cell::Break(*edge, i)),
                    Ok(i) => {
                        out.push(Cell::Piece(*edge, i));
                        let mid = (&lvl[i].lo + &lvl[i].hi) / Q::from_integer(BigInt::from(2));
                        if t < &mid {
                            if i > 0 {
                                out.push(Cell::Break(*edge, i));
                            } else {
                                self.push_germs(&mut out, |g| g.r == *edge);
                            }
                        } else if t > &mid {
                            if i + 1 < lvl.len() {
                                out.push(Cell::Break(*edge, i + 1));
                            } else {
                                self.push_germs(&mut out, |g| g.l == *edge);
                            }
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    fn push_germs(&self, out: &mut Vec<Cell>, keep: impl Fn(&Germ) -> bool) {
        out.extend(
            self.germs
                .iter()
                .enumerate()
                .filter(|(_, g)| keep(g))
                .map(|(i, _)| Cell::Germ(i)),
        );
    }
}

fn share_cell(a: &[Cell], b: &[Cell]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => return true,
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    false
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub level: usize,
    pub n_max: usize,
    pub grid_density: u64,
    pub points: usize,
    pub pairs: usize,
    /// Largest separation time over all separated pairs.
    pub max_separation: usize,
    /// Pairs still sharing a cover element after `n_max` steps.
    pub unseparated: Vec<(String, String)>,
    #[serde(skip)]
    pub times: Vec<Option<usize>>,
}

impl SeparationReport {
    pub fn all_separated(&self) -> bool {
        self.unseparated.is_empty()
    }
}

/// Grid of `i / density` on every arc together with every germ.
pub fn grid_points(sys: &SubstitutionSystem, density: u64) -> Vec<PLPoint> {
    let mut pts: Vec<PLPoint> = admissible_germs(sys)
        .into_iter()
        .map(PLPoint::Germ)
        .collect();
    for e in sys.edges() {
        for i in 1..density {
            pts.push(PLPoint::Interior {
                edge: e,
                t: Q::new(BigInt::from(i), BigInt::from(density)),
            });
        }
    }
    pts
}

/// For each pair of distinct grid points, the least `n ≤ n_max` at which
/// their `g̃ⁿ`-images lie in no common cell. `times` is indexed like the
/// upper triangle of the grid, row by row.
pub fn forward_expansive_witness(
    sys: &SubstitutionSystem,
    cover: &CoverSpec,
    n_max: usize,
    grid_density: u64,
) -> SeparationReport {
    let pts = grid_points(sys, grid_density.max(1));
    let orbits: Vec<Vec<Vec<Cell>>> = pts
        .par_iter()
        .map(|p| {
            let mut x = p.clone();
            let mut cells = Vec::with_capacity(n_max + 1);
            for n in 0..=n_max {
                cells.push(cover.cells(&x));
                if n < n_max {
                    x = apply_g(sys, &x);
                }
            }
            cells
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..pts.len())
        .flat_map(|i| (i + 1..pts.len()).map(move |j| (i, j)))
        .collect();
    let times: Vec<Option<usize>> = pairs
        .par_iter()
        .map(|&(i, j)| (0..=n_max).find(|&n| !share_cell(&orbits[i][n], &orbits[j][n])))
        .collect();
    let unseparated = pairs
        .iter()
        .zip(&times)
        .filter(|(_, t)| t.is_none())
        .map(|(&(i, j), _)| (pts[i].render(sys), pts[j].render(sys)))
        .collect();
    SeparationReport {
        level: cover.level,
        n_max,
        grid_density,
        points: pts.len(),
        pairs: pairs.len(),
        max_separation: times.iter().flatten().copied().max().unwrap_or(0),
        unseparated,
        times,
    }
}

/// Smallest `n` with `g̃ⁿ(x)` and `g̃ⁿ(y)` in no common cell, for a single pair.
pub fn separation_time(
    sys: &SubstitutionSystem,
    cover: &CoverSpec,
    x: &PLPoint,
    y: &PLPoint,
    n_max: usize,
) -> Option<usize> {
    let (mut a, mut b) = (x.clone(), y.clone());
    for n in 0..=n_max {
        if !share_cell(&cover.cells(&a), &cover.cells(&b)) {
            return Some(n);
        }
        a = apply_g(sys, &a);
        b = apply_g(sys, &b);
    }
    None
}

/// Minimum slope over the pieces of `gⁿ` on every edge.
pub fn min_branch_slope(sys: &SubstitutionSystem, n: usize) -> Q {
    sys.edges()
        .flat_map(|e| branches(sys, e, n))
        .map(|b| b.slope())
        .min()
        .unwrap_or_else(Q::one)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::substitution::rat;

    #[test]
    fn every_point_is_covered() {
        let s = examples::aab_ab();
        let cover = CoverSpec::new(&s, 2);
        for p in grid_points(&s, 50) {
            assert!(!cover.cells(&p).is_empty(), "{p}");
        }
    }

    #[test]
    fn doubling_fifths_separate() {
        let s = examples::two_solenoid();
        let cover = CoverSpec::new(&s, 1);
        let x = PLPoint::interior(0, rat(1, 5));
        let y = PLPoint::interior(0, rat(2, 5));
        // 1/5 → 2/5 → 4/5 ; 2/5 → 4/5 → 3/5
        assert_eq!(separation_time(&s, &cover, &x, &y, 10), Some(1));
    }

    #[test]
    fn aab_grid_separates() {
        let s = examples::aab_ab();
        let rep = forward_expansive_witness(&s, &CoverSpec::new(&s, 3), 20, 16);
        assert!(rep.all_separated());
    }
}
