//! Truncated points of the inverse limit and the map to the quotient.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::germ::Lift;
use crate::point::{apply_g_y, branches, preimages_y, PLPoint, YPoint};
use crate::poly::Q;
use crate::substitution::SubstitutionSystem;

use super::DynamicsError;

/// `(x₀, x₁, …, x_m)` with `g(x_{i+1}) = x_i`; the depth is `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolenoidPoint {
    coords: Vec<YPoint>,
}

impl SolenoidPoint {
    pub fn new(sys: &SubstitutionSystem, coords: Vec<YPoint>) -> Result<Self, DynamicsError> {
        if coords.is_empty() {
            return Err(DynamicsError::EmptyItinerary);
        }
        for (i, pair) in coords.windows(2).enumerate() {
            if apply_g_y(sys, &pair[1]) != pair[0] {
                return Err(DynamicsError::IncompatibleItinerary(i + 1));
            }
        }
        Ok(SolenoidPoint { coords })
    }

    pub fn depth(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[YPoint] {
        &self.coords
    }

    /// The projection `π₀`.
    pub fn head(&self) -> &YPoint {
        &self.coords[0]
    }

    /// `φ(x₀, x₁, …) = (g(x₀), x₀, x₁, …)`.
    pub fn phi(&self, sys: &SubstitutionSystem) -> SolenoidPoint {
        let mut coords = Vec::with_capacity(self.coords.len() + 1);
        coords.push(apply_g_y(sys, &self.coords[0]));
        coords.extend(self.coords.iter().cloned());
        SolenoidPoint { coords }
    }

    /// Forgets `x₀`; undoes `phi`. `None` at depth zero.
    pub fn drop_head(&self) -> Option<SolenoidPoint> {
        (self.coords.len() > 1).then(|| SolenoidPoint {
            coords: self.coords[1..].to_vec(),
        })
    }

    /// Random point of depth `depth`. Every other sample is pushed forward
    /// from a breakpoint so that its head sits on the vertex.
    pub fn random(sys: &SubstitutionSystem, depth: usize, rng: &mut ChaCha8Rng) -> SolenoidPoint {
        let e = rng.gen_range(0..sys.edge_count());
        if rng.gen_bool(0.5) && depth > 0 {
            let k = rng.gen_range(1..=depth);
            let lvl = branches(sys, e, k);
            let i = rng.gen_range(1..lvl.len());
            let mut coords = vec![YPoint::Interior {
                edge: e,
                t: lvl[i].lo.clone(),
            }];
            // backwards first, then forwards from the deepest coordinate
            let mut prefix = Vec::new();
            let mut x = coords[0].clone();
            for _ in 0..k {
                x = apply_g_y(sys, &x);
                prefix.push(x.clone());
            }
            prefix.reverse();
            prefix.append(&mut coords);
            while prefix.len() < depth + 1 {
                let pre = preimages_y(sys, prefix.last().unwrap());
                let pick = pre[rng.gen_range(0..pre.len())].clone();
                prefix.push(pick);
            }
            prefix.truncate(depth + 1);
            return SolenoidPoint { coords: prefix };
        }
        let den: i64 = rng.gen_range(2..=100_000);
        let mut coords = vec![YPoint::Interior {
            edge: e,
            t: Q::new(BigInt::from(rng.gen_range(1..den)), BigInt::from(den)),
        }];
        while coords.len() < depth + 1 {
            let pre = preimages_y(sys, coords.last().unwrap());
            coords.push(pre[rng.gen_range(0..pre.len())].clone());
        }
        SolenoidPoint { coords }
    }

    pub fn random_batch(
        sys: &SubstitutionSystem,
        depth: usize,
        count: usize,
        seed: u64,
    ) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| Self::random(sys, depth, &mut rng))
            .collect()
    }
}

/// The quotient point of a solenoid point: its head when that is interior,
/// otherwise the germ read off the coordinate at depth `K₀`.
pub fn p_map(sys: &SubstitutionSystem, x: &SolenoidPoint) -> Result<PLPoint, DynamicsError> {
    let lift = Lift::new(sys)?;
    p_map_with(&lift, x)
}

pub fn p_map_with(lift: &Lift, x: &SolenoidPoint) -> Result<PLPoint, DynamicsError> {
    let k0 = lift.k0();
    if let YPoint::Interior { edge, t } = x.head() {
        return Ok(PLPoint::Interior {
            edge: *edge,
            t: t.clone(),
        });
    }
    if x.depth() < k0 {
        return Err(DynamicsError::DepthTooShallow {
            needed: k0,
            depth: x.depth(),
        });
    }
    Ok(lift.apply(&x.coords[k0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::germ::Germ;
    use crate::point::collapse;
    use crate::substitution::rat;

    fn it(e: usize, n: i64, d: i64) -> YPoint {
        YPoint::Interior {
            edge: e,
            t: rat(n, d),
        }
    }

    #[test]
    fn phi_prepends_image() {
        let s = examples::two_solenoid();
        let x = SolenoidPoint::new(&s, vec![it(0, 1, 4), it(0, 1, 8)]).unwrap();
        let y = x.phi(&s);
        assert_eq!(y.coords(), &[it(0, 1, 2), it(0, 1, 4), it(0, 1, 8)]);
        assert_eq!(y.drop_head().unwrap(), x);
    }

    #[test]
    fn incompatible_itinerary_rejected() {
        let s = examples::two_solenoid();
        assert_eq!(
            SolenoidPoint::new(&s, vec![it(0, 1, 4), it(0, 1, 3)]),
            Err(DynamicsError::IncompatibleItinerary(1))
        );
    }

    #[test]
    fn vertex_head_reads_germ_at_depth_k0() {
        let s = examples::aab_ab();
        // x₁ = a(1/3): the breakpoint between the two a's of g(a)
        let x = SolenoidPoint::new(&s, vec![YPoint::Vertex, it(0, 1, 3)]).unwrap();
        assert_eq!(p_map(&s, &x).unwrap(), PLPoint::Germ(Germ::new(0, 0)));
        let shallow = SolenoidPoint::new(&s, vec![YPoint::Vertex]).unwrap();
        assert!(matches!(
            p_map(&s, &shallow),
            Err(DynamicsError::DepthTooShallow { .. })
        ));
    }

    #[test]
    fn p_lies_over_projection() {
        for (_, s) in examples::bundled() {
            for x in SolenoidPoint::random_batch(&s, 4, 100, 3) {
                assert_eq!(collapse(&p_map(&s, &x).unwrap()), *x.head());
            }
        }
    }
}
