//! Seeded generators of valid solver states, shared by the property
//! test suites. Everything here is deterministic given the seed.

use crate::flux::FluxModel;
use crate::polykernel::ModalPoly;
use crate::semidiscrete::{Discretization, Inflow, ShockState};
use crate::shockmesh::ShockMesh;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// A Burgers discretization whose admissible interval comfortably
/// contains everything `random_state` can generate.
pub fn burgers_discretization() -> Discretization {
    Discretization::new(
        FluxModel::burgers(0.05, 2.2).unwrap(),
        Inflow::Constant(1.2),
        3,
        6,
        1e-6,
        false,
    )
    .unwrap()
}

/// A random valid state on (0, 10) with 20 background cells.
///
/// The shock position, the jump height, and every modal coefficient are
/// drawn from ranges that keep all nodal values inside (0.3, 2.0) and
/// the shock height above 0.03, so the Rankine-Hugoniot speed, the Lax
/// condition, and admissibility hold for any seed. Left states sit
/// near 1.2 and right states near 0.75 with mild per-cell variation and
/// decaying higher modes.
pub fn random_state(seed: u64) -> ShockState {
    let mut rng = StdRng::seed_from_u64(seed);
    let x_shock = rng.gen_range(1.05..8.45);
    let mesh = ShockMesh::new(0.0, 10.0, 20, x_shock).unwrap();
    let left_slot = mesh.left_slot();

    let cells = (0..mesh.cell_count())
        .map(|slot| {
            let (lo, hi) = mesh.interval(slot);
            let mean = if slot <= left_slot {
                rng.gen_range(1.1..1.5)
            } else {
                rng.gen_range(0.55..0.95)
            };
            let mut coeffs = vec![mean];
            for k in 1..=3 {
                let amp = 0.04 / 3f64.powi(k - 1);
                coeffs.push(rng.gen_range(-amp..amp));
            }
            ModalPoly::new(lo, hi, coeffs).unwrap()
        })
        .collect();

    ShockState {
        mesh,
        cells,
        time: rng.gen_range(0.0..2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_states_are_always_valid() {
        let disc = burgers_discretization();
        for seed in 0..200 {
            let state = random_state(seed);
            assert!(state.mesh.widths_valid());
            let speed = disc.rh_speed(&state).unwrap();
            assert!(speed.is_finite());
            assert!(disc.lax_condition(&state).unwrap(), "seed {seed}");
            // The operator itself must be evaluable (admissibility).
            assert!(disc.rhs(&state, state.time).is_ok(), "seed {seed}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = random_state(42);
        let b = random_state(42);
        assert_eq!(a.mesh.x_shock(), b.mesh.x_shock());
        for (x, y) in a.cells.iter().zip(&b.cells) {
            assert_eq!(x.coeffs(), y.coeffs());
        }
    }
}
