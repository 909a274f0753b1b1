//! Bundled rose substitutions used throughout the tests and the CLI.

use crate::substitution::SubstitutionSystem;

/// a ↦ aab, b ↦ ab.
pub fn aab_ab() -> SubstitutionSystem {
    SubstitutionSystem::from_rules(&["a", "b"], &[("a", "aab"), ("b", "ab")]).unwrap()
}

/// a ↦ ab, b ↦ ab.
pub fn ab_ab() -> SubstitutionSystem {
    SubstitutionSystem::from_rules(&["a", "b"], &[("a", "ab"), ("b", "ab")]).unwrap()
}

/// a ↦ aa, the doubling map on the circle.
pub fn two_solenoid() -> SubstitutionSystem {
    n_solenoid(2)
}

/// a ↦ aᵈ.
pub fn n_solenoid(d: usize) -> SubstitutionSystem {
    assert!(d >= 1);
    SubstitutionSystem::from_rules(&["a"], &[("a", &"a".repeat(d))]).unwrap()
}

/// Thue–Morse: a ↦ ab, b ↦ ba. Its germs never flatten.
pub fn thue_morse() -> SubstitutionSystem {
    SubstitutionSystem::from_rules(&["a", "b"], &[("a", "ab"), ("b", "ba")]).unwrap()
}

/// The systems for which every stage of the pipeline succeeds.
pub fn bundled() -> Vec<(&'static str, SubstitutionSystem)> {
    vec![
        ("aab_ab", aab_ab()),
        ("two_solenoid", two_solenoid()),
        ("ab_ab", ab_ab()),
    ]
}
