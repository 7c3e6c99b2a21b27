//! Compatible actions on Fell bundles and the Zappa–Szép product bundle.

mod action;
mod bundle;
mod unitary;

pub use action::{validate_action, CompatibleAction};
pub use bundle::ZsProductBundle;
pub use unitary::{action_from_unitary_family, theta_iso, validate_unitary_family, UnitaryFamily};

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fell::{full_matrix_bundle, validate_fell_bundle, FellOptions};
    use crate::gpd::{cyclic_group, zs_groupoid, MatchedPair};
    use crate::linalg::{real, CMat, ONE, ZERO};

    fn pauli_family(scale: f64) -> crate::Result<UnitaryFamily> {
        let p = MatchedPair::trivial(cyclic_group(3, "a"), cyclic_group(2, "b")).unwrap();
        let zs = zs_groupoid(&p).unwrap();
        let c = Arc::new(full_matrix_bundle(&zs.groupoid, 2));
        let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let mats = vec![CMat::identity(2, 2) * real(scale), x];
        UnitaryFamily::from_matrices(c, zs, &mats)
    }

    #[test]
    fn pauli_family_induces_a_compatible_action() {
        let f = pauli_family(1.0).unwrap();
        assert!(validate_unitary_family(&f, 1e-9).passed());
        let (_, a) = action_from_unitary_family(&f, 1e-9).unwrap();
        let r = validate_action(&a, 1e-9, 0);
        assert!(r.passed(), "{}", r.render_human());
        let zb = ZsProductBundle::new(a, 1e-9).unwrap();
        assert!(validate_fell_bundle(&zb, &FellOptions::default()).passed());
        let t = theta_iso(&f, &zb, 1e-9, 0);
        assert!(t.passed(), "{}", t.render_human());
    }

    #[test]
    fn doubled_unit_is_not_unitary() {
        let f = pauli_family(2.0).unwrap();
        let r = validate_unitary_family(&f, 1e-9);
        assert!(!r.check("UNITARY").unwrap().passed);
        assert!(!r.check("U2").unwrap().passed);
        assert!(action_from_unitary_family(&f, 1e-9).is_err());
    }
}
