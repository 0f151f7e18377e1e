//! Decision procedure for the Elsinger property.
//!
//! A left-substochastic `M` violates the property iff some nonempty set `J`
//! has `Σ_{i∈J} M_ij = 1` for every `j ∈ J`. Since columns sum to at most one,
//! every such `j` must have full column mass and no owner outside `J`, so `J`
//! is closed under the owner relation. The largest closed subset of the
//! full-mass columns is found by repeatedly pruning columns with an outside
//! owner; the property fails iff that subset is nonempty.

use crate::linalg::SquareMatrix;

/// Column sums within this distance of 1 count as full ownership.
pub const FULL_MASS_TOL: f64 = 1e-12;

pub fn has_elsinger_property(m: &SquareMatrix) -> bool {
    elsinger_violation(m).is_none()
}

/// The largest set of firms that fully own each other, if any.
pub fn elsinger_violation(m: &SquareMatrix) -> Option<Vec<usize>> {
    let n = m.dim();
    let sums = m.column_sums();
    let mut inside: Vec<bool> = sums.iter().map(|&s| (s - 1.0).abs() <= FULL_MASS_TOL).collect();
    loop {
        let mut changed = false;
        for j in 0..n {
            if inside[j] && (0..n).any(|i| !inside[i] && m[(i, j)] > 0.0) {
                inside[j] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let members: Vec<usize> = (0..n).filter(|&j| inside[j]).collect();
    (!members.is_empty()).then_some(members)
}

/// Exhaustive check over all nonempty subsets; exponential, for cross-checks only.
pub fn elsinger_violation_brute_force(m: &SquareMatrix) -> bool {
    let n = m.dim();
    assert!(n <= 20, "subset enumeration is capped at 20 firms");
    (1u64..1 << n).any(|bits| {
        let in_j = |k: usize| bits >> k & 1 == 1;
        (0..n).filter(|&j| in_j(j)).all(|j| {
            let mass: f64 = (0..n).filter(|&i| in_j(i)).map(|i| m[(i, j)]).sum();
            (mass - 1.0).abs() <= FULL_MASS_TOL
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn full_two_cycle_fails() {
        let c = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(!has_elsinger_property(&c));
        assert!(elsinger_violation_brute_force(&c));
    }

    #[test]
    fn half_two_cycle_holds() {
        let c = m(&[&[0.0, 0.5], &[0.5, 0.0]]);
        assert!(has_elsinger_property(&c));
        assert!(!elsinger_violation_brute_force(&c));
    }

    #[test]
    fn full_three_ring_fails() {
        let ring = m(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert_eq!(elsinger_violation(&ring), Some(vec![0, 1, 2]));
        assert!(elsinger_violation_brute_force(&ring));
    }

    #[test]
    fn full_column_with_leaky_owner_holds() {
        // firm 0 is fully owned by firm 1, but firm 1 is only half owned
        let c = m(&[&[0.0, 0.5], &[1.0, 0.0]]);
        assert!(has_elsinger_property(&c));
        assert!(!elsinger_violation_brute_force(&c));
    }

    #[test]
    fn self_owned_equity_fails() {
        let c = m(&[&[1.0, 0.0], &[0.0, 0.2]]);
        assert_eq!(elsinger_violation(&c), Some(vec![0]));
    }

    #[test]
    fn closed_subcycle_inside_larger_system() {
        // firms 1 and 2 own each other fully; firm 0 feeds in from outside
        let c = m(&[
            &[0.0, 0.0, 0.0],
            &[0.5, 0.0, 1.0],
            &[0.5, 1.0, 0.0],
        ]);
        assert_eq!(elsinger_violation(&c), Some(vec![0, 1, 2]));
        let d = m(&[
            &[0.0, 0.0, 0.0],
            &[0.3, 0.0, 1.0],
            &[0.3, 1.0, 0.0],
        ]);
        assert_eq!(elsinger_violation(&d), Some(vec![1, 2]));
        assert!(elsinger_violation_brute_force(&d));
    }
}
