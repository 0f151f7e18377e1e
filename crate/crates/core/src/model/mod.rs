//! Financial systems with debt and equity cross-holdings.
//!
//! A system is the tuple `(a, d, Md, Ms)`: exogenous assets, nominal
//! liabilities, and the left-substochastic ownership matrices for debt and
//! equity (`M[i][j]` is the fraction of firm `j`'s claim held by firm `i`).
//! A clearing state `R = (r, s)` pairs debt payments with equity values; the
//! clearing vector is the unique fixed point of
//!
//! ```text
//! Φ(r, s) = ( min{d, a + Md·r + Ms·s},  (a + Md·r + Ms·s − d)⁺ )
//! ```

mod elsinger;
mod io;

pub use elsinger::{elsinger_violation, elsinger_violation_brute_force, has_elsinger_property};
pub use io::SystemDocument;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{is_left_substochastic, solve_linear, LinalgError, SquareMatrix, Vector};

/// Entry tolerance for the substochastic test.
pub const SUBSTOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension mismatch in {field}: expected {expected}, found {found}")]
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{0} contains a non-finite value")]
    NonFinite(&'static str),
    #[error("{0} has negative entries")]
    NegativeEntries(&'static str),
    #[error("{0} is not left substochastic")]
    NotSubstochastic(&'static str),
    #[error("Md has nonzero diagonal entry at firm {0}")]
    NonzeroDebtDiagonal(usize),
    #[error("{matrix} violates the Elsinger property: firms {firms:?} fully own each other")]
    ElsingerViolation {
        matrix: &'static str,
        firms: Vec<usize>,
    },
    #[error("finite algorithms need ‖Md‖₁ < 1 and ‖Ms‖₁ < 1 (got {md_norm}, {ms_norm})")]
    AssumptionViolated { md_norm: f64, ms_norm: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A validated financial system. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FinancialSystem {
    a: Vector,
    d: Vector,
    md: SquareMatrix,
    ms: SquareMatrix,
    md_norm: f64,
    ms_norm: f64,
    d_norm: f64,
}

impl FinancialSystem {
    /// Validates raw system data.
    pub fn new(a: Vector, d: Vector, md: SquareMatrix, ms: SquareMatrix) -> Result<Self, ModelError> {
        let n = a.len();
        for (field, found) in [("d", d.len()), ("Md", md.dim()), ("Ms", ms.dim())] {
            if found != n {
                return Err(ModelError::DimensionMismatch {
                    field,
                    expected: n,
                    found,
                });
            }
        }
        let finite = [
            ("a", a.is_finite()),
            ("d", d.is_finite()),
            ("Md", md.is_finite()),
            ("Ms", ms.is_finite()),
        ];
        if let Some((field, _)) = finite.iter().find(|(_, ok)| !ok) {
            return Err(ModelError::NonFinite(field));
        }
        if a.iter().any(|&x| x < 0.0) {
            return Err(ModelError::NegativeEntries("a"));
        }
        if d.iter().any(|&x| x < 0.0) {
            return Err(ModelError::NegativeEntries("d"));
        }
        for (field, m) in [("Md", &md), ("Ms", &ms)] {
            if m.entries().iter().any(|&x| x < 0.0) {
                return Err(ModelError::NegativeEntries(field));
            }
            if !is_left_substochastic(m, SUBSTOCHASTIC_TOL) {
                return Err(ModelError::NotSubstochastic(field));
            }
        }
        if let Some(i) = (0..n).find(|&i| md[(i, i)] != 0.0) {
            return Err(ModelError::NonzeroDebtDiagonal(i));
        }
        for (matrix, m) in [("Md", &md), ("Ms", &ms)] {
            if let Some(firms) = elsinger_violation(m) {
                return Err(ModelError::ElsingerViolation { matrix, firms });
            }
        }
        let md_norm = md.l1_norm();
        let ms_norm = ms.l1_norm();
        let d_norm = d.l1_norm();
        Ok(FinancialSystem {
            a,
            d,
            md,
            ms,
            md_norm,
            ms_norm,
            d_norm,
        })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &Vector {
        &self.a
    }

    pub fn d(&self) -> &Vector {
        &self.d
    }

    pub fn md(&self) -> &SquareMatrix {
        &self.md
    }

    pub fn ms(&self) -> &SquareMatrix {
        &self.ms
    }

    pub fn md_norm(&self) -> f64 {
        self.md_norm
    }

    pub fn ms_norm(&self) -> f64 {
        self.ms_norm
    }

    /// True when both ownership matrices have ℓ1 norm strictly below 1, the
    /// condition under which pseudo solutions are well defined.
    pub fn finite_algorithms_allowed(&self) -> bool {
        self.md_norm < 1.0 && self.ms_norm < 1.0
    }

    pub fn require_finite_algorithms(&self) -> Result<(), ModelError> {
        if self.finite_algorithms_allowed() {
            Ok(())
        } else {
            Err(ModelError::AssumptionViolated {
                md_norm: self.md_norm,
                ms_norm: self.ms_norm,
            })
        }
    }

    /// Fixed-point tolerance used inside finite algorithms: `1e-9·(1+‖d‖₁)`.
    pub fn fixed_point_tol(&self) -> f64 {
        1e-9 * (1.0 + self.d_norm)
    }

    /// Tolerance a finite algorithm's reported solution is held to: `1e-8·(1+‖d‖₁)`.
    pub fn report_tol(&self) -> f64 {
        1e-8 * (1.0 + self.d_norm)
    }

    /// `a + Md·r + Ms·s`, the total inflow of every firm.
    pub fn inflows(&self, r: &Vector, s: &Vector) -> Vector {
        let mut v = self.md.mul_vec(r);
        let equity = self.ms.mul_vec(s);
        for i in 0..self.n() {
            v[i] += self.a[i] + equity[i];
        }
        v
    }

    pub fn phi(&self, state: &ClearingState) -> ClearingState {
        let v = self.inflows(&state.r, &state.s);
        ClearingState {
            r: v.min(&self.d),
            s: (&v - &self.d).positive_part(),
        }
    }

    /// Debt component of Φ for fixed equity: `min{d, a + Md·r + Ms·s}`.
    pub fn phi_debt(&self, r: &Vector, s_fixed: &Vector) -> Vector {
        self.inflows(r, s_fixed).min(&self.d)
    }

    /// Equity component of Φ for fixed debt payments: `(a + Md·r + Ms·s − d)⁺`.
    pub fn phi_equity(&self, s: &Vector, r_fixed: &Vector) -> Vector {
        (&self.inflows(r_fixed, s) - &self.d).positive_part()
    }

    /// `R≤ = (min{d, a}, (a − d)⁺) = Φ(0)`.
    pub fn bounds_lower(&self) -> ClearingState {
        ClearingState {
            r: self.d.min(&self.a),
            s: (&self.a - &self.d).positive_part(),
        }
    }

    /// `R≤` and `R≥ = (d, (I − Ms)⁻¹·(a + Md·d − d)⁺)`.
    pub fn bounds(&self) -> Result<Bounds, ModelError> {
        let zeros = Vector::zeros(self.n());
        let lower = self.bounds_lower();
        let surplus = (&self.inflows(&self.d, &zeros) - &self.d).positive_part();
        let i_minus_ms = SquareMatrix::identity(self.n()).sub(&self.ms);
        let upper = ClearingState {
            r: self.d.clone(),
            s: solve_linear(&i_minus_ms, &surplus)?,
        };
        Ok(Bounds { lower, upper })
    }

    /// Firms whose inflows fall strictly short of their liabilities.
    pub fn default_set(&self, state: &ClearingState) -> DefaultSet {
        self.default_set_of(&state.r, &state.s)
    }

    pub fn default_set_of(&self, r: &Vector, s: &Vector) -> DefaultSet {
        let v = self.inflows(r, s);
        DefaultSet::from_mask(v.iter().zip(self.d.iter()).map(|(x, d)| x < d).collect())
    }

    /// The candidate clearing state obtained by assuming `defaults` is the
    /// default set: solve `A·x = b` with `A = I − (Md·L + Ms·(I−L))` and
    /// `b = a + Md·(I−L)·d − (I−L)·d`, then `r = (I−L)·d + L·x`, `s = (I−L)·x`.
    ///
    /// The equity part is returned raw and may be negative when the guess is wrong.
    pub fn pseudo_solution(&self, defaults: &DefaultSet) -> Result<ClearingState, ModelError> {
        self.require_finite_algorithms()?;
        let n = self.n();
        let mask = defaults.mask();
        assert_eq!(mask.len(), n, "default set size mismatch");
        let a_mat = SquareMatrix::from_fn(n, |i, j| {
            let m = if mask[j] { self.md[(i, j)] } else { self.ms[(i, j)] };
            if i == j {
                1.0 - m
            } else {
                -m
            }
        });
        let solvent_debt = Vector::from_fn(n, |j| if mask[j] { 0.0 } else { self.d[j] });
        let paid = self.md.mul_vec(&solvent_debt);
        let b = Vector::from_fn(n, |i| self.a[i] + paid[i] - solvent_debt[i]);
        let x = solve_linear(&a_mat, &b)?;
        Ok(ClearingState {
            r: Vector::from_fn(n, |i| if mask[i] { x[i] } else { self.d[i] }),
            s: Vector::from_fn(n, |i| if mask[i] { 0.0 } else { x[i] }),
        })
    }

    /// `‖Φ(R) − R‖₁ ≤ tol` and `R ≥ −tol` componentwise.
    pub fn is_fixed_point(&self, state: &ClearingState, tol: f64) -> bool {
        if !state.r.is_finite() || !state.s.is_finite() {
            return false;
        }
        if state.r.min_entry() < -tol || state.s.min_entry() < -tol {
            return false;
        }
        self.phi(state).l1_distance(state) <= tol
    }

    pub fn to_document(&self) -> SystemDocument {
        SystemDocument {
            n: self.n(),
            a: self.a.to_vec(),
            d: self.d.to_vec(),
            md: self.md.to_rows(),
            ms: self.ms.to_rows(),
            meta: None,
        }
    }

    pub fn from_document(doc: &SystemDocument) -> Result<Self, ModelError> {
        let n = doc.n;
        let check = |field, found| {
            if found == n {
                Ok(())
            } else {
                Err(ModelError::DimensionMismatch {
                    field,
                    expected: n,
                    found,
                })
            }
        };
        check("a", doc.a.len())?;
        check("d", doc.d.len())?;
        check("Md", doc.md.len())?;
        check("Ms", doc.ms.len())?;
        for row in &doc.md {
            check("Md", row.len())?;
        }
        for row in &doc.ms {
            check("Ms", row.len())?;
        }
        FinancialSystem::new(
            Vector::from(doc.a.clone()),
            Vector::from(doc.d.clone()),
            SquareMatrix::from_rows(&doc.md)?,
            SquareMatrix::from_rows(&doc.ms)?,
        )
    }
}

/// A clearing state `R = (r, s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClearingState {
    pub r: Vector,
    pub s: Vector,
}

impl ClearingState {
    pub fn new(r: Vector, s: Vector) -> Self {
        assert_eq!(r.len(), s.len(), "r and s must have equal length");
        ClearingState { r, s }
    }

    pub fn zeros(n: usize) -> Self {
        ClearingState {
            r: Vector::zeros(n),
            s: Vector::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// `‖R₁ − R₂‖₁` over the stacked `2n`-vector.
    pub fn l1_distance(&self, other: &ClearingState) -> f64 {
        self.r.l1_distance(&other.r) + self.s.l1_distance(&other.s)
    }

    /// `self ≤ other + tol` componentwise.
    pub fn le_within(&self, other: &ClearingState, tol: f64) -> bool {
        self.r.le_within(&other.r, tol) && self.s.le_within(&other.s, tol)
    }

    pub fn stacked(&self) -> Vector {
        self.r.concat(&self.s)
    }
}

/// A set of firms stored as a membership mask.
///
/// Used both for default sets `D(r, s)` and for the positive sets `P(w)` of
/// pseudo-equity vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DefaultSet {
    mask: Vec<bool>,
    count: usize,
}

impl DefaultSet {
    pub fn from_mask(mask: Vec<bool>) -> Self {
        let count = mask.iter().filter(|&&m| m).count();
        DefaultSet { mask, count }
    }

    pub fn from_members(n: usize, members: &[usize]) -> Self {
        let mut mask = vec![false; n];
        for &i in members {
            mask[i] = true;
        }
        Self::from_mask(mask)
    }

    pub fn empty(n: usize) -> Self {
        Self::from_mask(vec![false; n])
    }

    pub fn all(n: usize) -> Self {
        Self::from_mask(vec![true; n])
    }

    /// The set whose members are the set bits of `bits` (firm `i` ↔ bit `i`).
    pub fn from_bits(n: usize, bits: u64) -> Self {
        Self::from_mask((0..n).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn is_all(&self) -> bool {
        self.count == self.mask.len()
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn is_subset(&self, other: &DefaultSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !a || *b)
    }

    /// The diagonal 0/1 indicator matrix `L`.
    pub fn indicator_matrix(&self) -> SquareMatrix {
        let diag: Vec<f64> = self.mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
        SquareMatrix::diagonal(&diag)
    }
}

/// The interval `[R≤, R≥]` that contains the clearing vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: ClearingState,
    pub upper: ClearingState,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn system_b() -> FinancialSystem {
        FinancialSystem::new(
            Vector::from([1.0, 0.0]),
            Vector::from([1.0, 1.0]),
            m(&[&[0.0, 0.5], &[0.5, 0.0]]),
            SquareMatrix::zeros(2),
        )
        .unwrap()
    }

    fn system_b_solution() -> ClearingState {
        ClearingState::new(Vector::from([1.0, 0.5]), Vector::from([0.25, 0.0]))
    }

    fn unlinked(a: [f64; 2], d: [f64; 2]) -> FinancialSystem {
        FinancialSystem::new(
            Vector::from(a),
            Vector::from(d),
            SquareMatrix::zeros(2),
            SquareMatrix::zeros(2),
        )
        .unwrap()
    }

    #[test]
    fn validate_accepts_half_ring() {
        let f = FinancialSystem::new(
            Vector::from([1.0, 1.0]),
            Vector::from([1.0, 1.0]),
            m(&[&[0.0, 0.5], &[0.5, 0.0]]),
            SquareMatrix::zeros(2),
        )
        .unwrap();
        assert!(f.finite_algorithms_allowed());
    }

    #[test]
    fn validate_rejects_full_cycle() {
        let err = FinancialSystem::new(
            Vector::from([1.0, 1.0]),
            Vector::from([1.0, 1.0]),
            m(&[&[0.0, 1.0], &[1.0, 0.0]]),
            SquareMatrix::zeros(2),
        )
        .unwrap_err();
        assert_eq!(
            err,
            ModelError::ElsingerViolation {
                matrix: "Md",
                firms: vec![0, 1]
            }
        );
    }

    #[test]
    fn validate_rejects_heavy_entry() {
        let err = FinancialSystem::new(
            Vector::from([1.0, 1.0]),
            Vector::from([1.0, 1.0]),
            m(&[&[0.0, 1.2], &[0.0, 0.0]]),
            SquareMatrix::zeros(2),
        )
        .unwrap_err();
        assert_eq!(err, ModelError::NotSubstochastic("Md"));
    }

    #[test]
    fn validate_other_errors() {
        let ok = || m(&[&[0.0, 0.5], &[0.5, 0.0]]);
        let e = FinancialSystem::new(Vector::from([1.0]), Vector::from([1.0, 1.0]), ok(), ok());
        assert!(matches!(e, Err(ModelError::DimensionMismatch { field: "d", .. })));
        let e = FinancialSystem::new(Vector::from([-1.0, 1.0]), Vector::from([1.0, 1.0]), ok(), ok());
        assert_eq!(e.unwrap_err(), ModelError::NegativeEntries("a"));
        let e = FinancialSystem::new(
            Vector::from([1.0, 1.0]),
            Vector::from([1.0, 1.0]),
            m(&[&[0.1, 0.5], &[0.5, 0.0]]),
            ok(),
        );
        assert_eq!(e.unwrap_err(), ModelError::NonzeroDebtDiagonal(0));
        let e = FinancialSystem::new(
            Vector::from([f64::NAN, 1.0]),
            Vector::from([1.0, 1.0]),
            ok(),
            ok(),
        );
        assert_eq!(e.unwrap_err(), ModelError::NonFinite("a"));
        // equity may sit on the diagonal
        let f = FinancialSystem::new(
            Vector::from([1.0, 1.0]),
            Vector::from([1.0, 1.0]),
            ok(),
            m(&[&[0.3, 0.0], &[0.0, 0.0]]),
        );
        assert!(f.is_ok());
    }

    #[test]
    fn norm_one_is_valid_but_not_finite() {
        // column 0 fully owned, column 1 not: Elsinger holds, norm is 1
        let f = FinancialSystem::new(
            Vector::from([1.0, 1.0]),
            Vector::from([1.0, 1.0]),
            m(&[&[0.0, 0.5], &[1.0, 0.0]]),
            SquareMatrix::zeros(2),
        )
        .unwrap();
        assert!(!f.finite_algorithms_allowed());
        let err = f.pseudo_solution(&DefaultSet::empty(2)).unwrap_err();
        assert!(matches!(err, ModelError::AssumptionViolated { .. }));
    }

    #[test]
    fn phi_without_links() {
        let f = unlinked([1.0, 1.0], [0.5, 2.0]);
        let out = f.phi(&ClearingState::zeros(2));
        assert_eq!(out.r, Vector::from([0.5, 1.0]));
        assert_eq!(out.s, Vector::from([0.5, 0.0]));
    }

    #[test]
    fn phi_fixes_system_b_solution() {
        let f = system_b();
        let star = system_b_solution();
        assert!(f.phi(&star).l1_distance(&star) < 1e-15);
    }

    #[test]
    fn phi_maps_upper_bound_down() {
        let f = system_b();
        let upper = f.bounds().unwrap().upper;
        assert!(f.phi(&upper).le_within(&upper, 0.0));
    }

    #[test]
    fn phi_debt_examples() {
        let f = system_b();
        let zero = Vector::zeros(2);
        assert_eq!(f.phi_debt(&zero, &zero), Vector::from([1.0, 0.0]));
        assert_eq!(f.phi_debt(f.d(), &zero), Vector::from([1.0, 0.5]));
        let g = FinancialSystem::new(
            Vector::from([1.0, 2.0]),
            Vector::zeros(2),
            m(&[&[0.0, 0.5], &[0.5, 0.0]]),
            SquareMatrix::zeros(2),
        )
        .unwrap();
        assert_eq!(g.phi_debt(&Vector::from([3.0, 1.0]), &zero), zero);
    }

    #[test]
    fn phi_equity_examples() {
        let f = system_b();
        let s = f.phi_equity(&Vector::zeros(2), &Vector::from([1.0, 0.5]));
        assert_abs_diff_eq!(s[0], 0.25);
        assert_eq!(s[1], 0.0);
        let g = unlinked([1.0, 2.0], [1.0, 2.0]);
        assert_eq!(g.phi_equity(&Vector::from([5.0, 5.0]), &Vector::zeros(2)), Vector::zeros(2));
        // with Ms = 0 the result ignores s
        assert_eq!(
            f.phi_equity(&Vector::from([7.0, 3.0]), &Vector::from([1.0, 0.5])),
            f.phi_equity(&Vector::zeros(2), &Vector::from([1.0, 0.5]))
        );
    }

    #[test]
    fn bounds_examples() {
        let b = system_b().bounds().unwrap();
        assert_eq!(b.lower, ClearingState::new(Vector::from([1.0, 0.0]), Vector::zeros(2)));
        assert_eq!(b.upper, ClearingState::new(Vector::from([1.0, 1.0]), Vector::from([0.5, 0.0])));

        let b = unlinked([1.0, 1.0], [0.5, 2.0]).bounds().unwrap();
        assert_eq!(b.lower, ClearingState::new(Vector::from([0.5, 1.0]), Vector::from([0.5, 0.0])));
        assert_eq!(b.upper, ClearingState::new(Vector::from([0.5, 2.0]), Vector::from([0.5, 0.0])));

        let b = unlinked([0.0, 0.0], [0.0, 0.0]).bounds().unwrap();
        assert_eq!(b.lower, ClearingState::zeros(2));
        assert_eq!(b.upper, ClearingState::zeros(2));
    }

    #[test]
    fn default_set_examples() {
        let f = system_b();
        let upper = f.bounds().unwrap().upper;
        assert_eq!(f.default_set(&upper).members(), vec![1]);
        assert!(unlinked([2.0, 1.0], [1.0, 1.0]).default_set(&ClearingState::zeros(2)).is_empty());
        assert!(unlinked([0.0, 0.0], [1.0, 1.0]).default_set(&ClearingState::zeros(2)).is_all());
    }

    #[test]
    fn default_set_is_strict() {
        // inflow exactly equal to liability is not a default
        let f = unlinked([1.0, 0.5], [1.0, 1.0]);
        assert_eq!(f.default_set(&ClearingState::zeros(2)).members(), vec![1]);
    }

    #[test]
    fn indicator_matrix_matches_members() {
        let set = DefaultSet::from_members(3, &[0, 2]);
        let l = set.indicator_matrix();
        assert_eq!(l, SquareMatrix::diagonal(&[1.0, 0.0, 1.0]));
        assert_eq!(set.len(), 2);
        assert_eq!(DefaultSet::from_bits(3, 0b101), set);
    }

    #[test]
    fn pseudo_solution_system_b() {
        let f = system_b();
        let hat = f.pseudo_solution(&DefaultSet::from_members(2, &[1])).unwrap();
        assert_abs_diff_eq!(hat.r[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hat.r[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(hat.s[0], 0.25, epsilon = 1e-15);
        assert_eq!(hat.s[1], 0.0);
    }

    #[test]
    fn pseudo_solution_no_defaults() {
        let f = system_b();
        let hat = f.pseudo_solution(&DefaultSet::empty(2)).unwrap();
        assert_eq!(hat.r, *f.d());
        // a + Md·d − d = (0.5, −0.5), kept raw
        assert_abs_diff_eq!(hat.s[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(hat.s[1], -0.5, epsilon = 1e-15);
        assert!(!f.is_fixed_point(&hat, f.fixed_point_tol()));
    }

    #[test]
    fn pseudo_solution_all_defaults() {
        let f = system_b();
        let hat = f.pseudo_solution(&DefaultSet::all(2)).unwrap();
        let i_minus_md = SquareMatrix::identity(2).sub(f.md());
        let expected = solve_linear(&i_minus_md, f.a()).unwrap();
        assert!(hat.r.l1_distance(&expected) < 1e-14);
        assert_eq!(hat.s, Vector::zeros(2));
    }

    #[test]
    fn fixed_point_examples() {
        let f = system_b();
        assert!(f.is_fixed_point(&system_b_solution(), 1e-9));
        assert!(!f.is_fixed_point(&ClearingState::zeros(2), 1e-9));
        let z = unlinked([0.0, 0.0], [0.0, 0.0]);
        assert!(z.is_fixed_point(&ClearingState::zeros(2), 1e-9));
    }

    #[test]
    fn fixed_point_rejects_negative_entries() {
        let f = unlinked([0.0, 0.0], [0.0, 0.0]);
        let state = ClearingState::new(Vector::zeros(2), Vector::from([-1e-3, 0.0]));
        assert!(!f.is_fixed_point(&state, 1e-4));
    }
}
