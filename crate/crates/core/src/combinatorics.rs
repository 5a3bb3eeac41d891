//! Exact integer combinatorics for the catch-up race.
//!
//! The closed-form race probability is a polynomial whose coefficients
//! `a(i, m)` count lattice walks: starting from lag `m`, taking `i` honest
//! steps (lag +1) and `m + 1 + i` attacker steps (lag -1), and reaching lag
//! -1 for the first time on the final step. `a(i, 0)` is the `i`-th Catalan
//! number; general `m` shifts the starting height.
//!
//! All counts are arbitrary-precision: Catalan numbers leave `i64` range at
//! index 36 and `u64` range at index 37, and realistic deadlines need indices
//! in the hundreds.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision nonnegative path count.
pub type BigCount = BigUint;

/// The `i`-th Catalan number `(2i)! / ((i+1)! i!)`.
///
/// Computed as `binomial(2i, i) / (i + 1)`; the division is exact, so there
/// is no intermediate overflow at any index.
pub fn catalan(i: usize) -> BigCount {
    let n = BigUint::from(2 * i);
    let k = BigUint::from(i);
    num_integer::binomial(n, k) / BigUint::from(i + 1)
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> BigCount {
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

/// Memoized table of the walk-count coefficients `a(i, m)`.
///
/// Filled row by row in increasing `i` from the recurrence
/// `a(i, m) = a(i, m-1) + a(i-1, m+1)`, seeding each row at `m = 0` with the
/// Catalan number `C_i` and at `m = 1` with `C_{i+1}`. Because row `i` at lag
/// `m` reads row `i-1` at lag `m+1`, interior rows are filled past the public
/// lag capacity: row `i` extends to `max_m + (max_i - i)`, so every lookup
/// the recurrence needs is in range. Once built the table is immutable and
/// freely shareable across threads.
#[derive(Debug)]
pub struct CoefficientTable {
    rows: Vec<Vec<BigCount>>,
    max_i: usize,
    max_m: usize,
}

impl CoefficientTable {
    /// Build the table covering all `i <= max_i`, `m <= max_m`.
    pub fn new(max_i: usize, max_m: usize) -> Self {
        let width = |i: usize| max_m + (max_i - i) + 1;
        let mut rows: Vec<Vec<BigCount>> = Vec::with_capacity(max_i + 1);

        // Row 0: a(0, m) = 1 (the single all-attacker walk).
        rows.push(vec![BigUint::one(); width(0)]);

        // Catalan pair (C_i, C_{i+1}) advanced by the exact ratio identity
        // C_{i+1} = C_i (4i + 2) / (i + 2).
        let mut cat_i = BigUint::one(); // C_1 when entering the i = 1 row
        for i in 1..=max_i {
            cat_i = cat_i * BigUint::from(4 * (i - 1) + 2) / BigUint::from(i + 1);
            let cat_next = cat_i.clone() * BigUint::from(4 * i + 2) / BigUint::from(i + 2);

            let w = width(i);
            let mut row = Vec::with_capacity(w);
            row.push(cat_i.clone());
            if w > 1 {
                row.push(cat_next);
            }
            for m in 2..w {
                let below = &rows[i - 1][m + 1];
                let prev = &row[m - 1];
                row.push(prev + below);
            }
            rows.push(row);
        }

        Self { rows, max_i, max_m }
    }

    pub fn max_i(&self) -> usize {
        self.max_i
    }

    pub fn max_m(&self) -> usize {
        self.max_m
    }

    /// Whether `coefficient(i, m)` is in the table's public capacity.
    pub fn covers(&self, i: usize, m: usize) -> bool {
        i <= self.max_i && m <= self.max_m
    }

    /// The walk count `a(i, m)`.
    pub fn coefficient(&self, i: usize, m: usize) -> Result<&BigCount> {
        if !self.covers(i, m) {
            return Err(Error::TableTooSmall {
                need_i: i,
                need_m: m,
                max_i: self.max_i,
                max_m: self.max_m,
            });
        }
        Ok(&self.rows[i][m])
    }
}

/// The closed nested-sum expression for `a(i, m)`, evaluated literally.
///
/// For `i > 1, m > 1` this walks the printed expression term by term:
/// `C_{i+1}`, then for each depth `d = 1..=i-2` the `d`-fold nested sum
/// `Σ_{j_1=3}^{m+1} Σ_{j_2=3}^{j_1+1} … Σ_{j_d=3}^{j_{d-1}+1} C_{i-d+1}`,
/// and finally the `(i-1)`-fold nested sum of `(1 + j_{i-1})`. The other
/// index ranges fall back to the closed cases (`1`, `1 + m`, `C_i`,
/// `C_{i+1}`). Exponentially slower than the recurrence — kept purely as an
/// independent test oracle for [`CoefficientTable`].
pub fn coefficient_reference(i: usize, m: usize) -> BigCount {
    match (i, m) {
        (0, _) => BigUint::one(),
        (1, _) => BigUint::from(1 + m),
        (_, 0) => catalan(i),
        (_, 1) => catalan(i + 1),
        _ => {
            let mut total = catalan(i + 1);
            for d in 1..=i.saturating_sub(2) {
                total += nested_constant_sum(d, m + 1, &catalan(i - d + 1));
            }
            total += nested_closing_sum(i - 1, m + 1);
            total
        }
    }
}

/// `Σ_{j=3}^{upper} …` nested `depth` times with a constant innermost summand.
fn nested_constant_sum(depth: usize, upper: usize, constant: &BigCount) -> BigCount {
    let mut acc = BigUint::zero();
    for j in 3..=upper {
        if depth == 1 {
            acc += constant;
        } else {
            acc += nested_constant_sum(depth - 1, j + 1, constant);
        }
    }
    acc
}

/// `Σ_{j=3}^{upper} …` nested `depth` times closing with `(1 + j_last)`.
fn nested_closing_sum(depth: usize, upper: usize) -> BigCount {
    let mut acc = BigUint::zero();
    for j in 3..=upper {
        if depth == 1 {
            acc += BigUint::from(1 + j);
        } else {
            acc += nested_closing_sum(depth - 1, j + 1);
        }
    }
    acc
}

/// The cycle-lemma (ballot-problem) closed form
/// `a(i, m) = (m+1)/(m+2i+1) · binomial(m+2i+1, i)`.
///
/// Not used in production — it is a third, structurally independent oracle
/// for the coefficient table, adopted only after the test suite validates it
/// against brute-force walk enumeration.
pub fn coefficient_ballot(i: u64, m: u64) -> BigCount {
    let n = m + 2 * i + 1;
    let numer = binomial(n, i) * BigUint::from(m + 1);
    let denom = BigUint::from(n);
    debug_assert!((&numer % &denom).is_zero(), "cycle-lemma division must be exact");
    numer / denom
}

/// Partial sum `Σ_{i<terms} C_i x^i` of the Catalan generating function.
///
/// On `[0, 1/4)` the series converges to `(1 - sqrt(1 - 4x)) / (2x)`; at
/// `x = 1/4` the partial sums stay below the limit 2. Terms are accumulated
/// with Neumaier compensation, and each term is formed through the scaled
/// representation so late terms (giant `C_i`, vanishing `x^i`) remain exact
/// to ~1 ulp.
pub fn catalan_gf_partial(x: f64, terms: usize) -> Result<f64> {
    if !(0.0..=0.25).contains(&x) {
        return Err(Error::GfDomain { x });
    }
    if terms == 0 {
        return Err(Error::GfNoTerms);
    }
    use crate::numeric::Scalar;
    let mut cat = BigUint::one();
    let series = (0..terms).map(|i| {
        if i > 0 {
            cat = &cat * BigUint::from(4 * (i - 1) + 2) / BigUint::from(i + 1);
        }
        f64::count_term(&cat, &x, i as u32, &1.0, 0)
    });
    Ok(f64::sum(series))
}
