//! Pairing of the numerical reduced-model spectrum with the leading-order
//! eigenvalue table.

use serde::{Deserialize, Serialize};

use crate::closed_forms::{table1_eigenvalues, TABLE1_SLOW};
use crate::dynamics::linear::spectrum;
use crate::reduced::build_reduced_matrix;
use crate::tensor::C64;

/// Tolerance on `|λ₀|`.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Zero,
    Fast,
    Slow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub label: String,
    pub band: Band,
    pub predicted: [f64; 2],
    pub numerical: [f64; 2],
    /// `|numerical − predicted|` in units of γ.
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Match {
    #[serde(rename = "R")]
    pub r: f64,
    pub gamma: f64,
    pub pairs: Vec<EigenPair>,
    pub total_distance: f64,
}

impl Table1Match {
    pub fn all_pass(&self) -> bool {
        self.pairs.iter().all(|p| p.pass)
    }
}

/// Dense eigensolve of the reduced matrix.
#[allow(non_snake_case)]
pub fn reduced_spectrum(R: f64, gamma: f64) -> Vec<C64> {
    spectrum(&build_reduced_matrix(R, gamma))
}

/// `assignment[i]` is the numerical index paired with prediction `i`.
fn pair_up(predicted: &[C64], numerical: &[C64]) -> Vec<usize> {
    let n = predicted.len();
    let dist = |i: usize, j: usize| (predicted[i] - numerical[j]).norm();
    let mut candidates: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..numerical.len()).map(move |j| (i, j))).collect();
    candidates.sort_by(|a, b| dist(a.0, a.1).total_cmp(&dist(b.0, b.1)));
    let mut assignment = vec![usize::MAX; n];
    let mut used = vec![false; numerical.len()];
    for (i, j) in candidates {
        if assignment[i] == usize::MAX && !used[j] {
            assignment[i] = j;
            used[j] = true;
        }
    }
    // Pairwise swaps until the total distance stops decreasing.
    loop {
        let mut changed = false;
        for a in 0..n {
            for b in a + 1..n {
                let (ja, jb) = (assignment[a], assignment[b]);
                if dist(a, jb) + dist(b, ja) < dist(a, ja) + dist(b, jb) - 1e-15 {
                    assignment.swap(a, b);
                    changed = true;
                }
            }
        }
        if !changed {
            return assignment;
        }
    }
}

/// Pairs `numerical` with the table predictions and applies the tolerance
/// bands: `|λ₀| ≤ 1e−10`; fast eigenvalues within `10γ/R`; slow pair
/// imaginary parts within 1 % and real parts within 20 %.
#[allow(non_snake_case)]
pub fn match_table1(numerical: &[C64], R: f64, gamma: f64) -> Table1Match {
    let predicted = table1_eigenvalues(R, gamma);
    let assignment = pair_up(&predicted, numerical);
    let mut pairs = Vec::with_capacity(predicted.len());
    let mut total = 0.0;
    for (i, (&p, &j)) in predicted.iter().zip(&assignment).enumerate() {
        let z = numerical[j];
        let residual = (z - p).norm() / gamma;
        total += residual;
        let band = if i == 0 {
            Band::Zero
        } else if TABLE1_SLOW.contains(&i) {
            Band::Slow
        } else {
            Band::Fast
        };
        let pass = match band {
            Band::Zero => z.norm() <= ZERO_EIGENVALUE_TOL * gamma,
            Band::Fast => residual <= 10.0 / R,
            Band::Slow => (z.im - p.im).abs() <= 0.01 * p.im.abs() && (z.re - p.re).abs() <= 0.2 * p.re.abs(),
        };
        pairs.push(EigenPair {
            label: format!("lambda_{i}"),
            band,
            predicted: [p.re, p.im],
            numerical: [z.re, z.im],
            residual,
            pass,
        });
    }
    Table1Match { r: R, gamma, pairs, total_distance: total }
}

/// Every eigenvalue has a conjugate partner within `tol`.
pub fn closed_under_conjugation(values: &[C64], tol: f64) -> bool {
    values.iter().all(|z| values.iter().any(|w| (w - z.conj()).norm() <= tol))
}
