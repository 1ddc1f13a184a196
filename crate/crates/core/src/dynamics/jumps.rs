//! Jump unraveling of the correction process: Φ applied at Poisson(κ) times
//! during otherwise unitary evolution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::codes::CodeSpec;
use crate::dynamics::{sample_times, Trajectory};
use crate::error::{Error, Result};
use crate::maps::lifted_kraus;
use crate::tensor::{CMatrix, CVector, DensityMatrix, SparseOperator, C64};

/// Trajectories per work unit. Fixed so that summation order, and hence the
/// output bits, do not depend on the thread count.
const CHUNK: usize = 64;

#[derive(Debug, Clone)]
pub struct MonteCarloResult {
    /// Ensemble-mean state at each sample time.
    pub mean: Trajectory,
    /// Mean codeword fidelity per sample.
    pub fidelity: Vec<f64>,
    /// Standard error of the mean fidelity per sample.
    pub fidelity_stderr: Vec<f64>,
    pub n_traj: usize,
}

struct Propagator {
    vectors: CMatrix,
    energies: Vec<f64>,
}

impl Propagator {
    fn new(h: &CMatrix) -> Self {
        let eig = h.clone().symmetric_eigen();
        Self { vectors: eig.eigenvectors, energies: eig.eigenvalues.iter().copied().collect() }
    }

    fn evolve(&self, rho: &CMatrix, dt: f64) -> CMatrix {
        if dt == 0.0 {
            return rho.clone();
        }
        // In the eigenbasis, ρ_jk picks up exp(−i(E_j − E_k)dt).
        let v = &self.vectors;
        let mut r = v.adjoint() * rho * v;
        for j in 0..r.nrows() {
            for k in 0..r.ncols() {
                r[(j, k)] *= C64::new(0.0, -(self.energies[j] - self.energies[k]) * dt).exp();
            }
        }
        v * r * v.adjoint()
    }
}

#[derive(Clone)]
struct Accumulator {
    states: Vec<CMatrix>,
    fid: Vec<f64>,
    fid_sq: Vec<f64>,
}

impl Accumulator {
    fn zeros(samples: usize, dim: usize) -> Self {
        Self { states: vec![CMatrix::zeros(dim, dim); samples], fid: vec![0.0; samples], fid_sq: vec![0.0; samples] }
    }

    fn merge(mut self, other: &Accumulator) -> Self {
        for (a, b) in self.states.iter_mut().zip(&other.states) {
            *a += b;
        }
        for i in 0..self.fid.len() {
            self.fid[i] += other.fid[i];
            self.fid_sq[i] += other.fid_sq[i];
        }
        self
    }
}

/// Averages `n_traj` jump trajectories sampled at `samples` uniform times on
/// `[0, t_max]`. Trajectory `i` draws from the ChaCha stream `i` of `seed`.
#[allow(clippy::too_many_arguments)]
pub fn jump_monte_carlo(
    rho0: &DensityMatrix,
    h: &CMatrix,
    code: &CodeSpec,
    kappa: f64,
    t_max: f64,
    samples: usize,
    n_traj: usize,
    seed: u64,
) -> Result<MonteCarloResult> {
    if n_traj == 0 {
        return Err(Error::InvalidParams("n_traj must be at least 1".into()));
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::OutOfRange { name: "kappa", value: kappa });
    }
    let register = rho0.register().clone();
    let dim = register.dim();
    if h.nrows() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: h.nrows() });
    }
    let times = sample_times(t_max, samples)?;
    let kraus: Vec<SparseOperator> = lifted_kraus(code, &register)?.iter().map(SparseOperator::from_dense).collect();
    let prop = Propagator::new(h);
    let waiting = (kappa > 0.0).then(|| Exp::new(kappa).expect("kappa is positive"));
    let zero: CVector = code.logical_zero.clone();

    let run = |index: usize, acc: &mut Accumulator| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let mut rho = rho0.matrix().clone();
        let mut t = 0.0;
        let mut next_jump = waiting.as_ref().map_or(f64::INFINITY, |w| w.sample(&mut rng));
        for (s, &ts) in times.iter().enumerate() {
            while next_jump <= ts {
                rho = prop.evolve(&rho, next_jump - t);
                rho = kraus.iter().fold(CMatrix::zeros(dim, dim), |a, k| a + k.sandwich(&rho));
                t = next_jump;
                next_jump += waiting.as_ref().map_or(f64::INFINITY, |w| w.sample(&mut rng));
            }
            rho = prop.evolve(&rho, ts - t);
            t = ts;
            let f = DensityMatrix::from_parts_unchecked(register.clone(), rho.clone())
                .expect("shape is preserved")
                .system_overlap(&zero);
            acc.states[s] += &rho;
            acc.fid[s] += f;
            acc.fid_sq[s] += f * f;
        }
    };

    let n_chunks = n_traj.div_ceil(CHUNK);
    let partials: Vec<Accumulator> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Accumulator::zeros(times.len(), dim);
            for index in c * CHUNK..((c + 1) * CHUNK).min(n_traj) {
                run(index, &mut acc);
            }
            acc
        })
        .collect();
    let total = partials.iter().fold(Accumulator::zeros(times.len(), dim), Accumulator::merge);

    let n = n_traj as f64;
    let scale = C64::new(1.0 / n, 0.0);
    let states = total
        .states
        .into_iter()
        .map(|m| DensityMatrix::from_parts_unchecked(register.clone(), m * scale))
        .collect::<Result<Vec<_>>>()?;
    let fidelity: Vec<f64> = total.fid.iter().map(|s| s / n).collect();
    let fidelity_stderr = total
        .fid_sq
        .iter()
        .zip(&fidelity)
        .map(|(sq, mean)| {
            if n_traj < 2 {
                0.0
            } else {
                ((sq / n - mean * mean).max(0.0) * n / (n - 1.0) / n).sqrt()
            }
        })
        .collect();
    Ok(MonteCarloResult {
        mean: Trajectory { times, states, warnings: Vec::new() },
        fidelity,
        fidelity_stderr,
        n_traj,
    })
}
