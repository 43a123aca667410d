//! Single-flip Metropolis simulated annealing over a [`Qubo`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tsp::{decode_tour, Tour};
use super::Qubo;
use crate::catalog::ProblemInstance;

const FINAL_TEMPERATURE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnealParams {
    pub seed: u64,
    /// Temperature steps; every step visits each variable once.
    pub sweeps: usize,
    pub restarts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub bits: Vec<u8>,
    pub energy: f64,
    pub decoded: Option<Tour>,
}

impl SampleResult {
    /// Attaches the tour encoded by `bits`, if they encode one.
    pub fn decode_for(mut self, instance: &ProblemInstance) -> Self {
        self.decoded = decode_tour(&self.bits, instance);
        self
    }
}

/// Symmetric adjacency form of the quadratic terms for O(degree) flip deltas.
struct Couplings {
    linear: Vec<f64>,
    neighbours: Vec<Vec<(usize, f64)>>,
}

impl Couplings {
    fn new(q: &Qubo) -> Self {
        let mut linear = vec![0.0; q.size()];
        let mut neighbours = vec![Vec::new(); q.size()];
        for ((i, j), w) in q.coefficients() {
            if i == j {
                linear[i] += w;
            } else {
                neighbours[i].push((j, w));
                neighbours[j].push((i, w));
            }
        }
        Self { linear, neighbours }
    }
}

/// Geometric schedule from `10 · max|coefficient|` down to 0.01.
fn temperatures(q: &Qubo, sweeps: usize) -> Vec<f64> {
    let start = (10.0 * q.max_abs_coefficient()).max(FINAL_TEMPERATURE);
    if sweeps == 1 {
        return vec![FINAL_TEMPERATURE];
    }
    let ratio = (FINAL_TEMPERATURE / start).powf(1.0 / (sweeps - 1) as f64);
    std::iter::successors(Some(start), |t| Some(t * ratio)).take(sweeps).collect()
}

fn anneal_once(c: &Couplings, schedule: &[f64], rng: &mut ChaCha8Rng) -> (f64, Vec<u8>) {
    let size = c.linear.len();
    let mut bits: Vec<u8> = (0..size).map(|_| rng.gen_range(0..=1)).collect();
    // field[i] = Σ_j w_ij x_j
    let mut field = vec![0.0; size];
    let mut energy = 0.0;
    for i in 0..size {
        if bits[i] == 1 {
            energy += c.linear[i];
            for &(j, w) in &c.neighbours[i] {
                field[j] += w;
                if j > i && bits[j] == 1 {
                    energy += w;
                }
            }
        }
    }
    let mut best = (energy, bits.clone());
    for &t in schedule {
        for i in 0..size {
            let gain = c.linear[i] + field[i];
            let delta = if bits[i] == 1 { -gain } else { gain };
            if delta <= 0.0 || rng.gen::<f64>() < (-delta / t).exp() {
                let step = if bits[i] == 1 { -1.0 } else { 1.0 };
                bits[i] ^= 1;
                energy += delta;
                for &(j, w) in &c.neighbours[i] {
                    field[j] += step * w;
                }
                if energy < best.0 {
                    best = (energy, bits.clone());
                }
            }
        }
    }
    best
}

/// Lowest-energy assignment seen over all restarts. Restart `r` draws from
/// ChaCha stream `r` of `seed`, so results depend only on the parameters;
/// equal energies keep the earliest restart.
///
/// Panics if `sweeps` or `restarts` is zero.
pub fn sample(q: &Qubo, params: AnnealParams) -> SampleResult {
    assert!(params.sweeps >= 1 && params.restarts >= 1, "sweeps and restarts must be positive");
    let couplings = Couplings::new(q);
    let schedule = temperatures(q, params.sweeps);
    let mut best: Option<Vec<u8>> = None;
    let mut best_energy = f64::INFINITY;
    for restart in 0..params.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(restart as u64);
        let (_, bits) = anneal_once(&couplings, &schedule, &mut rng);
        // Re-evaluate so accumulated rounding in the running energy never decides.
        let energy = q.evaluate(&bits).expect("sample length matches");
        if energy < best_energy {
            best_energy = energy;
            best = Some(bits);
        }
    }
    let bits = best.expect("at least one restart");
    SampleResult { bits, energy: best_energy, decoded: None }
}
