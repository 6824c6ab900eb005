//! Semiclassical stochastic engine: Euler–Maruyama integration of the
//! amplitude equations on an arbitrary network, with ensemble transport
//! statistics.
//!
//! The Itô equations per site are
//! `dα_ℓ = [−(γ/2 + iΔ_ℓ)α_ℓ + (i/2)Σ_m g_ℓm α_m ± Γ(α_ℓ)α_ℓ/2] dt + σ_ℓ dW_ℓ`
//! with `Γ(α) = Γ f²(|α|²)`, `σ_ℓ² = γN_th + Σ_gains Γ_i(α_ℓ)` and complex
//! Wiener increments `dW = (n₁ + i n₂)√(dt/2)` so that
//! `⟨ξ*_ℓ(t) ξ_ℓ'(t')⟩ = δ_ℓℓ' δ(t − t')`.
//!
//! Trajectories use independent, reproducible RNG streams derived from one
//! seed; ensemble reduction runs in fixed trajectory order, so results do not
//! depend on the execution mode.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::exec::{map_indexed, ExecMode};
use crate::model::{ModelError, NetworkSpec, SaturationLaw, TerminalKind};

#[derive(Debug, Error)]
pub enum SdeError {
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("{0} must be positive")]
    NonPositiveConfig(&'static str),
    #[error("state has {got} amplitudes, spec has {expected} sites")]
    StateMismatch { got: usize, expected: usize },
    #[error("site index {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("amplitude diverged at site {site} (|α|² = {amp_sq:.3e} > guard {guard:.3e})")]
    Diverged { site: usize, amp_sq: f64, guard: f64 },
    #[error("every trajectory diverged; no samples collected")]
    AllTrajectoriesDiverged,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Complex amplitude per site plus a time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    pub alphas: Vec<Complex64>,
    /// Time in units of `1/g`.
    pub time: f64,
}

impl AmplitudeState {
    pub fn zero(n_sites: usize) -> Self {
        Self { alphas: vec![Complex64::new(0.0, 0.0); n_sites], time: 0.0 }
    }

    pub fn occupation(&self, site: usize) -> f64 {
        self.alphas[site].norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[non_exhaustive]
pub enum Scheme {
    EulerMaruyama,
}

/// Fixed-step integrator settings.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    /// Time step in units of `1/g`.
    pub dt: f64,
    pub seed: u64,
    pub scheme: Scheme,
    /// Occupation above which a trajectory is flagged divergent;
    /// defaults to `10⁶ ×` the spec's reference occupation.
    pub divergence_guard: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { dt: 1e-4, seed: 0, scheme: Scheme::EulerMaruyama, divergence_guard: None }
    }
}

impl IntegratorConfig {
    fn guard_for(&self, spec: &NetworkSpec) -> f64 {
        self.divergence_guard.unwrap_or(1e6 * spec.reference_occupation())
    }

    /// Step-size warnings (`dt·Γmax > 0.05` biases the statistics).
    pub fn warnings(&self, spec: &NetworkSpec) -> Vec<String> {
        let mut out = Vec::new();
        let product = self.dt * spec.max_rate();
        if product > 0.05 {
            out.push(format!(
                "dt·Γmax = {product:.3} exceeds 0.05; Euler–Maruyama statistics will be biased"
            ));
        }
        out
    }
}

/// Initial condition for each trajectory.
#[derive(Debug, Clone)]
pub enum InitialCondition {
    /// Independent Gaussian seed of RMS `scale·√n_ref` per site.
    SmallRandom { scale: f64 },
    /// Same fixed amplitudes for every trajectory.
    Fixed(Vec<Complex64>),
    /// Complex Gaussian per site with `⟨|α|²⟩ = occupation` — the exact
    /// stationary ensemble of a passive chain with equal local baths.
    Thermal { occupation: f64 },
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::SmallRandom { scale: 1e-3 }
    }
}

/// Bin layout for per-site phase-space histograms over
/// `(Re α/√n_ref, Im α/√n_ref)`.
#[derive(Debug, Clone, Copy)]
pub struct HistogramConfig {
    pub bins: usize,
    /// Symmetric axis range `[-half_range, half_range]` on both quadratures.
    pub half_range: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self { bins: 101, half_range: 4.0 }
    }
}

/// Ensemble schedule. Defaults mirror the reference numerical protocol
/// (50 trajectories, burn-in `5000/g`, 3000 samples spaced 17000 steps).
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    /// Discarded transient per trajectory, units of `1/g`.
    pub burn_in_time: f64,
    pub n_samples: usize,
    pub sample_stride_steps: usize,
    pub exec: ExecMode,
    pub initial: InitialCondition,
    pub histogram: HistogramConfig,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_traj: 50,
            burn_in_time: 5000.0,
            n_samples: 3000,
            sample_stride_steps: 17000,
            exec: ExecMode::default(),
            initial: InitialCondition::default(),
            histogram: HistogramConfig::default(),
        }
    }
}

impl EnsembleConfig {
    fn validate(&self) -> Result<(), SdeError> {
        if self.n_traj == 0 {
            return Err(SdeError::NonPositiveConfig("n_traj"));
        }
        if self.n_samples == 0 {
            return Err(SdeError::NonPositiveConfig("n_samples"));
        }
        if self.sample_stride_steps == 0 {
            return Err(SdeError::NonPositiveConfig("sample_stride_steps"));
        }
        if self.burn_in_time < 0.0 {
            return Err(SdeError::NonPositiveConfig("burn_in_time"));
        }
        Ok(())
    }
}

/// Normalised 2D phase-space histogram counts for one site.
#[derive(Debug, Clone)]
pub struct Histogram2d {
    pub bins: usize,
    pub half_range: f64,
    /// Row-major counts, `counts[re_bin * bins + im_bin]`; samples outside
    /// the range are dropped.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram2d {
    fn new(config: &HistogramConfig) -> Self {
        Self {
            bins: config.bins,
            half_range: config.half_range,
            counts: vec![0; config.bins * config.bins],
            total: 0,
        }
    }

    fn record(&mut self, re: f64, im: f64) {
        let width = 2.0 * self.half_range;
        let fx = (re + self.half_range) / width * self.bins as f64;
        let fy = (im + self.half_range) / width * self.bins as f64;
        if fx < 0.0 || fy < 0.0 || fx >= self.bins as f64 || fy >= self.bins as f64 {
            return;
        }
        self.counts[fx as usize * self.bins + fy as usize] += 1;
        self.total += 1;
    }

    fn merge(&mut self, other: &Histogram2d) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += *b;
        }
        self.total += other.total;
    }

    /// Probability mass per bin.
    pub fn normalized(&self) -> Vec<f64> {
        let t = self.total.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }

    /// L1 distance between normalised histograms.
    pub fn l1_distance(&self, other: &Histogram2d) -> f64 {
        self.normalized()
            .iter()
            .zip(other.normalized())
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Sample variance of the given quadrature (0 = Re, 1 = Im) from the
    /// binned data.
    pub fn quadrature_variance(&self, axis: usize) -> f64 {
        let width = 2.0 * self.half_range / self.bins as f64;
        let center = |k: usize| -self.half_range + (k as f64 + 0.5) * width;
        let t = self.total.max(1) as f64;
        let mut mean = 0.0;
        let mut sq = 0.0;
        for rb in 0..self.bins {
            for ib in 0..self.bins {
                let c = self.counts[rb * self.bins + ib] as f64;
                let x = if axis == 0 { center(rb) } else { center(ib) };
                mean += c * x;
                sq += c * x * x;
            }
        }
        mean /= t;
        sq / t - mean * mean
    }
}

/// Ensemble statistics for one parameter point.
#[derive(Debug, Clone)]
pub struct ObservableRecord {
    /// Edge endpoints `(a, b)` in spec order; currents are oriented `a → b`.
    pub edges: Vec<(usize, usize)>,
    /// Mean bond current `⟨J⟩` per edge.
    pub mean_current: Vec<f64>,
    /// Current fluctuation `ΔJ = √(⟨J²⟩ − ⟨J⟩²)` per edge.
    pub current_std: Vec<f64>,
    /// Mean occupation `⟨|α_ℓ|²⟩` per site.
    pub occupations: Vec<f64>,
    /// Mean damping rate `Γ̄ = ⟨Σ_loss Γ_e(α) − Σ_gain Γ_i(α)⟩`.
    pub mean_damping_rate: f64,
    /// Phase-space histogram per site.
    pub histograms: Vec<Histogram2d>,
    /// Samples pooled into the statistics (completed trajectories only).
    pub sample_count: usize,
    /// Quantum-dominance ratio `N_q = Γ_i/γ` (largest gain rate; NaN without
    /// a gain terminal, infinite for γ = 0).
    pub quantum_dominance: f64,
    /// Mean injected power `⟨Σ_gain Γ_i(α)|α|²⟩`.
    pub injected_power: f64,
    /// Mean extracted power `⟨Σ_loss Γ_e(α)|α|²⟩`.
    pub extracted_power: f64,
    /// Mean bath dissipation `γ Σ_ℓ ⟨|α_ℓ|²⟩`.
    pub bath_power: f64,
    pub completed_trajectories: usize,
    /// Indices of trajectories aborted on the divergence guard.
    pub diverged_trajectories: Vec<usize>,
    pub warnings: Vec<String>,
}

impl ObservableRecord {
    /// Chain-middle edge used for headline `⟨J⟩`/`ΔJ` numbers.
    pub fn headline_edge(&self) -> usize {
        self.edges.len() / 2
    }
}

/// Per-site histogram for `(Re α, Im α)/√n_ref`; see spec of the record.
pub fn marginal_histogram(record: &ObservableRecord, site: usize) -> Result<&Histogram2d, SdeError> {
    record.histograms.get(site).ok_or(SdeError::SiteOutOfRange {
        site,
        n_sites: record.histograms.len(),
    })
}

struct TerminalSlot {
    site: usize,
    gain: bool,
    rate: f64,
    law: SaturationLaw,
}

/// Precomputed network data for the inner loop. Both the public single-step
/// entry points and the ensemble driver go through this, so they produce
/// bit-identical floats.
pub(crate) struct Stepper {
    n: usize,
    diag: Vec<Complex64>,
    neigh_ptr: Vec<usize>,
    neigh_idx: Vec<usize>,
    neigh_half_g: Vec<f64>,
    terminals: Vec<TerminalSlot>,
    thermal_diffusion: f64,
}

impl Stepper {
    pub(crate) fn new(spec: &NetworkSpec) -> Self {
        let n = spec.n_sites();
        let gamma = spec.bath().gamma;
        let diag = (0..n)
            .map(|l| Complex64::new(-gamma / 2.0, -spec.detunings()[l]))
            .collect();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for e in spec.edges() {
            adj[e.a].push((e.b, e.coupling / 2.0));
            adj[e.b].push((e.a, e.coupling / 2.0));
        }
        let mut neigh_ptr = Vec::with_capacity(n + 1);
        let mut neigh_idx = Vec::new();
        let mut neigh_half_g = Vec::new();
        neigh_ptr.push(0);
        for l in 0..n {
            for &(m, hg) in &adj[l] {
                neigh_idx.push(m);
                neigh_half_g.push(hg);
            }
            neigh_ptr.push(neigh_idx.len());
        }
        let terminals = spec
            .terminals()
            .iter()
            .map(|t| TerminalSlot {
                site: t.site,
                gain: t.kind == TerminalKind::Gain,
                rate: t.rate,
                law: t.law,
            })
            .collect();
        Self { n, diag, neigh_ptr, neigh_idx, neigh_half_g, terminals, thermal_diffusion: spec.bath().thermal_diffusion() }
    }

    pub(crate) fn drift_into(&self, alphas: &[Complex64], out: &mut [Complex64]) {
        for l in 0..self.n {
            let mut acc = self.diag[l] * alphas[l];
            let mut coupling = Complex64::new(0.0, 0.0);
            for p in self.neigh_ptr[l]..self.neigh_ptr[l + 1] {
                coupling += self.neigh_half_g[p] * alphas[self.neigh_idx[p]];
            }
            acc += Complex64::new(-coupling.im, coupling.re); // i * coupling
            out[l] = acc;
        }
        for t in &self.terminals {
            let rate = t.rate * t.law.rate_factor(alphas[t.site].norm_sqr());
            let half = if t.gain { rate / 2.0 } else { -rate / 2.0 };
            out[t.site] += half * alphas[t.site];
        }
    }

    fn noise_sq_into(&self, alphas: &[Complex64], out: &mut [f64]) {
        out[..self.n].fill(self.thermal_diffusion);
        for t in &self.terminals {
            if t.gain {
                out[t.site] += t.rate * t.law.rate_factor(alphas[t.site].norm_sqr());
            }
        }
    }

    fn em_step<R: Rng + ?Sized>(
        &self,
        alphas: &mut [Complex64],
        dt: f64,
        guard: f64,
        rng: &mut R,
        drift_buf: &mut [Complex64],
        noise_buf: &mut [f64],
    ) -> Result<(), SdeError> {
        self.drift_into(alphas, drift_buf);
        self.noise_sq_into(alphas, noise_buf);
        let half_dt_sqrt = (dt / 2.0).sqrt();
        for l in 0..self.n {
            let n1: f64 = rng.sample(StandardNormal);
            let n2: f64 = rng.sample(StandardNormal);
            let sigma = noise_buf[l].sqrt();
            alphas[l] += drift_buf[l] * dt + Complex64::new(n1, n2) * (sigma * half_dt_sqrt);
            let amp_sq = alphas[l].norm_sqr();
            if !(amp_sq <= guard) {
                return Err(SdeError::Diverged { site: l, amp_sq, guard });
            }
        }
        Ok(())
    }
}

/// Deterministic part of the amplitude equations at the given state.
pub fn drift(state: &AmplitudeState, spec: &NetworkSpec) -> Result<Vec<Complex64>, SdeError> {
    check_state(state, spec)?;
    let stepper = Stepper::new(spec);
    let mut out = vec![Complex64::new(0.0, 0.0); spec.n_sites()];
    stepper.drift_into(&state.alphas, &mut out);
    Ok(out)
}

/// Per-site diffusion strengths `σ_ℓ`: `√(γN_th + Γ_i(α_ℓ))` at gain sites,
/// `√(γN_th)` everywhere else (including loss sites).
pub fn noise_amplitudes(state: &AmplitudeState, spec: &NetworkSpec) -> Result<Vec<f64>, SdeError> {
    check_state(state, spec)?;
    let stepper = Stepper::new(spec);
    let mut out = vec![0.0; spec.n_sites()];
    stepper.noise_sq_into(&state.alphas, &mut out);
    Ok(out.into_iter().map(f64::sqrt).collect())
}

/// One Euler–Maruyama step in place: `α ← α + drift·dt + σ(n₁+in₂)√(dt/2)`
/// with the diffusion evaluated at the step's start (Itô convention).
pub fn em_step<R: Rng + ?Sized>(
    state: &mut AmplitudeState,
    spec: &NetworkSpec,
    config: &IntegratorConfig,
    rng: &mut R,
) -> Result<(), SdeError> {
    if !(config.dt > 0.0) {
        return Err(SdeError::NonPositiveStep(config.dt));
    }
    check_state(state, spec)?;
    let stepper = Stepper::new(spec);
    let mut drift_buf = vec![Complex64::new(0.0, 0.0); spec.n_sites()];
    let mut noise_buf = vec![0.0; spec.n_sites()];
    stepper.em_step(
        &mut state.alphas,
        config.dt,
        config.guard_for(spec),
        rng,
        &mut drift_buf,
        &mut noise_buf,
    )?;
    state.time += config.dt;
    Ok(())
}

/// Instantaneous bond current `J = g_ℓm · Im(α_ℓ* α_m)`, oriented `from → to`.
pub fn bond_current(
    state: &AmplitudeState,
    spec: &NetworkSpec,
    from: usize,
    to: usize,
) -> Result<f64, SdeError> {
    check_state(state, spec)?;
    let g = spec.coupling(from, to)?;
    Ok(g * (state.alphas[from].conj() * state.alphas[to]).im)
}

fn check_state(state: &AmplitudeState, spec: &NetworkSpec) -> Result<(), SdeError> {
    if state.alphas.len() != spec.n_sites() {
        return Err(SdeError::StateMismatch { got: state.alphas.len(), expected: spec.n_sites() });
    }
    Ok(())
}

struct Partial {
    j_sum: Vec<f64>,
    j_sq_sum: Vec<f64>,
    occ_sum: Vec<f64>,
    damping_sum: f64,
    injected_sum: f64,
    extracted_sum: f64,
    histograms: Vec<Histogram2d>,
    samples: usize,
    diverged: bool,
}

/// Runs `n_traj` independent trajectories and pools steady-state statistics.
///
/// Each trajectory owns RNG stream `seed ⊕ index`, discards the burn-in and
/// then records one sample every `sample_stride_steps` steps: instantaneous
/// bond currents, occupations, the saturated rate imbalance and phase-space
/// histogram counts. Identical inputs give bit-identical records.
pub fn run_ensemble(
    spec: &NetworkSpec,
    integ: &IntegratorConfig,
    ens: &EnsembleConfig,
) -> Result<ObservableRecord, SdeError> {
    if !(integ.dt > 0.0) {
        return Err(SdeError::NonPositiveStep(integ.dt));
    }
    ens.validate()?;
    if let InitialCondition::Fixed(alphas) = &ens.initial {
        if alphas.len() != spec.n_sites() {
            return Err(SdeError::StateMismatch { got: alphas.len(), expected: spec.n_sites() });
        }
    }
    let stepper = Stepper::new(spec);
    let guard = integ.guard_for(spec);
    let n = spec.n_sites();
    let n_edges = spec.edges().len();
    let burn_steps = (ens.burn_in_time / integ.dt).round() as u64;
    let scale_sqrt = spec.reference_occupation().sqrt();

    let run_one = |traj: usize| -> Partial {
        let mut rng = ChaCha8Rng::seed_from_u64(integ.seed);
        rng.set_stream(traj as u64 + 1);
        let mut alphas = match &ens.initial {
            InitialCondition::Fixed(a) => a.clone(),
            InitialCondition::SmallRandom { scale } => (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im) * (scale * scale_sqrt / 2f64.sqrt())
                })
                .collect(),
            InitialCondition::Thermal { occupation } => (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im) * (occupation / 2.0).sqrt()
                })
                .collect(),
        };
        let mut partial = Partial {
            j_sum: vec![0.0; n_edges],
            j_sq_sum: vec![0.0; n_edges],
            occ_sum: vec![0.0; n],
            damping_sum: 0.0,
            injected_sum: 0.0,
            extracted_sum: 0.0,
            histograms: (0..n).map(|_| Histogram2d::new(&ens.histogram)).collect(),
            samples: 0,
            diverged: false,
        };
        let mut drift_buf = vec![Complex64::new(0.0, 0.0); n];
        let mut noise_buf = vec![0.0; n];
        let mut step =
            |alphas: &mut Vec<Complex64>, rng: &mut ChaCha8Rng| -> bool {
                stepper
                    .em_step(alphas, integ.dt, guard, rng, &mut drift_buf, &mut noise_buf)
                    .is_ok()
            };
        for _ in 0..burn_steps {
            if !step(&mut alphas, &mut rng) {
                partial.diverged = true;
                return partial;
            }
        }
        'sampling: for _ in 0..ens.n_samples {
            for _ in 0..ens.sample_stride_steps {
                if !step(&mut alphas, &mut rng) {
                    partial.diverged = true;
                    break 'sampling;
                }
            }
            for (e, edge) in spec.edges().iter().enumerate() {
                let j = edge.coupling * (alphas[edge.a].conj() * alphas[edge.b]).im;
                partial.j_sum[e] += j;
                partial.j_sq_sum[e] += j * j;
            }
            let mut damping = 0.0;
            for t in spec.terminals() {
                let rate = t.rate_saturated(alphas[t.site].norm_sqr());
                let power = rate * alphas[t.site].norm_sqr();
                match t.kind {
                    TerminalKind::Gain => {
                        damping -= rate;
                        partial.injected_sum += power;
                    }
                    TerminalKind::Loss => {
                        damping += rate;
                        partial.extracted_sum += power;
                    }
                }
            }
            partial.damping_sum += damping;
            for l in 0..n {
                partial.occ_sum[l] += alphas[l].norm_sqr();
                partial.histograms[l]
                    .record(alphas[l].re / scale_sqrt, alphas[l].im / scale_sqrt);
            }
            partial.samples += 1;
        }
        // a trajectory that tripped the guard is reported without samples
        if partial.diverged {
            partial.samples = 0;
        }
        partial
    };

    let partials = map_indexed(ens.n_traj, ens.exec, run_one);

    let mut j_sum = vec![0.0; n_edges];
    let mut j_sq_sum = vec![0.0; n_edges];
    let mut occ_sum = vec![0.0; n];
    let mut damping_sum = 0.0;
    let mut injected_sum = 0.0;
    let mut extracted_sum = 0.0;
    let mut histograms: Vec<Histogram2d> =
        (0..n).map(|_| Histogram2d::new(&ens.histogram)).collect();
    let mut samples = 0usize;
    let mut diverged = Vec::new();
    for (idx, p) in partials.iter().enumerate() {
        if p.diverged {
            diverged.push(idx);
            continue;
        }
        for e in 0..n_edges {
            j_sum[e] += p.j_sum[e];
            j_sq_sum[e] += p.j_sq_sum[e];
        }
        for l in 0..n {
            occ_sum[l] += p.occ_sum[l];
            histograms[l].merge(&p.histograms[l]);
        }
        damping_sum += p.damping_sum;
        injected_sum += p.injected_sum;
        extracted_sum += p.extracted_sum;
        samples += p.samples;
    }
    if samples == 0 {
        return Err(SdeError::AllTrajectoriesDiverged);
    }
    let s = samples as f64;
    let mean_current: Vec<f64> = j_sum.iter().map(|v| v / s).collect();
    let current_std: Vec<f64> = j_sq_sum
        .iter()
        .zip(&mean_current)
        .map(|(sq, m)| (sq / s - m * m).max(0.0).sqrt())
        .collect();
    let occupations: Vec<f64> = occ_sum.iter().map(|v| v / s).collect();
    let bath_power = spec.bath().gamma * occupations.iter().sum::<f64>();
    let max_gain = spec.gain_terminals().map(|t| t.rate).fold(f64::NAN, f64::max);
    Ok(ObservableRecord {
        edges: spec.edges().iter().map(|e| (e.a, e.b)).collect(),
        mean_current,
        current_std,
        occupations,
        mean_damping_rate: damping_sum / s,
        histograms,
        sample_count: samples,
        quantum_dominance: max_gain / spec.bath().gamma,
        injected_power: injected_sum / s,
        extracted_power: extracted_sum / s,
        bath_power,
        completed_trajectories: ens.n_traj - diverged.len(),
        diverged_trajectories: diverged,
        warnings: integ.warnings(spec),
    })
}
