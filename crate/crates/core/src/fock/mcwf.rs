//! Monte-Carlo wavefunction unravelling of the master equation:
//! non-Hermitian propagation `U = exp(−iH_eff dt)` with
//! `H_eff = H − (i/2)Σ_k c_k†c_k`, per-step norm-decay jump decisions and
//! proportional channel selection.
//!
//! Two structural properties make the trajectories cheap. The propagator is
//! applied each step as a machine-precision Taylor series of the sparse
//! `H_eff` (`‖H_eff·dt‖ ≪ 1` for any sane step). And `H_eff` conserves the
//! total excitation number while every collapse operator shifts it by
//! exactly ±1, so between jumps the wavefunction lives in a single
//! total-occupation sector — the integrator tracks that sector and touches
//! only its few basis states. Both properties are verified at setup; a
//! generator without them falls back to full-space evolution.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::liouvillian::build_liouvillian;
use super::meas::{DensityMatrix, QuantumObservables};
use super::ops::FockOperator;
use super::space::FockSpace;
use super::FockError;
use crate::exec::{map_indexed, ExecMode};
use crate::model::NetworkSpec;

#[derive(Debug, Clone)]
pub enum McwfInitial {
    Vacuum,
    /// Product Fock state with the given per-mode occupations.
    FockState(Vec<usize>),
    Pure(Vec<Complex64>),
}

#[derive(Debug, Clone)]
pub struct McwfConfig {
    /// Propagator step, units of `1/g`.
    pub dt: f64,
    /// Discarded transient per trajectory, units of `1/g`.
    pub burn_in_time: f64,
    /// Samples per trajectory.
    pub n_samples: usize,
    /// Steps between samples.
    pub sample_stride_steps: usize,
    pub n_traj: usize,
    pub seed: u64,
    pub exec: ExecMode,
    pub initial: McwfInitial,
    /// Disables sector tracking (validation knob; the two paths are
    /// bit-identical whenever sector tracking applies).
    #[doc(hidden)]
    pub force_full_space: bool,
}

impl Default for McwfConfig {
    fn default() -> Self {
        Self {
            dt: 2e-3,
            burn_in_time: 1e4,
            n_samples: 4000,
            sample_stride_steps: 800,
            n_traj: 8,
            seed: 0,
            exec: ExecMode::default(),
            initial: McwfInitial::Vacuum,
            force_full_space: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct McwfResult {
    /// Time- and trajectory-averaged density matrix.
    pub rho: DensityMatrix,
    /// Transport observables (two-mode spaces only).
    pub observables: Option<QuantumObservables>,
    pub total_samples: usize,
    /// Jumps per collapse channel, summed over trajectories.
    pub jump_counts: Vec<usize>,
    pub max_jump_probability: f64,
    /// Largest sampled population of the top Fock level of any mode.
    pub max_top_level_population: f64,
    pub warnings: Vec<String>,
}

/// Index lists of the total-occupation sectors, plus per-operator sector
/// shifts when they are well defined.
struct SectorLayout {
    /// Basis indices per total occupation `T`.
    sectors: Vec<Vec<usize>>,
    /// Sector of each basis index.
    total_of: Vec<usize>,
}

impl SectorLayout {
    fn new(space: &FockSpace) -> Self {
        let d = space.dim();
        let t_max = space.n_modes() * (space.n_basis() - 1);
        let total_of: Vec<usize> = (0..d).map(|i| space.total_occupation(i)).collect();
        let mut sectors = vec![Vec::new(); t_max + 1];
        for i in 0..d {
            sectors[total_of[i]].push(i);
        }
        Self { sectors, total_of }
    }

    /// `Some(ΔT)` when every non-zero of `op` maps sector `T` to `T + ΔT`.
    fn uniform_shift(&self, op: &FockOperator) -> Option<isize> {
        let mut shift = None;
        for (r, c, _) in op.iter() {
            let s = self.total_of[r] as isize - self.total_of[c] as isize;
            match shift {
                None => shift = Some(s),
                Some(prev) if prev != s => return None,
                _ => {}
            }
        }
        shift.or(Some(0))
    }
}

/// Applies `exp(scale·H)` to `psi` restricted to the rows in `support`
/// (`H` must map `support` into itself); Taylor summation to machine
/// precision for `‖scale·H‖ ≲ 1`. On return `psi` holds the new state and
/// `out` the previous one.
pub(crate) fn exp_apply_on(
    h: &FockOperator,
    scale: Complex64,
    support: &[usize],
    psi: &mut Vec<Complex64>,
    term: &mut Vec<Complex64>,
    tmp: &mut Vec<Complex64>,
    out: &mut Vec<Complex64>,
) {
    for &i in support {
        out[i] = psi[i];
        term[i] = psi[i];
    }
    for k in 1..=60u32 {
        h.apply_rows(support, term, tmp);
        let c = scale / k as f64;
        let mut term_norm_sq = 0.0;
        for &i in support {
            let v = tmp[i] * c;
            term[i] = v;
            out[i] += v;
            term_norm_sq += v.norm_sqr();
        }
        if term_norm_sq < 1e-32 {
            break;
        }
    }
    std::mem::swap(psi, out);
}

struct Partial {
    rho_sum: Vec<Complex64>,
    samples: usize,
    jumps: Vec<usize>,
    max_jump_p: f64,
    max_top_pop: f64,
}

/// Runs the stochastic wavefunction method for `spec` on `space` and returns
/// the sample-averaged density matrix.
pub fn mcwf_run(
    spec: &NetworkSpec,
    space: &FockSpace,
    config: &McwfConfig,
) -> Result<McwfResult, FockError> {
    if !(config.dt > 0.0) {
        return Err(FockError::NonPositiveConfig("dt"));
    }
    if config.n_traj == 0 {
        return Err(FockError::NonPositiveConfig("n_traj"));
    }
    if config.n_samples == 0 {
        return Err(FockError::NonPositiveConfig("n_samples"));
    }
    if config.sample_stride_steps == 0 {
        return Err(FockError::NonPositiveConfig("sample_stride_steps"));
    }
    let li = build_liouvillian(spec, space)?;
    let d = space.dim();

    // H_eff = H − (i/2) Σ c†c, all diagonals folded together
    let mut gram_total = vec![0.0; d];
    let grams: Vec<Vec<f64>> = li
        .collapse_ops()
        .iter()
        .map(|c| {
            let g = c.gram_diagonal();
            for (acc, v) in gram_total.iter_mut().zip(&g) {
                *acc += v;
            }
            g
        })
        .collect();
    let h_eff = {
        let triplets: Vec<(usize, usize, Complex64)> = li
            .hamiltonian()
            .iter()
            .chain((0..d).map(|i| (i, i, Complex64::new(0.0, -0.5 * gram_total[i]))))
            .collect();
        FockOperator::from_triplets(*space, triplets)
    };
    let minus_i_dt = Complex64::new(0.0, -config.dt);

    // sector tracking: valid when H_eff conserves the total and every
    // channel shifts it uniformly
    let layout = SectorLayout::new(space);
    let h_conserves = layout.uniform_shift(&h_eff) == Some(0);
    let channel_shifts: Option<Vec<isize>> = li
        .collapse_ops()
        .iter()
        .map(|c| layout.uniform_shift(c))
        .collect();
    let sector_mode = h_conserves && channel_shifts.is_some() && !config.force_full_space;
    let channel_shifts = channel_shifts.unwrap_or_default();
    let full_support: Vec<usize> = (0..d).collect();

    let init: Vec<Complex64> = match &config.initial {
        McwfInitial::Vacuum => {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            v[0] = Complex64::new(1.0, 0.0);
            v
        }
        McwfInitial::FockState(occs) => {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            v[space.index_of(occs)] = Complex64::new(1.0, 0.0);
            v
        }
        McwfInitial::Pure(psi) => {
            if psi.len() != d {
                return Err(FockError::DimensionMismatch { got: psi.len(), expected: d });
            }
            psi.clone()
        }
    };
    // a pure initial state spread over several sectors forces full-space mode
    let occupied: Vec<usize> = (0..d).filter(|&i| init[i].norm_sqr() > 0.0).collect();
    if occupied.is_empty() {
        return Err(FockError::NonPositiveConfig("initial state norm"));
    }
    let init_sector = {
        let first = layout.total_of[occupied[0]];
        occupied.iter().all(|&i| layout.total_of[i] == first).then_some(first)
    };
    let sector_mode = sector_mode && init_sector.is_some();

    let top_states: Vec<usize> = (0..d)
        .filter(|&i| {
            (0..space.n_modes()).any(|m| space.occupation(i, m) == space.n_basis() - 1)
        })
        .collect();
    let is_top: Vec<bool> = {
        let mut v = vec![false; d];
        for &i in &top_states {
            v[i] = true;
        }
        v
    };
    let burn_steps = (config.burn_in_time / config.dt).round() as u64;
    let n_channels = li.collapse_ops().len();
    let t_max = layout.sectors.len() - 1;

    let run_one = |traj: usize| -> Result<Partial, FockError> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(traj as u64 + 1);
        let mut psi = init.clone();
        let mut term = vec![Complex64::new(0.0, 0.0); d];
        let mut tmp = vec![Complex64::new(0.0, 0.0); d];
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        let mut sector = init_sector.unwrap_or(0);
        let mut partial = Partial {
            rho_sum: vec![Complex64::new(0.0, 0.0); d * d],
            samples: 0,
            jumps: vec![0; n_channels],
            max_jump_p: 0.0,
            max_top_pop: 0.0,
        };
        let mut step_count = 0u64;
        macro_rules! support {
            () => {
                if sector_mode { &layout.sectors[sector] } else { &full_support }
            };
        }
        let mut step = |psi: &mut Vec<Complex64>,
                        term: &mut Vec<Complex64>,
                        tmp: &mut Vec<Complex64>,
                        out: &mut Vec<Complex64>,
                        sector: &mut usize,
                        rng: &mut ChaCha8Rng,
                        partial: &mut Partial|
         -> Result<(), FockError> {
            step_count += 1;
            let support: &[usize] =
                if sector_mode { &layout.sectors[*sector] } else { &full_support };
            exp_apply_on(&h_eff, minus_i_dt, support, psi, term, tmp, out);
            let norm_sq: f64 = support.iter().map(|&i| psi[i].norm_sqr()).sum();
            if norm_sq < 1e-240 {
                return Err(FockError::NormUnderflow { step: step_count });
            }
            let p_jump = 1.0 - norm_sq;
            partial.max_jump_p = partial.max_jump_p.max(p_jump);
            if rng.gen::<f64>() < p_jump {
                // channel ∝ ⟨ψ_pre| c†c |ψ_pre⟩, with ψ_pre still in `out`
                let weights: Vec<f64> = grams
                    .iter()
                    .map(|g| support.iter().map(|&i| g[i] * out[i].norm_sqr()).sum::<f64>())
                    .collect();
                let total: f64 = weights.iter().sum();
                let mut pick = rng.gen::<f64>() * total;
                let mut channel = n_channels - 1;
                for (k, w) in weights.iter().enumerate() {
                    if pick < *w {
                        channel = k;
                        break;
                    }
                    pick -= w;
                }
                let new_sector = if sector_mode {
                    let s = *sector as isize + channel_shifts[channel];
                    s.clamp(0, t_max as isize) as usize
                } else {
                    0
                };
                let target: &[usize] =
                    if sector_mode { &layout.sectors[new_sector] } else { &full_support };
                li.collapse_ops()[channel].apply_rows(target, out, tmp);
                let jump_norm_sq: f64 = target.iter().map(|&i| tmp[i].norm_sqr()).sum();
                if jump_norm_sq < 1e-240 {
                    return Err(FockError::NormUnderflow { step: step_count });
                }
                let inv = 1.0 / jump_norm_sq.sqrt();
                for &i in support {
                    psi[i] = Complex64::new(0.0, 0.0);
                }
                for &i in target {
                    psi[i] = tmp[i] * inv;
                }
                if sector_mode {
                    *sector = new_sector;
                }
                partial.jumps[channel] += 1;
            } else {
                let inv = 1.0 / norm_sq.sqrt();
                for &i in support {
                    psi[i] *= inv;
                }
            }
            Ok(())
        };
        for _ in 0..burn_steps {
            step(&mut psi, &mut term, &mut tmp, &mut out, &mut sector, &mut rng, &mut partial)?;
        }
        for _ in 0..config.n_samples {
            for _ in 0..config.sample_stride_steps {
                step(
                    &mut psi,
                    &mut term,
                    &mut tmp,
                    &mut out,
                    &mut sector,
                    &mut rng,
                    &mut partial,
                )?;
            }
            let support: &[usize] = support!();
            let top: f64 = support
                .iter()
                .filter(|&&i| is_top[i])
                .map(|&i| psi[i].norm_sqr())
                .sum();
            partial.max_top_pop = partial.max_top_pop.max(top);
            for &i in support {
                let pi = psi[i];
                let row = &mut partial.rho_sum[i * d..(i + 1) * d];
                for &j in support {
                    row[j] += pi * psi[j].conj();
                }
            }
            partial.samples += 1;
        }
        Ok(partial)
    };

    let partials: Vec<Result<Partial, FockError>> =
        map_indexed(config.n_traj, config.exec, run_one);
    let mut rho_sum = vec![Complex64::new(0.0, 0.0); d * d];
    let mut samples = 0usize;
    let mut jumps = vec![0usize; n_channels];
    let mut max_jump_p: f64 = 0.0;
    let mut max_top_pop: f64 = 0.0;
    for partial in partials {
        let partial = partial?;
        for (acc, v) in rho_sum.iter_mut().zip(&partial.rho_sum) {
            *acc += v;
        }
        samples += partial.samples;
        for (acc, v) in jumps.iter_mut().zip(&partial.jumps) {
            *acc += v;
        }
        max_jump_p = max_jump_p.max(partial.max_jump_p);
        max_top_pop = max_top_pop.max(partial.max_top_pop);
    }
    let mut rho = ndarray::Array2::<Complex64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            rho[(i, j)] = rho_sum[i * d + j] / samples as f64;
        }
    }
    let rho = DensityMatrix::from_raw(rho, *space)?;
    let mut warnings = Vec::new();
    if max_jump_p > 0.1 {
        warnings.push(format!(
            "jump probability per step reached {max_jump_p:.3} (> 0.1); reduce dt"
        ));
    }
    if max_top_pop > 1e-3 {
        warnings.push(format!(
            "truncation leakage: top Fock level carried {max_top_pop:.3e} population"
        ));
    }
    let observables = if space.n_modes() == 2 {
        match spec.coupling(0, 1) {
            Ok(g) => Some(rho.observables(g)?),
            Err(_) => None,
        }
    } else {
        None
    };
    Ok(McwfResult {
        rho,
        observables,
        total_samples: samples,
        jump_counts: jumps,
        max_jump_probability: max_jump_p,
        max_top_level_population: max_top_pop,
        warnings,
    })
}
