//! Direct steady state of the Liouvillian via its excitation-difference
//! sector structure.
//!
//! Every Lindblad term of this model conserves `k = N(ket) − N(bra)`, the
//! difference of total excitation numbers between the two sides of the
//! density matrix, so the vectorised generator is block-diagonal over `k`
//! and the unique steady state lives in `k = 0`. Within that sector the
//! Hamiltonian conserves the common total `T` while every jump sandwich
//! moves `T` by ±1, giving a block-tridiagonal system solved by block
//! Gaussian elimination with the vacuum amplitude pinned, followed by trace
//! normalisation. The sector structure is verified entry by entry before
//! solving; a generator that violates it is rejected rather than solved
//! incorrectly.

use faer::prelude::*;
use faer::Mat;
use ndarray::Array2;
use num_complex::Complex64;

use super::liouvillian::{build_liouvillian, Liouvillian};
use super::meas::DensityMatrix;
use super::space::FockSpace;
use super::FockError;
use crate::model::NetworkSpec;

/// Largest Hilbert dimension the direct solver accepts by default
/// (`n_basis = 40` for two modes).
pub const DEFAULT_DIMENSION_CAP: usize = 1600;

struct SectorMap {
    /// `membership[i·d + j] = Some((T, local))` for `N(i) = N(j) = T`.
    membership: Vec<Option<(u32, u32)>>,
    /// Vectorised index of each block entry, per `T`.
    blocks: Vec<Vec<usize>>,
    totals: Vec<usize>,
}

fn build_sector_map(space: &FockSpace) -> SectorMap {
    let d = space.dim();
    let totals: Vec<usize> = (0..d).map(|i| space.total_occupation(i)).collect();
    let t_max = space.n_modes() * (space.n_basis() - 1);
    let mut membership = vec![None; d * d];
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); t_max + 1];
    for i in 0..d {
        for j in 0..d {
            if totals[i] == totals[j] {
                let t = totals[i];
                membership[i * d + j] = Some((t as u32, blocks[t].len() as u32));
                blocks[t].push(i * d + j);
            }
        }
    }
    SectorMap { membership, blocks, totals }
}

/// Steady state with the default dimension cap.
pub fn steady_state_direct(li: &Liouvillian) -> Result<DensityMatrix, FockError> {
    steady_state_direct_with_cap(li, DEFAULT_DIMENSION_CAP)
}

/// Steady state of `L`: null vector in the zero-difference sector, reshaped,
/// Hermitized and trace-normalised.
pub fn steady_state_direct_with_cap(
    li: &Liouvillian,
    cap: usize,
) -> Result<DensityMatrix, FockError> {
    let d = li.dim();
    if d > cap {
        return Err(FockError::DimensionCap { dim: d, cap });
    }
    let space = *li.space();
    let map = build_sector_map(&space);
    let n_blocks = map.blocks.len();
    let sizes: Vec<usize> = map.blocks.iter().map(Vec::len).collect();

    let zero = Complex64::new(0.0, 0.0);
    let mut diag: Vec<Mat<Complex64>> =
        sizes.iter().map(|&b| Mat::zeros(b, b)).collect();
    let mut upper: Vec<Mat<Complex64>> = (0..n_blocks)
        .map(|t| Mat::zeros(sizes[t], sizes.get(t + 1).copied().unwrap_or(0)))
        .collect();
    let mut lower: Vec<Mat<Complex64>> = (0..n_blocks)
        .map(|t| Mat::zeros(sizes[t], if t > 0 { sizes[t - 1] } else { 0 }))
        .collect();

    let mut violation = false;
    li.for_each_triplet(|r, c, v| {
        if violation {
            return;
        }
        match (map.membership[r], map.membership[c]) {
            (Some((tr, lr)), Some((tc, lc))) => {
                let (tr, lr, tc, lc) = (tr as usize, lr as usize, tc as usize, lc as usize);
                if tc == tr {
                    diag[tr][(lr, lc)] += v;
                } else if tc == tr + 1 {
                    upper[tr][(lr, lc)] += v;
                } else if tc + 1 == tr {
                    lower[tr][(lr, lc)] += v;
                } else {
                    violation = true;
                }
            }
            (None, None) => {
                // outside the zero sector: only the sector label must match
                let k_row = map.totals[r / d] as isize - map.totals[r % d] as isize;
                let k_col = map.totals[c / d] as isize - map.totals[c % d] as isize;
                if k_row != k_col {
                    violation = true;
                }
            }
            _ => violation = true,
        }
    });
    if violation {
        return Err(FockError::SectorStructureViolated);
    }

    // pin the vacuum element ρ_00 = 1 (block 0 is the single pair (0,0))
    diag[0][(0, 0)] = Complex64::new(1.0, 0.0);
    for c in 0..upper[0].ncols() {
        upper[0][(0, c)] = zero;
    }

    // forward block elimination
    let mut factors: Vec<faer::linalg::solvers::PartialPivLu<Complex64>> =
        Vec::with_capacity(n_blocks);
    let mut y: Vec<Mat<Complex64>> = Vec::with_capacity(n_blocks);
    factors.push(diag[0].partial_piv_lu());
    let mut y0 = Mat::zeros(sizes[0], 1);
    y0[(0, 0)] = Complex64::new(1.0, 0.0);
    y.push(y0);
    for t in 1..n_blocks {
        let w = factors[t - 1].solve(&upper[t - 1]);
        let corr = &lower[t] * &w;
        let dt = &diag[t] - &corr;
        let z = factors[t - 1].solve(&y[t - 1]);
        let yt = -(&lower[t] * &z);
        factors.push(dt.partial_piv_lu());
        y.push(yt);
    }

    // back substitution
    let mut x: Vec<Option<Mat<Complex64>>> = vec![None; n_blocks];
    let last = n_blocks - 1;
    x[last] = Some(factors[last].solve(&y[last]));
    for t in (0..last).rev() {
        let rhs = &y[t] - &upper[t] * x[t + 1].as_ref().unwrap();
        x[t] = Some(factors[t].solve(&rhs));
    }

    let mut rho = Array2::<Complex64>::zeros((d, d));
    for (t, block) in map.blocks.iter().enumerate() {
        let xt = x[t].as_ref().unwrap();
        for (local, &p) in block.iter().enumerate() {
            let v = xt[(local, 0)];
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(FockError::SingularSolve);
            }
            rho[(p / d, p % d)] = v;
        }
    }
    let trace: Complex64 = (0..d).map(|i| rho[(i, i)]).sum();
    if !(trace.norm() > 0.0) || !trace.norm().is_finite() {
        return Err(FockError::SingularSolve);
    }
    DensityMatrix::from_raw(rho, space)
}

/// Relative residual `‖L(ρ)‖_F / ‖ρ‖_F` of a candidate steady state.
pub fn steady_state_residual(li: &Liouvillian, rho: &DensityMatrix) -> f64 {
    let lrho = li.apply(rho.matrix());
    let num: f64 = lrho.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = rho.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    num / den
}

/// Truncation-convergence report: observables at `n_basis` against a basis
/// enlarged by `factor` (default interest: 1.5).
#[derive(Debug, Clone)]
pub struct TruncationReport {
    pub n_basis: usize,
    pub n_basis_refined: usize,
    pub base: super::meas::QuantumObservables,
    pub refined: super::meas::QuantumObservables,
    pub base_negativity: f64,
    pub refined_negativity: f64,
    /// Largest relative change over occupations, current and ΔJ.
    pub max_relative_change: f64,
}

/// Solves the steady state at `n_basis` and at `⌈factor·n_basis⌉` and
/// reports how much the observables move.
pub fn truncation_check(
    spec: &NetworkSpec,
    n_basis: usize,
    factor: f64,
    g: f64,
) -> Result<TruncationReport, FockError> {
    let refined_nb = ((n_basis as f64 * factor).ceil() as usize).max(n_basis + 1);
    let solve = |nb: usize| -> Result<(super::meas::QuantumObservables, f64), FockError> {
        let space = FockSpace::new(spec.n_sites(), nb)?;
        let li = build_liouvillian(spec, &space)?;
        let rho = steady_state_direct(&li)?;
        let obs = rho.observables(g)?;
        let neg = super::meas::negativity(&rho)?;
        Ok((obs, neg))
    };
    let (base, base_negativity) = solve(n_basis)?;
    let (refined, refined_negativity) = solve(refined_nb)?;
    let rel = |a: f64, b: f64| {
        let scale = a.abs().max(b.abs());
        if scale > 1e-12 {
            (a - b).abs() / scale
        } else {
            0.0
        }
    };
    let mut max_change: f64 = rel(base.current, refined.current).max(rel(
        base.current_std,
        refined.current_std,
    ));
    for (a, b) in base.occupations.iter().zip(&refined.occupations) {
        max_change = max_change.max(rel(*a, *b));
    }
    Ok(TruncationReport {
        n_basis,
        n_basis_refined: refined_nb,
        base,
        refined,
        base_negativity,
        refined_negativity,
        max_relative_change: max_change,
    })
}
