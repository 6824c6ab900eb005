//! Lindblad generator for the network master equation on a truncated Fock
//! space.
//!
//! `L(ρ) = −i[H, ρ] + Σ_k (c_k ρ c_k† − ½{c_k†c_k, ρ})` with
//! `H = Σ_ℓ Δ_ℓ a_ℓ†a_ℓ − Σ_edges (g/2)(a_i†a_j + h.c.)` and collapse
//! operators `√Γ_i A†` (gain), `√Γ_e A` (loss), `√(γ(N_th+1)) a_ℓ` and
//! `√(γN_th) a_ℓ†` (baths), where `A = f(a†a)a`.
//!
//! Every term conserves the excitation-number difference between ket and bra
//! indices, so the vectorised generator is block-diagonal over these sectors;
//! the steady-state solver exploits that instead of materialising the full
//! `d² × d²` matrix. [`Liouvillian::to_super_csr`] still produces the
//! explicit superoperator for small spaces.

use ndarray::Array2;
use num_complex::Complex64;

use super::ops::FockOperator;
use super::space::FockSpace;
use super::FockError;
use crate::model::{NetworkSpec, TerminalKind};

/// Vectorisation is row-major: `vec(ρ)[i·d + j] = ρ_ij`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    space: FockSpace,
    hamiltonian: FockOperator,
    collapse_ops: Vec<FockOperator>,
}

/// Explicit sparse superoperator (CSR on dimension `d²`).
#[derive(Debug, Clone)]
pub struct SuperCsr {
    pub dim: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl SuperCsr {
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[p] * x[self.indices[p]];
            }
            out[r] = acc;
        }
    }
}

/// Assembles the Liouvillian for `spec` on `space` (one mode per site).
pub fn build_liouvillian(spec: &NetworkSpec, space: &FockSpace) -> Result<Liouvillian, FockError> {
    if spec.n_sites() != space.n_modes() {
        return Err(FockError::SpecSpaceMismatch {
            sites: spec.n_sites(),
            modes: space.n_modes(),
        });
    }
    let space = *space;
    let d = space.dim();

    // H = Σ Δ_ℓ n̂_ℓ − Σ (g/2)(a_i† a_j + a_j† a_i)
    let mut h_triplets: Vec<(usize, usize, Complex64)> = Vec::new();
    for (mode, &delta) in spec.detunings().iter().enumerate() {
        if delta != 0.0 {
            for i in 0..d {
                let n = space.occupation(i, mode) as f64;
                h_triplets.push((i, i, Complex64::new(delta * n, 0.0)));
            }
        }
    }
    for edge in spec.edges() {
        // hop a_i† a_j + a_j† a_i assembled directly from occupations
        let half_g = edge.coupling / 2.0;
        for col in 0..d {
            let n_j = space.occupation(col, edge.b);
            let n_i = space.occupation(col, edge.a);
            if n_j > 0 && n_i + 1 < space.n_basis() {
                let row = col - space.stride(edge.b) + space.stride(edge.a);
                let amp = ((n_j as f64) * (n_i as f64 + 1.0)).sqrt();
                h_triplets.push((row, col, Complex64::new(-half_g * amp, 0.0)));
            }
            if n_i > 0 && n_j + 1 < space.n_basis() {
                let row = col - space.stride(edge.a) + space.stride(edge.b);
                let amp = ((n_i as f64) * (n_j as f64 + 1.0)).sqrt();
                h_triplets.push((row, col, Complex64::new(-half_g * amp, 0.0)));
            }
        }
    }
    let hamiltonian = FockOperator::from_triplets(space, h_triplets);

    let mut collapse_ops = Vec::new();
    for t in spec.terminals() {
        if t.rate == 0.0 {
            continue;
        }
        let a_sat = FockOperator::saturated_lowering(space, t.site, &t.law)?;
        let op = match t.kind {
            TerminalKind::Gain => a_sat.adjoint(),
            TerminalKind::Loss => a_sat,
        };
        collapse_ops.push(op.scaled(Complex64::new(t.rate.sqrt(), 0.0)));
    }
    let bath = spec.bath();
    for mode in 0..space.n_modes() {
        let down_rate = bath.gamma * (bath.n_th + 1.0);
        if down_rate > 0.0 {
            collapse_ops.push(
                FockOperator::annihilation(space, mode)?
                    .scaled(Complex64::new(down_rate.sqrt(), 0.0)),
            );
        }
        let up_rate = bath.gamma * bath.n_th;
        if up_rate > 0.0 {
            collapse_ops.push(
                FockOperator::annihilation(space, mode)?
                    .adjoint()
                    .scaled(Complex64::new(up_rate.sqrt(), 0.0)),
            );
        }
    }
    Ok(Liouvillian { space, hamiltonian, collapse_ops })
}

impl Liouvillian {
    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Superoperator dimension `d²`.
    pub fn super_dim(&self) -> usize {
        self.dim() * self.dim()
    }

    pub fn hamiltonian(&self) -> &FockOperator {
        &self.hamiltonian
    }

    /// Collapse operators with their rates folded in (`c = √Γ · op`).
    pub fn collapse_ops(&self) -> &[FockOperator] {
        &self.collapse_ops
    }

    /// `L(ρ)` without materialising the superoperator.
    pub fn apply(&self, rho: &Array2<Complex64>) -> Array2<Complex64> {
        let d = self.dim();
        let mut out = Array2::<Complex64>::zeros((d, d));
        let i_unit = Complex64::new(0.0, 1.0);
        // −i(Hρ − ρH)
        for (r, c, v) in self.hamiltonian.iter() {
            for j in 0..d {
                out[(r, j)] -= i_unit * v * rho[(c, j)];
            }
            // ρH† term with H Hermitian: (ρH)_{i,r} over column r uses H_{c,r}…
            // use H_{cr} = conj(H_{rc}) = conj(v) at (c, r)
            for i in 0..d {
                out[(i, r)] += i_unit * v.conj() * rho[(i, c)];
            }
        }
        for c_op in &self.collapse_ops {
            // c ρ c†
            for (r1, c1, v1) in c_op.iter() {
                for (r2, c2, v2) in c_op.iter() {
                    out[(r1, r2)] += v1 * v2.conj() * rho[(c1, c2)];
                }
            }
            // −½ {c†c, ρ} with c†c diagonal for every channel here
            let gram = c_op.gram_diagonal();
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] -= 0.5 * (gram[i] + gram[j]) * rho[(i, j)];
                }
            }
        }
        out
    }

    /// Visits every non-zero of the vectorised generator as
    /// `(row, col, value)` with `row = i·d + j`.
    pub fn for_each_triplet(&self, mut f: impl FnMut(usize, usize, Complex64)) {
        let d = self.dim();
        let i_unit = Complex64::new(0.0, 1.0);
        for (r, c, v) in self.hamiltonian.iter() {
            for j in 0..d {
                // (Hρ): ρ_cj feeds ρ̇_rj
                f(r * d + j, c * d + j, -i_unit * v);
            }
            for i in 0..d {
                // (ρH): ρ_ic feeds ρ̇_ir via H_cr = conj(v)
                f(i * d + r, i * d + c, i_unit * v.conj());
            }
        }
        for c_op in &self.collapse_ops {
            let nnz: Vec<(usize, usize, Complex64)> = c_op.iter().collect();
            for &(r1, c1, v1) in &nnz {
                for &(r2, c2, v2) in &nnz {
                    f(r1 * d + r2, c1 * d + c2, v1 * v2.conj());
                }
            }
            let gram = c_op.gram_diagonal();
            for i in 0..d {
                for j in 0..d {
                    let p = i * d + j;
                    f(p, p, Complex64::new(-0.5 * (gram[i] + gram[j]), 0.0));
                }
            }
        }
    }

    /// Materialises the sparse superoperator. Intended for small spaces;
    /// memory grows as `d² ×` (bands per row).
    pub fn to_super_csr(&self) -> SuperCsr {
        let dim = self.super_dim();
        let mut triplets: Vec<(usize, usize, Complex64)> = Vec::new();
        self.for_each_triplet(|r, c, v| triplets.push((r, c, v)));
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut row = 0usize;
        for (r, c, v) in triplets {
            if indices.len() > indptr[row] && r == row && *indices.last().unwrap() == c {
                *values.last_mut().unwrap() += v;
                continue;
            }
            while row < r {
                row += 1;
                indptr[row] = indices.len();
            }
            indices.push(c);
            values.push(v);
        }
        while row < dim {
            row += 1;
            indptr[row] = indices.len();
        }
        SuperCsr { dim, indptr, indices, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BathSpec, NetworkSpec, SaturationLaw};
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(d: usize, seed: u64) -> Array2<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Array2::<Complex64>::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            }
        }
        let mt = m.t().mapv(|z| z.conj());
        (&m + &mt) / Complex64::new(2.0, 0.0)
    }

    fn test_liouvillian(n_basis: usize) -> Liouvillian {
        let spec = NetworkSpec::chain(
            2,
            1.0,
            BathSpec::new(1e-2, 0.3).unwrap(),
            4.0,
            6.0,
            SaturationLaw::standard(1.0).unwrap(),
        )
        .unwrap();
        let space = FockSpace::two_mode(n_basis).unwrap();
        build_liouvillian(&spec, &space).unwrap()
    }

    #[test]
    fn preserves_trace() {
        let li = test_liouvillian(4);
        let rho = random_hermitian(li.dim(), 5);
        let lrho = li.apply(&rho);
        let trace: Complex64 = (0..li.dim()).map(|i| lrho[(i, i)]).sum();
        assert!(trace.norm() < 1e-10, "trace of L(ρ) = {trace}");
    }

    #[test]
    fn csr_matches_matrix_free_apply() {
        let li = test_liouvillian(3);
        let d = li.dim();
        let rho = random_hermitian(d, 9);
        let direct = li.apply(&rho);
        let csr = li.to_super_csr();
        let vec_rho: Vec<Complex64> = (0..d * d).map(|p| rho[(p / d, p % d)]).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        csr.apply(&vec_rho, &mut out);
        for i in 0..d {
            for j in 0..d {
                assert!(
                    (out[i * d + j] - direct[(i, j)]).norm() < 1e-12,
                    "CSR/apply mismatch at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn passive_decay_of_excited_population() {
        // single passive mode at N_th = 0: d⟨1|ρ|1⟩/dt = −γ⟨1|ρ|1⟩
        let gamma = 0.37;
        let spec = NetworkSpec::passive_chain(2, 1e-12, BathSpec::cold(gamma).unwrap()).unwrap();
        let space = FockSpace::two_mode(3).unwrap();
        let li = build_liouvillian(&spec, &space).unwrap();
        let d = li.dim();
        let mut rho = Array2::<Complex64>::zeros((d, d));
        let idx = space.index_of(&[1, 0]);
        rho[(idx, idx)] = Complex64::new(1.0, 0.0);
        let lrho = li.apply(&rho);
        assert!((lrho[(idx, idx)].re + gamma).abs() < 1e-9);
        // the population flows into the vacuum
        let vac = space.index_of(&[0, 0]);
        assert!((lrho[(vac, vac)].re - gamma).abs() < 1e-9);
    }

    #[test]
    fn hamiltonian_is_hermitian_and_hops_conserve_total() {
        let li = test_liouvillian(4);
        let h = li.hamiltonian().to_dense();
        let d = li.dim();
        for i in 0..d {
            for j in 0..d {
                assert!((h[(i, j)] - h[(j, i)].conj()).norm() < 1e-14);
            }
        }
        let space = *li.space();
        for (r, c, v) in li.hamiltonian().iter() {
            assert_eq!(
                space.total_occupation(r),
                space.total_occupation(c),
                "hop {r}←{c} ({v}) changes the total"
            );
        }
    }
}
