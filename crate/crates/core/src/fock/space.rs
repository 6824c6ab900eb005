//! Truncated product Fock space with mode-major basis ordering.

use super::FockError;

/// `n_modes` oscillators with `n_basis` levels each; basis index
/// `i = n_0·n_basis^{M-1} + … + n_{M-1}` (first mode most significant).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    n_modes: usize,
    n_basis: usize,
}

impl FockSpace {
    pub fn new(n_modes: usize, n_basis: usize) -> Result<Self, FockError> {
        if n_modes == 0 {
            return Err(FockError::NoModes(n_modes));
        }
        if n_basis < 2 {
            return Err(FockError::BasisTooSmall(n_basis));
        }
        Ok(Self { n_modes, n_basis })
    }

    /// Two coupled oscillators, the configuration of every reference
    /// experiment.
    pub fn two_mode(n_basis: usize) -> Result<Self, FockError> {
        Self::new(2, n_basis)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    /// Total Hilbert-space dimension `n_basis^n_modes`.
    pub fn dim(&self) -> usize {
        self.n_basis.pow(self.n_modes as u32)
    }

    /// Occupation of `mode` in basis state `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        let shift = self.n_modes - 1 - mode;
        (index / self.n_basis.pow(shift as u32)) % self.n_basis
    }

    /// Total excitation number of basis state `index`.
    pub fn total_occupation(&self, index: usize) -> usize {
        let mut total = 0;
        let mut rest = index;
        for _ in 0..self.n_modes {
            total += rest % self.n_basis;
            rest /= self.n_basis;
        }
        total
    }

    /// Basis index for the given per-mode occupations.
    pub fn index_of(&self, occs: &[usize]) -> usize {
        occs.iter().fold(0, |acc, &n| acc * self.n_basis + n)
    }

    /// Stride of `mode` in the basis index.
    pub(crate) fn stride(&self, mode: usize) -> usize {
        self.n_basis.pow((self.n_modes - 1 - mode) as u32)
    }

    pub fn check_mode(&self, mode: usize) -> Result<(), FockError> {
        if mode >= self.n_modes {
            return Err(FockError::ModeOutOfRange { mode, n_modes: self.n_modes });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trip() {
        let space = FockSpace::new(2, 5).unwrap();
        assert_eq!(space.dim(), 25);
        for n0 in 0..5 {
            for n1 in 0..5 {
                let i = space.index_of(&[n0, n1]);
                assert_eq!(space.occupation(i, 0), n0);
                assert_eq!(space.occupation(i, 1), n1);
                assert_eq!(space.total_occupation(i), n0 + n1);
            }
        }
        assert!(FockSpace::new(2, 1).is_err());
        assert!(FockSpace::new(0, 4).is_err());
    }
}
