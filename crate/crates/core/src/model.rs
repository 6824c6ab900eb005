//! Network description: oscillator graph, couplings, thermal baths and
//! saturable gain/loss terminals, plus the linearised drift matrix.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("occupation argument must be non-negative, got {0}")]
    NegativeOccupation(f64),
    #[error("saturation occupation must be positive, got {0}")]
    NonPositiveSaturation(f64),
    #[error("saturation exponent must be positive, got {0}")]
    NonPositiveExponent(f64),
    #[error("terminal rate must be non-negative, got {0}")]
    NegativeRate(f64),
    #[error("bath damping rate must be non-negative, got {0}")]
    NegativeDamping(f64),
    #[error("bath occupation must be non-negative, got {0}")]
    NegativeBathOccupation(f64),
    #[error("network needs at least two sites, got {0}")]
    TooFewSites(usize),
    #[error("site index {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("self-edge at site {0}")]
    SelfEdge(usize),
    #[error("duplicate edge between sites {0} and {1}")]
    DuplicateEdge(usize, usize),
    #[error("coupling on edge ({0}, {1}) must be positive")]
    NonPositiveCoupling(usize, usize),
    #[error("network graph is not connected")]
    Disconnected,
    #[error("site {0} hosts more than one {1:?} terminal")]
    DuplicateTerminal(usize, TerminalKind),
    #[error("detuning list has length {got}, expected {expected}")]
    DetuningLength { got: usize, expected: usize },
    #[error("no edge between sites {0} and {1}")]
    NoSuchEdge(usize, usize),
}

/// Amplitude-dependent throttle of a microscopic generator or engine.
///
/// `f(x) = 1 / (1 + x/n0)^(nu/2)` with `f(0) = 1`, strictly decreasing and
/// vanishing for `x >> n0`. The exponent `nu = 2` reproduces the saturation
/// of driven three-level machines; `nu = 1` models weaker saturation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationLaw {
    n0: f64,
    nu: f64,
}

impl SaturationLaw {
    pub fn new(n0: f64, nu: f64) -> Result<Self, ModelError> {
        if !(n0 > 0.0) {
            return Err(ModelError::NonPositiveSaturation(n0));
        }
        if !(nu > 0.0) {
            return Err(ModelError::NonPositiveExponent(nu));
        }
        Ok(Self { n0, nu })
    }

    /// Standard law with exponent `nu = 2`.
    pub fn standard(n0: f64) -> Result<Self, ModelError> {
        Self::new(n0, 2.0)
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Saturation function `f(x) = 1/(1 + x/n0)^(nu/2)` for occupation `x >= 0`.
    pub fn f(&self, x: f64) -> Result<f64, ModelError> {
        if x < 0.0 {
            return Err(ModelError::NegativeOccupation(x));
        }
        Ok(self.f_unchecked(x))
    }

    /// Effective rate `Γ f²(|α|²) = Γ/(1 + |α|²/n0)^nu`.
    pub fn rate_at(&self, bare_rate: f64, amp_sq: f64) -> Result<f64, ModelError> {
        if amp_sq < 0.0 {
            return Err(ModelError::NegativeOccupation(amp_sq));
        }
        Ok(bare_rate * self.rate_factor(amp_sq))
    }

    #[inline]
    pub(crate) fn f_unchecked(&self, x: f64) -> f64 {
        (1.0 + x / self.n0).powf(-self.nu / 2.0)
    }

    /// `f²(x)`, the factor multiplying the bare rate.
    #[inline]
    pub(crate) fn rate_factor(&self, amp_sq: f64) -> f64 {
        (1.0 + amp_sq / self.n0).powf(-self.nu)
    }
}

/// Saturation function as a free operation; see [`SaturationLaw::f`].
pub fn saturation_f(x: f64, law: &SaturationLaw) -> Result<f64, ModelError> {
    law.f(x)
}

/// Saturated rate as a free operation; see [`SaturationLaw::rate_at`].
pub fn rate_at(bare_rate: f64, amp_sq: f64, law: &SaturationLaw) -> Result<f64, ModelError> {
    law.rate_at(bare_rate, amp_sq)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminalKind {
    Gain,
    Loss,
}

/// A saturable generator (gain) or engine (loss) attached to one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveTerminal {
    pub site: usize,
    pub kind: TerminalKind,
    /// Bare rate Γ in units of g.
    pub rate: f64,
    pub law: SaturationLaw,
}

impl ActiveTerminal {
    pub fn gain(site: usize, rate: f64, law: SaturationLaw) -> Self {
        Self { site, kind: TerminalKind::Gain, rate, law }
    }

    pub fn loss(site: usize, rate: f64, law: SaturationLaw) -> Self {
        Self { site, kind: TerminalKind::Loss, rate, law }
    }

    /// Effective rate at the given site occupation.
    pub fn rate_saturated(&self, amp_sq: f64) -> f64 {
        self.rate * self.law.rate_factor(amp_sq)
    }
}

/// Local thermal bath shared by all oscillators.
///
/// Only `γ` and `N_th` are stored; the thermal diffusion rate `D_th = γ N_th`
/// is always derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub gamma: f64,
    pub n_th: f64,
}

impl BathSpec {
    pub fn new(gamma: f64, n_th: f64) -> Result<Self, ModelError> {
        if gamma < 0.0 {
            return Err(ModelError::NegativeDamping(gamma));
        }
        if n_th < 0.0 {
            return Err(ModelError::NegativeBathOccupation(n_th));
        }
        Ok(Self { gamma, n_th })
    }

    /// Zero-temperature bath with damping rate `γ`.
    pub fn cold(gamma: f64) -> Result<Self, ModelError> {
        Self::new(gamma, 0.0)
    }

    /// Thermal diffusion rate `D_th = γ N_th`.
    pub fn thermal_diffusion(&self) -> f64 {
        self.gamma * self.n_th
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    /// Coupling g_ab > 0.
    pub coupling: f64,
}

/// Immutable description of the oscillator network.
///
/// The graph is undirected and connected, with no self-edges; a site hosts at
/// most one terminal of each kind. Instances are safe to share across
/// parallel workers.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    n_sites: usize,
    edges: Vec<Edge>,
    detunings: Vec<f64>,
    bath: BathSpec,
    terminals: Vec<ActiveTerminal>,
}

impl NetworkSpec {
    pub fn new(
        n_sites: usize,
        edges: Vec<(usize, usize, f64)>,
        detunings: Vec<f64>,
        bath: BathSpec,
        terminals: Vec<ActiveTerminal>,
    ) -> Result<Self, ModelError> {
        if n_sites < 2 {
            return Err(ModelError::TooFewSites(n_sites));
        }
        if detunings.len() != n_sites {
            return Err(ModelError::DetuningLength { got: detunings.len(), expected: n_sites });
        }
        let mut canon = Vec::with_capacity(edges.len());
        for &(a, b, g) in &edges {
            for site in [a, b] {
                if site >= n_sites {
                    return Err(ModelError::SiteOutOfRange { site, n_sites });
                }
            }
            if a == b {
                return Err(ModelError::SelfEdge(a));
            }
            if !(g > 0.0) {
                return Err(ModelError::NonPositiveCoupling(a, b));
            }
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if canon.iter().any(|e: &Edge| e.a == lo && e.b == hi) {
                return Err(ModelError::DuplicateEdge(lo, hi));
            }
            canon.push(Edge { a: lo, b: hi, coupling: g });
        }
        // connectivity via union-find
        let mut parent: Vec<usize> = (0..n_sites).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for e in &canon {
            let (ra, rb) = (root(&mut parent, e.a), root(&mut parent, e.b));
            parent[ra] = rb;
        }
        let r0 = root(&mut parent, 0);
        if (1..n_sites).any(|i| root(&mut parent, i) != r0) {
            return Err(ModelError::Disconnected);
        }
        for t in &terminals {
            if t.site >= n_sites {
                return Err(ModelError::SiteOutOfRange { site: t.site, n_sites });
            }
            if t.rate < 0.0 {
                return Err(ModelError::NegativeRate(t.rate));
            }
            if terminals
                .iter()
                .filter(|u| u.site == t.site && u.kind == t.kind)
                .count()
                > 1
            {
                return Err(ModelError::DuplicateTerminal(t.site, t.kind));
            }
        }
        Ok(Self { n_sites, edges: canon, detunings, bath, terminals })
    }

    /// Linear chain of `n` sites with uniform coupling `g`, a gain terminal at
    /// site 0 and a loss terminal at site `n-1`, zero detunings.
    pub fn chain(
        n: usize,
        g: f64,
        bath: BathSpec,
        gain_rate: f64,
        loss_rate: f64,
        law: SaturationLaw,
    ) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::TooFewSites(n));
        }
        let edges = (0..n - 1).map(|i| (i, i + 1, g)).collect();
        let terminals = vec![
            ActiveTerminal::gain(0, gain_rate, law),
            ActiveTerminal::loss(n - 1, loss_rate, law),
        ];
        Self::new(n, edges, vec![0.0; n], bath, terminals)
    }

    /// Passive linear chain (no terminals) with uniform coupling `g`.
    pub fn passive_chain(n: usize, g: f64, bath: BathSpec) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::TooFewSites(n));
        }
        let edges = (0..n - 1).map(|i| (i, i + 1, g)).collect();
        Self::new(n, edges, vec![0.0; n], bath, Vec::new())
    }

    /// Nine-site branched grid: path 0–1–2–3–4–5–6 with branch 3–7–8, a gain
    /// terminal at site 0 and loss terminals at sites 6 and 8.
    ///
    /// A standing wave pinned between sites 0 and 6 has a node at the crossing
    /// site 3, which starves the branch until the 0–6 symmetry breaks.
    pub fn branched_grid(
        g: f64,
        bath: BathSpec,
        gain_rate: f64,
        loss_rate_main: f64,
        loss_rate_branch: f64,
        law: SaturationLaw,
    ) -> Result<Self, ModelError> {
        let mut edges: Vec<(usize, usize, f64)> = (0..6).map(|i| (i, i + 1, g)).collect();
        edges.push((3, 7, g));
        edges.push((7, 8, g));
        let terminals = vec![
            ActiveTerminal::gain(0, gain_rate, law),
            ActiveTerminal::loss(6, loss_rate_main, law),
            ActiveTerminal::loss(8, loss_rate_branch, law),
        ];
        Self::new(9, edges, vec![0.0; 9], bath, terminals)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    pub fn terminals(&self) -> &[ActiveTerminal] {
        &self.terminals
    }

    pub fn coupling(&self, a: usize, b: usize) -> Result<f64, ModelError> {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.edges
            .iter()
            .find(|e| e.a == lo && e.b == hi)
            .map(|e| e.coupling)
            .ok_or(ModelError::NoSuchEdge(a, b))
    }

    pub fn gain_terminals(&self) -> impl Iterator<Item = &ActiveTerminal> {
        self.terminals.iter().filter(|t| t.kind == TerminalKind::Gain)
    }

    pub fn loss_terminals(&self) -> impl Iterator<Item = &ActiveTerminal> {
        self.terminals.iter().filter(|t| t.kind == TerminalKind::Loss)
    }

    /// Occupation scale used for normalised output and numerical guards:
    /// the largest terminal `n0`, or `max(N_th, 1)` for passive networks.
    pub fn reference_occupation(&self) -> f64 {
        if self.terminals.is_empty() {
            self.bath.n_th.max(1.0)
        } else {
            self.terminals.iter().map(|t| t.law.n0()).fold(0.0, f64::max)
        }
    }

    /// Copy with replaced detunings (used by disorder ensembles).
    pub fn with_detunings(&self, detunings: Vec<f64>) -> Result<Self, ModelError> {
        if detunings.len() != self.n_sites {
            return Err(ModelError::DetuningLength { got: detunings.len(), expected: self.n_sites });
        }
        let mut out = self.clone();
        out.detunings = detunings;
        Ok(out)
    }

    /// Copy with a replaced bath.
    pub fn with_bath(&self, bath: BathSpec) -> Self {
        let mut out = self.clone();
        out.bath = bath;
        out
    }

    /// Copy with the rate of the terminal of `kind` at `site` replaced.
    pub fn with_terminal_rate(
        &self,
        site: usize,
        kind: TerminalKind,
        rate: f64,
    ) -> Result<Self, ModelError> {
        if rate < 0.0 {
            return Err(ModelError::NegativeRate(rate));
        }
        let mut out = self.clone();
        let t = out
            .terminals
            .iter_mut()
            .find(|t| t.site == site && t.kind == kind)
            .ok_or(ModelError::SiteOutOfRange { site, n_sites: self.n_sites })?;
        t.rate = rate;
        Ok(out)
    }

    /// Copy with the saturation law of every terminal replaced.
    pub fn with_law(&self, law: SaturationLaw) -> Self {
        let mut out = self.clone();
        for t in &mut out.terminals {
            t.law = law;
        }
        out
    }

    /// Largest bare rate appearing anywhere in the network (for step-size
    /// checks).
    pub fn max_rate(&self) -> f64 {
        self.terminals
            .iter()
            .map(|t| t.rate)
            .fold(self.bath.gamma, f64::max)
    }

    /// Drift matrix `M` of the linearised (f ≡ 1) amplitude equations,
    /// `dα/dt = M α`:
    ///
    /// * diagonal: `(Γ_i·1_gain − Γ_e·1_loss − γ)/2 − iΔ_ℓ`
    /// * off-diagonal: `i g_ℓm / 2` on every edge.
    pub fn drift_matrix(&self) -> Array2<Complex64> {
        let n = self.n_sites;
        let mut m = Array2::<Complex64>::zeros((n, n));
        for l in 0..n {
            let mut re = -self.bath.gamma / 2.0;
            for t in &self.terminals {
                if t.site == l {
                    match t.kind {
                        TerminalKind::Gain => re += t.rate / 2.0,
                        TerminalKind::Loss => re -= t.rate / 2.0,
                    }
                }
            }
            m[(l, l)] = Complex64::new(re, -self.detunings[l]);
        }
        for e in &self.edges {
            let v = Complex64::new(0.0, e.coupling / 2.0);
            m[(e.a, e.b)] += v;
            m[(e.b, e.a)] += v;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn law2(n0: f64) -> SaturationLaw {
        SaturationLaw::standard(n0).unwrap()
    }

    #[test]
    fn saturation_f_known_values() {
        let law = law2(3.0);
        assert_relative_eq!(law.f(0.0).unwrap(), 1.0);
        assert_relative_eq!(law.f(3.0).unwrap(), 0.5);
        let law1 = SaturationLaw::new(3.0, 1.0).unwrap();
        assert_relative_eq!(law1.f(3.0).unwrap(), 1.0 / 2.0f64.sqrt(), max_relative = 1e-12);
        assert_eq!(law.f(-0.5), Err(ModelError::NegativeOccupation(-0.5)));
    }

    #[test]
    fn rate_at_known_values() {
        let law = law2(2.0);
        assert_relative_eq!(law.rate_at(4.0, 0.0).unwrap(), 4.0);
        assert_relative_eq!(law.rate_at(4.0, 2.0).unwrap(), 1.0);
        assert_relative_eq!(law.rate_at(4.0, 6.0).unwrap(), 0.25);
        assert!(law.rate_at(4.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn rate_is_f_squared(x in 0.0f64..1e4, n0 in 1e-2f64..1e3, nu in 0.1f64..4.0, rate in 0.0f64..20.0) {
            let law = SaturationLaw::new(n0, nu).unwrap();
            let lhs = law.rate_at(rate, x).unwrap();
            let rhs = rate * law.f(x).unwrap().powi(2);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1e-300));
        }

        #[test]
        fn f_strictly_decreasing(x in 0.0f64..1e3, dx in 1e-3f64..10.0, n0 in 0.1f64..100.0, nu in 0.1f64..4.0) {
            let law = SaturationLaw::new(n0, nu).unwrap();
            prop_assert!(law.f(x + dx).unwrap() < law.f(x).unwrap());
        }

        #[test]
        fn chain_has_n_minus_one_edges(n in 2usize..40) {
            let spec = NetworkSpec::chain(n, 1.0, BathSpec::cold(0.0).unwrap(), 1.0, 1.0, law2(1.0)).unwrap();
            prop_assert_eq!(spec.edges().len(), n - 1);
        }
    }

    #[test]
    fn chain_endpoints_and_rejections() {
        let spec =
            NetworkSpec::chain(2, 1.0, BathSpec::cold(0.0).unwrap(), 1.0, 2.0, law2(1.0)).unwrap();
        assert_eq!(spec.edges().len(), 1);
        let sites: Vec<usize> = spec.terminals().iter().map(|t| t.site).collect();
        assert_eq!(sites, vec![0, 1]);
        assert!(NetworkSpec::chain(1, 1.0, BathSpec::cold(0.0).unwrap(), 1.0, 1.0, law2(1.0))
            .is_err());
    }

    #[test]
    fn branched_grid_layout() {
        let spec = NetworkSpec::branched_grid(
            1.0,
            BathSpec::new(1e-3, 3.0).unwrap(),
            4.0,
            0.5,
            4.0,
            law2(1.0),
        )
        .unwrap();
        assert_eq!(spec.n_sites(), 9);
        assert_eq!(spec.edges().len(), 8);
        let gains: Vec<usize> = spec.gain_terminals().map(|t| t.site).collect();
        let losses: Vec<usize> = spec.loss_terminals().map(|t| t.site).collect();
        assert_eq!(gains, vec![0]);
        assert_eq!(losses, vec![6, 8]);
    }

    #[test]
    fn removing_branch_edge_disconnects() {
        // path 0..=6 plus dangling 7-8 without the 3-7 edge
        let mut edges: Vec<(usize, usize, f64)> = (0..6).map(|i| (i, i + 1, 1.0)).collect();
        edges.push((7, 8, 1.0));
        let err = NetworkSpec::new(
            9,
            edges,
            vec![0.0; 9],
            BathSpec::cold(1e-3).unwrap(),
            vec![],
        )
        .unwrap_err();
        assert_eq!(err, ModelError::Disconnected);
    }

    #[test]
    fn drift_matrix_two_site() {
        let spec =
            NetworkSpec::chain(2, 1.0, BathSpec::cold(0.0).unwrap(), 3.0, 2.0, law2(1.0)).unwrap();
        let m = spec.drift_matrix();
        assert_relative_eq!(m[(0, 0)].re, 1.5);
        assert_relative_eq!(m[(1, 1)].re, -1.0);
        assert_relative_eq!(m[(0, 1)].im, 0.5);
        assert_relative_eq!(m[(1, 0)].im, 0.5);
    }

    #[test]
    fn drift_matrix_interior_and_detuned_sites() {
        let gamma = 2e-3;
        let spec = NetworkSpec::chain(4, 1.0, BathSpec::cold(gamma).unwrap(), 4.0, 4.0, law2(1.0))
            .unwrap()
            .with_detunings(vec![0.0, 0.05, 0.0, 0.0])
            .unwrap();
        let m = spec.drift_matrix();
        assert_relative_eq!(m[(1, 1)].re, -gamma / 2.0);
        assert_relative_eq!(m[(1, 1)].im, -0.05);
        assert_relative_eq!(m[(1, 0)].im, 0.5);
        assert_relative_eq!(m[(1, 2)].im, 0.5);
        assert_eq!(m[(1, 3)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn drift_matrix_is_anti_hermitian_plus_real_diagonal() {
        let spec = NetworkSpec::branched_grid(
            1.0,
            BathSpec::new(1e-2, 0.5).unwrap(),
            4.0,
            1.0,
            2.0,
            law2(2.0),
        )
        .unwrap()
        .with_detunings(vec![0.1, -0.2, 0.0, 0.3, 0.0, 0.0, -0.1, 0.0, 0.2])
        .unwrap();
        let m = spec.drift_matrix();
        let n = spec.n_sites();
        for i in 0..n {
            for j in 0..n {
                let s = m[(i, j)] + m[(j, i)].conj();
                if i == j {
                    assert!(s.im.abs() < 1e-14);
                } else {
                    assert!(s.norm() < 1e-14, "M + M^† not diagonal at ({i},{j})");
                }
            }
        }
        // diagonal of M + M^† carries the full gain/loss/damping content
        assert_relative_eq!((m[(0, 0)] + m[(0, 0)].conj()).re, 4.0 - 1e-2);
        assert_relative_eq!((m[(6, 6)] + m[(6, 6)].conj()).re, -1.0 - 1e-2);
    }

    #[test]
    fn terminal_validation() {
        let law = law2(1.0);
        let dup = NetworkSpec::new(
            2,
            vec![(0, 1, 1.0)],
            vec![0.0; 2],
            BathSpec::cold(0.0).unwrap(),
            vec![ActiveTerminal::gain(0, 1.0, law), ActiveTerminal::gain(0, 2.0, law)],
        );
        assert_eq!(dup.unwrap_err(), ModelError::DuplicateTerminal(0, TerminalKind::Gain));
        // one gain and one loss on the same site is allowed
        let both = NetworkSpec::new(
            2,
            vec![(0, 1, 1.0)],
            vec![0.0; 2],
            BathSpec::cold(0.0).unwrap(),
            vec![ActiveTerminal::gain(0, 1.0, law), ActiveTerminal::loss(0, 2.0, law)],
        );
        assert!(both.is_ok());
    }

    #[test]
    fn reference_occupation_rules() {
        let active =
            NetworkSpec::chain(3, 1.0, BathSpec::new(0.0, 5.0).unwrap(), 1.0, 1.0, law2(7.0))
                .unwrap();
        assert_relative_eq!(active.reference_occupation(), 7.0);
        let passive = NetworkSpec::passive_chain(3, 1.0, BathSpec::new(0.0, 5.0).unwrap()).unwrap();
        assert_relative_eq!(passive.reference_occupation(), 5.0);
        let passive_cold = NetworkSpec::passive_chain(3, 1.0, BathSpec::cold(0.1).unwrap()).unwrap();
        assert_relative_eq!(passive_cold.reference_occupation(), 1.0);
    }
}
