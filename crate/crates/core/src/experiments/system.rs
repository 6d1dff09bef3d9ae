use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::linalg::{eigendecompose_below, EigenBasis, LowerSpectrum};
use crate::scattering::transfer_matrix_smatrix;
use crate::schrodinger::{
    build_hamiltonians, build_pi1, build_pi1_windowed, build_pi2, Grid1D, Potential, ProjectionProduct, Regularizer,
};

/// Box, potential and reference energy of a Schrödinger experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub grid: Grid1D,
    pub potential: Potential,
    pub lambda_star: f64,
}

impl SystemConfig {
    /// Square well of depth 2 and half-width 1 in `[−300, 300]` with 6000
    /// points, at `λ* = 1`.
    pub fn reference() -> Self {
        Self {
            grid: Grid1D {
                half_length: 300.0,
                n_points: 6000,
            },
            potential: Potential::SquareWell {
                depth: 2.0,
                half_width: 1.0,
            },
            lambda_star: 1.0,
        }
    }
}

/// Low-lying eigenpairs of `H₀` and `H` plus the scattering amplitudes at `λ*`.
#[derive(Debug, Clone)]
pub struct SchrodingerSystem {
    pub config: SystemConfig,
    pub h0: LowerSpectrum,
    pub h: LowerSpectrum,
    pub amplitudes: [f64; 2],
}

/// Distance to a window endpoint that counts as a collision.
const COLLISION_TOL: f64 = 1e-9;

impl SchrodingerSystem {
    /// Eigenpairs are kept up to `ceiling`; every window used later must end
    /// below it.
    pub fn build(config: SystemConfig, ceiling: f64) -> Result<Self> {
        if !(config.lambda_star > 0.0) {
            return input(format!("lambda_star must be positive, got {}", config.lambda_star));
        }
        if !(ceiling > config.lambda_star) {
            return input(format!("ceiling {ceiling} must exceed lambda_star"));
        }
        let g = Grid1D::new(config.grid.half_length, config.grid.n_points)?;
        g.check_band_edge(ceiling)?;
        let (h0, h) = build_hamiltonians(&g, &config.potential)?;
        let h0 = eigendecompose_below(&h0, ceiling)?;
        let h = eigendecompose_below(&h, ceiling)?;
        let s = transfer_matrix_smatrix(&config.potential, config.lambda_star)?;
        Ok(Self {
            config,
            h0,
            h,
            amplitudes: s.amplitudes,
        })
    }

    pub fn lambda_star(&self) -> f64 {
        self.config.lambda_star
    }

    /// Free level spacing near `λ*`.
    pub fn level_spacing(&self) -> f64 {
        let lam = self.lambda_star();
        let ev = self.h0.eigenvalues();
        let j = ev
            .partition_point(|&v| v < lam)
            .clamp(1, ev.len().saturating_sub(1).max(1));
        if ev.len() < 2 {
            return 0.0;
        }
        (ev[j] - ev[j - 1]).abs()
    }

    fn collides(&self, eps: f64) -> bool {
        let lam = self.lambda_star();
        let near = |vals: &[f64], c: f64| vals.iter().any(|v| (v - c).abs() <= COLLISION_TOL);
        near(self.h0.eigenvalues(), lam - eps) || near(self.h.eigenvalues(), lam + eps)
    }

    /// `eps` itself, or a value within half a level spacing that keeps both
    /// cut points `λ* ± ε` off the discrete spectra.
    pub fn snap_eps(&self, eps: f64) -> f64 {
        if !self.collides(eps) {
            return eps;
        }
        let step = self.level_spacing() / 16.0;
        for k in 1..=8 {
            for sign in [1.0, -1.0] {
                let cand = eps + sign * step * k as f64;
                if cand > 0.0 && !self.collides(cand) {
                    return cand;
                }
            }
        }
        eps
    }

    pub fn pi1(&self, eps: f64) -> Result<ProjectionProduct> {
        build_pi1(&self.h0, &self.h, self.lambda_star(), eps)
    }

    pub fn pi2(&self, r: &Regularizer) -> Result<ProjectionProduct> {
        build_pi2(&self.h0, &self.h, self.lambda_star(), r)
    }

    pub fn pi1_windowed(&self, eps: f64, delta: f64) -> Result<ProjectionProduct> {
        build_pi1_windowed(&self.h0, &self.h, self.lambda_star(), eps, delta)
    }
}
