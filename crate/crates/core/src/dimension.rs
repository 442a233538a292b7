//! The asymptotic front-curvature fixed point g(γ, θ), its extremes over a
//! (γ, θ) domain, the λ/μ contraction-rate chain, and the resulting
//! Hausdorff-dimension bounds for the trapped set.

use serde::Serialize;

use crate::constants::{ConstantsReport, DomainD};
use crate::dynamics::Trajectory;
use crate::orbits::{OrbitError, SymbolSequence};

/// Positive fixed point of f_{γ,θ}(x) = x/(1+θx) + 2γ.
pub fn g(gamma: f64, theta: f64) -> f64 {
    debug_assert!(gamma >= 0.0 && theta > 0.0);
    gamma + (gamma * gamma + 2.0 * gamma / theta).sqrt()
}

/// The iterated map whose fixed point g is; exposed for convergence tests.
pub fn g_step(x: f64, gamma: f64, theta: f64) -> f64 {
    x / (1.0 + theta * x) + 2.0 * gamma
}

#[derive(Debug, Clone, Serialize)]
pub struct GExtrema {
    pub g_min: f64,
    pub g_max: f64,
    /// (γ, θ, rectangle pair tag) realizing each extreme.
    pub argmin: (f64, f64, Option<(usize, usize)>),
    pub argmax: (f64, f64, Option<(usize, usize)>),
}

/// Extremize g over the domain. g is non-decreasing in γ and strictly
/// decreasing in θ, so per rectangle the minimum sits at (γ_lo, θ_hi) and the
/// maximum at (γ_hi, θ_lo); only those corners are evaluated.
pub fn g_extrema(domain: &DomainD) -> GExtrema {
    assert!(!domain.rects.is_empty(), "domain has no rectangles");
    let mut out = GExtrema {
        g_min: f64::INFINITY,
        g_max: f64::NEG_INFINITY,
        argmin: (0.0, 0.0, None),
        argmax: (0.0, 0.0, None),
    };
    for r in &domain.rects {
        let lo = g(r.gamma_lo, r.theta_hi);
        if lo < out.g_min {
            out.g_min = lo;
            out.argmin = (r.gamma_lo, r.theta_hi, r.pair);
        }
        let hi = g(r.gamma_hi, r.theta_lo);
        if hi > out.g_max {
            out.g_max = hi;
            out.argmax = (r.gamma_hi, r.theta_lo, r.pair);
        }
    }
    out
}

/// Per-reflection contraction-rate constants.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConstantChain {
    /// 1/λ₁ = 1 + d_max g_max.
    pub lambda1: f64,
    /// 1/μ₁ = 1 + d_min g_min.
    pub mu1: f64,
    /// 1/λ₀ = 1 + d_max (1/d_min + 2κ⁺/cos φ⁺).
    pub lambda0: f64,
    /// 1/μ₀ = 1 + 2 d_min κ⁻ cos φ⁺.
    pub mu0: f64,
    /// δ⁻ = 1/(1 + d_max k₀⁺) for the initial-front curvature cap k₀⁺.
    pub delta_minus: f64,
}

pub fn constant_chain<const D: usize>(
    gx: &GExtrema,
    report: &ConstantsReport<D>,
    k0_plus: f64,
) -> ConstantChain {
    ConstantChain {
        lambda1: 1.0 / (1.0 + report.d_max * gx.g_max),
        mu1: 1.0 / (1.0 + report.d_min * gx.g_min),
        lambda0: 1.0
            / (1.0
                + report.d_max * (1.0 / report.d_min + 2.0 * report.kappa_plus / report.cos_phi_plus)),
        mu0: 1.0 / (1.0 + 2.0 * report.d_min * report.kappa_minus * report.cos_phi_plus),
        delta_minus: 1.0 / (1.0 + report.d_max * k0_plus),
    }
}

/// Two-sided bound −2 ln(u−1)/ln λ₁ ≤ dim ≤ −2 ln(u−1)/ln μ₁.
pub fn dimension_bounds_eq1(u: usize, lambda1: f64, mu1: f64) -> (f64, f64) {
    let c = 2.0 * ((u - 1) as f64).ln();
    (-c / lambda1.ln(), -c / mu1.ln())
}

/// Bunching exponent α = 2 d_min ln μ₁ / (d_max ln λ₁), clamped to 1 (the
/// Lipschitz case) when the formula exceeds it; returns (α, clamped).
pub fn holder_alpha(d_min: f64, d_max: f64, lambda1: f64, mu1: f64) -> (f64, bool) {
    let alpha = 2.0 * d_min * mu1.ln() / (d_max * lambda1.ln());
    if alpha > 1.0 {
        (1.0, true)
    } else {
        (alpha, false)
    }
}

/// α-scaled bounds: α·lower₁ ≤ dim ≤ upper₁/α.
pub fn dimension_bounds_eq2(u: usize, lambda1: f64, mu1: f64, alpha: f64) -> (f64, f64) {
    let (lo, hi) = dimension_bounds_eq1(u, lambda1, mu1);
    (alpha * lo, hi / alpha)
}

/// The α-scaled bounds with α expanded in place:
/// −4 d_min ln μ₁ ln(u−1)/(d_max (ln λ₁)²) ≤ dim ≤ −d_max ln λ₁ ln(u−1)/(d_min (ln μ₁)²).
pub fn dimension_bounds_eq7(
    u: usize,
    lambda1: f64,
    mu1: f64,
    d_min: f64,
    d_max: f64,
) -> (f64, f64) {
    let c = ((u - 1) as f64).ln();
    let ll = lambda1.ln();
    let lm = mu1.ln();
    (
        -4.0 * d_min * lm * c / (d_max * ll * ll),
        -d_max * ll * c / (d_min * lm * lm),
    )
}

/// Separation condition λ₁^{d_max} < μ₁^{2 d_min}, checked in log form;
/// strict, so exact equality fails.
pub fn pinching_check(lambda1: f64, mu1: f64, d_min: f64, d_max: f64) -> bool {
    d_max * lambda1.ln() < 2.0 * d_min * mu1.ln()
}

/// Hausdorff dimension of a cylinder in the symbol metric d_θ:
/// −ln(u−1)/ln θ.
pub fn symbol_space_dim(u: usize, theta: f64) -> f64 {
    assert!(u >= 2 && theta > 0.0 && theta < 1.0);
    -(((u - 1) as f64).ln()) / theta.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    TwoSidedEq1,
    AlphaScaledEq2,
    GeneralEq7,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionBounds {
    pub variant: BoundVariant,
    pub lambda1: f64,
    pub mu1: f64,
    pub lambda0: f64,
    pub mu0: f64,
    pub delta_minus: f64,
    pub alpha: f64,
    pub alpha_clamped: bool,
    pub lower: f64,
    pub upper: f64,
    pub pinching_satisfied: bool,
}

/// Assemble the full bound record for one variant from the g extremes and
/// the constants report.
pub fn dimension_bounds<const D: usize>(
    u: usize,
    gx: &GExtrema,
    report: &ConstantsReport<D>,
    k0_plus: f64,
    variant: BoundVariant,
) -> DimensionBounds {
    let chain = constant_chain(gx, report, k0_plus);
    let (alpha, alpha_clamped) = holder_alpha(report.d_min, report.d_max, chain.lambda1, chain.mu1);
    let (lower, upper) = match variant {
        BoundVariant::TwoSidedEq1 => dimension_bounds_eq1(u, chain.lambda1, chain.mu1),
        BoundVariant::AlphaScaledEq2 => dimension_bounds_eq2(u, chain.lambda1, chain.mu1, alpha),
        BoundVariant::GeneralEq7 => {
            dimension_bounds_eq7(u, chain.lambda1, chain.mu1, report.d_min, report.d_max)
        }
    };
    DimensionBounds {
        variant,
        lambda1: chain.lambda1,
        mu1: chain.mu1,
        lambda0: chain.lambda0,
        mu0: chain.mu0,
        delta_minus: chain.delta_minus,
        alpha,
        alpha_clamped,
        lower,
        upper,
        pinching_satisfied: pinching_check(chain.lambda1, chain.mu1, report.d_min, report.d_max),
    }
}

/// Symbolic itinerary of a trajectory: the sequence of struck obstacles.
pub fn code_trajectory<const D: usize>(
    trajectory: &Trajectory<D>,
    u: usize,
) -> Result<SymbolSequence, OrbitError> {
    let symbols: Vec<usize> = trajectory.events.iter().map(|e| e.obstacle).collect();
    SymbolSequence::finite(symbols, u)
}
