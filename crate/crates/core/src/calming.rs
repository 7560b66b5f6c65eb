//! Calming functions: bounded Lipschitz-1 truncations of the identity on 3-vectors.
//!
//! Four kinds are provided. All are exactly Lipschitz-1, bounded for fixed
//! epsilon, and approximate the identity at a kind-specific rate: the
//! pointwise deviation obeys |zeta(x) - x| <= C eps^alpha |x|^beta with
//! (C, alpha, beta) reported by [`CalmingFunction::convergence_exponents`].
//! All kinds except `Arctan` return a scalar multiple of their argument.

use crate::error::{Error, Result};
use crate::spectral::PhysicalField;

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalmingKind {
    /// x / (1 + eps |x|)
    Rational1,
    /// x / (1 + eps^2 |x|^2)
    Rational2,
    /// arctan(eps x) / eps, component-wise
    Arctan,
    /// q(|x|) x / |x| with q the C^1 piecewise truncation profile
    SmoothTruncation,
}

impl CalmingKind {
    pub const ALL: [CalmingKind; 4] = [
        CalmingKind::Rational1,
        CalmingKind::Rational2,
        CalmingKind::Arctan,
        CalmingKind::SmoothTruncation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CalmingKind::Rational1 => "rational1",
            CalmingKind::Rational2 => "rational2",
            CalmingKind::Arctan => "arctan",
            CalmingKind::SmoothTruncation => "smooth_trunc",
        }
    }
}

/// A calming function: kind plus the calming parameter epsilon > 0.
///
/// Immutable after construction; `apply` is pure and thread-safe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalmingFunction {
    kind: CalmingKind,
    epsilon: f64,
}

impl CalmingFunction {
    pub fn new(kind: CalmingKind, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "calming epsilon must be positive and finite, got {epsilon}"
            )));
        }
        Ok(Self { kind, epsilon })
    }

    pub fn kind(&self) -> CalmingKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Evaluates zeta(x). Rejects non-finite inputs.
    pub fn apply(&self, x: Vec3) -> Result<Vec3> {
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(self.apply_unchecked(x))
    }

    #[inline]
    pub(crate) fn apply_unchecked(&self, x: Vec3) -> Vec3 {
        let eps = self.epsilon;
        match self.kind {
            CalmingKind::Rational1 => {
                let r = norm3(x);
                let s = 1.0 / (1.0 + eps * r);
                [x[0] * s, x[1] * s, x[2] * s]
            }
            CalmingKind::Rational2 => {
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                let s = 1.0 / (1.0 + eps * eps * r2);
                [x[0] * s, x[1] * s, x[2] * s]
            }
            CalmingKind::Arctan => [
                (eps * x[0]).atan() / eps,
                (eps * x[1]).atan() / eps,
                (eps * x[2]).atan() / eps,
            ],
            CalmingKind::SmoothTruncation => {
                let r = norm3(x);
                if r == 0.0 {
                    return [0.0; 3];
                }
                let inv = 1.0 / eps;
                if r < inv {
                    // identity branch, returned verbatim
                    x
                } else {
                    let q = if r < 2.0 * inv {
                        let d = r - 2.0 * inv;
                        -0.5 * eps * d * d + 1.5 * inv
                    } else {
                        1.5 * inv
                    };
                    let s = q / r;
                    [x[0] * s, x[1] * s, x[2] * s]
                }
            }
        }
    }

    /// Supremum of |zeta| over R^3, exact per kind.
    pub fn linf_bound(&self) -> f64 {
        let eps = self.epsilon;
        match self.kind {
            CalmingKind::Rational1 => 1.0 / eps,
            CalmingKind::Rational2 => 0.5 / eps,
            CalmingKind::Arctan => 3.0_f64.sqrt() * std::f64::consts::PI / (2.0 * eps),
            CalmingKind::SmoothTruncation => 1.5 / eps,
        }
    }

    /// (C, alpha, beta) of the pointwise deviation bound, with beta minimal.
    pub fn convergence_exponents(&self) -> (f64, f64, f64) {
        match self.kind {
            CalmingKind::Rational1 => (1.0, 1.0, 2.0),
            CalmingKind::Rational2 => (1.0, 2.0, 3.0),
            CalmingKind::Arctan => (1.0, 2.0, 3.0),
            CalmingKind::SmoothTruncation => (1.0, 1.0, 2.0),
        }
    }

    /// Whether zeta(x) is a scalar multiple of x for every x.
    pub fn is_parallel(&self) -> bool {
        self.kind != CalmingKind::Arctan
    }

    /// Pointwise lift of `apply` over a grid field. No projection is
    /// performed; the output is generally neither solenoidal nor mean-free.
    pub fn apply_field(&self, u: &PhysicalField) -> Result<PhysicalField> {
        let mut out = PhysicalField::zeros(u.grid());
        let (ux, uy, uz) = (u.component(0), u.component(1), u.component(2));
        let len = ux.len();
        for idx in 0..len {
            let x = [ux[idx], uy[idx], uz[idx]];
            if !x.iter().all(|v| v.is_finite()) {
                let (ix, iy, iz) = u.grid().unravel(idx);
                return Err(Error::NonFiniteField { ix, iy, iz });
            }
            let z = self.apply_unchecked(x);
            out.component_mut(0)[idx] = z[0];
            out.component_mut(1)[idx] = z[1];
            out.component_mut(2)[idx] = z[2];
        }
        Ok(out)
    }
}

#[inline]
fn norm3(x: Vec3) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}
