//! Randomized property suite for the calming functions: Lipschitz-1,
//! supremum bounds, the pointwise deviation bound, parallelism (with the
//! arctan counterexample), shrinking, and the smooth-truncation branch
//! continuity. The checks are generic over the map so negative controls can
//! be injected in tests.

use cnse_core::calming::{CalmingFunction, CalmingKind, Vec3};
use cnse_core::diagnostics::{ExperimentReport, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_EPSILONS: [f64; 3] = [1.0, 0.1, 0.01];
const SAMPLE_RANGE: f64 = 1e6;

fn norm3(x: Vec3) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn sample(rng: &mut ChaCha20Rng) -> Vec3 {
    [
        rng.gen_range(-SAMPLE_RANGE..SAMPLE_RANGE),
        rng.gen_range(-SAMPLE_RANGE..SAMPLE_RANGE),
        rng.gen_range(-SAMPLE_RANGE..SAMPLE_RANGE),
    ]
}

/// Worst Lipschitz ratio |f(x)-f(y)| / |x-y| over random pairs; the check
/// passes when it stays <= 1 + 1e-9. Besides independent pairs across the
/// full box, nearby pairs at moderate magnitudes probe the regime where the
/// ratio is tight.
pub fn lipschitz_ratio(f: impl Fn(Vec3) -> Vec3, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut check = |x: Vec3, y: Vec3| {
        let fx = f(x);
        let fy = f(y);
        let num = norm3([fx[0] - fy[0], fx[1] - fy[1], fx[2] - fy[2]]);
        let den = norm3([x[0] - y[0], x[1] - y[1], x[2] - y[2]]);
        if den > 0.0 {
            worst = worst.max(num / den);
        }
    };
    for i in 0..samples {
        if i % 2 == 0 {
            check(sample(&mut rng), sample(&mut rng));
        } else {
            // nearby pair at a magnitude drawn over twelve decades
            let scale = 10.0_f64.powf(rng.gen_range(-4.0..8.0));
            let x = [
                rng.gen_range(-scale..scale),
                rng.gen_range(-scale..scale),
                rng.gen_range(-scale..scale),
            ];
            let h = 1e-3 * scale;
            let y = [
                x[0] + rng.gen_range(-h..h),
                x[1] + rng.gen_range(-h..h),
                x[2] + rng.gen_range(-h..h),
            ];
            check(x, y);
        }
    }
    worst
}

/// Worst |f(x)| / bound over random samples (<= 1 + 1e-15 to pass) together
/// with the worst shrink ratio |f(x)| / |x| (<= 1 + 1e-12 to pass).
pub fn bound_and_shrink_ratios(
    f: impl Fn(Vec3) -> Vec3,
    bound: f64,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut worst_bound = 0.0_f64;
    let mut worst_shrink = 0.0_f64;
    for _ in 0..samples {
        let x = sample(&mut rng);
        let fx = norm3(f(x));
        worst_bound = worst_bound.max(fx / bound);
        let r = norm3(x);
        if r > 0.0 {
            worst_shrink = worst_shrink.max(fx / r);
        }
    }
    (worst_bound, worst_shrink)
}

/// Worst deviation ratio |f(x) - x| / (C eps^alpha |x|^beta) over random
/// samples (<= 1 + 1e-12 to pass).
pub fn deviation_ratio(
    f: impl Fn(Vec3) -> Vec3,
    c: f64,
    eps: f64,
    alpha: f64,
    beta: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let x = sample(&mut rng);
        let fx = f(x);
        let dev = norm3([fx[0] - x[0], fx[1] - x[1], fx[2] - x[2]]);
        let r = norm3(x);
        if r > 0.0 {
            worst = worst.max(dev / (c * eps.powf(alpha) * r.powf(beta)));
        }
    }
    worst
}

/// Worst normalized cross product |f(x) x x| / (|x| |f(x)|).
pub fn parallelism_ratio(f: impl Fn(Vec3) -> Vec3, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let x = sample(&mut rng);
        let z = f(x);
        let cross = [
            z[1] * x[2] - z[2] * x[1],
            z[2] * x[0] - z[0] * x[2],
            z[0] * x[1] - z[1] * x[0],
        ];
        let scale = norm3(x) * norm3(z);
        if scale > 0.0 {
            worst = worst.max(norm3(cross) / scale);
        }
    }
    worst
}

/// Published counterexample for the arctan kind: zeta((1,2,0)) is not
/// parallel to (1,2,0); returns the normalized cross-product magnitude.
pub fn arctan_counterexample(zeta: &CalmingFunction) -> f64 {
    let x = [1.0, 2.0, 0.0];
    let z = zeta.apply(x).expect("finite input");
    let cross = [
        z[1] * x[2] - z[2] * x[1],
        z[2] * x[0] - z[0] * x[2],
        z[0] * x[1] - z[1] * x[0],
    ];
    norm3(cross) / (norm3(x) * norm3(z))
}

/// Bound attainment at large arguments: kinds 1 and 3 come within 1e-3 of
/// the supremum, kind 4 attains it exactly on the saturated branch, kind 2
/// attains it exactly at |x| = 1/eps. Returns the worst absolute gap.
pub fn bound_attainment_gap(zeta: &CalmingFunction) -> f64 {
    let bound = zeta.linf_bound();
    let probe = match zeta.kind() {
        CalmingKind::Arctan => {
            let d = SAMPLE_RANGE / 3.0_f64.sqrt();
            [d, d, d]
        }
        CalmingKind::Rational2 => [1.0 / zeta.epsilon(), 0.0, 0.0],
        _ => [SAMPLE_RANGE, 0.0, 0.0],
    };
    let z = zeta.apply(probe).expect("finite probe");
    (norm3(z) - bound).abs()
}

/// Branch continuity of the smooth truncation profile at r = 1/eps and
/// r = 2/eps; returns the worst relative jump between adjacent formulas.
pub fn smooth_trunc_branch_jump(eps: f64) -> f64 {
    let inv = 1.0 / eps;
    let quad = |r: f64| -0.5 * eps * (r - 2.0 * inv) * (r - 2.0 * inv) + 1.5 * inv;
    let j1 = (quad(inv) - inv).abs() / inv;
    let j2 = (quad(2.0 * inv) - 1.5 * inv).abs() / (1.5 * inv);
    j1.max(j2)
}

/// Runs the full property suite for all four kinds over the epsilon list.
/// Any violated property yields a failing row.
pub fn cmd_calmcheck(epsilons: &[f64], samples: usize, seed: u64) -> ExperimentReport {
    let mut report = ExperimentReport::new("calmcheck");
    for kind in CalmingKind::ALL {
        let mut worst_lip = 0.0_f64;
        let mut worst_bound = 0.0_f64;
        let mut worst_shrink = 0.0_f64;
        let mut worst_dev = 0.0_f64;
        let mut worst_par = 0.0_f64;
        let mut worst_attain = 0.0_f64;
        let mut worst_branch = 0.0_f64;
        for (i, &eps) in epsilons.iter().enumerate() {
            let zeta = CalmingFunction::new(kind, eps).expect("valid epsilon");
            let f = |x: Vec3| zeta.apply(x).expect("finite sample");
            let s = seed.wrapping_add(i as u64).wrapping_mul(0x9e3779b97f4a7c15);
            worst_lip = worst_lip.max(lipschitz_ratio(f, samples, s));
            let (b, sh) = bound_and_shrink_ratios(f, zeta.linf_bound(), samples, s ^ 1);
            worst_bound = worst_bound.max(b);
            worst_shrink = worst_shrink.max(sh);
            let (c, alpha, beta) = zeta.convergence_exponents();
            worst_dev = worst_dev.max(deviation_ratio(f, c, eps, alpha, beta, samples, s ^ 2));
            if zeta.is_parallel() {
                worst_par = worst_par.max(parallelism_ratio(f, samples, s ^ 3));
            } else {
                // counterexample must be detected (cross product away from 0)
                worst_par = worst_par.max(arctan_counterexample(&zeta));
            }
            worst_attain = worst_attain.max(bound_attainment_gap(&zeta) / zeta.linf_bound());
            if kind == CalmingKind::SmoothTruncation {
                worst_branch = worst_branch.max(smooth_trunc_branch_jump(eps));
            }
        }
        let name = kind.name();
        report.push(
            &format!("{name}.lipschitz"),
            format!("{worst_lip}"),
            "<= 1 + 1e-9",
            Verdict::from_bool(worst_lip <= 1.0 + 1e-9),
        );
        report.push(
            &format!("{name}.linf_bound"),
            format!("{worst_bound}"),
            "<= 1 + 1e-15",
            Verdict::from_bool(worst_bound <= 1.0 + 1e-15),
        );
        report.push(
            &format!("{name}.deviation_bound"),
            format!("{worst_dev}"),
            "<= 1 + 1e-12",
            Verdict::from_bool(worst_dev <= 1.0 + 1e-12),
        );
        if kind == CalmingKind::Arctan {
            report.push(
                &format!("{name}.counterexample"),
                format!("{worst_par}"),
                ">= 0.1 (not parallel)",
                Verdict::from_bool(worst_par >= 0.1),
            );
        } else {
            report.push(
                &format!("{name}.parallelism"),
                format!("{worst_par}"),
                "<= 1e-12",
                Verdict::from_bool(worst_par <= 1e-12),
            );
        }
        report.push(
            &format!("{name}.shrinking"),
            format!("{worst_shrink}"),
            "<= 1 + 1e-12",
            Verdict::from_bool(worst_shrink <= 1.0 + 1e-12),
        );
        report.push(
            &format!("{name}.bound_attainment"),
            format!("{worst_attain}"),
            "<= 1e-3 relative",
            Verdict::from_bool(worst_attain <= 1e-3),
        );
        if kind == CalmingKind::SmoothTruncation {
            report.push(
                &format!("{name}.branch_continuity"),
                format!("{worst_branch}"),
                "<= 1e-12",
                Verdict::from_bool(worst_branch <= 1e-12),
            );
        }
    }
    report
}
