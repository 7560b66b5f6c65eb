//! Nonlinearity contracts: the gradient-annihilation oracle for
//! Taylor-Green, advective/rotational agreement under the projected vector
//! identity, trilinear cancellations, and the energy-flux dichotomy between
//! the two calmed forms.

use cnse_core::calming::{CalmingFunction, CalmingKind};
use cnse_core::nonlinear::{eval_nonlinearity, trilinear_b, FormKind, NonlinearForm};
use cnse_core::spectral::{
    inner_l2, norm_h1_semi, norm_l2, Fft3, Grid, PhysicalField, SpectralField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn taylor_green(grid: Grid, fft: &Fft3, amp: f64) -> SpectralField {
    let p = PhysicalField::from_fn(grid, |x, y, _z| {
        [amp * x.sin() * y.cos(), -amp * x.cos() * y.sin(), 0.0]
    });
    let mut s = fft.forward(&p);
    s.zero_mean();
    s.dealias_in_place();
    s.project_in_place();
    s
}

fn random_solenoidal(grid: Grid, fft: &Fft3, seed: u64) -> SpectralField {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut p = PhysicalField::zeros(grid);
    for c in 0..3 {
        for v in p.component_mut(c) {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    let mut s = fft.forward(&p);
    s.zero_mean();
    s.dealias_in_place();
    s.project_in_place();
    s
}

#[test]
fn zero_field_maps_to_zero() {
    let grid = Grid::new(16, 3).unwrap();
    let fft = Fft3::new(grid);
    let u = SpectralField::zeros(grid);
    for form in [FormKind::Advective, FormKind::Rotational] {
        let nf = NonlinearForm::identity(form);
        let b = eval_nonlinearity(&fft, &nf, &u).unwrap();
        assert_eq!(norm_l2(&b.field), 0.0);
    }
}

#[test]
fn taylor_green_advective_term_is_a_pure_gradient() {
    // (u.grad)u = -1/4 grad(cos 2x + cos 2y) for this datum, so the
    // projected nonlinearity vanishes
    let grid = Grid::new(32, 2).unwrap();
    let fft = Fft3::new(grid);
    let u = taylor_green(grid, &fft, 1.0);
    let nf = NonlinearForm::identity(FormKind::Advective);
    let b = eval_nonlinearity(&fft, &nf, &u).unwrap();
    assert!(norm_l2(&b.field) <= 1e-12 * norm_l2(&u) * norm_h1_semi(&u));
}

#[test]
fn advective_equals_rotational_after_projection_for_identity() {
    // the two forms differ by grad(|u|^2)/2, which the projection kills
    for dims in [2, 3] {
        let grid = Grid::new(32, dims).unwrap();
        let fft = Fft3::new(grid);
        let u = random_solenoidal(grid, &fft, 7 + dims as u64);
        let adv = eval_nonlinearity(&fft, &NonlinearForm::identity(FormKind::Advective), &u)
            .unwrap()
            .field;
        let rot = eval_nonlinearity(&fft, &NonlinearForm::identity(FormKind::Rotational), &u)
            .unwrap()
            .field;
        let mut diff = adv.clone();
        diff.add_scaled(&rot, -1.0);
        let scale = norm_l2(&adv).max(norm_l2(&rot));
        assert!(
            norm_l2(&diff) <= 1e-11 * scale,
            "dims={dims}: {} vs scale {scale}",
            norm_l2(&diff)
        );
    }
}

#[test]
fn output_is_solenoidal_mean_free_dealiased() {
    let grid = Grid::new(16, 3).unwrap();
    let fft = Fft3::new(grid);
    let u = random_solenoidal(grid, &fft, 13);
    let zeta = CalmingFunction::new(CalmingKind::Rational1, 0.2).unwrap();
    for form in [FormKind::Advective, FormKind::Rotational] {
        let nf = NonlinearForm::new(form, Some(zeta));
        let b = eval_nonlinearity(&fft, &nf, &u).unwrap().field;
        assert!(b.div_residual() <= 1e-13);
        assert_eq!(b.coeff(0, 0, 0, 0).norm(), 0.0);
        let d = b.dealias();
        for c in 0..3 {
            assert_eq!(b.component(c), d.component(c));
        }
    }
}

#[test]
fn advective_trilinear_skew_symmetry() {
    // b(u, v, v) = 0 for divergence-free first slot
    let grid = Grid::new(16, 3).unwrap();
    let fft = Fft3::new(grid);
    let u = random_solenoidal(grid, &fft, 17);
    let v = random_solenoidal(grid, &fft, 19);
    let nf = NonlinearForm::identity(FormKind::Advective);
    let b = trilinear_b(&fft, &nf, &u, &v, &v).unwrap();
    let scale = norm_l2(&u) * norm_h1_semi(&v) * norm_l2(&v);
    assert!(b.abs() <= 1e-11 * scale, "{b} vs {scale}");
}

#[test]
fn rotational_flux_vanishes_pointwise_for_parallel_calming() {
    let grid = Grid::new(16, 3).unwrap();
    let fft = Fft3::new(grid);
    let u = random_solenoidal(grid, &fft, 23);
    for kind in [CalmingKind::Rational1, CalmingKind::Rational2, CalmingKind::SmoothTruncation] {
        let zeta = CalmingFunction::new(kind, 0.3).unwrap();
        let nf = NonlinearForm::new(FormKind::Rotational, Some(zeta));
        let flux = trilinear_b(&fft, &nf, &u, &u, &u).unwrap();
        let om = norm_l2(&u.curl());
        let scale = om * norm_l2(&u) * norm_l2(&u);
        assert!(flux.abs() <= 1e-12 * scale, "{kind:?}: {flux} vs {scale}");
    }
}

#[test]
fn rotational_flux_is_nonzero_for_arctan() {
    let grid = Grid::new(16, 3).unwrap();
    let fft = Fft3::new(grid);
    let u = random_solenoidal(grid, &fft, 29);
    let zeta = CalmingFunction::new(CalmingKind::Arctan, 0.5).unwrap();
    let nf = NonlinearForm::new(FormKind::Rotational, Some(zeta));
    let flux = trilinear_b(&fft, &nf, &u, &u, &u).unwrap();
    let scale = norm_l2(&u.curl()) * norm_l2(&u) * norm_l2(&u);
    assert!(flux.abs() > 1e-9 * scale, "arctan flux unexpectedly small: {flux}");
}

#[test]
fn energy_flux_dichotomy_between_forms() {
    // rotational + parallel: machine zero; advective + parallel: the
    // discrete flux is generically nonzero (integration by parts does not
    // survive collocation exactly)
    let grid = Grid::new(16, 3).unwrap();
    let fft = Fft3::new(grid);
    let mut u = random_solenoidal(grid, &fft, 31);
    u.scale(4.0 / norm_l2(&u));
    let zeta = CalmingFunction::new(CalmingKind::Rational1, 0.5).unwrap();
    let rot = trilinear_b(
        &fft,
        &NonlinearForm::new(FormKind::Rotational, Some(zeta)),
        &u,
        &u,
        &u,
    )
    .unwrap();
    let adv = trilinear_b(
        &fft,
        &NonlinearForm::new(FormKind::Advective, Some(zeta)),
        &u,
        &u,
        &u,
    )
    .unwrap();
    let scale = norm_l2(&u.curl()) * norm_l2(&u) * norm_l2(&u);
    assert!(rot.abs() <= 1e-12 * scale);
    assert!(adv.abs() > rot.abs().max(1e-300));
}

#[test]
fn dual_norm_boundedness_proxy() {
    // <B(zeta(u), u), w> <= ||zeta||_Linf ||grad u|| ||w|| on sampled w
    let grid = Grid::new(16, 3).unwrap();
    let fft = Fft3::new(grid);
    let u = random_solenoidal(grid, &fft, 37);
    let zeta = CalmingFunction::new(CalmingKind::Rational1, 0.4).unwrap();
    let nf = NonlinearForm::new(FormKind::Advective, Some(zeta));
    let b = eval_nonlinearity(&fft, &nf, &u).unwrap().field;
    for seed in [41, 43, 47, 53] {
        let w = random_solenoidal(grid, &fft, seed);
        let ip = inner_l2(&b, &w).unwrap();
        let bound = zeta.linf_bound() * norm_h1_semi(&u) * norm_l2(&w);
        assert!(ip.abs() <= bound * (1.0 + 1e-12), "{ip} vs {bound}");
    }
}

fn restriction_disagreement(nf: &NonlinearForm) -> f64 {
    let g16 = Grid::new(16, 2).unwrap();
    let g32 = Grid::new(32, 2).unwrap();
    let f16 = Fft3::new(g16);
    let f32 = Fft3::new(g32);
    // one random field, band-limited on the coarse grid, embedded exactly
    // into the fine grid
    let u16 = random_solenoidal(g16, &f16, 71);
    let mut u32 = SpectralField::zeros(g32);
    for c in 0..3 {
        for ix in 0..16usize {
            for iy in 0..16usize {
                let (kx, ky) = (Grid::freq_of(ix, 16), Grid::freq_of(iy, 16));
                let jx = kx.rem_euclid(32) as usize;
                let jy = ky.rem_euclid(32) as usize;
                u32.set_coeff(c, jx, jy, 0, u16.coeff(c, ix, iy, 0));
            }
        }
    }
    let b16 = eval_nonlinearity(&f16, nf, &u16).unwrap().field;
    let b32 = eval_nonlinearity(&f32, nf, &u32).unwrap().field;
    let mut diff_sq = 0.0;
    let mut norm_sq = 0.0;
    for c in 0..3 {
        for ix in 0..16usize {
            for iy in 0..16usize {
                let (kx, ky) = (Grid::freq_of(ix, 16), Grid::freq_of(iy, 16));
                if 3 * kx.abs() > 16 || 3 * ky.abs() > 16 {
                    continue;
                }
                let jx = kx.rem_euclid(32) as usize;
                let jy = ky.rem_euclid(32) as usize;
                let a = b16.coeff(c, ix, iy, 0);
                let b = b32.coeff(c, jx, jy, 0);
                diff_sq += (a - b).norm_sqr();
                norm_sq += b.norm_sqr();
            }
        }
    }
    (diff_sq / norm_sq.max(1e-300)).sqrt()
}

#[test]
fn resolution_consistency_of_evaluation() {
    // quadratic (identity) products are exactly dealiased: evaluating at n
    // and 2n and restricting agrees to round-off
    let identity = NonlinearForm::identity(FormKind::Rotational);
    assert!(restriction_disagreement(&identity) <= 1e-13);

    // calmed products carry a resolution-controlled aliasing tail; it is
    // small for this smooth datum and shrinks with the calming strength
    let strong = NonlinearForm::new(
        FormKind::Rotational,
        Some(CalmingFunction::new(CalmingKind::Rational1, 0.5).unwrap()),
    );
    let weak = NonlinearForm::new(
        FormKind::Rotational,
        Some(CalmingFunction::new(CalmingKind::Rational1, 0.05).unwrap()),
    );
    let d_strong = restriction_disagreement(&strong);
    let d_weak = restriction_disagreement(&weak);
    assert!(d_strong < 0.2, "aliasing tail too large: {d_strong}");
    assert!(d_weak < d_strong, "tail should shrink with epsilon: {d_weak} vs {d_strong}");
}

#[test]
fn non_finite_states_are_reported_with_index() {
    let grid = Grid::new(8, 3).unwrap();
    let fft = Fft3::new(grid);
    let mut u = random_solenoidal(grid, &fft, 59);
    u.component_mut(0)[0] = rustfft::num_complex::Complex64::new(f64::INFINITY, 0.0);
    let nf = NonlinearForm::identity(FormKind::Advective);
    let err = eval_nonlinearity(&fft, &nf, &u).unwrap_err();
    assert!(matches!(err, cnse_core::Error::NonFiniteField { .. }), "{err}");
}

#[test]
fn trilinear_rejects_grid_mismatch() {
    let g1 = Grid::new(8, 3).unwrap();
    let g2 = Grid::new(16, 3).unwrap();
    let fft = Fft3::new(g1);
    let u = SpectralField::zeros(g1);
    let v = SpectralField::zeros(g2);
    let nf = NonlinearForm::identity(FormKind::Advective);
    assert!(trilinear_b(&fft, &nf, &u, &v, &u).is_err());
}

#[test]
fn apply_field_matches_scalar_loop_oracle() {
    let grid = Grid::new(8, 3).unwrap();
    let p = PhysicalField::from_fn(grid, |x, y, _z| {
        [x.sin() * y.cos(), -x.cos() * y.sin(), 0.0]
    });
    let zeta = CalmingFunction::new(CalmingKind::Rational1, 0.1).unwrap();
    let out = zeta.apply_field(&p).unwrap();
    for i in 0..grid.len() {
        let x = [p.component(0)[i], p.component(1)[i], p.component(2)[i]];
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let s = 1.0 / (1.0 + 0.1 * r);
        for c in 0..3 {
            assert_eq!(out.component(c)[i], x[c] * s, "mismatch at {i} component {c}");
        }
    }
}
