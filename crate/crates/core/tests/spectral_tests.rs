//! Transform, projection, and norm contracts, checked against independent
//! oracles: a direct O(N^2) DFT sum, closed-form integrals, and mode counts.

use cnse_core::spectral::{
    checkpoint::{read_checkpoint, write_checkpoint},
    inner_l2, norm_h1_semi_sq, norm_l2, norm_l2_sq, norm_stokes_sq, Fft3, Grid, PhysicalField,
    SpectralField, TWO_PI,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rustfft::num_complex::Complex64;

fn random_physical(grid: Grid, seed: u64) -> PhysicalField {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut p = PhysicalField::zeros(grid);
    for c in 0..3 {
        for v in p.component_mut(c) {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    p
}

fn random_solenoidal(grid: Grid, seed: u64) -> SpectralField {
    let fft = Fft3::new(grid);
    let mut s = fft.forward(&random_physical(grid, seed));
    s.zero_mean();
    s.dealias_in_place();
    s.project_in_place();
    s
}

/// Direct DFT: a(k) = 1/N sum_x u(x) e^{-i k.x}, scaled by (2pi)^{3/2}.
fn dft_oracle(p: &PhysicalField, c: usize, kx: i64, ky: i64, kz: i64) -> Complex64 {
    let grid = p.grid();
    let n = grid.n();
    let nz = grid.nz();
    let vals = p.component(c);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut idx = 0;
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..nz {
                let phase = -TWO_PI
                    * (kx as f64 * ix as f64 / n as f64
                        + ky as f64 * iy as f64 / n as f64
                        + kz as f64 * iz as f64 / nz as f64);
                acc += Complex64::new(phase.cos(), phase.sin()) * vals[idx];
                idx += 1;
            }
        }
    }
    acc * TWO_PI.powi(3).sqrt() / grid.len() as f64
}

#[test]
fn forward_matches_direct_dft_oracle() {
    let grid = Grid::new(8, 3).unwrap();
    let fft = Fft3::new(grid);
    let p = random_physical(grid, 11);
    let s = fft.forward(&p);
    for &(kx, ky, kz) in &[(0i64, 0i64, 0i64), (1, 0, 0), (3, -2, 1), (-4, 4, -3), (2, 2, 2)] {
        let ix = kx.rem_euclid(8) as usize;
        let iy = ky.rem_euclid(8) as usize;
        let iz = kz.rem_euclid(8) as usize;
        for c in 0..3 {
            let got = s.coeff(c, ix, iy, iz);
            let want = dft_oracle(&p, c, kx, ky, kz);
            assert!(
                (got - want).norm() < 1e-12 * (1.0 + want.norm()),
                "k=({kx},{ky},{kz}) c={c}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn single_sine_mode_support_and_norms() {
    let grid = Grid::new(16, 3).unwrap();
    let fft = Fft3::new(grid);
    let p = PhysicalField::from_fn(grid, |x, _y, _z| [0.0, x.sin(), 0.0]);
    let s = fft.forward(&p);
    // support only on k = +-(1,0,0), component 1
    for c in 0..3 {
        for ix in 0..16 {
            for iy in 0..16 {
                for iz in 0..16 {
                    let v = s.coeff(c, ix, iy, iz).norm();
                    if c == 1 && iy == 0 && iz == 0 && (ix == 1 || ix == 15) {
                        assert!((v - TWO_PI.powi(3).sqrt() / 2.0).abs() < 1e-12);
                    } else {
                        assert!(v < 1e-13, "spurious coefficient at c={c} ({ix},{iy},{iz})");
                    }
                }
            }
        }
    }
    // ||u||^2 = (2pi)^3/2 and ||grad u||^2 = (2pi)^3/2 for u = sin(x) e2
    let want = TWO_PI.powi(3) / 2.0;
    assert!((norm_l2_sq(&s) - want).abs() < 1e-12 * want);
    assert!((norm_h1_semi_sq(&s) - want).abs() < 1e-12 * want);
    // quadrature L2 on the physical side agrees with Parseval
    assert!((p.quadrature_l2() - want.sqrt()).abs() < 1e-12 * want.sqrt());
}

#[test]
fn constant_field_lives_at_k_zero_only() {
    let grid = Grid::new(8, 2).unwrap();
    let fft = Fft3::new(grid);
    let p = PhysicalField::from_fn(grid, |_, _, _| [0.7, -0.3, 0.1]);
    let mut s = fft.forward(&p);
    let total = norm_l2_sq(&s);
    let mean = s.coeff(0, 0, 0, 0).norm_sqr() + s.coeff(1, 0, 0, 0).norm_sqr()
        + s.coeff(2, 0, 0, 0).norm_sqr();
    assert!((total - mean).abs() < 1e-12 * total.max(1.0));
    s.zero_mean();
    assert!(norm_l2_sq(&s) < 1e-24);
}

#[test]
fn round_trip_is_identity() {
    for dims in [2, 3] {
        let grid = Grid::new(16, dims).unwrap();
        let fft = Fft3::new(grid);
        let p = random_physical(grid, 5);
        let back = fft.inverse(&fft.forward(&p));
        let mut max_err = 0.0_f64;
        let mut max_val = 0.0_f64;
        for c in 0..3 {
            for (a, b) in p.component(c).iter().zip(back.component(c)) {
                max_err = max_err.max((a - b).abs());
                max_val = max_val.max(a.abs());
            }
        }
        assert!(max_err <= 1e-13 * max_val, "dims={dims}: {max_err} vs {max_val}");
    }
}

#[test]
fn inverse_of_single_mode_is_a_sine() {
    let grid = Grid::new(16, 3).unwrap();
    let fft = Fft3::new(grid);
    let mut s = SpectralField::zeros(grid);
    // c(+-(1,0,0)) = -+ i (2pi)^{3/2}/2 gives u = sin(x) e2 exactly
    let a = TWO_PI.powi(3).sqrt() / 2.0;
    s.set_coeff(1, 1, 0, 0, Complex64::new(0.0, -a));
    s.set_coeff(1, 15, 0, 0, Complex64::new(0.0, a));
    let p = fft.inverse(&s);
    let n = grid.n();
    for ix in 0..n {
        let x = TWO_PI * ix as f64 / n as f64;
        let got = p.component(1)[grid.index(ix, 3, 7)];
        assert!((got - x.sin()).abs() < 1e-13);
    }
}

#[test]
fn leray_projection_annihilates_gradients() {
    let grid = Grid::new(16, 3).unwrap();
    // gradient field: c(k) = i k phi(k) for a random scalar phi
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mut s = SpectralField::zeros(grid);
    let n = grid.n();
    for ix in 0..n {
        let kx = Grid::freq_of(ix, n) as f64;
        for iy in 0..n {
            let ky = Grid::freq_of(iy, n) as f64;
            for iz in 0..n {
                let kz = Grid::freq_of(iz, n) as f64;
                let phi = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let i = Complex64::new(0.0, 1.0);
                s.set_coeff(0, ix, iy, iz, i * kx * phi);
                s.set_coeff(1, ix, iy, iz, i * ky * phi);
                s.set_coeff(2, ix, iy, iz, i * kz * phi);
            }
        }
    }
    let norm_before = norm_l2(&s);
    let projected = s.project();
    assert!(norm_l2(&projected) <= 1e-13 * norm_before);
}

#[test]
fn leray_projection_single_mode_by_hand() {
    let grid = Grid::new(8, 3).unwrap();
    let mut s = SpectralField::zeros(grid);
    s.set_coeff(0, 1, 0, 0, Complex64::new(1.0, 0.0));
    s.set_coeff(1, 1, 0, 0, Complex64::new(1.0, 0.0));
    let p = s.project();
    assert_eq!(p.coeff(0, 1, 0, 0), Complex64::new(0.0, 0.0));
    assert_eq!(p.coeff(1, 1, 0, 0), Complex64::new(1.0, 0.0));
}

#[test]
fn leray_projection_idempotent_orthogonal_selfadjoint() {
    let grid = Grid::new(16, 3).unwrap();
    let fft = Fft3::new(grid);
    let mut v = fft.forward(&random_physical(grid, 17));
    v.zero_mean();
    let pv = v.project();
    let ppv = pv.project();
    // idempotence
    let mut diff = 0.0_f64;
    for c in 0..3 {
        for (a, b) in pv.component(c).iter().zip(ppv.component(c)) {
            diff = diff.max((a - b).norm());
        }
    }
    assert!(diff <= 1e-14 * norm_l2(&pv).max(1.0));
    // divergence residual of the projection
    assert!(pv.div_residual() <= 1e-13);
    // orthogonality <Pv, v - Pv> <= 1e-12 ||v||^2
    let mut resid = v.clone();
    resid.add_scaled(&pv, -1.0);
    let ip = inner_l2(&pv, &resid).unwrap();
    assert!(ip.abs() <= 1e-12 * norm_l2_sq(&v));
    // self-adjointness: <Pa, b> = <a, Pb>
    let mut b = fft.forward(&random_physical(grid, 18));
    b.zero_mean();
    let lhs = inner_l2(&pv, &b).unwrap();
    let rhs = inner_l2(&v, &b.project()).unwrap();
    assert!((lhs - rhs).abs() <= 1e-12 * norm_l2(&v) * norm_l2(&b));
}

#[test]
fn stokes_multiplies_by_k_squared() {
    let grid = Grid::new(8, 3).unwrap();
    let mut s = SpectralField::zeros(grid);
    s.set_coeff(1, 1, 0, 0, Complex64::new(2.0, 1.0)); // |k|^2 = 1
    s.set_coeff(2, 2, 1, 0, Complex64::new(1.0, 0.0)); // |k|^2 = 5
    let a = s.stokes_apply();
    assert_eq!(a.coeff(1, 1, 0, 0), Complex64::new(2.0, 1.0));
    assert_eq!(a.coeff(2, 2, 1, 0), Complex64::new(5.0, 0.0));
}

#[test]
fn stokes_pairing_equals_gradient_norm() {
    let grid = Grid::new(16, 3).unwrap();
    let u = random_solenoidal(grid, 23);
    let au = u.stokes_apply();
    let pairing = inner_l2(&au, &u).unwrap();
    let grad = norm_h1_semi_sq(&u);
    assert!((pairing - grad).abs() <= 1e-12 * grad);
}

#[test]
fn galerkin_truncation_mode_count_and_idempotence() {
    let grid = Grid::new(16, 3).unwrap();
    let mut s = SpectralField::zeros(grid);
    let one = Complex64::new(1.0, 0.0);
    for c in 0..3 {
        for i in 0..grid.len() {
            s.component_mut(c)[i] = one;
        }
    }
    s.zero_mean();
    // m = 1 keeps exactly the six |k|^2 = 1 modes
    let t = s.galerkin_truncate(1.0);
    let count = t.component(0).iter().filter(|v| v.norm() > 0.0).count();
    assert_eq!(count, 6);
    // m below 1 annihilates mean-free fields
    assert_eq!(norm_l2_sq(&s.galerkin_truncate(0.5)), 0.0);
    // cutoff beyond the grid is the identity
    let full = s.galerkin_truncate(3.0 * 64.0 + 1.0);
    assert_eq!(norm_l2_sq(&full), norm_l2_sq(&s));
    // idempotent and commutes with projection
    let a = s.galerkin_truncate(9.0).galerkin_truncate(9.0);
    let b = s.galerkin_truncate(9.0);
    for c in 0..3 {
        assert_eq!(a.component(c), b.component(c));
    }
    let pa = s.project().galerkin_truncate(9.0);
    let ap = s.galerkin_truncate(9.0).project();
    for c in 0..3 {
        for (x, y) in pa.component(c).iter().zip(ap.component(c)) {
            assert!((x - y).norm() < 1e-15);
        }
    }
}

#[test]
fn galerkin_tail_bound() {
    // ||(I - P_m) u||^2 <= ||grad u||^2 / m_cutoff
    let grid = Grid::new(16, 3).unwrap();
    let u = random_solenoidal(grid, 29);
    for m in [1.0, 4.0, 9.0, 16.0] {
        let mut tail = u.clone();
        tail.add_scaled(&u.galerkin_truncate(m), -1.0);
        assert!(norm_l2_sq(&tail) <= norm_h1_semi_sq(&u) / m * (1.0 + 1e-12));
    }
}

#[test]
fn dealias_masks_high_modes_and_preserves_low() {
    let grid = Grid::new(16, 3).unwrap();
    let fft = Fft3::new(grid);
    let mut s = fft.forward(&random_physical(grid, 31));
    s.zero_mean();
    let d = s.dealias();
    // idempotent
    let dd = d.dealias();
    for c in 0..3 {
        assert_eq!(d.component(c), dd.component(c));
    }
    // Parseval partition: retained energy unchanged, removed energy accounted
    let n = grid.n() as i64;
    let mut kept = 0.0;
    for c in 0..3 {
        let comp = s.component(c);
        for (i, v) in comp.iter().enumerate() {
            let (ix, iy, iz) = grid.unravel(i);
            let f = |q: usize, len: usize| Grid::freq_of(q, len).abs();
            let inside =
                3 * f(ix, 16) <= n && 3 * f(iy, 16) <= n && 3 * f(iz, 16) <= n;
            if inside {
                kept += v.norm_sqr();
            }
        }
    }
    assert!((norm_l2_sq(&d) - kept).abs() <= 1e-12 * kept.max(1.0));
    // identity on fields already inside the 2/3 ball
    let d2 = d.dealias();
    for c in 0..3 {
        assert_eq!(d.component(c), d2.component(c));
    }
}

#[test]
fn poincare_chain_on_mean_free_fields() {
    let grid = Grid::new(16, 3).unwrap();
    for seed in [41, 43, 47] {
        let u = random_solenoidal(grid, seed);
        let l2 = norm_l2_sq(&u);
        let h1 = norm_h1_semi_sq(&u);
        let st = norm_stokes_sq(&u);
        assert!(l2 <= h1 * (1.0 + 1e-12));
        assert!(h1 <= st * (1.0 + 1e-12));
    }
}

#[test]
fn inner_product_consistency_and_grid_mismatch() {
    let grid = Grid::new(16, 3).unwrap();
    let u = random_solenoidal(grid, 53);
    let ip = inner_l2(&u, &u).unwrap();
    let n2 = norm_l2(&u).powi(2);
    assert!((ip - n2).abs() <= 1e-13 * n2);
    let other = SpectralField::zeros(Grid::new(8, 3).unwrap());
    assert!(inner_l2(&u, &other).is_err());
}

#[test]
fn hermitian_enforce_is_identity_on_symmetric_fields() {
    let grid = Grid::new(8, 3).unwrap();
    let fft = Fft3::new(grid);
    let s = fft.forward(&random_physical(grid, 59));
    let mut t = s.clone();
    t.hermitian_enforce();
    for c in 0..3 {
        assert_eq!(s.component(c), t.component(c));
    }
}

#[test]
fn checkpoint_round_trip_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    for dims in [2, 3] {
        let grid = Grid::new(8, dims).unwrap();
        let u = random_solenoidal(grid, 61 + dims as u64);
        let path = dir.path().join(format!("ck{dims}.bin"));
        write_checkpoint(&path, &u, 1.25).unwrap();
        let (v, t) = read_checkpoint(&path).unwrap();
        assert_eq!(t, 1.25);
        for c in 0..3 {
            assert_eq!(u.component(c), v.component(c), "dims={dims} component {c}");
        }
        // write-read-write produces identical bytes
        let path2 = dir.path().join(format!("ck{dims}b.bin"));
        write_checkpoint(&path2, &v, t).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }
}

#[test]
fn checkpoint_rejects_bad_magic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.bin");
    std::fs::write(&path, b"NOPE-this-is-not-a-checkpoint").unwrap();
    assert!(read_checkpoint(&path).is_err());
}
