use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weylsim::kmgr::{default_quadrature_order, survival_kmgr, Kernel1D, KernelMethod};
use weylsim::spectral::{survival_spectral, SeriesBudget};
use weylsim::stochastic::{discretisation_allowance, simulate_survival, McConfig};
use weylsim::{ChamberPoint, ChamberSpec, WeylType};

fn interior_point(rng: &mut impl Rng, spec: &ChamberSpec) -> Vec<f64> {
    let w = spec.half_width();
    loop {
        let mut x: Vec<f64> = (0..spec.k).map(|_| rng.random_range(-0.9 * w..0.9 * w)).collect();
        if spec.weyl_type != WeylType::A {
            x.iter_mut().for_each(|v| *v = v.abs());
        }
        x.sort_by(f64::total_cmp);
        if spec.weyl_type == WeylType::D && rng.random::<bool>() {
            x[0] = -x[0];
        }
        if spec.contains(&x).unwrap() {
            return x;
        }
    }
}

#[test]
fn spectral_and_kernel_routes_agree_within_their_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..36 {
        let z = WeylType::ALL[case % 3];
        let k = if z == WeylType::D { 2 + case % 2 } else { 1 + case % 3 };
        let r = rng.random_range(0.5..2.0);
        let t = r * r * rng.random_range(0.5..20.0);
        let spec = ChamberSpec::new(z, k, r).unwrap();
        let x = ChamberPoint::new(spec, interior_point(&mut rng, &spec)).unwrap();
        let s = survival_spectral(&spec, t, &x, SeriesBudget::default_cutoff(&spec, t)).unwrap();
        let kern = Kernel1D::with_defaults(t, r).unwrap();
        let q = survival_kmgr(&spec, t, &x, &kern, default_quadrature_order(&spec, t)).unwrap();
        let gap = (s.value - q.value).abs();
        assert!(
            gap <= s.error_bound + q.error_bound,
            "{z} k={k} r={r} t={t}: {} vs {} (bounds {} + {})",
            s.value,
            q.value,
            s.error_bound,
            q.error_bound
        );
    }
}

#[test]
fn both_kernel_series_give_the_same_survival() {
    let spec = ChamberSpec::new(WeylType::C, 2, 1.0).unwrap();
    let x = ChamberPoint::new(spec, vec![0.4, 0.9]).unwrap();
    for t in [0.3, 1.5] {
        let order = default_quadrature_order(&spec, t);
        let eig = Kernel1D::new(t, 1.0, KernelMethod::EigenSeries, 60).unwrap();
        let img = Kernel1D::new(t, 1.0, KernelMethod::ImageSeries, 12).unwrap();
        let a = survival_kmgr(&spec, t, &x, &eig, order).unwrap();
        let b = survival_kmgr(&spec, t, &x, &img, order).unwrap();
        assert!((a.value - b.value).abs() <= a.error_bound + b.error_bound, "t={t}");
    }
}

#[test]
fn monte_carlo_matches_the_exact_routes() {
    let cases: [(WeylType, usize, f64, f64, &[f64]); 6] = [
        (WeylType::A, 1, 1.0, 1.0, &[0.3]),
        (WeylType::A, 2, 1.2, 0.6, &[-0.4, 0.5]),
        (WeylType::C, 2, 1.0, 0.3, &[0.4, 0.9]),
        (WeylType::D, 2, 1.0, 0.3, &[-0.2, 0.7]),
        (WeylType::A, 3, 1.5, 0.5, &[-0.8, 0.0, 0.8]),
        (WeylType::C, 3, 1.5, 0.3, &[0.4, 0.9, 1.5]),
    ];
    for (z, k, r, t, x) in cases {
        let spec = ChamberSpec::new(z, k, r).unwrap();
        let p = ChamberPoint::new(spec, x.to_vec()).unwrap();
        let exact = survival_spectral(&spec, t, &p, SeriesBudget::default_cutoff(&spec, t)).unwrap();
        let mut cfg = McConfig::for_horizon(t, 17);
        cfg.paths = 40_000;
        cfg.dt = 1e-3;
        let mc = simulate_survival(&spec, t, &p, &cfg).unwrap();
        let tol = 3.0 * mc.std_error + discretisation_allowance(cfg.dt, r) + exact.error_bound;
        assert!(
            (mc.value - exact.value).abs() <= tol,
            "{z} k={k}: mc {} ± {} vs {}",
            mc.value,
            mc.std_error,
            exact.value
        );
    }
}
