use tensor_hw::ensembles::{
    sample_symmetric_bernoulli, xi_closed_form, xi_monte_carlo, EigenLaw, Ensemble, EnsembleSpec, Family, SeedPolicy,
    Stream,
};
use tensor_hw::verify::empirical_tail;

fn spec(family: Family, low: f64, high: f64) -> EnsembleSpec {
    EnsembleSpec { dims: vec![2], n: 2, family, eig_low: low, eig_high: high, law: EigenLaw::Uniform, shared_unitary_seed: 2, mean_zero: false }
}

#[test]
fn eigenvalues_pass_kolmogorov_smirnov() {
    let e = Ensemble::new(spec(Family::Commuting, 0.2, 1.4)).unwrap();
    let seeds = SeedPolicy::new(17);
    let mut v: Vec<f64> = (0..5000).flat_map(|i| e.draw_eigenvalues(&mut seeds.rng(Stream::Evaluation, i))).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = (x - 0.2) / 1.2;
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // 99.9% critical value of the one-sample statistic.
    assert!(d < 1.95 / n.sqrt(), "KS distance {d}");
}

#[test]
fn copies_are_uncorrelated() {
    let e = Ensemble::new(spec(Family::Commuting, 0.0, 1.0)).unwrap();
    let seeds = SeedPolicy::new(5);
    let n = 4000;
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|t| {
            let c = e.independent_copies(2, &seeds, t).unwrap();
            (c[0][0].trace().unwrap().re, c[1][0].trace().unwrap().re)
        })
        .collect();
    let mean = |f: fn(&(f64, f64)) -> f64| pairs.iter().map(f).sum::<f64>() / n as f64;
    let (mx, my) = (mean(|p| p.0), mean(|p| p.1));
    let cov = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / n as f64;
    let vx = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>() / n as f64;
    let vy = pairs.iter().map(|p| (p.1 - my).powi(2)).sum::<f64>() / n as f64;
    let r = cov / (vx * vy).sqrt();
    assert!(r.abs() < 4.0 / (n as f64).sqrt(), "correlation {r}");
}

#[test]
fn sample_mean_follows_clt() {
    for family in [Family::Commuting, Family::GenericHermitian, Family::Scalar] {
        let e = Ensemble::new(spec(family, -0.5, 2.0)).unwrap();
        let seeds = SeedPolicy::new(23);
        let n = 20_000;
        let x: Vec<f64> = (0..n).map(|i| e.sample(&mut seeds.rng(Stream::Evaluation, i)).trace().unwrap().re / 2.0).collect();
        let m = x.iter().sum::<f64>() / n as f64;
        let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!((m - 0.75).abs() < 4.0 * sd / (n as f64).sqrt(), "{family:?}: mean {m}");
    }
}

#[test]
fn fair_sign_tail_is_half() {
    let (t, excluded) =
        empirical_tail(|rng| Ok(sample_symmetric_bernoulli(1, rng)[0]), &[0.5], 100_000, &SeedPolicy::new(3)).unwrap();
    assert_eq!(excluded, 0);
    assert!((0.49..=0.51).contains(&t[0].p_hat), "{}", t[0].p_hat);
    assert!(t[0].ci_low <= 0.5 && 0.5 <= t[0].ci_high);
}

#[test]
fn xi_monte_carlo_agrees_with_closed_form() {
    let e = Ensemble::new(spec(Family::Commuting, 0.1, 1.0)).unwrap();
    let exact = xi_closed_form(e.spec(), e.shared_basis()).unwrap().xi;
    let est = xi_monte_carlo(|rng| e.sample(rng), 20_000, &SeedPolicy::new(6), Stream::Pilot).unwrap();
    assert!((est.statistic.xi - exact).abs() <= 4.0 * est.std_error + 1e-3, "{} vs {exact}", est.statistic.xi);
}

#[test]
fn same_seed_same_draws() {
    let e = Ensemble::new(spec(Family::GenericHermitian, 0.0, 1.0)).unwrap();
    let a = e.independent_copies(3, &SeedPolicy::new(9), 41).unwrap();
    let b = e.independent_copies(3, &SeedPolicy::new(9), 41).unwrap();
    let c = e.independent_copies(3, &SeedPolicy::new(10), 41).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
