use proptest::prelude::*;
use tensor_hw::bounds::{
    chernoff_bound, coupling_bound, diag_bound, hanson_wright_bound, scalar_hw_reference, BoundInputs, ChernoffParams,
    TSearch, TermStats,
};
use tensor_hw::quadform::ThetaPolicy;

/// Minimum of `f` over a dense log grid on `[lo, hi]`, linear domain.
fn dense_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let n = 200_000;
    (0..=n)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / n as f64).exp())
        .map(f)
        .fold(f64::INFINITY, f64::min)
}

fn assert_close_to_grid(value: f64, grid: f64) {
    assert!(value <= grid * (1.0 + 1e-9), "optimizer {value} above grid {grid}");
    assert!(value >= grid * (1.0 - 1e-3), "optimizer {value} far below grid {grid}");
}

fn chernoff_params(r: f64, stats: Vec<TermStats>, a: Vec<f64>, s: f64, k: usize) -> ChernoffParams {
    ChernoffParams { s, a, k, r, c_cher: 1.0, stats, search: TSearch::default() }
}

#[test]
fn chernoff_matches_dense_grid() {
    let stats = vec![TermStats { mean_sigma1: 0.2, xi: 0.05 }, TermStats { mean_sigma1: 0.1, xi: 0.02 }];
    let p = chernoff_params(1.0, stats.clone(), vec![0.5, 1.0, 0.25], 1.5, 2);
    let theta = 4.0;
    let (m, k, s) = (2.0, 2.0, 1.5);
    let oracle = |t: f64| {
        let mut sum = k * 0.5f64.powf(s);
        for (l, a_l) in [(1.0, 1.0f64), (2.0, 0.25)] {
            for st in &stats {
                let e = (m * l * s * 1.0 * t).exp() - 1.0;
                sum += k * a_l.powf(l * s) / m * (1.0 + e * st.mean_sigma1 + e * st.xi);
            }
        }
        3f64.powf(s - 1.0) * (-theta * t).exp() * sum
    };
    // Largest exponent coefficient is m * n * s * R = 6.
    let grid = dense_min(oracle, 1e-6, 700.0 / 6.0);
    assert_close_to_grid(chernoff_bound(&p, theta).unwrap().value, grid);
}

fn hw_inputs() -> BoundInputs {
    let st = |a: f64, b: f64| TermStats { mean_sigma1: a, xi: b };
    BoundInputs {
        n: 3,
        a: vec![0.0, 1.0, 0.5],
        k: 1,
        theta_total: 0.0,
        theta: Vec::new(),
        r_d: 0.6,
        r_c: 0.5,
        k_table: vec![vec![1.0, 1.0]; 3],
        c_cher: 1.0,
        d2: 8.0,
        diag_stats: vec![st(0.05, 0.01), st(0.04, 0.02), st(0.03, 0.01)],
        coupling_stats: vec![vec![st(0.02, 0.01); 2]; 3],
        search: TSearch::default(),
    }
    .with_theta(30.0, ThetaPolicy::Equal)
    .unwrap()
}

#[test]
fn diagonal_part_matches_dense_grid() {
    let inp = hw_inputs();
    for j in 1..=2 {
        let rate = inp.theta[j - 1] / (2f64.powi(j as i32) * inp.a[j]);
        let oracle = |t: f64| {
            let sum: f64 = inp
                .diag_stats
                .iter()
                .map(|s| (1.0 / 3.0) * (1.0 + ((3.0 * inp.r_d * t).exp() - 1.0) * (s.mean_sigma1 + s.xi)))
                .sum();
            (-rate * t).exp() * sum
        };
        let grid = dense_min(oracle, 1e-6, 700.0 / (3.0 * inp.r_d));
        assert_close_to_grid(diag_bound(&inp, j).unwrap().value, grid);
    }
}

#[test]
fn coupling_part_matches_dense_grid() {
    let inp = hw_inputs();
    for j in 1..=2 {
        let mut total = 0.0;
        for i in 0..3 {
            let rate = inp.theta[j - 1] / (2f64.powi(j as i32) * 3f64.powi(j as i32 - 1) * inp.a[j] * inp.d2 * inp.k_table[i][j - 1]);
            let row = &inp.coupling_stats[i];
            let oracle = |t: f64| {
                let sum: f64 = row
                    .iter()
                    .map(|s| 0.5 * (1.0 + ((2.0 * inp.r_c * t).exp() - 1.0) * (s.mean_sigma1 + s.xi)))
                    .sum();
                inp.d2 * (-rate * t).exp() * sum
            };
            total += dense_min(oracle, 1e-6, 700.0 / (2.0 * inp.r_c));
        }
        assert_close_to_grid(coupling_bound(&inp, j).unwrap().value, total);
    }
    let sum: f64 = (1..=2).map(|j| diag_bound(&inp, j).unwrap().value + coupling_bound(&inp, j).unwrap().value).sum();
    assert!((hanson_wright_bound(&inp).unwrap().value - sum).abs() <= 1e-12 * sum);
}

#[test]
fn scalar_embedding_reduces_to_chernoff() {
    let st = TermStats { mean_sigma1: 0.3, xi: 0.1 };
    let inp = BoundInputs {
        n: 1,
        a: vec![0.0, 1.0],
        k: 1,
        theta_total: 0.0,
        theta: Vec::new(),
        r_d: 1.0,
        r_c: 1.0,
        k_table: vec![vec![1.0]],
        c_cher: 1.0,
        d2: 8.0,
        diag_stats: vec![st],
        coupling_stats: vec![vec![]],
        search: TSearch::default(),
    };
    let p = chernoff_params(1.0, vec![st], vec![0.0, 1.0], 1.0, 1);
    for theta in [0.5, 0.8, 0.95] {
        // The diagonal threshold is theta / 2 for j = 1.
        let hw = hanson_wright_bound(&inp.with_theta(theta, ThetaPolicy::Equal).unwrap()).unwrap().value;
        let ch = chernoff_bound(&p, theta / 2.0).unwrap().value;
        assert!((hw - ch).abs() <= 1e-12 * ch, "{hw} vs {ch}");
    }
}

#[test]
fn scalar_reference_by_hand() {
    let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    // ||I||_HS = sqrt 2, ||I||_op = 1: exponent min(4 / sqrt 2, 2) = 2.
    let v = scalar_hw_reference(&id, 1.0, 2.0, 1.0).unwrap();
    assert!((v - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
    assert_eq!(scalar_hw_reference(&[vec![0.0]], 1.0, 1.0, 1.0).unwrap(), 0.0);
}

#[test]
fn ky_fan_order_two_can_fall_below_a_deterministic_tail() {
    // X = I over 2 x 2 with R = 1: ||X||_(2) = 2 >= 1.5 surely, yet the
    // exponent e^{-1.5 t} e^{t} decays, so the infimum is near zero.
    let p = chernoff_params(1.0, vec![TermStats { mean_sigma1: 1.0, xi: 0.0 }], vec![0.0, 1.0], 1.0, 2);
    let b = chernoff_bound(&p, 1.5).unwrap();
    assert!(b.value < 1e-100 && b.at_boundary);
    let k1 = chernoff_params(1.0, vec![TermStats { mean_sigma1: 1.0, xi: 0.0 }], vec![0.0, 1.0], 1.0, 1);
    assert!(chernoff_bound(&k1, 0.9).unwrap().value >= 1.0 - 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chernoff_monotone_in_inputs(
        sigma in 0.0..1.0f64,
        xi in 0.0..0.5f64,
        theta in 0.2..5.0f64,
        dtheta in 0.01..1.0f64,
        bump in 0.01..0.5f64,
    ) {
        let base = chernoff_params(1.0, vec![TermStats { mean_sigma1: sigma, xi }; 2], vec![0.0, 1.0], 1.0, 1);
        let v = chernoff_bound(&base, theta).unwrap().value;
        let tol = 1e-9 * v.max(1e-300);
        prop_assert!(chernoff_bound(&base, theta + dtheta).unwrap().value <= v + tol);
        let mut more = base.clone();
        more.stats[0].mean_sigma1 += bump;
        prop_assert!(chernoff_bound(&more, theta).unwrap().value >= v - tol);
        let mut more = base.clone();
        more.stats[1].xi += bump;
        prop_assert!(chernoff_bound(&more, theta).unwrap().value >= v - tol);
        let mut more = base.clone();
        more.k = 2;
        prop_assert!(chernoff_bound(&more, theta).unwrap().value >= v - tol);
    }

    #[test]
    fn main_bound_nonincreasing_in_threshold(theta in 1.0..40.0f64, dtheta in 0.1..10.0f64) {
        let inp = hw_inputs();
        let lo = hanson_wright_bound(&inp.with_theta(theta, ThetaPolicy::Equal).unwrap()).unwrap().value;
        let hi = hanson_wright_bound(&inp.with_theta(theta + dtheta, ThetaPolicy::Equal).unwrap()).unwrap().value;
        prop_assert!(hi <= lo * (1.0 + 1e-9));
    }
}
