use super::*;

fn batch_mean_se(xs: &[f64], batches: usize) -> (f64, f64) {
    let size = xs.len() / batches;
    let means: Vec<f64> = xs.chunks_exact(size).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    let b = means.len() as f64;
    let m = means.iter().sum::<f64>() / b;
    let v = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1.0);
    (m, (v / b).sqrt())
}

fn garch11(w: f64, u: f64, b: f64, a: f64, eps: DistSpec, n: usize) -> ModelConfig {
    ModelConfig { family: Family::Garch(GarchSpec::garch11(w, u, b, a)), innovation: eps, transform: TransformSpec::identity(), n }
}

fn geometric_linear(n: usize) -> ModelConfig {
    ModelConfig {
        family: Family::Linear(LinearSpec {
            kernel: Kernel::Geometric { r: 0.5 },
            inner: InnerMap::Identity,
            outer: OuterMap::Identity,
            m_max: Some(60),
            burn_in: None,
        }),
        innovation: DistSpec::StandardNormal,
        transform: TransformSpec::identity(),
        n,
    }
}

const PM1: DistSpec = DistSpec::TwoPoint { p: 0.5, x_lo: -1.0, x_hi: 1.0 };

#[test]
fn degenerate_garch_is_iid() {
    let cfg = garch11(1.0, 0.0, 0.0, 0.0, PM1, 500);
    let (x, v) = simulate_path(&cfg, &StreamKey::new(1)).unwrap();
    assert!(v.iter().all(|&v| v == 1.0));
    assert!(x.iter().all(|&x| x == 1.0 || x == -1.0));
}

#[test]
fn garch_stationary_second_moment() {
    let cfg = garch11(0.1, 0.1, 0.8, 0.0, DistSpec::StandardNormal, 1_000_000);
    let (_, v) = simulate_path(&cfg, &StreamKey::new(2)).unwrap();
    let v2: Vec<f64> = v.iter().map(|v| v * v).collect();
    let (m, se) = batch_mean_se(&v2, 100);
    assert!((m - 1.0).abs() < 3.0 * se, "E V^2 = {m} se {se}");
}

#[test]
fn linear_variance() {
    let cfg = geometric_linear(1_000_000);
    let p = Simulator::new(&cfg).unwrap().path(&StreamKey::new(3)).unwrap();
    let y2: Vec<f64> = p.y.iter().map(|y| y * y).collect();
    let (m, se) = batch_mean_se(&y2, 100);
    assert!((m - 4.0 / 3.0).abs() < 3.0 * se, "Var Y = {m} se {se}");
}

#[test]
fn recursion_matches_series_along_path() {
    let cfg = garch11(0.1, 0.1, 0.5, 0.0, DistSpec::StandardNormal, 50);
    let sim = Simulator::new(&cfg).unwrap();
    let key = StreamKey::new(4);
    let eps = sim.innovations(&key);
    let p = sim.path_from(&eps).unwrap();
    let spec = GarchSpec::garch11(0.1, 0.1, 0.5, 0.0);
    for k in [10, 30, 49] {
        let t = sim.burn_in() + k - 1; // array position of V_k
        let past: Vec<f64> = (1..=60).map(|i| eps[t - i]).collect();
        let series = garch_volterra_eval(&spec, &past, 60).unwrap();
        let h = p.v[k] * p.v[k];
        assert!((series - h).abs() <= 1e-10 * h, "k={k}: {series} vs {h}");
    }
}

#[test]
fn coupled_base_equals_plain_path() {
    let cfg = garch11(0.1, 0.1, 0.8, 0.1, DistSpec::StandardNormal, 20);
    let key = StreamKey::with_path(5, &[0, 1]);
    let (x, _) = simulate_path(&cfg, &key).unwrap();
    let (a, b) = Simulator::new(&cfg).unwrap().coupled(3, CouplingMode::Star, &key).unwrap();
    assert_eq!(x, a.x);
    assert_ne!(a.x, b.x);
    // the innovation at time n is never replaced
    assert!((a.x[19] / a.v[19] - b.x[19] / b.v[19]).abs() < 1e-15);
}

#[test]
fn memoryless_garch_has_no_coupling_difference() {
    let cfg = garch11(0.7, 0.0, 0.0, 0.0, DistSpec::StandardNormal, 10);
    for lag in 1..10 {
        for mode in [CouplingMode::Star, CouplingMode::Prime] {
            let (a, b) = simulate_coupled(&cfg, lag, mode, &StreamKey::new(6)).unwrap();
            assert_eq!(a[9], b[9]);
        }
    }
}

#[test]
fn long_lag_beyond_truncation_keeps_paths_equal() {
    let mut cfg = geometric_linear(5);
    if let Family::Linear(s) = &mut cfg.family {
        s.m_max = Some(3);
    }
    let (a, b) = simulate_coupled(&cfg, 10, CouplingMode::Star, &StreamKey::new(7)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn linear_coupling_norm() {
    let cfg = geometric_linear(4);
    let sim = Simulator::new(&cfg).unwrap();
    let n = 40_000;
    let d2: Vec<f64> = (0..n)
        .map(|r| {
            let (a, b) = sim.coupled(1, CouplingMode::Star, &StreamKey::with_path(8, &[r])).unwrap();
            (a.x[3] - b.x[3]).powi(2)
        })
        .collect();
    let m = d2.iter().sum::<f64>() / n as f64;
    let sd = (d2.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    let lam = m.sqrt();
    let se = sd / (n as f64).sqrt() / (2.0 * lam);
    assert!((lam - (2.0f64 / 3.0).sqrt()).abs() < 3.0 * se, "{lam} se {se}");
}

#[test]
fn centering_examples() {
    let key = StreamKey::new(9);
    let sym = garch11(0.1, 0.1, 0.8, 0.1, DistSpec::StandardNormal, 8);
    let c = estimate_centering(&sym, 2000, &key, 0).unwrap();
    assert!(c.mean.abs() < 3.0 * c.se);

    let mut sq = garch11(1.0, 0.0, 0.0, 0.0, DistSpec::StandardNormal, 8);
    sq.transform = TransformSpec::new(TransformKind::Polynomial { coeffs: vec![0.0, 0.0, 1.0] });
    let c = estimate_centering(&sq, 5000, &key, 0).unwrap();
    assert!((c.mean - 1.0).abs() < 3.0 * c.se, "{c:?}");

    let mut comp = garch11(1.0, 0.0, 0.0, 0.0, PM1, 4);
    comp.transform = TransformSpec::compensator(2);
    let c = estimate_centering(&comp, 5000, &key, 0).unwrap();
    assert!((c.mean + 0.25).abs() < 3.0 * c.se.max(1e-12), "{c:?}");

    assert!(matches!(estimate_centering(&sym, 10, &key, 0), Err(Error::SampleSize { .. })));
}

#[test]
fn explosive_parameters_diverge() {
    let cfg = garch11(0.1, 0.1, 5.0, 0.0, DistSpec::StandardNormal, 10);
    assert!(matches!(simulate_path(&cfg, &StreamKey::new(10)), Err(Error::Divergence { .. })));
}

#[test]
fn short_burn_in_rejected() {
    let mut cfg = garch11(0.1, 0.1, 0.8, 0.1, DistSpec::StandardNormal, 10);
    if let Family::Garch(s) = &mut cfg.family {
        s.burn_in = Some(10);
    }
    assert_eq!(simulate_path(&cfg, &StreamKey::new(1)).unwrap_err(), Error::BurnIn { got: 10, min: MIN_BURN_IN });
}

#[test]
fn stationarity_halves() {
    let families = vec![
        garch11(0.1, 0.1, 0.8, 0.1, DistSpec::StandardNormal, 400_000),
        geometric_linear(400_000),
        ModelConfig {
            family: Family::Iterated(IteratedSpec {
                a: 0.5,
                b: 0.3,
                c: 0.1,
                d: 0.2,
                v_min: None,
                v_max: None,
                v0: 0.0,
                burn_in: None,
            }),
            innovation: DistSpec::Uniform { a: -1.0, b: 1.0 },
            transform: TransformSpec::identity(),
            n: 400_000,
        },
        ModelConfig {
            family: Family::Volterra(VolterraSpec { orders: 2, kernel: Kernel::Geometric { r: 0.4 }, m_max: Some(30), burn_in: None }),
            innovation: DistSpec::StandardNormal,
            transform: TransformSpec::identity(),
            n: 400_000,
        },
    ];
    for cfg in families {
        let (_, v) = simulate_path(&cfg, &StreamKey::new(11)).unwrap();
        let (a, b) = v.split_at(v.len() / 2);
        for pow in [1, 2] {
            let fa: Vec<f64> = a.iter().map(|x| x.powi(pow)).collect();
            let fb: Vec<f64> = b.iter().map(|x| x.powi(pow)).collect();
            let (ma, sa) = batch_mean_se(&fa, 50);
            let (mb, sb) = batch_mean_se(&fb, 50);
            let z = (ma - mb).abs() / (sa * sa + sb * sb).sqrt();
            assert!(z < 4.0, "{:?} power {pow}: z = {z}", cfg.family);
        }
    }
}

#[test]
fn volterra_matches_direct_expansion() {
    let cfg = ModelConfig {
        family: Family::Volterra(VolterraSpec { orders: 3, kernel: Kernel::List { coeffs: vec![0.5, -0.3, 0.2, 0.1] }, m_max: None, burn_in: None }),
        innovation: DistSpec::StandardNormal,
        transform: TransformSpec::identity(),
        n: 6,
    };
    let sim = Simulator::new(&cfg).unwrap();
    let eps = sim.innovations(&StreamKey::new(12));
    let p = sim.path_from(&eps).unwrap();
    let kappa = [0.5, -0.3, 0.2, 0.1];
    for k in 0..6 {
        let t = sim.burn_in() + k - 1;
        let z: Vec<f64> = (0..4).map(|j| kappa[j] * eps[t - j]).collect();
        let mut direct = 0.0;
        for mask in 1u32..16 {
            if mask.count_ones() <= 3 {
                direct += (0..4).filter(|b| mask >> b & 1 == 1).map(|b| z[b]).product::<f64>();
            }
        }
        assert!((p.v[k] - direct).abs() < 1e-14);
    }
}

#[test]
fn config_round_trips_through_json() {
    let cfg = garch11(0.1, 0.1, 0.8, 0.1, DistSpec::CenteredExponential { rate: 1.0 }, 64);
    let s = serde_json::to_string(&cfg).unwrap();
    let back: ModelConfig = serde_json::from_str(&s).unwrap();
    assert_eq!(cfg, back);
}
