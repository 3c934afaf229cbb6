use proptest::collection::vec;
use proptest::prelude::*;

use edgescout_core::evidence::{e_evidence, e_step, lambda_cap, run_eprocess};
use edgescout_core::io::{parse_matrix_csv, write_matrix_csv};
use edgescout_core::{bh_select, select, BhConfig, EdgePanel, HypothesisSpec, LambdaStrategy};

fn panel_strategy() -> impl Strategy<Value = EdgePanel> {
    (1usize..6, 1usize..20).prop_flat_map(|(n, t)| {
        (vec(0u8..=1, n * t), any::<bool>()).prop_map(move |(data, labelled)| {
            let labels = labelled.then(|| (0..n).map(|i| format!("e{i}")).collect());
            EdgePanel::new(n, t, data, labels).unwrap()
        })
    })
}

fn pvalues() -> impl Strategy<Value = Vec<f64>> {
    vec(
        prop_oneof![0.0..=1.0f64, Just(0.0), Just(1.0), Just(0.01), Just(0.05)],
        1..30,
    )
}

proptest! {
    #[test]
    fn panel_json_round_trip(panel in panel_strategy()) {
        let json = serde_json::to_string(&panel).unwrap();
        let back: EdgePanel = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, panel);
    }

    #[test]
    fn panel_matrix_csv_round_trip(panel in panel_strategy()) {
        let mut buf = Vec::new();
        write_matrix_csv(&panel, &mut buf).unwrap();
        let back = parse_matrix_csv(&buf).unwrap();
        prop_assert_eq!(back.data(), panel.data());
        prop_assert_eq!(back.n_edges(), panel.n_edges());
        for i in 0..panel.n_edges() {
            prop_assert_eq!(back.label(i), panel.label(i));
        }
    }

    #[test]
    fn bh_is_monotone_in_pvalues(p in pvalues(), shrink in vec(0.0..=1.0f64, 30), alpha in 0.01..0.5f64) {
        let q: Vec<f64> = p.iter().zip(&shrink).map(|(x, s)| x * s).collect();
        let cfg = BhConfig::new(alpha);
        let base = bh_select(&p, &cfg).unwrap();
        let lowered = bh_select(&q, &cfg).unwrap();
        for i in &base.rejected {
            prop_assert!(lowered.rejected.contains(i));
        }
    }

    #[test]
    fn bh_is_permutation_equivariant(p in pvalues(), seed in any::<u64>(), alpha in 0.01..0.5f64) {
        let n = p.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let permuted: Vec<f64> = perm.iter().map(|&j| p[j]).collect();
        let cfg = BhConfig::new(alpha);
        let a = bh_select(&p, &cfg).unwrap();
        let b = bh_select(&permuted, &cfg).unwrap();
        let mut mapped: Vec<usize> = b.rejected.iter().map(|&i| perm[i]).collect();
        mapped.sort_unstable();
        prop_assert_eq!(mapped, a.rejected);
        prop_assert_eq!(a.k_index, b.k_index);
    }

    #[test]
    fn randomized_rejects_a_superset(p in pvalues(), seed in any::<u64>(), alpha in 0.01..0.5f64) {
        let det = bh_select(&p, &BhConfig::new(alpha)).unwrap();
        let rnd = bh_select(&p, &BhConfig::randomized(alpha, seed)).unwrap();
        for i in &det.rejected {
            prop_assert!(rnd.rejected.contains(i));
        }
    }

    #[test]
    fn tied_pvalues_share_a_fate(p in pvalues(), alpha in 0.01..0.5f64) {
        let r = bh_select(&p, &BhConfig::new(alpha)).unwrap();
        for i in 0..p.len() {
            for j in 0..p.len() {
                if p[i] == p[j] {
                    prop_assert_eq!(r.rejected.contains(&i), r.rejected.contains(&j));
                }
            }
        }
    }

    #[test]
    fn e_step_is_valid(pi in 0.001..0.999f64, frac in 0.0..1.0f64) {
        let lambda = frac * lambda_cap(pi);
        let e0 = e_step(0, lambda, pi).unwrap();
        let e1 = e_step(1, lambda, pi).unwrap();
        prop_assert!(e0 > 0.0);
        prop_assert!(e0 <= e1);
        // Mean one at the boundary null.
        prop_assert!((pi * e1 + (1.0 - pi) * e0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_space_matches_direct_product(
        series in vec(0u8..=1, 1..=100),
        pi in 0.02..0.6f64,
        frac in 0.0..1.0f64,
    ) {
        let spec = HypothesisSpec::new(pi, 0.1).unwrap();
        let lambda = frac * lambda_cap(pi);
        let tr = run_eprocess(&series, &spec, &LambdaStrategy::constant(lambda), 1).unwrap();
        let mut direct = 1.0f64;
        for (t, &x) in series.iter().enumerate() {
            direct *= e_step(x, lambda, pi).unwrap();
            let got = tr.log_e[t + 1].exp();
            prop_assert!((got - direct).abs() <= 1e-9 * direct, "t={} {} vs {}", t, got, direct);
        }
    }

    #[test]
    fn plugin_lambda_is_predictable(
        series in vec(0u8..=1, 2..60),
        cut in 1usize..60,
        tail in vec(0u8..=1, 60),
    ) {
        let cut = cut.min(series.len());
        let spec = HypothesisSpec::new(0.1, 0.1).unwrap();
        let strategy = LambdaStrategy::default_plugin(&spec);
        let mut other = series[..cut].to_vec();
        other.extend(&tail[..series.len() - cut]);
        let a = run_eprocess(&series, &spec, &strategy, 1).unwrap();
        let b = run_eprocess(&other, &spec, &strategy, 1).unwrap();
        // λ at step t uses X_1..X_{t−1}, so the first `cut + 1` agree.
        let k = (cut + 1).min(series.len());
        prop_assert_eq!(&a.lambdas[..k], &b.lambdas[..k]);
    }

    #[test]
    fn stopped_edges_are_rejected(panel in panel_strategy(), pi in 0.01..0.4f64, alpha in 0.01..0.3f64) {
        let spec = HypothesisSpec::new(pi, alpha).unwrap();
        let ev = e_evidence(&panel, &spec, &LambdaStrategy::default_plugin(&spec)).unwrap();
        let sel = select(&ev, &BhConfig::new(alpha)).unwrap();
        for (i, stop) in ev.stop_times().unwrap().iter().enumerate() {
            if stop.is_some() {
                prop_assert!(sel.rejected.contains(&i), "edge {} stopped but kept", i);
            }
        }
    }
}
