mod common;

use frp_core::system::{dc_flows, load_system, nodal_loads, Line, NetworkModel};
use proptest::prelude::*;

fn network_strategy() -> impl Strategy<Value = (NetworkModel, Vec<f64>)> {
    (2usize..=6)
        .prop_flat_map(|n| {
            let tree = (1..n).map(|b| 0..b).collect::<Vec<_>>();
            let extra = proptest::collection::vec((0..n, 0..n), 0..3);
            let reactances = proptest::collection::vec(0.01f64..1.0, n + 3);
            let injections = proptest::collection::vec(-100.0f64..100.0, n);
            (Just(n), tree, extra, reactances, injections)
        })
        .prop_map(|(n, tree, extra, x, mut inj)| {
            let mut ends: Vec<(usize, usize)> = tree.into_iter().enumerate().map(|(i, f)| (f, i + 1)).collect();
            ends.extend(extra.into_iter().filter(|(a, b)| a != b));
            let lines = ends
                .iter()
                .zip(&x)
                .enumerate()
                .map(|(k, (&(f, t), &x))| Line {
                    id: format!("L{k}"),
                    from: f as u32 + 1,
                    to: t as u32 + 1,
                    reactance: x,
                    rating: 100.0,
                })
                .collect();
            let total: f64 = inj.iter().sum();
            inj[0] -= total;
            let net = NetworkModel::new((1..=n as u32).collect(), lines, None).unwrap();
            (net, inj)
        })
}

proptest! {
    #[test]
    fn ptdf_flows_match_direct_solution((net, inj) in network_strategy()) {
        let by_ptdf = net.ptdf().flows(&inj);
        let direct = dc_flows(&net, &inj).unwrap();
        for (a, b) in by_ptdf.iter().zip(&direct) {
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()), "{a} vs {b}");
        }
        // Kirchhoff's current law at every bus.
        let mut net_out = vec![0.0; inj.len()];
        for (line, f) in net.lines().iter().zip(&by_ptdf) {
            net_out[net.bus_index(line.from).unwrap()] += f;
            net_out[net.bus_index(line.to).unwrap()] -= f;
        }
        for (o, p) in net_out.iter().zip(&inj) {
            prop_assert!((o - p).abs() < 1e-7);
        }
    }

    #[test]
    fn nodal_loads_conserve_system_load(seed in 0u64..1000, total in proptest::collection::vec(0.0f64..5000.0, 1..30)) {
        let sys = common::random_system(seed, 500.0, false);
        let loads = nodal_loads(&sys, &total);
        for (t, &v) in total.iter().enumerate() {
            prop_assert!((loads.system_total(t) - v).abs() <= 1e-12 * v.max(1.0));
            prop_assert!(loads.period(t).iter().all(|&x| x >= -1e-9));
        }
    }
}

#[test]
fn slack_row_of_ptdf_is_zero() {
    let sys = load_system(common::fixture("ieee118/system.json")).unwrap();
    let net = sys.network();
    let slack = net.bus_index(net.slack()).unwrap();
    assert!((0..net.ptdf().num_lines()).all(|k| net.ptdf().get(slack, k) == 0.0));
    assert_eq!(net.buses().len(), 118);
}

#[test]
fn disconnected_network_is_rejected() {
    let line = Line { id: "L1".into(), from: 1, to: 2, reactance: 0.1, rating: 10.0 };
    assert!(NetworkModel::new(vec![1, 2, 3], vec![line], None).is_err());
}
