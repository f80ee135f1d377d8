use frp_core::milp::{MilpModel, Sense, VarKind};
use frp_core::solver::{HighsBackend, SolveOptions, SolveStatus, SolverBackend};
use proptest::prelude::*;

fn exact() -> SolveOptions {
    SolveOptions::default().with_gap(0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn knapsack_matches_enumeration(
        items in proptest::collection::vec((1u32..50, 1u32..50), 1..=10),
        cap_frac in 0.1f64..0.9,
    ) {
        let capacity = (items.iter().map(|i| i.1).sum::<u32>() as f64 * cap_frac).floor();
        let mut m = MilpModel::new("knapsack");
        let xs: Vec<_> = items
            .iter()
            .enumerate()
            .map(|(i, &(value, _))| m.add_var(format!("x[{i}]"), 0.0, 1.0, VarKind::Binary, -(value as f64)))
            .collect();
        m.add_constraint("cap", "", xs.iter().zip(&items).map(|(&x, &(_, w))| (x, w as f64)), Sense::Le, capacity);
        let s = HighsBackend.solve_milp(&m, &exact()).unwrap();
        prop_assert_eq!(s.status, SolveStatus::Optimal);

        let mut best = 0u32;
        for mask in 0u32..(1 << items.len()) {
            let (v, w) = items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1)
                .fold((0, 0), |(v, w), (_, &(iv, iw))| (v + iv, w + iw));
            if w as f64 <= capacity {
                best = best.max(v);
            }
        }
        prop_assert!((s.objective + best as f64).abs() < 1e-9, "{} vs {}", s.objective, best);
    }
}

/// min c·x, rows a·x (sense) b, l ≤ x ≤ u, feasible by construction.
#[derive(Debug, Clone)]
struct Lp {
    c: Vec<f64>,
    a: Vec<Vec<f64>>,
    senses: Vec<Sense>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

fn lp_strategy() -> impl Strategy<Value = Lp> {
    (1usize..6, 1usize..6)
        .prop_flat_map(|(n, m)| {
            (
                proptest::collection::vec(-10.0f64..10.0, n),
                proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, n), m),
                proptest::collection::vec(0u8..3, m),
                proptest::collection::vec(0.0f64..3.0, m),
                proptest::collection::vec((0.0f64..2.0, 0.0f64..1.0, 1.0f64..10.0), n),
            )
        })
        .prop_map(|(c, a, kinds, slack, boxes)| {
            let lower: Vec<f64> = boxes.iter().map(|b| b.0).collect();
            let upper: Vec<f64> = boxes.iter().map(|b| b.0 + b.2).collect();
            let x0: Vec<f64> = boxes.iter().map(|b| b.0 + b.1 * b.2).collect();
            let mut senses = Vec::new();
            let mut b = Vec::new();
            for ((row, k), s) in a.iter().zip(&kinds).zip(&slack) {
                let ax: f64 = row.iter().zip(&x0).map(|(a, x)| a * x).sum();
                let (sense, rhs) = match k {
                    0 => (Sense::Le, ax + s),
                    1 => (Sense::Ge, ax - s),
                    _ => (Sense::Eq, ax),
                };
                senses.push(sense);
                b.push(rhs);
            }
            Lp { c, a, senses, b, lower, upper }
        })
}

fn primal(lp: &Lp) -> MilpModel {
    let mut m = MilpModel::new("primal");
    let xs: Vec<_> = (0..lp.c.len())
        .map(|j| m.add_var(format!("x[{j}]"), lp.lower[j], lp.upper[j], VarKind::Continuous, lp.c[j]))
        .collect();
    for (i, row) in lp.a.iter().enumerate() {
        m.add_constraint("r", i.to_string(), xs.iter().copied().zip(row.iter().copied()), lp.senses[i], lp.b[i]);
    }
    m
}

/// max b·y + l·s − u·t  s.t.  Aᵀy + s − t = c, written as a minimisation.
fn dual(lp: &Lp) -> MilpModel {
    let mut m = MilpModel::new("dual");
    let ys: Vec<_> = lp
        .senses
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (lo, hi) = match s {
                Sense::Ge => (0.0, f64::INFINITY),
                Sense::Le => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (f64::NEG_INFINITY, f64::INFINITY),
            };
            m.add_var(format!("y[{i}]"), lo, hi, VarKind::Continuous, -lp.b[i])
        })
        .collect();
    for j in 0..lp.c.len() {
        let s = m.add_var(format!("s[{j}]"), 0.0, f64::INFINITY, VarKind::Continuous, -lp.lower[j]);
        let t = m.add_var(format!("t[{j}]"), 0.0, f64::INFINITY, VarKind::Continuous, lp.upper[j]);
        let terms = ys.iter().enumerate().map(|(i, &y)| (y, lp.a[i][j])).chain([(s, 1.0), (t, -1.0)]);
        m.add_constraint("col", j.to_string(), terms, Sense::Eq, lp.c[j]);
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn strong_duality_against_explicit_dual(lp in lp_strategy()) {
        let options = SolveOptions { require_basic_duals: true, ..exact() };
        let p = HighsBackend.solve_lp_duals(&primal(&lp), &options).unwrap();
        let d = HighsBackend.solve_lp_duals(&dual(&lp), &options).unwrap();
        let scale = p.objective.abs().max(1.0);
        prop_assert!((p.objective + d.objective).abs() <= 1e-8 * scale, "{} vs {}", p.objective, -d.objective);
        prop_assert!((p.objective - p.dual_objective).abs() <= 1e-8 * scale);
    }

    #[test]
    fn duals_are_complementary(lp in lp_strategy()) {
        let model = primal(&lp);
        let s = HighsBackend.solve_lp_duals(&model, &exact()).unwrap();
        for (i, row) in model.constraints().iter().enumerate() {
            let y = s.row_duals[i];
            let gap = row.activity(&s.values) - row.rhs;
            match row.sense {
                Sense::Ge => prop_assert!(y >= -1e-9),
                Sense::Le => prop_assert!(y <= 1e-9),
                Sense::Eq => {}
            }
            prop_assert!((y * gap).abs() <= 1e-6, "row {i}: y {y}, slack {gap}");
        }
        for (j, v) in model.variables().iter().enumerate() {
            let d: f64 = v.cost - model.constraints().iter().zip(&s.row_duals)
                .flat_map(|(c, y)| c.terms.iter().filter(|(id, _)| id.0 == j).map(move |(_, a)| a * y))
                .sum::<f64>();
            prop_assert!((d - s.reduced_costs[j]).abs() <= 1e-6);
            let x = s.values[j];
            if d > 1e-6 {
                prop_assert!((x - v.lower).abs() <= 1e-6);
            } else if d < -1e-6 {
                prop_assert!((x - v.upper).abs() <= 1e-6);
            }
        }
        prop_assert!(model.max_violation(&s.values).0 <= 1e-6);
    }
}

#[test]
fn lp_duals_refuse_integer_models() {
    let mut m = MilpModel::new("t");
    m.add_var("x", 0.0, 1.0, VarKind::Binary, 1.0);
    assert!(HighsBackend.solve_lp_duals(&m, &exact()).is_err());
}
