mod common;

use proptest::prelude::*;
use radar_mot::assignment::{murty_k_best, solve_assignment, AssignmentError, CostMatrix};

use common::{all_assignment_totals, brute_force_min};

/// Rows <= cols <= 7 with integer-ish costs and some forbidden entries.
fn cost_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=7)
        .prop_flat_map(|rows| (Just(rows), rows..=7))
        .prop_flat_map(|(rows, cols)| {
            proptest::collection::vec(
                proptest::collection::vec(
                    prop_oneof![9 => (-50.0f64..50.0).prop_map(|c| (c * 8.0).round() / 8.0), 1 => Just(f64::INFINITY)],
                    cols,
                ),
                rows,
            )
        })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn optimum_equals_enumeration(rows in cost_rows()) {
        let m = CostMatrix::from_rows(&rows).unwrap();
        match (solve_assignment(&m), brute_force_min(&rows)) {
            (Ok(a), Some(best)) => {
                prop_assert!(close(a.total, best), "solver {} vs enumeration {}", a.total, best);
                prop_assert!(close(m.total(&a.row_to_col), a.total));
                let mut cols = a.row_to_col.clone();
                cols.sort_unstable();
                cols.dedup();
                prop_assert_eq!(cols.len(), rows.len());
            }
            (Err(AssignmentError::Infeasible), None) => {}
            (got, want) => prop_assert!(false, "solver {:?}, enumeration {:?}", got, want),
        }
    }

    #[test]
    fn adding_a_row_constant_keeps_the_mapping(rows in cost_rows(), shift in -20.0f64..20.0, pick in 0usize..7) {
        let m = CostMatrix::from_rows(&rows).unwrap();
        let Ok(base) = solve_assignment(&m) else { return Ok(()); };
        let r = pick % rows.len();
        let mut shifted = rows.clone();
        for c in shifted[r].iter_mut() {
            *c += shift;
        }
        let s = solve_assignment(&CostMatrix::from_rows(&shifted).unwrap()).unwrap();
        prop_assert!(close(s.total, base.total + shift));
        prop_assert_eq!(s.row_to_col, base.row_to_col);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn murty_equals_sorted_enumeration(
        data in proptest::collection::vec((-20.0f64..20.0).prop_map(|c| (c * 4.0).round() / 4.0), 16)
    ) {
        let rows: Vec<Vec<f64>> = data.chunks(4).map(<[f64]>::to_vec).collect();
        let m = CostMatrix::from_rows(&rows).unwrap();
        let got = murty_k_best(&m, 10).unwrap();
        let want = all_assignment_totals(&rows);
        prop_assert_eq!(got.len(), 10);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!(close(g.total, *w), "{} vs {}", g.total, w);
            prop_assert!(close(m.total(&g.row_to_col), g.total));
        }
        let mut maps: Vec<_> = got.iter().map(|a| a.row_to_col.clone()).collect();
        maps.sort();
        maps.dedup();
        prop_assert_eq!(maps.len(), got.len());
    }
}

#[test]
fn murty_returns_every_assignment_when_k_is_large() {
    let rows = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]];
    let got = murty_k_best(&CostMatrix::from_rows(&rows).unwrap(), 100).unwrap();
    let want = all_assignment_totals(&rows);
    assert_eq!(got.len(), want.len());
    assert_eq!(want.len(), 6);
    for (g, w) in got.iter().zip(&want) {
        assert!(close(g.total, *w));
    }
}

#[test]
fn all_forbidden_row_is_infeasible() {
    let rows = vec![vec![1.0, 2.0], vec![f64::INFINITY, f64::INFINITY]];
    let m = CostMatrix::from_rows(&rows).unwrap();
    assert_eq!(solve_assignment(&m), Err(AssignmentError::Infeasible));
}
