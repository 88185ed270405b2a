use nalgebra::{DMatrix, DVector};
use polycap::search::{binomial, face_bounds, point_sets_match};
use polycap::*;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn well_conditioned(j: &DMatrix<f64>) -> bool {
    let sv = j.clone().svd(false, false).singular_values;
    sv.min() > 1e-3 * sv.max()
}

/// Random full-row-rank Jacobian with a random torque box.
fn problem(symmetric: bool) -> impl Strategy<Value = (DMatrix<f64>, JointBox)> {
    (1usize..=3, 0usize..=4)
        .prop_flat_map(move |(m, extra)| {
            let n = m + extra;
            (
                prop::collection::vec(-1.0f64..1.0, m * n),
                prop::collection::vec(0.1f64..100.0, n),
                prop::collection::vec(0.1f64..100.0, n),
                Just((m, n)),
            )
        })
        .prop_filter_map("rank-deficient draw", move |(entries, a, b, (m, n))| {
            let j = DMatrix::from_row_slice(m, n, &entries);
            if !well_conditioned(&j) {
                return None;
            }
            let lo: Vec<f64> = a.iter().map(|v| -v).collect();
            let hi = if symmetric { a.clone() } else { b };
            Some((j, JointBox::new(lo, hi).unwrap()))
        })
}

fn scale(points: &[Vec<f64>]) -> f64 {
    1.0 + points.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn search(j: &DMatrix<f64>, bx: &JointBox) -> VertexSet {
    force_polytope_vertices(j, bx, &SearchOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(config(300))]

    #[test]
    fn vertices_are_feasible((j, bx) in problem(false)) {
        let vs = search(&j, &bx);
        let eps = 1e-7 * bx.max_width();
        for v in &vs.vertices {
            let tau = j.tr_mul(&DVector::from_column_slice(v));
            for i in 0..bx.dim() {
                prop_assert!(tau[i] >= bx.lo[i] - eps && tau[i] <= bx.hi[i] + eps);
            }
        }
    }

    #[test]
    fn matches_oracle((j, bx) in problem(false)) {
        let vs = search(&j, &bx);
        let oracle = oracle_halfspace_enum(&j, &bx).unwrap();
        prop_assert!(point_sets_match(&vs.vertices, &oracle.vertices, 1e-7 * scale(&oracle.vertices)));
    }

    #[test]
    fn count_law((j, bx) in problem(false)) {
        let (m, n) = j.shape();
        let s = search(&j, &bx).stats;
        prop_assert_eq!(s.faces_total, binomial(n, m));
        prop_assert_eq!(s.faces_pruned_bounds + s.faces_singular + s.systems_solved, s.faces_total);
        prop_assert!(s.systems_solved <= binomial(n, m));
    }

    #[test]
    fn symmetric_limits_give_symmetric_polytope((j, bx) in problem(true)) {
        let vs = search(&j, &bx);
        let negated: Vec<Vec<f64>> = vs.vertices.iter().map(|v| v.iter().map(|x| -x).collect()).collect();
        prop_assert!(point_sets_match(&vs.vertices, &negated, 1e-7 * scale(&vs.vertices)));
    }

    #[test]
    fn scaling_limits_scales_vertices((j, bx) in problem(false), c in 0.01f64..100.0) {
        let vs = search(&j, &bx);
        let scaled = search(&j, &bx.scaled(c).unwrap());
        let expected: Vec<Vec<f64>> = vs.vertices.iter().map(|v| v.iter().map(|x| c * x).collect()).collect();
        prop_assert!(point_sets_match(&scaled.vertices, &expected, 1e-7 * scale(&expected)));
    }

    #[test]
    fn joint_permutation_invariant((j, bx) in problem(false), seed in any::<u64>()) {
        let n = j.ncols();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let jp = DMatrix::from_fn(j.nrows(), n, |r, c| j[(r, perm[c])]);
        let bp = JointBox::new(perm.iter().map(|&i| bx.lo[i]).collect(), perm.iter().map(|&i| bx.hi[i]).collect()).unwrap();
        let a = search(&j, &bx);
        let b = search(&jp, &bp);
        prop_assert!(point_sets_match(&a.vertices, &b.vertices, 1e-7 * scale(&a.vertices)));
    }

    #[test]
    fn pruning_never_changes_vertices((j, bx) in problem(false)) {
        let on = search(&j, &bx);
        let off = force_polytope_vertices(&j, &bx, &SearchOptions { prune: false, ..Default::default() }).unwrap();
        prop_assert_eq!(&on.vertices, &off.vertices);
        prop_assert_eq!(off.stats.faces_pruned_bounds, 0);
        prop_assert_eq!(on.stats.faces_total, off.stats.faces_total);
    }

    #[test]
    fn reduced_equals_full_system((j, bx) in problem(false)) {
        let a = search(&j, &bx);
        let z = full_system_solve(&j, &bx, &SearchOptions::default()).unwrap();
        prop_assert!(point_sets_match(&a.vertices, &z.vertices, 1e-9 * scale(&a.vertices)));
    }

    #[test]
    fn schedule_independent((j, bx) in problem(false)) {
        let serial = search(&j, &bx);
        let parallel = force_polytope_vertices(&j, &bx, &SearchOptions { parallel: true, ..Default::default() }).unwrap();
        prop_assert_eq!(&serial.vertices, &parallel.vertices);
        prop_assert_eq!(serial.stats.without_timing(), parallel.stats.without_timing());
    }

    #[test]
    fn nominal_wrench_translates((j, bx) in problem(false), fn_raw in prop::collection::vec(-1.0f64..1.0, 3)) {
        let m = j.nrows();
        let nominal = search(&j, &bx);
        let f_n: Vec<f64> = fn_raw[..m].iter().map(|v| v * scale(&nominal.vertices)).collect();
        let tau_n = j.tr_mul(&DVector::from_column_slice(&f_n));
        let zero = vec![0.0; j.ncols()];
        let res = residual_limits(&bx.lo, &bx.hi, &zero, &zero, tau_n.as_slice()).unwrap();
        let shifted = search(&j, &JointBox::new(res.lo, res.hi).unwrap());
        let expected: Vec<Vec<f64>> = nominal.vertices.iter().map(|v| v.iter().zip(&f_n).map(|(a, b)| a - b).collect()).collect();
        prop_assert!(point_sets_match(&shifted.vertices, &expected, 1e-7 * scale(&expected)));
    }
}

proptest! {
    #![proptest_config(config(10_000))]

    #[test]
    fn face_bounds_enclose_every_alpha(
        (k, t, alpha) in (1usize..=6).prop_flat_map(|k| (
            Just(k),
            prop::collection::vec(-100.0f64..100.0, k * k),
            prop::collection::vec(0.0f64..=1.0, k),
        ))
    ) {
        let t = DMatrix::from_row_slice(k, k, &t);
        let (lb, ub) = face_bounds(&t);
        let v = &t * DVector::from_vec(alpha);
        for r in 0..k {
            prop_assert!(v[r] >= lb[r] - 1e-12 * (1.0 + lb[r].abs()) && v[r] <= ub[r] + 1e-12 * (1.0 + ub[r].abs()));
        }
    }
}

#[test]
fn empty_region_is_representable() {
    let j = DMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.5, 0.3, 0.2, 1.0]);
    let bx = JointBox::new(vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0]).unwrap();
    let fast = search(&j, &bx);
    let oracle = oracle_halfspace_enum(&j, &bx).unwrap();
    assert!(point_sets_match(&fast.vertices, &oracle.vertices, 1e-9));
}
