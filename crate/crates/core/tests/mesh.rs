use proptest::prelude::*;
use rbhmr_core::{Partition1D, TensorGrid};

#[test]
fn uniform_partitions() {
    let p = Partition1D::uniform(0.0, 2.0, 4).unwrap();
    assert_eq!(p.nodes(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
    let p = Partition1D::uniform(0.0, 1.0, 1).unwrap();
    assert_eq!(p.nodes(), &[0.0, 1.0]);
    let p = Partition1D::uniform(0.0, 2.0, 800).unwrap();
    assert_eq!(p.node_count(), 801);
    assert!((p.spacing() - 0.0025).abs() < 1e-15);
    assert!(Partition1D::uniform(0.0, 1.0, 0).is_err());
    assert!(Partition1D::uniform(1.0, 1.0, 3).is_err());
    assert!(Partition1D::uniform(2.0, 1.0, 3).is_err());
}

#[test]
fn hat_examples() {
    let p = Partition1D::uniform(0.0, 1.0, 2).unwrap();
    assert_eq!(p.eval_p1(1, 0.5).unwrap(), (1.0, 0.0));
    let (v, d) = p.eval_p1(0, 0.25).unwrap();
    assert!((v - 0.5).abs() < 1e-15 && (d + 2.0).abs() < 1e-15);
    let s: f64 = (0..3).map(|i| p.eval_p1(i, 0.33).unwrap().0).sum();
    assert!((s - 1.0).abs() < 1e-15);
    assert!(p.eval_p1(3, 0.5).is_err());
}

#[test]
fn tensor_grid_counts() {
    let g = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 8, 4).unwrap();
    assert_eq!(g.cell_count(), 32);
    assert_eq!(g.node_count(), 45);
    assert_eq!(g.interior_count(), 21);
    let full: Vec<f64> = (0..45).map(|k| k as f64).collect();
    let inner = g.restrict_interior(&full);
    let back = g.extend_interior(&inner);
    for i in 0..=8 {
        for j in 0..=4 {
            let k = g.node_index(i, j);
            let boundary = i == 0 || i == 8 || j == 0 || j == 4;
            assert_eq!(back[k], if boundary { 0.0 } else { full[k] });
        }
    }
}

proptest! {
    #[test]
    fn partition_of_unity(n in 1usize..40, t in 0.0f64..1.0) {
        let p = Partition1D::uniform(-1.0, 3.0, n).unwrap();
        let x = -1.0 + 4.0 * t;
        let s: f64 = (0..=n).map(|i| p.eval_p1(i, x).unwrap().0).sum();
        prop_assert!((s - 1.0).abs() < 1e-13);
    }

    #[test]
    fn derivative_matches_difference(n in 1usize..30, e in 0usize..30, t in 0.05f64..0.95) {
        let p = Partition1D::uniform(0.0, 2.0, n).unwrap();
        let e = e % n;
        let x = p.node(e) + t * p.spacing();
        for i in 0..=n {
            let d = 1e-6;
            let fd = (p.eval_p1(i, x + d).unwrap().0 - p.eval_p1(i, x - d).unwrap().0) / (2.0 * d);
            prop_assert!((fd - p.eval_p1(i, x).unwrap().1).abs() < 1e-4);
        }
    }
}
