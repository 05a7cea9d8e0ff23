use relu_fim::eigenvectors::cluster_eigenvalues;
use relu_fim::limits::limit_gram_mc;
use relu_fim::{LimitFn, LimitKind};

fn family(d: usize) -> Vec<LimitFn> {
    [LimitKind::Radial, LimitKind::Coordinate(1), LimitKind::DiagContrast(1), LimitKind::CrossProduct(1, 2)]
        .into_iter()
        .map(|k| LimitFn::new(k, d).unwrap())
        .collect()
}

#[test]
fn distinct_limits_are_orthogonal() {
    for d in [10, 20] {
        let g = limit_gram_mc(&family(d), 1_000_000, 5).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(g[i][j].z_score(0.0) < 4.0, "d={d} ({i},{j}): {:?}", g[i][j]);
                }
            }
        }
    }
}

#[test]
fn second_moments_recover_cluster_values() {
    let d = 50;
    let g = limit_gram_mc(&family(d), 1_000_000, 6).unwrap();
    let [top, second, third] = cluster_eigenvalues(d);
    assert!((g[0][0].value / top - 1.0).abs() < 0.03, "{:?}", g[0][0]);
    assert!(g[1][1].z_score(second) < 4.0, "{:?}", g[1][1]);
    assert!((g[2][2].value / third - 1.0).abs() < 0.05, "{:?}", g[2][2]);
    assert!((g[3][3].value / third - 1.0).abs() < 0.05, "{:?}", g[3][3]);
}

#[test]
fn gram_is_symmetric_and_deterministic() {
    let a = limit_gram_mc(&family(8), 20_000, 1).unwrap();
    let b = limit_gram_mc(&family(8), 20_000, 1).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(a[i][j], a[j][i]);
            assert_eq!(a[i][j].value.to_bits(), b[i][j].value.to_bits());
        }
    }
    assert!(limit_gram_mc(&[], 100, 1).unwrap().is_empty());
}
