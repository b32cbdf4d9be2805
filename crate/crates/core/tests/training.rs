use adaptact::harness::{accuracy, prepare_split, DataSource};
use adaptact::{
    make_synthetic, train, ActivationKind, AlphaMode, Dataset, ExperimentConfig, NetworkSpec,
    SyntheticKind, TrainConfig,
};

#[test]
fn loss_decreases_on_separable_data() {
    // Two well-separated clusters on a line.
    let features: Vec<f64> = (0..20)
        .map(|i| {
            if i < 10 {
                -2.0 - i as f64 * 0.1
            } else {
                2.0 + i as f64 * 0.1
            }
        })
        .collect();
    let labels: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
    for kind in ActivationKind::ALL {
        for mode in AlphaMode::ALL {
            let spec = NetworkSpec::new(1, 2, 2, kind, mode).unwrap();
            let out = train(spec, &features, &labels, &TrainConfig::default(), 3).unwrap();
            let first = out.loss_history[0];
            let last = out.network.loss(&features, &labels).unwrap();
            assert!(last < 0.5 * first, "{kind}/{mode}: {first} -> {last}");
        }
    }
}

#[test]
fn training_is_deterministic() {
    let ds = make_synthetic(SyntheticKind::Blobs3, 60, 4).unwrap();
    let spec = NetworkSpec::new(2, 3, 3, ActivationKind::Swish, AlphaMode::Individual).unwrap();
    let a = train(spec, ds.features(), ds.labels(), &TrainConfig::default(), 8).unwrap();
    let b = train(spec, ds.features(), ds.labels(), &TrainConfig::default(), 8).unwrap();
    assert_eq!(a.network, b.network);
    assert_eq!(a.loss_history, b.loss_history);
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn per_unit_alphas_fit_xor_at_least_as_well_as_fixed() {
    let ds = make_synthetic(SyntheticKind::Xor2d, 70, 0).unwrap();
    for kind in [ActivationKind::Elu, ActivationKind::Softplus] {
        let final_loss = |mode: AlphaMode| -> Vec<f64> {
            (0..5)
                .map(|seed| {
                    let spec = NetworkSpec::new(2, 2, 2, kind, mode).unwrap();
                    let out = train(
                        spec,
                        ds.features(),
                        ds.labels(),
                        &TrainConfig::default(),
                        seed,
                    )
                    .unwrap();
                    out.network.loss(ds.features(), ds.labels()).unwrap()
                })
                .collect()
        };
        let m1 = median(final_loss(AlphaMode::Fixed));
        let m3 = median(final_loss(AlphaMode::Individual));
        assert!(m3 <= m1, "{kind}: m3 {m3} > m1 {m1}");
    }
}

/// Closed-form least-squares linear probe on raw features.
#[allow(clippy::needless_range_loop)]
fn linear_probe_accuracy(ds: &Dataset) -> f64 {
    let n = ds.len();
    let mut xtx = [[0.0f64; 3]; 3];
    let mut xty = [0.0f64; 3];
    for (row, &y) in ds.rows().zip(ds.labels()) {
        let x = [1.0, row[0], row[1]];
        let t = if y == 1 { 1.0 } else { -1.0 };
        for i in 0..3 {
            xty[i] += x[i] * t;
            for j in 0..3 {
                xtx[i][j] += x[i] * x[j];
            }
        }
    }
    // Gaussian elimination on the 3×3 normal equations.
    let mut a = xtx;
    let mut b = xty;
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut w = [0.0; 3];
    for r in (0..3).rev() {
        w[r] = (b[r] - (r + 1..3).map(|c| a[r][c] * w[c]).sum::<f64>()) / a[r][r];
    }
    let correct = ds
        .rows()
        .zip(ds.labels())
        .filter(|(row, &y)| usize::from(w[0] + w[1] * row[0] + w[2] * row[1] > 0.0) == y)
        .count();
    correct as f64 / n as f64
}

#[test]
fn xor_defeats_a_linear_probe() {
    for seed in 0..5 {
        let ds = make_synthetic(SyntheticKind::Xor2d, 70, seed).unwrap();
        let acc = linear_probe_accuracy(&ds);
        assert!(acc < 0.7, "seed {seed}: linear accuracy {acc}");
    }
}

#[test]
fn trained_network_beats_chance_on_blobs() {
    let ds = make_synthetic(SyntheticKind::Blobs3, 104, 0).unwrap();
    let cfg = ExperimentConfig::new(
        DataSource::synthetic(SyntheticKind::Blobs3),
        ActivationKind::Elu,
        AlphaMode::Individual,
    );
    let p = prepare_split(&ds, &cfg, 0).unwrap();
    let spec = NetworkSpec::new(2, 4, 3, ActivationKind::Elu, AlphaMode::Individual).unwrap();
    let out = train(
        spec,
        &p.train.features,
        &p.train.labels,
        &TrainConfig::default(),
        1,
    )
    .unwrap();
    assert!(accuracy(&out.network, &p.test).unwrap() > 0.5);
}
