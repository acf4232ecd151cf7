use posstable::density::{mellin, StableLaw};
use posstable::kanter::KANTER_EXPONENT_LABEL;
use posstable::mc::*;
use posstable::{Error, Exec, StabilityIndex};

fn al(a: f64) -> StabilityIndex {
    StabilityIndex::new(a).unwrap()
}

fn mean_se(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let m = v.clone().sum::<f64>() / n;
    let var = v.map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn calibration_picks_the_frozen_exponent() {
    let c = calibrate_kanter_exponent(2024, 1_000_000, Exec::Parallel).unwrap();
    assert_eq!(c.chosen, KANTER_EXPONENT_LABEL);
    assert_eq!(c.candidates.iter().filter(|k| k.pass).count(), 1);
}

#[test]
fn laplace_transform_of_z() {
    let z = sample_z(al(0.7), 11, 1_000_000, Exec::Parallel)
        .unwrap()
        .values;
    let (m, se) = mean_se(z.iter().map(|z| (-z).exp()));
    assert!((m - (-1f64).exp()).abs() <= 3.0 * se, "{m} ± {se}");
}

#[test]
fn z_half_matches_closed_form_cdf() {
    let z = sample_z(al(0.5), 5, 100_000, Exec::Parallel)
        .unwrap()
        .values;
    let r = ks_report(
        "Z_1/2".into(),
        &z,
        |x| Ok(statrs::function::erf::erfc(0.5 / x.sqrt())),
        Exec::Parallel,
    )
    .unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn fractional_moment_of_z() {
    let z = sample_z(al(0.3), 8, 1_000_000, Exec::Parallel)
        .unwrap()
        .values;
    let (m, se) = mean_se(z.iter().map(|z| z.powf(0.1)));
    let want = mellin(al(0.3), 0.1).unwrap();
    assert!((m - want).abs() <= 3.0 * se, "{m} ± {se} vs {want}");
}

#[test]
fn z_histogram_against_density() {
    let law = StableLaw::new(al(0.7));
    let z = sample_z(al(0.7), 3, 200_000, Exec::Parallel)
        .unwrap()
        .values;
    let r = chi_square_report("chi2".into(), &z, &law, 50).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn m_laplace_and_law() {
    let a = al(0.6);
    let m = sample_m(a, 9, 1_000_000, Exec::Parallel).unwrap().values;
    let (mean, se) = mean_se(m.iter().map(|m| (-2.0 * m).exp()));
    let want = 1.0 / (1.0 + 2f64.powf(0.6));
    assert!((mean - want).abs() <= 3.0 * se, "{mean} ± {se} vs {want}");
    let r = ks_report("M".into(), &m[..100_000], |x| m_cdf(a, x), Exec::Parallel).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn m_histogram_is_decreasing() {
    let m = sample_m(al(0.6), 4, 1_000_000, Exec::Parallel)
        .unwrap()
        .values;
    let width = 0.1;
    let mut counts = [0usize; 20];
    for v in &m {
        let b = (v / width) as usize;
        if b < counts.len() {
            counts[b] += 1;
        }
    }
    for w in counts.windows(2) {
        let slack = 4.0 * ((w[0] + w[1]) as f64).sqrt();
        assert!((w[1] as f64) <= w[0] as f64 + slack, "{counts:?}");
    }
}

#[test]
fn x_laplace_transform() {
    let x = sample_x(al(0.4), 0.4, 12, 1_000_000, Exec::Parallel)
        .unwrap()
        .values;
    let (m, se) = mean_se(x.iter().map(|x| (-x).exp()));
    let want = 2.0 * (-1f64).exp();
    assert!((m - want).abs() <= 3.0 * se, "{m} ± {se} vs {want}");
}

#[test]
fn x_table_is_a_density() {
    for (a, r) in [(0.4, 0.4), (0.3, 0.3), (0.7, 3.0), (0.9, 3.2)] {
        let s = XSampler::new(al(a), r).unwrap();
        assert!(s.min_g_over_f >= -1e-9, "({a},{r}): {}", s.min_g_over_f);
        assert!((s.mass - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn x_samples_follow_their_cdf() {
    for (a, r) in [(0.4, 0.5), (0.7, 3.0)] {
        let law = StableLaw::new(al(a));
        let x = sample_x(al(a), r, 6, 100_000, Exec::Parallel)
            .unwrap()
            .values;
        let g = |x: f64| -> posstable::Result<f64> {
            let (c, _) = law.cdf_sf(x)?;
            Ok(c + x * law.density(x)?.value / r)
        };
        let rep = ks_report("X".into(), &x, g, Exec::Parallel).unwrap();
        assert!(rep.pass, "({a},{r}): {rep:?}");
    }
}

#[test]
fn x_below_frontier_is_rejected() {
    assert!(matches!(
        XSampler::new(al(0.8), 1.0),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(
        XSampler::new(al(0.4), 0.3),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(
        XSampler::new(al(0.4), 0.0),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn factorizations_hold() {
    for (which, a, r) in [
        (Identity::Additive, 0.4, 0.5),
        (Identity::Additive, 0.7, 3.0),
        (Identity::Multiplicative, 0.4, 0.5),
        (Identity::Multiplicative, 0.7, 3.0),
        (Identity::Multiplicative, 0.3, 0.3),
    ] {
        let v = verify_identity(which, al(a), r, 42, 100_000, Exec::Parallel).unwrap();
        assert!(v.pass(), "{v:#?}");
        for rep in &v.reports {
            assert_eq!(rep.pass, rep.discrepancy <= rep.threshold);
        }
    }
}

#[test]
fn degenerate_identity_is_rejected() {
    assert!(verify_identity(
        Identity::Multiplicative,
        al(0.3),
        0.0,
        1,
        10,
        Exec::Sequential
    )
    .is_err());
    assert!(sample_z(al(0.3), 1, 0, Exec::Sequential).is_err());
}

#[test]
fn batches_are_reproducible() {
    let n = 3 * CHUNK + 17;
    let a = sample_z(al(0.6), 99, n, Exec::Sequential).unwrap();
    let b = sample_z(al(0.6), 99, n, Exec::Parallel).unwrap();
    assert_eq!(a, b);
    assert!(a.values.iter().all(|v| *v > 0.0));
    let c = sample_z(al(0.6), 100, n, Exec::Parallel).unwrap();
    assert_ne!(a.values, c.values);
    let x1 = sample_x(al(0.7), 3.0, 5, n, Exec::Sequential).unwrap();
    let x2 = sample_x(al(0.7), 3.0, 5, n, Exec::Parallel).unwrap();
    assert_eq!(x1, x2);
}
