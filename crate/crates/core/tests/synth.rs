use modelsched::synth::{sample_cost_profile, sample_mixture, MixtureSpec, TOY_COSTS};
use modelsched::{Cost, Error};

const MU1: [f64; 8] = [2.0, 1.8, 1.6, 1.4, 1.2, 1.0, 0.8, 0.6];

fn centre(component: usize) -> [f64; 8] {
    let mut mu = MU1;
    for (k, v) in mu.iter_mut().enumerate() {
        let flip = match component {
            1 => false,
            2 => k >= 4,
            3 => k < 4,
            _ => true,
        };
        if flip {
            *v = -*v;
        }
    }
    mu
}

#[test]
fn mixture_moments_match_the_model() {
    let rho = 0.6;
    let n = 50_000;
    let d = sample_mixture(&MixtureSpec::new(rho, n, 2024)).unwrap();
    assert_eq!((d.n(), d.p(), d.n_classes), (n, 8, 4));
    let mut counts = [0usize; 4];
    for c in 1..=4 {
        let rows: Vec<usize> = (0..n).filter(|&i| d.y[i] == c).collect();
        counts[c - 1] = rows.len();
        let m = rows.len() as f64;
        let mut mean = [0.0; 8];
        for &i in &rows {
            for (k, v) in d.x.row(i).iter().enumerate() {
                mean[k] += v / m;
            }
        }
        let mu = centre(c);
        for k in 0..8 {
            assert!((mean[k] - mu[k]).abs() <= 0.05, "component {c} mean {k}: {}", mean[k]);
        }
        for a in 0..8 {
            for b in 0..8 {
                let cov = rows
                    .iter()
                    .map(|&i| (d.x.get(i, a) - mean[a]) * (d.x.get(i, b) - mean[b]))
                    .sum::<f64>()
                    / (m - 1.0);
                let want = rho.powi(a.abs_diff(b) as i32);
                assert!((cov - want).abs() <= 0.05, "component {c} cov ({a},{b}): {cov}");
            }
        }
    }
    let sd = (n as f64 * 0.25 * 0.75).sqrt();
    let chi2: f64 = counts
        .iter()
        .map(|&c| {
            assert!((c as f64 - n as f64 / 4.0).abs() <= 3.0 * sd, "count {c}");
            (c as f64 - n as f64 / 4.0).powi(2) / (n as f64 / 4.0)
        })
        .sum();
    // 0.999 quantile of chi-square with 3 degrees of freedom
    assert!(chi2 < 16.266, "chi2 {chi2}");
}

#[test]
fn generation_is_reproducible() {
    let a = sample_mixture(&MixtureSpec::new(0.3, 500, 1)).unwrap();
    let b = sample_mixture(&MixtureSpec::new(0.3, 500, 1)).unwrap();
    let c = sample_mixture(&MixtureSpec::new(0.3, 500, 2)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn correlation_must_be_inside_the_unit_interval() {
    assert!(matches!(
        sample_mixture(&MixtureSpec::new(1.0, 10, 0)),
        Err(Error::InvalidCorrelation(_))
    ));
}

#[test]
fn cost_profiles_are_seeded_and_in_range() {
    let a = sample_cost_profile(8, 1.0, 100.0, 5).unwrap();
    assert_eq!(a, sample_cost_profile(8, 1.0, 100.0, 5).unwrap());
    for &c in a.costs() {
        assert!(c >= Cost::from_units(1.0) && c <= Cost::from_units(100.0));
    }
    let toy = modelsched::CostProfile::from_units(&TOY_COSTS).unwrap();
    assert_eq!(toy.full_cost(), Cost::from_units(374.0));
}
