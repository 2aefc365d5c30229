//! Adaptive solvers against brute-force grid oracles on inputs outside the standard corpus.

use dcq_core::geometry::{HypersurfaceSpec, Manifold};
use dcq_core::intersect::{
    curve_hypersurface_intersect, curve_oracle, disk_manifold_intersect, disk_oracle,
    standard_corpus, AnalyticCurve, Component, CurveOptions, DiskOptions, JobShape,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORACLE_DENSITY_1D: usize = 1 << 20;
const ORACLE_DENSITY_2D: usize = 2048;

fn random_poly(rng: &mut ChaCha8Rng, degree: usize, size: f64) -> Component {
    Component::poly((0..=degree).map(|_| rng.gen_range(-size..size)).collect())
}

#[test]
fn random_polynomial_curves_match_the_oracle() {
    let h = HypersurfaceSpec::standard(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut total = 0;
    for i in 0..50 {
        let curve = AnalyticCurve::new(
            vec![
                random_poly(&mut rng, 2, 2.0),
                random_poly(&mut rng, 2, 2.0),
                random_poly(&mut rng, 3, 0.5),
            ],
            [0.0, 1.0],
        )
        .unwrap();
        let rep =
            curve_hypersurface_intersect(&curve, &h, 1e-10, &CurveOptions::default()).unwrap();
        let oracle = curve_oracle(&curve, &h, ORACLE_DENSITY_1D).unwrap();
        assert!(!rep.degenerate && rep.residual_ok, "curve {i}");
        assert_eq!(rep.root_count(), oracle.count, "curve {i}: {curve:?}");
        total += rep.root_count();
    }
    // the sample is not trivially root-free
    assert!(total >= 25, "{total}");
}

#[test]
fn standard_disks_match_a_denser_oracle() {
    let corpus = standard_corpus().unwrap();
    for job in &corpus.jobs {
        let JobShape::Disk { disk } = &job.shape else {
            continue;
        };
        let Manifold::Embedding(spec) = job.target.build().unwrap() else {
            panic!("{}: disk against a hypersurface", job.name)
        };
        if disk.is_constant() {
            continue;
        }
        let rep = disk_manifold_intersect(disk, &spec, 1e-10, &DiskOptions::default()).unwrap();
        let oracle = disk_oracle(disk, &spec, ORACLE_DENSITY_2D, &[1.0, 2.0, 4.0]).unwrap();
        let (lo, hi) = (
            oracle.counts.iter().copied().min().unwrap(),
            oracle.counts.iter().copied().max().unwrap(),
        );
        assert!(
            (lo..=hi).contains(&rep.root_count()),
            "{}: solver {} vs oracle {:?}",
            job.name,
            rep.root_count(),
            oracle.counts
        );
    }
}
