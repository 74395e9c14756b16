use paratorus::besov::synth_octave;
use paratorus::calculus::CalcContext;
use paratorus::spectral::pfld::{read_field, write_field};
use paratorus::spectral::{lp_decompose, DyadicPartition, Grid, GridPoint};
use paratorus::verify::{
    build_context, run_identity_suite, run_remainder, sample_remainder, Formula, IdentityId, IdentityParams,
    RemainderParams, Report, SamplingPlan, IDENTITY_TOLERANCE,
};
use proptest::prelude::*;

fn identity_params(grid: usize, dim: usize) -> IdentityParams {
    IdentityParams {
        grid,
        dim,
        pairs: 20,
        ..IdentityParams::for_letters(3).unwrap()
    }
}

#[test]
fn refining_the_grid_does_not_degrade_identities() {
    let coarse = identity_params(512, 1);
    let fine = identity_params(1024, 1);
    let (cc, fc) = (build_context(&coarse).unwrap(), build_context(&fine).unwrap());
    for id in [IdentityId::Wdofd, IdentityId::ExplicitC, IdentityId::Lmm1, IdentityId::Lmm2, IdentityId::Reorg] {
        let a = run_identity_suite(&cc, id, &coarse).unwrap().max_residual;
        let b = run_identity_suite(&fc, id, &fine).unwrap().max_residual;
        assert!(b <= 10.0 * a.max(1e-13), "{id}: {a:e} at N=512, {b:e} at N=1024");
    }
}

#[test]
fn identities_hold_in_two_dimensions() {
    let params = identity_params(128, 2);
    let ctx = build_context(&params).unwrap();
    for id in IdentityId::ALL {
        let rep = run_identity_suite(&ctx, id, &params).unwrap();
        assert!(rep.passes(IDENTITY_TOLERANCE), "{id}: {:e}", rep.max_residual);
    }
}

#[test]
fn two_dimensional_sampling_uses_eight_directions() {
    let params = RemainderParams {
        dim: 2,
        grid: 256,
        plan: SamplingPlan {
            base_points: 2,
            ..Default::default()
        },
        ..RemainderParams::new(Formula::Omega2, vec![0.6, 0.7])
    };
    let samples = sample_remainder(&params, 1).unwrap();
    let in_bin_3 = samples.iter().filter(|s| s.scale_bin == 3).count();
    assert_eq!(in_bin_3 % 8, 0);
    assert!(samples.iter().all(|s| s.x.contains(';')));
}

#[test]
fn reports_are_reproducible() {
    let params = RemainderParams {
        grid: 4096,
        seeds: vec![3, 4, 5],
        ..RemainderParams::new(Formula::Omega1, vec![1.4])
    };
    let report = |run: &paratorus::verify::RemainderRun| {
        Report::new(
            "remainder",
            serde_json::to_value(&params).unwrap(),
            serde_json::json!(run.expected),
            serde_json::to_value(run).unwrap(),
            run.tolerance,
            run.pass,
            params.seeds.clone(),
        )
        .to_json()
    };
    let a = run_remainder(&params).unwrap();
    let b = run_remainder(&params).unwrap();
    assert_eq!(a.samples, b.samples);
    assert_eq!(report(&a), report(&b));
}

#[test]
fn field_files_round_trip_through_disk() {
    let p = DyadicPartition::for_grid(Grid::new(1, 1024).unwrap()).unwrap();
    let f = synth_octave(0.8, 9, 5, &p).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.pfld");
    write_field(&mut std::fs::File::create(&path).unwrap(), &f, "octave").unwrap();
    let (g, header) = read_field(&mut std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(header.description, "octave");
    assert_eq!(f.values(), g.values());
    assert_eq!(f.support(), g.support());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn remainder_blocks_sum_to_the_remainder(
        seed in 0u64..1000,
        x in 0usize..512,
        dx in 1usize..64,
        shift in 1usize..=2,
    ) {
        let p = DyadicPartition::for_grid(Grid::new(1, 512).unwrap()).unwrap();
        let mut ctx = CalcContext::new(p.clone(), shift);
        for (i, a) in [0.9, 0.8, 0.6].into_iter().enumerate() {
            let f = synth_octave(a, seed * 7 + i as u64, p.j_max() - 1, &p).unwrap();
            ctx.bind(i + 1, lp_decompose(&f, &p).unwrap(), a).unwrap();
        }
        let w = ctx.word(&[1, 2, 3]).unwrap();
        let (x, y) = (GridPoint::new_1d(x), GridPoint::new_1d((x + dx) % 512));
        let whole = ctx.omega_word(&w, x, y).unwrap();
        let mut total = 0.0;
        let mut scale: f64 = whole.abs();
        for j in 0..ctx.len() {
            let (v, s) = ctx.omega_theta_j_scaled(&w, w.alpha(), j, x, y).unwrap();
            total += v;
            scale = scale.max(s);
        }
        prop_assert!((total - whole).abs() <= 1e-10 * scale.max(1e-300), "{} vs {}", total, whole);
    }
}
