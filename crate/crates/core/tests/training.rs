use nearfield::beampattern::m_threshold;
use nearfield::channel::{sample_channel, ChannelParams};
use nearfield::codebook::{build_dft_codebook, build_multi_beam_codebook, build_single_beam_codebook, central_sector};
use nearfield::geometry::{fresnel_distance, ArrayConfig, SparseActivation};
use nearfield::training::{
    phase_two_candidates, pilots, run_exhaustive, run_farfield_dft, run_proposed_multibeam, run_subarray_multibeam,
    run_two_phase, MeasurementModel,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn los_only(cfg: &ArrayConfig) -> ChannelParams {
    let mut p = ChannelParams::defaults_for(cfg);
    p.rician_factor_db = f64::INFINITY;
    p.n_nlos = 0;
    p
}

fn intervals(cfg: &ArrayConfig) -> Vec<usize> {
    let n1 = cfg.n_antennas() - 1;
    (1..=n1).filter(|m| n1.is_multiple_of(*m) && *m as f64 <= m_threshold(cfg)).collect()
}

#[test]
fn noiseless_proposed_matches_exhaustive_on_grid() {
    for (n, m, v) in [(257, 8, 4), (257, 16, 4), (129, 8, 3), (513, 16, 2)] {
        let cfg = ArrayConfig::new(n, 30e9).unwrap();
        assert!(m as f64 <= m_threshold(&cfg));
        let act = SparseActivation::new(m, &cfg).unwrap();
        let single = build_single_beam_codebook(&act, v, &cfg).unwrap();
        let multi = build_multi_beam_codebook(&act, v, &cfg).unwrap();
        let params = los_only(&cfg);
        let model = MeasurementModel::noiseless(params.tx_power_watts()).unwrap();
        let grid: Vec<_> = single.indices().filter(|&(s, v)| single.range(s, v) >= fresnel_distance(&cfg)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64 * 1000 + m as u64);
        for t in 0..100 {
            let (s, v) = grid[rng.random_range(0..grid.len())];
            let ch = sample_channel(single.steer(s, v), &params, &cfg, t).unwrap();
            let p = run_proposed_multibeam(&ch, &multi, &single, &model, &mut rng).unwrap();
            let e = run_exhaustive(&ch, &single, &model, &mut rng);
            assert_eq!(p.selected, e.selected, "N={n} M={m} trial {t}");
            assert_eq!(e.selected.s, s);
            assert_eq!(e.selected.v, Some(v));
        }
    }
}

#[test]
fn selections_are_reproducible_for_a_seed() {
    let cfg = ArrayConfig::new(257, 30e9).unwrap();
    let act = SparseActivation::new(16, &cfg).unwrap();
    let single = build_single_beam_codebook(&act, 4, &cfg).unwrap();
    let multi = build_multi_beam_codebook(&act, 4, &cfg).unwrap();
    let params = ChannelParams::defaults_for(&cfg);
    let model = MeasurementModel::new(params.tx_power_watts(), params.noise_power_watts() * 1e4).unwrap();
    let run = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = sample_channel(single.steer(40, 2), &params, &cfg, seed).unwrap();
        run_proposed_multibeam(&ch, &multi, &single, &model, &mut rng).unwrap()
    };
    assert_eq!(run(3), run(3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pilot_counts_follow_formulas(
        n in prop::sample::select(vec![129usize, 257]),
        pick in 0usize..16,
        v in 1usize..=4,
        chi in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let cfg = ArrayConfig::new(n, 30e9).unwrap();
        let ms = intervals(&cfg);
        let act = SparseActivation::new(ms[pick % ms.len()], &cfg).unwrap();
        let single = build_single_beam_codebook(&act, v, &cfg).unwrap();
        let params = ChannelParams::defaults_for(&cfg);
        let model = MeasurementModel::new(params.tx_power_watts(), params.noise_power_watts()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid: Vec<_> = single.indices().filter(|&(s, v)| single.range(s, v) >= fresnel_distance(&cfg)).collect();
        let (s, v_user) = grid[seed as usize % grid.len()];
        let ch = sample_channel(single.steer(s, v_user), &params, &cfg, seed).unwrap();

        if act.interval() > 1 {
            let multi = build_multi_beam_codebook(&act, v, &cfg).unwrap();
            let p = run_proposed_multibeam(&ch, &multi, &single, &model, &mut rng).unwrap();
            prop_assert_eq!(p.pilots_used, pilots::proposed(&act, v, 1));
            prop_assert_eq!(p.estimate, single.steer(p.selected.s, p.selected.v.unwrap()));
        }
        let e = run_exhaustive(&ch, &single, &model, &mut rng);
        prop_assert_eq!(e.pilots_used, pilots::exhaustive(&act, v));
        let dft = build_dft_codebook(&cfg, act.angle_bins());
        let t = run_two_phase(&ch, &dft, &single, chi, &model, &mut rng).unwrap();
        prop_assert_eq!(t.pilots_used, pilots::two_phase(&act, v, chi, 1));
        let d = run_farfield_dft(&ch, &dft, &act, &cfg, &model, &mut rng).unwrap();
        prop_assert_eq!(d.pilots_used, pilots::dft(&act));
        for m in [1, 4] {
            let s = run_subarray_multibeam(&ch, m, &act, &cfg, &model, &mut rng).unwrap();
            prop_assert_eq!(s.pilots_used, pilots::subarray(n, m));
        }
    }

    #[test]
    fn phase_two_candidates_stay_on_the_grid(n in prop::sample::select(vec![129usize, 257, 513]), pick in 0usize..16) {
        let cfg = ArrayConfig::new(n, 30e9).unwrap();
        let ms: Vec<usize> = intervals(&cfg).into_iter().filter(|&m| m > 1).collect();
        let act = SparseActivation::new(ms[pick % ms.len()], &cfg).unwrap();
        let mut covered = vec![0usize; act.angle_bins() + 1];
        for g in central_sector(&act).unwrap() {
            let cands = phase_two_candidates(g, &act);
            prop_assert_eq!(cands.len(), act.interval());
            for s in cands {
                prop_assert!((1..=act.angle_bins()).contains(&s));
                covered[s] += 1;
            }
        }
        prop_assert!(covered[1..].iter().all(|&c| c == 1));
    }
}
