use nearfield::beampattern::{grating_lobes, m_threshold};
use nearfield::codebook::{build_multi_beam_codebook, build_single_beam_codebook};
use nearfield::geometry::{ArrayConfig, SparseActivation};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn codewords_are_unit_norm_with_exact_zeros(
        n in prop::sample::select(vec![65usize, 129, 257]),
        pick in 0usize..8,
        v in 1usize..=4,
    ) {
        let cfg = ArrayConfig::new(n, 30e9).unwrap();
        let ms: Vec<usize> = (2..n).filter(|m| (n - 1) % m == 0 && *m as f64 <= m_threshold(&cfg)).collect();
        let act = SparseActivation::new(ms[pick % ms.len()], &cfg).unwrap();
        let single = build_single_beam_codebook(&act, v, &cfg).unwrap();
        let multi = build_multi_beam_codebook(&act, v, &cfg).unwrap();
        prop_assert_eq!(single.len(), act.angle_bins() * v);
        prop_assert_eq!(multi.len(), act.active_count() * v);
        for w in single.codewords().iter().chain(multi.codewords()) {
            let norm: f64 = w.weights().iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-12);
            let modulus = w.weights()[w.support()[0]].norm();
            for (i, x) in w.weights().iter().enumerate() {
                if w.support().contains(&i) {
                    prop_assert!((x.norm() - modulus).abs() < 1e-14);
                } else {
                    prop_assert_eq!(x.norm(), 0.0);
                }
            }
        }
        // multi-beam lobes land on single-beam grid ranges
        for (s, v) in multi.indices() {
            let lobes = grating_lobes(&multi.steer(s, v), &act, &cfg).lobes;
            for lobe in lobes {
                let hit = single.indices().filter(|&(_, vv)| vv == v).any(|(ss, vv)| {
                    (single.angle(ss) - lobe.spatial_angle()).abs() < 1e-12
                        && (single.range(ss, vv) - lobe.range()).abs() < 1e-12 * lobe.range()
                });
                prop_assert!(hit);
            }
        }
    }
}
