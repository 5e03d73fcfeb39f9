//! Cross-module checks through the public API.

use kbin_core::configlp::{dlvl_kbp, kk1_kbp, kk2_default_eps, kk2_kbp, solve_fk, ConfigProgram};
use kbin_core::exact::{opt_kbp, DEFAULT_BUDGET};
use kbin_core::gen::generate_instance;
use kbin_core::heuristics::{ffdk, ffk, nfk};
use kbin_core::model::{int, ratio};
use kbin_core::{size_classes, validate, Instance};
use proptest::prelude::*;

#[test]
fn generated_optimum_is_recovered_by_exact_search() {
    for seed in 0..20 {
        let g = generate_instance(20, 3, seed).unwrap();
        let r = opt_kbp(&g.instance, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(g.certificate.len(), 3);
        for bin in &g.certificate {
            assert_eq!(bin.iter().map(|&i| g.instance.size(i)).sum::<u64>(), 20);
        }
        assert!(r.proven);
        assert_eq!(r.count, 6, "seed {seed}");
    }
}

#[test]
fn schemes_never_beat_the_optimum() {
    let g = generate_instance(50, 3, 9).unwrap();
    let d = &g.instance;
    for k in 1..=2 {
        let opt = 3 * k as usize;
        for p in [
            dlvl_kbp(d, k, &ratio(1, 2)).unwrap().packing,
            kk1_kbp(d, k, &ratio(1, 2)).unwrap().packing,
            kk2_kbp(d, k, &kk2_default_eps(d), 2).unwrap().packing,
        ] {
            assert!(validate(d, &p).is_empty());
            assert!(p.len() >= opt);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heuristics_bracket_the_lp(sizes in prop::collection::vec(1u64..=25, 1..8), k in 1u32..=3) {
        let d = Instance::new(sizes, 25).unwrap();
        let program = ConfigProgram::new(size_classes(&d), d.capacity(), k).unwrap();
        let lin = solve_fk(&program).unwrap().value;
        let opt = opt_kbp(&d, k, DEFAULT_BUDGET).unwrap();
        prop_assume!(opt.proven);
        prop_assert!(lin <= int(opt.count as u64));
        for p in [ffk(&d, k).unwrap(), ffdk(&d, k).unwrap(), nfk(&d, k).unwrap()] {
            prop_assert!(validate(&d, &p).is_empty());
            prop_assert!(p.len() >= opt.count);
        }
    }
}
