//! Instance generators: random instances with a known optimum and the
//! worst-case families for the heuristics.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::model::{int, ratio, Instance, Rational};

/// Random integer sizes in `[1, S-1]` summing exactly to `S`.
pub fn generate_items<R: Rng + ?Sized>(capacity: u64, rng: &mut R) -> Result<Vec<u64>> {
    if capacity <= 1 {
        return invalid("capacity must exceed 1");
    }
    let mut out = Vec::new();
    let mut sum = 0u64;
    loop {
        let r = rng.random_range(1..capacity);
        if sum + r > capacity {
            out.push(capacity - sum);
            break;
        }
        out.push(r);
        sum += r;
        if sum == capacity {
            break;
        }
    }
    Ok(out)
}

/// A shuffled instance with a perfect packing into `opt` bins, plus that packing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub instance: Instance,
    pub opt: u32,
    /// Item ids of each full bin, before shuffling mapped to final positions.
    pub certificate: Vec<Vec<usize>>,
}

pub fn generate_instance(capacity: u64, opt: u32, seed: u64) -> Result<Generated> {
    if opt < 1 {
        return invalid("opt must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes = Vec::new();
    let mut groups = Vec::new();
    for _ in 0..opt {
        let batch = generate_items(capacity, &mut rng)?;
        groups.push((sizes.len()..sizes.len() + batch.len()).collect::<Vec<_>>());
        sizes.extend(batch);
    }
    let mut perm: Vec<usize> = (0..sizes.len()).collect();
    perm.shuffle(&mut rng);
    // perm[new] = old
    let mut position = vec![0; sizes.len()];
    for (new, &old) in perm.iter().enumerate() {
        position[old] = new;
    }
    let shuffled: Vec<u64> = perm.iter().map(|&old| sizes[old]).collect();
    let certificate = groups
        .into_iter()
        .map(|g| {
            let mut ids: Vec<usize> = g.into_iter().map(|old| position[old]).collect();
            ids.sort_unstable();
            ids
        })
        .collect();
    Ok(Generated { instance: Instance::new(shuffled, capacity)?, opt, certificate })
}

fn expand(spec: &[(u64, usize)]) -> Vec<u64> {
    spec.iter().flat_map(|&(s, c)| core::iter::repeat_n(s, c)).collect()
}

/// Classic first-fit worst case: OPT = 10, FF = 17.
pub fn johnson_ff_instance() -> Instance {
    let sizes = expand(&[(6, 7), (10, 7), (16, 3), (34, 10), (51, 10)]);
    Instance::new(sizes, 101).expect("static instance")
}

/// FFk uses 11 bins for two copies where 8 suffice.
pub fn ratio1375_instance() -> Instance {
    Instance::new(vec![371, 659, 113, 47, 485, 3, 228, 419, 468, 581, 626], 1000)
        .expect("static instance")
}

/// FFDk needs `8 + 7(k-1)` bins while `6k` suffice.
pub fn ffd_lower_instance(delta: &Rational) -> Result<Instance> {
    if !(delta > &int(0) && delta < &ratio(1, 100)) {
        return invalid("delta must lie in (0, 1/100)");
    }
    let half = ratio(1, 2);
    let quarter = ratio(1, 4);
    let two = int(2);
    let mut sizes = Vec::new();
    sizes.extend(core::iter::repeat_n(&half + delta, 4));
    sizes.extend(core::iter::repeat_n(&quarter + &two * delta, 4));
    sizes.extend(core::iter::repeat_n(&quarter + delta, 4));
    sizes.extend(core::iter::repeat_n(&quarter - &two * delta, 8));
    Instance::from_rationals(&sizes, &int(1))
}

/// `y` pairs `(1/2, eps)`; NFk needs `k y` bins while `k (y/2 + 1)` suffice.
pub fn nf_lower_instance(y: u32, eps: &Rational) -> Result<Instance> {
    if y == 0 || !y.is_multiple_of(2) {
        return invalid("y must be a positive even integer");
    }
    if !(eps > &int(0) && eps < &ratio(1, y)) {
        return invalid("eps must lie in (0, 1/y)");
    }
    let mut sizes = Vec::new();
    for _ in 0..y {
        sizes.push(ratio(1, 2));
        sizes.push(eps.clone());
    }
    Instance::from_rationals(&sizes, &int(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::{ffdk, ffk, nfk};
    use crate::model::{validate, ItemCopy, KPacking};
    use proptest::prelude::*;

    #[test]
    fn items_sum_to_capacity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let l = generate_items(100, &mut rng).unwrap();
            assert_eq!(l.iter().sum::<u64>(), 100);
            assert!(l.iter().all(|&s| (1..=99).contains(&s)));
        }
        assert!(generate_items(1, &mut rng).is_err());
    }

    #[test]
    fn seeded_items_repeat() {
        let a = generate_items(10, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = generate_items(10, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn opt_one_is_one_full_bin() {
        let g = generate_instance(10, 1, 3).unwrap();
        assert_eq!(g.instance.volume_units(), 10);
        assert_eq!(g.certificate.len(), 1);
    }

    #[test]
    fn johnson_family() {
        let d = johnson_ff_instance();
        assert_eq!(d.len(), 37);
        for k in 1..=6u32 {
            assert_eq!(ffk(&d, k).unwrap().len(), 17 + 10 * (k as usize - 1));
        }
    }

    #[test]
    fn ratio_family() {
        let d = ratio1375_instance();
        for k in 2..=9u32 {
            assert_eq!(ffk(&d, k).unwrap().len(), 4 * k as usize + 3);
        }
    }

    fn ffd_witness(inst: &Instance, k: u32) -> KPacking {
        // two bin types: {1/2+d, 1/4+d, 1/4-2d} and {1/4+2d, 1/4+2d, 1/4-2d, 1/4-2d}
        let mut bins = Vec::new();
        for copy in 1..=k {
            for i in 0..4 {
                bins.push(vec![
                    ItemCopy::new(i, copy),
                    ItemCopy::new(8 + i, copy),
                    ItemCopy::new(12 + i, copy),
                ]);
            }
            for j in 0..2 {
                bins.push(vec![
                    ItemCopy::new(4 + 2 * j, copy),
                    ItemCopy::new(5 + 2 * j, copy),
                    ItemCopy::new(16 + 2 * j, copy),
                    ItemCopy::new(17 + 2 * j, copy),
                ]);
            }
        }
        KPacking::from_contents(inst, k, bins)
    }

    #[test]
    fn ffd_family() {
        let d = ffd_lower_instance(&ratio(1, 1000)).unwrap();
        for k in 1..=3u32 {
            assert_eq!(ffdk(&d, k).unwrap().len(), 8 + 7 * (k as usize - 1));
            let w = ffd_witness(&d, k);
            assert!(validate(&d, &w).is_empty());
            assert_eq!(w.len(), 6 * k as usize);
        }
        assert!(ffd_lower_instance(&ratio(1, 100)).is_err());
    }

    #[test]
    fn nf_family() {
        let d = nf_lower_instance(10, &ratio(1, 20)).unwrap();
        for k in 1..=2u32 {
            assert_eq!(nfk(&d, k).unwrap().len(), 10 * k as usize);
        }
        let d = nf_lower_instance(2, &ratio(1, 4)).unwrap();
        assert_eq!(nfk(&d, 3).unwrap().len(), 6);
        assert!(nf_lower_instance(3, &ratio(1, 20)).is_err());
        assert!(nf_lower_instance(10, &ratio(1, 10)).is_err());
    }

    proptest! {
        #[test]
        fn certificate_is_perfect_packing(s in 2u64..200, opt in 1u32..8, seed: u64) {
            let g = generate_instance(s, opt, seed).unwrap();
            prop_assert_eq!(g.instance.volume_units(), opt as u128 * s as u128);
            let bins: Vec<Vec<ItemCopy>> = g
                .certificate
                .iter()
                .map(|b| b.iter().map(|&i| ItemCopy::new(i, 1)).collect())
                .collect();
            let p = KPacking::from_contents(&g.instance, 1, bins);
            prop_assert!(validate(&g.instance, &p).is_empty());
            prop_assert!(p.bins.iter().all(|b| b.load == s));
        }
    }
}
