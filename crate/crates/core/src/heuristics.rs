//! FFk, FFDk and NFk over the replicated sequence D_k.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::firstfit::FirstFit;
use crate::model::{Instance, ItemCopy, KPacking};

/// First fit over `order` repeated `k` times. Sizes may be zero; every size
/// must be at most `capacity`.
pub fn first_fit_rounds(sizes: &[u64], capacity: u64, order: &[usize], k: u32) -> Vec<Vec<ItemCopy>> {
    let mut ff = FirstFit::new(sizes, capacity);
    for copy in 1..=k {
        for &item in order {
            ff.place(ItemCopy { item, copy });
        }
    }
    ff.into_bins()
}

/// Next fit over `order` repeated `k` times.
pub fn next_fit_rounds(sizes: &[u64], capacity: u64, order: &[usize], k: u32) -> Vec<Vec<ItemCopy>> {
    let mut bins: Vec<Vec<ItemCopy>> = Vec::new();
    let mut load = 0u64;
    for copy in 1..=k {
        for &item in order {
            let s = sizes[item];
            let open_ok = bins
                .last()
                .is_some_and(|b| load + s <= capacity && b.iter().all(|c| c.item != item));
            if !open_ok {
                bins.push(Vec::new());
                load = 0;
            }
            load += s;
            bins.last_mut().unwrap().push(ItemCopy { item, copy });
        }
    }
    bins
}

fn check_k(k: u32) -> Result<()> {
    if k < 1 {
        return invalid("k must be at least 1");
    }
    Ok(())
}

pub fn ffk(instance: &Instance, k: u32) -> Result<KPacking> {
    check_k(k)?;
    let order: Vec<usize> = (0..instance.len()).collect();
    let bins = first_fit_rounds(instance.sizes(), instance.capacity(), &order, k);
    Ok(KPacking::from_contents(instance, k, bins))
}

/// FFk on the instance sorted by non-increasing size (ties by id).
pub fn ffdk(instance: &Instance, k: u32) -> Result<KPacking> {
    check_k(k)?;
    let order = instance.decreasing_order();
    let bins = first_fit_rounds(instance.sizes(), instance.capacity(), &order, k);
    Ok(KPacking::from_contents(instance, k, bins))
}

pub fn nfk(instance: &Instance, k: u32) -> Result<KPacking> {
    check_k(k)?;
    let order: Vec<usize> = (0..instance.len()).collect();
    let bins = next_fit_rounds(instance.sizes(), instance.capacity(), &order, k);
    Ok(KPacking::from_contents(instance, k, bins))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::model::validate;
    use alloc::vec;

    fn contents(p: &KPacking) -> Vec<Vec<(usize, u32)>> {
        p.bins.iter().map(|b| b.contents.iter().map(|c| (c.item, c.copy)).collect()).collect()
    }

    #[test]
    fn ffk_three_items_twice() {
        let inst = Instance::new(vec![10, 20, 11], 31).unwrap();
        let p = ffk(&inst, 2).unwrap();
        assert_eq!(contents(&p), vec![vec![(0, 1), (1, 1)], vec![(2, 1), (0, 2)], vec![(1, 2), (2, 2)]]);
        assert!(validate(&inst, &p).is_empty());
    }

    #[test]
    fn ffk_ratio_instance_two_copies() {
        let p = ffk(&gen::ratio1375_instance(), 2).unwrap();
        assert_eq!(p.len(), 11);
    }

    #[test]
    fn single_item_copies_never_share() {
        let inst = Instance::new(vec![5], 10).unwrap();
        assert_eq!(ffk(&inst, 4).unwrap().len(), 4);
        assert_eq!(nfk(&inst, 1).unwrap().len(), 1);
    }

    #[test]
    fn ffdk_three_items_twice() {
        let inst = Instance::new(vec![101, 102, 103], 205).unwrap();
        let p = ffdk(&inst, 2).unwrap();
        assert_eq!(contents(&p), vec![vec![(2, 1), (1, 1)], vec![(0, 1), (2, 2)], vec![(1, 2), (0, 2)]]);
    }

    #[test]
    fn ffdk_lower_family() {
        let inst = gen::ffd_lower_instance(&crate::model::ratio(1, 1000)).unwrap();
        assert_eq!(ffdk(&inst, 2).unwrap().len(), 15);
    }

    #[test]
    fn ffdk_on_sorted_input_is_ffk() {
        let inst = Instance::new(vec![9, 7, 7, 4, 2], 12).unwrap();
        assert_eq!(ffdk(&inst, 1).unwrap(), ffk(&inst, 1).unwrap());
    }

    #[test]
    fn nfk_examples() {
        let inst = gen::nf_lower_instance(10, &crate::model::ratio(1, 20)).unwrap();
        assert_eq!(nfk(&inst, 2).unwrap().len(), 20);
        let inst = Instance::new(vec![10, 20, 11], 31).unwrap();
        let p = nfk(&inst, 1).unwrap();
        assert_eq!(contents(&p), vec![vec![(0, 1), (1, 1)], vec![(2, 1)]]);
    }

    #[test]
    fn zero_k_rejected() {
        let inst = Instance::new(vec![1], 1).unwrap();
        assert!(ffk(&inst, 0).is_err());
        assert!(ffdk(&inst, 0).is_err());
        assert!(nfk(&inst, 0).is_err());
    }
}
