//! JSON and CSV encodings for instances and packings.
//!
//! Instance values are either JSON numbers (read exactly from their decimal
//! text) or `{"num": .., "den": ..}` objects.

use std::io::Write;

use kbin_core::model::ratio;
use kbin_core::{Instance, ItemCopy, KPacking, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{KbinError, Result};

/// Exact value of a decimal literal such as `12`, `0.25` or `1.5e-3`.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(p) => (&text[..p], text[p + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{whole}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Some(r)
}

fn value_to_rational(v: &Value, what: &str) -> Result<Rational> {
    match v {
        Value::Number(n) => parse_decimal(&n.to_string())
            .ok_or_else(|| KbinError::Format(format!("{what}: bad number {n}"))),
        Value::Object(map) => {
            let part = |key: &str| -> Result<BigInt> {
                let raw = map
                    .get(key)
                    .ok_or_else(|| KbinError::Format(format!("{what}: missing \"{key}\"")))?;
                let text = match raw {
                    Value::Number(n) => n.to_string(),
                    Value::String(s) => s.clone(),
                    _ => return Err(KbinError::Format(format!("{what}: \"{key}\" must be an integer"))),
                };
                text.parse()
                    .map_err(|_| KbinError::Format(format!("{what}: \"{key}\" must be an integer")))
            };
            let den = part("den")?;
            if den.is_zero() {
                return Err(KbinError::Format(format!("{what}: zero denominator")));
            }
            Ok(Rational::new(part("num")?, den))
        }
        _ => Err(KbinError::Format(format!("{what}: expected a number or {{num, den}}"))),
    }
}

fn rational_to_value(r: &Rational) -> Value {
    if r.denom().is_one() {
        serde_json::from_str(&r.numer().to_string()).expect("integer literal")
    } else {
        let n: Value = serde_json::from_str(&r.numer().to_string()).expect("integer literal");
        let d: Value = serde_json::from_str(&r.denom().to_string()).expect("integer literal");
        json!({ "num": n, "den": d })
    }
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let v: Value = serde_json::from_str(text)?;
    let cap = v.get("capacity").ok_or_else(|| KbinError::Format("missing \"capacity\"".into()))?;
    let capacity = value_to_rational(cap, "capacity")?;
    let items = v
        .get("items")
        .and_then(Value::as_array)
        .ok_or_else(|| KbinError::Format("missing \"items\" array".into()))?;
    let sizes = items
        .iter()
        .enumerate()
        .map(|(i, x)| value_to_rational(x, &format!("item {i}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Instance::from_rationals(&sizes, &capacity)?)
}

pub fn instance_to_value(inst: &Instance) -> Value {
    let unit = inst.unit();
    let items: Vec<Value> = inst.sizes().iter().map(|&s| rational_to_value(&ratio(s, unit))).collect();
    json!({ "capacity": rational_to_value(&ratio(inst.capacity(), unit)), "items": items })
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&instance_to_value(inst)).expect("serializable")
}

pub fn read_instance(path: &std::path::Path) -> Result<Instance> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct CopyRef {
    item: usize,
    copy: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct PackingFile {
    k: u32,
    bins: Vec<Vec<CopyRef>>,
}

pub fn packing_to_value(p: &KPacking) -> Value {
    let file = PackingFile {
        k: p.k,
        bins: p
            .bins
            .iter()
            .map(|b| b.contents.iter().map(|c| CopyRef { item: c.item, copy: c.copy }).collect())
            .collect(),
    };
    serde_json::to_value(file).expect("serializable")
}

pub fn packing_to_json(p: &KPacking) -> String {
    serde_json::to_string_pretty(&packing_to_value(p)).expect("serializable")
}

/// Loads are recomputed from `inst`.
pub fn packing_from_json(inst: &Instance, text: &str) -> Result<KPacking> {
    let file: PackingFile = serde_json::from_str(text)?;
    if let Some(c) = file.bins.iter().flatten().find(|c| c.item >= inst.len()) {
        return Err(KbinError::Format(format!("unknown item {}", c.item)));
    }
    let contents = file
        .bins
        .into_iter()
        .map(|b| b.into_iter().map(|c| ItemCopy::new(c.item, c.copy)).collect())
        .collect();
    Ok(KPacking::from_contents(inst, file.k, contents))
}

/// One `bin,item,copy` row per placed copy.
pub fn write_packing_csv<W: Write>(p: &KPacking, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["bin", "item", "copy"])?;
    for (b, bin) in p.bins.iter().enumerate() {
        for c in &bin.contents {
            out.write_record([b.to_string(), c.item.to_string(), c.copy.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Parses `p/q` or a decimal.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || KbinError::InvalidArgument(format!("not a rational number: {text}"));
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => parse_decimal(text.trim()).ok_or_else(bad),
    }
}

pub fn rational_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_json(r: &Rational) -> Value {
    rational_to_value(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use kbin_core::model::int;
    use kbin_core::gen::ffd_lower_instance;
    use kbin_core::heuristics::ffk;
    use proptest::prelude::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("0.1"), Some(ratio(1, 10)));
        assert_eq!(parse_decimal("1.5e-3"), Some(ratio(3, 2000)));
        assert_eq!(parse_decimal("-2E2"), Some(int(-200)));
        assert_eq!(parse_decimal("7"), Some(int(7)));
        assert_eq!(parse_decimal("."), None);
        assert_eq!(parse_decimal("1x"), None);
    }

    #[test]
    fn integer_instance() {
        let inst = instance_from_json(r#"{"capacity": 31, "items": [10, 20, 11]}"#).unwrap();
        assert_eq!(inst.sizes(), &[10, 20, 11]);
        assert_eq!(inst.capacity(), 31);
        assert_eq!(instance_from_json(&instance_to_json(&inst)).unwrap(), inst);
    }

    #[test]
    fn mixed_rational_instance() {
        let text = r#"{"capacity": {"num": 1, "den": 1}, "items": [0.5, {"num": 1, "den": 3}, 0.25]}"#;
        let inst = instance_from_json(text).unwrap();
        assert_eq!(inst.unit(), 12);
        assert_eq!(inst.sizes(), &[6, 4, 3]);
        assert_eq!(instance_from_json(&instance_to_json(&inst)).unwrap(), inst);
    }

    #[test]
    fn malformed_instances() {
        assert!(instance_from_json(r#"{"items": [1]}"#).is_err());
        assert!(instance_from_json(r#"{"capacity": 3, "items": []}"#).is_err());
        assert!(instance_from_json(r#"{"capacity": 3, "items": [4]}"#).is_err());
        assert!(instance_from_json(r#"{"capacity": 3, "items": [{"num": 1, "den": 0}]}"#).is_err());
        assert!(instance_from_json(r#"{"capacity": 3, "items": ["a"]}"#).is_err());
    }

    #[test]
    fn lemma_instance_round_trips() {
        let inst = ffd_lower_instance(&ratio(1, 1000)).unwrap();
        assert_eq!(instance_from_json(&instance_to_json(&inst)).unwrap(), inst);
    }

    #[test]
    fn packing_round_trip() {
        let inst = Instance::new(vec![10, 20, 11], 31).unwrap();
        let p = ffk(&inst, 2).unwrap();
        let text = packing_to_json(&p);
        assert!(text.contains("\"copy\""));
        assert_eq!(packing_from_json(&inst, &text).unwrap(), p);
        let mut buf = Vec::new();
        write_packing_csv(&p, &mut buf).unwrap();
        let csv = String::from_utf8(buf).unwrap();
        assert_eq!(csv.lines().next(), Some("bin,item,copy"));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn rational_arguments() {
        assert_eq!(parse_rational("1/4").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("0.5").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert_eq!(rational_string(&ratio(6, 4)), "3/2");
        assert_eq!(rational_string(&int(5)), "5");
    }

    proptest! {
        #[test]
        fn json_round_trip(
            sizes in prop::collection::vec((1u64..50, 1u64..9), 1..12),
        ) {
            let rs: Vec<Rational> = sizes.iter().map(|&(n, d)| ratio(n, d)).collect();
            let cap = rs.iter().max().unwrap().clone() + ratio(1, 7);
            let inst = Instance::from_rationals(&rs, &cap).unwrap();
            prop_assert_eq!(instance_from_json(&instance_to_json(&inst)).unwrap(), inst);
        }
    }
}
