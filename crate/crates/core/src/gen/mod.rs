//! Seeded input generation: sampling, precondition-conditioned sampling,
//! mutation and shrinking.

mod config;
mod mutate;
mod rng;
mod sample;
pub mod shrink;

pub use config::{ConfigError, GenConfig};
pub use mutate::{mutant_stream, mutate};
pub use rng::Rng;
pub use sample::{sample, sample_satisfying, Exhausted};
pub use shrink::{shrink, shrink_tuple};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sem::Value;
    use crate::syntax::{parse, parse_expr_in, SemType};

    #[test]
    fn sampling_is_deterministic() {
        let cfg = GenConfig::default();
        let ty = SemType::list(SemType::pair(SemType::Int, SemType::Text));
        let a: Vec<_> = (0..20).map(|i| sample(&ty, &mut Rng::new(7).fork(i), &cfg)).collect();
        let b: Vec<_> = (0..20).map(|i| sample(&ty, &mut Rng::new(7).fork(i), &cfg)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn samples_respect_bounds() {
        let cfg = GenConfig { size_bound: 4, int_magnitude: 6, ..GenConfig::default() };
        let ty = SemType::array(SemType::Int);
        let mut rng = Rng::new(11);
        for _ in 0..300 {
            let v = sample(&ty, &mut rng, &cfg);
            assert!(v.has_type(&ty));
            let xs = v.elements().unwrap();
            assert!(xs.len() <= 4);
            for x in xs {
                let n = x.as_integer().unwrap().to_i64().unwrap();
                assert!((-6..=6).contains(&n));
            }
        }
    }

    #[test]
    fn bools_cover_both_values() {
        let cfg = GenConfig::default();
        let mut rng = Rng::new(0);
        let seen: std::collections::BTreeSet<_> =
            (0..50).map(|_| sample(&SemType::Bool, &mut rng, &cfg).as_bool().unwrap()).collect();
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn conditioned_sampling() {
        let prog = parse("").unwrap();
        let params = vec![("a".into(), SemType::array(SemType::Nat))];
        let (pre, _) = parse_expr_in(&prog, &params, "a.size > 1").unwrap();
        let cfg = GenConfig::default();
        for seed in 0..10 {
            let vals = sample_satisfying(&prog, &params, &pre, &mut Rng::new(seed), &cfg).unwrap();
            assert!(vals[0].len().unwrap() > 1);
        }
        let (never, _) = parse_expr_in(&prog, &params, "a.size > 100").unwrap();
        let cfg = GenConfig { rejection_budget: 5, ..cfg };
        assert_eq!(sample_satisfying(&prog, &params, &never, &mut Rng::new(0), &cfg), Err(Exhausted { accept_count: 0, attempts: 5 }));
    }

    #[test]
    fn mutant_streams_exclude_original_and_extend() {
        let cfg = GenConfig::default();
        let ty = SemType::array(SemType::Int);
        let v = Value::Array([1, 2].map(Value::int).to_vec());
        for seed in 0..10 {
            let rng = Rng::new(seed);
            let long = mutant_stream(&ty, &v, 40, &rng, &cfg);
            assert_eq!(long.len(), 40);
            assert!(long.iter().all(|m| m != &v && m.has_type(&ty)));
            assert_eq!(mutant_stream(&ty, &v, 10, &rng, &cfg)[..], long[..10]);
        }
        let bools = mutant_stream(&SemType::Bool, &Value::Bool(true), 3, &Rng::new(1), &cfg);
        assert_eq!(bools, vec![Value::Bool(false); 3]);
    }
}
