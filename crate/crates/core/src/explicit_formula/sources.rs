//! Sources of normalized prime coefficients `C(𝔭)`, with `Λ(𝔭) = C(𝔭) log N(𝔭)`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::nf::{PrimeIdeal, QuadField};
use crate::registry::{Named, Registry};
use crate::sato_tate::sample_trace;

pub trait CoefficientSource: Send + Sync {
    fn coefficient(&self, p: &PrimeIdeal) -> Result<f64>;
}

fn key(p: &PrimeIdeal) -> (i64, i64, i64) {
    p.ideal.hnf()
}

/// Values read from a `prime_norm,lambda` file. Both primes above a split
/// rational prime receive the value stored for their common norm.
#[derive(Debug, Clone, Default)]
pub struct FileBacked {
    values: HashMap<u64, f64>,
}

impl FileBacked {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Parse(format!("line {}: expected `prime_norm,lambda`, got `{raw}`", lineno + 1));
            let (n, v) = line.split_once(',').ok_or_else(bad)?;
            let n: u64 = n.trim().parse().map_err(|_| bad())?;
            let v: f64 = v.trim().parse().map_err(|_| bad())?;
            if !v.is_finite() {
                return Err(bad());
            }
            values.insert(n, v);
        }
        Ok(Self { values })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, f64)>) -> Self {
        Self { values: pairs.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl CoefficientSource for FileBacked {
    fn coefficient(&self, p: &PrimeIdeal) -> Result<f64> {
        self.values.get(&p.norm).copied().ok_or(Error::MissingCoefficient(p.norm))
    }
}

/// Independent Sato-Tate draws `C(𝔭) = 2 cos θ_𝔭` for every prime ideal of
/// norm up to a cutoff, taken in enumeration order from ChaCha stream
/// `stream` of `seed`.
#[derive(Debug, Clone)]
pub struct SatoTate {
    values: HashMap<(i64, i64, i64), f64>,
}

impl SatoTate {
    pub fn generate(field: &QuadField, cutoff: u64, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let values = field
            .enumerate_prime_ideals(cutoff)
            .iter()
            .map(|p| (key(p), sample_trace(&mut rng)))
            .collect();
        Self { values }
    }
}

impl CoefficientSource for SatoTate {
    fn coefficient(&self, p: &PrimeIdeal) -> Result<f64> {
        self.values.get(&key(p)).copied().ok_or(Error::MissingCoefficient(p.norm))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl CoefficientSource for Zero {
    fn coefficient(&self, _p: &PrimeIdeal) -> Result<f64> {
        Ok(0.0)
    }
}

/// `λ_{f×g}(𝔭) = C_f(𝔭) C_g(𝔭)`.
#[derive(Clone)]
pub struct RsProduct {
    pub f: Arc<dyn CoefficientSource>,
    pub g: Arc<dyn CoefficientSource>,
}

impl CoefficientSource for RsProduct {
    fn coefficient(&self, p: &PrimeIdeal) -> Result<f64> {
        Ok(self.f.coefficient(p)? * self.g.coefficient(p)?)
    }
}

/// Everything a named factory may need to build a source.
#[derive(Debug, Clone)]
pub struct SourceSpec {
    pub field: QuadField,
    pub cutoff: u64,
    pub seed: Option<u64>,
    pub path: Option<PathBuf>,
}

pub trait SourceFactory: Named + Send + Sync {
    fn build(&self, spec: &SourceSpec) -> Result<Arc<dyn CoefficientSource>>;
}

struct FileFactory;
struct SatoTateFactory;
struct ZeroFactory;

impl Named for FileFactory {
    fn name(&self) -> &'static str {
        "file"
    }
}

impl SourceFactory for FileFactory {
    fn build(&self, spec: &SourceSpec) -> Result<Arc<dyn CoefficientSource>> {
        let Some(path) = &spec.path else {
            return invalid("file coefficient source needs a path");
        };
        Ok(Arc::new(FileBacked::from_path(path)?))
    }
}

impl Named for SatoTateFactory {
    fn name(&self) -> &'static str {
        "sato-tate"
    }
}

impl SourceFactory for SatoTateFactory {
    fn build(&self, spec: &SourceSpec) -> Result<Arc<dyn CoefficientSource>> {
        let Some(seed) = spec.seed else {
            return invalid("sato-tate coefficient source needs a seed");
        };
        Ok(Arc::new(SatoTate::generate(&spec.field, spec.cutoff, seed, 0)))
    }
}

impl Named for ZeroFactory {
    fn name(&self) -> &'static str {
        "zero"
    }
}

impl SourceFactory for ZeroFactory {
    fn build(&self, _spec: &SourceSpec) -> Result<Arc<dyn CoefficientSource>> {
        Ok(Arc::new(Zero))
    }
}

pub fn source_factories() -> Registry<dyn SourceFactory> {
    let mut reg: Registry<dyn SourceFactory> = Registry::new("coefficient source");
    reg.register(Arc::new(FileFactory))
        .register(Arc::new(SatoTateFactory))
        .register(Arc::new(ZeroFactory));
    reg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_file() {
        let f = FileBacked::parse("# tau(p)/p^(11/2)\n2, -0.53\n3,0.599 # trailing\n\n").unwrap();
        assert_eq!(f.len(), 2);
        let q = QuadField::rationals();
        let p2 = q.primes_above(2).unwrap()[0];
        let p5 = q.primes_above(5).unwrap()[0];
        assert_eq!(f.coefficient(&p2).unwrap(), -0.53);
        assert_eq!(f.coefficient(&p5), Err(Error::MissingCoefficient(5)));
        assert!(matches!(FileBacked::parse("2;1.0"), Err(Error::Parse(_))));
        assert!(matches!(FileBacked::parse("x,1.0"), Err(Error::Parse(_))));
    }

    #[test]
    fn sato_tate_is_seeded_and_bounded() {
        let f = QuadField::new(5).unwrap();
        let a = SatoTate::generate(&f, 500, 4, 0);
        let b = SatoTate::generate(&f, 500, 4, 0);
        let c = SatoTate::generate(&f, 500, 4, 1);
        let primes = f.enumerate_prime_ideals(500);
        let mut differs = false;
        for p in &primes {
            let v = a.coefficient(p).unwrap();
            assert!(v.abs() <= 2.0);
            assert_eq!(v, b.coefficient(p).unwrap());
            differs |= v != c.coefficient(p).unwrap();
        }
        assert!(differs);
    }

    #[test]
    fn factories() {
        let reg = source_factories();
        assert_eq!(reg.names().collect::<Vec<_>>(), vec!["file", "sato-tate", "zero"]);
        let spec = SourceSpec { field: QuadField::rationals(), cutoff: 100, seed: None, path: None };
        assert!(reg.get("sato-tate").unwrap().build(&spec).is_err());
        assert!(reg.get("file").unwrap().build(&spec).is_err());
        let z = reg.get("zero").unwrap().build(&spec).unwrap();
        let p = spec.field.primes_above(7).unwrap()[0];
        assert_eq!(z.coefficient(&p).unwrap(), 0.0);
        let rs = RsProduct { f: Arc::new(FileBacked::from_pairs([(7, 1.5)])), g: Arc::new(FileBacked::from_pairs([(7, -2.0)])) };
        assert_eq!(rs.coefficient(&p).unwrap(), -3.0);
    }
}
