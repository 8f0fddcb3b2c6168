use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::FragmentError;

/// Retained fraction `num/den` of a file, `0 < num < den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ratio {
    num: u32,
    den: u32,
}

impl Ratio {
    pub fn new(num: u32, den: u32) -> Result<Ratio, FragmentError> {
        if num == 0 || num >= den {
            return Err(FragmentError::InvalidRatio(format!("{num}/{den}")));
        }
        Ok(Ratio { num, den })
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    /// `floor(num/den * len)` in exact integer arithmetic.
    pub fn cut_point(&self, len: usize) -> usize {
        ((len as u128 * self.num as u128) / self.den as u128) as usize
    }

    /// Directory-safe tag, e.g. `ratio_2_5`.
    pub fn tag(&self) -> String {
        format!("ratio_{}_{}", self.num, self.den)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// The three input sets used throughout: 2/5, 3/5 and 4/5.
    pub fn standard_set() -> Vec<Ratio> {
        vec![
            Ratio { num: 2, den: 5 },
            Ratio { num: 3, den: 5 },
            Ratio { num: 4, den: 5 },
        ]
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Ratio {
    type Err = FragmentError;

    fn from_str(s: &str) -> Result<Ratio, FragmentError> {
        let bad = || FragmentError::InvalidRatio(s.to_string());
        let (n, d) = s.trim().split_once('/').ok_or_else(bad)?;
        let num = n.trim().parse().map_err(|_| bad())?;
        let den = d.trim().parse().map_err(|_| bad())?;
        Ratio::new(num, den)
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Ratio, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One sliced file: the input fragment is `full[..cut]`, the real
/// (ground-truth) continuation is `full[cut..]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentRecord {
    source_id: String,
    full_bytes: Vec<u8>,
    cut: usize,
    ratio: Ratio,
}

impl FragmentRecord {
    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn full_bytes(&self) -> &[u8] {
        &self.full_bytes
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    pub fn ratio(&self) -> Ratio {
        self.ratio
    }

    pub fn input_fragment(&self) -> &[u8] {
        &self.full_bytes[..self.cut]
    }

    pub fn real_fragment(&self) -> &[u8] {
        &self.full_bytes[self.cut..]
    }

    /// Bytes the predictor has to produce.
    pub fn continuation_len(&self) -> usize {
        self.full_bytes.len() - self.cut
    }
}

pub fn slice_fragment(
    source_id: impl Into<String>,
    full_bytes: Vec<u8>,
    ratio: Ratio,
) -> Result<FragmentRecord, FragmentError> {
    let len = full_bytes.len();
    let cut = ratio.cut_point(len);
    if len < 3 || cut == 0 || cut >= len {
        return Err(FragmentError::DegenerateSlice {
            len,
            ratio: ratio.to_string(),
            cut,
        });
    }
    Ok(FragmentRecord {
        source_id: source_id.into(),
        full_bytes,
        cut,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Ratio {
        s.parse().unwrap()
    }

    #[test]
    fn standard_32x32_cuts() {
        let full = vec![0u8; 3126];
        let expected = [("2/5", 1250, 1876), ("3/5", 1875, 1251), ("4/5", 2500, 626)];
        for (ratio, cut, real) in expected {
            let rec = slice_fragment("x", full.clone(), r(ratio)).unwrap();
            assert_eq!(rec.cut(), cut);
            assert_eq!(rec.input_fragment().len(), cut);
            assert_eq!(rec.real_fragment().len(), real);
            assert_eq!(rec.continuation_len(), real);
        }
    }

    #[test]
    fn halves() {
        let full: Vec<u8> = (0..10).collect();
        let rec = slice_fragment("ten", full.clone(), r("1/2")).unwrap();
        assert_eq!(rec.input_fragment(), &full[..5]);
        assert_eq!(rec.real_fragment(), &full[5..]);
        assert_eq!([rec.input_fragment(), rec.real_fragment()].concat(), full);
    }

    #[test]
    fn degenerate() {
        assert!(matches!(
            slice_fragment("a", vec![1, 2], r("1/2")),
            Err(FragmentError::DegenerateSlice { .. })
        ));
        // floor(1/5 * 3) = 0
        assert!(matches!(
            slice_fragment("a", vec![1, 2, 3], r("1/5")),
            Err(FragmentError::DegenerateSlice { cut: 0, .. })
        ));
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(r(" 3 / 5 "), Ratio::new(3, 5).unwrap());
        assert!("0/5".parse::<Ratio>().is_err());
        assert!("5/5".parse::<Ratio>().is_err());
        assert!("2:5".parse::<Ratio>().is_err());
        assert_eq!(r("2/5").tag(), "ratio_2_5");
        let json = serde_json::to_string(&r("4/5")).unwrap();
        assert_eq!(json, "\"4/5\"");
        assert_eq!(serde_json::from_str::<Ratio>(&json).unwrap(), r("4/5"));
    }

    proptest::proptest! {
        #[test]
        fn slicing_partitions_the_file(
            full in proptest::collection::vec(proptest::num::u8::ANY, 3..4000),
            num in 1u32..50,
            extra in 1u32..50,
        ) {
            let ratio = Ratio::new(num, num + extra).unwrap();
            let len = full.len();
            match slice_fragment("p", full.clone(), ratio) {
                Ok(rec) => {
                    proptest::prop_assert_eq!([rec.input_fragment(), rec.real_fragment()].concat(), full);
                    proptest::prop_assert_eq!(rec.real_fragment().len(), len - ratio.cut_point(len));
                }
                Err(FragmentError::DegenerateSlice { cut, .. }) => {
                    proptest::prop_assert!(cut == 0 || cut == len);
                }
                Err(e) => proptest::prop_assert!(false, "{e}"),
            }
        }
    }
}
