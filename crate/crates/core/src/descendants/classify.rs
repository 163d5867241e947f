//! Pure and mixed pairs of a height set.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heights::{HeightSet, PairFamily};

/// Classification of an ordered pair `(x, y)` of height-set elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairClass {
    Pure(PairFamily),
    /// `x` from a lower pair, `y` from an upper pair.
    PositiveMixed,
    /// `x` from an upper pair, `y` from a lower pair. Carries the positive
    /// pair `(d, d')` with `x - d = y - d' - 1`.
    NegativeMixed { correspondent: [BigUint; 2] },
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind {
    PureUpper,
    PureLower,
    Positive,
    Negative,
    Other,
}

impl Kind {
    pub(crate) fn is_pure(self) -> bool {
        matches!(self, Kind::PureUpper | Kind::PureLower)
    }
}

pub(crate) fn kind_of(h: &HeightSet, x: usize, y: usize) -> Kind {
    if let Some(family) = h.pure_family(x, y) {
        return match family {
            PairFamily::Upper => Kind::PureUpper,
            PairFamily::Lower => Kind::PureLower,
        };
    }
    match (h.role(x), h.role(y)) {
        (Some(rx), Some(ry)) => match (rx.family, ry.family) {
            (PairFamily::Upper, PairFamily::Lower) => Kind::Negative,
            (PairFamily::Lower, PairFamily::Upper) => Kind::Positive,
            _ => Kind::Other,
        },
        _ => Kind::Other,
    }
}

/// The positive pair corresponding to the negative pair `(x, y)`:
/// `(partner(y), partner(x))`.
pub(crate) fn correspondent(h: &HeightSet, x: usize, y: usize) -> Option<(usize, usize)> {
    if kind_of(h, x, y) != Kind::Negative {
        return None;
    }
    Some((h.partner(y)?, h.partner(x)?))
}

/// Precomputed kinds for every ordered pair of one stage.
#[derive(Debug, Clone)]
pub(crate) struct KindTable {
    size: usize,
    kinds: Vec<Kind>,
    correspondents: Vec<(u16, u16)>,
}

impl KindTable {
    pub(crate) fn new(h: &HeightSet) -> Self {
        let size = h.len();
        let mut kinds = Vec::with_capacity(size * size);
        let mut correspondents = Vec::with_capacity(size * size);
        for x in 0..size {
            for y in 0..size {
                kinds.push(kind_of(h, x, y));
                let c = correspondent(h, x, y).unwrap_or((0, 0));
                correspondents.push((c.0 as u16, c.1 as u16));
            }
        }
        KindTable {
            size,
            kinds,
            correspondents,
        }
    }

    #[inline]
    pub(crate) fn kind(&self, x: u16, y: u16) -> Kind {
        self.kinds[x as usize * self.size + y as usize]
    }

    #[inline]
    pub(crate) fn correspondent(&self, x: u16, y: u16) -> (u16, u16) {
        self.correspondents[x as usize * self.size + y as usize]
    }
}

/// Classifies the ordered pair of element values `(x, y)`.
pub fn classify_pair(h: &HeightSet, x: &BigUint, y: &BigUint) -> Result<PairClass> {
    let find = |v: &BigUint| {
        h.index_of(v).ok_or_else(|| {
            Error::Precondition(format!("{v} is not an element of H_{}", h.stage()))
        })
    };
    let (xi, yi) = (find(x)?, find(y)?);
    Ok(match kind_of(h, xi, yi) {
        Kind::PureUpper => PairClass::Pure(PairFamily::Upper),
        Kind::PureLower => PairClass::Pure(PairFamily::Lower),
        Kind::Positive => PairClass::PositiveMixed,
        Kind::Negative => {
            let (d, d2) = correspondent(h, xi, yi).expect("negative pairs have correspondents");
            PairClass::NegativeMixed {
                correspondent: [h.elements()[d].clone(), h.elements()[d2].clone()],
            }
        }
        Kind::Other => PairClass::Other,
    })
}

/// Counts of ordered pairs in `H × H` by class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairCensus {
    pub total: u64,
    pub negative_mixed: u64,
    pub positive_mixed: u64,
    /// Ordered pairs whose underlying set is a designated pair.
    pub pure_ordered: u64,
    pub other: u64,
}

impl PairCensus {
    pub fn negative_fraction(&self) -> BigRational {
        ratio(self.negative_mixed, self.total)
    }

    pub fn pure_fraction(&self) -> BigRational {
        ratio(self.pure_ordered, self.total)
    }
}

pub(crate) fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den.max(1)))
}

pub fn pair_census(h: &HeightSet) -> PairCensus {
    let n = h.len();
    let mut census = PairCensus {
        total: (n * n) as u64,
        negative_mixed: 0,
        positive_mixed: 0,
        pure_ordered: 0,
        other: 0,
    };
    for x in 0..n {
        for y in 0..n {
            match kind_of(h, x, y) {
                Kind::PureUpper | Kind::PureLower => census.pure_ordered += 1,
                Kind::Positive => census.positive_mixed += 1,
                Kind::Negative => census.negative_mixed += 1,
                Kind::Other => census.other += 1,
            }
        }
    }
    census
}
