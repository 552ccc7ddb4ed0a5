use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_K: u32 = 64;

/// The pair (k, l) with k > l >= 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawKL")]
pub struct KLParams {
    k: u32,
    l: u32,
}

#[derive(Deserialize)]
struct RawKL {
    k: u32,
    l: u32,
}

impl TryFrom<RawKL> for KLParams {
    type Error = Error;
    fn try_from(r: RawKL) -> Result<Self> {
        KLParams::new(r.k, r.l)
    }
}

impl KLParams {
    pub fn new(k: u32, l: u32) -> Result<Self> {
        if l == 0 || k <= l {
            return Err(Error::Domain(format!("need k > l >= 1, got ({k},{l})")));
        }
        if k > MAX_K {
            return Err(Error::Domain(format!("k = {k} above the cap {MAX_K}")));
        }
        Ok(KLParams { k, l })
    }

    pub fn k(self) -> u32 {
        self.k
    }

    pub fn l(self) -> u32 {
        self.l
    }

    pub fn sum(self) -> u32 {
        self.k + self.l
    }

    pub fn diff(self) -> u32 {
        self.k - self.l
    }
}

impl FromStr for KLParams {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("expected \"k,l\", got {s:?}"));
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let k = a.trim().parse().map_err(|_| bad())?;
        let l = b.trim().parse().map_err(|_| bad())?;
        KLParams::new(k, l)
    }
}

impl fmt::Display for KLParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k, self.l)
    }
}
