//! Circles on the integer grid, the intersection predicate, and the
//! constants Bob compiles into his oracle.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::mask;

/// Largest supported precision: keeps n = 2t + 3 within 128-bit registers.
pub const MAX_T: usize = 62;

/// Problem sizes derived from the precision `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct ProblemParams {
    t: usize,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    t: usize,
    grid: u128,
    n: usize,
    m: usize,
}

impl TryFrom<ParamsRepr> for ProblemParams {
    type Error = Error;
    fn try_from(r: ParamsRepr) -> Result<Self> {
        let p = ProblemParams::new(r.t)?;
        if p.n() != r.n || p.m() != r.m || p.grid() != r.grid {
            return Err(Error::InvalidParams("derived sizes do not match t".into()));
        }
        Ok(p)
    }
}

impl From<ProblemParams> for ParamsRepr {
    fn from(p: ProblemParams) -> Self {
        ParamsRepr {
            t: p.t,
            grid: p.grid(),
            n: p.n(),
            m: p.m(),
        }
    }
}

impl ProblemParams {
    pub fn new(t: usize) -> Result<Self> {
        if !(2..=MAX_T).contains(&t) {
            return Err(Error::InvalidParams(format!(
                "precision t = {t} outside [2, {MAX_T}]"
            )));
        }
        Ok(Self { t })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Grid size T = 2ᵗ.
    pub fn grid(&self) -> u128 {
        1u128 << self.t
    }

    /// Arithmetic register width n = 2t + 3.
    pub fn n(&self) -> usize {
        2 * self.t + 3
    }

    /// Particle width m = 3n.
    pub fn m(&self) -> usize {
        3 * self.n()
    }
}

/// A private circle: center (x, y) and radius r, each in [1, T − 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Circle {
    pub x: u64,
    pub y: u64,
    pub r: u64,
}

impl Circle {
    pub const fn new(x: u64, y: u64, r: u64) -> Self {
        Self { x, y, r }
    }

    pub fn validate(&self, params: &ProblemParams) -> Result<()> {
        let hi = params.grid() - 1;
        for (name, v) in [("x", self.x), ("y", self.y), ("r", self.r)] {
            if v == 0 || v as u128 > hi {
                return Err(Error::InvalidCircle(format!(
                    "{name} = {v} outside [1, {hi}] for t = {}",
                    params.t()
                )));
            }
        }
        Ok(())
    }

    /// Every valid circle for `params`, in (x, y, r) lexicographic order.
    pub fn all(params: &ProblemParams) -> impl Iterator<Item = Circle> {
        let hi = (params.grid() - 1) as u64;
        (1..=hi).flat_map(move |x| {
            (1..=hi).flat_map(move |y| (1..=hi).map(move |r| Circle::new(x, y, r)))
        })
    }
}

impl fmt::Display for Circle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.x, self.y, self.r)
    }
}

impl FromStr for Circle {
    type Err = Error;

    /// Parses `x,y,r`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected x,y,r but got `{s}`")));
        }
        let num = |p: &str| {
            p.parse::<u64>()
                .map_err(|e| Error::Parse(format!("`{p}` in `{s}`: {e}")))
        };
        Ok(Circle::new(num(parts[0])?, num(parts[1])?, num(parts[2])?))
    }
}

/// Squared center distance D and squared radius sum R.
pub fn d_and_r(c1: &Circle, c2: &Circle) -> (i128, i128) {
    let dx = c1.x as i128 - c2.x as i128;
    let dy = c1.y as i128 - c2.y as i128;
    let rs = c1.r as i128 + c2.r as i128;
    (dx * dx + dy * dy, rs * rs)
}

/// D < R, strict: tangent circles do not intersect.
pub fn intersects(c1: &Circle, c2: &Circle) -> bool {
    let (d, r) = d_and_r(c1, c2);
    d < r
}

/// (D − R) mod 2ⁿ.
pub fn d_minus_r(c1: &Circle, c2: &Circle, n: usize) -> u128 {
    let (d, r) = d_and_r(c1, c2);
    ((d - r) as u128) & mask(n)
}

/// Bob's compiled constants, all reduced mod 2ⁿ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCoeffs {
    pub k1: u128,
    pub k2: u128,
    pub k3: u128,
    pub k4: u128,
}

/// k₁ = −2x₂, k₂ = −2y₂, k₃ = −2r₂, k₄ = x₂² + y₂² − r₂² (mod 2ⁿ), so that
/// x₁² + y₁² − r₁² + k₁x₁ + k₂y₁ + k₃r₁ + k₄ ≡ D − R.
pub fn oracle_coeffs(bob: &Circle, n: usize) -> OracleCoeffs {
    let m = mask(n);
    let (x, y, r) = (bob.x as i128, bob.y as i128, bob.r as i128);
    let red = |v: i128| (v as u128) & m;
    OracleCoeffs {
        k1: red(-2 * x),
        k2: red(-2 * y),
        k3: red(-2 * r),
        k4: red(x * x + y * y - r * r),
    }
}
