//! Named box families.

use std::fmt;
use std::str::FromStr;

use crate::boxes::CorrBox;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::shape::BoxShape;

fn bit(v: u8, name: &str) -> Result<usize> {
    if v > 1 {
        return Err(Error::Parameter(format!("{name} must be 0 or 1, got {v}")));
    }
    Ok(v as usize)
}

fn indicator(cond: bool, weight: &Rational) -> Rational {
    if cond {
        weight.clone()
    } else {
        rational::zero()
    }
}

/// Bipartite local deterministic box `a = αX ⊕ β`, `b = γY ⊕ δ`.
pub fn local_deterministic(alpha: u8, beta: u8, gamma: u8, delta: u8) -> Result<CorrBox> {
    let (al, be, ga, de) = (
        bit(alpha, "alpha")?,
        bit(beta, "beta")?,
        bit(gamma, "gamma")?,
        bit(delta, "delta")?,
    );
    let shape = BoxShape::uniform(2, 2, 2)?;
    let f: Vec<Vec<usize>> = vec![
        (0..2).map(|x| (al * x) ^ be).collect(),
        (0..2).map(|y| (ga * y) ^ de).collect(),
    ];
    CorrBox::deterministic(&shape, &f)
}

/// PR box: `1/2` on `a ⊕ b = XY ⊕ αX ⊕ βY ⊕ γ`.
pub fn pr(alpha: u8, beta: u8, gamma: u8) -> Result<CorrBox> {
    let (al, be, ga) = (bit(alpha, "alpha")?, bit(beta, "beta")?, bit(gamma, "gamma")?);
    let half = rational::ratio(1, 2);
    Ok(CorrBox::from_fn(BoxShape::uniform(2, 2, 2)?, |a, x| {
        let rhs = (x[0] & x[1]) ^ (al * x[0]) ^ (be * x[1]) ^ ga;
        indicator(a[0] ^ a[1] == rhs, &half)
    }))
}

/// The `k`-box: `1/k` on `(b − a) mod k = XY`.
pub fn d_box(k: usize) -> Result<CorrBox> {
    if k < 2 {
        return Err(Error::Parameter(format!("d-box needs k >= 2, got {k}")));
    }
    let w = rational::ratio(1, k as i64);
    Ok(CorrBox::from_fn(BoxShape::uniform(2, 2, k)?, |a, x| {
        indicator((a[1] + k - a[0]) % k == x[0] * x[1], &w)
    }))
}

/// Tripartite box with a PR box between the first two parties and `c = 0`.
pub fn pr_with_deterministic_third() -> CorrBox {
    let half = rational::ratio(1, 2);
    CorrBox::from_fn(BoxShape::uniform(3, 2, 2).unwrap(), |a, x| {
        indicator(a[0] ^ a[1] == x[0] & x[1] && a[2] == 0, &half)
    })
}

fn parity_box(f: impl Fn(&[usize]) -> usize) -> CorrBox {
    let quarter = rational::ratio(1, 4);
    CorrBox::from_fn(BoxShape::uniform(3, 2, 2).unwrap(), |a, x| {
        indicator(a[0] ^ a[1] ^ a[2] == f(x), &quarter)
    })
}

/// `1/4` on `a ⊕ b ⊕ c = XY ⊕ XZ`.
pub fn x_y_plus_z() -> CorrBox {
    parity_box(|x| (x[0] & x[1]) ^ (x[0] & x[2]))
}

/// `1/4` on `a ⊕ b ⊕ c = XY ⊕ YZ ⊕ XZ`.
pub fn svetlichny() -> CorrBox {
    parity_box(|x| (x[0] & x[1]) ^ (x[1] & x[2]) ^ (x[0] & x[2]))
}

/// `1/4` on `a ⊕ b ⊕ c = XYZ`.
pub fn xyz() -> CorrBox {
    parity_box(|x| x[0] & x[1] & x[2])
}

/// `n`-party box with `a₁ ⊕ … ⊕ aₙ = X₁X₂…Xₙ`, uniform over the support.
pub fn n_party_xor(n: usize) -> Result<CorrBox> {
    if n < 2 {
        return Err(Error::Parameter(format!("n-party box needs n >= 2, got {n}")));
    }
    if n > 16 {
        return Err(Error::ResourceCap(format!("{n}-party table too large")));
    }
    let w = rational::ratio(1, 1i64 << (n - 1));
    Ok(CorrBox::from_fn(BoxShape::uniform(n, 2, 2)?, |a, x| {
        let lhs = a.iter().fold(0, |acc, v| acc ^ v);
        let rhs = x.iter().fold(1, |acc, v| acc & v);
        indicator(lhs == rhs, &w)
    }))
}

/// A named family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Local { alpha: u8, beta: u8, gamma: u8, delta: u8 },
    Pr { alpha: u8, beta: u8, gamma: u8 },
    DBox { k: usize },
    PrThird,
    XYPlusZ,
    Svetlichny,
    Xyz { n: usize },
}

impl Family {
    pub fn build(&self) -> Result<CorrBox> {
        match *self {
            Family::Local { alpha, beta, gamma, delta } => {
                local_deterministic(alpha, beta, gamma, delta)
            }
            Family::Pr { alpha, beta, gamma } => pr(alpha, beta, gamma),
            Family::DBox { k } => d_box(k),
            Family::PrThird => Ok(pr_with_deterministic_third()),
            Family::XYPlusZ => Ok(x_y_plus_z()),
            Family::Svetlichny => Ok(svetlichny()),
            Family::Xyz { n: 3 } => Ok(xyz()),
            Family::Xyz { n } => n_party_xor(n),
        }
    }

    /// Parses a family name plus its positional parameters, as used on the
    /// command line (`pr 0 1 0`, `dbox 3`, `xyz 4`, ...).
    pub fn parse(name: &str, params: &[String]) -> Result<Family> {
        let nums = params
            .iter()
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("parameter {p:?} is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        let bits = |n: usize| -> Result<Vec<u8>> {
            if nums.is_empty() {
                return Ok(vec![0; n]);
            }
            if nums.len() != n {
                return Err(Error::Parameter(format!("{name} takes {n} parameters")));
            }
            nums.iter()
                .map(|&v| {
                    u8::try_from(v).map_err(|_| Error::Parameter(format!("{v} is not a bit")))
                })
                .collect()
        };
        let none = || -> Result<()> {
            if nums.is_empty() {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{name} takes no parameters")))
            }
        };
        let single = |default: Option<usize>| -> Result<usize> {
            match (nums.as_slice(), default) {
                ([v], _) => Ok(*v),
                ([], Some(d)) => Ok(d),
                _ => Err(Error::Parameter(format!("{name} takes one parameter"))),
            }
        };
        let fam = match name.to_ascii_lowercase().as_str() {
            "local" | "deterministic" => {
                let b = bits(4)?;
                Family::Local { alpha: b[0], beta: b[1], gamma: b[2], delta: b[3] }
            }
            "pr" => {
                let b = bits(3)?;
                Family::Pr { alpha: b[0], beta: b[1], gamma: b[2] }
            }
            "dbox" | "d-box" => Family::DBox { k: single(None)? },
            "pr-third" | "two-way" => {
                none()?;
                Family::PrThird
            }
            "xy+z" | "x(y+z)" | "x-y-plus-z" => {
                none()?;
                Family::XYPlusZ
            }
            "svetlichny" => {
                none()?;
                Family::Svetlichny
            }
            "xyz" => Family::Xyz { n: single(Some(3))? },
            other => return Err(Error::Parse(format!("unknown family {other:?}"))),
        };
        Ok(fam)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Local { alpha, beta, gamma, delta } => {
                write!(f, "local {alpha} {beta} {gamma} {delta}")
            }
            Family::Pr { alpha, beta, gamma } => write!(f, "pr {alpha} {beta} {gamma}"),
            Family::DBox { k } => write!(f, "dbox {k}"),
            Family::PrThird => write!(f, "pr-third"),
            Family::XYPlusZ => write!(f, "xy+z"),
            Family::Svetlichny => write!(f, "svetlichny"),
            Family::Xyz { n } => write!(f, "xyz {n}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        let mut it = s.split_whitespace();
        let name = it.next().ok_or_else(|| Error::Parse("empty family".into()))?;
        let params: Vec<String> = it.map(str::to_owned).collect();
        Family::parse(name, &params)
    }
}

/// All 16 bipartite local deterministic boxes.
pub fn all_local_deterministic() -> Vec<CorrBox> {
    let mut out = Vec::new();
    for code in 0..16u8 {
        out.push(
            local_deterministic(code >> 3 & 1, code >> 2 & 1, code >> 1 & 1, code & 1).unwrap(),
        );
    }
    out
}

/// All 8 PR boxes, indexed by `(α, β, γ)` as `4α + 2β + γ`.
pub fn all_pr() -> Vec<CorrBox> {
    (0..8u8)
        .map(|c| pr(c >> 2 & 1, c >> 1 & 1, c & 1).unwrap())
        .collect()
}
