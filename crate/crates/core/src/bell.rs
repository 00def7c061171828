//! Correlators and linear Bell functionals.

use num_traits::Zero;

use crate::boxes::CorrBox;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::relabel::RelabellingGroup;
use crate::shape::BoxShape;

/// A linear functional `Σ c·p` over the table of a given shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellFunctional {
    pub shape: BoxShape,
    pub coefficients: Vec<Rational>,
    pub local_bound: Option<Rational>,
    pub algebraic_max: Option<Rational>,
}

impl BellFunctional {
    pub fn new(shape: BoxShape, coefficients: Vec<Rational>) -> Result<Self> {
        if coefficients.len() != shape.table_len() {
            return Err(Error::TableSize {
                expected: shape.table_len(),
                found: coefficients.len(),
            });
        }
        Ok(BellFunctional {
            shape,
            coefficients,
            local_bound: None,
            algebraic_max: None,
        })
    }

    pub fn zero(shape: &BoxShape) -> Self {
        BellFunctional {
            shape: shape.clone(),
            coefficients: vec![rational::zero(); shape.table_len()],
            local_bound: None,
            algebraic_max: None,
        }
    }

    /// Functional `Σ_x w(x) ⟨x⟩` for binary shapes.
    pub fn from_correlators(shape: &BoxShape, weight: impl Fn(&[usize]) -> Rational) -> Result<Self> {
        require_binary(shape)?;
        let coefficients = shape
            .entries()
            .map(|(a, x)| {
                let w = weight(&x);
                if parity(&a) {
                    -w
                } else {
                    w
                }
            })
            .collect();
        BellFunctional::new(shape.clone(), coefficients)
    }

    pub fn evaluate(&self, b: &CorrBox) -> Result<Rational> {
        evaluate_functional(b, self)
    }
}

fn parity(a: &[usize]) -> bool {
    a.iter().sum::<usize>() % 2 == 1
}

fn require_binary(shape: &BoxShape) -> Result<()> {
    if shape.is_binary() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!("correlators need binary outputs, got {shape}")))
    }
}

fn sign(odd: u8) -> Rational {
    if odd % 2 == 1 {
        rational::int(-1)
    } else {
        rational::int(1)
    }
}

/// `Σ_a (−1)^{Σ a} p(a|x)`.
pub fn correlator(b: &CorrBox, inputs: &[usize]) -> Result<Rational> {
    let shape = b.shape();
    require_binary(shape)?;
    if inputs.len() != shape.parties() || inputs.iter().enumerate().any(|(k, &x)| x >= shape.inputs(k)) {
        return Err(Error::Parameter(format!("input tuple {inputs:?} does not fit {shape}")));
    }
    let j = shape.encode_inputs(inputs);
    let off = shape.block_offset(j);
    Ok((0..shape.block_len(j))
        .map(|l| {
            let v = &b.table()[off + l];
            if parity(&shape.entry(off + l).0) {
                -v
            } else {
                v.clone()
            }
        })
        .sum())
}

pub fn evaluate_functional(b: &CorrBox, f: &BellFunctional) -> Result<Rational> {
    if b.shape() != &f.shape {
        return Err(Error::ShapeMismatch(format!(
            "functional for {} applied to a box of shape {}",
            f.shape,
            b.shape()
        )));
    }
    Ok(f.coefficients
        .iter()
        .zip(b.table())
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, p)| c * p)
        .sum())
}

/// `(−1)^γ⟨00⟩ + (−1)^{β+γ}⟨01⟩ + (−1)^{α+γ}⟨10⟩ + (−1)^{α+β+γ+1}⟨11⟩`,
/// local bound 2, algebraic maximum 4.
pub fn chsh_functional(alpha: u8, beta: u8, gamma: u8) -> Result<BellFunctional> {
    if alpha > 1 || beta > 1 || gamma > 1 {
        return Err(Error::Parameter("CHSH parameters must be 0 or 1".into()));
    }
    let shape = BoxShape::uniform(2, 2, 2)?;
    let mut f = BellFunctional::from_correlators(&shape, |x| {
        let (i, j) = (x[0] as u8, x[1] as u8);
        sign(gamma + j * beta + i * alpha + i * j)
    })?;
    f.local_bound = Some(rational::int(2));
    f.algebraic_max = Some(rational::int(4));
    Ok(f)
}

fn require_chsh_shape(b: &CorrBox) -> Result<()> {
    if b.shape() != &BoxShape::uniform(2, 2, 2)? {
        return Err(Error::ShapeMismatch(format!(
            "CHSH needs two parties with two inputs and two outputs, got {}",
            b.shape()
        )));
    }
    Ok(())
}

pub fn chsh(b: &CorrBox, alpha: u8, beta: u8, gamma: u8) -> Result<Rational> {
    require_chsh_shape(b)?;
    chsh_functional(alpha, beta, gamma)?.evaluate(b)
}

/// Largest of the eight CHSH values.
pub fn max_chsh(b: &CorrBox) -> Result<Rational> {
    require_chsh_shape(b)?;
    let mut best: Option<Rational> = None;
    for idx in 0..8u8 {
        let v = chsh(b, idx >> 2 & 1, idx >> 1 & 1, idx & 1)?;
        if best.as_ref().map_or(true, |cur| v > *cur) {
            best = Some(v);
        }
    }
    Ok(best.expect("eight forms"))
}

/// `M = −⟨000⟩ + ⟨001⟩ + ⟨010⟩ + ⟨011⟩ + ⟨100⟩ + ⟨101⟩ + ⟨110⟩ − ⟨111⟩`,
/// bounded by 4 on two-way local boxes, algebraic maximum 8.
pub fn svetlichny_functional() -> BellFunctional {
    let shape = BoxShape::uniform(3, 2, 2).expect("valid shape");
    let mut f = BellFunctional::from_correlators(&shape, |x| {
        let all_equal = x[0] == x[1] && x[1] == x[2];
        sign(all_equal as u8)
    })
    .expect("binary shape");
    f.local_bound = Some(rational::int(4));
    f.algebraic_max = Some(rational::int(8));
    f
}

fn require_tripartite_binary(b: &CorrBox) -> Result<()> {
    if b.shape() != &BoxShape::uniform(3, 2, 2)? {
        return Err(Error::ShapeMismatch(format!(
            "the Svetlichny functional needs three parties with two inputs and two outputs, got {}",
            b.shape()
        )));
    }
    Ok(())
}

/// `M` evaluated on the box exactly as labelled.
pub fn svetlichny_literal(b: &CorrBox) -> Result<Rational> {
    require_tripartite_binary(b)?;
    svetlichny_functional().evaluate(b)
}

/// Largest value of `M` over all local relabellings of the box, i.e. over
/// every relabelled form of the inequality. This is the number that is
/// invariant across a vertex class.
pub fn svetlichny(b: &CorrBox) -> Result<Rational> {
    require_tripartite_binary(b)?;
    let f = svetlichny_functional();
    let group = RelabellingGroup::new(b.shape(), false);
    let mut best: Option<Rational> = None;
    for r in group.elements() {
        let v = f.evaluate(&r.apply(b)?)?;
        if best.as_ref().map_or(true, |cur| v > *cur) {
            best = Some(v);
        }
    }
    Ok(best.expect("group contains the identity"))
}
