//! The standard conversion protocols as wirings.

use std::fmt;
use std::str::FromStr;

use crate::boxes::CorrBox;
use crate::error::{Error, Result};
use crate::families;
use crate::rational::{self, Rational};
use crate::shape::BoxShape;
use crate::wiring::{evaluate_wiring, max_tv_distance, ComponentSlot, Item, Lookup, Message, PartyProgram, Wiring};

fn use_item(component: usize, side: usize, input: Lookup) -> Item {
    Item::Use { component, side, input }
}

fn d_box_slot(d: usize, parties: Vec<usize>) -> Result<ComponentSlot> {
    Ok(ComponentSlot {
        shape: BoxShape::uniform(2, 2, d)?,
        parties,
    })
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Parameter(format!("box size must be at least 2, got {d}")));
    }
    Ok(())
}

/// Chains `n` boxes of sizes `sizes[0], sizes[1], …` into one box of size
/// `Π sizes`: Alice feeds `X` into box `k` iff every earlier box returned
/// its largest output, and reads `a = Σ α_k Π_{j<k} d_j`; Bob feeds `Y`
/// everywhere. The final outputs are reduced modulo `modulus`.
fn chain(sizes: &[usize], modulus: usize) -> Result<Wiring> {
    let components = sizes
        .iter()
        .map(|&d| d_box_slot(d, vec![0, 1]))
        .collect::<Result<Vec<_>>>()?;
    let mut alice = Vec::new();
    let mut bob = Vec::new();
    let mut scope = vec![2usize];
    for k in 0..sizes.len() {
        let earlier = sizes[..k].to_vec();
        alice.push(use_item(
            k,
            0,
            Lookup::from_fn(&scope, |v| {
                let all_top = v[1..].iter().zip(&earlier).all(|(a, d)| *a == d - 1);
                if all_top {
                    v[0]
                } else {
                    0
                }
            }),
        ));
        bob.push(use_item(k, 1, Lookup::from_fn(&scope, |v| v[0])));
        scope.push(sizes[k]);
    }
    let digits = |v: &[usize]| -> usize {
        let mut acc = 0;
        let mut weight = 1;
        for (a, d) in v[1..].iter().zip(sizes) {
            acc += a * weight;
            weight *= d;
        }
        acc % modulus
    };
    Ok(Wiring {
        shape: BoxShape::uniform(2, 2, modulus)?,
        components,
        shared: Vec::new(),
        messages: Vec::new(),
        programs: vec![
            PartyProgram {
                items: alice,
                output: Lookup::from_fn(&scope, digits),
            },
            PartyProgram {
                items: bob,
                output: Lookup::from_fn(&scope, digits),
            },
        ],
    })
}

/// A `d`-box and a `d2`-box make a `d·d2`-box.
pub fn protocol1(d: usize, d2: usize) -> Result<Wiring> {
    check_d(d)?;
    check_d(d2)?;
    chain(&[d, d2], d * d2)
}

/// A `d·d2`-box makes a `d`-box by reducing both outputs modulo `d`.
pub fn protocol2(d: usize, d2: usize) -> Result<Wiring> {
    check_d(d)?;
    check_d(d2)?;
    let big = d * d2;
    let scope = [2, big];
    let reduce = Lookup::from_fn(&scope, |v| v[1] % d);
    Ok(Wiring {
        shape: BoxShape::uniform(2, 2, d)?,
        components: vec![d_box_slot(big, vec![0, 1])?],
        shared: Vec::new(),
        messages: Vec::new(),
        programs: vec![
            PartyProgram {
                items: vec![use_item(0, 0, Lookup::from_fn(&[2], |v| v[0]))],
                output: reduce.clone(),
            },
            PartyProgram {
                items: vec![use_item(0, 1, Lookup::from_fn(&[2], |v| v[0]))],
                output: reduce,
            },
        ],
    })
}

/// `n` `d`-boxes approximate a `d2`-box: chain them into a `dⁿ`-box and
/// reduce modulo `d2`.
pub fn protocol3(d: usize, d2: usize, n: usize) -> Result<Wiring> {
    check_d(d)?;
    check_d(d2)?;
    if n == 0 {
        return Err(Error::Parameter("protocol 3 needs at least one box".into()));
    }
    chain(&vec![d; n], d2)
}

/// One bit of one-way communication and a shared uniform value `λ ∈ 0..d`
/// make a `d`-box: Alice sends `X` and outputs `λ`; Bob outputs
/// `(λ + X·Y) mod d`.
pub fn protocol4(d: usize) -> Result<Wiring> {
    check_d(d)?;
    let w = rational::ratio(1, d as i64);
    Ok(Wiring {
        shape: BoxShape::uniform(2, 2, d)?,
        components: Vec::new(),
        shared: vec![w; d],
        messages: vec![Message {
            sender: 0,
            receiver: 1,
            bits: 1,
        }],
        programs: vec![
            PartyProgram {
                items: vec![Item::Send {
                    message: 0,
                    value: Lookup::from_fn(&[2, d], |v| v[0]),
                }],
                output: Lookup::from_fn(&[2, d], |v| v[1]),
            },
            PartyProgram {
                items: vec![Item::Receive { message: 0 }],
                output: Lookup::from_fn(&[2, d, 2], |v| (v[1] + v[0] * v[2]) % d),
            },
        ],
    })
}

/// Protocol 4 with the message removed: Bob proceeds as if `X = 0`.
pub fn protocol4_without_message(d: usize) -> Result<Wiring> {
    check_d(d)?;
    let mut w = protocol4(d)?;
    w.messages.clear();
    w.programs[0].items.clear();
    w.programs[1].items.clear();
    w.programs[1].output = Lookup::from_fn(&[2, d], |v| v[1]);
    Ok(w)
}

fn pr_slot(parties: Vec<usize>) -> ComponentSlot {
    ComponentSlot {
        shape: BoxShape::uniform(2, 2, 2).expect("valid shape"),
        parties,
    }
}

/// The party's own input, read from a scope of `len` binary values.
fn own_input(len: usize) -> Lookup {
    Lookup::from_fn(&vec![2; len], |v| v[0])
}

fn xor_of_last_two() -> Lookup {
    Lookup::from_fn(&[2, 2, 2], |v| v[1] ^ v[2])
}

fn tripartite(components: Vec<ComponentSlot>, programs: Vec<PartyProgram>) -> Wiring {
    Wiring {
        shape: BoxShape::uniform(3, 2, 2).expect("valid shape"),
        components,
        shared: Vec::new(),
        messages: Vec::new(),
        programs,
    }
}

/// PR boxes between A–B and A–C make an X(Y+Z) box.
pub fn protocol5() -> Wiring {
    tripartite(
        vec![pr_slot(vec![0, 1]), pr_slot(vec![0, 2])],
        vec![
            PartyProgram {
                items: vec![use_item(0, 0, own_input(1)), use_item(1, 0, own_input(2))],
                output: xor_of_last_two(),
            },
            PartyProgram {
                items: vec![use_item(0, 1, own_input(1))],
                output: Lookup::from_fn(&[2, 2], |v| v[1]),
            },
            PartyProgram {
                items: vec![use_item(1, 1, own_input(1))],
                output: Lookup::from_fn(&[2, 2], |v| v[1]),
            },
        ],
    )
}

/// PR boxes between A–B, A–C and B–C make a Svetlichny box.
pub fn protocol6() -> Wiring {
    tripartite(
        vec![pr_slot(vec![0, 1]), pr_slot(vec![0, 2]), pr_slot(vec![1, 2])],
        vec![
            PartyProgram {
                items: vec![use_item(0, 0, own_input(1)), use_item(1, 0, own_input(2))],
                output: xor_of_last_two(),
            },
            PartyProgram {
                items: vec![use_item(0, 1, own_input(1)), use_item(2, 0, own_input(2))],
                output: xor_of_last_two(),
            },
            PartyProgram {
                items: vec![use_item(1, 1, own_input(1)), use_item(2, 1, own_input(2))],
                output: xor_of_last_two(),
            },
        ],
    )
}

/// PR boxes between A–B, A–C and B–C make an XYZ box: Alice and Bob feed
/// their first outputs into their boxes with Charles.
pub fn protocol7() -> Wiring {
    let feed_output = Lookup::from_fn(&[2, 2], |v| v[1]);
    tripartite(
        vec![pr_slot(vec![0, 1]), pr_slot(vec![0, 2]), pr_slot(vec![1, 2])],
        vec![
            PartyProgram {
                items: vec![use_item(0, 0, own_input(1)), use_item(1, 0, feed_output.clone())],
                output: Lookup::from_fn(&[2, 2, 2], |v| v[2]),
            },
            PartyProgram {
                items: vec![use_item(0, 1, own_input(1)), use_item(2, 0, feed_output)],
                output: Lookup::from_fn(&[2, 2, 2], |v| v[2]),
            },
            PartyProgram {
                items: vec![use_item(1, 1, own_input(1)), use_item(2, 1, own_input(2))],
                output: xor_of_last_two(),
            },
        ],
    )
}

/// A named protocol with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    P1 { d: usize, d2: usize },
    P2 { d: usize, d2: usize },
    P3 { d: usize, d2: usize, n: usize },
    P4 { d: usize },
    P5,
    P6,
    P7,
}

impl Preset {
    pub fn wiring(&self) -> Result<Wiring> {
        match *self {
            Preset::P1 { d, d2 } => protocol1(d, d2),
            Preset::P2 { d, d2 } => protocol2(d, d2),
            Preset::P3 { d, d2, n } => protocol3(d, d2, n),
            Preset::P4 { d } => protocol4(d),
            Preset::P5 => Ok(protocol5()),
            Preset::P6 => Ok(protocol6()),
            Preset::P7 => Ok(protocol7()),
        }
    }

    /// The component boxes the protocol is designed for.
    pub fn resources(&self) -> Result<Vec<CorrBox>> {
        let pr = || families::pr(0, 0, 0);
        match *self {
            Preset::P1 { d, d2 } => Ok(vec![families::d_box(d)?, families::d_box(d2)?]),
            Preset::P2 { d, d2 } => Ok(vec![families::d_box(d * d2)?]),
            Preset::P3 { d, n, .. } => (0..n).map(|_| families::d_box(d)).collect(),
            Preset::P4 { .. } => Ok(Vec::new()),
            Preset::P5 => Ok(vec![pr()?, pr()?]),
            Preset::P6 | Preset::P7 => Ok(vec![pr()?, pr()?, pr()?]),
        }
    }

    /// The box the protocol is meant to produce.
    pub fn target(&self) -> Result<CorrBox> {
        match *self {
            Preset::P1 { d, d2 } => families::d_box(d * d2),
            Preset::P2 { d, .. } => families::d_box(d),
            Preset::P3 { d2, .. } => families::d_box(d2),
            Preset::P4 { d } => families::d_box(d),
            Preset::P5 => Ok(families::x_y_plus_z()),
            Preset::P6 => Ok(families::svetlichny()),
            Preset::P7 => Ok(families::xyz()),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::P1 { d, d2 } => write!(f, "P1({d},{d2})"),
            Preset::P2 { d, d2 } => write!(f, "P2({d},{d2})"),
            Preset::P3 { d, d2, n } => write!(f, "P3({d},{d2},{n})"),
            Preset::P4 { d } => write!(f, "P4({d})"),
            Preset::P5 => write!(f, "P5"),
            Preset::P6 => write!(f, "P6"),
            Preset::P7 => write!(f, "P7"),
        }
    }
}

/// Accepts `P1(2,2)`, `p3(2,3,4)`, `P5`, ...
impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown preset {s:?}; expected P1(d,d') .. P3(d,d',n), P4(d), P5, P6 or P7"));
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) => {
                let inner = s[i + 1..].strip_suffix(')').ok_or_else(bad)?;
                let args = inner
                    .split(',')
                    .map(|a| a.trim().parse::<usize>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                (&s[..i], args)
            }
            None => (s, Vec::new()),
        };
        match (name.to_ascii_uppercase().as_str(), args.as_slice()) {
            ("P1", [d, d2]) => Ok(Preset::P1 { d: *d, d2: *d2 }),
            ("P2", [d, d2]) => Ok(Preset::P2 { d: *d, d2: *d2 }),
            ("P3", [d, d2, n]) => Ok(Preset::P3 { d: *d, d2: *d2, n: *n }),
            ("P4", [d]) => Ok(Preset::P4 { d: *d }),
            ("P5", []) => Ok(Preset::P5),
            ("P6", []) => Ok(Preset::P6),
            ("P7", []) => Ok(Preset::P7),
            _ => Err(bad()),
        }
    }
}

/// Worst-case total-variation distance between the output of protocol 3
/// on exact `d`-boxes and the ideal `d2`-box.
pub fn protocol3_error(d: usize, d2: usize, n: usize) -> Result<Rational> {
    let preset = Preset::P3 { d, d2, n };
    let out = evaluate_wiring(&preset.wiring()?, &preset.resources()?)?;
    max_tv_distance(&out, &preset.target()?)
}
