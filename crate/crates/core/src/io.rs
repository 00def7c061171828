//! JSON documents for boxes, functionals, certificates, models, wirings and
//! classification summaries. Every number is exact text `"n/d"`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bell::BellFunctional;
use crate::boxes::CorrBox;
use crate::classify::OrbitClass;
use crate::error::{Error, Result};
use crate::locality::{DeterministicStrategy, LocalModel, SeparatingCertificate, StrategyKind};
use crate::rational::{self, Rational};
use crate::shape::BoxShape;
use crate::vertices::VRep;
use crate::wiring::{ComponentSlot, Message, PartyProgram, Wiring};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeDoc {
    pub parties: usize,
    pub inputs: Vec<usize>,
    /// `outputs[k][x]`.
    pub outputs: Vec<Vec<usize>>,
}

impl From<&BoxShape> for ShapeDoc {
    fn from(s: &BoxShape) -> Self {
        ShapeDoc {
            parties: s.parties(),
            inputs: (0..s.parties()).map(|k| s.inputs(k)).collect(),
            outputs: s.output_table().to_vec(),
        }
    }
}

impl ShapeDoc {
    pub fn to_shape(&self) -> Result<BoxShape> {
        if self.parties != self.outputs.len() {
            return Err(Error::Parse(format!(
                "shape.parties is {} but shape.outputs lists {} parties",
                self.parties,
                self.outputs.len()
            )));
        }
        if self.inputs.len() != self.parties {
            return Err(Error::Parse(format!(
                "shape.inputs has {} entries for {} parties",
                self.inputs.len(),
                self.parties
            )));
        }
        for (k, (&m, outs)) in self.inputs.iter().zip(&self.outputs).enumerate() {
            if m != outs.len() {
                return Err(Error::Parse(format!(
                    "shape.inputs[{k}] is {m} but shape.outputs[{k}] has {} entries",
                    outs.len()
                )));
            }
        }
        BoxShape::new(self.outputs.clone())
    }
}

fn format_all(v: &[Rational]) -> Vec<String> {
    v.iter().map(rational::format).collect()
}

fn parse_all(field: &str, v: &[String]) -> Result<Vec<Rational>> {
    v.iter()
        .enumerate()
        .map(|(i, s)| rational::parse(s).map_err(|e| Error::Parse(format!("{field}[{i}]: {e}"))))
        .collect()
}

fn parse_field(field: &str, s: &str) -> Result<Rational> {
    rational::parse(s).map_err(|e| Error::Parse(format!("{field}: {e}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDoc {
    pub shape: ShapeDoc,
    pub table: Vec<String>,
}

impl From<&CorrBox> for BoxDoc {
    fn from(b: &CorrBox) -> Self {
        BoxDoc {
            shape: b.shape().into(),
            table: format_all(b.table()),
        }
    }
}

impl BoxDoc {
    /// The box, not yet validated.
    pub fn to_box(&self) -> Result<CorrBox> {
        CorrBox::new(self.shape.to_shape()?, parse_all("table", &self.table)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalDoc {
    pub shape: ShapeDoc,
    pub coefficients: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_bound: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebraic_max: Option<String>,
}

impl From<&BellFunctional> for FunctionalDoc {
    fn from(f: &BellFunctional) -> Self {
        FunctionalDoc {
            shape: (&f.shape).into(),
            coefficients: format_all(&f.coefficients),
            local_bound: f.local_bound.as_ref().map(rational::format),
            algebraic_max: f.algebraic_max.as_ref().map(rational::format),
        }
    }
}

impl FunctionalDoc {
    pub fn to_functional(&self) -> Result<BellFunctional> {
        let mut f = BellFunctional::new(
            self.shape.to_shape()?,
            parse_all("coefficients", &self.coefficients)?,
        )?;
        f.local_bound = self.local_bound.as_deref().map(|s| parse_field("local_bound", s)).transpose()?;
        f.algebraic_max = self
            .algebraic_max
            .as_deref()
            .map(|s| parse_field("algebraic_max", s))
            .transpose()?;
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDoc {
    pub functional: FunctionalDoc,
    pub threshold: String,
    pub value: String,
}

impl From<&SeparatingCertificate> for CertificateDoc {
    fn from(c: &SeparatingCertificate) -> Self {
        CertificateDoc {
            functional: (&c.functional).into(),
            threshold: rational::format(&c.threshold),
            value: rational::format(&c.value),
        }
    }
}

impl CertificateDoc {
    pub fn to_certificate(&self) -> Result<SeparatingCertificate> {
        Ok(SeparatingCertificate {
            functional: self.functional.to_functional()?,
            threshold: parse_field("threshold", &self.threshold)?,
            value: parse_field("value", &self.value)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedStrategyDoc {
    pub weight: String,
    pub strategy: StrategyKind,
    pub table: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub shape: ShapeDoc,
    pub weights: Vec<WeightedStrategyDoc>,
}

impl ModelDoc {
    pub fn new(shape: &BoxShape, model: &LocalModel) -> Self {
        ModelDoc {
            shape: shape.into(),
            weights: model
                .weights
                .iter()
                .map(|(w, s)| WeightedStrategyDoc {
                    weight: rational::format(w),
                    strategy: s.kind.clone(),
                    table: format_all(s.table.table()),
                })
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<LocalModel> {
        let shape = self.shape.to_shape()?;
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let table = CorrBox::new(shape.clone(), parse_all(&format!("weights[{i}].table"), &w.table)?)?;
                Ok((
                    parse_field(&format!("weights[{i}].weight"), &w.weight)?,
                    DeterministicStrategy {
                        kind: w.strategy.clone(),
                        table,
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalModel { weights })
    }
}

/// A component box given inline or as a path relative to the wiring file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoxRef {
    File(String),
    Inline(BoxDoc),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub shape: ShapeDoc,
    /// Protocol party holding each side.
    pub parties: Vec<usize>,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub resource: Option<BoxRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WiringDoc {
    pub shape: ShapeDoc,
    pub components: Vec<ComponentDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shared: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<Message>,
    pub programs: Vec<PartyProgram>,
}

impl WiringDoc {
    /// Document for `w` with `boxes` inlined (or none when `boxes` is empty).
    pub fn new(w: &Wiring, boxes: &[CorrBox]) -> Self {
        WiringDoc {
            shape: (&w.shape).into(),
            components: w
                .components
                .iter()
                .enumerate()
                .map(|(i, c)| ComponentDoc {
                    shape: (&c.shape).into(),
                    parties: c.parties.clone(),
                    resource: boxes.get(i).map(|b| BoxRef::Inline(b.into())),
                })
                .collect(),
            shared: format_all(&w.shared),
            messages: w.messages.clone(),
            programs: w.programs.clone(),
        }
    }

    pub fn to_wiring(&self) -> Result<Wiring> {
        let components = self
            .components
            .iter()
            .map(|c| {
                Ok(ComponentSlot {
                    shape: c.shape.to_shape()?,
                    parties: c.parties.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let w = Wiring {
            shape: self.shape.to_shape()?,
            components,
            shared: parse_all("shared", &self.shared)?,
            messages: self.messages.clone(),
            programs: self.programs.clone(),
        };
        w.check()?;
        Ok(w)
    }

    /// Component boxes, resolving file references against `base_dir`.
    /// Every component must name its box.
    pub fn resources(&self, base_dir: &Path) -> Result<Vec<CorrBox>> {
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| match &c.resource {
                None => Err(Error::Parse(format!("components[{i}].box is missing"))),
                Some(BoxRef::Inline(doc)) => doc.to_box(),
                Some(BoxRef::File(p)) => read_box(&base_dir.join(p)),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassEntry {
    pub id: usize,
    pub representative: String,
    pub orbit_size: usize,
    pub listed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSummary {
    pub shape: ShapeDoc,
    pub vertices: usize,
    pub complete: bool,
    pub classes: Vec<ClassEntry>,
}

/// Vertex list stored as one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VRepDoc {
    pub shape: ShapeDoc,
    pub complete: bool,
    pub vertices: Vec<BoxDoc>,
}

impl From<&VRep> for VRepDoc {
    fn from(v: &VRep) -> Self {
        VRepDoc {
            shape: (&v.shape).into(),
            complete: v.complete,
            vertices: v.vertices.iter().map(BoxDoc::from).collect(),
        }
    }
}

impl VRepDoc {
    pub fn to_vrep(&self) -> Result<VRep> {
        let shape = self.shape.to_shape()?;
        let vertices = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let b = d.to_box()?;
                if b.shape() != &shape {
                    return Err(Error::Parse(format!("vertices[{i}].shape differs from shape")));
                }
                Ok(b)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VRep {
            shape,
            vertices,
            complete: self.complete,
        })
    }
}

pub const VREP_FILE: &str = "vrep.json";
pub const SUMMARY_FILE: &str = "classes.json";

pub fn class_file_name(id: usize) -> String {
    format!("class_{id:03}.box")
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("documents always serialize");
    s.push('\n');
    s
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

fn read_doc<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write_doc<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    fs::write(path, to_json(doc)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Reads a box document without validating the box.
pub fn read_box(path: &Path) -> Result<CorrBox> {
    read_doc::<BoxDoc>(path)?.to_box()
}

pub fn write_box(path: &Path, b: &CorrBox) -> Result<()> {
    write_doc(path, &BoxDoc::from(b))
}

pub fn read_functional(path: &Path) -> Result<BellFunctional> {
    read_doc::<FunctionalDoc>(path)?.to_functional()
}

/// Wiring plus its component boxes.
pub fn read_wiring(path: &Path) -> Result<(Wiring, Vec<CorrBox>)> {
    let doc: WiringDoc = read_doc(path)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_else(PathBuf::new);
    Ok((doc.to_wiring()?, doc.resources(&dir)?))
}

pub fn write_wiring(path: &Path, w: &Wiring, boxes: &[CorrBox]) -> Result<()> {
    write_doc(path, &WiringDoc::new(w, boxes))
}

/// Writes `vrep.json`, one box file per class representative and
/// `classes.json` into `dir`.
pub fn write_vertex_dir(dir: &Path, vrep: &VRep, classes: &[OrbitClass]) -> Result<ClassSummary> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    write_doc(&dir.join(VREP_FILE), &VRepDoc::from(vrep))?;
    let summary = summarize(vrep, classes);
    for (c, entry) in classes.iter().zip(&summary.classes) {
        write_box(&dir.join(&entry.representative), &c.representative)?;
    }
    write_doc(&dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

pub fn summarize(vrep: &VRep, classes: &[OrbitClass]) -> ClassSummary {
    ClassSummary {
        shape: (&vrep.shape).into(),
        vertices: vrep.len(),
        complete: vrep.complete,
        classes: classes
            .iter()
            .enumerate()
            .map(|(id, c)| ClassEntry {
                id,
                representative: class_file_name(id),
                orbit_size: c.orbit_size,
                listed: c.size,
            })
            .collect(),
    }
}

/// Reads `vrep.json` from `dir`, or failing that every `*.box` file in it
/// (sorted by name) as an incomplete list.
pub fn read_vertex_dir(dir: &Path) -> Result<VRep> {
    let vfile = dir.join(VREP_FILE);
    if vfile.exists() {
        return read_doc::<VRepDoc>(&vfile)?.to_vrep();
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "box"))
        .collect();
    paths.sort();
    let vertices = paths.iter().map(|p| read_box(p)).collect::<Result<Vec<_>>>()?;
    let shape = vertices
        .first()
        .map(|b| b.shape().clone())
        .ok_or_else(|| Error::Parse(format!("{} holds no box files", dir.display())))?;
    if let Some(i) = vertices.iter().position(|b| b.shape() != &shape) {
        return Err(Error::ShapeMismatch(format!("{} has a different shape", paths[i].display())));
    }
    Ok(VRep {
        shape,
        vertices,
        complete: false,
    })
}
