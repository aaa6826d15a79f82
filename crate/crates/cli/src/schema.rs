//! Versioned JSON instance files. Rationals are strings such as `"3/2"`.

use std::collections::BTreeMap;

use serde::Deserialize;

use semireg::algebroid::{Connection, Form, LieAlgebroidSpec};
use semireg::exact::{parse_q, Laurent, Matrix, Q};
use semireg::liepair::LiePair;
use semireg::tot::LMatrix;

use crate::Failure;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct InstanceFile {
    pub format_version: u32,
    pub rationals_as_strings: bool,
    #[serde(default)]
    pub algebroid: Option<AlgebroidInput>,
    #[serde(default)]
    pub pair: Option<PairInput>,
    #[serde(default)]
    pub module: Option<ModuleInput>,
    #[serde(default)]
    pub deformation: Option<DeformInput>,
    #[serde(default)]
    pub two_chart: Option<TwoChartInput>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AlgebroidInput {
    pub basis: Vec<String>,
    #[serde(default)]
    pub brackets: Vec<BracketInput>,
}

/// `[left, right] = Σ value[k]·k`. A bracket whose reverse is not listed fixes it by antisymmetry.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BracketInput {
    pub left: String,
    pub right: String,
    pub value: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PairInput {
    pub sub: Vec<String>,
}

/// Matrices keyed by basis name; absent names act by zero.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ModuleInput {
    pub dim: usize,
    #[serde(default)]
    pub matrices: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FormTerm {
    pub forms: Vec<String>,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct DeformInput {
    /// First-order element as an `End E`-valued form on the subalgebra.
    #[serde(default)]
    pub first_order: Vec<FormTerm>,
    /// First-order element `d(1 ⊗ M)`; used instead of `first-order` when present.
    #[serde(default)]
    pub exact: Option<Vec<Vec<String>>>,
    /// Report-only mode on an arbitrary degree-2 element given in `obstruction`.
    #[serde(default)]
    pub exploratory: bool,
    #[serde(default)]
    pub obstruction: Vec<FormTerm>,
    #[serde(default = "default_ks")]
    pub k: Vec<usize>,
}

fn default_ks() -> Vec<usize> {
    vec![0, 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SheafKind {
    #[default]
    Module,
    DeRham,
}

/// Laurent polynomials are maps from exponent strings to rational strings.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TwoChartInput {
    #[serde(default)]
    pub sheaf: SheafKind,
    #[serde(default)]
    pub line_bundle: Option<i64>,
    #[serde(default)]
    pub transition: Option<Vec<Vec<BTreeMap<String, String>>>>,
    #[serde(default)]
    pub degree: i32,
    #[serde(default)]
    pub window: Option<(i64, i64)>,
}

pub fn parse(bytes: &[u8]) -> Result<InstanceFile, Failure> {
    let f: InstanceFile = serde_json::from_slice(bytes).map_err(|e| Failure::Schema(e.to_string()))?;
    if f.format_version != FORMAT_VERSION {
        return Err(Failure::Schema(format!("unsupported format-version {}", f.format_version)));
    }
    if !f.rationals_as_strings {
        return Err(Failure::Schema("rationals-as-strings must be true".into()));
    }
    Ok(f)
}

pub fn rational(s: &str) -> Result<Q, Failure> {
    parse_q(s).map_err(|_| Failure::Schema(format!("not a rational: {s:?}")))
}

pub fn matrix(rows: &[Vec<String>], dim: usize) -> Result<Matrix, Failure> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Failure::Schema(format!("matrix is not {dim}x{dim}")));
    }
    let rows = rows.iter().map(|r| r.iter().map(|s| rational(s)).collect()).collect::<Result<_, _>>()?;
    Ok(Matrix::from_rows(rows))
}

fn index(spec: &LieAlgebroidSpec, name: &str) -> Result<usize, Failure> {
    spec.index_of(name).ok_or_else(|| Failure::Schema(format!("undefined basis element {name:?}")))
}

impl InstanceFile {
    pub fn spec(&self) -> Result<LieAlgebroidSpec, Failure> {
        let a = self.algebroid.as_ref().ok_or_else(|| Failure::Schema("missing algebroid".into()))?;
        let mut seen = a.basis.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != a.basis.len() || a.basis.is_empty() || a.basis.len() > 8 {
            return Err(Failure::Schema("basis names must be distinct, between 1 and 8 of them".into()));
        }
        let names: Vec<&str> = a.basis.iter().map(String::as_str).collect();
        let empty = LieAlgebroidSpec::point(&names, &[]);
        let mut entries = Vec::new();
        for b in &a.brackets {
            let i = index(&empty, &b.left)?;
            let j = index(&empty, &b.right)?;
            let v = b.value.iter().map(|(k, c)| Ok((index(&empty, k)?, rational(c)?))).collect::<Result<Vec<_>, Failure>>()?;
            entries.push((i, j, v));
        }
        Ok(LieAlgebroidSpec::point(&names, &entries))
    }

    pub fn pair(&self, spec: &LieAlgebroidSpec) -> Result<Option<LiePair>, Failure> {
        let Some(p) = &self.pair else { return Ok(None) };
        let sub = p.sub.iter().map(|n| index(spec, n)).collect::<Result<Vec<_>, _>>()?;
        LiePair::new(spec.clone(), &sub).map(Some).map_err(|e| Failure::invariant("pair", &e.to_string()))
    }

    /// The module on `directions` (ambient indices), in that order.
    pub fn module_on(&self, spec: &LieAlgebroidSpec, directions: &[usize]) -> Result<Option<Connection>, Failure> {
        let Some(m) = &self.module else { return Ok(None) };
        if m.dim == 0 {
            return Err(Failure::Schema("module dimension must be positive".into()));
        }
        for name in m.matrices.keys() {
            let i = index(spec, name)?;
            if !directions.contains(&i) {
                return Err(Failure::Schema(format!("module matrix given for {name:?} outside the acting algebra")));
            }
        }
        let mats = directions
            .iter()
            .map(|&i| match m.matrices.get(&spec.names[i]) {
                Some(rows) => matrix(rows, m.dim),
                None => Ok(Matrix::zeros(m.dim, m.dim)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some(Connection::new(m.dim, mats)))
    }

    pub fn form(&self, spec: &LieAlgebroidSpec, terms: &[FormTerm], dim: usize) -> Result<Form<Matrix>, Failure> {
        let mut f = Form::zero(spec.rank());
        for t in terms {
            let idx = t.forms.iter().map(|n| index(spec, n)).collect::<Result<Vec<_>, _>>()?;
            f = f.add(&Form::term(spec.rank(), &idx, matrix(&t.matrix, dim)?));
        }
        Ok(f)
    }
}

pub fn laurent(map: &BTreeMap<String, String>) -> Result<Laurent, Failure> {
    let mut l = Laurent::zero();
    for (e, c) in map {
        let e: i64 = e.parse().map_err(|_| Failure::Schema(format!("not an exponent: {e:?}")))?;
        l.add_term(e, &rational(c)?);
    }
    Ok(l)
}

impl TwoChartInput {
    pub fn transition(&self) -> Result<LMatrix, Failure> {
        match (&self.line_bundle, &self.transition) {
            (Some(n), None) => Ok(LMatrix { n: 1, entries: vec![Laurent::monomial(num_one(), *n)] }),
            (None, Some(rows)) => {
                let n = rows.len();
                if n == 0 || rows.iter().any(|r| r.len() != n) {
                    return Err(Failure::Schema("transition must be a nonempty square matrix".into()));
                }
                let entries = rows.iter().flatten().map(laurent).collect::<Result<_, _>>()?;
                Ok(LMatrix { n, entries })
            }
            _ => Err(Failure::Schema("give exactly one of line-bundle and transition".into())),
        }
    }
}

fn num_one() -> Q {
    Q::from_integer(1.into())
}
