//! Parameterised partial-match query templates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gmrqb::GMRQB_COLUMNS;
use crate::data::DataSet;
use crate::error::{Error, Result};
use crate::query::RangeQuery;

const GMRQB_TEMPLATES: &str = include_str!("../../config/gmrqb_templates.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredicateStyle {
    /// `lower = upper`, one value sampled from the data.
    Point,
    /// Min and max of two sampled values.
    Range,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TemplatePredicate {
    pub dim: usize,
    pub style: PredicateStyle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryTemplate {
    pub id: u8,
    pub predicates: Vec<TemplatePredicate>,
    /// Published mean selectivity in percent.
    pub target_selectivity: f64,
    pub target_sigma: f64,
}

impl QueryTemplate {
    pub fn queried_dims(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.predicates.iter().map(|p| p.dim).collect();
        d.sort_unstable();
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    templates: Vec<QueryTemplate>,
}

impl TemplateSet {
    /// The bundled genomic templates.
    pub fn gmrqb() -> Self {
        let names: Vec<&str> = GMRQB_COLUMNS.iter().map(|c| c.0).collect();
        Self::parse(GMRQB_TEMPLATES, &names).expect("bundled template config is valid")
    }

    /// Parses the template config format; columns are given by name (from
    /// `columns`) or by index.
    pub fn parse(text: &str, columns: &[&str]) -> Result<Self> {
        let mut templates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| Error::TemplateConfig {
                line: i + 1,
                message,
            };
            let mut tok = line.split_whitespace();
            let mut number = |what: &str| -> Result<&str> {
                tok.next().ok_or_else(|| bad(format!("missing {what}")))
            };
            let id: u8 = number("id")?.parse().map_err(|e| bad(format!("id: {e}")))?;
            let sel: f64 = number("selectivity")?
                .parse()
                .map_err(|e| bad(format!("selectivity: {e}")))?;
            let sigma: f64 = number("sigma")?
                .parse()
                .map_err(|e| bad(format!("sigma: {e}")))?;
            let mut predicates = Vec::new();
            for p in tok {
                let (col, style) = p
                    .split_once('=')
                    .ok_or_else(|| bad(format!("expected column=style, got {p:?}")))?;
                let dim = match columns.iter().position(|&c| c == col) {
                    Some(d) => d,
                    None => col
                        .parse()
                        .map_err(|_| bad(format!("unknown column {col:?}")))?,
                };
                let style = match style {
                    "point" => PredicateStyle::Point,
                    "range" => PredicateStyle::Range,
                    other => return Err(bad(format!("unknown style {other:?}"))),
                };
                if predicates.iter().any(|q: &TemplatePredicate| q.dim == dim) {
                    return Err(bad(format!("column {col:?} listed twice")));
                }
                predicates.push(TemplatePredicate { dim, style });
            }
            if predicates.is_empty() {
                return Err(bad("template without predicates".into()));
            }
            if templates.iter().any(|t: &QueryTemplate| t.id == id) {
                return Err(bad(format!("duplicate template id {id}")));
            }
            templates.push(QueryTemplate {
                id,
                predicates,
                target_selectivity: sel,
                target_sigma: sigma,
            });
        }
        Ok(Self { templates })
    }

    pub fn templates(&self) -> &[QueryTemplate] {
        &self.templates
    }

    pub fn get(&self, id: u8) -> Option<&QueryTemplate> {
        self.templates.iter().find(|t| t.id == id)
    }

    /// `per_template` instances of every template, template-major.
    pub fn mixed_workload(
        &self,
        data: &DataSet,
        per_template: usize,
        seed: u64,
    ) -> Result<Vec<RangeQuery>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(per_template * self.templates.len());
        for t in &self.templates {
            for _ in 0..per_template {
                out.push(instantiate_with(t, data, &mut rng)?);
            }
        }
        Ok(out)
    }
}

/// Fills a template with bounds drawn from values present in `data`.
pub fn instantiate_template(
    template: &QueryTemplate,
    data: &DataSet,
    seed: u64,
) -> Result<RangeQuery> {
    instantiate_with(template, data, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub(crate) fn instantiate_with<R: Rng>(
    template: &QueryTemplate,
    data: &DataSet,
    rng: &mut R,
) -> Result<RangeQuery> {
    let m = data.dims();
    if let Some(p) = template.predicates.iter().find(|p| p.dim >= m) {
        return Err(Error::TemplateDimension {
            template: template.id,
            dim: p.dim,
            dims: m,
        });
    }
    if data.is_empty() {
        return Err(Error::NotEnoughObjects {
            needed: 1,
            found: 0,
        });
    }
    let n = data.len();
    let mut q = RangeQuery::unbounded(m);
    for p in &template.predicates {
        let a = data.row(rng.gen_range(0..n))[p.dim];
        let (lo, hi) = match p.style {
            PredicateStyle::Point => (a, a),
            PredicateStyle::Range => {
                let b = data.row(rng.gen_range(0..n))[p.dim];
                (a.min(b), a.max(b))
            }
        };
        q = q.with_predicate(p.dim, lo, hi)?;
    }
    Ok(q)
}
